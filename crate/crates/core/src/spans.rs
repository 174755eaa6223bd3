//! Linguistic span annotation and sentence reconstruction with boundary
//! markers.
//!
//! An annotator proposes spans over the original token sequence; kept spans
//! are validated, de-overlapped (leftmost start wins, then longest), and
//! reconstruction inserts `[DEP]`/`[/DEP]` or `[SDP]`/`[/SDP]` marker tokens
//! around each span. Stripping the markers always reproduces the original
//! sentence.

use std::collections::HashMap;
use std::io::BufRead;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tokenize::{self, tokenize};

/// Span source: dependency grammar or semantic dependency parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SpanKind {
    #[serde(rename = "DEP")]
    Dep,
    #[serde(rename = "SDP")]
    Sdp,
}

impl SpanKind {
    pub fn open_marker(self) -> &'static str {
        match self {
            SpanKind::Dep => tokenize::DEP_OPEN,
            SpanKind::Sdp => tokenize::SDP_OPEN,
        }
    }

    pub fn close_marker(self) -> &'static str {
        match self {
            SpanKind::Dep => tokenize::DEP_CLOSE,
            SpanKind::Sdp => tokenize::SDP_CLOSE,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SpanKind::Dep => "DEP",
            SpanKind::Sdp => "SDP",
        }
    }
}

impl FromStr for SpanKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "DEP" => Ok(SpanKind::Dep),
            "SDP" => Ok(SpanKind::Sdp),
            other => Err(format!("unknown span kind {other:?}")),
        }
    }
}

/// Half-open token range `[start, end)` with its relation label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinguisticSpan {
    pub start: usize,
    pub end: usize,
    pub kind: SpanKind,
    pub label: String,
}

impl LinguisticSpan {
    pub fn new(start: usize, end: usize, kind: SpanKind, label: impl Into<String>) -> Self {
        Self {
            start,
            end,
            kind,
            label: label.into(),
        }
    }
}

/// Tokens plus the retained, pairwise non-overlapping spans.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub tokens: Vec<String>,
    pub spans: Vec<LinguisticSpan>,
}

/// Maps a reconstructed position back to its source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Original(usize),
    Marker,
}

/// Original sentence with marker tokens inserted around each span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconstructedSentence {
    pub tokens: Vec<String>,
    /// Marker-delimited range per span, markers included, end exclusive.
    pub span_positions: Vec<(usize, usize)>,
    pub origin_map: Vec<Origin>,
}

impl ReconstructedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Remove marker tokens, recovering the original token sequence.
    pub fn strip_markers(&self) -> Vec<String> {
        self.tokens
            .iter()
            .zip(&self.origin_map)
            .filter(|(_, o)| matches!(o, Origin::Original(_)))
            .map(|(t, _)| t.clone())
            .collect()
    }

    /// Reconstructed index of an original token position, if still present.
    pub fn position_of_original(&self, original: usize) -> Option<usize> {
        self.origin_map
            .iter()
            .position(|o| *o == Origin::Original(original))
    }
}

#[derive(Debug, Error)]
pub enum SpanError {
    #[error("cannot annotate an empty sentence")]
    EmptySentence,
    #[error("annotator span {start}..{end} ({kind} {label:?}) out of bounds for {len} tokens")]
    OutOfBounds {
        start: usize,
        end: usize,
        kind: &'static str,
        label: String,
        len: usize,
    },
    #[error("annotation sidecar line {line}: {msg}")]
    Sidecar { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Provides candidate spans for a corpus sentence. `line` is the zero-based
/// corpus line index, used by file-backed annotators.
pub trait SpanAnnotator {
    fn spans(&self, line: usize, tokens: &[String]) -> Result<Vec<LinguisticSpan>, SpanError>;
}

/// Annotator that never proposes spans.
#[derive(Debug, Clone, Copy, Default)]
pub struct EmptyAnnotator;

impl SpanAnnotator for EmptyAnnotator {
    fn spans(&self, _line: usize, _tokens: &[String]) -> Result<Vec<LinguisticSpan>, SpanError> {
        Ok(Vec::new())
    }
}

/// Validate annotator output and resolve overlaps: sort by leftmost start,
/// then longest, and drop any span conflicting with an earlier kept one.
pub fn annotate<A: SpanAnnotator + ?Sized>(
    line: usize,
    tokens: Vec<String>,
    annotator: &A,
) -> Result<AnnotatedSentence, SpanError> {
    if tokens.is_empty() {
        return Err(SpanError::EmptySentence);
    }
    let mut proposed = annotator.spans(line, &tokens)?;
    for s in &proposed {
        if s.start >= s.end || s.end > tokens.len() {
            return Err(SpanError::OutOfBounds {
                start: s.start,
                end: s.end,
                kind: s.kind.as_str(),
                label: s.label.clone(),
                len: tokens.len(),
            });
        }
    }
    proposed.sort_by(|a, b| a.start.cmp(&b.start).then(b.end.cmp(&a.end)));
    let mut spans: Vec<LinguisticSpan> = Vec::new();
    for s in proposed {
        if spans.last().is_none_or(|kept| s.start >= kept.end) {
            spans.push(s);
        }
    }
    Ok(AnnotatedSentence { tokens, spans })
}

/// Insert kind-matched boundary markers around each span. The output length
/// is the input length plus two markers per span.
pub fn reconstruct(sentence: &AnnotatedSentence) -> ReconstructedSentence {
    // (original slot index, span), in start order; spans are non-overlapping.
    let mut ordered: Vec<(usize, &LinguisticSpan)> = sentence.spans.iter().enumerate().collect();
    ordered.sort_by_key(|(_, s)| s.start);
    let mut tokens = Vec::with_capacity(sentence.tokens.len() + 2 * sentence.spans.len());
    let mut origin_map = Vec::with_capacity(tokens.capacity());
    let mut span_positions = vec![(0usize, 0usize); sentence.spans.len()];
    let mut next = ordered.into_iter().peekable();
    let mut open: Option<(usize, &LinguisticSpan, usize)> = None;
    for (i, tok) in sentence.tokens.iter().enumerate() {
        if next.peek().is_some_and(|(_, s)| s.start == i) {
            let (slot, span) = next.next().unwrap();
            tokens.push(span.kind.open_marker().to_string());
            origin_map.push(Origin::Marker);
            open = Some((slot, span, tokens.len() - 1));
        }
        tokens.push(tok.clone());
        origin_map.push(Origin::Original(i));
        if let Some((slot, span, open_at)) = open {
            if span.end == i + 1 {
                tokens.push(span.kind.close_marker().to_string());
                origin_map.push(Origin::Marker);
                span_positions[slot] = (open_at, tokens.len());
                open = None;
            }
        }
    }
    ReconstructedSentence {
        tokens,
        span_positions,
        origin_map,
    }
}

/// Dictionary entry: a token sequence tagged with a span kind and label.
#[derive(Debug, Clone)]
pub struct DictEntry {
    pub tokens: Vec<String>,
    pub kind: SpanKind,
    pub label: String,
}

/// Lexicon-backed annotator: every occurrence of a dictionary phrase becomes
/// a candidate span. Overlaps are left for `annotate` to resolve.
#[derive(Debug, Clone, Default)]
pub struct DictionaryAnnotator {
    entries: Vec<DictEntry>,
}

impl DictionaryAnnotator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, phrase: &str, kind: SpanKind, label: impl Into<String>) {
        let tokens = tokenize(phrase);
        if tokens.is_empty() {
            return;
        }
        self.entries.push(DictEntry {
            tokens,
            kind,
            label: label.into(),
        });
    }

    /// Load entries from tab-separated lines: phrase, kind (DEP|SDP), label.
    pub fn load<R: BufRead>(reader: R) -> Result<Self, SpanError> {
        let mut dict = Self::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(SpanError::Sidecar {
                    line: idx + 1,
                    msg: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            let kind = SpanKind::from_str(fields[1]).map_err(|msg| SpanError::Sidecar {
                line: idx + 1,
                msg,
            })?;
            dict.add(fields[0], kind, fields[2]);
        }
        Ok(dict)
    }
}

impl SpanAnnotator for DictionaryAnnotator {
    fn spans(&self, _line: usize, tokens: &[String]) -> Result<Vec<LinguisticSpan>, SpanError> {
        let mut found = Vec::new();
        for entry in &self.entries {
            let n = entry.tokens.len();
            if n == 0 || n > tokens.len() {
                continue;
            }
            for start in 0..=(tokens.len() - n) {
                if tokens[start..start + n] == entry.tokens[..] {
                    found.push(LinguisticSpan::new(
                        start,
                        start + n,
                        entry.kind,
                        entry.label.clone(),
                    ));
                }
            }
        }
        Ok(found)
    }
}

/// Annotator backed by a sidecar file of precomputed spans, one JSON object
/// per line: `{"line": int, "spans": [[start, end, "DEP"|"SDP", "label"], ...]}`.
#[derive(Debug, Clone, Default)]
pub struct SidecarAnnotator {
    by_line: HashMap<usize, Vec<LinguisticSpan>>,
}

impl SidecarAnnotator {
    pub fn load<R: BufRead>(reader: R) -> Result<Self, SpanError> {
        let mut by_line = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let file_line = idx + 1;
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let value: serde_json::Value =
                serde_json::from_str(&line).map_err(|e| SpanError::Sidecar {
                    line: file_line,
                    msg: e.to_string(),
                })?;
            let record = parse_sidecar_record(&value).map_err(|msg| SpanError::Sidecar {
                line: file_line,
                msg,
            })?;
            by_line.insert(record.0, record.1);
        }
        Ok(Self { by_line })
    }
}

fn parse_sidecar_record(value: &serde_json::Value) -> Result<(usize, Vec<LinguisticSpan>), String> {
    let line = value
        .get("line")
        .and_then(|v| v.as_u64())
        .ok_or("missing integer \"line\" field")? as usize;
    let raw = value
        .get("spans")
        .and_then(|v| v.as_array())
        .ok_or("missing \"spans\" array")?;
    let mut spans = Vec::with_capacity(raw.len());
    for item in raw {
        let parts = item.as_array().ok_or("span must be an array")?;
        if parts.len() != 4 {
            return Err(format!("span must have 4 elements, found {}", parts.len()));
        }
        let start = parts[0].as_u64().ok_or("span start must be an integer")? as usize;
        let end = parts[1].as_u64().ok_or("span end must be an integer")? as usize;
        let kind: SpanKind = parts[2]
            .as_str()
            .ok_or("span kind must be a string")?
            .parse()?;
        let label = parts[3].as_str().ok_or("span label must be a string")?;
        spans.push(LinguisticSpan::new(start, end, kind, label));
    }
    Ok((line, spans))
}

impl SpanAnnotator for SidecarAnnotator {
    fn spans(&self, line: usize, _tokens: &[String]) -> Result<Vec<LinguisticSpan>, SpanError> {
        Ok(self.by_line.get(&line).cloned().unwrap_or_default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Cursor;

    fn toks(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    struct Fixed(Vec<LinguisticSpan>);

    impl SpanAnnotator for Fixed {
        fn spans(&self, _l: usize, _t: &[String]) -> Result<Vec<LinguisticSpan>, SpanError> {
            Ok(self.0.clone())
        }
    }

    #[test]
    fn annotate_no_spans() {
        let s = annotate(0, toks(4), &EmptyAnnotator).unwrap();
        assert!(s.spans.is_empty());
        assert_eq!(s.tokens.len(), 4);
    }

    #[test]
    fn annotate_rejects_empty_sentence() {
        assert!(matches!(
            annotate(0, Vec::new(), &EmptyAnnotator),
            Err(SpanError::EmptySentence)
        ));
    }

    #[test]
    fn annotate_resolves_overlap_leftmost() {
        let a = Fixed(vec![
            LinguisticSpan::new(2, 4, SpanKind::Sdp, "non-agent"),
            LinguisticSpan::new(1, 3, SpanKind::Dep, "subject-verb"),
        ]);
        let s = annotate(0, toks(6), &a).unwrap();
        assert_eq!(s.spans.len(), 1);
        assert_eq!((s.spans[0].start, s.spans[0].end), (1, 3));
    }

    #[test]
    fn annotate_prefers_longest_at_same_start() {
        let a = Fixed(vec![
            LinguisticSpan::new(1, 2, SpanKind::Dep, "short"),
            LinguisticSpan::new(1, 4, SpanKind::Sdp, "long"),
        ]);
        let s = annotate(0, toks(6), &a).unwrap();
        assert_eq!(s.spans.len(), 1);
        assert_eq!((s.spans[0].start, s.spans[0].end), (1, 4));
    }

    #[test]
    fn annotate_surfaces_out_of_bounds() {
        let a = Fixed(vec![LinguisticSpan::new(3, 9, SpanKind::Dep, "adverbial")]);
        match annotate(0, toks(4), &a) {
            Err(SpanError::OutOfBounds { start, end, .. }) => {
                assert_eq!((start, end), (3, 9));
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn dictionary_annotator_matches_phrase() {
        let mut dict = DictionaryAnnotator::new();
        dict.add("t2 t3", SpanKind::Dep, "verb-object");
        let s = annotate(0, toks(6), &dict).unwrap();
        assert_eq!(s.spans.len(), 1);
        let span = &s.spans[0];
        assert_eq!((span.start, span.end, span.kind), (2, 4, SpanKind::Dep));
    }

    #[test]
    fn reconstruct_identity_without_spans() {
        let s = AnnotatedSentence {
            tokens: toks(5),
            spans: vec![],
        };
        let r = reconstruct(&s);
        assert_eq!(r.tokens, s.tokens);
        assert!(r.span_positions.is_empty());
    }

    #[test]
    fn reconstruct_single_sdp_span() {
        let s = AnnotatedSentence {
            tokens: toks(6),
            spans: vec![LinguisticSpan::new(2, 4, SpanKind::Sdp, "non-agent")],
        };
        let r = reconstruct(&s);
        assert_eq!(
            r.tokens,
            vec!["t0", "t1", "[SDP]", "t2", "t3", "[/SDP]", "t4", "t5"]
        );
        assert_eq!(r.span_positions, vec![(2, 6)]);
        assert_eq!(r.strip_markers(), s.tokens);
    }

    #[test]
    fn reconstruct_adjacent_spans() {
        let s = AnnotatedSentence {
            tokens: toks(2),
            spans: vec![
                LinguisticSpan::new(0, 1, SpanKind::Dep, "subject-verb"),
                LinguisticSpan::new(1, 2, SpanKind::Sdp, "non-agent"),
            ],
        };
        let r = reconstruct(&s);
        assert_eq!(
            r.tokens,
            vec!["[DEP]", "t0", "[/DEP]", "[SDP]", "t1", "[/SDP]"]
        );
        assert_eq!(r.span_positions, vec![(0, 3), (3, 6)]);
    }

    #[test]
    fn sidecar_annotator_lookup() {
        let text = r#"{"line": 0, "spans": [[1, 3, "DEP", "verb-object"]]}
{"line": 2, "spans": []}
"#;
        let side = SidecarAnnotator::load(Cursor::new(text)).unwrap();
        let s0 = side.spans(0, &toks(5)).unwrap();
        assert_eq!(s0.len(), 1);
        assert_eq!(s0[0].kind, SpanKind::Dep);
        assert!(side.spans(1, &toks(5)).unwrap().is_empty());
        assert!(side.spans(2, &toks(5)).unwrap().is_empty());
    }

    #[test]
    fn sidecar_rejects_bad_kind() {
        let text = r#"{"line": 0, "spans": [[1, 3, "XXX", "l"]]}"#;
        let err = SidecarAnnotator::load(Cursor::new(text)).unwrap_err();
        assert!(matches!(err, SpanError::Sidecar { line: 1, .. }));
    }

    proptest! {
        #[test]
        fn reconstruct_round_trips(len in 1usize..40, seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let tokens = toks(len);
            // Random non-overlapping spans.
            let mut spans = Vec::new();
            let mut pos = 0usize;
            while pos + 1 <= len {
                let start = pos + rng.gen_range(0..3);
                if start >= len { break; }
                let end = (start + 1 + rng.gen_range(0..3)).min(len);
                let kind = if rng.gen_bool(0.5) { SpanKind::Dep } else { SpanKind::Sdp };
                spans.push(LinguisticSpan::new(start, end, kind, "l"));
                pos = end;
            }
            let s = AnnotatedSentence { tokens: tokens.clone(), spans };
            let r = reconstruct(&s);
            prop_assert_eq!(r.strip_markers(), tokens);
            prop_assert_eq!(r.tokens.len(), s.tokens.len() + 2 * s.spans.len());
            // Markers balanced and non-nested: scanning left to right, an
            // opener must be closed before the next marker of either kind.
            let mut open: Option<&str> = None;
            for t in &r.tokens {
                match t.as_str() {
                    "[DEP]" | "[SDP]" => {
                        prop_assert!(open.is_none());
                        open = Some(t);
                    }
                    "[/DEP]" => {
                        prop_assert_eq!(open, Some("[DEP]"));
                        open = None;
                    }
                    "[/SDP]" => {
                        prop_assert_eq!(open, Some("[SDP]"));
                        open = None;
                    }
                    _ => {}
                }
            }
            prop_assert!(open.is_none());
        }
    }
}
