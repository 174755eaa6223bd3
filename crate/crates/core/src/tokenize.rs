//! Character-level tokenization for CJK text with whitespace-delimited Latin
//! runs, and the fixed vocabulary file (one token per line, id = line number).

use std::collections::HashMap;
use std::io::BufRead;

use thiserror::Error;

pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const MASK: &str = "[MASK]";
pub const DEP_OPEN: &str = "[DEP]";
pub const DEP_CLOSE: &str = "[/DEP]";
pub const SDP_OPEN: &str = "[SDP]";
pub const SDP_CLOSE: &str = "[/SDP]";

/// All reserved vocabulary entries, in the order fixtures write them.
pub const SPECIAL_TOKENS: [&str; 9] = [
    PAD, UNK, CLS, SEP, MASK, DEP_OPEN, DEP_CLOSE, SDP_OPEN, SDP_CLOSE,
];

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3000..=0x303F   // CJK punctuation
        | 0x3400..=0x4DBF // extension A
        | 0x4E00..=0x9FFF // unified ideographs
        | 0xF900..=0xFAFF // compatibility ideographs
        | 0xFF00..=0xFFEF // fullwidth forms
    )
}

/// Split text into tokens: every CJK character is its own token, anything
/// else groups into whitespace-delimited runs.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut run = String::new();
    for c in text.chars() {
        if c.is_whitespace() {
            if !run.is_empty() {
                tokens.push(std::mem::take(&mut run));
            }
        } else if is_cjk(c) {
            if !run.is_empty() {
                tokens.push(std::mem::take(&mut run));
            }
            tokens.push(c.to_string());
        } else {
            run.push(c);
        }
    }
    if !run.is_empty() {
        tokens.push(run);
    }
    tokens
}

#[derive(Debug, Error)]
pub enum VocabError {
    #[error("line {line}: empty token")]
    EmptyToken { line: usize },
    #[error("line {line}: duplicate token {token:?}")]
    DuplicateToken { line: usize, token: String },
    #[error("reserved token {0:?} missing from vocabulary")]
    MissingSpecial(&'static str),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Fixed vocabulary with cached ids for the reserved entries.
#[derive(Debug, Clone)]
pub struct Vocab {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
    pad: u32,
    unk: u32,
    cls: u32,
    sep: u32,
    mask: u32,
}

impl Vocab {
    pub fn load<R: BufRead>(reader: R) -> Result<Self, VocabError> {
        let mut tokens = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                return Err(VocabError::EmptyToken { line: idx + 1 });
            }
            tokens.push(line);
        }
        Self::from_tokens(tokens)
    }

    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, VocabError> {
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if tok.is_empty() {
                return Err(VocabError::EmptyToken { line: i + 1 });
            }
            if ids.insert(tok.clone(), i as u32).is_some() {
                return Err(VocabError::DuplicateToken {
                    line: i + 1,
                    token: tok.clone(),
                });
            }
        }
        let lookup = |name: &'static str| -> Result<u32, VocabError> {
            ids.get(name).copied().ok_or(VocabError::MissingSpecial(name))
        };
        // Marker ids resolve through the map like any token; only the five
        // structural specials get cached fields.
        for marker in [DEP_OPEN, DEP_CLOSE, SDP_OPEN, SDP_CLOSE] {
            lookup(marker)?;
        }
        Ok(Self {
            pad: lookup(PAD)?,
            unk: lookup(UNK)?,
            cls: lookup(CLS)?,
            sep: lookup(SEP)?,
            mask: lookup(MASK)?,
            tokens,
            ids,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    /// Token id, falling back to `[UNK]` for out-of-vocabulary tokens.
    pub fn id_or_unk(&self, token: &str) -> u32 {
        self.id(token).unwrap_or(self.unk)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn pad_id(&self) -> u32 {
        self.pad
    }

    pub fn unk_id(&self) -> u32 {
        self.unk
    }

    pub fn cls_id(&self) -> u32 {
        self.cls
    }

    pub fn sep_id(&self) -> u32 {
        self.sep
    }

    pub fn mask_id(&self) -> u32 {
        self.mask
    }
}
