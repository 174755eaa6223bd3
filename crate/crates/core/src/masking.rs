//! Mask planning and application over reconstructed sentences.
//!
//! A plan selects `max(1, round(mask_ratio * len))` positions. By default 60%
//! of the budget goes to the linguistic pool (tokens inside marker-delimited
//! ranges, markers included) and the rest to positions outside it; a
//! shortfall in either pool is backfilled from the other so the total budget
//! is always met when the sentence has enough positions.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::spans::ReconstructedSentence;
use crate::tokenize::Vocab;

pub const DEFAULT_MASK_RATIO: f64 = 0.15;
pub const DEFAULT_RANDOM_FRAC: f64 = 0.40;

/// Label value for positions that do not participate in the masked-LM loss.
pub const LABEL_IGNORE: i32 = -100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MaskKind {
    Random,
    Linguistic,
}

/// One planned mask: position in reconstructed coordinates, which pool it
/// came from, and the vocabulary id of the token being hidden.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaskedPosition {
    pub index: usize,
    pub kind: MaskKind,
    pub original_id: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MaskPlan {
    /// Distinct positions, sorted ascending.
    pub positions: Vec<MaskedPosition>,
}

impl MaskPlan {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// How planned positions are replaced in the input ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ReplacementPolicy {
    /// Every planned position becomes `[MASK]`.
    #[default]
    MaskOnly,
    /// 80% `[MASK]`, 10% random vocabulary token, 10% kept unchanged.
    BertStyle,
}

#[derive(Debug, Error)]
pub enum MaskError {
    #[error("sentence of {0} tokens is too short to mask")]
    SentenceTooShort(usize),
    #[error("{name} must lie in {bounds}, got {value}")]
    InvalidFraction {
        name: &'static str,
        bounds: &'static str,
        value: f64,
    },
    #[error("planned position {index} out of range for {len} tokens")]
    PositionOutOfRange { index: usize, len: usize },
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

/// Mask budget for a reconstructed length: `max(1, round(ratio * len))`.
pub fn mask_budget(len: usize, mask_ratio: f64) -> usize {
    round_half_up(mask_ratio * len as f64).max(1)
}

pub fn plan_masks<R: Rng>(
    sentence: &ReconstructedSentence,
    mask_ratio: f64,
    random_frac: f64,
    vocab: &Vocab,
    rng: &mut R,
) -> Result<MaskPlan, MaskError> {
    plan_masks_excluding(sentence, mask_ratio, random_frac, vocab, &[], rng)
}

/// Plan masks while keeping `excluded` positions (e.g. a linked entity span)
/// out of both pools. The budget is computed from the full length; if the
/// pools cannot cover it the plan is simply shorter.
pub fn plan_masks_excluding<R: Rng>(
    sentence: &ReconstructedSentence,
    mask_ratio: f64,
    random_frac: f64,
    vocab: &Vocab,
    excluded: &[usize],
    rng: &mut R,
) -> Result<MaskPlan, MaskError> {
    let len = sentence.len();
    if len < 2 {
        return Err(MaskError::SentenceTooShort(len));
    }
    if !(mask_ratio > 0.0 && mask_ratio < 1.0) {
        return Err(MaskError::InvalidFraction {
            name: "mask_ratio",
            bounds: "(0, 1)",
            value: mask_ratio,
        });
    }
    if !(0.0..=1.0).contains(&random_frac) {
        return Err(MaskError::InvalidFraction {
            name: "random_frac",
            bounds: "[0, 1]",
            value: random_frac,
        });
    }

    let budget = mask_budget(len, mask_ratio);
    let mut linguistic = vec![false; len];
    for &(start, end) in &sentence.span_positions {
        for slot in linguistic.iter_mut().take(end).skip(start) {
            *slot = true;
        }
    }
    let mut barred = vec![false; len];
    for &i in excluded {
        if i < len {
            barred[i] = true;
        }
    }
    let ling_pool: Vec<usize> = (0..len).filter(|&i| linguistic[i] && !barred[i]).collect();
    let rand_pool: Vec<usize> = (0..len).filter(|&i| !linguistic[i] && !barred[i]).collect();

    let ling_target = round_half_up((1.0 - random_frac) * budget as f64).min(budget);
    let take_ling = ling_target.min(ling_pool.len());
    let mut chosen_ling = draw(&ling_pool, take_ling, rng);
    let take_rand = (budget - take_ling).min(rand_pool.len());
    let chosen_rand = draw(&rand_pool, take_rand, rng);
    // Backfill a random-pool shortfall from the unused linguistic positions.
    let shortfall = budget - take_ling - take_rand;
    if shortfall > 0 {
        let unused: Vec<usize> = ling_pool
            .iter()
            .copied()
            .filter(|i| !chosen_ling.contains(i))
            .collect();
        chosen_ling.extend(draw(&unused, shortfall.min(unused.len()), rng));
    }

    let mut positions: Vec<MaskedPosition> = chosen_ling
        .into_iter()
        .map(|index| (index, MaskKind::Linguistic))
        .chain(chosen_rand.into_iter().map(|i| (i, MaskKind::Random)))
        .map(|(index, kind)| MaskedPosition {
            index,
            kind,
            original_id: vocab.id_or_unk(&sentence.tokens[index]),
        })
        .collect();
    positions.sort_by_key(|p| p.index);
    Ok(MaskPlan { positions })
}

fn draw<R: Rng>(pool: &[usize], amount: usize, rng: &mut R) -> Vec<usize> {
    if amount == 0 {
        return Vec::new();
    }
    rand::seq::index::sample(rng, pool.len(), amount)
        .into_iter()
        .map(|i| pool[i])
        .collect()
}

/// Replace every planned position with `[MASK]` and emit labels holding the
/// original ids there, `LABEL_IGNORE` elsewhere.
pub fn apply_masks(
    sentence: &ReconstructedSentence,
    plan: &MaskPlan,
    vocab: &Vocab,
) -> Result<(Vec<u32>, Vec<i32>), MaskError> {
    apply_with(sentence, plan, vocab, |_| Replacement::Mask)
}

pub fn apply_masks_with_policy<R: Rng>(
    sentence: &ReconstructedSentence,
    plan: &MaskPlan,
    vocab: &Vocab,
    policy: ReplacementPolicy,
    rng: &mut R,
) -> Result<(Vec<u32>, Vec<i32>), MaskError> {
    match policy {
        ReplacementPolicy::MaskOnly => apply_masks(sentence, plan, vocab),
        ReplacementPolicy::BertStyle => apply_with(sentence, plan, vocab, |vocab| {
            let u: f64 = rng.gen();
            if u < 0.8 {
                Replacement::Mask
            } else if u < 0.9 {
                Replacement::Token(rng.gen_range(0..vocab.len() as u32))
            } else {
                Replacement::Keep
            }
        }),
    }
}

enum Replacement {
    Mask,
    Token(u32),
    Keep,
}

fn apply_with(
    sentence: &ReconstructedSentence,
    plan: &MaskPlan,
    vocab: &Vocab,
    mut pick: impl FnMut(&Vocab) -> Replacement,
) -> Result<(Vec<u32>, Vec<i32>), MaskError> {
    let len = sentence.len();
    let mut ids: Vec<u32> = sentence.tokens.iter().map(|t| vocab.id_or_unk(t)).collect();
    let mut labels = vec![LABEL_IGNORE; len];
    for p in &plan.positions {
        if p.index >= len {
            return Err(MaskError::PositionOutOfRange {
                index: p.index,
                len,
            });
        }
        labels[p.index] = p.original_id as i32;
        match pick(vocab) {
            Replacement::Mask => ids[p.index] = vocab.mask_id(),
            Replacement::Token(id) => ids[p.index] = id,
            Replacement::Keep => {}
        }
    }
    Ok((ids, labels))
}
