//! Knowledge-enhanced masked language model pre-training at desk scale.
//!
//! The crate is organized around the stages of the pre-training pipeline:
//!
//! - [`kg`] — triple store with hop queries and positive/negative triple sampling
//! - [`tokenize`] — character-level tokenizer for CJK text and the fixed vocabulary
//! - [`spans`] — linguistic span annotation and boundary-marker reconstruction
//! - [`masking`] — mask planning and application over reconstructed sentences
//! - [`instance`] — entity linking, triple verbalization, training instance assembly
//! - [`encoder`] — a small transformer encoder with hand-written backpropagation
//! - [`loss`] — masked-LM and contrastive triple losses
//! - [`optim`] — Adam optimizer
//! - [`train`] — configuration, the pre-training loop, metrics and checkpoints
//! - [`fixture`] — deterministic synthetic corpus/KG generation for smoke tests

pub mod encoder;
pub mod fixture;
pub mod gradcheck;
pub mod instance;
pub mod kg;
pub mod loss;
pub mod masking;
pub mod optim;
pub mod spans;
pub mod tokenize;
pub mod train;



pub use kg::{HopResult, KnowledgeGraph, Triple};


