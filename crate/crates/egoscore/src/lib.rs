//! Evaluation (NDCG@5 with bootstrap confidence intervals), dataset
//! splitting, and synthetic ego-net generation with a planted
//! link-formation rule.

mod eval;
mod split;
mod synth;

pub use eval::{evaluate, ndcg_at_k, EvalError, EvalReport};
pub use split::{split_dataset, splitmix64};
pub use synth::{generate_synthetic, generate_synthetic_with_tables, SyntheticConfig, SynthError};
