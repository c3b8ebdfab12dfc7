//! The WalkGNN in-ego model: a dense f64 tape autodiff engine, the
//! WalkConv pair-state layer, the layer stack with residual connections,
//! a RankNet-style pairwise loss and the training loop.

mod checkpoint;
mod model;
mod params;
mod tape;
mod train;

pub use checkpoint::{
    load_checkpoint, load_checkpoint_file, save_checkpoint, save_checkpoint_file,
};
pub use model::{
    assemble_edge_features, build_ranknet_loss, pairwise_loss, walk_count_mode, WalkGnnConfig,
    WalkGnnModel,
};
pub use params::{OptimizerConfig, Param, ParamStore};
pub use tape::{
    contract_kernel, reset_walk_conv_op_count, walk_conv_op_count, Tape, Var,
};
pub use train::{train, TrainConfig, TrainReport};

use graph_core::{EgoNet, InEgoModel, RelevanceMatrix, ScoreError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WalkGnnError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
    #[error("ego-net has no ground-truth pairs")]
    EmptyGroundTruth,
    #[error("no negative candidate pairs available")]
    NoNegatives,
    #[error("training diverged: {0}")]
    NonFiniteLoss(String),
    #[error("walk count exceeds 2^53")]
    WalkCountOverflow,
}

impl InEgoModel for WalkGnnModel {
    fn score(&self, e: &EgoNet) -> Result<RelevanceMatrix, ScoreError> {
        Ok(self.score_egonet(e))
    }
}
