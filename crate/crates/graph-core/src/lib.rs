//! Shared domain types for the ego-net scoring pipeline: the typed edge
//! list, ego-nets with derived node features, relevance matrices and the
//! in-ego model interface, plus the on-disk formats for all of them.

mod egonet;
mod error;
mod graph;
mod io;
mod relevance;

pub use egonet::{EgoNet, FRIENDSHIP_TYPE};
pub use error::{GraphError, ScoreError};
pub use graph::{Graph, NodeId, TypedEdge};
pub use io::{load_graph, parse_graph, read_egonets, write_egonet, write_egonets, write_graph};
pub use relevance::{InEgoModel, RelevanceMatrix, MASK_SCORE, MASK_THRESHOLD};

/// Friendship-age transform: `28/(t+1)` for `t >= 0`, `0` otherwise
/// (a missing friendship is encoded as age `-1`).
pub fn transform_time(t: f64) -> f64 {
    if t >= 0.0 {
        28.0 / (t + 1.0)
    } else {
        0.0
    }
}
