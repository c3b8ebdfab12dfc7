use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: self-loop {node} -> {node}")]
    SelfLoop { line: usize, node: u32 },
    #[error("line {line}: duplicate edge ({src}, {dst}, type {etype})")]
    DuplicateEdge {
        line: usize,
        src: u32,
        dst: u32,
        etype: u16,
    },
    #[error("invalid ego-net: {0}")]
    InvalidEgoNet(String),
}

/// Failure of an in-ego model on a single ego-net.
#[derive(Debug, Error)]
#[error("{0}")]
pub struct ScoreError(pub String);
