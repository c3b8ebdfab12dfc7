use crate::egonet::EgoNet;
use crate::error::ScoreError;

/// Sentinel for masked pairs (ego pairs, existing edges). Large negative
/// instead of -inf to keep downstream arithmetic finite.
pub const MASK_SCORE: f64 = -1e30;

/// Entries at or below this are treated as masked by consumers.
pub const MASK_THRESHOLD: f64 = -1e29;

/// Dense n x n pairwise score matrix produced by an in-ego model.
/// The diagonal is ignored by all consumers.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceMatrix {
    pub n: usize,
    pub scores: Vec<f64>,
}

impl RelevanceMatrix {
    pub fn zeros(n: usize) -> RelevanceMatrix {
        RelevanceMatrix {
            n,
            scores: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.scores[u * self.n + v]
    }

    #[inline]
    pub fn set(&mut self, u: usize, v: usize, value: f64) {
        self.scores[u * self.n + v] = value;
    }

    /// Undirected score of a pair: max over the two directions.
    pub fn pair_score(&self, u: usize, v: usize) -> f64 {
        self.get(u, v).max(self.get(v, u))
    }

    pub fn is_masked(&self, u: usize, v: usize) -> bool {
        self.pair_score(u, v) <= MASK_THRESHOLD
    }
}

/// An in-ego model: a pure function from one ego-net to a pairwise
/// relevance matrix. No cross-ego-net state.
pub trait InEgoModel: Sync {
    fn score(&self, e: &EgoNet) -> Result<RelevanceMatrix, ScoreError>;
}
