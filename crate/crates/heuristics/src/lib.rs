//! Classical in-ego models: ego-net in, relevance matrix out. Composed
//! with sum aggregation these reproduce the full-graph heuristics
//! (Adamic-Adar, common neighbors) exactly.

mod clustering;

pub use clustering::{label_propagation_clusters, ClusterAssignment};
pub use graph_core::InEgoModel;

use graph_core::{EgoNet, RelevanceMatrix, ScoreError};

/// Denominator clamp: classical AA is undefined for common-neighbor
/// degree < 3 (ln <= 0 at 1, tiny at 2); we floor the log at ln(3).
fn clamped_ln(count: f64) -> f64 {
    count.max(3.0).ln()
}

/// Per-ego-net Adamic-Adar term: every non-ego pair gets 1/ln(deg(ego)),
/// where deg(ego) = n - 1 is the ego's neighbor count. With
/// `literal_egonet_size` the count is n instead, the literal
/// "size of the ego-net" reading.
pub fn adamic_adar_local(e: &EgoNet, literal_egonet_size: bool) -> RelevanceMatrix {
    let count = if literal_egonet_size { e.n } else { e.n - 1 };
    let value = 1.0 / clamped_ln(count as f64);
    constant_matrix(e, value)
}

/// Constant 1 per non-ego pair; sum aggregation turns this into the
/// common-neighbor count.
pub fn common_neighbors_local(e: &EgoNet) -> RelevanceMatrix {
    constant_matrix(e, 1.0)
}

fn constant_matrix(e: &EgoNet, value: f64) -> RelevanceMatrix {
    let mut m = RelevanceMatrix::zeros(e.n);
    for u in 1..e.n {
        for v in 1..e.n {
            if u != v {
                m.set(u, v, value);
            }
        }
    }
    m
}

/// Weighted Adamic-Adar: entry (u, v) = (w(u) + w(v)) / (2 ln(1 + S)),
/// where `weight_fn` maps a node's ego-edge feature row to its weight
/// w(u) and S is the total weighted degree of the ego. The log is
/// clamped below at ln(3).
pub fn weighted_adamic_adar_local(
    e: &EgoNet,
    weight_fn: &dyn Fn(&[f64]) -> f64,
) -> Result<RelevanceMatrix, ScoreError> {
    let mut weights = vec![0.0; e.n];
    let mut total = 0.0;
    for u in 1..e.n {
        let w = weight_fn(e.features(u as u32));
        if w < 0.0 {
            return Err(ScoreError(format!("negative weight {w} for node {u}")));
        }
        weights[u] = w;
        total += w;
    }
    let denom = 2.0 * (1.0 + total).ln().max(3.0_f64.ln());
    let mut m = RelevanceMatrix::zeros(e.n);
    for u in 1..e.n {
        for v in 1..e.n {
            if u != v {
                m.set(u, v, (weights[u] + weights[v]) / denom);
            }
        }
    }
    Ok(m)
}

/// Friendship score: 1 when both nodes share a cluster, 0 otherwise.
pub fn cluster_friendship_score(e: &EgoNet, clusters: &ClusterAssignment) -> RelevanceMatrix {
    let mut m = RelevanceMatrix::zeros(e.n);
    for u in 1..e.n {
        for v in 1..e.n {
            if u != v && clusters.labels[u] == clusters.labels[v] {
                m.set(u, v, 1.0);
            }
        }
    }
    m
}

/// Named model wrappers for CLI selection.
pub struct AdamicAdarModel {
    pub literal_egonet_size: bool,
}

impl InEgoModel for AdamicAdarModel {
    fn score(&self, e: &EgoNet) -> Result<RelevanceMatrix, ScoreError> {
        Ok(adamic_adar_local(e, self.literal_egonet_size))
    }
}

pub struct CommonNeighborsModel;

impl InEgoModel for CommonNeighborsModel {
    fn score(&self, e: &EgoNet) -> Result<RelevanceMatrix, ScoreError> {
        Ok(common_neighbors_local(e))
    }
}

/// Weighted AA with the default weight: sum of the (already transformed)
/// ego-edge feature row.
pub struct WeightedAdamicAdarModel;

impl InEgoModel for WeightedAdamicAdarModel {
    fn score(&self, e: &EgoNet) -> Result<RelevanceMatrix, ScoreError> {
        weighted_adamic_adar_local(e, &|row| row.iter().sum())
    }
}

/// Friendship score over label-propagation clusters.
pub struct FriendshipScoreModel {
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for FriendshipScoreModel {
    fn default() -> Self {
        FriendshipScoreModel {
            max_iters: 20,
            seed: 0,
        }
    }
}

impl InEgoModel for FriendshipScoreModel {
    fn score(&self, e: &EgoNet) -> Result<RelevanceMatrix, ScoreError> {
        let clusters = label_propagation_clusters(e, self.max_iters, self.seed);
        Ok(cluster_friendship_score(e, &clusters))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use graph_core::TypedEdge;

    fn egonet(n: usize, intra: &[(u32, u32)], features: Option<Vec<f64>>) -> EgoNet {
        let t = 4;
        let l2g: Vec<u32> = (0..n as u32).map(|i| i * 10 + 100).collect();
        let mut edges = Vec::new();
        for &(u, v) in intra {
            edges.push(TypedEdge {
                src: u,
                dst: v,
                etype: 0,
                attr: 1.0,
            });
            edges.push(TypedEdge {
                src: v,
                dst: u,
                etype: 0,
                attr: 1.0,
            });
        }
        let features = features.unwrap_or_else(|| vec![0.0; n * 2 * t]);
        EgoNet::new(l2g[0], t, l2g, edges, features, vec![]).unwrap()
    }

    #[test]
    fn aa_value_for_four_neighbors() {
        let e = egonet(5, &[], None);
        let m = adamic_adar_local(&e, false);
        let expected = 1.0 / 4.0_f64.ln();
        assert!((expected - 0.72135).abs() < 1e-5);
        assert_eq!(m.get(1, 2), expected);
        assert_eq!(m.get(0, 1), 0.0);
        assert_eq!(m.get(2, 0), 0.0);
    }

    #[test]
    fn aa_clamps_tiny_egonets() {
        let e = egonet(2, &[], None);
        let m = adamic_adar_local(&e, false);
        assert_eq!(m.get(1, 1), 0.0);
        // degenerate single-neighbor net: the clamp keeps values finite
        let e3 = egonet(3, &[], None);
        let m3 = adamic_adar_local(&e3, false);
        assert_eq!(m3.get(1, 2), 1.0 / 3.0_f64.ln());
    }

    #[test]
    fn literal_reading_uses_n() {
        let e = egonet(5, &[], None);
        let m = adamic_adar_local(&e, true);
        assert_eq!(m.get(1, 2), 1.0 / 5.0_f64.ln());
    }

    #[test]
    fn cn_constant_one() {
        let e = egonet(4, &[(1, 2)], None);
        let m = common_neighbors_local(&e);
        assert_eq!(m.get(1, 2), 1.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert_eq!(m.get(0, 3), 0.0);
    }

    #[test]
    fn waa_uniform_weights_match_aa_ranking() {
        let e = egonet(5, &[], None);
        let m = weighted_adamic_adar_local(&e, &|_| 1.0).unwrap();
        // all entries equal, like AA's constant matrix
        let v = m.get(1, 2);
        assert!(v > 0.0);
        for u in 1..5 {
            for w in 1..5 {
                if u != w {
                    assert_eq!(m.get(u, w), v);
                }
            }
        }
    }

    #[test]
    fn waa_zero_weights_all_zero() {
        let e = egonet(5, &[], None);
        let m = weighted_adamic_adar_local(&e, &|_| 0.0).unwrap();
        assert!(m.scores.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn waa_negative_weight_is_error() {
        let e = egonet(3, &[], None);
        assert!(weighted_adamic_adar_local(&e, &|_| -1.0).is_err());
    }

    #[test]
    fn waa_heaviest_pair_ranks_first() {
        // 5-node ego-net, neighbor weights 3, 1, 1, 1 via feature slot 1.
        let n = 5;
        let t = 4;
        let mut features = vec![0.0; n * 2 * t];
        for (u, w) in [(1usize, 3.0), (2, 1.0), (3, 1.0), (4, 1.0)] {
            features[u * 2 * t + 1] = w;
        }
        let e = egonet(n, &[], Some(features));
        let m = weighted_adamic_adar_local(&e, &|row| row.iter().sum()).unwrap();
        let mut best = (0, 0);
        let mut best_score = f64::NEG_INFINITY;
        for u in 1..n {
            for v in (u + 1)..n {
                if m.get(u, v) > best_score {
                    best_score = m.get(u, v);
                    best = (u, v);
                }
            }
        }
        assert!(best == (1, 2) || best == (1, 3) || best == (1, 4));
        assert!(m.get(1, 2) > m.get(2, 3));
        // direct evaluation of the formula
        let s = 6.0_f64;
        assert!((m.get(1, 2) - 4.0 / (2.0 * (1.0 + s).ln())).abs() < 1e-12);
    }

    #[test]
    fn fs_single_cluster_all_ones() {
        let e = egonet(4, &[(1, 2), (2, 3), (1, 3)], None);
        let m = FriendshipScoreModel::default().score(&e).unwrap();
        for u in 1..4 {
            for v in 1..4 {
                if u != v {
                    assert_eq!(m.get(u, v), 1.0);
                }
            }
        }
        assert_eq!(m.get(0, 1), 0.0);
    }

    #[test]
    fn fs_singletons_all_zero() {
        let e = egonet(4, &[], None);
        let m = FriendshipScoreModel::default().score(&e).unwrap();
        assert!(m.scores.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn fs_two_triangles_joined_at_ego() {
        // non-ego nodes {1,2,3} and {4,5,6} form two triangles
        let e = egonet(
            7,
            &[(1, 2), (2, 3), (1, 3), (4, 5), (5, 6), (4, 6)],
            None,
        );
        let m = FriendshipScoreModel::default().score(&e).unwrap();
        assert_eq!(m.get(1, 2), 1.0);
        assert_eq!(m.get(4, 6), 1.0);
        assert_eq!(m.get(1, 4), 0.0);
        assert_eq!(m.get(3, 5), 0.0);
    }

    #[test]
    fn fs_output_is_equivalence_indicator() {
        let e = egonet(8, &[(1, 2), (2, 3), (5, 6), (3, 4)], None);
        let m = FriendshipScoreModel::default().score(&e).unwrap();
        let n = e.n;
        for u in 1..n {
            for v in 1..n {
                assert_eq!(m.get(u, v), m.get(v, u));
                for w in 1..n {
                    if u != v && v != w && u != w && m.get(u, v) == 1.0 && m.get(v, w) == 1.0 {
                        assert_eq!(m.get(u, w), 1.0, "transitivity broken at {u},{v},{w}");
                    }
                }
            }
        }
    }
}
