use crate::error::GraphError;
use crate::graph::{NodeId, TypedEdge};
use crate::transform_time;

/// Edge type carrying the friendship age; the only type whose attribute
/// goes through `transform_time`.
pub const FRIENDSHIP_TYPE: u16 = 0;

/// A self-contained local graph around one ego. The ego has local id 0,
/// neighbors are renumbered 1..n-1. Edges incident to the ego are not
/// stored; their attributes live in `node_features` instead.
#[derive(Debug, Clone)]
pub struct EgoNet {
    pub ego_global_id: NodeId,
    /// Node count including the ego.
    pub n: usize,
    pub num_types: usize,
    /// local id -> global id; entry 0 is the ego itself.
    pub local_to_global: Vec<NodeId>,
    /// Intra-ego-net edges over local ids; never incident to node 0.
    pub edges: Vec<TypedEdge>,
    /// Row-major n x 2T matrix: row u holds, per edge type t, the
    /// transformed attribute of ego->u (slot t) and u->ego (slot T+t).
    pub node_features: Vec<f64>,
    /// Undirected local pairs (u < v) that formed a friendship later;
    /// guaranteed to have no base edge between them.
    pub ground_truth: Vec<(NodeId, NodeId)>,
    /// Sorted unordered pairs with at least one base edge, for mask checks.
    intra_pairs: Vec<(NodeId, NodeId)>,
}

impl EgoNet {
    pub fn new(
        ego_global_id: NodeId,
        num_types: usize,
        local_to_global: Vec<NodeId>,
        edges: Vec<TypedEdge>,
        node_features: Vec<f64>,
        ground_truth: Vec<(NodeId, NodeId)>,
    ) -> Result<EgoNet, GraphError> {
        let n = local_to_global.len();
        if n == 0 {
            return Err(GraphError::InvalidEgoNet("empty ego-net".into()));
        }
        if local_to_global[0] != ego_global_id {
            return Err(GraphError::InvalidEgoNet(format!(
                "local id 0 maps to {}, not the ego {}",
                local_to_global[0], ego_global_id
            )));
        }
        if node_features.len() != n * 2 * num_types {
            return Err(GraphError::InvalidEgoNet(format!(
                "node_features has {} entries, expected {}",
                node_features.len(),
                n * 2 * num_types
            )));
        }
        let mut intra_pairs = Vec::with_capacity(edges.len());
        for e in &edges {
            if e.src == 0 || e.dst == 0 {
                return Err(GraphError::InvalidEgoNet(format!(
                    "edge ({}, {}) is incident to the ego",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(GraphError::InvalidEgoNet(format!("self-loop at {}", e.src)));
            }
            if e.src as usize >= n || e.dst as usize >= n {
                return Err(GraphError::InvalidEgoNet(format!(
                    "edge ({}, {}) out of range for n={}",
                    e.src, e.dst, n
                )));
            }
            intra_pairs.push((e.src.min(e.dst), e.src.max(e.dst)));
        }
        intra_pairs.sort_unstable();
        intra_pairs.dedup();
        for &(u, v) in &ground_truth {
            if u == 0 || v == 0 || u as usize >= n || v as usize >= n || u == v {
                return Err(GraphError::InvalidEgoNet(format!(
                    "ground-truth pair ({u}, {v}) invalid"
                )));
            }
            if intra_pairs.binary_search(&(u.min(v), u.max(v))).is_ok() {
                return Err(GraphError::InvalidEgoNet(format!(
                    "ground-truth pair ({u}, {v}) has a base edge"
                )));
            }
        }
        let ground_truth = ground_truth
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        Ok(EgoNet {
            ego_global_id,
            n,
            num_types,
            local_to_global,
            edges,
            node_features,
            ground_truth,
            intra_pairs,
        })
    }

    /// Feature row of local node `u` (width 2T).
    pub fn features(&self, u: NodeId) -> &[f64] {
        let w = 2 * self.num_types;
        &self.node_features[u as usize * w..(u as usize + 1) * w]
    }

    pub fn feature_width(&self) -> usize {
        2 * self.num_types
    }

    /// True if any base edge of any type connects `u` and `v` in either
    /// direction.
    pub fn has_base_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.intra_pairs
            .binary_search(&(u.min(v), u.max(v)))
            .is_ok()
    }

    /// Unordered non-ego candidate pairs without a base edge, in canonical
    /// (u, v) order. These are the pairs every consumer ranks.
    pub fn candidate_pairs(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for u in 1..self.n as NodeId {
            for v in (u + 1)..self.n as NodeId {
                if !self.has_base_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Derives the n x 2T feature matrix from the raw edges incident to the
    /// ego (global ids). `local_of` maps global id -> local id.
    pub fn derive_node_features(
        ego_global_id: NodeId,
        num_types: usize,
        local_to_global: &[NodeId],
        raw_ego_edges: &[TypedEdge],
    ) -> Result<Vec<f64>, GraphError> {
        let n = local_to_global.len();
        let width = 2 * num_types;
        let mut local_of = std::collections::HashMap::new();
        for (local, &global) in local_to_global.iter().enumerate() {
            local_of.insert(global, local);
        }
        let mut features = vec![0.0; n * width];
        for e in raw_ego_edges {
            let (other, slot_base) = if e.src == ego_global_id && e.dst != ego_global_id {
                (e.dst, 0)
            } else if e.dst == ego_global_id && e.src != ego_global_id {
                (e.src, num_types)
            } else {
                return Err(GraphError::InvalidEgoNet(format!(
                    "edge ({}, {}) is not incident to ego {}",
                    e.src, e.dst, ego_global_id
                )));
            };
            // Edges to neighbors dropped by the cap are simply skipped.
            let Some(&local) = local_of.get(&other) else {
                continue;
            };
            let value = if e.etype == FRIENDSHIP_TYPE {
                transform_time(e.attr)
            } else {
                e.attr
            };
            features[local * width + slot_base + e.etype as usize] = value;
        }
        // Ego row stays zero: the ego has no ego-edge to itself.
        for f in features.iter_mut().take(width) {
            *f = 0.0;
        }
        Ok(features)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(src: u32, dst: u32, etype: u16, attr: f64) -> TypedEdge {
        TypedEdge {
            src,
            dst,
            etype,
            attr,
        }
    }

    #[test]
    fn features_from_ego_edges() {
        // ego = 10, neighbors 20 (local 1) and 30 (local 2), T=4
        let l2g = vec![10, 20, 30];
        let raw = vec![
            edge(10, 20, 0, 0.0),  // friendship age 0 -> 28.0 in slot 0
            edge(20, 10, 0, -1.0), // no friendship -> 0.0 in slot T+0
            edge(10, 30, 2, 7.5),  // raw activity in slot 2
        ];
        let f = EgoNet::derive_node_features(10, 4, &l2g, &raw).unwrap();
        let e = EgoNet::new(10, 4, l2g, vec![], f, vec![]).unwrap();
        assert_eq!(e.features(1)[0], 28.0);
        assert_eq!(e.features(1)[4], 0.0);
        assert_eq!(e.features(2)[2], 7.5);
        assert!(e.features(0).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn missing_ego_edges_give_zero_row() {
        let l2g = vec![10, 20];
        let f = EgoNet::derive_node_features(10, 4, &l2g, &[]).unwrap();
        assert!(f.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn non_ego_edge_rejected() {
        let l2g = vec![10, 20, 30];
        let raw = vec![edge(20, 30, 0, 1.0)];
        assert!(EgoNet::derive_node_features(10, 4, &l2g, &raw).is_err());
    }

    #[test]
    fn ego_incident_intra_edge_rejected() {
        let f = vec![0.0; 3 * 8];
        let res = EgoNet::new(10, 4, vec![10, 20, 30], vec![edge(0, 1, 0, 1.0)], f, vec![]);
        assert!(res.is_err());
    }

    #[test]
    fn ground_truth_with_base_edge_rejected() {
        let f = vec![0.0; 3 * 8];
        let res = EgoNet::new(
            10,
            4,
            vec![10, 20, 30],
            vec![edge(1, 2, 0, 1.0)],
            f,
            vec![(1, 2)],
        );
        assert!(res.is_err());
    }

    #[test]
    fn candidate_pairs_exclude_base_edges() {
        let f = vec![0.0; 4 * 8];
        let e = EgoNet::new(
            10,
            4,
            vec![10, 20, 30, 40],
            vec![edge(1, 2, 0, 1.0)],
            f,
            vec![],
        )
        .unwrap();
        assert_eq!(e.candidate_pairs(), vec![(1, 3), (2, 3)]);
        assert!(e.has_base_edge(2, 1));
    }
}
