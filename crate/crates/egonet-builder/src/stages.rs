use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use graph_core::{
    transform_time, write_egonet, EgoNet, Graph, NodeId, TypedEdge, FRIENDSHIP_TYPE,
};

use crate::bloom::{pair_key, BloomFilter};
use crate::BuilderConfig;

/// A wedge that passed the Bloom membership test: `ego` and `v` are both
/// neighbors of the wedge center `u`, and the closing edge {ego, v} is a
/// probable member of E.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriangleCandidate {
    pub ego: NodeId,
    pub v: NodeId,
    pub u: NodeId,
}

/// Inserts every undirected edge key of E into a fresh filter sized at
/// `bloom_bits_per_edge` bits per undirected edge.
pub fn build_bloom(g: &Graph, cfg: &BuilderConfig) -> BloomFilter {
    let mut keys = BTreeSet::new();
    for e in &g.edges {
        keys.insert(pair_key(e.src, e.dst));
    }
    let num_bits = (cfg.bloom_bits_per_edge * keys.len() as f64).ceil() as u64;
    let mut bloom = BloomFilter::new(num_bits, cfg.bloom_hashes, cfg.bloom_salt);
    for key in keys {
        bloom.insert(key);
    }
    bloom
}

/// Map stage over one node partition: for every node `u` in the partition
/// and every unordered neighbor pair {e, v} whose closing edge passes the
/// Bloom test, emits candidates for both apex orientations.
pub fn emit_wedges_partition(
    g: &Graph,
    bloom: &BloomFilter,
    partition: usize,
    partitions: usize,
) -> Vec<TriangleCandidate> {
    let mut out = Vec::new();
    for node in 0..g.num_nodes as NodeId {
        if node as usize % partitions != partition {
            continue;
        }
        let neigh = g.neighbors(node);
        for i in 0..neigh.len() {
            for j in (i + 1)..neigh.len() {
                let (e, v) = (neigh[i], neigh[j]);
                if bloom.contains(pair_key(e, v)) {
                    out.push(TriangleCandidate { ego: e, v, u: node });
                    out.push(TriangleCandidate { ego: v, v: e, u: node });
                }
            }
        }
    }
    out
}

/// Single-partition convenience wrapper of the map stage.
pub fn emit_wedges(g: &Graph, bloom: &BloomFilter) -> Vec<TriangleCandidate> {
    emit_wedges_partition(g, bloom, 0, 1)
}

/// Shuffle + join stage: keeps exactly the candidates whose closing edge
/// {ego, v} really exists, dropping Bloom false positives.
pub fn verify_join(candidates: Vec<TriangleCandidate>, g: &Graph) -> Vec<TriangleCandidate> {
    candidates
        .into_iter()
        .filter(|c| g.has_connection(c.ego, c.v))
        .collect()
}

/// Reduce stage: assembles one `EgoNet` per ego that has at least one
/// neighbor, applying pendant inclusion and the activity cap.
pub fn group_by_ego(
    verified: Vec<TriangleCandidate>,
    g: &Graph,
    cfg: &BuilderConfig,
) -> Vec<EgoNet> {
    let mut members: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for c in verified {
        let set = members.entry(c.ego).or_default();
        set.insert(c.v);
        set.insert(c.u);
    }
    if cfg.include_pendants {
        for ego in 0..g.num_nodes as NodeId {
            let neigh = g.neighbors(ego);
            if neigh.is_empty() {
                continue;
            }
            let set = members.entry(ego).or_default();
            for &n in neigh {
                set.insert(n);
            }
        }
    }
    members
        .into_iter()
        .filter(|(_, set)| !set.is_empty())
        .map(|(ego, set)| assemble_egonet(ego, set, g, cfg))
        .collect()
}

fn activity_score(g: &Graph, ego: NodeId, other: NodeId) -> f64 {
    let mut total = 0.0;
    let transformed = |etype: u16, attr: f64| {
        if etype == FRIENDSHIP_TYPE {
            transform_time(attr)
        } else {
            attr
        }
    };
    for &(dst, etype, attr) in g.out_edges(ego) {
        if dst == other {
            total += transformed(etype, attr);
        }
    }
    for &(dst, etype, attr) in g.out_edges(other) {
        if dst == ego {
            total += transformed(etype, attr);
        }
    }
    total
}

fn assemble_egonet(ego: NodeId, members: BTreeSet<NodeId>, g: &Graph, cfg: &BuilderConfig) -> EgoNet {
    let mut kept: Vec<NodeId> = members.into_iter().collect();
    if kept.len() > cfg.cap {
        // Highest activity first, ties by smaller global id; keep `cap`.
        let mut ranked: Vec<(f64, NodeId)> = kept
            .into_iter()
            .map(|u| (activity_score(g, ego, u), u))
            .collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        kept = ranked.into_iter().take(cfg.cap).map(|(_, u)| u).collect();
        kept.sort_unstable();
    }

    let mut local_to_global = Vec::with_capacity(kept.len() + 1);
    local_to_global.push(ego);
    local_to_global.extend(kept.iter().copied());
    let mut local_of = std::collections::HashMap::new();
    for (local, &global) in local_to_global.iter().enumerate() {
        local_of.insert(global, local as NodeId);
    }

    // Intra edges: every typed edge of G between two kept members.
    let mut edges = Vec::new();
    for &a in &kept {
        for &(dst, etype, attr) in g.out_edges(a) {
            if dst == ego || dst == a {
                continue;
            }
            if let Some(&dl) = local_of.get(&dst) {
                edges.push(TypedEdge {
                    src: local_of[&a],
                    dst: dl,
                    etype,
                    attr,
                });
            }
        }
    }
    edges.sort_by_key(|e| (e.src, e.dst, e.etype));

    let mut raw_ego_edges = Vec::new();
    for &(dst, etype, attr) in g.out_edges(ego) {
        if local_of.contains_key(&dst) {
            raw_ego_edges.push(TypedEdge {
                src: ego,
                dst,
                etype,
                attr,
            });
        }
    }
    for &a in &kept {
        for &(dst, etype, attr) in g.out_edges(a) {
            if dst == ego {
                raw_ego_edges.push(TypedEdge {
                    src: a,
                    dst: ego,
                    etype,
                    attr,
                });
            }
        }
    }
    let features =
        EgoNet::derive_node_features(ego, g.num_types, &local_to_global, &raw_ego_edges)
            .expect("ego-edge list is incident to ego by construction");
    EgoNet::new(ego, g.num_types, local_to_global, edges, features, vec![])
        .expect("builder output satisfies ego-net invariants")
}

/// Composes the stages over `cfg.partitions` local partitions. The output
/// is sorted by ego id; byte-identical across partition counts.
pub fn build_all_egonets(g: &Graph, cfg: &BuilderConfig) -> Vec<EgoNet> {
    assert!(g.has_adjacency(), "build adjacency before building ego-nets");
    let partitions = cfg.partitions.max(1);
    let bloom = build_bloom(g, cfg);
    let mut candidates = Vec::new();
    for p in 0..partitions {
        candidates.extend(emit_wedges_partition(g, &bloom, p, partitions));
    }
    let verified = verify_join(candidates, g);
    group_by_ego(verified, g, cfg)
}

/// Builds all ego-nets and streams them to `out` sorted by ego id.
/// Returns the number of ego-nets written.
pub fn build_egonets_to_writer<W: Write>(
    g: &Graph,
    cfg: &BuilderConfig,
    out: &mut W,
) -> std::io::Result<usize> {
    let egonets = build_all_egonets(g, cfg);
    for e in &egonets {
        write_egonet(e, out)?;
    }
    Ok(egonets.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undirected(pairs: &[(u32, u32)]) -> Graph {
        let mut edges = Vec::new();
        for &(u, v) in pairs {
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
        let mut g = Graph::new(edges);
        g.build_adjacency();
        g
    }

    #[test]
    fn triangle_wedge_passes_bloom() {
        let g = undirected(&[(1, 2), (2, 3), (1, 3)]);
        let bloom = build_bloom(&g, &BuilderConfig::default());
        let wedges = emit_wedges(&g, &bloom);
        assert!(wedges.contains(&TriangleCandidate { ego: 1, v: 3, u: 2 }));
    }

    #[test]
    fn verify_join_drops_false_positives() {
        let g = undirected(&[(1, 2), (2, 3)]);
        // Candidate with absent closing edge {1,3}, as if Bloom lied.
        let kept = verify_join(vec![TriangleCandidate { ego: 1, v: 3, u: 2 }], &g);
        assert!(kept.is_empty());
        let g2 = undirected(&[(1, 2), (2, 3), (1, 3)]);
        let kept = verify_join(vec![TriangleCandidate { ego: 1, v: 3, u: 2 }], &g2);
        assert_eq!(kept.len(), 1);
    }

    #[test]
    fn star_has_no_triangles() {
        let g = undirected(&[(2, 1), (2, 3), (2, 4)]);
        let bloom = build_bloom(&g, &BuilderConfig::default());
        let verified = verify_join(emit_wedges(&g, &bloom), &g);
        assert!(verified.is_empty());
    }

    #[test]
    fn smallest_triangle_egonet() {
        let g = undirected(&[(1, 2), (2, 3), (1, 3)]);
        let egonets = build_all_egonets(&g, &BuilderConfig::default());
        let e1 = egonets.iter().find(|e| e.ego_global_id == 1).unwrap();
        assert_eq!(e1.n, 3);
        assert_eq!(e1.local_to_global, vec![1, 2, 3]);
        let pairs: BTreeSet<(u32, u32)> = e1
            .edges
            .iter()
            .map(|e| (e.src.min(e.dst), e.src.max(e.dst)))
            .collect();
        assert_eq!(pairs, BTreeSet::from([(1, 2)]));
    }

    #[test]
    fn star_center_gets_pendants() {
        let g = undirected(&[(1, 2), (1, 3), (1, 4)]);
        let egonets = build_all_egonets(&g, &BuilderConfig::default());
        let e1 = egonets.iter().find(|e| e.ego_global_id == 1).unwrap();
        assert_eq!(e1.n, 4);
        assert!(e1.edges.is_empty());
    }

    #[test]
    fn pendants_off_drops_star_center() {
        let g = undirected(&[(1, 2), (1, 3), (1, 4)]);
        let cfg = BuilderConfig {
            include_pendants: false,
            ..BuilderConfig::default()
        };
        assert!(build_all_egonets(&g, &cfg).is_empty());
    }

    #[test]
    fn complete_graph_k4() {
        let g = undirected(&[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        let egonets = build_all_egonets(&g, &BuilderConfig::default());
        assert_eq!(egonets.len(), 4);
        for e in &egonets {
            assert_eq!(e.n, 4);
            let pairs: BTreeSet<(u32, u32)> = e
                .edges
                .iter()
                .map(|ed| (ed.src.min(ed.dst), ed.src.max(ed.dst)))
                .collect();
            assert_eq!(pairs.len(), 3);
        }
    }

    #[test]
    fn triangle_plus_isolated_node() {
        let mut edges = Vec::new();
        for &(u, v) in &[(1u32, 2u32), (2, 3), (1, 3)] {
            for (s, d) in [(u, v), (v, u)] {
                edges.push(TypedEdge {
                    src: s,
                    dst: d,
                    etype: 0,
                    attr: 1.0,
                });
            }
        }
        let mut g = Graph::new(edges);
        g.num_nodes = 10; // node 9 exists but has no edges
        g.build_adjacency();
        let egonets = build_all_egonets(&g, &BuilderConfig::default());
        assert_eq!(egonets.len(), 3);
    }

    #[test]
    fn cap_keeps_highest_activity() {
        // Ego 1 with neighbors 2, 3, 4 at activities 5, 3, 1 (etype 1 raw).
        let mut edges = Vec::new();
        for (n, act) in [(2u32, 5.0), (3, 3.0), (4, 1.0)] {
            edges.push(TypedEdge {
                src: 1,
                dst: n,
                etype: 1,
                attr: act,
            });
            edges.push(TypedEdge {
                src: n,
                dst: 1,
                etype: 1,
                attr: 0.0,
            });
        }
        let mut g = Graph::new(edges);
        g.build_adjacency();
        let cfg = BuilderConfig {
            cap: 2,
            ..BuilderConfig::default()
        };
        let egonets = build_all_egonets(&g, &cfg);
        let e1 = egonets.iter().find(|e| e.ego_global_id == 1).unwrap();
        assert_eq!(e1.local_to_global, vec![1, 2, 3]);
    }
}
