use std::collections::BTreeSet;

use egonet_builder::{build_all_egonets, BuilderConfig};
use graph_core::{write_egonets, Graph, TypedEdge};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random undirected graph with both directed edges per connection, some
/// with extra activity types.
fn random_graph(n: u32, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random::<f64>() < p {
                let age = rng.random_range(0.0..100.0);
                edges.push(TypedEdge {
                    src: u,
                    dst: v,
                    etype: 0,
                    attr: age,
                });
                edges.push(TypedEdge {
                    src: v,
                    dst: u,
                    etype: 0,
                    attr: age,
                });
                if rng.random::<f64>() < 0.3 {
                    edges.push(TypedEdge {
                        src: u,
                        dst: v,
                        etype: 1,
                        attr: rng.random_range(0.0..10.0),
                    });
                }
            }
        }
    }
    let mut g = Graph::new(edges);
    g.num_nodes = n as usize;
    g.build_adjacency();
    g
}

/// Independent oracle: brute-force triangle enumeration over all node
/// triples, no Bloom filter, no staging.
fn naive_ego_intra_pairs(g: &Graph) -> BTreeSet<(u32, u32, u32)> {
    let n = g.num_nodes as u32;
    let mut out = BTreeSet::new();
    for e in 0..n {
        for u in 0..n {
            for v in (u + 1)..n {
                if u == e || v == e {
                    continue;
                }
                if g.has_connection(e, u) && g.has_connection(e, v) && g.has_connection(u, v) {
                    out.insert((e, u, v));
                }
            }
        }
    }
    out
}

fn built_ego_intra_pairs(g: &Graph, cfg: &BuilderConfig) -> BTreeSet<(u32, u32, u32)> {
    let mut out = BTreeSet::new();
    for e in build_all_egonets(g, cfg) {
        for edge in &e.edges {
            let a = e.local_to_global[edge.src as usize];
            let b = e.local_to_global[edge.dst as usize];
            out.insert((e.ego_global_id, a.min(b), a.max(b)));
        }
    }
    out
}

#[test]
fn matches_naive_triangle_enumeration() {
    for seed in 0..10 {
        let g = random_graph(50, 0.1, seed);
        let cfg = BuilderConfig {
            include_pendants: false,
            ..BuilderConfig::default()
        };
        assert_eq!(built_ego_intra_pairs(&g, &cfg), naive_ego_intra_pairs(&g));
    }
}

#[test]
fn bloom_parameters_never_change_output() {
    let g = random_graph(60, 0.15, 7);
    let base = BuilderConfig::default();
    let reference = {
        let mut buf = Vec::new();
        write_egonets(&build_all_egonets(&g, &base), &mut buf).unwrap();
        buf
    };
    let variants = [
        (0.5, 1, 1u64), // deliberately undersized, noisy filter
        (2.0, 3, 9),
        (20.0, 11, 3),
    ];
    for (bpe, hashes, salt) in variants {
        let cfg = BuilderConfig {
            bloom_bits_per_edge: bpe,
            bloom_hashes: hashes,
            bloom_salt: salt,
            ..BuilderConfig::default()
        };
        let mut buf = Vec::new();
        write_egonets(&build_all_egonets(&g, &cfg), &mut buf).unwrap();
        assert_eq!(buf, reference, "bloom config {bpe}/{hashes}/{salt} changed output");
    }
}

#[test]
fn byte_identical_across_partition_counts() {
    let g = random_graph(80, 0.1, 11);
    let mut reference = Vec::new();
    write_egonets(
        &build_all_egonets(&g, &BuilderConfig::default()),
        &mut reference,
    )
    .unwrap();
    for partitions in [2, 3, 8] {
        let cfg = BuilderConfig {
            partitions,
            ..BuilderConfig::default()
        };
        let mut buf = Vec::new();
        write_egonets(&build_all_egonets(&g, &cfg), &mut buf).unwrap();
        assert_eq!(buf, reference);
    }
}

#[test]
fn cap_monotonicity() {
    let g = random_graph(40, 0.3, 5);
    for ego_cap in [(3usize, 8usize), (5, 10), (2, 3)] {
        let small = build_all_egonets(
            &g,
            &BuilderConfig {
                cap: ego_cap.0,
                ..BuilderConfig::default()
            },
        );
        let large = build_all_egonets(
            &g,
            &BuilderConfig {
                cap: ego_cap.1,
                ..BuilderConfig::default()
            },
        );
        for (s, l) in small.iter().zip(large.iter()) {
            assert_eq!(s.ego_global_id, l.ego_global_id);
            let sset: BTreeSet<u32> = s.local_to_global.iter().copied().collect();
            let lset: BTreeSet<u32> = l.local_to_global.iter().copied().collect();
            assert!(sset.is_subset(&lset));
        }
    }
}

#[test]
fn local_ids_contiguous_and_bijective() {
    let g = random_graph(30, 0.2, 3);
    for e in build_all_egonets(&g, &BuilderConfig::default()) {
        assert_eq!(e.local_to_global.len(), e.n);
        let uniq: BTreeSet<u32> = e.local_to_global.iter().copied().collect();
        assert_eq!(uniq.len(), e.n);
        assert_eq!(e.local_to_global[0], e.ego_global_id);
    }
}

#[test]
fn edge_volume_bound() {
    // Total intra edge volume for an uncapped run stays within C * |E|^1.5.
    let g = random_graph(100, 0.1, 13);
    let egonets = build_all_egonets(&g, &BuilderConfig::default());
    let total_edges: usize = egonets.iter().map(|e| e.edges.len()).sum();
    let undirected: BTreeSet<(u32, u32)> = g
        .edges
        .iter()
        .map(|e| (e.src.min(e.dst), e.src.max(e.dst)))
        .collect();
    let bound = 8.0 * (undirected.len() as f64).powf(1.5);
    assert!((total_edges as f64) <= bound);
}
