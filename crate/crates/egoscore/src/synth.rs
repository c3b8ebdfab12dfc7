//! Synthetic ego-net generator with a planted link-formation rule: new
//! friendships prefer pairs joined by high-activity length-2 paths and,
//! more weakly, pairs inside the same planted block. Edge activity
//! attributes carry the path signal; ego-edge attributes (the node
//! features) are pure noise, so models that ignore edge attributes can
//! only see topology.

use graph_core::{EgoNet, NodeId, RelevanceMatrix, TypedEdge};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::split::splitmix64;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("no candidate pairs after {attempts} attempts for ego-net index {index}")]
    Infeasible { attempts: usize, index: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticConfig {
    pub n_egonets: usize,
    /// Total node count range, ego included.
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub num_types: usize,
    /// Base-edge probability inside / across planted blocks.
    pub edge_prob_in: f64,
    pub edge_prob_out: f64,
    /// Planted-rule mixing: q = path_weight·path2 + block_weight·same_block.
    pub path_weight: f64,
    pub block_weight: f64,
    pub gt_pairs_min: usize,
    pub gt_pairs_max: usize,
    pub seed: u64,
    /// Offset into the global id space; disjoint datasets use disjoint
    /// offsets so ego ids never collide.
    pub first_ego_index: u64,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        SyntheticConfig {
            n_egonets: 500,
            min_nodes: 18,
            max_nodes: 24,
            num_types: 4,
            edge_prob_in: 0.45,
            edge_prob_out: 0.06,
            path_weight: 3.0,
            block_weight: 0.5,
            gt_pairs_min: 1,
            gt_pairs_max: 2,
            seed: 0,
            first_ego_index: 0,
        }
    }
}

pub fn generate_synthetic(cfg: &SyntheticConfig) -> Result<Vec<EgoNet>, SynthError> {
    Ok(generate_synthetic_with_tables(cfg)?.0)
}

/// Generates the dataset together with the planted per-ego-net score
/// tables q (the generator's own probability table); ranking by q is the
/// Bayes-optimal scorer for this data.
pub fn generate_synthetic_with_tables(
    cfg: &SyntheticConfig,
) -> Result<(Vec<EgoNet>, Vec<RelevanceMatrix>), SynthError> {
    let mut egonets = Vec::with_capacity(cfg.n_egonets);
    let mut tables = Vec::with_capacity(cfg.n_egonets);
    for index in 0..cfg.n_egonets {
        let (e, t) = generate_one(cfg, index)?;
        egonets.push(e);
        tables.push(t);
    }
    Ok((egonets, tables))
}

const MAX_ATTEMPTS: usize = 16;

fn generate_one(
    cfg: &SyntheticConfig,
    index: usize,
) -> Result<(EgoNet, RelevanceMatrix), SynthError> {
    for attempt in 0..MAX_ATTEMPTS {
        let key = cfg.seed
            ^ splitmix64(cfg.first_ego_index + index as u64)
            ^ splitmix64((attempt as u64) << 40);
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(key));
        if let Some(out) = try_generate(cfg, index, &mut rng) {
            return Ok(out);
        }
    }
    Err(SynthError::Infeasible {
        attempts: MAX_ATTEMPTS,
        index,
    })
}

fn try_generate(
    cfg: &SyntheticConfig,
    index: usize,
    rng: &mut ChaCha8Rng,
) -> Option<(EgoNet, RelevanceMatrix)> {
    let n = rng.random_range(cfg.min_nodes..=cfg.max_nodes);
    let num_blocks = rng.random_range(2..=4usize);
    let mut block = vec![0usize; n];
    let mut activity = vec![0.0f64; n];
    for u in 1..n {
        block[u] = rng.random_range(0..num_blocks);
        // heavy-tailed latent activity: weight products span ~2 decades
        activity[u] = 0.05 + rng.random_range(0.0..1.0f64).powi(2);
    }

    let mut adj = vec![false; n * n];
    let mut act = vec![0.0f64; n * n];
    let mut edges: Vec<TypedEdge> = Vec::new();
    for u in 1..n as NodeId {
        for v in (u + 1)..n as NodeId {
            let (ui, vi) = (u as usize, v as usize);
            let p = if block[ui] == block[vi] {
                cfg.edge_prob_in
            } else {
                cfg.edge_prob_out
            };
            if rng.random_range(0.0..1.0) >= p {
                continue;
            }
            adj[ui * n + vi] = true;
            adj[vi * n + ui] = true;
            // friendship ages are noise; the signal lives in type 1
            edges.push(edge(u, v, 0, rng.random_range(0.0..28.0)));
            if rng.random_range(0.0..1.0) < 0.8 {
                edges.push(edge(v, u, 0, rng.random_range(0.0..28.0)));
            }
            let w_uv = 10.0 * activity[ui] * activity[vi] * rng.random_range(0.2..1.8);
            let w_vu = 10.0 * activity[ui] * activity[vi] * rng.random_range(0.2..1.8);
            edges.push(edge(u, v, 1, w_uv));
            edges.push(edge(v, u, 1, w_vu));
            act[ui * n + vi] = w_uv + w_vu;
            act[vi * n + ui] = w_uv + w_vu;
            if rng.random_range(0.0..1.0) < 0.25 {
                edges.push(edge(u, v, 2, rng.random_range(0.0..3.0)));
            }
            if rng.random_range(0.0..1.0) < 0.15 {
                edges.push(edge(v, u, 3, rng.random_range(0.0..1.0)));
            }
        }
    }

    let mut candidates = Vec::new();
    for u in 1..n {
        for v in (u + 1)..n {
            if !adj[u * n + v] {
                candidates.push((u as NodeId, v as NodeId));
            }
        }
    }
    if candidates.is_empty() {
        return None;
    }

    // planted rule: weighted 2-path strength, normalized per ego-net
    let mut path2 = vec![0.0f64; n * n];
    for &(u, v) in &candidates {
        let (ui, vi) = (u as usize, v as usize);
        let mut total = 0.0;
        for w in 1..n {
            if w != ui && w != vi && adj[ui * n + w] && adj[w * n + vi] {
                total += act[ui * n + w] * act[w * n + vi];
            }
        }
        path2[ui * n + vi] = total;
    }
    let max_path = candidates
        .iter()
        .map(|&(u, v)| path2[u as usize * n + v as usize])
        .fold(0.0f64, f64::max);
    let mut table = RelevanceMatrix::zeros(n);
    for &(u, v) in &candidates {
        let (ui, vi) = (u as usize, v as usize);
        let path_term = if max_path > 0.0 {
            path2[ui * n + vi] / max_path
        } else {
            0.0
        };
        let block_term = if block[ui] == block[vi] { 1.0 } else { 0.0 };
        let q = cfg.path_weight * path_term + cfg.block_weight * block_term;
        table.set(ui, vi, q);
        table.set(vi, ui, q);
    }

    // ground truth: mostly the top-q candidate, sometimes one of the top 10
    let mut ranked = candidates.clone();
    ranked.sort_by(|a, b| {
        let qa = table.get(a.0 as usize, a.1 as usize);
        let qb = table.get(b.0 as usize, b.1 as usize);
        qb.total_cmp(&qa).then(a.cmp(b))
    });
    let want = rng
        .random_range(cfg.gt_pairs_min..=cfg.gt_pairs_max)
        .min(ranked.len());
    let mut ground_truth = Vec::with_capacity(want);
    for _ in 0..want {
        let idx = if rng.random_range(0.0..1.0) < 0.75 {
            0
        } else {
            rng.random_range(0..ranked.len().min(10))
        };
        ground_truth.push(ranked.remove(idx));
    }

    let base = (cfg.first_ego_index + index as u64) as NodeId * 100;
    let local_to_global: Vec<NodeId> = (0..n as NodeId).map(|u| base + u).collect();
    let mut raw_ego_edges = Vec::new();
    for u in 1..n as NodeId {
        let gu = base + u;
        raw_ego_edges.push(TypedEdge {
            src: base,
            dst: gu,
            etype: 0,
            attr: rng.random_range(0.0..28.0),
        });
        if rng.random_range(0.0..1.0) < 0.8 {
            raw_ego_edges.push(TypedEdge {
                src: gu,
                dst: base,
                etype: 0,
                attr: rng.random_range(0.0..28.0),
            });
        }
        raw_ego_edges.push(TypedEdge {
            src: base,
            dst: gu,
            etype: 1,
            attr: rng.random_range(0.0..10.0),
        });
    }
    let features =
        EgoNet::derive_node_features(base, cfg.num_types, &local_to_global, &raw_ego_edges)
            .expect("generated ego edges are incident to the ego");
    let e = EgoNet::new(
        base,
        cfg.num_types,
        local_to_global,
        edges,
        features,
        ground_truth,
    )
    .expect("generated ego-net satisfies invariants");
    Some((e, table))
}

fn edge(src: NodeId, dst: NodeId, etype: u16, attr: f64) -> TypedEdge {
    TypedEdge {
        src,
        dst,
        etype,
        attr,
    }
}
