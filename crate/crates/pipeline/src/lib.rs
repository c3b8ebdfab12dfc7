//! Framework orchestration: score ego-net streams with an in-ego model,
//! aggregate local scores into global pair relevance, and emit top-k
//! friend suggestions.

mod aggregate;

pub use aggregate::{aggregate, aggregate_with_run_capacity, AggregatorKind};

use std::collections::BTreeMap;

use egonet_builder::{build_all_egonets, BuilderConfig};
use graph_core::{EgoNet, Graph, InEgoModel, NodeId, MASK_THRESHOLD};
use rayon::prelude::*;

/// One in-ego relevance score lifted to global ids. The pair is
/// canonical (u < v); `ego` is the common friend it was scored through.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalScore {
    pub u: NodeId,
    pub v: NodeId,
    pub ego: NodeId,
    pub score: f64,
}

#[derive(Debug, Default)]
pub struct ScoreBatch {
    pub locals: Vec<LocalScore>,
    /// Ego-nets the model failed on; they are skipped, not fatal.
    pub failed_egonets: usize,
}

/// Phase 2: map the model over ego-nets. Emits one LocalScore per
/// unmasked candidate pair, symmetrized by max over the two directions.
/// Ego-net order determines emission order, so output is deterministic
/// regardless of thread count.
pub fn score_egonets(egonets: &[EgoNet], model: &dyn InEgoModel) -> ScoreBatch {
    let per_egonet: Vec<Option<Vec<LocalScore>>> = egonets
        .par_iter()
        .map(|e| score_one(e, model))
        .collect();
    let mut batch = ScoreBatch::default();
    for locals in per_egonet {
        match locals {
            Some(ls) => batch.locals.extend(ls),
            None => batch.failed_egonets += 1,
        }
    }
    batch
}

fn score_one(e: &EgoNet, model: &dyn InEgoModel) -> Option<Vec<LocalScore>> {
    let m = match model.score(e) {
        Ok(m) => m,
        Err(err) => {
            log::warn!("skipping ego-net {}: {err}", e.ego_global_id);
            return None;
        }
    };
    let mut out = Vec::new();
    for (u, v) in e.candidate_pairs() {
        let s = m.pair_score(u as usize, v as usize);
        if s <= MASK_THRESHOLD {
            continue;
        }
        if !s.is_finite() {
            log::warn!("skipping ego-net {}: non-finite score", e.ego_global_id);
            return None;
        }
        let gu = e.local_to_global[u as usize];
        let gv = e.local_to_global[v as usize];
        out.push(LocalScore {
            u: gu.min(gv),
            v: gu.max(gv),
            ego: e.ego_global_id,
            score: s,
        });
    }
    Some(out)
}

/// Ranked suggestion lists per user: (counterpart, aggregated score).
pub type Suggestions = BTreeMap<NodeId, Vec<(NodeId, f64)>>;

/// Phase 3 output step: per-user top-k counterparts not already
/// connected by any edge type. Ties break by (score desc, smaller id).
pub fn top_k_suggestions(
    global_scores: &[((NodeId, NodeId), f64)],
    g: &Graph,
    k: usize,
) -> Suggestions {
    assert!(k >= 1);
    let mut per_node: Suggestions = BTreeMap::new();
    for &((u, v), score) in global_scores {
        if g.has_connection(u, v) {
            continue;
        }
        per_node.entry(u).or_default().push((v, score));
        per_node.entry(v).or_default().push((u, score));
    }
    for list in per_node.values_mut() {
        list.sort_unstable_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        list.truncate(k);
    }
    per_node
}

#[derive(Debug)]
pub struct GefsOutput {
    pub suggestions: Suggestions,
    pub num_egonets: usize,
    pub failed_egonets: usize,
}

/// The whole framework: materialize ego-nets, score them, aggregate,
/// rank. The graph must have its adjacency index built.
pub fn run_gefs(
    g: &Graph,
    model: &dyn InEgoModel,
    kind: AggregatorKind,
    cfg: &BuilderConfig,
    k: usize,
) -> std::io::Result<GefsOutput> {
    let egonets = build_all_egonets(g, cfg);
    let batch = score_egonets(&egonets, model);
    let global = aggregate(batch.locals, kind)?;
    Ok(GefsOutput {
        suggestions: top_k_suggestions(&global, g, k),
        num_egonets: egonets.len(),
        failed_egonets: batch.failed_egonets,
    })
}
