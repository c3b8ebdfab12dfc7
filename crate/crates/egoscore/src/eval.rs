use graph_core::{EgoNet, InEgoModel, NodeId, RelevanceMatrix, MASK_THRESHOLD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty ego-net stream")]
    EmptyStream,
    #[error("ego-net {0} has no ground truth")]
    NoGroundTruth(NodeId),
    #[error("model failed on ego-net {0}: {1}")]
    Model(NodeId, String),
}

/// NDCG@k with binary relevance. Candidate pairs are ranked by score
/// (max over the two directions), ties broken by canonical pair order;
/// hits against the undirected ground truth earn 1/log2(rank+1).
pub fn ndcg_at_k(scores: &RelevanceMatrix, e: &EgoNet, k: usize) -> f64 {
    assert!(k >= 1);
    assert!(!e.ground_truth.is_empty());
    let mut ranked: Vec<(NodeId, NodeId, f64)> = e
        .candidate_pairs()
        .into_iter()
        .map(|(u, v)| (u, v, scores.pair_score(u as usize, v as usize)))
        .filter(|&(_, _, s)| s > MASK_THRESHOLD)
        .collect();
    ranked.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    let gt: std::collections::BTreeSet<(NodeId, NodeId)> =
        e.ground_truth.iter().copied().collect();
    let mut dcg = 0.0;
    for (i, &(u, v, _)) in ranked.iter().take(k).enumerate() {
        if gt.contains(&(u, v)) {
            dcg += 1.0 / ((i + 2) as f64).log2();
        }
    }
    let ideal_hits = k.min(gt.len());
    let idcg: f64 = (0..ideal_hits).map(|i| 1.0 / ((i + 2) as f64).log2()).sum();
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub metric: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub per_egonet: Vec<f64>,
    pub n_egonets: usize,
}

/// Mean NDCG@k over ego-nets with a percentile-bootstrap 95% confidence
/// interval over the per-ego-net scores. Deterministic given the seed.
pub fn evaluate(
    model: &dyn InEgoModel,
    egonets: &[EgoNet],
    k: usize,
    bootstrap_samples: usize,
    seed: u64,
) -> Result<EvalReport, EvalError> {
    if egonets.is_empty() {
        return Err(EvalError::EmptyStream);
    }
    for e in egonets {
        if e.ground_truth.is_empty() {
            return Err(EvalError::NoGroundTruth(e.ego_global_id));
        }
    }
    let per_egonet: Vec<f64> = egonets
        .par_iter()
        .map(|e| {
            let m = model
                .score(e)
                .map_err(|err| EvalError::Model(e.ego_global_id, err.to_string()))?;
            Ok(ndcg_at_k(&m, e, k))
        })
        .collect::<Result<_, EvalError>>()?;
    let n = per_egonet.len();
    let mean = per_egonet.iter().sum::<f64>() / n as f64;
    let (ci_low, ci_high) = if bootstrap_samples == 0 {
        (mean, mean)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut means = Vec::with_capacity(bootstrap_samples);
        for _ in 0..bootstrap_samples {
            let mut total = 0.0;
            for _ in 0..n {
                total += per_egonet[rng.random_range(0..n)];
            }
            means.push(total / n as f64);
        }
        means.sort_by(f64::total_cmp);
        (percentile(&means, 0.025), percentile(&means, 0.975))
    };
    Ok(EvalReport {
        metric: format!("ndcg@{k}"),
        mean,
        ci_low: ci_low.min(mean),
        ci_high: ci_high.max(mean),
        per_egonet,
        n_egonets: n,
    })
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx.min(sorted.len() - 1)]
}
