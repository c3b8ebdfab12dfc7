use graph_core::EgoNet;

use crate::model::WalkGnnModel;
use crate::params::OptimizerConfig;
use crate::WalkGnnError;

/// Training-loop knobs on top of the architecture config.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub negatives_per_pos: usize,
    pub optimizer: OptimizerConfig,
    /// Base seed for negative sampling; combined with epoch and step.
    pub sample_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 4,
            negatives_per_pos: 16,
            optimizer: OptimizerConfig::default(),
            sample_seed: 1,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainReport {
    pub epoch_losses: Vec<f64>,
    pub valid_metrics: Vec<f64>,
    pub best_epoch: usize,
    pub best_valid_metric: f64,
    pub skipped_egonets: usize,
}

/// Per-ego-net gradient steps with Adam, checkpointing the parameters at
/// the best validation metric. `valid_metric` scores one ego-net with
/// the frozen model (higher is better; typically ndcg@5). Deterministic
/// given seeds and data order.
pub fn train(
    model: &mut WalkGnnModel,
    train_set: &[EgoNet],
    valid_set: &[EgoNet],
    cfg: &TrainConfig,
    valid_metric: &dyn Fn(&WalkGnnModel, &EgoNet) -> f64,
) -> Result<TrainReport, WalkGnnError> {
    let mut report = TrainReport {
        best_valid_metric: f64::NEG_INFINITY,
        ..TrainReport::default()
    };
    let mut best_params = model.params.clone();
    for epoch in 0..cfg.epochs {
        let mut loss_sum = 0.0;
        let mut steps = 0usize;
        for (i, e) in train_set.iter().enumerate() {
            if e.ground_truth.is_empty() {
                report.skipped_egonets += 1;
                continue;
            }
            let seed = cfg
                .sample_seed
                .wrapping_add((epoch as u64) << 32)
                .wrapping_add(i as u64);
            model.params.zero_grad();
            match model.accumulate_gradients(e, cfg.negatives_per_pos, seed) {
                Ok(loss) => {
                    loss_sum += loss;
                    steps += 1;
                    model.params.adam_step(&cfg.optimizer);
                }
                Err(WalkGnnError::NoNegatives) => {
                    report.skipped_egonets += 1;
                }
                Err(err) => return Err(err),
            }
        }
        report
            .epoch_losses
            .push(if steps > 0 { loss_sum / steps as f64 } else { 0.0 });

        let metric = if valid_set.is_empty() {
            -report.epoch_losses[epoch]
        } else {
            let sum: f64 = valid_set.iter().map(|e| valid_metric(model, e)).sum();
            sum / valid_set.len() as f64
        };
        report.valid_metrics.push(metric);
        if metric > report.best_valid_metric {
            report.best_valid_metric = metric;
            report.best_epoch = epoch;
            best_params = model.params.clone();
        }
    }
    model.params = best_params;
    Ok(report)
}
