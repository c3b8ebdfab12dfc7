//! The `egoscore` command line: ego-net materialization, WalkGNN
//! training and prediction, the end-to-end suggestion pipeline, NDCG
//! evaluation, and synthetic dataset generation.

use std::error::Error;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use egonet_builder::BuilderConfig;
use egoscore::{evaluate, generate_synthetic, ndcg_at_k, SyntheticConfig};
use graph_core::{load_graph, read_egonets, write_egonets, EgoNet, InEgoModel};
use heuristics::{
    AdamicAdarModel, CommonNeighborsModel, FriendshipScoreModel, WeightedAdamicAdarModel,
};
use pipeline::{run_gefs, AggregatorKind};
use serde::Deserialize;
use walkgnn::{
    load_checkpoint_file, save_checkpoint_file, train, OptimizerConfig, TrainConfig,
    WalkGnnConfig, WalkGnnModel,
};

#[derive(Parser)]
#[command(name = "egoscore", version, about = "Ego-network friendship scoring")]
struct Cli {
    /// Seed for model initialization and evaluation bootstrap.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker thread count; defaults to all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Agg {
    Sum,
    Max,
}

#[derive(Subcommand)]
enum Command {
    /// Materialize ego-nets for every node of a graph.
    BuildEgonets {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 300)]
        cap: usize,
        #[arg(long, default_value_t = 10.0)]
        bloom_bpe: f64,
        #[arg(long, default_value_t = 1)]
        partitions: usize,
        #[arg(long)]
        no_pendants: bool,
    },
    /// Train a WalkGNN on an ego-net file.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        valid: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score ego-nets with a trained checkpoint.
    Predict {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        ckpt: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline: graph -> ego-nets -> scores -> top-k suggestions.
    Run {
        #[arg(long)]
        graph: PathBuf,
        /// Model name (aa, aa-literal, cn, waa, fs) or checkpoint path.
        #[arg(long)]
        model: String,
        #[arg(long, value_enum, default_value_t = Agg::Sum)]
        agg: Agg,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 300)]
        cap: usize,
    },
    /// Mean NDCG@k with a bootstrap confidence interval.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        bootstrap: usize,
        #[arg(long)]
        report: PathBuf,
    },
    /// Generate a synthetic planted-rule dataset.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Architecture plus training-loop settings, read from a TOML file.
#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct TrainFileConfig {
    layers: usize,
    hidden: usize,
    mlp_depth: usize,
    mlp_hidden: usize,
    directed_concat: bool,
    residual: bool,
    use_node_features: bool,
    use_edge_attrs: bool,
    epochs: usize,
    negatives_per_pos: usize,
    learning_rate: f64,
    sample_seed: u64,
}

impl Default for TrainFileConfig {
    fn default() -> Self {
        let m = WalkGnnConfig::default();
        let t = TrainConfig::default();
        TrainFileConfig {
            layers: m.layers,
            hidden: m.hidden,
            mlp_depth: m.mlp_depth,
            mlp_hidden: m.mlp_hidden,
            directed_concat: m.directed_concat,
            residual: m.residual,
            use_node_features: m.use_node_features,
            use_edge_attrs: m.use_edge_attrs,
            epochs: t.epochs,
            negatives_per_pos: t.negatives_per_pos,
            learning_rate: OptimizerConfig::default().learning_rate,
            sample_seed: t.sample_seed,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .init();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .expect("rayon pool already initialized");
    }
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<(), Box<dyn Error>> {
    match cli.command {
        Command::BuildEgonets {
            graph,
            out,
            cap,
            bloom_bpe,
            partitions,
            no_pendants,
        } => {
            let mut g = load_graph(&graph)?;
            g.build_adjacency();
            let cfg = BuilderConfig {
                cap,
                bloom_bits_per_edge: bloom_bpe,
                partitions,
                include_pendants: !no_pendants,
                ..BuilderConfig::default()
            };
            let mut w = BufWriter::new(fs::File::create(&out)?);
            let count = egonet_builder::build_egonets_to_writer(&g, &cfg, &mut w)?;
            w.flush()?;
            println!("wrote {count} ego-nets to {}", out.display());
        }
        Command::Train {
            data,
            valid,
            config,
            out,
        } => {
            let file_cfg: TrainFileConfig = toml::from_str(&fs::read_to_string(&config)?)?;
            let train_set = load_egonet_file(&data)?;
            let valid_set: Vec<EgoNet> = load_egonet_file(&valid)?
                .into_iter()
                .filter(|e| !e.ground_truth.is_empty())
                .collect();
            let num_types = train_set
                .first()
                .ok_or("empty training set")?
                .num_types;
            let cfg = WalkGnnConfig {
                layers: file_cfg.layers,
                hidden: file_cfg.hidden,
                mlp_depth: file_cfg.mlp_depth,
                mlp_hidden: file_cfg.mlp_hidden,
                directed_concat: file_cfg.directed_concat,
                residual: file_cfg.residual,
                use_node_features: file_cfg.use_node_features,
                use_edge_attrs: file_cfg.use_edge_attrs,
                num_types,
                seed: cli.seed,
            };
            let mut model = WalkGnnModel::new(cfg);
            let train_cfg = TrainConfig {
                epochs: file_cfg.epochs,
                negatives_per_pos: file_cfg.negatives_per_pos,
                optimizer: OptimizerConfig {
                    learning_rate: file_cfg.learning_rate,
                    ..OptimizerConfig::default()
                },
                sample_seed: file_cfg.sample_seed,
            };
            let report = train(&mut model, &train_set, &valid_set, &train_cfg, &|m, e| {
                m.score(e).map(|s| ndcg_at_k(&s, e, 5)).unwrap_or(0.0)
            })?;
            save_checkpoint_file(&model, &out)?;
            for (epoch, (loss, metric)) in report
                .epoch_losses
                .iter()
                .zip(&report.valid_metrics)
                .enumerate()
            {
                println!("epoch {epoch}: train loss {loss:.6}, valid ndcg@5 {metric:.6}");
            }
            println!(
                "best epoch {} (valid ndcg@5 {:.6}); checkpoint: {}",
                report.best_epoch,
                report.best_valid_metric,
                out.display()
            );
        }
        Command::Predict { data, ckpt, out } => {
            let model = load_checkpoint_file(&ckpt)?;
            let egonets = load_egonet_file(&data)?;
            let mut w = BufWriter::new(fs::File::create(&out)?);
            write_scores(&mut w, &egonets, &model)?;
            w.flush()?;
        }
        Command::Run {
            graph,
            model,
            agg,
            k,
            out,
            cap,
        } => {
            let mut g = load_graph(&graph)?;
            g.build_adjacency();
            let model = resolve_model(&model, cli.seed)?;
            let kind = match agg {
                Agg::Sum => AggregatorKind::Sum,
                Agg::Max => AggregatorKind::Max,
            };
            let cfg = BuilderConfig {
                cap,
                ..BuilderConfig::default()
            };
            let result = run_gefs(&g, model.as_ref(), kind, &cfg, k)?;
            if result.failed_egonets > 0 {
                log::warn!("{} ego-nets failed and were skipped", result.failed_egonets);
            }
            let mut w = BufWriter::new(fs::File::create(&out)?);
            for (user, list) in &result.suggestions {
                for (rank, (counterpart, score)) in list.iter().enumerate() {
                    writeln!(w, "{user}\t{counterpart}\t{}\t{score}", rank + 1)?;
                }
            }
            w.flush()?;
        }
        Command::Evaluate {
            data,
            model,
            k,
            bootstrap,
            report,
        } => {
            let egonets = load_egonet_file(&data)?;
            let model = resolve_model(&model, cli.seed)?;
            let r = evaluate(model.as_ref(), &egonets, k, bootstrap, cli.seed)?;
            let text = format!(
                "{:<10} {:>10} {:>10} {:>10} {:>8}\n{:<10} {:>10.5} {:>10.5} {:>10.5} {:>8}\n\n\
                 [report]\nmetric = \"{}\"\nmean = {}\nci_low = {}\nci_high = {}\nn_egonets = {}\n",
                "metric", "mean", "ci_low", "ci_high", "n",
                r.metric, r.mean, r.ci_low, r.ci_high, r.n_egonets,
                r.metric, r.mean, r.ci_low, r.ci_high, r.n_egonets,
            );
            fs::write(&report, &text)?;
            print!("{text}");
        }
        Command::Synth { config, out } => {
            let cfg: SyntheticConfig = toml::from_str(&fs::read_to_string(&config)?)?;
            let egonets = generate_synthetic(&cfg)?;
            let mut w = BufWriter::new(fs::File::create(&out)?);
            write_egonets(&egonets, &mut w)?;
            w.flush()?;
            println!("wrote {} ego-nets to {}", egonets.len(), out.display());
        }
    }
    Ok(())
}

fn load_egonet_file(path: &PathBuf) -> Result<Vec<EgoNet>, Box<dyn Error>> {
    Ok(read_egonets(std::io::BufReader::new(fs::File::open(path)?))?)
}

fn resolve_model(name: &str, seed: u64) -> Result<Box<dyn InEgoModel>, Box<dyn Error>> {
    Ok(match name {
        "aa" => Box::new(AdamicAdarModel {
            literal_egonet_size: false,
        }),
        "aa-literal" => Box::new(AdamicAdarModel {
            literal_egonet_size: true,
        }),
        "cn" => Box::new(CommonNeighborsModel),
        "waa" => Box::new(WeightedAdamicAdarModel),
        "fs" => Box::new(FriendshipScoreModel { max_iters: 20, seed }),
        path => Box::new(load_checkpoint_file(std::path::Path::new(path))?),
    })
}

/// Score file: one line `ego_global_id u_global v_global score` per
/// unmasked candidate pair, in ego-net then canonical pair order.
fn write_scores<W: Write>(
    w: &mut W,
    egonets: &[EgoNet],
    model: &WalkGnnModel,
) -> Result<(), Box<dyn Error>> {
    for e in egonets {
        let m = model.score_egonet(e);
        for (u, v) in e.candidate_pairs() {
            let s = m.pair_score(u as usize, v as usize);
            if s <= graph_core::MASK_THRESHOLD {
                continue;
            }
            writeln!(
                w,
                "{}\t{}\t{}\t{s}",
                e.ego_global_id,
                e.local_to_global[u as usize],
                e.local_to_global[v as usize]
            )?;
        }
    }
    Ok(())
}
