use graph_core::{
    transform_time, EgoNet, NodeId, RelevanceMatrix, FRIENDSHIP_TYPE, MASK_SCORE,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::params::{Param, ParamStore};
use crate::tape::{Tape, Var};
use crate::WalkGnnError;

/// Architecture knobs. `hidden` is the pair-state channel count d;
/// `layers` the number of WalkConv blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkGnnConfig {
    pub layers: usize,
    pub hidden: usize,
    pub mlp_depth: usize,
    pub mlp_hidden: usize,
    pub directed_concat: bool,
    pub residual: bool,
    /// Inject node features into the leading diagonal channels of S_0.
    pub use_node_features: bool,
    /// When false, edge attribute slots carry only presence indicators
    /// (the edge-feature ablation).
    pub use_edge_attrs: bool,
    pub num_types: usize,
    pub seed: u64,
}

impl Default for WalkGnnConfig {
    fn default() -> Self {
        WalkGnnConfig {
            layers: 6,
            hidden: 8,
            mlp_depth: 4,
            mlp_hidden: 32,
            directed_concat: true,
            residual: true,
            use_node_features: true,
            use_edge_attrs: true,
            num_types: 4,
            seed: 0,
        }
    }
}

impl WalkGnnConfig {
    /// Edge feature vector length: per-type slot plus source and
    /// destination node feature rows (each 2T wide).
    pub fn edge_feature_len(&self) -> usize {
        self.num_types + 4 * self.num_types
    }
}

/// Per-directed-pair feature assembly: one vector per ordered non-ego
/// pair with at least one edge; multi-edges merge into per-type slots.
/// Returns (positions as (u, v), row-major feature matrix).
pub fn assemble_edge_features(e: &EgoNet, cfg: &WalkGnnConfig) -> (Vec<(usize, usize)>, Vec<f64>) {
    let t = cfg.num_types;
    let width = e.feature_width();
    let mut slots: std::collections::BTreeMap<(usize, usize), Vec<f64>> =
        std::collections::BTreeMap::new();
    for edge in &e.edges {
        let key = (edge.src as usize, edge.dst as usize);
        let entry = slots.entry(key).or_insert_with(|| vec![0.0; t]);
        let et = edge.etype as usize;
        if et >= t {
            continue;
        }
        entry[et] = if cfg.use_edge_attrs {
            if edge.etype == FRIENDSHIP_TYPE {
                transform_time(edge.attr)
            } else {
                edge.attr
            }
        } else {
            1.0
        };
    }
    let mut positions = Vec::with_capacity(slots.len());
    let mut rows = Vec::with_capacity(slots.len() * (t + 2 * width));
    for ((u, v), attr_slots) in slots {
        positions.push((u, v));
        rows.extend_from_slice(&attr_slots);
        rows.extend_from_slice(e.features(u as NodeId));
        rows.extend_from_slice(e.features(v as NodeId));
    }
    (positions, rows)
}

fn mlp_dims(input: usize, hidden: usize, depth: usize, output: usize) -> Vec<(usize, usize)> {
    if depth == 1 {
        return vec![(input, output)];
    }
    let mut dims = vec![(input, hidden)];
    for _ in 1..depth - 1 {
        dims.push((hidden, hidden));
    }
    dims.push((hidden, output));
    dims
}

/// The WalkGNN in-ego model: parameters plus forward/training machinery.
pub struct WalkGnnModel {
    pub cfg: WalkGnnConfig,
    pub params: ParamStore,
}

impl WalkGnnModel {
    /// Glorot-uniform init; the final layer of each per-layer state MLP
    /// is zeroed so the untrained stack is the identity map.
    pub fn new(cfg: WalkGnnConfig) -> WalkGnnModel {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut params = ParamStore::new();
        let d = cfg.hidden;
        let state_in = if cfg.directed_concat { 2 * d } else { d };
        for k in 0..cfg.layers {
            init_mlp(
                &mut params,
                &mut rng,
                &format!("layer{k}.edge_mlp"),
                mlp_dims(cfg.edge_feature_len(), cfg.mlp_hidden, cfg.mlp_depth, d * d),
                false,
            );
            init_mlp(
                &mut params,
                &mut rng,
                &format!("layer{k}.mlp"),
                mlp_dims(state_in, cfg.mlp_hidden, cfg.mlp_depth, d),
                true,
            );
        }
        init_mlp(
            &mut params,
            &mut rng,
            "out_mlp",
            mlp_dims(d, cfg.mlp_hidden, cfg.mlp_depth, 1),
            false,
        );
        WalkGnnModel { cfg, params }
    }

    pub fn from_parts(cfg: WalkGnnConfig, params: ParamStore) -> WalkGnnModel {
        WalkGnnModel { cfg, params }
    }

    fn bind(
        &self,
        tape: &mut Tape,
        bindings: &mut Vec<(String, Var)>,
        name: &str,
    ) -> Var {
        let p = self.params.get(name);
        let var = tape.leaf(p.value.clone(), p.shape.clone());
        bindings.push((name.to_string(), var));
        var
    }

    fn apply_mlp(
        &self,
        tape: &mut Tape,
        bindings: &mut Vec<(String, Var)>,
        prefix: &str,
        mut x: Var,
        depth: usize,
    ) -> Var {
        for i in 0..depth {
            let w = self.bind(tape, bindings, &format!("{prefix}.{i}.weight"));
            let b = self.bind(tape, bindings, &format!("{prefix}.{i}.bias"));
            x = tape.linear(x, w, b);
            if i + 1 < depth {
                x = tape.relu(x);
            }
        }
        x
    }

    /// Initial pair state: channel-wise identity, with node features
    /// written over the leading diagonal channels when enabled.
    fn initial_state(&self, e: &EgoNet) -> Vec<f64> {
        let n = e.n;
        let d = self.cfg.hidden;
        let mut s0 = vec![0.0; n * n * d];
        for u in 0..n {
            for c in 0..d {
                s0[(u * n + u) * d + c] = 1.0;
            }
        }
        if self.cfg.use_node_features {
            let width = e.feature_width();
            for u in 0..n {
                let row = e.features(u as NodeId);
                for c in 0..width.min(d) {
                    s0[(u * n + u) * d + c] = row[c];
                }
            }
        }
        s0
    }

    /// Full forward pass; returns the raw (unmasked) per-pair scores as
    /// an [n*n, 1] tape variable.
    pub fn forward(
        &self,
        e: &EgoNet,
        tape: &mut Tape,
        bindings: &mut Vec<(String, Var)>,
    ) -> Var {
        let n = e.n;
        let d = self.cfg.hidden;
        let state = self.forward_state(e, tape, bindings);
        let out_rows = tape.reshape(state, vec![n * n, d]);
        self.apply_mlp(tape, bindings, "out_mlp", out_rows, self.cfg.mlp_depth)
    }

    /// The WalkConv stack without the output head; returns S_l.
    fn forward_state(
        &self,
        e: &EgoNet,
        tape: &mut Tape,
        bindings: &mut Vec<(String, Var)>,
    ) -> Var {
        let n = e.n;
        let d = self.cfg.hidden;
        let (positions, rows) = assemble_edge_features(e, &self.cfg);
        let m = positions.len();
        let feat_len = self.cfg.edge_feature_len();
        let edge_rows = tape.leaf(rows, vec![m, feat_len]);
        let flat_positions: Vec<usize> = positions.iter().map(|&(u, v)| u * n + v).collect();

        let mut state = tape.leaf(self.initial_state(e), vec![n, n, d]);
        for k in 0..self.cfg.layers {
            let filter_rows = self.apply_mlp(
                tape,
                bindings,
                &format!("layer{k}.edge_mlp"),
                edge_rows,
                self.cfg.mlp_depth,
            );
            let filters = tape.scatter_rows(filter_rows, flat_positions.clone(), n * n);
            let contracted = tape.walk_contract(state, filters, n, d);
            let (mlp_in, in_channels) = if self.cfg.directed_concat {
                let transposed = tape.transpose_pair(contracted, n, d);
                (tape.concat_channels(contracted, transposed, n, d, d), 2 * d)
            } else {
                (contracted, d)
            };
            let mlp_rows = tape.reshape(mlp_in, vec![n * n, in_channels]);
            let updated_rows = self.apply_mlp(
                tape,
                bindings,
                &format!("layer{k}.mlp"),
                mlp_rows,
                self.cfg.mlp_depth,
            );
            let updated = tape.reshape(updated_rows, vec![n, n, d]);
            state = if self.cfg.residual {
                tape.add(state, updated)
            } else {
                updated
            };
        }
        state
    }

    /// Raw per-pair scores (row-major n x n) before masking.
    pub fn raw_scores(&self, e: &EgoNet) -> Vec<f64> {
        let mut tape = Tape::new();
        let mut bindings = Vec::new();
        let scores = self.forward(e, &mut tape, &mut bindings);
        tape.data(scores).to_vec()
    }

    /// Final pair state S_l (flat [n, n, d]), for stability checks.
    pub fn final_state(&self, e: &EgoNet) -> Vec<f64> {
        let mut tape = Tape::new();
        let mut bindings = Vec::new();
        let state = self.forward_state(e, &mut tape, &mut bindings);
        tape.data(state).to_vec()
    }

    /// Scores an ego-net; pairs involving the ego, the diagonal and
    /// pairs with an existing base edge are masked for ranking.
    pub fn score_egonet(&self, e: &EgoNet) -> RelevanceMatrix {
        let mut tape = Tape::new();
        let mut bindings = Vec::new();
        let scores = self.forward(e, &mut tape, &mut bindings);
        let n = e.n;
        let mut m = RelevanceMatrix {
            n,
            scores: tape.data(scores).to_vec(),
        };
        for u in 0..n {
            m.set(u, 0, MASK_SCORE);
            m.set(0, u, MASK_SCORE);
            m.set(u, u, MASK_SCORE);
        }
        for u in 1..n {
            for v in 1..n {
                if u != v && e.has_base_edge(u as NodeId, v as NodeId) {
                    m.set(u, v, MASK_SCORE);
                }
            }
        }
        m
    }

    /// Builds the RankNet loss on the tape: mean softplus(s_q - s_p) over
    /// ground-truth positives p and uniformly sampled negatives q.
    pub fn loss(
        &self,
        e: &EgoNet,
        negatives_per_pos: usize,
        sample_seed: u64,
    ) -> Result<(Tape, Var, Vec<(String, Var)>), WalkGnnError> {
        let mut tape = Tape::new();
        let mut bindings = Vec::new();
        let scores = self.forward(e, &mut tape, &mut bindings);
        let loss = build_ranknet_loss(&mut tape, scores, e, negatives_per_pos, sample_seed)?;
        Ok((tape, loss, bindings))
    }

    pub fn loss_value(
        &self,
        e: &EgoNet,
        negatives_per_pos: usize,
        sample_seed: u64,
    ) -> Result<f64, WalkGnnError> {
        let (tape, loss, _) = self.loss(e, negatives_per_pos, sample_seed)?;
        Ok(tape.scalar(loss))
    }

    /// Forward + backward; accumulates gradients into the store without
    /// zeroing first (accumulation is the contract).
    pub fn accumulate_gradients(
        &mut self,
        e: &EgoNet,
        negatives_per_pos: usize,
        sample_seed: u64,
    ) -> Result<f64, WalkGnnError> {
        let (mut tape, loss, bindings) = self.loss(e, negatives_per_pos, sample_seed)?;
        let value = tape.scalar(loss);
        if !value.is_finite() {
            return Err(WalkGnnError::NonFiniteLoss(format!(
                "loss {value} on ego {}",
                e.ego_global_id
            )));
        }
        tape.backward(loss);
        for (name, var) in &bindings {
            let grad = tape.grad(*var);
            let param = self.params.get_mut(name);
            for (g, &src) in param.grad.iter_mut().zip(grad) {
                *g += src;
            }
        }
        Ok(value)
    }
}

fn init_mlp(
    params: &mut ParamStore,
    rng: &mut ChaCha8Rng,
    prefix: &str,
    dims: Vec<(usize, usize)>,
    zero_final: bool,
) {
    let last = dims.len() - 1;
    for (i, (fan_in, fan_out)) in dims.into_iter().enumerate() {
        let zero = zero_final && i == last;
        let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let weight: Vec<f64> = (0..fan_in * fan_out)
            .map(|_| if zero { 0.0 } else { rng.random_range(-a..a) })
            .collect();
        let bias: Vec<f64> = (0..fan_out)
            .map(|_| if zero { 0.0 } else { rng.random_range(-a..a) })
            .collect();
        params.insert(
            &format!("{prefix}.{i}.weight"),
            Param::new(vec![fan_in, fan_out], weight),
        );
        params.insert(
            &format!("{prefix}.{i}.bias"),
            Param::new(vec![fan_out], bias),
        );
    }
}

/// RankNet loss over a score variable of shape [n*n, 1]. Positives are
/// the undirected ground-truth pairs (score = max over directions);
/// negatives are sampled uniformly from the unmasked non-GT candidate
/// pairs, `negatives_per_pos` per positive.
pub fn build_ranknet_loss(
    tape: &mut Tape,
    scores: Var,
    e: &EgoNet,
    negatives_per_pos: usize,
    sample_seed: u64,
) -> Result<Var, WalkGnnError> {
    let n = e.n;
    if e.ground_truth.is_empty() {
        return Err(WalkGnnError::EmptyGroundTruth);
    }
    let gt: std::collections::BTreeSet<(NodeId, NodeId)> =
        e.ground_truth.iter().copied().collect();
    let negatives_pool: Vec<(NodeId, NodeId)> = e
        .candidate_pairs()
        .into_iter()
        .filter(|p| !gt.contains(p))
        .collect();
    if negatives_pool.is_empty() {
        return Err(WalkGnnError::NoNegatives);
    }
    let pos_pairs: Vec<(usize, usize)> = e
        .ground_truth
        .iter()
        .map(|&(u, v)| (u as usize * n + v as usize, v as usize * n + u as usize))
        .collect();
    let pos = tape.max_of_two(scores, &pos_pairs);

    let mut rng = ChaCha8Rng::seed_from_u64(sample_seed);
    let mut neg_pairs = Vec::new();
    let mut pos_repeat = Vec::new();
    for (pi, _) in e.ground_truth.iter().enumerate() {
        for _ in 0..negatives_per_pos {
            let (u, v) = negatives_pool[rng.random_range(0..negatives_pool.len())];
            neg_pairs.push((u as usize * n + v as usize, v as usize * n + u as usize));
            pos_repeat.push(pi);
        }
    }
    let neg = tape.max_of_two(scores, &neg_pairs);
    let pos_rep = tape.gather(pos, pos_repeat);
    let diff = tape.sub(neg, pos_rep);
    let sp = tape.softplus(diff);
    Ok(tape.mean(sp))
}

/// Standalone pairwise loss on a precomputed relevance matrix, for use
/// outside training.
pub fn pairwise_loss(
    scores: &RelevanceMatrix,
    e: &EgoNet,
    negatives_per_pos: usize,
    sample_seed: u64,
) -> Result<f64, WalkGnnError> {
    let mut tape = Tape::new();
    let var = tape.leaf(scores.scores.clone(), vec![scores.n * scores.n, 1]);
    let loss = build_ranknet_loss(&mut tape, var, e, negatives_per_pos, sample_seed)?;
    Ok(tape.scalar(loss))
}

/// Exact length-k directed walk counts between all pairs, computed with
/// the WalkConv machinery at d = 1 with identity filters. Equals the
/// k-th power of the (merged) adjacency matrix.
pub fn walk_count_mode(e: &EgoNet, k: usize) -> Result<Vec<u64>, WalkGnnError> {
    assert!(k >= 1);
    let n = e.n;
    let mut adjacency = vec![0.0; n * n];
    for edge in &e.edges {
        adjacency[edge.src as usize * n + edge.dst as usize] = 1.0;
    }
    let mut state = vec![0.0; n * n];
    for i in 0..n {
        state[i * n + i] = 1.0;
    }
    const LIMIT: f64 = 9_007_199_254_740_992.0; // 2^53
    for _ in 0..k {
        state = crate::tape::contract_kernel(&state, &adjacency, n, 1);
        if state.iter().any(|&x| x >= LIMIT) {
            return Err(WalkGnnError::WalkCountOverflow);
        }
    }
    Ok(state.iter().map(|&x| x as u64).collect())
}
