//! Minimal reverse-mode autodiff over dense f64 buffers. Every forward
//! op appends a node to the tape; `backward` walks the tape in reverse
//! and accumulates gradients.

use std::sync::atomic::{AtomicU64, Ordering};

/// Scalar multiply-add counter for the pair-state contraction, used by
/// the complexity-scaling check.
static WALK_CONV_OPS: AtomicU64 = AtomicU64::new(0);

pub fn walk_conv_op_count() -> u64 {
    WALK_CONV_OPS.load(Ordering::Relaxed)
}

pub fn reset_walk_conv_op_count() {
    WALK_CONV_OPS.store(0, Ordering::Relaxed);
}

/// The WalkConv contraction kernel:
/// out[u,v,t] = (1/d) * sum_{q,c} s[u,q,c] * filters[q,v,c,t].
/// Shared by the tape op and the integer walk-count mode.
pub fn contract_kernel(s: &[f64], filters: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n * d];
    for u in 0..n {
        for q in 0..n {
            for c in 0..d {
                let s_val = s[(u * n + q) * d + c];
                for v in 0..n {
                    let t_base = ((q * n + v) * d + c) * d;
                    let o_base = (u * n + v) * d;
                    for t in 0..d {
                        out[o_base + t] += s_val * filters[t_base + t];
                    }
                }
            }
        }
    }
    let inv_d = 1.0 / d as f64;
    for x in out.iter_mut() {
        *x *= inv_d;
    }
    WALK_CONV_OPS.fetch_add((n * n * n * d * d) as u64, Ordering::Relaxed);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(pub usize);

enum Op {
    Leaf,
    Reshape(usize),
    Add(usize, usize),
    Relu(usize),
    Linear {
        x: usize,
        w: usize,
        b: usize,
        rows: usize,
        in_dim: usize,
        out_dim: usize,
    },
    WalkContract {
        s: usize,
        filters: usize,
        n: usize,
        d: usize,
    },
    TransposePair {
        x: usize,
        n: usize,
        d: usize,
    },
    ConcatChannels {
        a: usize,
        b: usize,
        n: usize,
        da: usize,
        db: usize,
    },
    /// rows [m, row_len] scattered into a zero buffer of out_len at
    /// positions[i] * row_len.
    ScatterRows {
        rows: usize,
        positions: Vec<usize>,
        row_len: usize,
    },
    Gather {
        x: usize,
        idx: Vec<usize>,
    },
    /// Per output element: max of two source entries; argmax recorded.
    MaxOfTwo {
        x: usize,
        chosen: Vec<usize>,
    },
    Sub(usize, usize),
    Softplus(usize),
    Mean(usize),
}

struct Node {
    data: Vec<f64>,
    shape: Vec<usize>,
    grad: Vec<f64>,
    op: Op,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    fn push(&mut self, data: Vec<f64>, shape: Vec<usize>, op: Op) -> Var {
        let grad = vec![0.0; data.len()];
        self.nodes.push(Node {
            data,
            shape,
            grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn leaf(&mut self, data: Vec<f64>, shape: Vec<usize>) -> Var {
        assert_eq!(data.len(), shape.iter().product::<usize>());
        self.push(data, shape, Op::Leaf)
    }

    pub fn data(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].data
    }

    pub fn grad(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].grad
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    /// View with a new shape; identity for data and gradient.
    pub fn reshape(&mut self, x: Var, shape: Vec<usize>) -> Var {
        assert_eq!(
            self.nodes[x.0].data.len(),
            shape.iter().product::<usize>()
        );
        let data = self.nodes[x.0].data.clone();
        self.push(data, shape, Op::Reshape(x.0))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(self.nodes[a.0].shape, self.nodes[b.0].shape);
        let data: Vec<f64> = self.nodes[a.0]
            .data
            .iter()
            .zip(&self.nodes[b.0].data)
            .map(|(x, y)| x + y)
            .collect();
        let shape = self.nodes[a.0].shape.clone();
        self.push(data, shape, Op::Add(a.0, b.0))
    }

    pub fn relu(&mut self, x: Var) -> Var {
        let data: Vec<f64> = self.nodes[x.0].data.iter().map(|&v| v.max(0.0)).collect();
        let shape = self.nodes[x.0].shape.clone();
        self.push(data, shape, Op::Relu(x.0))
    }

    /// y = x @ w + b over rows: x [rows, in], w [in, out], b [out].
    pub fn linear(&mut self, x: Var, w: Var, b: Var) -> Var {
        let rows = self.nodes[x.0].shape[0];
        let in_dim = self.nodes[x.0].shape[1];
        assert_eq!(self.nodes[w.0].shape, vec![in_dim, self.nodes[w.0].shape[1]]);
        let out_dim = self.nodes[w.0].shape[1];
        assert_eq!(self.nodes[b.0].data.len(), out_dim);
        let mut data = vec![0.0; rows * out_dim];
        {
            let xd = &self.nodes[x.0].data;
            let wd = &self.nodes[w.0].data;
            let bd = &self.nodes[b.0].data;
            for r in 0..rows {
                let row = &xd[r * in_dim..(r + 1) * in_dim];
                let out = &mut data[r * out_dim..(r + 1) * out_dim];
                out.copy_from_slice(bd);
                for (i, &xi) in row.iter().enumerate() {
                    if xi == 0.0 {
                        continue;
                    }
                    let wrow = &wd[i * out_dim..(i + 1) * out_dim];
                    for (o, wv) in wrow.iter().enumerate() {
                        out[o] += xi * wv;
                    }
                }
            }
        }
        self.push(
            data,
            vec![rows, out_dim],
            Op::Linear {
                x: x.0,
                w: w.0,
                b: b.0,
                rows,
                in_dim,
                out_dim,
            },
        )
    }

    pub fn walk_contract(&mut self, s: Var, filters: Var, n: usize, d: usize) -> Var {
        assert_eq!(self.nodes[s.0].data.len(), n * n * d);
        assert_eq!(self.nodes[filters.0].data.len(), n * n * d * d);
        let data = contract_kernel(&self.nodes[s.0].data, &self.nodes[filters.0].data, n, d);
        self.push(
            data,
            vec![n, n, d],
            Op::WalkContract {
                s: s.0,
                filters: filters.0,
                n,
                d,
            },
        )
    }

    /// Swaps the (u, v) axes of an [n, n, d] state.
    pub fn transpose_pair(&mut self, x: Var, n: usize, d: usize) -> Var {
        let xd = &self.nodes[x.0].data;
        let mut data = vec![0.0; n * n * d];
        for u in 0..n {
            for v in 0..n {
                let src = (v * n + u) * d;
                let dst = (u * n + v) * d;
                data[dst..dst + d].copy_from_slice(&xd[src..src + d]);
            }
        }
        self.push(data, vec![n, n, d], Op::TransposePair { x: x.0, n, d })
    }

    pub fn concat_channels(&mut self, a: Var, b: Var, n: usize, da: usize, db: usize) -> Var {
        let ad = &self.nodes[a.0].data;
        let bd = &self.nodes[b.0].data;
        let mut data = vec![0.0; n * n * (da + db)];
        for p in 0..n * n {
            data[p * (da + db)..p * (da + db) + da].copy_from_slice(&ad[p * da..(p + 1) * da]);
            data[p * (da + db) + da..(p + 1) * (da + db)].copy_from_slice(&bd[p * db..(p + 1) * db]);
        }
        self.push(
            data,
            vec![n, n, da + db],
            Op::ConcatChannels {
                a: a.0,
                b: b.0,
                n,
                da,
                db,
            },
        )
    }

    /// Scatters row i of `rows` [m, row_len] to offset positions[i] *
    /// row_len of a zero buffer with `slots * row_len` entries.
    pub fn scatter_rows(&mut self, rows: Var, positions: Vec<usize>, slots: usize) -> Var {
        let m = self.nodes[rows.0].shape[0];
        let row_len = if m == 0 {
            self.nodes[rows.0].shape[1]
        } else {
            self.nodes[rows.0].data.len() / m
        };
        assert_eq!(positions.len(), m);
        let mut data = vec![0.0; slots * row_len];
        for (i, &p) in positions.iter().enumerate() {
            data[p * row_len..(p + 1) * row_len]
                .copy_from_slice(&self.nodes[rows.0].data[i * row_len..(i + 1) * row_len]);
        }
        self.push(
            data,
            vec![slots, row_len],
            Op::ScatterRows {
                rows: rows.0,
                positions,
                row_len,
            },
        )
    }

    pub fn gather(&mut self, x: Var, idx: Vec<usize>) -> Var {
        let data: Vec<f64> = idx.iter().map(|&i| self.nodes[x.0].data[i]).collect();
        let shape = vec![idx.len()];
        self.push(data, shape, Op::Gather { x: x.0, idx })
    }

    /// out[i] = max(x[a_i], x[b_i]); gradient flows to the winner.
    pub fn max_of_two(&mut self, x: Var, pairs: &[(usize, usize)]) -> Var {
        let xd = &self.nodes[x.0].data;
        let mut data = Vec::with_capacity(pairs.len());
        let mut chosen = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if xd[a] >= xd[b] {
                data.push(xd[a]);
                chosen.push(a);
            } else {
                data.push(xd[b]);
                chosen.push(b);
            }
        }
        let shape = vec![pairs.len()];
        self.push(data, shape, Op::MaxOfTwo { x: x.0, chosen })
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        assert_eq!(self.nodes[a.0].shape, self.nodes[b.0].shape);
        let data: Vec<f64> = self.nodes[a.0]
            .data
            .iter()
            .zip(&self.nodes[b.0].data)
            .map(|(x, y)| x - y)
            .collect();
        let shape = self.nodes[a.0].shape.clone();
        self.push(data, shape, Op::Sub(a.0, b.0))
    }

    /// Numerically stable ln(1 + e^x).
    pub fn softplus(&mut self, x: Var) -> Var {
        let data: Vec<f64> = self.nodes[x.0]
            .data
            .iter()
            .map(|&v| {
                if v > 30.0 {
                    v
                } else if v < -30.0 {
                    v.exp()
                } else {
                    v.exp().ln_1p()
                }
            })
            .collect();
        let shape = self.nodes[x.0].shape.clone();
        self.push(data, shape, Op::Softplus(x.0))
    }

    pub fn mean(&mut self, x: Var) -> Var {
        let len = self.nodes[x.0].data.len().max(1);
        let m = self.nodes[x.0].data.iter().sum::<f64>() / len as f64;
        self.push(vec![m], vec![1], Op::Mean(x.0))
    }

    pub fn scalar(&self, v: Var) -> f64 {
        self.nodes[v.0].data[0]
    }

    /// Reverse pass from `root` (seeded with gradient 1 per entry).
    pub fn backward(&mut self, root: Var) {
        for g in self.nodes[root.0].grad.iter_mut() {
            *g = 1.0;
        }
        for i in (0..=root.0).rev() {
            // split borrows: take the node's grad and op out, write parents
            let grad = std::mem::take(&mut self.nodes[i].grad);
            let op = std::mem::replace(&mut self.nodes[i].op, Op::Leaf);
            match &op {
                Op::Leaf => {
                    self.nodes[i].grad = grad;
                    continue;
                }
                Op::Reshape(x) => {
                    let x = *x;
                    for (j, g) in grad.iter().enumerate() {
                        self.nodes[x].grad[j] += g;
                    }
                }
                Op::Add(a, b) => {
                    let (a, b) = (*a, *b);
                    for (j, g) in grad.iter().enumerate() {
                        self.nodes[a].grad[j] += g;
                    }
                    for (j, g) in grad.iter().enumerate() {
                        self.nodes[b].grad[j] += g;
                    }
                }
                Op::Relu(x) => {
                    let x = *x;
                    for (j, g) in grad.iter().enumerate() {
                        if self.nodes[x].data[j] > 0.0 {
                            self.nodes[x].grad[j] += g;
                        }
                    }
                }
                Op::Linear {
                    x,
                    w,
                    b,
                    rows,
                    in_dim,
                    out_dim,
                } => {
                    let (x, w, b) = (*x, *w, *b);
                    let (rows, in_dim, out_dim) = (*rows, *in_dim, *out_dim);
                    let xd = std::mem::take(&mut self.nodes[x].data);
                    let wd = std::mem::take(&mut self.nodes[w].data);
                    for r in 0..rows {
                        let gy = &grad[r * out_dim..(r + 1) * out_dim];
                        {
                            let gx = &mut self.nodes[x].grad[r * in_dim..(r + 1) * in_dim];
                            for i2 in 0..in_dim {
                                let wrow = &wd[i2 * out_dim..(i2 + 1) * out_dim];
                                let mut acc = 0.0;
                                for o in 0..out_dim {
                                    acc += gy[o] * wrow[o];
                                }
                                gx[i2] += acc;
                            }
                        }
                        {
                            let gw = &mut self.nodes[w].grad;
                            let xrow = &xd[r * in_dim..(r + 1) * in_dim];
                            for (i2, &xi) in xrow.iter().enumerate() {
                                if xi == 0.0 {
                                    continue;
                                }
                                let gwrow = &mut gw[i2 * out_dim..(i2 + 1) * out_dim];
                                for o in 0..out_dim {
                                    gwrow[o] += xi * gy[o];
                                }
                            }
                        }
                        {
                            let gb = &mut self.nodes[b].grad;
                            for o in 0..out_dim {
                                gb[o] += gy[o];
                            }
                        }
                    }
                    self.nodes[x].data = xd;
                    self.nodes[w].data = wd;
                }
                Op::WalkContract { s, filters, n, d } => {
                    let (s, filters, n, d) = (*s, *filters, *n, *d);
                    let inv_d = 1.0 / d as f64;
                    let sd = std::mem::take(&mut self.nodes[s].data);
                    let td = std::mem::take(&mut self.nodes[filters].data);
                    // dS[u,q,c] += (1/d) sum_{v,t} gW[u,v,t] T[q,v,c,t]
                    {
                        let gs = &mut self.nodes[s].grad;
                        for u in 0..n {
                            for q in 0..n {
                                for c in 0..d {
                                    let mut acc = 0.0;
                                    for v in 0..n {
                                        let gw_base = (u * n + v) * d;
                                        let t_base = ((q * n + v) * d + c) * d;
                                        for t in 0..d {
                                            acc += grad[gw_base + t] * td[t_base + t];
                                        }
                                    }
                                    gs[(u * n + q) * d + c] += inv_d * acc;
                                }
                            }
                        }
                    }
                    // dT[q,v,c,t] += (1/d) sum_u S[u,q,c] gW[u,v,t]
                    {
                        let gt = &mut self.nodes[filters].grad;
                        for u in 0..n {
                            for q in 0..n {
                                for c in 0..d {
                                    let s_val = sd[(u * n + q) * d + c];
                                    if s_val == 0.0 {
                                        continue;
                                    }
                                    for v in 0..n {
                                        let gw_base = (u * n + v) * d;
                                        let t_base = ((q * n + v) * d + c) * d;
                                        for t in 0..d {
                                            gt[t_base + t] += inv_d * s_val * grad[gw_base + t];
                                        }
                                    }
                                }
                            }
                        }
                    }
                    self.nodes[s].data = sd;
                    self.nodes[filters].data = td;
                }
                Op::TransposePair { x, n, d } => {
                    let (x, n, d) = (*x, *n, *d);
                    for u in 0..n {
                        for v in 0..n {
                            let src = (u * n + v) * d;
                            let dst = (v * n + u) * d;
                            for c in 0..d {
                                self.nodes[x].grad[dst + c] += grad[src + c];
                            }
                        }
                    }
                }
                Op::ConcatChannels { a, b, n, da, db } => {
                    let (a, b, n, da, db) = (*a, *b, *n, *da, *db);
                    for p in 0..n * n {
                        for c in 0..da {
                            self.nodes[a].grad[p * da + c] += grad[p * (da + db) + c];
                        }
                        for c in 0..db {
                            self.nodes[b].grad[p * db + c] += grad[p * (da + db) + da + c];
                        }
                    }
                }
                Op::ScatterRows {
                    rows,
                    positions,
                    row_len,
                } => {
                    let rows = *rows;
                    let row_len = *row_len;
                    let positions = positions.clone();
                    for (i, &p) in positions.iter().enumerate() {
                        for c in 0..row_len {
                            self.nodes[rows].grad[i * row_len + c] += grad[p * row_len + c];
                        }
                    }
                }
                Op::Gather { x, idx } => {
                    let x = *x;
                    let idx = idx.clone();
                    for (j, &i2) in idx.iter().enumerate() {
                        self.nodes[x].grad[i2] += grad[j];
                    }
                }
                Op::MaxOfTwo { x, chosen } => {
                    let x = *x;
                    let chosen = chosen.clone();
                    for (j, &i2) in chosen.iter().enumerate() {
                        self.nodes[x].grad[i2] += grad[j];
                    }
                }
                Op::Sub(a, b) => {
                    let (a, b) = (*a, *b);
                    for (j, g) in grad.iter().enumerate() {
                        self.nodes[a].grad[j] += g;
                    }
                    for (j, g) in grad.iter().enumerate() {
                        self.nodes[b].grad[j] -= g;
                    }
                }
                Op::Softplus(x) => {
                    let x = *x;
                    for (j, g) in grad.iter().enumerate() {
                        let v = self.nodes[x].data[j];
                        let sig = 1.0 / (1.0 + (-v).exp());
                        self.nodes[x].grad[j] += g * sig;
                    }
                }
                Op::Mean(x) => {
                    let x = *x;
                    let len = self.nodes[x].data.len().max(1) as f64;
                    let g = grad[0] / len;
                    for gx in self.nodes[x].grad.iter_mut() {
                        *gx += g;
                    }
                }
            }
            self.nodes[i].grad = grad;
            self.nodes[i].op = op;
        }
    }
}
