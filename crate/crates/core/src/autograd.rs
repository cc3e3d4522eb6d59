//! Tape-based reverse-mode differentiation over [`Matrix`] values.
//!
//! A [`Graph`] records every operation of one forward pass. Calling
//! [`Graph::backward`] on a scalar node walks the tape in reverse and returns
//! the gradient of every parameter leaf that took part in the computation.

use std::collections::HashMap;

use crate::tensor::Matrix;

const LAYER_NORM_EPS: f64 = 1e-5;
const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

/// Handle to a node on the tape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

#[derive(Debug)]
enum Op {
    Constant,
    Param(usize),
    MatMul(Var, Var),
    MatMulT(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    MulConst(Var, Matrix),
    MaskFill(Var, Matrix),
    SoftmaxRows(Var),
    LayerNorm {
        x: Var,
        gamma: Var,
        beta: Var,
        normalized: Matrix,
        inv_std: Vec<f64>,
    },
    Gelu(Var),
    Gather {
        table: Var,
        ids: Vec<usize>,
    },
    ColSlice {
        x: Var,
        start: usize,
    },
    ConcatCols(Vec<Var>),
    SelectRows {
        x: Var,
        rows: Vec<usize>,
    },
    CrossEntropy {
        logits: Var,
        gold: usize,
        probs: Vec<f64>,
    },
    Sum(Vec<Var>),
}

#[derive(Debug)]
struct Node {
    value: Matrix,
    op: Op,
}

/// Gradients of parameter leaves, keyed by parameter index.
#[derive(Debug, Default)]
pub struct Gradients {
    by_param: HashMap<usize, Matrix>,
}

impl Gradients {
    pub fn get(&self, param: usize) -> Option<&Matrix> {
        self.by_param.get(&param)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &Matrix)> {
        self.by_param.iter().map(|(&k, v)| (k, v))
    }

    /// Adds `other` scaled by `weight` into `self`.
    pub fn accumulate(&mut self, other: Gradients, weight: f64) {
        for (k, mut g) in other.by_param {
            g.scale_assign(weight);
            match self.by_param.get_mut(&k) {
                Some(acc) => acc.add_assign(&g),
                None => {
                    self.by_param.insert(k, g);
                }
            }
        }
    }

    pub fn global_norm(&self) -> f64 {
        let mut keys: Vec<_> = self.by_param.keys().copied().collect();
        keys.sort_unstable();
        keys.iter().map(|k| self.by_param[k].sum_sq()).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        for g in self.by_param.values_mut() {
            g.scale_assign(s);
        }
    }
}

#[derive(Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    params: HashMap<usize, Var>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    fn push(&mut self, value: Matrix, op: Op) -> Var {
        self.nodes.push(Node { value, op });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Matrix {
        &self.nodes[v.0].value
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn constant(&mut self, value: Matrix) -> Var {
        self.push(value, Op::Constant)
    }

    /// Registers parameter `index` as a leaf. Repeated registrations of the
    /// same index return the same node so shared weights accumulate a
    /// single gradient.
    pub fn param(&mut self, index: usize, value: &Matrix) -> Var {
        if let Some(&v) = self.params.get(&index) {
            return v;
        }
        let v = self.push(value.clone(), Op::Param(index));
        self.params.insert(index, v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).matmul(self.value(b));
        self.push(value, Op::MatMul(a, b))
    }

    /// `a · bᵀ`
    pub fn matmul_t(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).matmul_t(self.value(b));
        self.push(value, Op::MatMulT(a, b))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).zip_map(self.value(b), |x, y| x + y);
        self.push(value, Op::Add(a, b))
    }

    /// Adds the `1 × c` row `bias` to every row of `a`.
    pub fn add_row(&mut self, a: Var, bias: Var) -> Var {
        let b = self.value(bias);
        assert_eq!(b.rows(), 1, "bias must be a single row");
        assert_eq!(b.cols(), self.value(a).cols(), "bias width mismatch");
        let mut value = self.value(a).clone();
        let b = b.row(0).to_vec();
        for i in 0..value.rows() {
            for (x, y) in value.row_mut(i).iter_mut().zip(&b) {
                *x += y;
            }
        }
        self.push(value, Op::AddRow(a, bias))
    }

    pub fn scale(&mut self, a: Var, s: f64) -> Var {
        let value = self.value(a).map(|x| x * s);
        self.push(value, Op::Scale(a, s))
    }

    /// Elementwise product with a constant matrix (dropout masks, row selectors).
    pub fn mul_const(&mut self, a: Var, c: Matrix) -> Var {
        let value = self.value(a).zip_map(&c, |x, y| x * y);
        self.push(value, Op::MulConst(a, c))
    }

    /// `mask ⊙ a + (1 − mask) · fill` for a binary `mask`.
    pub fn mask_fill(&mut self, a: Var, mask: Matrix, fill: f64) -> Var {
        let value = self.value(a).zip_map(&mask, |x, m| m * x + (1.0 - m) * fill);
        self.push(value, Op::MaskFill(a, mask))
    }

    pub fn softmax_rows(&mut self, a: Var) -> Var {
        let x = self.value(a);
        let mut value = Matrix::zeros(x.rows(), x.cols());
        for i in 0..x.rows() {
            let p = crate::tensor::softmax(x.row(i));
            value.row_mut(i).copy_from_slice(&p);
        }
        self.push(value, Op::SoftmaxRows(a))
    }

    pub fn layer_norm(&mut self, x: Var, gamma: Var, beta: Var) -> Var {
        let xv = self.value(x);
        let (rows, cols) = xv.shape();
        let g = self.value(gamma).row(0).to_vec();
        let b = self.value(beta).row(0).to_vec();
        let mut normalized = Matrix::zeros(rows, cols);
        let mut inv_std = Vec::with_capacity(rows);
        let mut value = Matrix::zeros(rows, cols);
        for i in 0..rows {
            let row = xv.row(i);
            let mean = row.iter().sum::<f64>() / cols as f64;
            let var = row.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / cols as f64;
            let inv = 1.0 / (var + LAYER_NORM_EPS).sqrt();
            inv_std.push(inv);
            for j in 0..cols {
                let xh = (row[j] - mean) * inv;
                normalized[(i, j)] = xh;
                value[(i, j)] = g[j] * xh + b[j];
            }
        }
        self.push(
            value,
            Op::LayerNorm {
                x,
                gamma,
                beta,
                normalized,
                inv_std,
            },
        )
    }

    pub fn gelu(&mut self, a: Var) -> Var {
        let value = self.value(a).map(|x| {
            let t = (GELU_C * (x + 0.044715 * x * x * x)).tanh();
            0.5 * x * (1.0 + t)
        });
        self.push(value, Op::Gelu(a))
    }

    /// Row lookup into an embedding table.
    pub fn gather(&mut self, table: Var, ids: &[usize]) -> Var {
        let value = self.value(table).select_rows(ids);
        self.push(
            value,
            Op::Gather {
                table,
                ids: ids.to_vec(),
            },
        )
    }

    pub fn col_slice(&mut self, x: Var, start: usize, width: usize) -> Var {
        let value = self.value(x).cols_slice(start, width);
        self.push(value, Op::ColSlice { x, start })
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        let rows = self.value(parts[0]).rows();
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut value = Matrix::zeros(rows, cols);
        let mut offset = 0;
        for &p in parts {
            let pv = self.value(p);
            assert_eq!(pv.rows(), rows, "concat row mismatch");
            for i in 0..rows {
                value.row_mut(i)[offset..offset + pv.cols()].copy_from_slice(pv.row(i));
            }
            offset += pv.cols();
        }
        self.push(value, Op::ConcatCols(parts.to_vec()))
    }

    pub fn select_rows(&mut self, x: Var, rows: &[usize]) -> Var {
        let value = self.value(x).select_rows(rows);
        self.push(value, Op::SelectRows { x, rows: rows.to_vec() })
    }

    /// `−ln softmax(logits)[gold]` for a `1 × k` logit row.
    pub fn cross_entropy(&mut self, logits: Var, gold: usize) -> Var {
        let l = self.value(logits);
        assert_eq!(l.rows(), 1, "cross entropy expects one logit row");
        let probs = crate::tensor::softmax(l.row(0));
        let max = l.row(0).iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + l.row(0).iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        let loss = lse - l.row(0)[gold];
        self.push(Matrix::scalar(loss), Op::CrossEntropy { logits, gold, probs })
    }

    pub fn sum(&mut self, parts: &[Var]) -> Var {
        let mut value = self.value(parts[0]).clone();
        for &p in &parts[1..] {
            value.add_assign(self.value(p));
        }
        self.push(value, Op::Sum(parts.to_vec()))
    }

    /// Reverse sweep from the scalar `root`.
    pub fn backward(&self, root: Var) -> Gradients {
        assert_eq!(self.value(root).shape(), (1, 1), "backward needs a scalar root");
        let mut grads: Vec<Option<Matrix>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[root.0] = Some(Matrix::scalar(1.0));
        let mut out = Gradients::default();

        for idx in (0..=root.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            match &node.op {
                Op::Constant => {}
                Op::Param(p) => {
                    out.by_param.insert(*p, g);
                }
                Op::MatMul(a, b) => {
                    let ga = g.matmul_t(self.value(*b));
                    let gb = self.value(*a).t_matmul(&g);
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::MatMulT(a, b) => {
                    // out = a bᵀ: da = g b, db = gᵀ a
                    let ga = g.matmul(self.value(*b));
                    let gb = g.t_matmul(self.value(*a));
                    acc(&mut grads, *a, ga);
                    acc(&mut grads, *b, gb);
                }
                Op::Add(a, b) => {
                    acc(&mut grads, *a, g.clone());
                    acc(&mut grads, *b, g);
                }
                Op::AddRow(a, bias) => {
                    let mut gb = Matrix::zeros(1, g.cols());
                    for i in 0..g.rows() {
                        for (s, v) in gb.row_mut(0).iter_mut().zip(g.row(i)) {
                            *s += v;
                        }
                    }
                    acc(&mut grads, *a, g);
                    acc(&mut grads, *bias, gb);
                }
                Op::Scale(a, s) => {
                    let s = *s;
                    acc(&mut grads, *a, g.map(|x| x * s));
                }
                Op::MulConst(a, c) | Op::MaskFill(a, c) => {
                    acc(&mut grads, *a, g.zip_map(c, |x, m| x * m));
                }
                Op::SoftmaxRows(a) => {
                    let y = &node.value;
                    let mut ga = Matrix::zeros(y.rows(), y.cols());
                    for i in 0..y.rows() {
                        let yr = y.row(i);
                        let gr = g.row(i);
                        let inner: f64 = yr.iter().zip(gr).map(|(p, q)| p * q).sum();
                        for (j, o) in ga.row_mut(i).iter_mut().enumerate() {
                            *o = yr[j] * (gr[j] - inner);
                        }
                    }
                    acc(&mut grads, *a, ga);
                }
                Op::LayerNorm {
                    x,
                    gamma,
                    beta,
                    normalized,
                    inv_std,
                } => {
                    let (rows, cols) = normalized.shape();
                    let gam = self.value(*gamma).row(0);
                    let mut gx = Matrix::zeros(rows, cols);
                    let mut gg = Matrix::zeros(1, cols);
                    let mut gbeta = Matrix::zeros(1, cols);
                    let n = cols as f64;
                    for i in 0..rows {
                        let xh = normalized.row(i);
                        let gr = g.row(i);
                        let dxh: Vec<f64> = gr.iter().zip(gam).map(|(a, b)| a * b).collect();
                        let sum_dxh: f64 = dxh.iter().sum();
                        let sum_dxh_xh: f64 = dxh.iter().zip(xh).map(|(a, b)| a * b).sum();
                        for j in 0..cols {
                            gx[(i, j)] = inv_std[i] / n * (n * dxh[j] - sum_dxh - xh[j] * sum_dxh_xh);
                            gg[(0, j)] += gr[j] * xh[j];
                            gbeta[(0, j)] += gr[j];
                        }
                    }
                    acc(&mut grads, *x, gx);
                    acc(&mut grads, *gamma, gg);
                    acc(&mut grads, *beta, gbeta);
                }
                Op::Gelu(a) => {
                    let ga = self.value(*a).zip_map(&g, |x, up| {
                        let inner = GELU_C * (x + 0.044715 * x * x * x);
                        let t = inner.tanh();
                        let d = 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * GELU_C * (1.0 + 3.0 * 0.044715 * x * x);
                        up * d
                    });
                    acc(&mut grads, *a, ga);
                }
                Op::Gather { table, ids } => {
                    let tv = self.value(*table);
                    let mut gt = Matrix::zeros(tv.rows(), tv.cols());
                    for (r, &id) in ids.iter().enumerate() {
                        for (o, v) in gt.row_mut(id).iter_mut().zip(g.row(r)) {
                            *o += v;
                        }
                    }
                    acc(&mut grads, *table, gt);
                }
                Op::ColSlice { x, start } => {
                    let xv = self.value(*x);
                    let mut gx = Matrix::zeros(xv.rows(), xv.cols());
                    for i in 0..g.rows() {
                        gx.row_mut(i)[*start..*start + g.cols()].copy_from_slice(g.row(i));
                    }
                    acc(&mut grads, *x, gx);
                }
                Op::ConcatCols(parts) => {
                    let mut offset = 0;
                    for &p in parts {
                        let w = self.value(p).cols();
                        acc(&mut grads, p, g.cols_slice(offset, w));
                        offset += w;
                    }
                }
                Op::SelectRows { x, rows } => {
                    let xv = self.value(*x);
                    let mut gx = Matrix::zeros(xv.rows(), xv.cols());
                    for (r, &i) in rows.iter().enumerate() {
                        for (o, v) in gx.row_mut(i).iter_mut().zip(g.row(r)) {
                            *o += v;
                        }
                    }
                    acc(&mut grads, *x, gx);
                }
                Op::CrossEntropy { logits, gold, probs } => {
                    let up = g.value();
                    let mut gl = Matrix::zeros(1, probs.len());
                    for (j, p) in probs.iter().enumerate() {
                        let target = if j == *gold { 1.0 } else { 0.0 };
                        gl[(0, j)] = up * (p - target);
                    }
                    acc(&mut grads, *logits, gl);
                }
                Op::Sum(parts) => {
                    for &p in parts {
                        acc(&mut grads, p, g.clone());
                    }
                }
            }
        }
        out
    }
}

fn acc(grads: &mut [Option<Matrix>], v: Var, g: Matrix) {
    match &mut grads[v.0] {
        Some(existing) => existing.add_assign(&g),
        slot @ None => *slot = Some(g),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central-difference check of a scalar function of one parameter.
    fn check(build: impl Fn(&mut Graph, Var) -> Var, init: Matrix) {
        let mut g = Graph::new();
        let p = g.param(0, &init);
        let root = build(&mut g, p);
        let grads = g.backward(root);
        let analytic = grads.get(0).cloned().unwrap_or(Matrix::zeros(init.rows(), init.cols()));
        let h = 1e-6;
        for k in 0..init.len() {
            let eval = |delta: f64| {
                let mut m = init.clone();
                m.as_mut_slice()[k] += delta;
                let mut g = Graph::new();
                let p = g.param(0, &m);
                let r = build(&mut g, p);
                g.value(r).value()
            };
            let numeric = (eval(h) - eval(-h)) / (2.0 * h);
            let a = analytic.as_slice()[k];
            assert!(
                (a - numeric).abs() <= 1e-6 * (1.0 + numeric.abs()),
                "element {k}: analytic {a} vs numeric {numeric}"
            );
        }
    }

    fn sample(rows: usize, cols: usize, seed: f64) -> Matrix {
        let data = (0..rows * cols).map(|i| ((i as f64 + 1.0) * seed).sin()).collect();
        Matrix::from_vec(rows, cols, data)
    }

    #[test]
    fn softmax_layernorm_gelu_chain() {
        let w = sample(3, 4, 0.37);
        check(
            move |g, p| {
                let c = g.constant(w.clone());
                let s = g.matmul_t(p, c);
                let s = g.mask_fill(s, Matrix::from_rows(&[vec![1.0, 0.0, 1.0], vec![1.0, 0.0, 1.0]]), -1e9);
                let a = g.softmax_rows(s);
                let gam = g.constant(Matrix::filled(1, 3, 1.3));
                let bet = g.constant(Matrix::filled(1, 3, -0.2));
                let n = g.layer_norm(a, gam, bet);
                let n = g.gelu(n);
                let r = g.select_rows(n, &[1]);
                g.cross_entropy(r, 2)
            },
            sample(2, 4, 0.71),
        );
    }

    #[test]
    fn gather_slice_concat() {
        check(
            |g, p| {
                let e = g.gather(p, &[2, 0, 2]);
                let a = g.col_slice(e, 0, 2);
                let b = g.col_slice(e, 2, 1);
                let c = g.concat_cols(&[b, a]);
                let bias = g.constant(Matrix::filled(1, 3, 0.5));
                let c = g.add_row(c, bias);
                let c = g.scale(c, 0.7);
                let m = g.mul_const(c, sample(3, 3, 1.1));
                let r = g.select_rows(m, &[0]);
                g.cross_entropy(r, 0)
            },
            sample(4, 3, 0.53),
        );
    }
}
