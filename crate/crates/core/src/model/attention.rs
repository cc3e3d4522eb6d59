//! Multi-head attention with an optional visibility mask.
//!
//! For each head, scores are `(q_i · k_j) / √d_head` where position `j` is
//! visible from `i` and `delta` (a large negative constant) where it is not;
//! the softmax over a row then assigns numerically zero weight to invisible
//! positions. The mask term does not depend on the head.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::autograd::{Graph, Var};
use crate::error::{Error, Result};
use crate::semgraph::VisibilityMatrix;
use crate::tensor::Matrix;

/// Tape handles of one attention block's projections.
#[derive(Debug, Clone, Copy)]
pub struct AttentionVars {
    pub wq: Var,
    pub bq: Var,
    pub wk: Var,
    pub bk: Var,
    pub wv: Var,
    pub bv: Var,
    pub wo: Var,
    pub bo: Var,
}

/// Attends from `query` rows to `memory` rows.
///
/// `mask`, when given, is a binary `query_len × memory_len` matrix. Returns
/// the projected output and the per-head attention probabilities.
pub fn multi_head_attention(
    g: &mut Graph,
    query: Var,
    memory: Var,
    mask: Option<&Matrix>,
    vars: &AttentionVars,
    n_heads: usize,
    delta: f64,
) -> (Var, Vec<Var>) {
    let d = g.value(query).cols();
    let d_head = d / n_heads;
    let scale = 1.0 / (d_head as f64).sqrt();

    let q = g.matmul(query, vars.wq);
    let q = g.add_row(q, vars.bq);
    let k = g.matmul(memory, vars.wk);
    let k = g.add_row(k, vars.bk);
    let v = g.matmul(memory, vars.wv);
    let v = g.add_row(v, vars.bv);

    let mut heads = Vec::with_capacity(n_heads);
    let mut probs = Vec::with_capacity(n_heads);
    for h in 0..n_heads {
        let qh = g.col_slice(q, h * d_head, d_head);
        let kh = g.col_slice(k, h * d_head, d_head);
        let vh = g.col_slice(v, h * d_head, d_head);
        let scores = g.matmul_t(qh, kh);
        let mut scores = g.scale(scores, scale);
        if let Some(m) = mask {
            scores = g.mask_fill(scores, m.clone(), delta);
        }
        let p = g.softmax_rows(scores);
        heads.push(g.matmul(p, vh));
        probs.push(p);
    }
    let cat = g.concat_cols(&heads);
    let out = g.matmul(cat, vars.wo);
    let out = g.add_row(out, vars.bo);
    (out, probs)
}

/// Plain-matrix weights of one attention block (`d × d` projections and
/// `1 × d` biases).
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionWeights {
    pub wq: Matrix,
    pub bq: Matrix,
    pub wk: Matrix,
    pub bk: Matrix,
    pub wv: Matrix,
    pub bv: Matrix,
    pub wo: Matrix,
    pub bo: Matrix,
}

impl AttentionWeights {
    pub fn random(d: usize, std: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, std).expect("positive std");
        let mut m = |r: usize, c: usize| Matrix::from_vec(r, c, (0..r * c).map(|_| normal.sample(&mut rng)).collect());
        Self {
            wq: m(d, d),
            bq: m(1, d),
            wk: m(d, d),
            bk: m(1, d),
            wv: m(d, d),
            bv: m(1, d),
            wo: m(d, d),
            bo: m(1, d),
        }
    }

    pub fn register(&self, g: &mut Graph) -> AttentionVars {
        AttentionVars {
            wq: g.constant(self.wq.clone()),
            bq: g.constant(self.bq.clone()),
            wk: g.constant(self.wk.clone()),
            bk: g.constant(self.bk.clone()),
            wv: g.constant(self.wv.clone()),
            bv: g.constant(self.bv.clone()),
            wo: g.constant(self.wo.clone()),
            bo: g.constant(self.bo.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct AttentionOutput {
    /// `n × d` projected output.
    pub output: Matrix,
    /// Per-head `n × n` attention probabilities.
    pub weights: Vec<Matrix>,
}

/// Visibility-masked multi-head self-attention over `h` (`n × d`).
pub fn masked_self_attention(
    h: &Matrix,
    m: &VisibilityMatrix,
    weights: &AttentionWeights,
    n_heads: usize,
    delta: f64,
) -> Result<AttentionOutput> {
    let (n, d) = h.shape();
    if m.size() != n {
        return Err(Error::Contract(format!(
            "visibility matrix is {0}x{0} but the sequence has {n} rows",
            m.size()
        )));
    }
    if n_heads == 0 || d % n_heads != 0 {
        return Err(Error::Contract(format!(
            "{d} columns cannot split into {n_heads} heads"
        )));
    }
    if weights.wq.shape() != (d, d) {
        return Err(Error::Contract("projection shape does not match hidden size".into()));
    }
    let mut g = Graph::new();
    let x = g.constant(h.clone());
    let vars = weights.register(&mut g);
    let mask = m.to_matrix();
    let (out, probs) = multi_head_attention(&mut g, x, x, Some(&mask), &vars, n_heads, delta);
    Ok(AttentionOutput {
        output: g.value(out).clone(),
        weights: probs.iter().map(|&p| g.value(p).clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_visible_position_copies_its_value() {
        let d = 8;
        let n = 5;
        let w = AttentionWeights::random(d, 0.5, 7);
        let h = Matrix::from_vec(n, d, (0..n * d).map(|i| (i as f64 * 0.37).sin()).collect());
        let mut m = VisibilityMatrix::all_ones(n);
        for j in 0..n {
            if j != 2 {
                m.set(2, j, false);
                m.set(j, 2, false);
            }
        }
        let out = masked_self_attention(&h, &m, &w, 2, -1e9).unwrap();
        for p in &out.weights {
            assert_eq!(p[(2, 2)], 1.0);
        }
        // output row 2 = v_2 projected
        let v2 = h.select_rows(&[2]).matmul(&w.wv);
        let mut v2b = v2.clone();
        v2b.add_assign(&w.bv);
        let mut expected = v2b.matmul(&w.wo);
        expected.add_assign(&w.bo);
        let got = out.output.select_rows(&[2]);
        assert!(got.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_contract_violation() {
        let w = AttentionWeights::random(4, 0.1, 1);
        let h = Matrix::zeros(3, 4);
        assert!(matches!(
            masked_self_attention(&h, &VisibilityMatrix::all_ones(2), &w, 2, -1e9),
            Err(Error::Contract(_))
        ));
    }
}
