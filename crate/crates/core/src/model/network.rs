//! Encoder-decoder sentiment classifier over the semantic sequence.
//!
//! Post-LN transformer blocks. The encoder attends under the visibility
//! matrix; the decoder reads the prompt with causal self-attention and full
//! cross-attention, and the hidden state at `[mask]` is projected onto the
//! three sentiment classes.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::autograd::{Gradients, Graph, Var};
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::semgraph::{TokenRole, VisibilityMatrix};
use crate::tensor::{softmax, Matrix};

use super::attention::{multi_head_attention, AttentionVars};
use super::config::ModelConfig;
use super::input::PreparedInput;
use super::params::{Init, Initializer, ParamStore};
use super::vocab::Vocab;

#[derive(Debug, Clone, PartialEq)]
pub struct SentimentModel {
    pub config: ModelConfig,
    pub vocab: Vocab,
    pub params: ParamStore,
}

/// Result of one inference pass.
#[derive(Debug, Clone)]
pub struct ForwardOutput {
    pub logits: [f64; 3],
    pub probabilities: [f64; 3],
    /// Decoder cross-attention, `[layer][head]`, each `prompt_len × n`.
    /// Empty unless requested.
    pub cross_attention: Vec<Vec<Matrix>>,
}

impl ForwardOutput {
    pub fn predicted(&self) -> Label {
        let mut best = 0;
        for i in 1..3 {
            if self.probabilities[i] > self.probabilities[best] {
                best = i;
            }
        }
        Label::from_index(best).expect("three classes")
    }
}

/// Encoder input after the embedding sum, before the first layer norm.
#[derive(Debug, Clone)]
pub struct EmbeddedSequence {
    pub matrix: Matrix,
    pub is_image: Vec<bool>,
}

struct Pass<'a> {
    model: &'a SentimentModel,
    g: Graph,
    rng: Option<&'a mut ChaCha8Rng>,
}

impl<'a> Pass<'a> {
    fn p(&mut self, name: &str) -> Var {
        let id = self.model.params.expect(name);
        self.g.param(id, self.model.params.get(id))
    }

    fn attn(&mut self, prefix: &str) -> AttentionVars {
        AttentionVars {
            wq: self.p(&format!("{prefix}.wq")),
            bq: self.p(&format!("{prefix}.bq")),
            wk: self.p(&format!("{prefix}.wk")),
            bk: self.p(&format!("{prefix}.bk")),
            wv: self.p(&format!("{prefix}.wv")),
            bv: self.p(&format!("{prefix}.bv")),
            wo: self.p(&format!("{prefix}.wo")),
            bo: self.p(&format!("{prefix}.bo")),
        }
    }

    fn ln(&mut self, x: Var, prefix: &str) -> Var {
        let g = self.p(&format!("{prefix}.g"));
        let b = self.p(&format!("{prefix}.b"));
        self.g.layer_norm(x, g, b)
    }

    fn linear(&mut self, x: Var, prefix: &str) -> Var {
        let w = self.p(&format!("{prefix}.w"));
        let b = self.p(&format!("{prefix}.b"));
        let y = self.g.matmul(x, w);
        self.g.add_row(y, b)
    }

    fn dropout(&mut self, x: Var) -> Var {
        let p = self.model.config.dropout;
        let Some(rng) = self.rng.as_deref_mut() else {
            return x;
        };
        if p == 0.0 {
            return x;
        }
        let (r, c) = self.g.value(x).shape();
        let keep = 1.0 / (1.0 - p);
        let mask: Vec<f64> = (0..r * c)
            .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
            .collect();
        self.g.mul_const(x, Matrix::from_vec(r, c, mask))
    }

    fn feed_forward(&mut self, x: Var, prefix: &str) -> Var {
        let h = self.linear(x, &format!("{prefix}.ff1"));
        let h = self.g.gelu(h);
        let h = self.dropout(h);
        self.linear(h, &format!("{prefix}.ff2"))
    }

    fn embed(&mut self, input: &PreparedInput) -> Var {
        let cfg = &self.model.config;
        let seq = &input.sequence;
        let n = seq.len();
        let d = cfg.d_model;
        let ids = self.model.vocab.ids(seq.texts());
        let table = self.p("emb.token");
        let mut element = self.g.gather(table, &ids);

        if !input.image_features.is_empty() {
            let f = cfg.feature_dim;
            let mut text_mask = Matrix::filled(n, d, 1.0);
            let mut img_mask = Matrix::zeros(n, d);
            let mut feats = Matrix::zeros(n, f);
            for (pos, feature) in &input.image_features {
                text_mask.row_mut(*pos).fill(0.0);
                img_mask.row_mut(*pos).fill(1.0);
                feats.row_mut(*pos).copy_from_slice(feature);
            }
            element = self.g.mul_const(element, text_mask);
            let mut x = self.g.constant(feats);
            if !cfg.flags.freeze_image_encoder {
                x = self.linear(x, "img.adapter");
            }
            let proj = self.linear(x, "img.proj");
            let proj = self.g.mul_const(proj, img_mask);
            element = self.g.add(element, proj);
        }

        let type_ids: Vec<usize> = seq
            .tokens
            .iter()
            .map(|t| usize::from(t.role == TokenRole::SubImage))
            .collect();
        let type_table = self.p("emb.type");
        let typ = self.g.gather(type_table, &type_ids);
        let pos_table = self.p("enc.pos");
        let positions: Vec<usize> = (0..n).collect();
        let pos = self.g.gather(pos_table, &positions);
        let sum = self.g.add(element, typ);
        self.g.add(sum, pos)
    }

    fn encode(&mut self, input: &PreparedInput) -> Var {
        let cfg = self.model.config.clone();
        let n = input.sequence.len();
        let mask = if cfg.flags.use_visibility_matrix {
            input.visibility.to_matrix()
        } else {
            VisibilityMatrix::all_ones(n).to_matrix()
        };
        let e = self.embed(input);
        let e = self.ln(e, "enc.emb_ln");
        let mut x = self.dropout(e);
        for l in 0..cfg.n_layers_enc {
            let vars = self.attn(&format!("enc.{l}.self"));
            let (a, _) = multi_head_attention(&mut self.g, x, x, Some(&mask), &vars, cfg.n_heads, cfg.delta);
            let a = self.dropout(a);
            let r = self.g.add(x, a);
            x = self.ln(r, &format!("enc.{l}.ln1"));
            let f = self.feed_forward(x, &format!("enc.{l}"));
            let f = self.dropout(f);
            let r = self.g.add(x, f);
            x = self.ln(r, &format!("enc.{l}.ln2"));
        }
        x
    }

    fn decode(&mut self, memory: Var, input: &PreparedInput) -> (Var, Vec<Vec<Var>>) {
        let cfg = self.model.config.clone();
        let m = input.prompt.len();
        let ids = self.model.vocab.ids(input.prompt.iter().map(String::as_str));
        let table = self.p("emb.token");
        let tok = self.g.gather(table, &ids);
        let pos_table = self.p("dec.pos");
        let positions: Vec<usize> = (0..m).collect();
        let pos = self.g.gather(pos_table, &positions);
        let y = self.g.add(tok, pos);
        let y = self.ln(y, "dec.emb_ln");
        let mut y = self.dropout(y);
        let causal = VisibilityMatrix::causal(m).to_matrix();
        let mut cross = Vec::with_capacity(cfg.n_layers_dec);
        for l in 0..cfg.n_layers_dec {
            let vars = self.attn(&format!("dec.{l}.self"));
            let (a, _) = multi_head_attention(&mut self.g, y, y, Some(&causal), &vars, cfg.n_heads, cfg.delta);
            let a = self.dropout(a);
            let r = self.g.add(y, a);
            y = self.ln(r, &format!("dec.{l}.ln1"));
            let vars = self.attn(&format!("dec.{l}.cross"));
            let (c, probs) = multi_head_attention(&mut self.g, y, memory, None, &vars, cfg.n_heads, cfg.delta);
            cross.push(probs);
            let c = self.dropout(c);
            let r = self.g.add(y, c);
            y = self.ln(r, &format!("dec.{l}.ln2"));
            let f = self.feed_forward(y, &format!("dec.{l}"));
            let f = self.dropout(f);
            let r = self.g.add(y, f);
            y = self.ln(r, &format!("dec.{l}.ln3"));
        }
        (y, cross)
    }

    /// Logits (`1 × 3`) and per-layer cross-attention handles.
    fn logits(&mut self, input: &PreparedInput) -> (Var, Vec<Vec<Var>>) {
        let memory = self.encode(input);
        let (y, cross) = self.decode(memory, input);
        let h = self.g.select_rows(y, &[input.mask_position]);
        let h = self.dropout(h);
        let theta = self.p("head.theta");
        (self.g.matmul_t(h, theta), cross)
    }
}

impl SentimentModel {
    /// Randomly initialized model.
    pub fn new(config: ModelConfig, vocab: Vocab, seed: u64) -> Result<Self> {
        config.validate()?;
        let d = config.d_model;
        let mut init = Initializer::new(seed, config.init_std);
        let mut ps = ParamStore::new();
        let mut add = |ps: &mut ParamStore, name: String, r: usize, c: usize, how: Init| {
            let m = init.make(r, c, how);
            ps.insert(name, m);
        };
        add(&mut ps, "emb.token".into(), vocab.len(), d, Init::Normal);
        add(&mut ps, "emb.type".into(), 2, d, Init::Normal);
        add(&mut ps, "enc.pos".into(), config.n_max, d, Init::Normal);
        if !config.flags.freeze_image_encoder {
            let f = config.feature_dim;
            add(&mut ps, "img.adapter.w".into(), f, f, Init::Identity);
            add(&mut ps, "img.adapter.b".into(), 1, f, Init::Zeros);
        }
        add(&mut ps, "img.proj.w".into(), config.feature_dim, d, Init::Normal);
        add(&mut ps, "img.proj.b".into(), 1, d, Init::Zeros);
        let ln = |ps: &mut ParamStore, add: &mut dyn FnMut(&mut ParamStore, String, usize, usize, Init), p: String| {
            add(ps, format!("{p}.g"), 1, d, Init::Ones);
            add(ps, format!("{p}.b"), 1, d, Init::Zeros);
        };
        let attn =
            |ps: &mut ParamStore, add: &mut dyn FnMut(&mut ParamStore, String, usize, usize, Init), p: String| {
                for w in ["q", "k", "v", "o"] {
                    add(ps, format!("{p}.w{w}"), d, d, Init::Normal);
                    add(ps, format!("{p}.b{w}"), 1, d, Init::Zeros);
                }
            };
        let ff = |ps: &mut ParamStore, add: &mut dyn FnMut(&mut ParamStore, String, usize, usize, Init), p: String| {
            add(ps, format!("{p}.ff1.w"), d, config.d_ff, Init::Normal);
            add(ps, format!("{p}.ff1.b"), 1, config.d_ff, Init::Zeros);
            add(ps, format!("{p}.ff2.w"), config.d_ff, d, Init::Normal);
            add(ps, format!("{p}.ff2.b"), 1, d, Init::Zeros);
        };
        ln(&mut ps, &mut add, "enc.emb_ln".into());
        for l in 0..config.n_layers_enc {
            attn(&mut ps, &mut add, format!("enc.{l}.self"));
            ln(&mut ps, &mut add, format!("enc.{l}.ln1"));
            ff(&mut ps, &mut add, format!("enc.{l}"));
            ln(&mut ps, &mut add, format!("enc.{l}.ln2"));
        }
        add(&mut ps, "dec.pos".into(), config.n_max_prompt, d, Init::Normal);
        ln(&mut ps, &mut add, "dec.emb_ln".into());
        for l in 0..config.n_layers_dec {
            attn(&mut ps, &mut add, format!("dec.{l}.self"));
            ln(&mut ps, &mut add, format!("dec.{l}.ln1"));
            attn(&mut ps, &mut add, format!("dec.{l}.cross"));
            ln(&mut ps, &mut add, format!("dec.{l}.ln2"));
            ff(&mut ps, &mut add, format!("dec.{l}"));
            ln(&mut ps, &mut add, format!("dec.{l}.ln3"));
        }
        add(&mut ps, "head.theta".into(), config.label_count, d, Init::Normal);
        Ok(Self {
            config,
            vocab,
            params: ps,
        })
    }

    fn check_input(&self, input: &PreparedInput) -> Result<()> {
        let n = input.sequence.len();
        if n == 0 || n > self.config.n_max {
            return Err(Error::Capacity {
                required: n,
                n_max: self.config.n_max,
            });
        }
        if input.visibility.size() != n {
            return Err(Error::Contract(format!(
                "visibility matrix size {} does not match sequence length {n}",
                input.visibility.size()
            )));
        }
        if input.prompt.is_empty() || input.prompt.len() > self.config.n_max_prompt {
            return Err(Error::Contract(format!(
                "prompt length {} outside 1..={}",
                input.prompt.len(),
                self.config.n_max_prompt
            )));
        }
        if input.mask_position >= input.prompt.len() {
            return Err(Error::Contract("mask position outside the prompt".into()));
        }
        for (pos, f) in &input.image_features {
            if *pos >= n || f.len() != self.config.feature_dim {
                return Err(Error::Contract(format!(
                    "bad region feature at position {pos} (dim {})",
                    f.len()
                )));
            }
        }
        Ok(())
    }

    /// Trainable-parameter ids. The frozen image encoder has no parameters
    /// here at all, so everything in the store is trainable.
    pub fn trainable(&self) -> Vec<usize> {
        (0..self.params.len()).collect()
    }

    /// Embedding sum of the encoder input (element + type + position).
    pub fn embed(&self, input: &PreparedInput) -> Result<EmbeddedSequence> {
        self.check_input(input)?;
        let mut pass = self.pass(None);
        let e = pass.embed(input);
        let mut is_image = vec![false; input.sequence.len()];
        for (pos, _) in &input.image_features {
            is_image[*pos] = true;
        }
        Ok(EmbeddedSequence {
            matrix: pass.g.value(e).clone(),
            is_image,
        })
    }

    /// Final encoder hidden states (`n × d`).
    pub fn encode(&self, input: &PreparedInput) -> Result<Matrix> {
        self.check_input(input)?;
        let mut pass = self.pass(None);
        let h = pass.encode(input);
        Ok(pass.g.value(h).clone())
    }

    fn pass<'a>(&'a self, rng: Option<&'a mut ChaCha8Rng>) -> Pass<'a> {
        Pass {
            model: self,
            g: Graph::new(),
            rng,
        }
    }

    /// Inference pass without dropout.
    pub fn forward(&self, input: &PreparedInput, keep_attention: bool) -> Result<ForwardOutput> {
        self.check_input(input)?;
        let mut pass = self.pass(None);
        let (logits, cross) = pass.logits(input);
        let l = pass.g.value(logits).as_slice();
        let logits = [l[0], l[1], l[2]];
        let p = softmax(&logits);
        let cross_attention = if keep_attention {
            cross
                .iter()
                .map(|heads| heads.iter().map(|&h| pass.g.value(h).clone()).collect())
                .collect()
        } else {
            Vec::new()
        };
        Ok(ForwardOutput {
            logits,
            probabilities: [p[0], p[1], p[2]],
            cross_attention,
        })
    }

    /// Cross-entropy loss, class probabilities and parameter gradients for
    /// one labelled input. Dropout is active when `rng` is given.
    pub fn loss_and_gradients(
        &self,
        input: &PreparedInput,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(f64, [f64; 3], Gradients)> {
        self.check_input(input)?;
        let label = input
            .label
            .ok_or_else(|| Error::Contract(format!("sample {} has no label", input.sample_id)))?;
        let mut pass = self.pass(rng);
        let (logits, _) = pass.logits(input);
        let p = softmax(pass.g.value(logits).as_slice());
        let loss = pass.g.cross_entropy(logits, label.index());
        let value = pass.g.value(loss).value();
        Ok((value, [p[0], p[1], p[2]], pass.g.backward(loss)))
    }

    /// Loss without gradients or dropout.
    pub fn loss(&self, input: &PreparedInput) -> Result<f64> {
        let label = input
            .label
            .ok_or_else(|| Error::Contract(format!("sample {} has no label", input.sample_id)))?;
        let out = self.forward(input, false)?;
        Ok(-out.probabilities[label.index()].ln())
    }

    /// Order-preserving parallel inference.
    pub fn predict_batch(&self, inputs: &[PreparedInput]) -> Result<Vec<ForwardOutput>> {
        inputs.par_iter().map(|i| self.forward(i, false)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semgraph::{special, SemanticSequence, Token};

    fn toy_input() -> PreparedInput {
        let tokens: Vec<Token> = [special::BOS, "hello", "world", special::SEP]
            .iter()
            .map(|t| Token::special(t))
            .collect();
        let sequence = SemanticSequence { tokens };
        PreparedInput {
            sample_id: "s".into(),
            visibility: VisibilityMatrix::all_ones(4),
            sequence,
            image_features: Vec::new(),
            prompt: vec!["hello".into(), "is".into(), "[mask]".into(), ".".into()],
            mask_position: 2,
            label: Some(Label::Positive),
        }
    }

    #[test]
    fn forward_gives_distribution() {
        let m = SentimentModel::new(ModelConfig::tiny(4), Vocab::reserved_only(), 3).unwrap();
        let out = m.forward(&toy_input(), true).unwrap();
        let s: f64 = out.probabilities.iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert_eq!(out.cross_attention.len(), 2);
        assert_eq!(out.cross_attention[0][0].shape(), (4, 4));
    }

    #[test]
    fn loss_matches_forward() {
        let m = SentimentModel::new(ModelConfig::tiny(4), Vocab::reserved_only(), 3).unwrap();
        let input = toy_input();
        let (l, _, grads) = m.loss_and_gradients(&input, None).unwrap();
        assert!((l - m.loss(&input).unwrap()).abs() < 1e-12);
        assert!(grads.global_norm() > 0.0);
    }

    #[test]
    fn adapter_only_without_freeze() {
        let mut c = ModelConfig::tiny(4);
        let m = SentimentModel::new(c.clone(), Vocab::reserved_only(), 1).unwrap();
        assert!(m.params.id("img.adapter.w").is_none());
        c.flags.freeze_image_encoder = false;
        let m = SentimentModel::new(c, Vocab::reserved_only(), 1).unwrap();
        assert_eq!(m.params.by_name("img.adapter.w").unwrap(), &Matrix::identity(4));
    }
}
