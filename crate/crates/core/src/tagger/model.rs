use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fusion::{Embedder, FeatureMask, FeatureParts, FusedSequence, FusionStrategy, StrategyKind};
use crate::fusion::GLYPH_PHONETIC_DIM;
use crate::glyph::GLYPH_DIM;
use crate::linalg::{Linear, Matrix};
use crate::phonetics::PHONETIC_DIM;
use crate::tables::Tables;
use crate::Mode;

use super::crf::CrfParams;
use super::lstm::{BiLstm, BiLstmCache};
use super::tagset::TagSet;

/// Architecture of a [`TaggerModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub strategy: StrategyKind,
    pub semantic_dim: usize,
    /// Per direction; the BiLSTM output is twice this wide.
    pub hidden: usize,
    /// Output width of the ConcatLinear map. Defaults to `semantic_dim + 64`.
    pub fusion_dim: Option<usize>,
    pub features: FeatureMask,
    pub dropout: f64,
}

impl ModelConfig {
    pub fn new(strategy: StrategyKind, semantic_dim: usize) -> Self {
        ModelConfig {
            strategy,
            semantic_dim,
            hidden: 100,
            fusion_dim: None,
            features: FeatureMask::ALL,
            dropout: 0.4,
        }
    }

    pub fn with_hidden(mut self, hidden: usize) -> Self {
        self.hidden = hidden;
        self
    }

    pub fn with_features(mut self, features: FeatureMask) -> Self {
        self.features = features;
        self
    }

    pub fn with_dropout(mut self, dropout: f64) -> Self {
        self.dropout = dropout;
        self
    }

    fn concat_dim(&self) -> usize {
        self.semantic_dim + GLYPH_PHONETIC_DIM
    }

    fn fusion_out(&self) -> usize {
        self.fusion_dim.unwrap_or(self.concat_dim())
    }

    /// Input width of each recurrent branch.
    fn branch_inputs(&self) -> Vec<usize> {
        match self.strategy {
            StrategyKind::Concat => vec![self.concat_dim()],
            StrategyKind::ConcatLinear => vec![self.fusion_out()],
            StrategyKind::MultiBranch => vec![self.semantic_dim, GLYPH_DIM, PHONETIC_DIM],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.semantic_dim == 0 || self.fusion_dim == Some(0) {
            return Err(Error::InvalidConfig("dimensions must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        Ok(())
    }
}

/// One BiLSTM with its projection to tag scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub lstm: BiLstm,
    pub projection: Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    pub config: ModelConfig,
    pub tags: TagSet,
    /// Present for ConcatLinear.
    pub fusion: Option<Linear>,
    /// One branch, or three (semantic, glyph, phonetic) for MultiBranch.
    pub branches: Vec<Branch>,
    /// Present for MultiBranch: maps the stacked `3T` branch scores to `T`.
    pub combiner: Option<Linear>,
    pub crf: CrfParams,
}

struct BranchCache {
    input_mask: Option<Matrix>,
    lstm: BiLstmCache,
    hidden: Matrix,
    hidden_mask: Option<Matrix>,
}

struct ForwardCache {
    concat: Option<Matrix>,
    branches: Vec<BranchCache>,
    stacked: Option<Matrix>,
}

fn dropout_mask(rows: usize, cols: usize, p: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let keep = 1.0 / (1.0 - p);
    let data = (0..rows * cols)
        .map(|_| if rng.random::<f64>() < p { 0.0 } else { keep })
        .collect();
    Matrix::from_vec(rows, cols, data)
}

impl TaggerModel {
    pub fn new(config: ModelConfig, tags: TagSet, rng: &mut ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        let t = tags.len();
        let fusion = (config.strategy == StrategyKind::ConcatLinear)
            .then(|| Linear::init(config.concat_dim(), config.fusion_out(), rng));
        let branches = config
            .branch_inputs()
            .into_iter()
            .map(|d| Branch {
                lstm: BiLstm::init(d, config.hidden, rng),
                projection: Linear::init(2 * config.hidden, t, rng),
            })
            .collect();
        let combiner = (config.strategy == StrategyKind::MultiBranch).then(|| {
            let mut c = Linear::zeros(3 * t, t);
            for y in 0..t {
                for b in 0..3 {
                    c.weight[(y, b * t + y)] = 1.0 / 3.0;
                }
            }
            c
        });
        Ok(TaggerModel {
            config,
            tags,
            fusion,
            branches,
            combiner,
            crf: CrfParams::zeros(t),
        })
    }

    /// Same shapes, every parameter zero. Used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        let t = self.tags.len();
        TaggerModel {
            config: self.config.clone(),
            tags: self.tags.clone(),
            fusion: self
                .fusion
                .as_ref()
                .map(|l| Linear::zeros(l.in_dim(), l.out_dim())),
            branches: self
                .branches
                .iter()
                .map(|b| Branch {
                    lstm: BiLstm::zeros(b.lstm.input_dim(), b.lstm.hidden()),
                    projection: Linear::zeros(b.projection.in_dim(), t),
                })
                .collect(),
            combiner: self
                .combiner
                .as_ref()
                .map(|l| Linear::zeros(l.in_dim(), l.out_dim())),
            crf: CrfParams::zeros(t),
        }
    }

    pub fn strategy(&self) -> StrategyKind {
        self.config.strategy
    }

    /// The fusion strategy matching this model, for building a
    /// [`FusedSequence`] outside the tagger.
    pub fn fusion_strategy(&self) -> FusionStrategy {
        match (&self.config.strategy, &self.fusion) {
            (StrategyKind::ConcatLinear, Some(l)) => FusionStrategy::ConcatLinear(l.clone()),
            (StrategyKind::MultiBranch, _) => FusionStrategy::MultiBranch,
            _ => FusionStrategy::Concat,
        }
    }

    pub fn embedder<'a>(&self, tables: &'a Tables, mode: Mode) -> Embedder<'a> {
        Embedder::new(tables, mode).with_mask(self.config.features)
    }

    /// Visits every parameter block in a fixed order with its name and
    /// (rows, cols) shape.
    pub fn visit_params(&self, mut f: impl FnMut(&str, (usize, usize), &[f64])) {
        fn linear(name: &str, l: &Linear, f: &mut impl FnMut(&str, (usize, usize), &[f64])) {
            f(&format!("{name}.weight"), l.weight.shape(), l.weight.as_slice());
            f(&format!("{name}.bias"), (1, l.bias.len()), &l.bias);
        }
        if let Some(l) = &self.fusion {
            linear("fusion", l, &mut f);
        }
        for (i, b) in self.branches.iter().enumerate() {
            for (dir, d) in [("fwd", &b.lstm.forward), ("bwd", &b.lstm.backward)] {
                f(&format!("branch{i}.{dir}.w_ih"), d.w_ih.shape(), d.w_ih.as_slice());
                f(&format!("branch{i}.{dir}.w_hh"), d.w_hh.shape(), d.w_hh.as_slice());
                f(&format!("branch{i}.{dir}.bias"), (1, d.bias.len()), &d.bias);
            }
            linear(&format!("branch{i}.projection"), &b.projection, &mut f);
        }
        if let Some(l) = &self.combiner {
            linear("combiner", l, &mut f);
        }
        let c = &self.crf;
        f("crf.transitions", c.transitions.shape(), c.transitions.as_slice());
        f("crf.start", (1, c.start.len()), &c.start);
        f("crf.end", (1, c.end.len()), &c.end);
    }

    /// Mutable counterpart of [`visit_params`](Self::visit_params), same order.
    pub fn visit_params_mut(&mut self, mut f: impl FnMut(&str, &mut [f64])) {
        fn linear(name: &str, l: &mut Linear, f: &mut impl FnMut(&str, &mut [f64])) {
            f(&format!("{name}.weight"), l.weight.as_mut_slice());
            f(&format!("{name}.bias"), &mut l.bias);
        }
        if let Some(l) = &mut self.fusion {
            linear("fusion", l, &mut f);
        }
        for (i, b) in self.branches.iter_mut().enumerate() {
            for (dir, d) in [("fwd", &mut b.lstm.forward), ("bwd", &mut b.lstm.backward)] {
                f(&format!("branch{i}.{dir}.w_ih"), d.w_ih.as_mut_slice());
                f(&format!("branch{i}.{dir}.w_hh"), d.w_hh.as_mut_slice());
                f(&format!("branch{i}.{dir}.bias"), &mut d.bias);
            }
            linear(&format!("branch{i}.projection"), &mut b.projection, &mut f);
        }
        if let Some(l) = &mut self.combiner {
            linear("combiner", l, &mut f);
        }
        let c = &mut self.crf;
        f("crf.transitions", c.transitions.as_mut_slice());
        f("crf.start", &mut c.start);
        f("crf.end", &mut c.end);
    }

    pub fn num_params(&self) -> usize {
        let mut n = 0;
        self.visit_params(|_, _, p| n += p.len());
        n
    }

    /// All parameters in visiting order.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        self.visit_params(|_, _, p| out.extend_from_slice(p));
        out
    }

    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_params() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for {} parameters",
                values.len(),
                self.num_params()
            )));
        }
        let mut offset = 0;
        self.visit_params_mut(|_, p| {
            p.copy_from_slice(&values[offset..offset + p.len()]);
            offset += p.len();
        });
        Ok(())
    }

    fn check_parts(&self, parts: &FeatureParts) -> Result<()> {
        if parts.is_empty() {
            return Err(Error::EmptySentence);
        }
        if parts.semantic_dim() != self.config.semantic_dim {
            return Err(Error::ShapeMismatch(format!(
                "model expects {}-d semantic vectors, got {}",
                self.config.semantic_dim,
                parts.semantic_dim()
            )));
        }
        Ok(())
    }

    fn check_sequence(&self, seq: &FusedSequence) -> Result<()> {
        if seq.strategy != self.config.strategy {
            return Err(Error::StrategyMismatch {
                expected: self.config.strategy.to_string(),
                found: seq.strategy.to_string(),
            });
        }
        self.check_parts(&seq.parts)
    }

    fn forward(
        &self,
        parts: &FeatureParts,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(Matrix, ForwardCache)> {
        self.check_parts(parts)?;
        let p = self.config.dropout;
        let mut concat = None;
        let inputs: Vec<Matrix> = match self.config.strategy {
            StrategyKind::Concat => vec![parts.concat()],
            StrategyKind::ConcatLinear => {
                let x = parts.concat();
                let layer = self.fusion.as_ref().expect("ConcatLinear model has a fusion layer");
                let y = layer.forward(&x);
                concat = Some(x);
                vec![y]
            }
            StrategyKind::MultiBranch => parts.blocks().into_iter().cloned().collect(),
        };
        let mut caches = Vec::with_capacity(inputs.len());
        let mut scores = Vec::with_capacity(inputs.len());
        for (branch, mut x) in self.branches.iter().zip(inputs) {
            let input_mask = match rng.as_deref_mut() {
                Some(r) if p > 0.0 => {
                    let m = dropout_mask(x.rows(), x.cols(), p, r);
                    x.hadamard_assign(&m);
                    Some(m)
                }
                _ => None,
            };
            let (mut h, lstm_cache) = branch.lstm.forward(&x)?;
            let hidden_mask = match rng.as_deref_mut() {
                Some(r) if p > 0.0 => {
                    let m = dropout_mask(h.rows(), h.cols(), p, r);
                    h.hadamard_assign(&m);
                    Some(m)
                }
                _ => None,
            };
            scores.push(branch.projection.forward(&h));
            caches.push(BranchCache {
                input_mask,
                lstm: lstm_cache,
                hidden: h,
                hidden_mask,
            });
        }
        let (emissions, stacked) = match &self.combiner {
            Some(c) => {
                let stacked = Matrix::hstack(&scores.iter().collect::<Vec<_>>());
                (c.forward(&stacked), Some(stacked))
            }
            None => (scores.pop().expect("one branch"), None),
        };
        Ok((
            emissions,
            ForwardCache {
                concat,
                branches: caches,
                stacked,
            },
        ))
    }

    fn backward(&self, cache: &ForwardCache, d_emissions: &Matrix, grad: &mut TaggerModel) {
        let t = self.tags.len();
        let d_scores: Vec<Matrix> = match (&self.combiner, &cache.stacked) {
            (Some(c), Some(stacked)) => {
                let d = c.backward(stacked, d_emissions, grad.combiner.as_mut().expect("combiner"));
                (0..self.branches.len())
                    .map(|b| d.columns(b * t, (b + 1) * t))
                    .collect()
            }
            _ => vec![d_emissions.clone()],
        };
        for (i, (branch, bc)) in self.branches.iter().zip(&cache.branches).enumerate() {
            let g = &mut grad.branches[i];
            let mut d_h = branch.projection.backward(&bc.hidden, &d_scores[i], &mut g.projection);
            if let Some(m) = &bc.hidden_mask {
                d_h.hadamard_assign(m);
            }
            let mut d_x = branch.lstm.backward(&bc.lstm, &d_h, &mut g.lstm);
            if let (Some(layer), Some(x)) = (&self.fusion, &cache.concat) {
                if let Some(m) = &bc.input_mask {
                    d_x.hadamard_assign(m);
                }
                layer.backward(x, &d_x, grad.fusion.as_mut().expect("fusion"));
            }
        }
    }

    /// Per-character tag scores (n × T). Dropout is applied only when
    /// `rng` is given.
    pub fn emissions(&self, seq: &FusedSequence, rng: Option<&mut ChaCha8Rng>) -> Result<Matrix> {
        self.check_sequence(seq)?;
        Ok(self.forward(&seq.parts, rng)?.0)
    }

    pub fn emissions_from_parts(
        &self,
        parts: &FeatureParts,
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<Matrix> {
        Ok(self.forward(parts, rng)?.0)
    }

    /// Negative log-likelihood of `tags`, with its gradient added to `grad`.
    pub fn loss_and_grad(
        &self,
        parts: &FeatureParts,
        tags: &[usize],
        rng: Option<&mut ChaCha8Rng>,
        grad: &mut TaggerModel,
    ) -> Result<f64> {
        let (emissions, cache) = self.forward(parts, rng)?;
        let (nll, d_e) = self.crf.nll_backward(&emissions, tags, &mut grad.crf)?;
        self.backward(&cache, &d_e, grad);
        Ok(nll)
    }

    /// Negative log-likelihood without dropout or gradients.
    pub fn loss(&self, parts: &FeatureParts, tags: &[usize]) -> Result<f64> {
        let e = self.forward(parts, None)?.0;
        Ok(-self.crf.log_likelihood(&e, tags)?)
    }

    pub fn decode_parts(&self, parts: &FeatureParts) -> Result<Vec<usize>> {
        let e = self.forward(parts, None)?.0;
        Ok(self.crf.viterbi_decode(&e)?.0)
    }

    pub fn decode(&self, seq: &FusedSequence) -> Result<Vec<usize>> {
        self.check_sequence(seq)?;
        self.decode_parts(&seq.parts)
    }

    /// Tags one sentence.
    pub fn predict(&self, sentence: &[char], tables: &Tables, mode: Mode) -> Result<Vec<String>> {
        let parts = self.embedder(tables, mode).parts(sentence)?;
        Ok(self.tags.decode(&self.decode_parts(&parts)?))
    }
}
