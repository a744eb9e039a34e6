use log::{debug, info};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::LabeledCorpus;
use crate::fusion::FeatureParts;
use crate::tables::Tables;
use crate::Mode;

use super::model::TaggerModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub max_epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub dropout: f64,
    pub early_stop_patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 12,
            max_epochs: 60,
            learning_rate: 2e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            dropout: 0.4,
            early_stop_patience: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = self.batch_size > 0
            && self.max_epochs > 0
            && self.early_stop_patience > 0
            && self.learning_rate > 0.0
            && self.epsilon > 0.0;
        if !positive {
            return Err(Error::InvalidConfig(
                "batch size, epochs, patience, learning rate and epsilon must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::InvalidConfig("Adam betas must lie in [0, 1)".into()));
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

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean per-sentence negative log-likelihood over the epoch, with dropout.
    pub train_loss: f64,
    pub dev_loss: f64,
    pub improved: bool,
}

#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: i32,
}

impl Adam {
    pub fn new(num_params: usize, config: &TrainConfig) -> Self {
        Adam {
            lr: config.learning_rate,
            beta1: config.beta1,
            beta2: config.beta2,
            epsilon: config.epsilon,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            step: 0,
        }
    }

    /// One update of `model` along `grad` (a model of identical layout).
    pub fn step(&mut self, model: &mut TaggerModel, grad: &TaggerModel) {
        self.step += 1;
        let c1 = 1.0 - self.beta1.powi(self.step);
        let c2 = 1.0 - self.beta2.powi(self.step);
        let g = grad.flat_params();
        let mut i = 0;
        let (m, v) = (&mut self.m, &mut self.v);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.epsilon);
        model.visit_params_mut(|_, block| {
            for p in block.iter_mut() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                *p -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
                i += 1;
            }
        });
    }
}

/// Embedded and tag-encoded sentences.
pub struct Prepared {
    pub parts: Vec<FeatureParts>,
    pub tags: Vec<Vec<usize>>,
}

impl Prepared {
    pub fn new(model: &TaggerModel, corpus: &LabeledCorpus, tables: &Tables, mode: Mode) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let embedder = model.embedder(tables, mode);
        let mut parts = Vec::with_capacity(corpus.len());
        let mut tags = Vec::with_capacity(corpus.len());
        for s in corpus.iter() {
            tags.push(model.tags.encode(&s.tags)?);
            parts.push(embedder.parts(&s.chars)?);
        }
        Ok(Prepared { parts, tags })
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Mean negative log-likelihood without dropout.
    pub fn mean_loss(&self, model: &TaggerModel) -> Result<f64> {
        let mut total = 0.0;
        for (p, t) in self.parts.iter().zip(&self.tags) {
            total += model.loss(p, t)?;
        }
        let mean = total / self.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Numeric(format!("non-finite loss {mean}")));
        }
        Ok(mean)
    }
}

/// Trains `model` with Adam and early stopping on the dev loss. Returns the
/// snapshot with the lowest dev loss and the per-epoch log.
pub fn train(
    model: TaggerModel,
    tables: &Tables,
    train: &LabeledCorpus,
    dev: &LabeledCorpus,
    config: &TrainConfig,
) -> Result<(TaggerModel, Vec<EpochLog>)> {
    config.validate()?;
    let train_set = Prepared::new(&model, train, tables, Mode::Strict)?;
    let dev_set = Prepared::new(&model, dev, tables, Mode::Strict)?;
    train_prepared(model, &train_set, &dev_set, config)
}

pub fn train_prepared(
    mut model: TaggerModel,
    train_set: &Prepared,
    dev_set: &Prepared,
    config: &TrainConfig,
) -> Result<(TaggerModel, Vec<EpochLog>)> {
    config.validate()?;
    if train_set.is_empty() || dev_set.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    model.config.dropout = config.dropout;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut adam = Adam::new(model.num_params(), config);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut best = model.clone();
    let mut best_loss = f64::INFINITY;
    let mut stale = 0;
    let mut log = Vec::new();

    for epoch in 1..=config.max_epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grad = model.zeros_like();
            let mut batch_loss = 0.0;
            for &i in batch {
                batch_loss += model.loss_and_grad(
                    &train_set.parts[i],
                    &train_set.tags[i],
                    Some(&mut rng),
                    &mut grad,
                )?;
            }
            if !batch_loss.is_finite() {
                return Err(Error::Numeric(format!("non-finite loss in epoch {epoch}")));
            }
            let scale = 1.0 / batch.len() as f64;
            grad.visit_params_mut(|_, g| g.iter_mut().for_each(|v| *v *= scale));
            adam.step(&mut model, &grad);
            epoch_loss += batch_loss;
        }
        let train_loss = epoch_loss / train_set.len() as f64;
        let dev_loss = dev_set.mean_loss(&model)?;
        let improved = dev_loss < best_loss;
        if improved {
            best_loss = dev_loss;
            best = model.clone();
            stale = 0;
        } else {
            stale += 1;
        }
        debug!("epoch {epoch}: train {train_loss:.4} dev {dev_loss:.4}");
        log.push(EpochLog {
            epoch,
            train_loss,
            dev_loss,
            improved,
        });
        if stale >= config.early_stop_patience {
            info!("early stop after epoch {epoch}; best dev loss {best_loss:.4}");
            break;
        }
    }
    Ok((best, log))
}
