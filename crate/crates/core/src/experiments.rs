//! Desk-scale experiments on the synthetic corpus: substitution robustness
//! of fused versus semantic-only embeddings, and a comparison of the three
//! fusion strategies.

use std::fmt::Write as _;

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::augment::{substitute_corpus, AugmentConfig};
use crate::error::Result;
use crate::evaluation::{micro_metrics, LabeledCorpus, Metrics};
use crate::fusion::{FeatureMask, StrategyKind};
use crate::similarity::FeatureSpace;
use crate::synth::{split, Synthesizer};
use crate::tables::Tables;
use crate::tagger::train::{train_prepared, Prepared};
use crate::tagger::{ModelConfig, TagSet, TaggerModel, TrainConfig};
use crate::Mode;

/// Tags every sentence of `corpus` and scores the result.
pub fn evaluate(model: &TaggerModel, corpus: &LabeledCorpus, tables: &Tables) -> Result<Metrics> {
    let embedder = model.embedder(tables, Mode::Strict);
    let mut predicted = Vec::with_capacity(corpus.len());
    for s in corpus.iter() {
        let parts = embedder.parts(&s.chars)?;
        predicted.push(model.tags.decode(&model.decode_parts(&parts)?));
    }
    micro_metrics(corpus, &predicted)
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub sentences: usize,
    pub dev: usize,
    pub test: usize,
    /// Replacement probability for the substituted test set.
    pub substitution_probability: f64,
    pub hidden: usize,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            sentences: 1000,
            dev: 100,
            test: 200,
            substitution_probability: 0.5,
            hidden: 100,
            train: TrainConfig::default(),
        }
    }
}

/// The clean splits plus a substituted copy of the test split.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub train: LabeledCorpus,
    pub dev: LabeledCorpus,
    pub test: LabeledCorpus,
    pub substituted: LabeledCorpus,
}

impl ExperimentData {
    pub fn build(tables: &Tables, config: &ExperimentConfig, seed: u64) -> Result<Self> {
        let corpus = Synthesizer::bundled().generate(config.sentences, seed);
        let (train, dev, test) = split(&corpus, config.dev, config.test)?;
        let augment = AugmentConfig {
            spaces: vec![FeatureSpace::Glyph, FeatureSpace::Phonetic],
            probability: config.substitution_probability,
            seed,
            ..AugmentConfig::default()
        };
        let substituted = substitute_corpus(&test, &tables.inventory()?, tables, &augment)?.corpus;
        Ok(ExperimentData {
            train,
            dev,
            test,
            substituted,
        })
    }
}

fn fit(
    tables: &Tables,
    data: &ExperimentData,
    config: &ExperimentConfig,
    strategy: StrategyKind,
    features: FeatureMask,
    seed: u64,
) -> Result<(TaggerModel, usize)> {
    let tags = TagSet::from_entity_types(Synthesizer::bundled().entity_types());
    let model_config = ModelConfig::new(strategy, tables.semantic_dim())
        .with_hidden(config.hidden)
        .with_features(features)
        .with_dropout(config.train.dropout);
    let model = TaggerModel::new(model_config, tags, &mut ChaCha8Rng::seed_from_u64(seed))?;
    let train_set = Prepared::new(&model, &data.train, tables, Mode::Strict)?;
    let dev_set = Prepared::new(&model, &data.dev, tables, Mode::Strict)?;
    let train_config = config.train.clone().with_seed(seed);
    let (model, log) = train_prepared(model, &train_set, &dev_set, &train_config)?;
    Ok((model, log.len()))
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessTrial {
    pub seed: u64,
    /// Scores on the substituted test set.
    pub semantic: Metrics,
    pub fused: Metrics,
    pub semantic_epochs: usize,
    pub fused_epochs: usize,
}

impl RobustnessTrial {
    pub fn fused_recall_higher(&self) -> bool {
        self.fused.recall > self.semantic.recall
    }
}

/// Trains a semantic-only and a fully fused Concat model with the same seed
/// and architecture, then scores both on the substituted test set.
pub fn robustness_trial(tables: &Tables, config: &ExperimentConfig, seed: u64) -> Result<RobustnessTrial> {
    let data = ExperimentData::build(tables, config, seed)?;
    let (semantic_model, semantic_epochs) = fit(
        tables,
        &data,
        config,
        StrategyKind::Concat,
        FeatureMask::SEMANTIC_ONLY,
        seed,
    )?;
    let semantic = evaluate(&semantic_model, &data.substituted, tables)?;
    let (fused_model, fused_epochs) =
        fit(tables, &data, config, StrategyKind::Concat, FeatureMask::ALL, seed)?;
    let fused = evaluate(&fused_model, &data.substituted, tables)?;
    info!(
        "seed {seed}: semantic recall {:.4}, fused recall {:.4}",
        semantic.recall, fused.recall
    );
    Ok(RobustnessTrial {
        seed,
        semantic,
        fused,
        semantic_epochs,
        fused_epochs,
    })
}

pub fn robustness_tsv(trials: &[RobustnessTrial]) -> String {
    let mut out = String::from("seed\tsemantic_recall\tfused_recall\tsemantic_f1\tfused_f1\n");
    for t in trials {
        let _ = writeln!(
            out,
            "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            t.seed, t.semantic.recall, t.fused.recall, t.semantic.f1, t.fused.f1
        );
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct StrategyResult {
    pub strategy: StrategyKind,
    pub clean: Metrics,
    pub substituted: Metrics,
}

fn strategy_label(s: StrategyKind) -> &'static str {
    match s {
        StrategyKind::Concat => "Concat",
        StrategyKind::ConcatLinear => "Concat+Linear",
        StrategyKind::MultiBranch => "Multiple LSTMs",
    }
}

/// Trains every fusion strategy on the same data and seed.
pub fn compare_strategies(tables: &Tables, config: &ExperimentConfig, seed: u64) -> Result<Vec<StrategyResult>> {
    let data = ExperimentData::build(tables, config, seed)?;
    let mut out = Vec::new();
    for strategy in StrategyKind::ALL {
        let (model, _) = fit(tables, &data, config, strategy, FeatureMask::ALL, seed)?;
        out.push(StrategyResult {
            strategy,
            clean: evaluate(&model, &data.test, tables)?,
            substituted: evaluate(&model, &data.substituted, tables)?,
        });
    }
    Ok(out)
}

/// F1 (in percent) per strategy and test set, one row per strategy.
pub fn strategy_table(results: &[StrategyResult]) -> String {
    let mut out = String::from("Strategy\tSynthetic\tSubstitution\n");
    for r in results {
        let _ = writeln!(
            out,
            "{}\t{:.2}\t{:.2}",
            strategy_label(r.strategy),
            100.0 * r.clean.f1,
            100.0 * r.substituted.f1
        );
    }
    out
}
