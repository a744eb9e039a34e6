//! Glyph, phonetic and semantic embeddings for Chinese characters, character
//! similarity search, substitution-based corpus augmentation and a
//! from-scratch BiLSTM-CRF named-entity tagger.

pub mod error;
pub mod augment;
pub mod cli;
pub mod evaluation;
pub mod experiments;
pub mod fusion;
pub mod glyph;
pub mod linalg;
pub mod phonetics;
pub mod similarity;
pub mod synth;
pub mod tables;
pub mod tagger;

pub use error::{Error, Result};
pub use fusion::{FeatureMask, FusionStrategy, StrategyKind};
pub use similarity::FeatureSpace;
pub use tables::Tables;

/// How lookups treat characters missing from a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Missing characters are an error.
    #[default]
    Strict,
    /// Missing characters encode as zero vectors.
    Lenient,
}
