//! Per-sentence fused embeddings.
//!
//! Every character contributes three blocks: semantic (`d_s`), glyph (25)
//! and phonetic (39). `Concat` lays them side by side in that order,
//! `ConcatLinear` applies an affine map to the concatenation, and
//! `MultiBranch` keeps the blocks apart for the tagger's per-feature
//! recurrent branches.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glyph::{encode_glyph, GLYPH_DIM};
use crate::linalg::{Linear, Matrix};
use crate::phonetics::PHONETIC_DIM;
use crate::tables::Tables;
use crate::Mode;

/// Width of the glyph and phonetic blocks together.
pub const GLYPH_PHONETIC_DIM: usize = GLYPH_DIM + PHONETIC_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Concat,
    ConcatLinear,
    MultiBranch,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::Concat,
        StrategyKind::ConcatLinear,
        StrategyKind::MultiBranch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Concat => "concat",
            StrategyKind::ConcatLinear => "concat-linear",
            StrategyKind::MultiBranch => "multi-lstm",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concat" => Ok(StrategyKind::Concat),
            "concat-linear" | "concat+linear" => Ok(StrategyKind::ConcatLinear),
            "multi-lstm" | "multi-branch" => Ok(StrategyKind::MultiBranch),
            other => Err(Error::InvalidConfig(format!("unknown strategy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FusionStrategy {
    Concat,
    /// Affine map from `d_s + 64` to `out_dim` applied to each concatenated row.
    ConcatLinear(Linear),
    MultiBranch,
}

impl FusionStrategy {
    pub fn kind(&self) -> StrategyKind {
        match self {
            FusionStrategy::Concat => StrategyKind::Concat,
            FusionStrategy::ConcatLinear(_) => StrategyKind::ConcatLinear,
            FusionStrategy::MultiBranch => StrategyKind::MultiBranch,
        }
    }

    /// ConcatLinear with weights and bias uniform in `±1/sqrt(fan_in)`.
    pub fn concat_linear<R: Rng>(semantic_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        FusionStrategy::ConcatLinear(Linear::init(
            semantic_dim + GLYPH_PHONETIC_DIM,
            out_dim,
            rng,
        ))
    }

    /// ConcatLinear whose map copies the first `min(in, out)` inputs.
    pub fn identity_linear(semantic_dim: usize, out_dim: usize) -> Self {
        let in_dim = semantic_dim + GLYPH_PHONETIC_DIM;
        let mut layer = Linear::zeros(in_dim, out_dim);
        for i in 0..in_dim.min(out_dim) {
            layer.weight[(i, i)] = 1.0;
        }
        FusionStrategy::ConcatLinear(layer)
    }
}

/// Which feature blocks are fed to the model; disabled blocks are zeroed.
/// Used to train the semantic-only baseline on an identical architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMask {
    pub semantic: bool,
    pub glyph: bool,
    pub phonetic: bool,
}

impl Default for FeatureMask {
    fn default() -> Self {
        FeatureMask::ALL
    }
}

impl FeatureMask {
    pub const ALL: FeatureMask = FeatureMask {
        semantic: true,
        glyph: true,
        phonetic: true,
    };

    pub const SEMANTIC_ONLY: FeatureMask = FeatureMask {
        semantic: true,
        glyph: false,
        phonetic: false,
    };
}

/// The three per-character blocks of a sentence, one row per character.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureParts {
    pub semantic: Matrix,
    pub glyph: Matrix,
    pub phonetic: Matrix,
}

impl FeatureParts {
    pub fn len(&self) -> usize {
        self.glyph.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn semantic_dim(&self) -> usize {
        self.semantic.cols()
    }

    /// `[semantic | glyph | phonetic]` row by row.
    pub fn concat(&self) -> Matrix {
        Matrix::hstack(&[&self.semantic, &self.glyph, &self.phonetic])
    }

    pub fn blocks(&self) -> [&Matrix; 3] {
        [&self.semantic, &self.glyph, &self.phonetic]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusedSequence {
    pub chars: Vec<char>,
    pub strategy: StrategyKind,
    /// Fused rows; `None` for `MultiBranch`.
    pub matrix: Option<Matrix>,
    pub parts: FeatureParts,
}

impl FusedSequence {
    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }
}

/// Builds feature blocks from the tables.
#[derive(Debug, Clone, Copy)]
pub struct Embedder<'a> {
    pub tables: &'a Tables,
    pub mode: Mode,
    pub mask: FeatureMask,
}

impl<'a> Embedder<'a> {
    pub fn new(tables: &'a Tables, mode: Mode) -> Self {
        Embedder {
            tables,
            mode,
            mask: FeatureMask::ALL,
        }
    }

    pub fn with_mask(mut self, mask: FeatureMask) -> Self {
        self.mask = mask;
        self
    }

    pub fn parts(&self, sentence: &[char]) -> Result<FeatureParts> {
        if sentence.is_empty() {
            return Err(Error::EmptySentence);
        }
        let t = self.tables;
        let semantic_table = t
            .semantic
            .as_ref()
            .ok_or_else(|| Error::InvalidConfig("no semantic vectors loaded".into()))?;
        let n = sentence.len();
        let mut semantic = Matrix::zeros(n, semantic_table.dimension());
        let mut glyph = Matrix::zeros(n, GLYPH_DIM);
        let mut phonetic = Matrix::zeros(n, PHONETIC_DIM);
        for (i, &c) in sentence.iter().enumerate() {
            // encode every block even when masked so strict mode still checks coverage
            let s = match semantic_table.vector(c) {
                Some(v) => v,
                None if self.mode == Mode::Lenient => &[][..],
                None => return Err(Error::UnknownCharacter(c)),
            };
            let g = encode_glyph(c, &t.wubi, self.mode)?;
            let p = t.scheme.encode_phonetic(c, &t.pinyin, self.mode)?;
            if self.mask.semantic && !s.is_empty() {
                semantic.row_mut(i).copy_from_slice(s);
            }
            if self.mask.glyph {
                glyph.row_mut(i).copy_from_slice(&g.0);
            }
            if self.mask.phonetic {
                phonetic.row_mut(i).copy_from_slice(&p.0);
            }
        }
        Ok(FeatureParts {
            semantic,
            glyph,
            phonetic,
        })
    }

    pub fn embed(&self, sentence: &[char], strategy: &FusionStrategy) -> Result<FusedSequence> {
        let parts = self.parts(sentence)?;
        let matrix = match strategy {
            FusionStrategy::Concat => Some(parts.concat()),
            FusionStrategy::ConcatLinear(layer) => {
                let x = parts.concat();
                if layer.in_dim() != x.cols() {
                    return Err(Error::ShapeMismatch(format!(
                        "linear fusion expects {} inputs, concatenation has {}",
                        layer.in_dim(),
                        x.cols()
                    )));
                }
                Some(layer.forward(&x))
            }
            FusionStrategy::MultiBranch => None,
        };
        Ok(FusedSequence {
            chars: sentence.to_vec(),
            strategy: strategy.kind(),
            matrix,
            parts,
        })
    }
}

pub fn embed_sentence(
    sentence: &[char],
    tables: &Tables,
    strategy: &FusionStrategy,
    mode: Mode,
) -> Result<FusedSequence> {
    Embedder::new(tables, mode).embed(sentence, strategy)
}
