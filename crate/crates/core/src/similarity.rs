//! Character distances in the semantic, glyph and phonetic spaces and
//! exhaustive nearest-neighbour search over the inventory.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::glyph::encode_glyph;
use crate::linalg::l2_distance;
use crate::tables::{CharacterInventory, Tables};
use crate::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureSpace {
    Semantic,
    Glyph,
    Phonetic,
}

impl FeatureSpace {
    pub const ALL: [FeatureSpace; 3] = [
        FeatureSpace::Semantic,
        FeatureSpace::Glyph,
        FeatureSpace::Phonetic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FeatureSpace::Semantic => "semantic",
            FeatureSpace::Glyph => "glyph",
            FeatureSpace::Phonetic => "phonetic",
        }
    }
}

impl fmt::Display for FeatureSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FeatureSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "semantic" => Ok(FeatureSpace::Semantic),
            "glyph" => Ok(FeatureSpace::Glyph),
            "phonetic" => Ok(FeatureSpace::Phonetic),
            other => Err(Error::InvalidConfig(format!("unknown feature space {other:?}"))),
        }
    }
}

impl Tables {
    /// Embedding of `c` in one space. Lenient mode returns zeros for an
    /// unknown character.
    pub fn embed(&self, c: char, space: FeatureSpace, mode: Mode) -> Result<Vec<f64>> {
        match space {
            FeatureSpace::Glyph => Ok(encode_glyph(c, &self.wubi, mode)?.0.to_vec()),
            FeatureSpace::Phonetic => Ok(self
                .scheme
                .encode_phonetic(c, &self.pinyin, mode)?
                .0
                .to_vec()),
            FeatureSpace::Semantic => {
                let table = self
                    .semantic
                    .as_ref()
                    .ok_or_else(|| Error::InvalidConfig("no semantic vectors loaded".into()))?;
                match table.vector(c) {
                    Some(v) => Ok(v.to_vec()),
                    None if mode == Mode::Lenient => Ok(vec![0.0; table.dimension()]),
                    None => Err(Error::UnknownCharacter(c)),
                }
            }
        }
    }
}

/// L2 distance between the strict embeddings of two characters.
pub fn distance(c1: char, c2: char, space: FeatureSpace, tables: &Tables) -> Result<f64> {
    let a = tables.embed(c1, space, Mode::Strict)?;
    let b = tables.embed(c2, space, Mode::Strict)?;
    Ok(l2_distance(&a, &b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbor {
    pub ch: char,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    pub query: char,
    pub space: FeatureSpace,
    pub neighbors: Vec<Neighbor>,
}

/// Precomputed strict embeddings of every inventory character that is
/// encodable in one space.
#[derive(Debug, Clone)]
pub struct EmbeddingIndex {
    space: FeatureSpace,
    chars: Vec<char>,
    vectors: Vec<Vec<f64>>,
}

impl EmbeddingIndex {
    pub fn build(inventory: &CharacterInventory, tables: &Tables, space: FeatureSpace) -> Self {
        let (chars, vectors) = inventory
            .chars()
            .filter_map(|c| tables.embed(c, space, Mode::Strict).ok().map(|v| (c, v)))
            .unzip();
        EmbeddingIndex {
            space,
            chars,
            vectors,
        }
    }

    pub fn space(&self) -> FeatureSpace {
        self.space
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn contains(&self, c: char) -> bool {
        self.chars.binary_search(&c).is_ok()
    }

    /// All candidates except `query` and those rejected by `exclude`, sorted
    /// by distance then code point, truncated to `k`.
    pub fn nearest(
        &self,
        query: char,
        query_vec: &[f64],
        k: usize,
        exclude: impl Fn(char) -> bool,
    ) -> Vec<Neighbor> {
        let mut all: Vec<Neighbor> = self
            .chars
            .iter()
            .zip(&self.vectors)
            .filter(|(c, _)| **c != query && !exclude(**c))
            .map(|(c, v)| Neighbor {
                ch: *c,
                distance: l2_distance(query_vec, v),
            })
            .collect();
        all.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.ch.cmp(&b.ch)));
        all.truncate(k);
        all
    }

    pub fn knn(&self, query: char, k: usize, tables: &Tables) -> Result<NeighborList> {
        let query_vec = tables.embed(query, self.space, Mode::Strict)?;
        let available = self.len() - usize::from(self.contains(query));
        if k > available {
            return Err(Error::KTooLarge { k, available });
        }
        Ok(NeighborList {
            query,
            space: self.space,
            neighbors: self.nearest(query, &query_vec, k, |_| false),
        })
    }
}

/// The `k` closest inventory characters to `query` by exhaustive scan, ties
/// broken by ascending code point. The query itself is never returned.
pub fn knn(
    query: char,
    space: FeatureSpace,
    k: usize,
    inventory: &CharacterInventory,
    tables: &Tables,
) -> Result<NeighborList> {
    EmbeddingIndex::build(inventory, tables, space).knn(query, k, tables)
}
