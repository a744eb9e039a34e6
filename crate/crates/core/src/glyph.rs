//! Five-Strokes (Wubi) glyph embedding.
//!
//! Each code letter names a class of character roots. The embedding is the
//! sum of one-hot vectors over the 25 letters `a..=y`, so a four-root code
//! yields a vector with L1 norm 4. Summation discards root order: codes that
//! are anagrams of each other embed identically.

use crate::error::{Error, Result};
use crate::linalg::l2_distance;
use crate::tables::WubiTable;
use crate::Mode;

pub const GLYPH_DIM: usize = 25;

/// Index of a Wubi letter; `z` is not part of the alphabet.
pub fn glyph_alphabet_index(letter: char) -> Result<usize> {
    match letter {
        'a'..='y' => Ok(letter as usize - 'a' as usize),
        _ => Err(Error::InvalidLetter(letter)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlyphVector(pub [f64; GLYPH_DIM]);

impl GlyphVector {
    pub fn zeros() -> Self {
        GlyphVector([0.0; GLYPH_DIM])
    }

    /// Sum of one-hot letter vectors of `code`, counting repeats.
    pub fn from_code(code: &str) -> Result<Self> {
        let mut v = Self::zeros();
        for letter in code.chars() {
            v.0[glyph_alphabet_index(letter)?] += 1.0;
        }
        Ok(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn l1(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn distance(&self, other: &GlyphVector) -> f64 {
        l2_distance(&self.0, &other.0)
    }
}

pub fn encode_glyph(c: char, table: &WubiTable, mode: Mode) -> Result<GlyphVector> {
    match table.code(c) {
        Some(code) => GlyphVector::from_code(code),
        None if mode == Mode::Lenient => Ok(GlyphVector::zeros()),
        None => Err(Error::UnknownCharacter(c)),
    }
}
