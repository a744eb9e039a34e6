use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: malformed line: {reason}")]
    MalformedLine { line: usize, reason: String },

    #[error("line {line}: invalid wubi code {code:?}")]
    InvalidCode { line: usize, code: String },

    #[error("line {line}: key {key:?} is not a single character")]
    NotSingleChar { line: usize, key: String },

    #[error("invalid syllable {syllable:?}{}", at_line(*.line))]
    InvalidSyllable { syllable: String, line: Option<usize> },

    #[error("bad header: {0}")]
    BadHeader(String),

    #[error("line {line}: expected {expected} values, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("line {line}: cannot parse {token:?} as a number")]
    ParseFloat { line: usize, token: String },

    #[error("no character has both a wubi code and a pinyin reading")]
    EmptyIntersection,

    #[error("unknown character {0:?}")]
    UnknownCharacter(char),

    #[error("invalid glyph letter {0:?} (expected a-y)")]
    InvalidLetter(char),

    #[error("unknown pinyin initial {0:?}")]
    UnknownInitial(String),

    #[error("line {line}: invalid mapping entry: {reason}")]
    InvalidMapping { line: usize, reason: String },

    #[error("k = {k} exceeds the {available} available neighbours")]
    KTooLarge { k: usize, available: usize },

    #[error("empty sentence")]
    EmptySentence,

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("strategy mismatch: model expects {expected}, got {found}")]
    StrategyMismatch { expected: String, found: String },

    #[error("tag {0:?} is not in the tag set")]
    TagNotInTagSet(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("line {line}: unknown tag format {tag:?}")]
    UnknownTagFormat { line: usize, tag: String },

    #[error("length mismatch: {0}")]
    LengthMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("numeric failure: {0}")]
    Numeric(String),
}

fn at_line(line: Option<usize>) -> String {
    match line {
        Some(l) => format!(" at line {l}"),
        None => String::new(),
    }
}

impl Error {
    /// True for failures of arithmetic (non-finite losses and the like) as
    /// opposed to bad input data.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}
