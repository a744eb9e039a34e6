//! Loading and validation of the character tables: Wubi codes, pinyin
//! readings and static semantic vectors.
//!
//! All three formats are line-oriented UTF-8 text:
//!
//! * Wubi: `char TAB code`, code of 1-4 letters from `a..=y`.
//! * Pinyin: `char TAB syl[,syl...]`, numbered syllables, first is canonical.
//! * Vectors: header `<count> <dim>`, then `char v1 ... vdim`.
//!
//! `#` starts a comment line in the two TSV formats. Duplicate characters
//! keep the last occurrence and produce a warning.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::warn;

use crate::error::{Error, Result};
use crate::phonetics::{parse_syllable, FinalMapping, TransPinyin};

const BUNDLED_WUBI: &str = include_str!("../data/wubi.tsv");
const BUNDLED_PINYIN: &str = include_str!("../data/pinyin.tsv");
const BUNDLED_VECTORS: &str = include_str!("../data/vectors.txt");

/// A loaded table together with the non-fatal issues found while loading.
#[derive(Debug, Clone)]
pub struct Loaded<T> {
    pub table: T,
    pub warnings: Vec<String>,
}

impl<T> Loaded<T> {
    fn new(table: T, warnings: Vec<String>) -> Self {
        for w in &warnings {
            warn!("{w}");
        }
        Loaded { table, warnings }
    }
}

fn is_cjk(c: char) -> bool {
    matches!(c as u32,
        0x3007 | 0x3400..=0x4DBF | 0x4E00..=0x9FFF | 0xF900..=0xFAFF | 0x20000..=0x2FA1F)
}

fn single_char(key: &str, line: usize) -> Result<char> {
    let mut chars = key.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) if is_cjk(c) => Ok(c),
        _ => Err(Error::NotSingleChar {
            line,
            key: key.to_string(),
        }),
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn two_fields(raw: &str, line: usize) -> Result<(&str, &str)> {
    let fields: Vec<&str> = raw.split('\t').collect();
    match fields[..] {
        [a, b] => Ok((a, b)),
        _ => Err(Error::MalformedLine {
            line,
            reason: format!("expected 2 tab-separated fields, got {}", fields.len()),
        }),
    }
}

pub fn is_valid_wubi_code(code: &str) -> bool {
    (1..=4).contains(&code.len()) && code.bytes().all(|b| (b'a'..=b'y').contains(&b))
}

/// Character → Five-Strokes code.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WubiTable {
    entries: BTreeMap<char, String>,
}

impl WubiTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_WUBI).expect("bundled wubi table").table
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Loaded<Self>> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Loaded<Self>> {
        let mut entries = BTreeMap::new();
        let mut warnings = Vec::new();
        for (line, raw) in content_lines(text) {
            let (key, code) = two_fields(raw, line)?;
            let c = single_char(key, line)?;
            if !is_valid_wubi_code(code) {
                return Err(Error::InvalidCode {
                    line,
                    code: code.to_string(),
                });
            }
            if let Some(prev) = entries.insert(c, code.to_string()) {
                warnings.push(format!(
                    "wubi line {line}: duplicate {c}, {prev:?} replaced by {code:?}"
                ));
            }
        }
        Ok(Loaded::new(WubiTable { entries }, warnings))
    }

    /// Insert after validating the code.
    pub fn insert(&mut self, c: char, code: &str) -> Result<()> {
        if !is_valid_wubi_code(code) {
            return Err(Error::InvalidCode {
                line: 0,
                code: code.to_string(),
            });
        }
        self.entries.insert(c, code.to_string());
        Ok(())
    }

    pub fn code(&self, c: char) -> Option<&str> {
        self.entries.get(&c).map(String::as_str)
    }

    pub fn contains(&self, c: char) -> bool {
        self.entries.contains_key(&c)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &str)> {
        self.entries.iter().map(|(c, s)| (*c, s.as_str()))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (c, code) in &self.entries {
            let _ = writeln!(out, "{c}\t{code}");
        }
        out
    }
}

/// Character → numbered pinyin syllables. The first syllable is canonical.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PinyinTable {
    entries: BTreeMap<char, Vec<String>>,
}

impl PinyinTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_PINYIN, &FinalMapping::bundled())
            .expect("bundled pinyin table")
            .table
    }

    /// Load, validating syllables against the bundled final mapping.
    pub fn load(path: impl AsRef<Path>) -> Result<Loaded<Self>> {
        Self::load_with(path, &FinalMapping::bundled())
    }

    pub fn load_with(path: impl AsRef<Path>, finals: &FinalMapping) -> Result<Loaded<Self>> {
        Self::parse(&std::fs::read_to_string(path)?, finals)
    }

    pub fn parse(text: &str, finals: &FinalMapping) -> Result<Loaded<Self>> {
        let mut entries = BTreeMap::new();
        let mut warnings = Vec::new();
        for (line, raw) in content_lines(text) {
            let (key, list) = two_fields(raw, line)?;
            let c = single_char(key, line)?;
            let mut syllables = Vec::new();
            for syl in list.split(',') {
                let syl = syl.trim();
                parse_syllable(syl, finals).map_err(|_| Error::InvalidSyllable {
                    syllable: syl.to_string(),
                    line: Some(line),
                })?;
                syllables.push(syl.to_string());
            }
            if let Some(prev) = entries.insert(c, syllables) {
                warnings.push(format!(
                    "pinyin line {line}: duplicate {c}, {} replaced",
                    prev.join(",")
                ));
            }
        }
        Ok(Loaded::new(PinyinTable { entries }, warnings))
    }

    pub fn insert(&mut self, c: char, syllables: Vec<String>, finals: &FinalMapping) -> Result<()> {
        if syllables.is_empty() {
            return Err(Error::InvalidSyllable {
                syllable: String::new(),
                line: None,
            });
        }
        for s in &syllables {
            parse_syllable(s, finals)?;
        }
        self.entries.insert(c, syllables);
        Ok(())
    }

    pub fn canonical(&self, c: char) -> Option<&str> {
        self.entries
            .get(&c)
            .and_then(|v| v.first())
            .map(String::as_str)
    }

    pub fn readings(&self, c: char) -> Option<&[String]> {
        self.entries.get(&c).map(Vec::as_slice)
    }

    pub fn contains(&self, c: char) -> bool {
        self.entries.contains_key(&c)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn polyphone_count(&self) -> usize {
        self.entries.values().filter(|v| v.len() > 1).count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &[String])> {
        self.entries.iter().map(|(c, v)| (*c, v.as_slice()))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (c, syl) in &self.entries {
            let _ = writeln!(out, "{c}\t{}", syl.join(","));
        }
        out
    }
}

/// Static per-character semantic vectors of a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticTable {
    dimension: usize,
    vectors: BTreeMap<char, Vec<f64>>,
}

impl SemanticTable {
    pub fn new(dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::BadHeader("dimension must be positive".into()));
        }
        Ok(SemanticTable {
            dimension,
            vectors: BTreeMap::new(),
        })
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_VECTORS).expect("bundled vectors").table
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Loaded<Self>> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Loaded<Self>> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::BadHeader("missing header".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::BadHeader(header.to_string()))?;
        let [count, dimension] = nums[..] else {
            return Err(Error::BadHeader(header.to_string()));
        };
        let mut table = SemanticTable::new(dimension)?;
        let mut warnings = Vec::new();
        for (line, raw) in lines {
            let mut tokens = raw.split_whitespace();
            let key = tokens.next().unwrap_or_default();
            let c = single_char(key, line)?;
            let values: Vec<f64> = tokens
                .map(|t| {
                    t.parse::<f64>().map_err(|_| Error::ParseFloat {
                        line,
                        token: t.to_string(),
                    })
                })
                .collect::<Result<_>>()?;
            if values.len() != dimension {
                return Err(Error::DimensionMismatch {
                    line,
                    expected: dimension,
                    found: values.len(),
                });
            }
            if table.vectors.insert(c, values).is_some() {
                warnings.push(format!("vectors line {line}: duplicate {c}, replaced"));
            }
        }
        if table.vectors.len() != count {
            warnings.push(format!(
                "vectors header declares {count} rows, found {}",
                table.vectors.len()
            ));
        }
        Ok(Loaded::new(table, warnings))
    }

    pub fn insert(&mut self, c: char, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::DimensionMismatch {
                line: 0,
                expected: self.dimension,
                found: vector.len(),
            });
        }
        self.vectors.insert(c, vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn vector(&self, c: char) -> Option<&[f64]> {
        self.vectors.get(&c).map(Vec::as_slice)
    }

    pub fn contains(&self, c: char) -> bool {
        self.vectors.contains_key(&c)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &[f64])> {
        self.vectors.iter().map(|(c, v)| (*c, v.as_slice()))
    }

    /// Serialise; `{}` formatting of `f64` round-trips exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.vectors.len(), self.dimension);
        for (c, v) in &self.vectors {
            out.push(*c);
            for x in v {
                let _ = write!(out, " {x}");
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InventoryEntry {
    pub ch: char,
    pub has_wubi: bool,
    pub has_pinyin: bool,
    pub has_semantic: bool,
}

/// Characters with both a Wubi code and a pinyin reading, in code-point
/// order, with semantic coverage flags.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterInventory {
    entries: Vec<InventoryEntry>,
}

impl CharacterInventory {
    pub fn build(
        wubi: &WubiTable,
        pinyin: &PinyinTable,
        semantic: Option<&SemanticTable>,
    ) -> Result<Self> {
        let entries: Vec<InventoryEntry> = wubi
            .iter()
            .map(|(c, _)| c)
            .filter(|c| pinyin.contains(*c))
            .map(|ch| InventoryEntry {
                ch,
                has_wubi: true,
                has_pinyin: true,
                has_semantic: semantic.is_some_and(|s| s.contains(ch)),
            })
            .collect();
        if entries.is_empty() {
            return Err(Error::EmptyIntersection);
        }
        Ok(CharacterInventory { entries })
    }

    pub fn entries(&self) -> &[InventoryEntry] {
        &self.entries
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.entries.iter().map(|e| e.ch)
    }

    pub fn contains(&self, c: char) -> bool {
        self.entries.binary_search_by_key(&c, |e| e.ch).is_ok()
    }

    pub fn get(&self, c: char) -> Option<&InventoryEntry> {
        self.entries
            .binary_search_by_key(&c, |e| e.ch)
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn semantic_coverage(&self) -> usize {
        self.entries.iter().filter(|e| e.has_semantic).count()
    }
}

/// Paths of the five data files. Missing mapping paths fall back to the
/// bundled mapping tables.
#[derive(Debug, Clone, Default)]
pub struct DataPaths {
    pub wubi: Option<PathBuf>,
    pub pinyin: Option<PathBuf>,
    pub vectors: Option<PathBuf>,
    pub initials: Option<PathBuf>,
    pub finals: Option<PathBuf>,
}

/// Everything the encoders need, loaded once and shared read-only.
#[derive(Debug, Clone)]
pub struct Tables {
    pub wubi: WubiTable,
    pub pinyin: PinyinTable,
    pub semantic: Option<SemanticTable>,
    pub scheme: TransPinyin,
}

impl Tables {
    /// The ~500-character tables compiled into the crate.
    pub fn bundled() -> Self {
        Tables {
            wubi: WubiTable::bundled(),
            pinyin: PinyinTable::bundled(),
            semantic: Some(SemanticTable::bundled()),
            scheme: TransPinyin::bundled(),
        }
    }

    /// Load from files; each absent path falls back to the bundled table.
    /// Returns the accumulated load warnings alongside.
    pub fn load(paths: &DataPaths) -> Result<(Self, Vec<String>)> {
        let mut warnings = Vec::new();
        let initials = match &paths.initials {
            Some(p) => crate::phonetics::InitialMapping::load(p)?,
            None => crate::phonetics::InitialMapping::bundled(),
        };
        let finals = match &paths.finals {
            Some(p) => FinalMapping::load(p)?,
            None => FinalMapping::bundled(),
        };
        let wubi = match &paths.wubi {
            Some(p) => {
                let l = WubiTable::load(p)?;
                warnings.extend(l.warnings);
                l.table
            }
            None => WubiTable::bundled(),
        };
        let pinyin = match &paths.pinyin {
            Some(p) => {
                let l = PinyinTable::load_with(p, &finals)?;
                warnings.extend(l.warnings);
                l.table
            }
            None => PinyinTable::parse(BUNDLED_PINYIN, &finals)?.table,
        };
        let semantic = match &paths.vectors {
            Some(p) => {
                let l = SemanticTable::load(p)?;
                warnings.extend(l.warnings);
                l.table
            }
            None => SemanticTable::bundled(),
        };
        let tables = Tables {
            wubi,
            pinyin,
            semantic: Some(semantic),
            scheme: TransPinyin { initials, finals },
        };
        Ok((tables, warnings))
    }

    pub fn inventory(&self) -> Result<CharacterInventory> {
        CharacterInventory::build(&self.wubi, &self.pinyin, self.semantic.as_ref())
    }

    pub fn semantic_dim(&self) -> usize {
        self.semantic.as_ref().map_or(0, SemanticTable::dimension)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wubi_direct_parse() {
        let t = WubiTable::parse("某\tabcd\n").unwrap().table;
        assert_eq!(t.code('某'), Some("abcd"));
    }

    #[test]
    fn wubi_rejects_z_and_bad_codes() {
        assert!(WubiTable::parse("某\t\n").is_err());
        for code in ["abcz", "abcde", "Abc", "a1"] {
            let text = format!("某\t{code}\n");
            assert!(
                matches!(WubiTable::parse(&text), Err(Error::InvalidCode { line: 1, .. })),
                "{code}"
            );
        }
    }

    #[test]
    fn wubi_last_duplicate_wins_with_warning() {
        let l = WubiTable::parse("# comment\n某\tab\n某\tcd\n").unwrap();
        assert_eq!(l.table.code('某'), Some("cd"));
        assert_eq!(l.warnings.len(), 1);
    }

    #[test]
    fn wubi_structure_errors() {
        assert!(matches!(
            WubiTable::parse("某\tab\textra\n"),
            Err(Error::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            WubiTable::parse("某某\tab\n"),
            Err(Error::NotSingleChar { .. })
        ));
        assert!(matches!(
            WubiTable::parse("x\tab\n"),
            Err(Error::NotSingleChar { .. })
        ));
    }

    #[test]
    fn pinyin_policies() {
        let f = FinalMapping::bundled();
        let t = PinyinTable::parse("草\tcao3\n行\txing2,hang2\n", &f).unwrap().table;
        assert_eq!(t.readings('草').unwrap(), ["cao3"]);
        assert_eq!(t.canonical('行'), Some("xing2"));
        assert_eq!(t.polyphone_count(), 1);
        assert!(matches!(
            PinyinTable::parse("草\tca!o3\n", &f),
            Err(Error::InvalidSyllable { line: Some(1), .. })
        ));
        assert!(matches!(
            PinyinTable::parse("草\tcao3 x\n", &f),
            Err(Error::InvalidSyllable { .. })
        ));
    }

    #[test]
    fn semantic_parse_and_errors() {
        let t = SemanticTable::parse("2 3\n甲 1 0 0\n乙 0 1 0\n").unwrap();
        assert_eq!(t.table.dimension(), 3);
        assert_eq!(t.table.len(), 2);
        assert!(t.warnings.is_empty());

        assert!(matches!(
            SemanticTable::parse("1 3\n丙 1 0\n"),
            Err(Error::DimensionMismatch {
                line: 2,
                expected: 3,
                found: 2
            })
        ));
        let short = SemanticTable::parse("5 3\n甲 1 0 0\n乙 0 1 0\n").unwrap();
        assert_eq!(short.table.len(), 2);
        assert_eq!(short.warnings.len(), 1);

        assert!(matches!(SemanticTable::parse("x 3\n"), Err(Error::BadHeader(_))));
        assert!(matches!(SemanticTable::parse("1\n"), Err(Error::BadHeader(_))));
        assert!(matches!(SemanticTable::parse(""), Err(Error::BadHeader(_))));
        assert!(matches!(
            SemanticTable::parse("1 2\n甲 1 zz\n"),
            Err(Error::ParseFloat { line: 2, .. })
        ));
    }

    #[test]
    fn inventory_intersection_and_order() {
        let f = FinalMapping::bundled();
        let wubi = WubiTable::parse("甲\tlhnh\n乙\tnnll\n").unwrap().table;
        let pinyin = PinyinTable::parse("乙\tyi3\n丙\tbing3\n", &f).unwrap().table;
        let inv = CharacterInventory::build(&wubi, &pinyin, None).unwrap();
        assert_eq!(inv.chars().collect::<Vec<_>>(), vec!['乙']);
        assert!(!inv.entries()[0].has_semantic);

        let pinyin2 = PinyinTable::parse("甲\tjia3\n乙\tyi3\n", &f).unwrap().table;
        let inv = CharacterInventory::build(&wubi, &pinyin2, None).unwrap();
        assert_eq!(inv.chars().collect::<Vec<_>>(), vec!['乙', '甲']);

        let disjoint = PinyinTable::parse("丙\tbing3\n", &f).unwrap().table;
        assert!(matches!(
            CharacterInventory::build(&wubi, &disjoint, None),
            Err(Error::EmptyIntersection)
        ));
    }

    #[test]
    fn bundled_tables_round_trip() {
        let t = Tables::bundled();
        let f = FinalMapping::bundled();
        assert_eq!(WubiTable::parse(&t.wubi.to_tsv()).unwrap().table, t.wubi);
        assert_eq!(PinyinTable::parse(&t.pinyin.to_tsv(), &f).unwrap().table, t.pinyin);
        let sem = t.semantic.as_ref().unwrap();
        assert_eq!(&SemanticTable::parse(&sem.to_text()).unwrap().table, sem);
    }

    #[test]
    fn bundled_inventory_is_about_five_hundred_chars() {
        let t = Tables::bundled();
        let inv = t.inventory().unwrap();
        assert!((450..=600).contains(&inv.len()), "{}", inv.len());
        assert_eq!(inv.semantic_coverage(), inv.len());
    }
}
