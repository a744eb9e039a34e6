//! Trans-pinyin phonetic embedding.
//!
//! A pinyin syllable such as `cao3` is split into initial, final and tone.
//! The initial is rewritten to at most two plain letters plus a binary
//! weight, so that pairs like `c`/`z` share letters (`ts`) and differ only in
//! the weight. The final is rewritten to a bag of single vowels plus an
//! optional nasal coda. Both rewrite tables are data files
//! (`initials.tsv`, `finals.tsv`); the bundled defaults are compiled in.
//!
//! The resulting 39-dimensional vector is laid out as:
//!
//! | dims  | block                                   |
//! |-------|-----------------------------------------|
//! | 0-25  | initial letters, multi-hot over `a..=z` |
//! | 26    | phonetic weight                         |
//! | 27-32 | vowels, multi-hot over `a o e i u ü`    |
//! | 33-34 | nasal one-hot (`n`, `ng`)               |
//! | 35-38 | tone one-hot (tones 1-4)                |
//!
//! The neutral tone (written `0`) leaves the tone block empty.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::tables::PinyinTable;
use crate::Mode;

pub const PHONETIC_DIM: usize = 39;
pub const WEIGHT_DIM: usize = 26;
pub const VOWEL_OFFSET: usize = 27;
pub const NASAL_OFFSET: usize = 33;
pub const TONE_OFFSET: usize = 35;

/// Canonical pinyin initials. `y` and `w` are treated as initials.
pub const INITIALS: [&str; 23] = [
    "b", "p", "m", "f", "d", "t", "n", "l", "g", "k", "h", "j", "q", "x", "zh", "ch", "sh", "r",
    "z", "c", "s", "y", "w",
];

/// After these initials a written `u` is pronounced `ü`.
const UMLAUT_INITIALS: [&str; 4] = ["j", "q", "x", "y"];

const BUNDLED_INITIALS: &str = include_str!("../data/initials.tsv");
const BUNDLED_FINALS: &str = include_str!("../data/finals.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Vowel {
    A,
    O,
    E,
    I,
    U,
    /// ü, written `v`
    Yu,
}

impl Vowel {
    pub const ALL: [Vowel; 6] = [Vowel::A, Vowel::O, Vowel::E, Vowel::I, Vowel::U, Vowel::Yu];

    pub fn from_letter(c: char) -> Option<Vowel> {
        Some(match c {
            'a' => Vowel::A,
            'o' => Vowel::O,
            'e' => Vowel::E,
            'i' => Vowel::I,
            'u' => Vowel::U,
            'v' => Vowel::Yu,
            _ => return None,
        })
    }

    pub fn letter(self) -> char {
        match self {
            Vowel::A => 'a',
            Vowel::O => 'o',
            Vowel::E => 'e',
            Vowel::I => 'i',
            Vowel::U => 'u',
            Vowel::Yu => 'v',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Nasal {
    None,
    /// alveolar coda `n`
    N,
    /// velar coda `ŋ`, written `ng`
    Ng,
}

impl Nasal {
    fn parse(s: &str) -> Option<Nasal> {
        match s {
            "-" => Some(Nasal::None),
            "n" => Some(Nasal::N),
            "ng" => Some(Nasal::Ng),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Nasal::None => "-",
            Nasal::N => "n",
            Nasal::Ng => "ng",
        }
    }
}

/// A syllable split into its three parts. `rime` is the pinyin final.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SyllableParts {
    pub initial: String,
    pub rime: String,
    pub tone: u8,
}

impl SyllableParts {
    /// Reassemble the written syllable.
    pub fn to_syllable(&self) -> String {
        format!("{}{}{}", self.initial, self.rime, self.tone)
    }
}

impl fmt::Display for SyllableParts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let initial = if self.initial.is_empty() { "-" } else { &self.initial };
        write!(f, "{} {} {}", initial, self.rime, self.tone)
    }
}

/// Checks the `[a-z]+[0-4]` shape and returns (body, tone).
fn split_tone(syllable: &str) -> Option<(&str, u8)> {
    let last = syllable.chars().last()?;
    let tone = last.to_digit(10).filter(|&d| d <= 4)? as u8;
    let body = &syllable[..syllable.len() - 1];
    if body.is_empty() || !body.bytes().all(|b| b.is_ascii_lowercase()) {
        return None;
    }
    Some((body, tone))
}

/// Split a numbered pinyin syllable into initial, final and tone.
///
/// The initial is the longest canonical initial that prefixes the body, so
/// `zh`, `ch`, `sh` win over `z`, `c`, `s`. No backtracking is attempted:
/// if the remainder is not a known final the syllable is rejected.
pub fn parse_syllable(syllable: &str, finals: &FinalMapping) -> Result<SyllableParts> {
    let invalid = || Error::InvalidSyllable {
        syllable: syllable.to_string(),
        line: None,
    };
    let (body, tone) = split_tone(syllable).ok_or_else(invalid)?;
    let initial = INITIALS
        .iter()
        .filter(|ini| body.starts_with(**ini))
        .max_by_key(|ini| ini.len())
        .copied()
        .unwrap_or("");
    let rime = &body[initial.len()..];
    if rime.is_empty() || finals.get(rime).is_none() {
        return Err(invalid());
    }
    Ok(SyllableParts {
        initial: initial.to_string(),
        rime: rime.to_string(),
        tone,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialForm {
    /// Standard-form letters, zero to two of `a..=z`.
    pub letters: String,
    pub weight: f64,
}

/// Initial rewrite table, loaded from `initials.tsv`.
///
/// Format: `initial TAB letters TAB weight`, `-` for empty letters, an empty
/// first field for the zero initial. Every canonical initial and the zero
/// initial must be present; weights are 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialMapping {
    forms: BTreeMap<String, InitialForm>,
}

impl InitialMapping {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_INITIALS).expect("bundled initials.tsv is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut forms = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim_end();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let bad = |reason: String| Error::InvalidMapping { line, reason };
            let fields: Vec<&str> = raw.split('\t').collect();
            let [initial, letters, weight] = fields[..] else {
                return Err(bad(format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            if !initial.is_empty() && !INITIALS.contains(&initial) {
                return Err(Error::UnknownInitial(initial.to_string()));
            }
            let letters = if letters == "-" { "" } else { letters };
            if letters.len() > 2 || !letters.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(bad(format!("letters {letters:?} must be at most two of a-z")));
            }
            let weight: f64 = weight
                .parse()
                .map_err(|_| bad(format!("weight {weight:?} is not a number")))?;
            if weight != 0.0 && weight != 1.0 {
                return Err(bad(format!("weight {weight} must be 0 or 1")));
            }
            let form = InitialForm {
                letters: letters.to_string(),
                weight,
            };
            if forms.insert(initial.to_string(), form).is_some() {
                return Err(bad(format!("duplicate initial {initial:?}")));
            }
        }
        for ini in INITIALS.iter().copied().chain([""]) {
            if !forms.contains_key(ini) {
                return Err(Error::InvalidMapping {
                    line: 0,
                    reason: format!("missing entry for initial {ini:?}"),
                });
            }
        }
        Ok(InitialMapping { forms })
    }

    pub fn get(&self, initial: &str) -> Result<&InitialForm> {
        self.forms
            .get(initial)
            .ok_or_else(|| Error::UnknownInitial(initial.to_string()))
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (ini, form) in &self.forms {
            let letters = if form.letters.is_empty() { "-" } else { &form.letters };
            out.push_str(&format!("{ini}\t{letters}\t{}\n", form.weight));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalForm {
    /// Single vowels with multiplicity, in written order.
    pub vowels: Vec<Vowel>,
    pub nasal: Nasal,
}

/// Final rewrite table, loaded from `finals.tsv`.
///
/// Format: `final TAB vowels TAB nasal` with vowels over `aoeiuv` and nasal
/// one of `-`, `n`, `ng`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalMapping {
    forms: BTreeMap<String, FinalForm>,
}

impl FinalMapping {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_FINALS).expect("bundled finals.tsv is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut forms = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim_end();
            if raw.is_empty() || raw.starts_with('#') {
                continue;
            }
            let bad = |reason: String| Error::InvalidMapping { line, reason };
            let fields: Vec<&str> = raw.split('\t').collect();
            let [rime, vowels, nasal] = fields[..] else {
                return Err(bad(format!("expected 3 tab-separated fields, got {}", fields.len())));
            };
            if rime.is_empty() || !rime.bytes().all(|b| b.is_ascii_lowercase()) {
                return Err(bad(format!("final {rime:?} must be non-empty a-z")));
            }
            let vowels: Vec<Vowel> = vowels
                .chars()
                .map(Vowel::from_letter)
                .collect::<Option<_>>()
                .filter(|v: &Vec<Vowel>| !v.is_empty())
                .ok_or_else(|| bad(format!("vowels {vowels:?} must be non-empty over aoeiuv")))?;
            let nasal = Nasal::parse(nasal)
                .ok_or_else(|| bad(format!("nasal {nasal:?} must be one of - n ng")))?;
            if forms
                .insert(rime.to_string(), FinalForm { vowels, nasal })
                .is_some()
            {
                return Err(bad(format!("duplicate final {rime:?}")));
            }
        }
        if forms.is_empty() {
            return Err(Error::InvalidMapping {
                line: 0,
                reason: "no finals defined".into(),
            });
        }
        Ok(FinalMapping { forms })
    }

    pub fn get(&self, rime: &str) -> Option<&FinalForm> {
        self.forms.get(rime)
    }

    pub fn len(&self) -> usize {
        self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forms.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (rime, form) in &self.forms {
            let vowels: String = form.vowels.iter().map(|v| v.letter()).collect();
            out.push_str(&format!("{rime}\t{vowels}\t{}\n", form.nasal.as_str()));
        }
        out
    }
}

/// 39-dimensional phonetic embedding of one syllable.
#[derive(Debug, Clone, PartialEq)]
pub struct PhoneticVector(pub [f64; PHONETIC_DIM]);

impl PhoneticVector {
    pub fn zeros() -> Self {
        PhoneticVector([0.0; PHONETIC_DIM])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn letters(&self) -> &[f64] {
        &self.0[..WEIGHT_DIM]
    }

    pub fn weight(&self) -> f64 {
        self.0[WEIGHT_DIM]
    }

    pub fn vowels(&self) -> &[f64] {
        &self.0[VOWEL_OFFSET..NASAL_OFFSET]
    }

    pub fn nasal(&self) -> &[f64] {
        &self.0[NASAL_OFFSET..TONE_OFFSET]
    }

    pub fn tone(&self) -> &[f64] {
        &self.0[TONE_OFFSET..]
    }

    pub fn distance(&self, other: &PhoneticVector) -> f64 {
        crate::linalg::l2_distance(&self.0, &other.0)
    }

    /// Block-sum constraints of the layout. Returns a description of every
    /// violated constraint; empty when the vector is well formed.
    pub fn layout_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let sum = |s: &[f64]| s.iter().sum::<f64>();
        let letters = sum(self.letters());
        if ![0.0, 1.0, 2.0].contains(&letters) {
            out.push(format!("initial letter block sums to {letters}"));
        }
        if ![0.0, 1.0].contains(&self.weight()) {
            out.push(format!("weight is {}", self.weight()));
        }
        if sum(self.vowels()) < 1.0 {
            out.push("vowel block is empty".into());
        }
        if sum(self.nasal()) > 1.0 {
            out.push("more than one nasal".into());
        }
        if sum(self.tone()) > 1.0 {
            out.push("more than one tone".into());
        }
        if self.0.iter().any(|v| *v < 0.0 || v.fract() != 0.0) {
            out.push("non-integer or negative entry".into());
        }
        out
    }
}

/// The complete Trans-pinyin scheme: initial and final rewrite tables.
#[derive(Debug, Clone, PartialEq)]
pub struct TransPinyin {
    pub initials: InitialMapping,
    pub finals: FinalMapping,
}

impl Default for TransPinyin {
    fn default() -> Self {
        Self::bundled()
    }
}

impl TransPinyin {
    pub fn bundled() -> Self {
        TransPinyin {
            initials: InitialMapping::bundled(),
            finals: FinalMapping::bundled(),
        }
    }

    pub fn parse_syllable(&self, syllable: &str) -> Result<SyllableParts> {
        parse_syllable(syllable, &self.finals)
    }

    /// Standard-form letters and weight of a pinyin initial (`""` is the
    /// zero initial).
    pub fn map_initial(&self, initial: &str) -> Result<(String, f64)> {
        let form = self.initials.get(initial)?;
        Ok((form.letters.clone(), form.weight))
    }

    /// Final used for encoding: after j, q, x, y a written `u` is `ü`, so
    /// `ju` encodes like `jv` when the mapping has the `v` form.
    fn encoding_final(&self, parts: &SyllableParts) -> Result<&FinalForm> {
        if UMLAUT_INITIALS.contains(&parts.initial.as_str()) {
            if let Some(rest) = parts.rime.strip_prefix('u') {
                if let Some(form) = self.finals.get(&format!("v{rest}")) {
                    return Ok(form);
                }
            }
        }
        self.finals
            .get(&parts.rime)
            .ok_or_else(|| Error::InvalidSyllable {
                syllable: parts.to_syllable(),
                line: None,
            })
    }

    pub fn encode_parts(&self, parts: &SyllableParts) -> Result<PhoneticVector> {
        let mut v = PhoneticVector::zeros();
        let initial = self.initials.get(&parts.initial)?;
        for b in initial.letters.bytes() {
            v.0[(b - b'a') as usize] += 1.0;
        }
        v.0[WEIGHT_DIM] = initial.weight;
        let rime = self.encoding_final(parts)?;
        for vowel in &rime.vowels {
            v.0[VOWEL_OFFSET + vowel.index()] += 1.0;
        }
        match rime.nasal {
            Nasal::None => {}
            Nasal::N => v.0[NASAL_OFFSET] = 1.0,
            Nasal::Ng => v.0[NASAL_OFFSET + 1] = 1.0,
        }
        if parts.tone > 0 {
            v.0[TONE_OFFSET + parts.tone as usize - 1] = 1.0;
        }
        Ok(v)
    }

    pub fn encode_syllable(&self, syllable: &str) -> Result<PhoneticVector> {
        self.encode_parts(&self.parse_syllable(syllable)?)
    }

    /// Encode the canonical (first listed) reading of `c`.
    pub fn encode_phonetic(
        &self,
        c: char,
        table: &PinyinTable,
        mode: Mode,
    ) -> Result<PhoneticVector> {
        match table.canonical(c) {
            Some(syllable) => self.encode_syllable(syllable),
            None if mode == Mode::Lenient => Ok(PhoneticVector::zeros()),
            None => Err(Error::UnknownCharacter(c)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scheme() -> TransPinyin {
        TransPinyin::bundled()
    }

    fn parts(i: &str, r: &str, t: u8) -> SyllableParts {
        SyllableParts {
            initial: i.into(),
            rime: r.into(),
            tone: t,
        }
    }

    #[test]
    fn parses_paper_and_zero_initial_syllables() {
        let s = scheme();
        assert_eq!(s.parse_syllable("cao3").unwrap(), parts("c", "ao", 3));
        assert_eq!(s.parse_syllable("an1").unwrap(), parts("", "an", 1));
        assert_eq!(s.parse_syllable("zhuang4").unwrap(), parts("zh", "uang", 4));
        assert_eq!(s.parse_syllable("shi0").unwrap(), parts("sh", "i", 0));
        assert_eq!(s.parse_syllable("lve4").unwrap(), parts("l", "ve", 4));
    }

    #[test]
    fn rejects_bad_syllables() {
        let s = scheme();
        for bad in ["n2", "cao5", "cao", "3", "Cao3", "ca!o3", "zhx1", ""] {
            assert!(
                matches!(s.parse_syllable(bad), Err(Error::InvalidSyllable { .. })),
                "{bad}"
            );
        }
    }

    #[test]
    fn initial_mapping_examples() {
        let s = scheme();
        assert_eq!(s.map_initial("c").unwrap(), ("ts".to_string(), 0.0));
        assert_eq!(s.map_initial("z").unwrap(), ("ts".to_string(), 1.0));
        assert_eq!(s.map_initial("").unwrap(), (String::new(), 0.0));
        assert_eq!(s.map_initial("b").unwrap(), ("p".to_string(), 0.0));
        assert_eq!(s.map_initial("p").unwrap(), ("p".to_string(), 1.0));
        assert!(matches!(s.map_initial("v"), Err(Error::UnknownInitial(_))));
    }

    #[test]
    fn initial_forms_are_unique() {
        let m = InitialMapping::bundled();
        let mut seen = std::collections::HashSet::new();
        for ini in INITIALS.iter().copied().chain([""]) {
            let f = m.get(ini).unwrap();
            assert!(seen.insert((f.letters.clone(), f.weight.to_bits())), "{ini}");
        }
    }

    #[test]
    fn single_vowel_and_nasal_examples() {
        let s = scheme();
        let a1 = s.encode_syllable("a1").unwrap();
        let nonzero: Vec<usize> = (0..PHONETIC_DIM).filter(|&i| a1.0[i] != 0.0).collect();
        assert_eq!(nonzero, vec![VOWEL_OFFSET, TONE_OFFSET]);

        let ang2 = s.encode_syllable("ang2").unwrap();
        let nonzero: Vec<usize> = (0..PHONETIC_DIM).filter(|&i| ang2.0[i] != 0.0).collect();
        // frozen from scripts/derive_oracles.py
        assert_eq!(nonzero, vec![27, 34, 36]);
    }

    #[test]
    fn cao_and_zao_differ_only_in_weight() {
        let s = scheme();
        let cao = s.encode_syllable("cao3").unwrap();
        let zao = s.encode_syllable("zao3").unwrap();
        assert_eq!(cao.distance(&zao), 1.0);
        let diff: Vec<usize> = (0..PHONETIC_DIM).filter(|&i| cao.0[i] != zao.0[i]).collect();
        assert_eq!(diff, vec![WEIGHT_DIM]);
    }

    #[test]
    fn tone_only_pairs() {
        let s = scheme();
        let a = s.encode_syllable("ma1").unwrap();
        let b = s.encode_syllable("ma3").unwrap();
        let n = s.encode_syllable("ma0").unwrap();
        assert_eq!(a.distance(&b), 2f64.sqrt());
        assert_eq!(a.distance(&n), 1.0);
    }

    #[test]
    fn umlaut_after_palatals() {
        let s = scheme();
        let ju = s.encode_syllable("ju3").unwrap();
        let lv = s.encode_syllable("lv3").unwrap();
        assert_eq!(ju.vowels(), lv.vowels());
        let zu = s.encode_syllable("zu3").unwrap();
        assert_ne!(ju.vowels(), zu.vowels());
        // parse keeps the written final
        assert_eq!(s.parse_syllable("jue2").unwrap().rime, "ue");
    }

    #[test]
    fn mapping_files_reject_schema_violations() {
        let incomplete = "b\tp\t0\n";
        assert!(matches!(
            InitialMapping::parse(incomplete),
            Err(Error::InvalidMapping { .. })
        ));
        let bad_weight = BUNDLED_INITIALS.replace("p\tp\t1", "p\tp\t0.5");
        assert!(InitialMapping::parse(&bad_weight).is_err());
        assert!(matches!(
            FinalMapping::parse("ao\tax\t-\n"),
            Err(Error::InvalidMapping { line: 1, .. })
        ));
        assert!(FinalMapping::parse("ao\tau\tm\n").is_err());
    }

    #[test]
    fn mapping_files_round_trip() {
        let m = InitialMapping::bundled();
        assert_eq!(InitialMapping::parse(&m.to_tsv()).unwrap(), m);
        let f = FinalMapping::bundled();
        assert_eq!(FinalMapping::parse(&f.to_tsv()).unwrap(), f);
    }

    #[test]
    fn every_bundled_final_encodes_within_layout() {
        let s = scheme();
        for rime in s.finals.forms.keys() {
            for tone in 0..=4 {
                let v = s.encode_syllable(&format!("{rime}{tone}")).unwrap();
                assert!(v.layout_violations().is_empty(), "{rime}{tone}");
            }
        }
    }
}
