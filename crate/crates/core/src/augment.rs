//! Character-substitution variants of labelled corpora.
//!
//! Characters inside gold entity spans are replaced, each independently with
//! probability `p`, by one of their nearest neighbours in a glyph or
//! phonetic space. Tags never change.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{extract_spans, LabeledCorpus, LabeledSentence};
use crate::similarity::{EmbeddingIndex, FeatureSpace};
use crate::tables::{CharacterInventory, Tables};
use crate::Mode;

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    /// Spaces to draw neighbours from; one is picked uniformly per replacement.
    pub spaces: Vec<FeatureSpace>,
    /// Per-character replacement probability. Default 0.3 (an operational
    /// choice, not a measured rate).
    pub probability: f64,
    /// Size of the neighbour pool. Default 5.
    pub k: usize,
    /// Neighbours farther than this are dropped from the pool.
    pub max_distance: Option<f64>,
    pub seed: u64,
    /// Emit each modified sentence twice: original, then substituted.
    pub emit_pairs: bool,
    /// Permit `FeatureSpace::Semantic` in `spaces`.
    pub allow_semantic: bool,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        AugmentConfig {
            spaces: vec![FeatureSpace::Glyph, FeatureSpace::Phonetic],
            probability: 0.3,
            k: 5,
            max_distance: None,
            seed: 0,
            emit_pairs: false,
            allow_semantic: false,
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.spaces.is_empty() {
            return Err(Error::InvalidConfig("no substitution space selected".into()));
        }
        if !self.allow_semantic && self.spaces.contains(&FeatureSpace::Semantic) {
            return Err(Error::InvalidConfig(
                "semantic substitution must be enabled explicitly".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.probability) {
            return Err(Error::InvalidConfig(format!(
                "probability {} outside [0, 1]",
                self.probability
            )));
        }
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.max_distance.is_some_and(|d| d.is_nan() || d < 0.0) {
            return Err(Error::InvalidConfig("max distance must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubstitutionRecord {
    /// Index into the augmented corpus.
    pub sentence: usize,
    pub position: usize,
    pub original: char,
    pub replacement: char,
    pub space: FeatureSpace,
    pub distance: f64,
}

pub const RECORDS_HEADER: &str = "sentence\tposition\toriginal\treplacement\tspace\tdistance";

pub fn records_to_tsv(records: &[SubstitutionRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            r.sentence, r.position, r.original, r.replacement, r.space, r.distance
        );
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct AugmentStats {
    /// Entity characters seen.
    pub entity_chars: usize,
    /// Characters selected for replacement.
    pub selected: usize,
    pub replaced: usize,
    /// Selected but absent from the inventory of the drawn space.
    pub uncovered: usize,
    /// Selected but every candidate was filtered out.
    pub empty_pool: usize,
    pub modified_sentences: usize,
}

#[derive(Debug, Clone)]
pub struct Augmented {
    pub corpus: LabeledCorpus,
    pub records: Vec<SubstitutionRecord>,
    pub stats: AugmentStats,
}

/// `(position, original, replacement, space, distance)` for one substitution.
type Change = (usize, char, char, FeatureSpace, f64);

pub struct Augmenter<'a> {
    tables: &'a Tables,
    indexes: Vec<EmbeddingIndex>,
    config: AugmentConfig,
}

impl<'a> Augmenter<'a> {
    pub fn new(tables: &'a Tables, inventory: &CharacterInventory, config: AugmentConfig) -> Result<Self> {
        config.validate()?;
        let indexes = config
            .spaces
            .iter()
            .map(|&s| EmbeddingIndex::build(inventory, tables, s))
            .collect();
        Ok(Augmenter {
            tables,
            indexes,
            config,
        })
    }

    pub fn config(&self) -> &AugmentConfig {
        &self.config
    }

    /// Substitutes one sentence with its own random substream. Returns the
    /// new characters and every change made.
    fn substitute_sentence(
        &self,
        index: usize,
        sentence: &LabeledSentence,
        stats: &mut AugmentStats,
    ) -> Result<(Vec<char>, Vec<Change>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(index as u64);
        let mut chars = sentence.chars.clone();
        let mut changes = Vec::new();
        for span in extract_spans(&sentence.tags).spans {
            let members: BTreeSet<char> = sentence.chars[span.start..=span.end].iter().copied().collect();
            for (pos, &original) in sentence.chars.iter().enumerate().take(span.end + 1).skip(span.start) {
                stats.entity_chars += 1;
                if rng.random::<f64>() >= self.config.probability {
                    continue;
                }
                stats.selected += 1;
                let index = &self.indexes[rng.random_range(0..self.indexes.len())];
                if !index.contains(original) {
                    stats.uncovered += 1;
                    warn!("{original} is not in the {} inventory; left unchanged", index.space());
                    continue;
                }
                let query = self.tables.embed(original, index.space(), Mode::Strict)?;
                let mut pool = index.nearest(original, &query, self.config.k, |c| members.contains(&c));
                if let Some(max) = self.config.max_distance {
                    pool.retain(|n| n.distance <= max);
                }
                if pool.is_empty() {
                    stats.empty_pool += 1;
                    continue;
                }
                let pick = &pool[rng.random_range(0..pool.len())];
                chars[pos] = pick.ch;
                stats.replaced += 1;
                changes.push((pos, original, pick.ch, index.space(), pick.distance));
            }
        }
        Ok((chars, changes))
    }

    pub fn augment(&self, corpus: &LabeledCorpus) -> Result<Augmented> {
        let mut stats = AugmentStats::default();
        let mut sentences = Vec::with_capacity(corpus.len());
        let mut records = Vec::new();
        for (i, s) in corpus.iter().enumerate() {
            let (chars, changes) = self.substitute_sentence(i, s, &mut stats)?;
            if changes.is_empty() {
                sentences.push(s.clone());
                continue;
            }
            stats.modified_sentences += 1;
            if self.config.emit_pairs {
                sentences.push(s.clone());
            }
            let out_index = sentences.len();
            records.extend(changes.into_iter().map(
                |(position, original, replacement, space, distance)| SubstitutionRecord {
                    sentence: out_index,
                    position,
                    original,
                    replacement,
                    space,
                    distance,
                },
            ));
            sentences.push(LabeledSentence::new(chars, s.tags.clone())?);
        }
        if stats.uncovered > 0 {
            warn!("{} selected characters were not covered by the inventory", stats.uncovered);
        }
        Ok(Augmented {
            corpus: LabeledCorpus::new(sentences),
            records,
            stats,
        })
    }
}

pub fn substitute_corpus(
    corpus: &LabeledCorpus,
    inventory: &CharacterInventory,
    tables: &Tables,
    config: &AugmentConfig,
) -> Result<Augmented> {
    Augmenter::new(tables, inventory, config.clone())?.augment(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{distance, knn};
    use proptest::prelude::*;

    fn corpus() -> LabeledCorpus {
        LabeledCorpus::parse(
            "张\tB-PER\n伟\tI-PER\n去\tO\n上\tB-LOC\n海\tI-LOC\n\n\
             我\tO\n在\tO\n北\tB-LOC\n京\tI-LOC\n工\tO\n作\tO\n",
        )
        .unwrap()
    }

    fn config(p: f64, k: usize, spaces: Vec<FeatureSpace>, seed: u64) -> AugmentConfig {
        AugmentConfig {
            spaces,
            probability: p,
            k,
            seed,
            ..AugmentConfig::default()
        }
    }

    #[test]
    fn zero_probability_is_identity() {
        let t = Tables::bundled();
        let inv = t.inventory().unwrap();
        let c = corpus();
        let out = substitute_corpus(&c, &inv, &t, &config(0.0, 5, vec![FeatureSpace::Glyph], 1)).unwrap();
        assert_eq!(out.corpus, c);
        assert!(out.records.is_empty());
    }

    #[test]
    fn certain_single_neighbour_matches_knn() {
        let t = Tables::bundled();
        let inv = t.inventory().unwrap();
        let c = corpus();
        for space in [FeatureSpace::Glyph, FeatureSpace::Phonetic] {
            let out = substitute_corpus(&c, &inv, &t, &config(1.0, 1, vec![space], 3)).unwrap();
            assert_eq!(out.stats.replaced, 6);
            for r in &out.records {
                let src = &c.sentences[r.sentence];
                let members: BTreeSet<char> = src
                    .chars
                    .iter()
                    .zip(&src.tags)
                    .filter(|(_, t)| *t != "O")
                    .map(|(c, _)| *c)
                    .collect();
                let expected = knn(r.original, space, inv.len() - 1, &inv, &t)
                    .unwrap()
                    .neighbors
                    .into_iter()
                    .find(|n| !members.contains(&n.ch))
                    .unwrap();
                assert_eq!(r.replacement, expected.ch);
                assert_eq!(r.distance, expected.distance);
            }
        }
    }

    #[test]
    fn pairs_interleave_original_and_variant() {
        let t = Tables::bundled();
        let inv = t.inventory().unwrap();
        let c = corpus();
        let mut cfg = config(1.0, 3, vec![FeatureSpace::Glyph], 5);
        cfg.emit_pairs = true;
        let out = substitute_corpus(&c, &inv, &t, &cfg).unwrap();
        assert_eq!(out.corpus.len(), 4);
        assert_eq!(out.corpus.sentences[0], c.sentences[0]);
        assert_eq!(out.corpus.sentences[2], c.sentences[1]);
        assert!(out.records.iter().all(|r| r.sentence == 1 || r.sentence == 3));
    }

    #[test]
    fn far_neighbours_are_filtered() {
        let t = Tables::bundled();
        let inv = t.inventory().unwrap();
        let mut cfg = config(1.0, 5, vec![FeatureSpace::Glyph], 5);
        cfg.max_distance = Some(0.0);
        let out = substitute_corpus(&corpus(), &inv, &t, &cfg).unwrap();
        assert_eq!(out.stats.replaced + out.stats.empty_pool, out.stats.selected);
        assert!(out.records.iter().all(|r| r.distance == 0.0));
    }

    #[test]
    fn semantic_needs_opt_in() {
        let cfg = config(0.5, 5, vec![FeatureSpace::Semantic], 0);
        assert!(cfg.validate().is_err());
        assert!(AugmentConfig {
            allow_semantic: true,
            ..cfg
        }
        .validate()
        .is_ok());
        assert!(config(0.5, 0, vec![FeatureSpace::Glyph], 0).validate().is_err());
        assert!(config(1.5, 1, vec![FeatureSpace::Glyph], 0).validate().is_err());
        assert!(config(0.5, 1, vec![], 0).validate().is_err());
    }

    #[test]
    fn records_tsv_has_header() {
        let r = SubstitutionRecord {
            sentence: 0,
            position: 1,
            original: '浦',
            replacement: '傅',
            space: FeatureSpace::Glyph,
            distance: 2.0,
        };
        assert_eq!(records_to_tsv(&[r]), format!("{RECORDS_HEADER}\n0\t1\t浦\t傅\tglyph\t2\n"));
    }

    #[test]
    fn replacement_rate_is_binomial() {
        let t = Tables::bundled();
        let inv = t.inventory().unwrap();
        let c = corpus();
        let p = 0.4;
        let mut selected = 0;
        let mut total = 0;
        for seed in 0..10 {
            let out = substitute_corpus(&c, &inv, &t, &config(p, 5, vec![FeatureSpace::Glyph], seed)).unwrap();
            selected += out.stats.selected;
            total += out.stats.entity_chars;
        }
        let mean = p * total as f64;
        let sd = (total as f64 * p * (1.0 - p)).sqrt();
        assert!((selected as f64 - mean).abs() <= 3.0 * sd);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn labels_and_context_are_preserved(p in 0.0f64..=1.0, k in 1usize..8, seed in 0u64..1000, pairs: bool) {
            let t = Tables::bundled();
            let inv = t.inventory().unwrap();
            let c = corpus();
            let mut cfg = config(p, k, vec![FeatureSpace::Glyph, FeatureSpace::Phonetic], seed);
            cfg.emit_pairs = pairs;
            let a = substitute_corpus(&c, &inv, &t, &cfg).unwrap();
            let b = substitute_corpus(&c, &inv, &t, &cfg).unwrap();
            prop_assert_eq!(&a.corpus, &b.corpus);
            prop_assert_eq!(&a.records, &b.records);

            let mut src = 0;
            for (i, s) in a.corpus.iter().enumerate() {
                let orig = &c.sentences[src];
                prop_assert_eq!(&s.tags, &orig.tags);
                for (j, tag) in s.tags.iter().enumerate() {
                    if tag == "O" {
                        prop_assert_eq!(s.chars[j], orig.chars[j]);
                    }
                }
                let is_first_of_pair = pairs && s == orig && a.records.iter().any(|r| r.sentence == i + 1);
                if !is_first_of_pair {
                    src += 1;
                }
            }
            prop_assert_eq!(src, c.len());
            for r in &a.records {
                prop_assert_ne!(r.original, r.replacement);
                prop_assert_ne!(&a.corpus.sentences[r.sentence].tags[r.position], "O");
                prop_assert_eq!(r.distance, distance(r.original, r.replacement, r.space, &t).unwrap());
            }
        }
    }
}
