//! Template-based synthetic NER corpora.
//!
//! Sentences come from templates with `{PER}`, `{LOC}` and `{ORG}` slots.
//! Each slot is filled with a gazetteer entity of that type, or with
//! probability `filler_probability` by a plain word tagged `O`.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::evaluation::{LabeledCorpus, LabeledSentence};

const BUNDLED_GAZETTEER: &str = include_str!("../data/gazetteer.tsv");
const BUNDLED_TEMPLATES: &str = include_str!("../data/templates.txt");
const BUNDLED_FILLERS: &str = include_str!("../data/fillers.tsv");

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Text(String),
    Slot(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub kind: String,
    pub surface: String,
}

#[derive(Debug, Clone)]
pub struct Synthesizer {
    templates: Vec<Vec<Piece>>,
    entities: BTreeMap<String, Vec<String>>,
    fillers: BTreeMap<String, Vec<String>>,
    pub filler_probability: f64,
}

fn typed_lines(text: &str, what: &str) -> Result<BTreeMap<String, Vec<String>>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (kind, surface) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
            line: i + 1,
            reason: format!("{what} entry needs TYPE<TAB>text"),
        })?;
        if surface.trim().is_empty() {
            return Err(Error::MalformedLine {
                line: i + 1,
                reason: format!("empty {what} entry"),
            });
        }
        out.entry(kind.trim().to_string())
            .or_default()
            .push(surface.trim().to_string());
    }
    Ok(out)
}

fn parse_template(line: &str, lineno: usize) -> Result<Vec<Piece>> {
    let mut pieces = Vec::new();
    let mut rest = line;
    while let Some(open) = rest.find('{') {
        if open > 0 {
            pieces.push(Piece::Text(rest[..open].to_string()));
        }
        let close = rest[open..].find('}').ok_or_else(|| Error::MalformedLine {
            line: lineno,
            reason: "unclosed slot".into(),
        })?;
        pieces.push(Piece::Slot(rest[open + 1..open + close].to_string()));
        rest = &rest[open + close + 1..];
    }
    if !rest.is_empty() {
        pieces.push(Piece::Text(rest.to_string()));
    }
    Ok(pieces)
}

impl Synthesizer {
    /// The bundled 50-entity gazetteer, templates and filler words.
    pub fn bundled() -> Self {
        Self::parse(BUNDLED_GAZETTEER, BUNDLED_TEMPLATES, BUNDLED_FILLERS)
            .expect("bundled synthesis data is valid")
    }

    pub fn parse(gazetteer: &str, templates: &str, fillers: &str) -> Result<Self> {
        let entities = typed_lines(gazetteer, "gazetteer")?;
        let fillers = typed_lines(fillers, "filler")?;
        let mut parsed = Vec::new();
        for (i, raw) in templates.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let t = parse_template(line, i + 1)?;
            for p in &t {
                if let Piece::Slot(kind) = p {
                    if !entities.contains_key(kind) {
                        return Err(Error::MalformedLine {
                            line: i + 1,
                            reason: format!("slot {{{kind}}} has no gazetteer entries"),
                        });
                    }
                }
            }
            parsed.push(t);
        }
        if parsed.is_empty() {
            return Err(Error::InvalidConfig("no templates".into()));
        }
        Ok(Synthesizer {
            templates: parsed,
            entities,
            fillers,
            filler_probability: 0.35,
        })
    }

    pub fn entities(&self) -> Vec<Entity> {
        self.entities
            .iter()
            .flat_map(|(k, v)| {
                v.iter().map(move |s| Entity {
                    kind: k.clone(),
                    surface: s.clone(),
                })
            })
            .collect()
    }

    pub fn entity_types(&self) -> Vec<String> {
        self.entities.keys().cloned().collect()
    }

    /// Every character any generated sentence can contain.
    pub fn alphabet(&self) -> BTreeSet<char> {
        let mut out = BTreeSet::new();
        for t in &self.templates {
            for p in t {
                if let Piece::Text(s) = p {
                    out.extend(s.chars());
                }
            }
        }
        for words in self.entities.values().chain(self.fillers.values()) {
            for w in words {
                out.extend(w.chars());
            }
        }
        out
    }

    fn sentence(&self, rng: &mut ChaCha8Rng) -> LabeledSentence {
        let template = self.templates.choose(rng).expect("templates non-empty");
        let mut chars = Vec::new();
        let mut tags = Vec::new();
        for piece in template {
            match piece {
                Piece::Text(s) => {
                    for c in s.chars() {
                        chars.push(c);
                        tags.push("O".to_string());
                    }
                }
                Piece::Slot(kind) => {
                    let fillers = self.fillers.get(kind).filter(|f| !f.is_empty());
                    let use_filler = rng.random::<f64>() < self.filler_probability;
                    match fillers {
                        Some(f) if use_filler => {
                            let word = f.choose(rng).expect("non-empty");
                            for c in word.chars() {
                                chars.push(c);
                                tags.push("O".to_string());
                            }
                        }
                        _ => {
                            let word = self.entities[kind].choose(rng).expect("non-empty");
                            for (i, c) in word.chars().enumerate() {
                                chars.push(c);
                                let prefix = if i == 0 { "B" } else { "I" };
                                tags.push(format!("{prefix}-{kind}"));
                            }
                        }
                    }
                }
            }
        }
        LabeledSentence { chars, tags }
    }

    pub fn generate(&self, n: usize, seed: u64) -> LabeledCorpus {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        LabeledCorpus::new((0..n).map(|_| self.sentence(&mut rng)).collect())
    }
}

/// Splits a corpus into consecutive train, dev and test parts with the given
/// sizes for dev and test.
pub fn split(corpus: &LabeledCorpus, dev: usize, test: usize) -> Result<(LabeledCorpus, LabeledCorpus, LabeledCorpus)> {
    let n = corpus.len();
    if dev + test >= n {
        return Err(Error::InvalidConfig(format!(
            "cannot take {dev} dev and {test} test sentences from {n}"
        )));
    }
    let s = &corpus.sentences;
    let train_end = n - dev - test;
    Ok((
        LabeledCorpus::new(s[..train_end].to_vec()),
        LabeledCorpus::new(s[train_end..train_end + dev].to_vec()),
        LabeledCorpus::new(s[train_end + dev..].to_vec()),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::extract_spans;
    use crate::tables::Tables;

    #[test]
    fn bundled_gazetteer_has_fifty_entities_of_three_types() {
        let s = Synthesizer::bundled();
        assert_eq!(s.entities().len(), 50);
        assert_eq!(s.entity_types(), ["LOC", "ORG", "PER"]);
    }

    #[test]
    fn generation_is_seeded() {
        let s = Synthesizer::bundled();
        assert_eq!(s.generate(30, 4), s.generate(30, 4));
        assert_ne!(s.generate(30, 4), s.generate(30, 5));
    }

    #[test]
    fn entities_come_from_the_gazetteer() {
        let s = Synthesizer::bundled();
        let known: BTreeSet<(String, String)> = s
            .entities()
            .into_iter()
            .map(|e| (e.kind, e.surface))
            .collect();
        let corpus = s.generate(200, 1);
        let mut fillers = 0;
        for sent in corpus.iter() {
            let ex = extract_spans(&sent.tags);
            assert_eq!(ex.repairs, 0);
            for span in ex.spans {
                let text: String = sent.chars[span.start..=span.end].iter().collect();
                assert!(known.contains(&(span.kind.clone(), text)));
            }
            if sent.tags.iter().all(|t| t == "O") {
                fillers += 1;
            }
        }
        assert!(fillers > 0);
    }

    #[test]
    fn bundled_tables_cover_every_synthetic_character() {
        let t = Tables::bundled();
        let inv = t.inventory().unwrap();
        let sem = t.semantic.as_ref().unwrap();
        for c in Synthesizer::bundled().alphabet() {
            assert!(inv.contains(c) && sem.contains(c), "{c}");
        }
    }

    #[test]
    fn template_errors() {
        assert!(Synthesizer::parse("PER\t张三\n", "{PER}在{LOC}\n", "").is_err());
        assert!(Synthesizer::parse("PER\t张三\n", "{PER在\n", "").is_err());
        assert!(Synthesizer::parse("PER 张三\n", "{PER}\n", "").is_err());
        assert!(Synthesizer::parse("PER\t张三\n", "", "").is_err());
    }

    #[test]
    fn split_sizes() {
        let c = Synthesizer::bundled().generate(20, 0);
        let (a, b, t) = split(&c, 3, 5).unwrap();
        assert_eq!((a.len(), b.len(), t.len()), (12, 3, 5));
        assert!(split(&c, 10, 10).is_err());
    }
}
