//! Column-format corpora, BIO span extraction and entity-level micro
//! precision / recall / F1.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// A parsed BIO tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

impl<'a> Tag<'a> {
    pub fn parse(s: &'a str) -> Option<Tag<'a>> {
        if s == "O" {
            return Some(Tag::Outside);
        }
        let (prefix, kind) = s.split_once('-')?;
        if kind.is_empty() || kind.chars().any(char::is_whitespace) {
            return None;
        }
        match prefix {
            "B" => Some(Tag::Begin(kind)),
            "I" => Some(Tag::Inside(kind)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub chars: Vec<char>,
    pub tags: Vec<String>,
}

impl LabeledSentence {
    pub fn new(chars: Vec<char>, tags: Vec<String>) -> Result<Self> {
        if chars.len() != tags.len() {
            return Err(Error::LengthMismatch(format!(
                "{} characters, {} tags",
                chars.len(),
                tags.len()
            )));
        }
        Ok(LabeledSentence { chars, tags })
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn text(&self) -> String {
        self.chars.iter().collect()
    }
}

/// Sentences of `(character, tag)` pairs in the BIO scheme.
///
/// On disk: one `character TAB tag` per line, a blank line between
/// sentences.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledCorpus {
    pub sentences: Vec<LabeledSentence>,
}

impl LabeledCorpus {
    pub fn new(sentences: Vec<LabeledSentence>) -> Self {
        LabeledCorpus { sentences }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sentences = Vec::new();
        let mut chars = Vec::new();
        let mut tags = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let raw = raw.trim_end_matches(['\r', '\n']);
            if raw.trim().is_empty() {
                if !chars.is_empty() {
                    sentences.push(LabeledSentence {
                        chars: std::mem::take(&mut chars),
                        tags: std::mem::take(&mut tags),
                    });
                }
                continue;
            }
            let fields: Vec<&str> = raw.split('\t').collect();
            let [token, tag] = fields[..] else {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("expected `char TAB tag`, got {} fields", fields.len()),
                });
            };
            let mut it = token.chars();
            let (Some(c), None) = (it.next(), it.next()) else {
                return Err(Error::MalformedLine {
                    line,
                    reason: format!("token {token:?} is not a single character"),
                });
            };
            let tag = tag.trim();
            if Tag::parse(tag).is_none() {
                return Err(Error::UnknownTagFormat {
                    line,
                    tag: tag.to_string(),
                });
            }
            chars.push(c);
            tags.push(tag.to_string());
        }
        if !chars.is_empty() {
            sentences.push(LabeledSentence { chars, tags });
        }
        if sentences.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        Ok(LabeledCorpus { sentences })
    }

    pub fn to_conll(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            for (c, t) in s.chars.iter().zip(&s.tags) {
                let _ = writeln!(out, "{c}\t{t}");
            }
            out.push('\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, LabeledSentence> {
        self.sentences.iter()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(LabeledSentence::len).sum()
    }

    /// Entity types mentioned by any tag, sorted.
    pub fn entity_types(&self) -> BTreeSet<String> {
        self.sentences
            .iter()
            .flat_map(|s| &s.tags)
            .filter_map(|t| match Tag::parse(t) {
                Some(Tag::Begin(k) | Tag::Inside(k)) => Some(k.to_string()),
                _ => None,
            })
            .collect()
    }
}

/// Inclusive character span of one entity.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EntitySpan {
    pub start: usize,
    pub end: usize,
    pub kind: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SpanExtraction {
    pub spans: Vec<EntitySpan>,
    /// Number of `I-X` tags that had to be read as `B-X`.
    pub repairs: usize,
}

/// Maximal `B-X (I-X)*` runs. An `I-X` that does not continue an `X` span
/// opens a new span and is counted as a repair. Unparseable tags count as
/// `O`.
pub fn extract_spans<S: AsRef<str>>(tags: &[S]) -> SpanExtraction {
    let mut out = SpanExtraction::default();
    let mut open: Option<(usize, &str)> = None;
    let close = |open: &mut Option<(usize, &str)>, end: usize, spans: &mut Vec<EntitySpan>| {
        if let Some((start, kind)) = open.take() {
            spans.push(EntitySpan {
                start,
                end,
                kind: kind.to_string(),
            });
        }
    };
    for (i, tag) in tags.iter().enumerate() {
        match Tag::parse(tag.as_ref()) {
            Some(Tag::Begin(kind)) => {
                close(&mut open, i.wrapping_sub(1), &mut out.spans);
                open = Some((i, kind));
            }
            Some(Tag::Inside(kind)) => {
                if open.is_some_and(|(_, k)| k == kind) {
                    continue;
                }
                close(&mut open, i.wrapping_sub(1), &mut out.spans);
                open = Some((i, kind));
                out.repairs += 1;
            }
            Some(Tag::Outside) | None => close(&mut open, i.wrapping_sub(1), &mut out.spans),
        }
    }
    close(&mut open, tags.len().wrapping_sub(1), &mut out.spans);
    out
}

/// Render spans back to BIO tags for a sentence of length `len`.
pub fn spans_to_tags(spans: &[EntitySpan], len: usize) -> Vec<String> {
    let mut tags = vec!["O".to_string(); len];
    for s in spans {
        tags[s.start] = format!("B-{}", s.kind);
        for t in &mut tags[s.start + 1..=s.end] {
            *t = format!("I-{}", s.kind);
        }
    }
    tags
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
    pub repairs: usize,
}

impl Metrics {
    pub fn from_counts(tp: usize, predicted: usize, gold: usize, repairs: usize) -> Self {
        let precision = if predicted == 0 {
            1.0
        } else {
            tp as f64 / predicted as f64
        };
        let recall = if gold == 0 { 1.0 } else { tp as f64 / gold as f64 };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            precision,
            recall,
            f1,
            true_positives: tp,
            predicted,
            gold,
            repairs,
        }
    }

    /// `precision recall f1 tp predicted gold repairs`, tab separated.
    pub fn tsv_line(&self) -> String {
        format!(
            "{:.6}\t{:.6}\t{:.6}\t{}\t{}\t{}\t{}",
            self.precision,
            self.recall,
            self.f1,
            self.true_positives,
            self.predicted,
            self.gold,
            self.repairs
        )
    }
}

/// Exact-match (start, end, type) span metrics pooled over the corpus.
/// `repairs` counts repairs in the predicted tags.
pub fn micro_metrics<S: AsRef<str>>(gold: &LabeledCorpus, predicted: &[Vec<S>]) -> Result<Metrics> {
    if gold.len() != predicted.len() {
        return Err(Error::LengthMismatch(format!(
            "{} gold sentences, {} predicted",
            gold.len(),
            predicted.len()
        )));
    }
    let (mut tp, mut n_pred, mut n_gold, mut repairs) = (0, 0, 0, 0);
    for (i, (g, p)) in gold.sentences.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(Error::LengthMismatch(format!(
                "sentence {i}: {} gold tags, {} predicted",
                g.len(),
                p.len()
            )));
        }
        let gold_spans: HashSet<EntitySpan> = extract_spans(&g.tags).spans.into_iter().collect();
        let pred = extract_spans(p);
        repairs += pred.repairs;
        n_gold += gold_spans.len();
        n_pred += pred.spans.len();
        tp += pred.spans.iter().filter(|s| gold_spans.contains(s)).count();
    }
    Ok(Metrics::from_counts(tp, n_pred, n_gold, repairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn span(start: usize, end: usize, kind: &str) -> EntitySpan {
        EntitySpan {
            start,
            end,
            kind: kind.into(),
        }
    }

    fn tags(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn loads_column_format() {
        let c = LabeledCorpus::parse("上\tB-LOC\n海\tI-LOC\n\n\n").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.sentences[0].len(), 2);
        assert_eq!(c.token_count(), 2);
        assert_eq!(LabeledCorpus::parse(&c.to_conll()).unwrap(), c);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(LabeledCorpus::parse(""), Err(Error::EmptyCorpus)));
        assert!(matches!(LabeledCorpus::parse("\n\n"), Err(Error::EmptyCorpus)));
        assert!(matches!(
            LabeledCorpus::parse("上\tX-LOC\n"),
            Err(Error::UnknownTagFormat { line: 1, .. })
        ));
        assert!(matches!(
            LabeledCorpus::parse("上 B-LOC\n"),
            Err(Error::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            LabeledCorpus::parse("上海\tB-LOC\n"),
            Err(Error::MalformedLine { .. })
        ));
    }

    #[test]
    fn span_examples() {
        let e = extract_spans(&["B-PER", "I-PER", "O"]);
        assert_eq!(e.spans, vec![span(0, 1, "PER")]);
        assert_eq!(e.repairs, 0);
        assert!(extract_spans(&["O", "O", "O"]).spans.is_empty());
        let e = extract_spans(&["I-LOC", "I-LOC"]);
        assert_eq!(e.spans, vec![span(0, 1, "LOC")]);
        assert_eq!(e.repairs, 1);
        let e = extract_spans(&["B-PER", "I-LOC", "B-LOC", "B-LOC"]);
        assert_eq!(
            e.spans,
            vec![span(0, 0, "PER"), span(1, 1, "LOC"), span(2, 2, "LOC"), span(3, 3, "LOC")]
        );
        assert_eq!(e.repairs, 1);
    }

    #[test]
    fn metric_examples() {
        let gold = LabeledCorpus::parse("张\tB-PER\n伟\tI-PER\n在\tO\n上\tB-LOC\n海\tI-LOC\n").unwrap();
        let same = vec![gold.sentences[0].tags.clone()];
        let m = micro_metrics(&gold, &same).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));

        let half = vec![tags(&["B-PER", "I-PER", "B-ORG", "O", "O"])];
        let m = micro_metrics(&gold, &half).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.5, 0.5, 0.5));
        assert_eq!((m.true_positives, m.predicted, m.gold), (1, 2, 2));

        let none = vec![tags(&["O"; 5])];
        let m = micro_metrics(&gold, &none).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 0.0, 0.0));

        assert!(matches!(
            micro_metrics(&gold, &[tags(&["O"])]),
            Err(Error::LengthMismatch(_))
        ));
        assert!(matches!(
            micro_metrics::<String>(&gold, &[]),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn f1_is_monotone_in_tp() {
        let mut last = -1.0;
        for tp in 0..=10 {
            let f1 = Metrics::from_counts(tp, 10, 12, 0).f1;
            assert!(f1 > last);
            last = f1;
        }
    }

    fn well_formed_tags() -> impl Strategy<Value = Vec<String>> {
        // spans rendered from random (kind, length, gap) runs
        prop::collection::vec((0usize..3, 1usize..4, 0usize..3), 0..6).prop_map(|runs| {
            let kinds = ["PER", "LOC", "ORG"];
            let mut out = Vec::new();
            for (k, len, gap) in runs {
                out.extend(std::iter::repeat_n("O".to_string(), gap));
                out.push(format!("B-{}", kinds[k]));
                out.extend(std::iter::repeat_n(format!("I-{}", kinds[k]), len - 1));
            }
            out
        })
    }

    proptest! {
        #[test]
        fn spans_round_trip(t in well_formed_tags()) {
            let e = extract_spans(&t);
            prop_assert_eq!(e.repairs, 0);
            prop_assert_eq!(spans_to_tags(&e.spans, t.len()), t);
        }

        #[test]
        fn metrics_ignore_sentence_order(
            sents in prop::collection::vec((well_formed_tags(), well_formed_tags()), 1..6),
            rot in 0usize..6,
        ) {
            let mk = |pairs: &[(Vec<String>, Vec<String>)]| {
                let mut gold = Vec::new();
                let mut pred = Vec::new();
                for (g, p) in pairs {
                    let n = g.len().max(p.len()).max(1);
                    let pad = |v: &Vec<String>| {
                        let mut v = v.clone();
                        v.resize(n, "O".into());
                        v
                    };
                    gold.push(LabeledSentence::new(vec!['x'; n], pad(g)).unwrap());
                    pred.push(pad(p));
                }
                micro_metrics(&LabeledCorpus::new(gold), &pred).unwrap()
            };
            let mut rotated = sents.clone();
            let len = rotated.len();
            rotated.rotate_left(rot % len);
            prop_assert_eq!(mk(&sents), mk(&rotated));
        }
    }
}
