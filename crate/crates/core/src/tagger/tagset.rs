use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::evaluation::{LabeledCorpus, Tag};

/// Ordered BIO label inventory. Always contains `O`, and every `I-X` has a
/// matching `B-X`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl TagSet {
    pub fn from_labels<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            if Tag::parse(l).is_none() {
                return Err(Error::UnknownTagFormat {
                    line: 0,
                    tag: l.clone(),
                });
            }
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::InvalidConfig(format!("duplicate tag {l:?}")));
            }
        }
        if !index.contains_key("O") {
            return Err(Error::InvalidConfig("tag set lacks O".into()));
        }
        for l in &labels {
            if let Some(Tag::Inside(kind)) = Tag::parse(l) {
                if !index.contains_key(&format!("B-{kind}")) {
                    return Err(Error::InvalidConfig(format!("{l} without B-{kind}")));
                }
            }
        }
        Ok(TagSet { labels, index })
    }

    /// `O`, then `B-X`, `I-X` for every entity type in sorted order.
    pub fn from_corpus(corpus: &LabeledCorpus) -> Self {
        Self::from_entity_types(corpus.entity_types())
    }

    pub fn from_entity_types<I, S>(types: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut kinds: Vec<String> = types.into_iter().map(|s| s.as_ref().to_string()).collect();
        kinds.sort();
        kinds.dedup();
        let mut labels = vec!["O".to_string()];
        for k in kinds {
            labels.push(format!("B-{k}"));
            labels.push(format!("I-{k}"));
        }
        Self::from_labels(&labels).expect("generated tag set is well formed")
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, tag: &str) -> Result<usize> {
        self.index
            .get(tag)
            .copied()
            .ok_or_else(|| Error::TagNotInTagSet(tag.to_string()))
    }

    pub fn encode<S: AsRef<str>>(&self, tags: &[S]) -> Result<Vec<usize>> {
        tags.iter().map(|t| self.index_of(t.as_ref())).collect()
    }

    pub fn decode(&self, ids: &[usize]) -> Vec<String> {
        ids.iter().map(|&i| self.labels[i].clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn built_from_corpus() {
        let c = LabeledCorpus::parse("上\tB-LOC\n海\tI-LOC\n张\tI-PER\n").unwrap();
        let t = TagSet::from_corpus(&c);
        assert_eq!(t.labels(), ["O", "B-LOC", "I-LOC", "B-PER", "I-PER"]);
        assert_eq!(t.index_of("I-PER").unwrap(), 4);
        assert!(matches!(t.index_of("B-ORG"), Err(Error::TagNotInTagSet(_))));
    }

    #[test]
    fn validation() {
        assert!(TagSet::from_labels(&["B-X", "I-X"]).is_err());
        assert!(TagSet::from_labels(&["O", "I-X"]).is_err());
        assert!(TagSet::from_labels(&["O", "O"]).is_err());
        assert!(TagSet::from_labels(&["O", "B-X", "I-X"]).is_ok());
    }
}
