//! Single-file model format.
//!
//! Layout: the 8-byte magic `HANFUSE\0`, a little-endian `u32` format
//! version, a little-endian `u64` header length, a UTF-8 JSON header
//! describing the architecture, tag set and parameter blocks, then every
//! block's values as little-endian `f64` in header order.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::model::{ModelConfig, TaggerModel};
use super::tagset::TagSet;

pub const MAGIC: &[u8; 8] = b"HANFUSE\0";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BlockInfo {
    name: String,
    shape: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Header {
    config: ModelConfig,
    tags: Vec<String>,
    blocks: Vec<BlockInfo>,
}

pub fn to_bytes(model: &TaggerModel) -> Vec<u8> {
    let mut blocks = Vec::new();
    model.visit_params(|name, (r, c), _| {
        blocks.push(BlockInfo {
            name: name.to_string(),
            shape: [r, c],
        })
    });
    let header = Header {
        config: model.config.clone(),
        tags: model.tags.labels().to_vec(),
        blocks,
    };
    let json = serde_json::to_vec(&header).expect("header serialises");
    let mut out = Vec::with_capacity(20 + json.len() + 8 * model.num_params());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    model.visit_params(|_, _, values| {
        for v in values {
            out.extend_from_slice(&v.to_le_bytes());
        }
    });
    out
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &str) -> Result<&'a [u8]> {
    if bytes.len() < n {
        return Err(Error::Checkpoint(format!("truncated while reading {what}")));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

pub fn from_bytes(mut bytes: &[u8]) -> Result<TaggerModel> {
    if take(&mut bytes, 8, "magic")? != MAGIC {
        return Err(Error::Checkpoint("not a hanfuse model file".into()));
    }
    let version = u32::from_le_bytes(take(&mut bytes, 4, "version")?.try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported format version {version}"
        )));
    }
    let len = u64::from_le_bytes(take(&mut bytes, 8, "header length")?.try_into().unwrap());
    let len = usize::try_from(len).map_err(|_| Error::Checkpoint("header too large".into()))?;
    let header: Header = serde_json::from_slice(take(&mut bytes, len, "header")?)
        .map_err(|e| Error::Checkpoint(format!("bad header: {e}")))?;

    let tags = TagSet::from_labels(&header.tags)?;
    // the seeded init is overwritten below; it only fixes the layout
    let mut model = TaggerModel::new(header.config, tags, &mut ChaCha8Rng::seed_from_u64(0))?;

    let mut expected = Vec::new();
    model.visit_params(|name, (r, c), _| {
        expected.push(BlockInfo {
            name: name.to_string(),
            shape: [r, c],
        })
    });
    if expected != header.blocks {
        return Err(Error::Checkpoint(
            "parameter blocks do not match the declared architecture".into(),
        ));
    }
    let n = model.num_params();
    if bytes.len() != 8 * n {
        return Err(Error::Checkpoint(format!(
            "expected {} bytes of parameters, found {}",
            8 * n,
            bytes.len()
        )));
    }
    let values: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Checkpoint("non-finite parameter".into()));
    }
    model.set_flat_params(&values)?;
    Ok(model)
}

pub fn save(model: &TaggerModel, path: impl AsRef<Path>) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&to_bytes(model))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<TaggerModel> {
    from_bytes(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fusion::StrategyKind;

    fn model(strategy: StrategyKind) -> TaggerModel {
        let cfg = ModelConfig::new(strategy, 5).with_hidden(3);
        let tags = TagSet::from_entity_types(["LOC", "ORG", "PER"]);
        TaggerModel::new(cfg, tags, &mut ChaCha8Rng::seed_from_u64(42)).unwrap()
    }

    #[test]
    fn round_trips_every_strategy() {
        for s in StrategyKind::ALL {
            let m = model(s);
            let back = from_bytes(&to_bytes(&m)).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        let m = model(StrategyKind::MultiBranch);
        save(&m, &path).unwrap();
        assert_eq!(load(&path).unwrap(), m);
    }

    #[test]
    fn rejects_damage() {
        let bytes = to_bytes(&model(StrategyKind::Concat));
        assert!(from_bytes(&bytes[..bytes.len() - 8]).is_err());
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(from_bytes(&bad).is_err());
        let mut bad = bytes.clone();
        bad[8] = 9;
        assert!(from_bytes(&bad).is_err());
        let mut extra = bytes;
        extra.extend_from_slice(&[0; 8]);
        assert!(from_bytes(&extra).is_err());
    }

    #[test]
    fn rejects_shape_edits() {
        let bytes = to_bytes(&model(StrategyKind::Concat));
        let len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
        let json = std::str::from_utf8(&bytes[20..20 + len]).unwrap();
        let edited = json.replacen("\"hidden\":3", "\"hidden\":4", 1);
        assert_ne!(edited, json);
        let mut out = bytes[..12].to_vec();
        out.extend_from_slice(&(edited.len() as u64).to_le_bytes());
        out.extend_from_slice(edited.as_bytes());
        out.extend_from_slice(&bytes[20 + len..]);
        assert!(matches!(from_bytes(&out), Err(Error::Checkpoint(_))));
    }
}
