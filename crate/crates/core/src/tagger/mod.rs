//! BiLSTM-CRF sequence tagger over fused character features.

pub mod checkpoint;
pub mod crf;
pub mod lstm;
pub mod model;
pub mod tagset;
pub mod train;

pub use crf::CrfParams;
pub use lstm::BiLstm;
pub use model::{Branch, ModelConfig, TaggerModel};
pub use tagset::TagSet;
pub use train::{train, EpochLog, TrainConfig};
