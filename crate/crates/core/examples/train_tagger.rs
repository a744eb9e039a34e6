//! Train a Concat tagger on synthetic data, save it, reload it and tag a
//! sentence with a substituted entity.
//!
//! Usage: `cargo run --release --example train_tagger [strategy] [epochs]`

use hanfuse::experiments::evaluate;
use hanfuse::synth::{split, Synthesizer};
use hanfuse::tagger::{checkpoint, train, ModelConfig, TagSet, TaggerModel, TrainConfig};
use hanfuse::{Mode, StrategyKind, Tables};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> hanfuse::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let strategy: StrategyKind = args.next().map_or(Ok(StrategyKind::Concat), |s| s.parse())?;
    let epochs: usize = args.next().map_or(15, |s| s.parse().expect("epochs"));

    let tables = Tables::bundled();
    let synth = Synthesizer::bundled();
    let (train_set, dev, test) = split(&synth.generate(300, 3), 40, 40)?;
    let tags = TagSet::from_entity_types(synth.entity_types());
    let config = ModelConfig::new(strategy, tables.semantic_dim()).with_hidden(32);
    let model = TaggerModel::new(config, tags, &mut ChaCha8Rng::seed_from_u64(1))?;
    let train_config = TrainConfig {
        max_epochs: epochs,
        ..TrainConfig::default()
    }
    .with_seed(1);

    let (model, log) = train(model, &tables, &train_set, &dev, &train_config)?;
    for e in &log {
        println!("epoch {:>2}  train {:.4}  dev {:.4}", e.epoch, e.train_loss, e.dev_loss);
    }
    let m = evaluate(&model, &test, &tables)?;
    println!("test  P {:.3}  R {:.3}  F1 {:.3}", m.precision, m.recall, m.f1);

    let path = std::env::temp_dir().join("hanfuse-example.bin");
    checkpoint::save(&model, &path)?;
    let model = checkpoint::load(&path)?;
    for text in ["他想去大浦桥", "他想去大浦乔"] {
        let chars: Vec<char> = text.chars().collect();
        let tags = model.predict(&chars, &tables, Mode::Strict)?;
        let shown: Vec<String> = chars.iter().zip(&tags).map(|(c, t)| format!("{c}/{t}")).collect();
        println!("{}", shown.join(" "));
    }
    Ok(())
}
