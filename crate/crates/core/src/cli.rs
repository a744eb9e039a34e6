//! The `hanfuse` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error,
//! 3 numeric failure. Data goes to the output stream, diagnostics to the
//! error stream.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgGroup, Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::augment::{records_to_tsv, substitute_corpus, AugmentConfig};
use crate::error::{Error, Result};
use crate::evaluation::LabeledCorpus;
use crate::experiments::evaluate;
use crate::fusion::{Embedder, FusionStrategy, StrategyKind};
use crate::glyph::encode_glyph;
use crate::similarity::{knn, FeatureSpace};
use crate::tables::{DataPaths, Tables};
use crate::tagger::{checkpoint, train, ModelConfig, TagSet, TaggerModel, TrainConfig};
use crate::Mode;

pub const DATA_DIR_ENV: &str = "HANFUSE_DATA_DIR";

#[derive(Debug, Parser)]
#[command(name = "hanfuse", version, about = "Glyph, phonetic and semantic character embeddings for Chinese NER")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Wubi code table (character TAB code)
    #[arg(long, global = true)]
    pub wubi: Option<PathBuf>,
    /// Pinyin table (character TAB comma-separated numbered syllables)
    #[arg(long, global = true)]
    pub pinyin: Option<PathBuf>,
    /// Character vectors in word2vec text format
    #[arg(long, global = true)]
    pub vectors: Option<PathBuf>,
    /// Initial mapping (initial TAB letters TAB weight)
    #[arg(long, global = true)]
    pub initials: Option<PathBuf>,
    /// Final mapping (final TAB vowels TAB nasal)
    #[arg(long, global = true)]
    pub finals: Option<PathBuf>,
    /// Encode characters missing from a table as zero vectors
    #[arg(long, global = true)]
    pub lenient: bool,
    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print table sizes and coverage
    Inspect,
    /// Print per-character feature vectors
    #[command(group(ArgGroup::new("kind").required(true).args(["glyph", "phonetic", "fused"])))]
    Encode(EncodeArgs),
    /// Nearest neighbours of a character
    Similar(SimilarArgs),
    /// Write a character-substitution variant of a labelled corpus
    Augment(AugmentArgs),
    /// Train a tagger
    Train(TrainArgs),
    /// Tag raw text, one sentence per line
    Tag(TagArgs),
    /// Score a model on a labelled corpus
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[arg(long)]
    pub glyph: bool,
    #[arg(long)]
    pub phonetic: bool,
    #[arg(long)]
    pub fused: bool,
    /// Fusion strategy for --fused: concat or concat-linear
    #[arg(long, default_value = "concat")]
    pub strategy: StrategyKind,
    /// Seed for the concat-linear map
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    pub text: String,
}

#[derive(Debug, Args)]
pub struct SimilarArgs {
    #[arg(long, default_value = "glyph")]
    pub space: FeatureSpace,
    #[arg(short, default_value_t = 5)]
    pub k: usize,
    pub character: String,
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    /// Input corpus (CoNLL: character TAB tag, blank line between sentences)
    #[arg(long)]
    pub train: PathBuf,
    /// Output corpus; standard output when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Substitution records TSV
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "glyph,phonetic")]
    pub spaces: Vec<FeatureSpace>,
    /// Per-character replacement probability
    #[arg(short, default_value_t = 0.3)]
    pub p: f64,
    /// Neighbour pool size
    #[arg(short, default_value_t = 5)]
    pub k: usize,
    #[arg(long)]
    pub max_distance: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Emit each modified sentence after its original
    #[arg(long)]
    pub pairs: bool,
    /// Allow the semantic space in --spaces
    #[arg(long)]
    pub allow_semantic: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value = "concat")]
    pub strategy: StrategyKind,
    #[arg(long)]
    pub train: PathBuf,
    #[arg(long)]
    pub dev: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Hidden units per direction
    #[arg(long, default_value_t = 100)]
    pub hidden: usize,
    #[arg(long, default_value_t = 60)]
    pub epochs: usize,
    #[arg(long, default_value_t = 12)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 2e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.4)]
    pub dropout: f64,
    #[arg(long, default_value_t = 5)]
    pub patience: usize,
    /// Zero the glyph and phonetic blocks (semantic-only baseline)
    #[arg(long)]
    pub semantic_only: bool,
}

#[derive(Debug, Args)]
pub struct TagArgs {
    #[arg(long)]
    pub model: PathBuf,
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub test: PathBuf,
}

impl GlobalArgs {
    fn mode(&self) -> Mode {
        if self.lenient {
            Mode::Lenient
        } else {
            Mode::Strict
        }
    }

    /// Flags first, then files in `$HANFUSE_DATA_DIR`, then bundled data.
    fn data_paths(&self) -> DataPaths {
        let dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
        let pick = |flag: &Option<PathBuf>, file: &str| {
            flag.clone().or_else(|| {
                dir.as_ref()
                    .map(|d| d.join(file))
                    .filter(|p| p.is_file())
            })
        };
        DataPaths {
            wubi: pick(&self.wubi, "wubi.tsv"),
            pinyin: pick(&self.pinyin, "pinyin.tsv"),
            vectors: pick(&self.vectors, "vectors.txt"),
            initials: pick(&self.initials, "initials.tsv"),
            finals: pick(&self.finals, "finals.tsv"),
        }
    }

    fn tables(&self, err: &mut dyn Write) -> Result<Tables> {
        let (tables, warnings) = Tables::load(&self.data_paths())?;
        for w in warnings {
            let _ = writeln!(err, "warning: {w}");
        }
        Ok(tables)
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        3
    } else {
        2
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn single_char(s: &str) -> Result<char> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::NotSingleChar {
            line: 0,
            key: s.to_string(),
        }),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Inspect => inspect(&g.tables(err)?, out),
        Command::Encode(a) => encode(&g.tables(err)?, g.mode(), a, out),
        Command::Similar(a) => similar(&g.tables(err)?, a, out),
        Command::Augment(a) => augment(&g.tables(err)?, a, out, err),
        Command::Train(a) => train_cmd(&g.tables(err)?, a, out),
        Command::Tag(a) => tag(&g.tables(err)?, g.mode(), a, out),
        Command::Eval(a) => eval(&g.tables(err)?, a, out),
    }
}

fn inspect(t: &Tables, out: &mut dyn Write) -> Result<()> {
    let inv = t.inventory()?;
    writeln!(out, "wubi\t{}", t.wubi.len())?;
    writeln!(out, "pinyin\t{}", t.pinyin.len())?;
    writeln!(out, "polyphones\t{}", t.pinyin.polyphone_count())?;
    match &t.semantic {
        Some(s) => writeln!(out, "vectors\t{}\t{}", s.len(), s.dimension())?,
        None => writeln!(out, "vectors\t0\t0")?,
    }
    writeln!(out, "inventory\t{}", inv.len())?;
    writeln!(out, "semantic_coverage\t{}", inv.semantic_coverage())?;
    Ok(())
}

fn encode(t: &Tables, mode: Mode, a: &EncodeArgs, out: &mut dyn Write) -> Result<()> {
    let chars: Vec<char> = a.text.chars().collect();
    if chars.is_empty() {
        return Err(Error::EmptySentence);
    }
    if a.glyph {
        for &c in &chars {
            let v = encode_glyph(c, &t.wubi, mode)?;
            let code = t.wubi.code(c).unwrap_or("-");
            writeln!(out, "{c}\t{code}\t{}", join(v.as_slice()))?;
        }
    } else if a.phonetic {
        for &c in &chars {
            let v = t.scheme.encode_phonetic(c, &t.pinyin, mode)?;
            match t.pinyin.canonical(c) {
                Some(syl) => {
                    let parts = t.scheme.parse_syllable(syl)?;
                    writeln!(out, "{c}\t{syl}\t{parts}\t{}", join(v.as_slice()))?;
                }
                None => writeln!(out, "{c}\t-\t-\t{}", join(v.as_slice()))?,
            }
        }
    } else {
        let strategy = match a.strategy {
            StrategyKind::Concat => FusionStrategy::Concat,
            StrategyKind::ConcatLinear => FusionStrategy::concat_linear(
                t.semantic_dim(),
                t.semantic_dim() + crate::fusion::GLYPH_PHONETIC_DIM,
                &mut ChaCha8Rng::seed_from_u64(a.seed),
            ),
            StrategyKind::MultiBranch => {
                return Err(Error::InvalidConfig(
                    "multi-lstm keeps the feature blocks apart; use --glyph or --phonetic".into(),
                ))
            }
        };
        let seq = Embedder::new(t, mode).embed(&chars, &strategy)?;
        let m = seq.matrix.expect("concat strategies produce a matrix");
        for (c, row) in chars.iter().zip(m.iter_rows()) {
            writeln!(out, "{c}\t{}", join(row))?;
        }
    }
    Ok(())
}

fn similar(t: &Tables, a: &SimilarArgs, out: &mut dyn Write) -> Result<()> {
    let c = single_char(&a.character)?;
    let list = knn(c, a.space, a.k, &t.inventory()?, t)?;
    for n in list.neighbors {
        writeln!(out, "{}\t{:.6}", n.ch, n.distance)?;
    }
    Ok(())
}

fn augment(t: &Tables, a: &AugmentArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let corpus = LabeledCorpus::load(&a.train)?;
    let config = AugmentConfig {
        spaces: a.spaces.clone(),
        probability: a.p,
        k: a.k,
        max_distance: a.max_distance,
        seed: a.seed,
        emit_pairs: a.pairs,
        allow_semantic: a.allow_semantic,
    };
    let result = substitute_corpus(&corpus, &t.inventory()?, t, &config)?;
    let s = result.stats;
    writeln!(
        err,
        "replaced {} of {} entity characters ({} uncovered, {} without candidates)",
        s.replaced, s.entity_chars, s.uncovered, s.empty_pool
    )?;
    let conll = result.corpus.to_conll();
    match &a.out {
        Some(p) => write_file(p, &conll)?,
        None => out.write_all(conll.as_bytes())?,
    }
    if let Some(p) = &a.records {
        write_file(p, &records_to_tsv(&result.records))?;
    }
    Ok(())
}

fn train_cmd(t: &Tables, a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    let train_corpus = LabeledCorpus::load(&a.train)?;
    let dev_corpus = LabeledCorpus::load(&a.dev)?;
    if train_corpus.is_empty() || dev_corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let tags = TagSet::from_corpus(&train_corpus);
    let mut config = ModelConfig::new(a.strategy, t.semantic_dim())
        .with_hidden(a.hidden)
        .with_dropout(a.dropout);
    if a.semantic_only {
        config = config.with_features(crate::fusion::FeatureMask::SEMANTIC_ONLY);
    }
    let model = TaggerModel::new(config, tags, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
    let train_config = TrainConfig {
        batch_size: a.batch_size,
        max_epochs: a.epochs,
        learning_rate: a.lr,
        dropout: a.dropout,
        early_stop_patience: a.patience,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let (model, log) = train(model, t, &train_corpus, &dev_corpus, &train_config)?;
    writeln!(out, "epoch\ttrain_loss\tdev_loss\timproved")?;
    for e in &log {
        writeln!(
            out,
            "{}\t{:.6}\t{:.6}\t{}",
            e.epoch, e.train_loss, e.dev_loss, e.improved
        )?;
    }
    checkpoint::save(&model, &a.out)
}

fn tag(t: &Tables, mode: Mode, a: &TagArgs, out: &mut dyn Write) -> Result<()> {
    let model = checkpoint::load(&a.model)?;
    let text = fs::read_to_string(&a.input)?;
    for line in text.lines() {
        let chars: Vec<char> = line.trim().chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            continue;
        }
        let tags = model.predict(&chars, t, mode)?;
        for (c, tag) in chars.iter().zip(tags) {
            writeln!(out, "{c}\t{tag}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

fn eval(t: &Tables, a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    let model = checkpoint::load(&a.model)?;
    let corpus = LabeledCorpus::load(&a.test)?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let m = evaluate(&model, &corpus, t)?;
    writeln!(out, "{}", m.tsv_line())?;
    writeln!(out)?;
    writeln!(out, "precision  {:.2}%", 100.0 * m.precision)?;
    writeln!(out, "recall     {:.2}%", 100.0 * m.recall)?;
    writeln!(out, "f1         {:.2}%", 100.0 * m.f1)?;
    writeln!(
        out,
        "{} correct of {} predicted and {} gold spans; {} tag repairs",
        m.true_positives, m.predicted, m.gold, m.repairs
    )?;
    Ok(())
}
