//! Loads tables from files (or the `HANFUSE_DATA_DIR` directory) and reports
//! coverage, falling back to the bundled data for anything not given.
//!
//! Usage: `cargo run --example load_tables [wubi.tsv pinyin.tsv vectors.txt]`

use std::path::PathBuf;

use hanfuse::tables::DataPaths;
use hanfuse::Tables;

fn main() -> hanfuse::Result<()> {
    let args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    let dir = std::env::var_os("HANFUSE_DATA_DIR").map(PathBuf::from);
    let path = |i: usize, name: &str| {
        args.get(i)
            .cloned()
            .or_else(|| dir.as_ref().map(|d| d.join(name)).filter(|p| p.is_file()))
    };
    let paths = DataPaths {
        wubi: path(0, "wubi.tsv"),
        pinyin: path(1, "pinyin.tsv"),
        vectors: path(2, "vectors.txt"),
        ..DataPaths::default()
    };
    let (tables, warnings) = Tables::load(&paths)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let inventory = tables.inventory()?;
    println!("wubi codes      {}", tables.wubi.len());
    println!("pinyin entries  {} ({} polyphones)", tables.pinyin.len(), tables.pinyin.polyphone_count());
    println!("vector dim      {}", tables.semantic_dim());
    println!("inventory       {}", inventory.len());
    println!("with vectors    {}", inventory.semantic_coverage());
    Ok(())
}
