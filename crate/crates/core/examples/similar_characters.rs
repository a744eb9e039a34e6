//! Nearest neighbours of a character in each feature space.
//!
//! Usage: `cargo run --example similar_characters [char] [k]`

use hanfuse::similarity::{distance, knn, FeatureSpace};
use hanfuse::Tables;

fn main() -> hanfuse::Result<()> {
    let mut args = std::env::args().skip(1);
    let query = args.next().and_then(|s| s.chars().next()).unwrap_or('浦');
    let k: usize = args.next().map_or(5, |s| s.parse().expect("k"));
    let tables = Tables::bundled();
    let inventory = tables.inventory()?;
    for space in FeatureSpace::ALL {
        let list = knn(query, space, k, &inventory, &tables)?;
        let shown: Vec<String> = list
            .neighbors
            .iter()
            .map(|n| format!("{} {:.3}", n.ch, n.distance))
            .collect();
        println!("{:<9} {}", space.to_string(), shown.join("  "));
    }
    println!(
        "glyph 浦-傅 {:.3}, 浦-桥 {:.3}; phonetic 草-早 {:.3}",
        distance('浦', '傅', FeatureSpace::Glyph, &tables)?,
        distance('浦', '桥', FeatureSpace::Glyph, &tables)?,
        distance('草', '早', FeatureSpace::Phonetic, &tables)?
    );
    Ok(())
}
