//! Glyph and phonetic vectors for a few characters.
//!
//! Usage: `cargo run --example encode_characters [text]`

use hanfuse::glyph::encode_glyph;
use hanfuse::{Mode, Tables};

fn main() -> hanfuse::Result<()> {
    let text = std::env::args().nth(1).unwrap_or_else(|| "浦傅桥草早".to_string());
    let tables = Tables::bundled();
    for c in text.chars() {
        let code = tables.wubi.code(c).unwrap_or("?");
        let glyph = encode_glyph(c, &tables.wubi, Mode::Strict)?;
        let syllable = tables.pinyin.canonical(c).unwrap_or("?");
        let parts = tables.scheme.parse_syllable(syllable)?;
        let phonetic = tables.scheme.encode_phonetic(c, &tables.pinyin, Mode::Strict)?;
        println!("{c}  wubi {code:<4}  pinyin {syllable:<7} ({parts})");
        println!("   glyph    {:?}", glyph.as_slice());
        println!(
            "   phonetic letters {:?} weight {} vowels {:?} nasal {:?} tone {:?}",
            phonetic.letters(),
            phonetic.weight(),
            phonetic.vowels(),
            phonetic.nasal(),
            phonetic.tone()
        );
    }
    Ok(())
}
