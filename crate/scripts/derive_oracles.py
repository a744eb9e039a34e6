#!/usr/bin/env python3
"""Print reference values computed straight from the bundled data files.

Independent of the Rust implementation; the printed numbers are frozen into
the crate's tests.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))
from build_tables import DATA, dist, glyph, parse, phonetic, read_tsv  # noqa: E402

wubi = {r[0]: r[1] for r in read_tsv("wubi.tsv")}
py = {r[0]: r[1].split(",")[0] for r in read_tsv("pinyin.tsv")}

for a, b in (("浦", "傅"), ("浦", "桥")):
    print(f"glyph {a}({wubi[a]}) {b}({wubi[b]}) = {dist(glyph(wubi[a]), glyph(wubi[b])):.12f}")
print("parse zhuang4 =", parse("zhuang4"))
print("bundled syllables starting zhuang:", sorted({s for s in py.values() if s.startswith("zhuang")}))
print(f"phonetic cao3 zao3 = {dist(phonetic('cao3'), phonetic('zao3')):.12f}")
print(f"phonetic 草({py['草']}) 早({py['早']}) = {dist(phonetic(py['草']), phonetic(py['早'])):.12f}")
print("ang2 nonzero dims:", [i for i, v in enumerate(phonetic("ang2")) if v])
print("a1 nonzero dims:", [i for i, v in enumerate(phonetic("a1")) if v])
codes = list(wubi.values())
print(f"max glyph distance over bundled table = "
      f"{max(dist(glyph(x), glyph(y)) for x in codes for y in codes):.12f}")
