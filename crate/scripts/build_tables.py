#!/usr/bin/env python3
"""Regenerate the bundled character tables under crates/core/data/.

Inputs:
  * a Wubi-86 code table in the JSON layout shipped by the `pywubi` package
    (character -> list of codes, longest first);
  * the `pypinyin` package for readings.

The bundled inventory is the set of characters used by the synthetic corpus
(gazetteer, templates, fillers) plus, for every gazetteer character, its two
nearest glyph neighbours and two nearest phonetic neighbours among GB2312
level-1 characters, topped up with a seeded random sample to TARGET_SIZE.

Semantic vectors are placeholders: seeded Gaussian vectors, one per character.
Replace vectors.txt with real character vectors for anything beyond testing.

usage: build_tables.py <wubi_86.json> [--target 500] [--dim 32]
"""

import argparse
import json
import math
import random
import re
from pathlib import Path

from pypinyin import Style, pinyin

DATA = Path(__file__).resolve().parent.parent / "crates" / "core" / "data"
SYLLABLE = re.compile(r"^[a-zv]+[0-4]$")
INITIALS = ["zh", "ch", "sh", "b", "p", "m", "f", "d", "t", "n", "l", "g", "k",
            "h", "j", "q", "x", "r", "z", "c", "s", "y", "w"]


def read_tsv(name):
    rows = []
    for line in (DATA / name).read_text(encoding="utf-8").splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        rows.append(line.split("\t"))
    return rows


INITIAL_MAP = {r[0]: ("" if r[1] == "-" else r[1], float(r[2])) for r in read_tsv("initials.tsv")}
FINAL_MAP = {r[0]: (r[1], r[2]) for r in read_tsv("finals.tsv")}
VOWELS = "aoeiuv"


def parse(syl):
    body, tone = syl[:-1], int(syl[-1])
    initial = ""
    for ini in INITIALS:
        if body.startswith(ini):
            initial = ini
            break
    final = body[len(initial):]
    if final not in FINAL_MAP:
        raise ValueError(syl)
    return initial, final, tone


def phonetic(syl):
    initial, final, tone = parse(syl)
    if initial in ("j", "q", "x", "y") and final.startswith("u"):
        final = "v" + final[1:]
    letters, weight = INITIAL_MAP[initial]
    vowels, nasal = FINAL_MAP[final]
    v = [0.0] * 39
    for ch in letters:
        v[ord(ch) - 97] += 1
    v[26] = weight
    for ch in vowels:
        v[27 + VOWELS.index(ch)] += 1
    if nasal == "n":
        v[33] = 1
    elif nasal == "ng":
        v[34] = 1
    if tone:
        v[34 + tone] = 1
    return v


def glyph(code):
    v = [0.0] * 25
    for ch in code:
        v[ord(ch) - 97] += 1
    return v


def dist(a, b):
    return math.sqrt(sum((x - y) ** 2 for x, y in zip(a, b)))


def readings(ch):
    out = []
    for s in pinyin(ch, style=Style.TONE3, heteronym=True, neutral_tone_with_five=True)[0]:
        s = s.replace("5", "0")
        if not SYLLABLE.match(s):
            continue
        try:
            parse(s)
        except ValueError:
            continue
        if s not in out:
            out.append(s)
    return out


def gb2312_level1():
    chars = []
    for hi in range(0xB0, 0xD8):
        for lo in range(0xA1, 0xFF):
            try:
                chars.append(bytes([hi, lo]).decode("gb2312"))
            except UnicodeDecodeError:
                pass
    return chars


def corpus_chars():
    chars = set()
    for name in ("gazetteer.tsv", "fillers.tsv"):
        for row in read_tsv(name):
            chars.update(row[1])
    for line in (DATA / "templates.txt").read_text(encoding="utf-8").splitlines():
        if line.startswith("#"):
            continue
        chars.update(re.sub(r"\{[A-Z]+\}", "", line))
    chars.update("浦傅桥草早行甲乙丙")
    return chars


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wubi_json")
    ap.add_argument("--target", type=int, default=500)
    ap.add_argument("--dim", type=int, default=32)
    ap.add_argument("--seed", type=int, default=20220101)
    args = ap.parse_args()

    wubi = {k: v[0] for k, v in json.loads(Path(args.wubi_json).read_text(encoding="utf-8")).items()}
    universe = {}
    for ch in gb2312_level1() + sorted(corpus_chars()):
        if ch in universe or ch not in wubi:
            continue
        r = readings(ch)
        if r:
            universe[ch] = (wubi[ch], r)
    chosen = {c for c in corpus_chars() if c in universe}
    missing = corpus_chars() - chosen
    if missing:
        raise SystemExit(f"corpus characters without table data: {''.join(sorted(missing))}")

    entity_chars = sorted({c for row in read_tsv("gazetteer.tsv") for c in row[1]})
    gvec = {c: glyph(v[0]) for c, v in universe.items()}
    pvec = {c: phonetic(v[1][0]) for c, v in universe.items()}
    for c in entity_chars:
        for table in (gvec, pvec):
            ranked = sorted((dist(table[c], table[o]), ord(o), o) for o in universe if o != c)
            chosen.update(o for _, _, o in ranked[:2])

    rng = random.Random(args.seed)
    rest = sorted(set(universe) - chosen)
    rng.shuffle(rest)
    while len(chosen) < args.target and rest:
        chosen.add(rest.pop())

    order = sorted(chosen)
    with open(DATA / "wubi.tsv", "w", encoding="utf-8") as f:
        f.write("# Wubi-86 full codes (derived from the pywubi table, MIT licence)\n")
        for c in order:
            f.write(f"{c}\t{universe[c][0]}\n")
    with open(DATA / "pinyin.tsv", "w", encoding="utf-8") as f:
        f.write("# Pinyin readings, tone digits, 0 = neutral; first reading is canonical\n")
        for c in order:
            f.write(f"{c}\t{','.join(universe[c][1])}\n")
    with open(DATA / "vectors.txt", "w", encoding="utf-8") as f:
        f.write(f"{len(order)} {args.dim}\n")
        for c in order:
            vals = " ".join(f"{rng.gauss(0.0, 0.5):.6f}" for _ in range(args.dim))
            f.write(f"{c} {vals}\n")
    print(f"wrote {len(order)} characters to {DATA}")


if __name__ == "__main__":
    main()
