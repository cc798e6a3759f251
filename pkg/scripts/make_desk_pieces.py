#!/usr/bin/env python3
"""Regenerate src/sparqlsub/data/desk_pieces.txt.

The inventory mimics a web-text sentencepiece vocabulary: every printable
ASCII character, boundary-marked singles, a deterministic pseudo-random
subset of uppercase/digit bigrams (hash-gated so coverage is uniform over
the code space), chunk pieces for SPARQL keywords, and one boundary-marked
piece per packaged wordlist word.  Frozen output; rerun only to recalibrate.
"""

from __future__ import annotations

import hashlib
from pathlib import Path

HERE = Path(__file__).resolve().parent
DATA = HERE.parent / "src" / "sparqlsub" / "data"
MARKER = "▁"

UPPER36 = "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"

# Coverage rates (percent) for the hash-gated bigram sets.
BARE_BIGRAM_PCT = 45
MARKED_BIGRAM_PCT = 18

# Pin these to two pieces each regardless of hash luck.
MARKED_BIGRAM_EXCLUDE = {"OB", "CB"}
# Uppercase singles with no boundary-marked form (rare word-initially).
MARKED_SINGLE_EXCLUDE = {"Q", "Z"}

KEYWORD_PIECES = [
    # uppercase keyword chunks
    f"{MARKER}SE", "LECT", f"{MARKER}DI", "STIN", "CT", f"{MARKER}CO", "UNT",
    f"{MARKER}MA", f"{MARKER}MIN", f"{MARKER}AS", f"{MARKER}WH", "ERE",
    f"{MARKER}V", "ALU", "ES", f"{MARKER}FI", "LTER", f"{MARKER}OR", "DER",
    f"{MARKER}BY", f"{MARKER}DE", "SC", f"{MARKER}LI", "MIT",
    # punctuation commonly seen word-initially
    f"{MARKER}(", f"{MARKER})", f"{MARKER}.", f"{MARKER}=", f"{MARKER}:",
    f"{MARKER}*", f"{MARKER}$", f"{MARKER}-", f"{MARKER}+",
    # delimiter aliases and type tags
    f"{MARKER}CA", "RET", "CA",
    "sd", "integer", "float", "date", "Time", "Year", "value",
    "type", "object",
    # placeholder stems
    f"{MARKER}ent", f"{MARKER}rel",
]


def gate(tag: str, pct: int) -> bool:
    digest = hashlib.md5((tag).encode("ascii")).hexdigest()
    return int(digest, 16) % 100 < pct


def build() -> list[str]:
    pieces: dict[str, None] = {}

    def add(piece: str) -> None:
        pieces.setdefault(piece, None)

    add(MARKER)
    for code in range(0x21, 0x7F):
        add(chr(code))
    for ch in UPPER36 + UPPER36.lower():
        if ch not in MARKED_SINGLE_EXCLUDE:
            add(MARKER + ch)
    for a in UPPER36:
        for b in UPPER36:
            bg = a + b
            if gate("bare:" + bg, BARE_BIGRAM_PCT):
                add(bg)
            if bg not in MARKED_BIGRAM_EXCLUDE and gate("marked:" + bg, MARKED_BIGRAM_PCT):
                add(MARKER + bg)
    for piece in KEYWORD_PIECES:
        add(piece)
    wordlist = (DATA / "wordlist.txt").read_text("utf-8").split()
    for word in wordlist:
        add(MARKER + word)
    return list(pieces)


def main() -> None:
    pieces = build()
    out = DATA / "desk_pieces.txt"
    out.write_text("\n".join(pieces) + "\n", encoding="utf-8")
    print(f"wrote {len(pieces)} pieces to {out}")


if __name__ == "__main__":
    main()
