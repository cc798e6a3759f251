"""Loader for the packaged surrogate subword piece inventory.

The surrogate mimics how a sentencepiece vocabulary trained on web text
segments SPARQL keywords, random character codes and English words, so the
statistics computed from it sit in a realistic regime without shipping any
pretrained model file.  Point :func:`sparqlsub.subword.load_pieces` at a
genuine piece file to reproduce a specific pretrained tokenizer instead.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from .subword import SubwordModel

DESK_BOUNDARY_MARKER = "▁"


@lru_cache(maxsize=4)
def desk_subword_model(
    unknown_piece: str = "<unk>", boundary_marker: str | None = None
) -> SubwordModel:
    text = resources.files("sparqlsub.data").joinpath("desk_pieces.txt").read_text("utf-8")
    pieces = frozenset(line.split("\t", 1)[0] for line in text.splitlines() if line.strip())
    return SubwordModel(
        pieces=pieces,
        unknown_piece=unknown_piece,
        boundary_marker=DESK_BOUNDARY_MARKER if boundary_marker is None else boundary_marker,
    )
