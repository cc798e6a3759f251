"""Subword segmentation and tokenizer-level vocabulary statistics.

``SubwordModel`` wraps a piece inventory loaded from a plain text file (one
piece per line, optional tab-separated score which is ignored) and segments
words by greedy longest match, optionally trying a boundary-marker-prefixed
piece first at word starts, the way sentencepiece-style vocabularies mark
word-initial pieces.  Two corpus statistics are built on top:

* TSVS, the tokenizer-specific vocabulary size: the total number of
  subword pieces the vocabulary's words split into.
* ALFL, the average logical form length: the mean subword count of the
  space-joined queries of a corpus.

Supplying the genuine piece inventory of a pretrained model reproduces that
model's statistics; the packaged surrogate inventory gives realistic
desk-scale numbers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from statistics import fmean
from typing import Iterable, Sequence

from .substitution import Vocabulary


@dataclass(frozen=True)
class SubwordModel:
    """Immutable subword vocabulary with a deterministic segmentation rule."""

    pieces: frozenset[str]
    unknown_piece: str = "<unk>"
    boundary_marker: str | None = None
    _max_len: int = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pieces", frozenset(self.pieces))
        if not self.pieces:
            raise ValueError("piece inventory is empty")
        object.__setattr__(self, "_max_len", max(len(p) for p in self.pieces))


def load_pieces(
    path: str | Path,
    boundary_marker: str | None = None,
    unknown_piece: str = "<unk>",
) -> SubwordModel:
    pieces = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        piece = line.split("\t", 1)[0]
        if piece:
            pieces.append(piece)
    return SubwordModel(
        pieces=frozenset(pieces),
        unknown_piece=unknown_piece,
        boundary_marker=boundary_marker,
    )


def _longest_match(model: SubwordModel, text: str, start: int) -> str | None:
    limit = min(model._max_len, len(text) - start)
    for length in range(limit, 0, -1):
        cand = text[start : start + length]
        if cand in model.pieces:
            return cand
    return None


def segment(model: SubwordModel, word: str) -> list[str]:
    """Greedy longest-match segmentation of a single word.

    At the word start the boundary-marked form is tried first; if no marked
    piece matches but the bare marker is itself a piece, it is emitted alone
    (marking the word boundary) before bare matching continues.  Characters
    covered by no piece map to the unknown piece.
    """
    if not word:
        return []
    out: list[str] = []
    i = 0
    marker = model.boundary_marker
    if marker:
        limit = min(model._max_len - len(marker), len(word))
        for length in range(limit, 0, -1):
            cand = marker + word[:length]
            if cand in model.pieces:
                out.append(cand)
                i = length
                break
        else:
            if marker in model.pieces:
                out.append(marker)
    while i < len(word):
        piece = _longest_match(model, word, i)
        if piece is None:
            out.append(model.unknown_piece)
            i += 1
        else:
            out.append(piece)
            i += len(piece)
    return out


def segment_text(model: SubwordModel, text: str) -> list[str]:
    """Segment whitespace-delimited text, each word treated word-initially."""
    out: list[str] = []
    for word in text.split():
        out.extend(segment(model, word))
    return out


def tsvs(model: SubwordModel, vocab: Vocabulary | Iterable[str]) -> int:
    """Total subword count of the vocabulary's words under the model."""
    return sum(len(segment(model, word)) for word in vocab)


def alfl(model: SubwordModel, corpus: Sequence[Sequence[str]]) -> float:
    """Mean subword count of the space-joined queries of a corpus."""
    if not corpus:
        raise ValueError("ALFL is undefined for an empty corpus")
    return fmean(len(segment_text(model, " ".join(seq))) for seq in corpus)


@dataclass
class VocabStats:
    tsvs: int
    alfl: float
    vocab_compression_ratio: float | None = None
    length_compression_ratio: float | None = None


def compression_ratios(
    orig: VocabStats | tuple[float, float], new: VocabStats | tuple[float, float]
) -> tuple[float, float]:
    """(new TSVS / original TSVS, new ALFL / original ALFL)."""
    o_tsvs, o_alfl = (orig.tsvs, orig.alfl) if isinstance(orig, VocabStats) else orig
    n_tsvs, n_alfl = (new.tsvs, new.alfl) if isinstance(new, VocabStats) else new
    if not o_tsvs or not o_alfl:
        raise ValueError("original TSVS and ALFL must be nonzero")
    return n_tsvs / o_tsvs, n_alfl / o_alfl


def vocab_stats(
    model: SubwordModel,
    vocab: Vocabulary | Iterable[str],
    corpus: Sequence[Sequence[str]],
    baseline: VocabStats | None = None,
) -> VocabStats:
    stats = VocabStats(tsvs=tsvs(model, vocab), alfl=alfl(model, corpus))
    if baseline is not None:
        stats.vocab_compression_ratio, stats.length_compression_ratio = compression_ratios(
            baseline, stats
        )
    return stats
