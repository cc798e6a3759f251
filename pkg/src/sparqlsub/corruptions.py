"""Scripted corruptions of gold masked queries with known error labels.

Each corruption edits a masked token sequence so that the edit lands in a
specific, known error class.  They back two kinds of checks: that the
classifier agrees with the construction labels, and that synthetic
prediction files corrupted at a known rate score exactly as expected.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Sequence

from .evaluation import ErrorClass
from .masking import ENT_PLACEHOLDER_RE, REL_PLACEHOLDER_RE
from .substitution import SubstitutionMap, substitute

_VAR_RE = re.compile(r"\?[A-Za-z0-9_]+")
_FAMILY_RES = (ENT_PLACEHOLDER_RE, REL_PLACEHOLDER_RE, _VAR_RE)


@dataclass(frozen=True)
class Corruption:
    tokens: tuple[str, ...]
    expected: ErrorClass


def whitespace_variant(tokens: Sequence[str], rng: random.Random) -> str:
    """A string rendering with noisy whitespace; still an exact match."""
    seps = [" " * rng.randint(1, 3) if rng.random() < 0.7 else "\t" for _ in tokens]
    return "".join(tok + sep for tok, sep in zip(tokens, seps)).strip() + " "


def swap_placeholders(tokens: Sequence[str], rng: random.Random) -> Corruption | None:
    """Consistently exchange two members of one placeholder family."""
    tokens = list(tokens)
    candidates = []
    for fam in _FAMILY_RES:
        members = sorted({t for t in tokens if fam.fullmatch(t)})
        if len(members) >= 2:
            candidates.append(members)
    if not candidates:
        return None
    members = candidates[rng.randrange(len(candidates))]
    a, b = rng.sample(members, 2)
    swapped = [b if t == a else a if t == b else t for t in tokens]
    return Corruption(tuple(swapped), ErrorClass.VARIABLE_PLACEMENT)


def _triple_spans(tokens: Sequence[str]) -> list[tuple[int, int]]:
    """Index spans of dot-terminated triples inside OB/CB groups."""
    spans = []
    depth = 0
    for i, tok in enumerate(tokens):
        if tok == "OB":
            depth += 1
        elif tok == "CB":
            depth -= 1
        elif tok == "." and depth >= 1 and i >= 3:
            head = tokens[i - 3 : i]
            if all(t not in ("OB", "CB", "(", ")", ".") for t in head):
                spans.append((i - 3, i + 1))
    return spans


def delete_triple(tokens: Sequence[str], rng: random.Random) -> Corruption | None:
    """Drop one whole triple pattern from the query body."""
    spans = _triple_spans(tokens)
    if not spans:
        return None
    start, end = spans[rng.randrange(len(spans))]
    remaining = list(tokens[:start]) + list(tokens[end:])
    return Corruption(tuple(remaining), ErrorClass.STRUCTURAL)


def unbalance_delimiters(tokens: Sequence[str], rng: random.Random) -> Corruption | None:
    """Remove one group delimiter, leaving OB/CB unbalanced."""
    positions = [i for i, t in enumerate(tokens) if t in ("OB", "CB")]
    if not positions:
        return None
    drop = positions[-1] if rng.random() < 0.5 else positions[0]
    remaining = [t for i, t in enumerate(tokens) if i != drop]
    return Corruption(tuple(remaining), ErrorClass.SYNTAX)


def inject_raw_brace(tokens: Sequence[str], rng: random.Random) -> Corruption | None:
    """Reintroduce a raw curly brace in place of its printable alias."""
    positions = [i for i, t in enumerate(tokens) if t in ("OB", "CB")]
    if not positions:
        return None
    pos = positions[rng.randrange(len(positions))]
    out = list(tokens)
    out[pos] = "{" if tokens[pos] == "OB" else "}"
    return Corruption(tuple(out), ErrorClass.NON_PRINTABLE)


CORRUPTIONS = (swap_placeholders, delete_triple, unbalance_delimiters, inject_raw_brace)


def corrupt_once(tokens: Sequence[str], rng: random.Random) -> Corruption:
    """Apply one applicable corruption, rotating through the kinds."""
    order = list(CORRUPTIONS)
    rng.shuffle(order)
    for fn in order:
        result = fn(tokens, rng)
        if result is not None:
            return result
    raise ValueError("no corruption applicable to this sequence")


def synthetic_predictions(
    masked_golds: Sequence[Sequence[str]],
    smap: SubstitutionMap,
    rate: float,
    seed: int,
) -> list[str]:
    """Substituted prediction strings with exactly round(rate*n) corrupted.

    Corruptions are applied in masked space and then substituted, so every
    corrupted prediction is guaranteed to break exact match after the
    evaluator substitutes the vocabulary back.
    """
    if not 0.0 <= rate <= 1.0:
        raise ValueError(f"rate must be in [0, 1], got {rate}")
    rng = random.Random(seed)
    n = len(masked_golds)
    k = round(rate * n)
    corrupt_idx = set(rng.sample(range(n), k)) if k else set()
    out = []
    for i, gold in enumerate(masked_golds):
        tokens = corrupt_once(gold, rng).tokens if i in corrupt_idx else gold
        out.append(" ".join(substitute(list(tokens), smap)))
    return out
