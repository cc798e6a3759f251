"""Masked-query vocabulary extraction and bijective substitution schemes.

A masked corpus has a small closed vocabulary (keywords, punctuation
aliases, variables, placeholders).  The schemes here rewrite that
vocabulary into alternate words: random fixed-length codes over ``A-Z0-9``
(``char2``/``char4``/``char8``), single characters drawn from tiered pools
(``char1``), common English words (``dictionary``), or the identity
(``original``).  Every map is a seeded, collision-free bijection so
substitution can be undone exactly after model inference.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

from .validation import check_corpus, check_token_sequence

SCHEMES = ("original", "dictionary", "char1", "char2", "char4", "char8")

CHAR_CODE_ALPHABET = string.ascii_uppercase + string.digits
# Single-character third tier for char1, after A-Z and digits 1-9.
CHAR1_SPECIALS = "*$-|+:!@#%&/~;,_"
CHAR1_DIGITS = "123456789"

_NUMBER_RE = re.compile(r"[+-]?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?")
_MAX_RESAMPLE = 10_000


class CapacityError(ValueError):
    """Raised when a vocabulary does not fit in a scheme's code space."""


def is_literal_token(token: str) -> bool:
    """Pass-through literals: quoted strings and numeric literals."""
    if token.startswith(('"', "'")):
        return True
    return _NUMBER_RE.fullmatch(token) is not None


@dataclass(frozen=True)
class Vocabulary:
    """Ordered set of masked-query vocabulary words (first occurrence order)."""

    words: tuple[str, ...]
    source_corpus_id: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "words", tuple(self.words))
        if len(set(self.words)) != len(self.words):
            raise ValueError("vocabulary contains duplicates")
        check_token_sequence(self.words, "vocabulary")

    def __len__(self) -> int:
        return len(self.words)

    def __iter__(self):
        return iter(self.words)

    def __contains__(self, word: str) -> bool:
        return word in set(self.words)


def extract_vocabulary(
    corpus: Iterable[Sequence[str]], source_corpus_id: str = ""
) -> Vocabulary:
    """Distinct non-literal tokens across a masked corpus, in first occurrence order.

    Keywords, punctuation aliases, variables and placeholders are all
    vocabulary; numeric and quoted literals pass through substitution and
    are excluded.
    """
    seen: dict[str, None] = {}
    for seq in corpus:
        for tok in seq:
            if not is_literal_token(tok):
                seen.setdefault(tok, None)
    return Vocabulary(words=tuple(seen), source_corpus_id=source_corpus_id)


def literal_census(corpus: Iterable[Sequence[str]]) -> set[str]:
    """All pass-through tokens in a corpus; used to keep codes collision-free."""
    return {tok for seq in corpus for tok in seq if is_literal_token(tok)}


@dataclass(frozen=True)
class SubstitutionMap:
    """Seeded bijection from vocabulary words to replacement words."""

    scheme: str
    seed: int
    forward: dict[str, str]
    inverse: dict[str, str] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        object.__setattr__(self, "forward", dict(self.forward))
        values = list(self.forward.values())
        if len(set(values)) != len(values):
            raise ValueError("forward map is not injective")
        if self.scheme == "original" and any(k != v for k, v in self.forward.items()):
            raise ValueError("scheme 'original' requires an identity map")
        object.__setattr__(self, "inverse", {v: k for k, v in self.forward.items()})

    @classmethod
    def identity(cls, vocab: Vocabulary, seed: int = 0) -> "SubstitutionMap":
        return cls(scheme="original", seed=seed, forward={w: w for w in vocab})

    def to_json(self, path: str | Path) -> None:
        payload = {"scheme": self.scheme, "seed": self.seed, "forward": self.forward}
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, path: str | Path) -> "SubstitutionMap":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(scheme=raw["scheme"], seed=int(raw["seed"]), forward=dict(raw["forward"]))


class DesubstitutionResult(NamedTuple):
    tokens: list[str]
    unknown: list[str]


def _rng(seed: int):
    import random

    return random.Random(seed)


def gen_char_n(
    vocab: Vocabulary, n: int, seed: int, avoid: Iterable[str] = ()
) -> SubstitutionMap:
    """Random distinct length-``n`` codes over ``A-Z0-9`` for every word.

    Codes colliding with vocabulary words, ``avoid`` tokens (the corpus
    literal census) or earlier codes are re-sampled.
    """
    if n not in (2, 4, 8):
        raise ValueError(f"code length must be 2, 4 or 8, got {n}")
    if len(CHAR_CODE_ALPHABET) ** n < len(vocab):
        raise CapacityError(
            f"{len(vocab)} words exceed the {len(CHAR_CODE_ALPHABET)}^{n} code space"
        )
    rng = _rng(seed)
    taken = set(vocab.words) | set(avoid)
    forward: dict[str, str] = {}
    for word in vocab:
        for _ in range(_MAX_RESAMPLE):
            code = "".join(rng.choice(CHAR_CODE_ALPHABET) for _ in range(n))
            if code not in taken:
                break
        else:
            raise CapacityError(f"could not find a free char{n} code for {word!r}")
        taken.add(code)
        forward[word] = code
    return SubstitutionMap(scheme=f"char{n}", seed=seed, forward=forward)


def gen_char1(
    vocab: Vocabulary,
    seed: int,
    avoid: Iterable[str] = (),
    specials: str = CHAR1_SPECIALS,
) -> SubstitutionMap:
    """Single-character codes drawn in tiers: A-Z, then 1-9, then specials.

    The assignment order within each tier is a seeded shuffle; words beyond
    the letter tier spill into digits and then into the special pool.
    """
    rng = _rng(seed)
    tiers = [list(string.ascii_uppercase), list(CHAR1_DIGITS), list(specials)]
    taken = set(vocab.words) | set(avoid)
    pool: list[str] = []
    for tier in tiers:
        rng.shuffle(tier)
        pool.extend(c for c in tier if c not in taken)
    if len(vocab) > len(pool):
        raise CapacityError(
            f"{len(vocab)} words exceed the char1 pool of {len(pool)} free characters"
        )
    forward = dict(zip(vocab.words, pool))
    return SubstitutionMap(scheme="char1", seed=seed, forward=forward)


def gen_dictionary(
    vocab: Vocabulary,
    wordlist: Sequence[str],
    seed: int,
    avoid: Iterable[str] = (),
) -> SubstitutionMap:
    """Seeded sample without replacement from an English wordlist."""
    if len(set(wordlist)) != len(wordlist):
        raise ValueError("wordlist contains duplicates")
    rng = _rng(seed)
    shuffled = list(wordlist)
    rng.shuffle(shuffled)
    taken = set(vocab.words) | set(avoid)
    replacements = [w for w in shuffled if w not in taken]
    if len(vocab) > len(replacements):
        raise CapacityError(
            f"wordlist provides {len(replacements)} usable words for {len(vocab)} vocabulary words"
        )
    forward = dict(zip(vocab.words, replacements))
    return SubstitutionMap(scheme="dictionary", seed=seed, forward=forward)


def generate_map(
    scheme: str,
    vocab: Vocabulary,
    seed: int,
    avoid: Iterable[str] = (),
    wordlist: Sequence[str] | None = None,
) -> SubstitutionMap:
    """Dispatch to the right generator for a named scheme."""
    if scheme == "original":
        return SubstitutionMap.identity(vocab, seed=seed)
    if scheme == "dictionary":
        if wordlist is None:
            from .wordlist import default_wordlist

            wordlist = default_wordlist()
        return gen_dictionary(vocab, wordlist, seed, avoid=avoid)
    if scheme == "char1":
        return gen_char1(vocab, seed, avoid=avoid)
    if scheme in ("char2", "char4", "char8"):
        return gen_char_n(vocab, int(scheme[4:]), seed, avoid=avoid)
    raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")


def substitute(tokens: Sequence[str], smap: SubstitutionMap) -> list[str]:
    """Replace every mapped token; literals and unmapped tokens pass through."""
    return [smap.forward.get(t, t) for t in tokens]


def desubstitute(tokens: Sequence[str], smap: SubstitutionMap) -> DesubstitutionResult:
    """Invert :func:`substitute`.

    Tokens absent from the inverse map pass through unchanged and are
    reported in ``unknown`` (a model may hallucinate out-of-vocabulary
    tokens; that is data for error analysis, not a failure).
    """
    out: list[str] = []
    unknown: list[str] = []
    for tok in tokens:
        if tok in smap.inverse:
            out.append(smap.inverse[tok])
        else:
            out.append(tok)
            unknown.append(tok)
    return DesubstitutionResult(tokens=out, unknown=unknown)


def substitute_corpus(
    corpus: Iterable[Sequence[str]], smap: SubstitutionMap
) -> list[list[str]]:
    return [substitute(seq, smap) for seq in check_corpus(corpus)]
