"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

from typing import Iterable, Sequence


def check_token_sequence(tokens: Sequence[str], name: str = "tokens") -> list[str]:
    """Validate and return a token sequence as a plain list.

    Tokens must be non-empty strings without internal whitespace; this is
    what keeps space-joining and re-splitting lossless.
    """
    out = list(tokens)
    for i, tok in enumerate(out):
        if not isinstance(tok, str) or not tok:
            raise ValueError(f"{name}[{i}] is not a non-empty string: {tok!r}")
        if any(c.isspace() for c in tok):
            raise ValueError(f"{name}[{i}] contains whitespace: {tok!r}")
    return out


def check_corpus(corpus: Iterable[Sequence[str]], name: str = "corpus") -> list[list[str]]:
    return [check_token_sequence(seq, f"{name}[{i}]") for i, seq in enumerate(corpus)]


def check_positive_int(value: int, name: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return value
