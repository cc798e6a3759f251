"""Loader for replacement wordlists (one word per line, UTF-8)."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from pathlib import Path


def load_wordlist(path: str | Path) -> tuple[str, ...]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    words = tuple(w.strip() for w in lines if w.strip())
    if len(set(words)) != len(words):
        raise ValueError(f"wordlist {path} contains duplicates")
    return words


@lru_cache(maxsize=1)
def default_wordlist() -> tuple[str, ...]:
    """The packaged list of common English words."""
    text = resources.files("sparqlsub.data").joinpath("wordlist.txt").read_text("utf-8")
    return tuple(w.strip() for w in text.splitlines() if w.strip())
