"""Exported-dataset loading, schema validation, vocabulary and batching.

The harness consumes the preprocessing pipeline's JSONL export: one
``{"id", "input", "target"}`` object per line.  Any schema violation
aborts before training starts.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path

import torch

PAD, BOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ("<pad>", "<bos>", "<eos>", "<unk>")


class SchemaError(ValueError):
    """Raised when a dataset file does not match the export schema."""


@dataclass
class Example:
    qid: str
    source: list[str]
    target: list[str]


def load_examples(path: str | Path) -> list[Example]:
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"dataset file {path} does not exist")
    examples: list[Example] = []
    seen: set[str] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            row = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}:{lineno}: not valid JSON: {exc}") from exc
        if not isinstance(row, dict):
            raise SchemaError(f"{path}:{lineno}: expected an object")
        for key in ("id", "input", "target"):
            if key not in row or not isinstance(row[key], str) or not row[key]:
                raise SchemaError(f"{path}:{lineno}: missing or empty field {key!r}")
        if row["id"] in seen:
            raise SchemaError(f"{path}:{lineno}: duplicate id {row['id']!r}")
        seen.add(row["id"])
        examples.append(Example(qid=row["id"], source=row["input"].split(), target=row["target"].split()))
    return examples


class WordVocab:
    """Whitespace-token vocabulary shared by encoder and decoder."""

    def __init__(self, words: list[str]):
        self.itos = list(SPECIALS) + sorted(set(words) - set(SPECIALS))
        self.stoi = {w: i for i, w in enumerate(self.itos)}

    @classmethod
    def build(cls, examples: list[Example]) -> "WordVocab":
        words: list[str] = []
        for ex in examples:
            words.extend(ex.source)
            words.extend(ex.target)
        return cls(words)

    def __len__(self) -> int:
        return len(self.itos)

    def encode(self, tokens: list[str]) -> list[int]:
        return [self.stoi.get(t, UNK) for t in tokens]

    def decode(self, ids: list[int]) -> list[str]:
        out = []
        for i in ids:
            if i == EOS:
                break
            if i not in (PAD, BOS):
                out.append(self.itos[i])
        return out

    def state(self) -> list[str]:
        return list(self.itos)

    @classmethod
    def from_state(cls, itos: list[str]) -> "WordVocab":
        vocab = cls.__new__(cls)
        vocab.itos = list(itos)
        vocab.stoi = {w: i for i, w in enumerate(vocab.itos)}
        return vocab


def _pad(rows: list[list[int]], value: int = PAD) -> torch.Tensor:
    width = max(len(r) for r in rows)
    return torch.tensor([r + [value] * (width - len(r)) for r in rows], dtype=torch.long)


@dataclass
class Batch:
    src: torch.Tensor        # (B, Ts)
    src_mask: torch.Tensor   # (B, Ts) True where real tokens
    dec_in: torch.Tensor     # (B, Tt) starts with BOS
    labels: torch.Tensor     # (B, Tt) ends with EOS, PAD elsewhere


def make_batches(
    examples: list[Example], vocab: WordVocab, batch_size: int, seed: int, shuffle: bool = True
) -> list[Batch]:
    order = list(range(len(examples)))
    if shuffle:
        random.Random(seed).shuffle(order)
    batches = []
    for start in range(0, len(order), batch_size):
        chunk = [examples[i] for i in order[start : start + batch_size]]
        src = _pad([vocab.encode(ex.source) for ex in chunk])
        dec_in = _pad([[BOS] + vocab.encode(ex.target) for ex in chunk])
        labels = _pad([vocab.encode(ex.target) + [EOS] for ex in chunk])
        batches.append(
            Batch(src=src, src_mask=src.ne(PAD), dec_in=dec_in, labels=labels)
        )
    return batches
