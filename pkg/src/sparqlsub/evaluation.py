"""Exact-match scoring and error classification for generated masked queries.

Exact match compares predictions to gold queries token by token, ignoring
whitespace.  Mismatches are classified into a fixed taxonomy by a decision
cascade, each pair landing in exactly one class:

1. ``correct`` - token sequences are equal.
2. ``non_printable`` - the prediction contains a character outside printable
   ASCII or a raw ``{``/``}``/``^`` that should have been aliased away.
3. ``syntax`` - the prediction fails a lightweight masked-query
   well-formedness check (balanced delimiters, clause structure, triple
   arity).  The check is a heuristic for masked queries, not a full SPARQL
   grammar; masked queries are not executable SPARQL.
4. ``variable_placement`` - the prediction equals the gold after some
   consistent renumbering of ``ent*``/``rel*``/variable tokens.
5. ``structural`` - the number of triples differs.
6. ``intent`` - everything else.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .masking import ENT_PLACEHOLDER_RE, REL_PLACEHOLDER_RE


class ErrorClass(str, Enum):
    CORRECT = "correct"
    NON_PRINTABLE = "non_printable"
    SYNTAX = "syntax"
    VARIABLE_PLACEMENT = "variable_placement"
    STRUCTURAL = "structural"
    INTENT = "intent"


_VAR_RE = re.compile(r"\?[A-Za-z0-9_]+")
_RAW_PROBLEM_CHARS = {"{", "}", "^"}

_KEYWORDS = {
    "SELECT",
    "ASK",
    "WHERE",
    "DISTINCT",
    "VALUES",
    "FILTER",
    "COUNT",
    "MAX",
    "MIN",
    "AS",
    "ORDER",
    "BY",
    "ASC",
    "DESC",
    "LIMIT",
    "PREFIX",
}
_COMPARATORS = {"=", "!=", "<", ">", "<=", ">="}
_STRUCTURAL_TOKENS = {"OB", "CB", "(", ")", "."}


def exact_match(pred: str, gold: str) -> bool:
    """Token-by-token equality, ignoring all whitespace differences."""
    return pred.split() == gold.split()


def exact_match_rate(preds: Sequence[str], golds: Sequence[str]) -> float:
    """Percentage of predictions that exactly match their gold query."""
    if len(preds) != len(golds):
        raise ValueError(f"got {len(preds)} predictions for {len(golds)} gold queries")
    if not golds:
        raise ValueError("cannot score an empty prediction list")
    matched = sum(exact_match(p, g) for p, g in zip(preds, golds))
    return 100.0 * matched / len(golds)


def has_non_printable(tokens: Sequence[str]) -> bool:
    for tok in tokens:
        for ch in tok:
            if ch in _RAW_PROBLEM_CHARS or not (0x20 <= ord(ch) <= 0x7E):
                return True
    return False


class _ParseFail(Exception):
    pass


class _Parser:
    """Recursive-descent well-formedness check for masked queries."""

    def __init__(self, tokens: Sequence[str]):
        self.toks = list(tokens)
        self.i = 0
        self.n_triples = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def kw(self) -> str | None:
        tok = self.peek()
        return tok.upper() if tok is not None and tok.upper() in _KEYWORDS else None

    def take(self) -> str:
        tok = self.peek()
        if tok is None:
            raise _ParseFail("unexpected end of query")
        self.i += 1
        return tok

    def expect(self, *alternatives: str) -> str:
        tok = self.take()
        if tok.upper() not in alternatives and tok not in alternatives:
            raise _ParseFail(f"expected one of {alternatives}, got {tok!r}")
        return tok

    def at_term(self) -> bool:
        tok = self.peek()
        if tok is None or tok.upper() in _KEYWORDS:
            return False
        return tok not in _STRUCTURAL_TOKENS and tok not in _COMPARATORS

    def parse_query(self) -> None:
        if self.kw() == "ASK":
            self.take()
            self.expect("WHERE")
            self.parse_group()
        else:
            self.parse_select()
        self.parse_tail()
        if self.peek() is not None:
            raise _ParseFail(f"trailing tokens from {self.peek()!r}")

    def parse_select(self) -> None:
        self.expect("SELECT")
        if self.kw() == "DISTINCT":
            self.take()
        if self.peek() == "(":
            self.take()
            self.expect("COUNT", "MAX", "MIN")
            self.expect("(")
            self.parse_var()
            self.expect(")")
            self.expect("AS")
            self.parse_var()
            self.expect(")")
        else:
            if not (self.peek() and _VAR_RE.fullmatch(self.peek() or "")):
                raise _ParseFail("projection needs at least one variable")
            while self.peek() and _VAR_RE.fullmatch(self.peek() or ""):
                self.take()
        self.expect("WHERE")
        self.parse_group()

    def parse_var(self) -> None:
        tok = self.take()
        if not _VAR_RE.fullmatch(tok):
            raise _ParseFail(f"expected a variable, got {tok!r}")

    def parse_group(self) -> None:
        self.expect("OB")
        while True:
            tok = self.peek()
            if tok is None:
                raise _ParseFail("unterminated group")
            if tok == "CB":
                self.take()
                return
            kw = self.kw()
            if kw == "VALUES":
                self.parse_values()
            elif kw == "FILTER":
                self.parse_filter()
            elif kw == "SELECT":
                self.parse_select()
                self.parse_tail()
            elif self.at_term():
                self.parse_triple()
            else:
                raise _ParseFail(f"unexpected token in group: {tok!r}")

    def parse_values(self) -> None:
        self.expect("VALUES")
        self.parse_var()
        self.expect("OB")
        if not self.at_term():
            raise _ParseFail("empty VALUES set")
        while self.at_term():
            self.take()
        self.expect("CB")

    def parse_filter(self) -> None:
        self.expect("FILTER")
        self.expect("(")
        self.parse_operand()
        self.expect(*_COMPARATORS)
        self.parse_operand()
        self.expect(")")

    def parse_operand(self) -> None:
        if not self.at_term():
            raise _ParseFail(f"expected an operand, got {self.peek()!r}")
        self.take()
        # typed literal: "..."  CARETCARET  xsd:...
        if self.peek() == "CARETCARET":
            self.take()
            if not self.at_term():
                raise _ParseFail("dangling type tag")
            self.take()

    def parse_triple(self) -> None:
        for _ in range(3):
            if not self.at_term():
                raise _ParseFail(f"expected a triple term, got {self.peek()!r}")
            self.take()
        self.n_triples += 1
        # the dot may be omitted when the next statement or CB follows directly
        if self.peek() == ".":
            self.take()
        elif self.peek() != "CB" and self.kw() not in {"VALUES", "FILTER", "SELECT"}:
            raise _ParseFail(f"triple not terminated, got {self.peek()!r}")

    def parse_tail(self) -> None:
        if self.kw() == "ORDER":
            self.take()
            self.expect("BY")
            if self.kw() in {"ASC", "DESC"}:
                self.take()
            if self.peek() == "(":
                self.take()
                self.parse_var()
                self.expect(")")
            else:
                self.parse_var()
        if self.kw() == "LIMIT":
            self.take()
            tok = self.take()
            if not tok.isdigit():
                raise _ParseFail(f"LIMIT needs an integer, got {tok!r}")


def _parse(tokens: Sequence[str]) -> tuple[bool, int]:
    parser = _Parser(tokens)
    try:
        parser.parse_query()
        return True, parser.n_triples
    except _ParseFail:
        return False, parser.n_triples


def is_well_formed(tokens: Sequence[str]) -> bool:
    return _parse(tokens)[0]


def count_triples(tokens: Sequence[str]) -> int:
    """Triples in the query body; falls back to dot counting if unparseable."""
    ok, n = _parse(tokens)
    if ok:
        return n
    depth = 0
    dots = 0
    for tok in tokens:
        if tok == "OB":
            depth += 1
        elif tok == "CB":
            depth = max(0, depth - 1)
        elif tok == "." and depth >= 1:
            dots += 1
    return dots


def _canonical(tokens: Sequence[str]) -> tuple[str, ...]:
    """Renumber ent/rel/variable tokens by first occurrence, per family."""
    ents: dict[str, str] = {}
    rels: dict[str, str] = {}
    vars_: dict[str, str] = {}
    out = []
    for tok in tokens:
        if ENT_PLACEHOLDER_RE.fullmatch(tok):
            out.append(ents.setdefault(tok, f"ent#{len(ents)}"))
        elif REL_PLACEHOLDER_RE.fullmatch(tok):
            out.append(rels.setdefault(tok, f"rel#{len(rels)}"))
        elif _VAR_RE.fullmatch(tok):
            out.append(vars_.setdefault(tok, f"var#{len(vars_)}"))
        else:
            out.append(tok)
    return tuple(out)


def classify_error(pred: Sequence[str], gold: Sequence[str]) -> ErrorClass:
    """Classify a (prediction, gold) pair of masked token sequences."""
    pred = list(pred)
    gold = list(gold)
    if pred == gold:
        return ErrorClass.CORRECT
    if has_non_printable(pred):
        return ErrorClass.NON_PRINTABLE
    if not is_well_formed(pred):
        return ErrorClass.SYNTAX
    if _canonical(pred) == _canonical(gold):
        return ErrorClass.VARIABLE_PLACEMENT
    if count_triples(pred) != count_triples(gold):
        return ErrorClass.STRUCTURAL
    return ErrorClass.INTENT


@dataclass
class EvalReport:
    """Exact-match percentage and error-class histogram over a prediction set."""

    exact_match_pct: float
    per_class_counts: Mapping[ErrorClass, int]
    n: int
    unknown_token_count: int = 0
    ids: tuple[str, ...] = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "exact_match_pct": round(self.exact_match_pct, 4),
            "per_class_counts": {k.value: v for k, v in self.per_class_counts.items()},
            "unknown_token_count": self.unknown_token_count,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def format_table(self) -> str:
        header = f"{'class':<20} {'count':>8} {'share %':>8}"
        lines = [f"n = {self.n}   exact match = {self.exact_match_pct:.2f} %", header, "-" * len(header)]
        for cls in ErrorClass:
            count = self.per_class_counts.get(cls, 0)
            share = 100.0 * count / self.n if self.n else 0.0
            lines.append(f"{cls.value:<20} {count:>8} {share:>8.2f}")
        return "\n".join(lines)


def evaluate_pairs(
    preds: Sequence[Sequence[str]],
    golds: Sequence[Sequence[str]],
    ids: Sequence[str] | None = None,
) -> EvalReport:
    """Score aligned token-sequence pairs into an :class:`EvalReport`."""
    if len(preds) != len(golds):
        raise ValueError(f"got {len(preds)} predictions for {len(golds)} gold queries")
    if not golds:
        raise ValueError("cannot evaluate an empty pair list")
    counts: Counter[ErrorClass] = Counter()
    for p, g in zip(preds, golds):
        counts[classify_error(p, g)] += 1
    pct = 100.0 * counts[ErrorClass.CORRECT] / len(golds)
    return EvalReport(
        exact_match_pct=pct,
        per_class_counts=dict(counts),
        n=len(golds),
        ids=tuple(ids) if ids else (),
    )
