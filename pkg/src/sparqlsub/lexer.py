"""Whitespace-normalizing lexer for SPARQL query text.

Splits punctuation and operators into standalone tokens while keeping
URI-like tokens (``wd:Q2084454``, ``:m.0199qf``, ``:type.object.type``),
variables, numbers and quoted string literals whole.  The token list is the
unit of comparison for everything downstream: masking, substitution and
evaluation all operate on these tokens.

Lexing is idempotent: joining the tokens with single spaces and lexing
again yields the same sequence.
"""

from __future__ import annotations

import re


class LexError(ValueError):
    """Raised when query text cannot be tokenized."""


# Alternatives are ordered: longest / most specific first.  PNAME allows
# dotted local parts (:aviation.airport.airport_type) but never ends in a
# dot, so a trailing statement terminator stays a separate token.
_TOKEN_RE = re.compile(
    r"""
      (?P<STRING>"(?:[^"\\\n]|\\.)*"|'(?:[^'\\\n]|\\.)*')
    | (?P<IRI><[^<>\s]+>)
    | (?P<PNAME>(?:[A-Za-z][A-Za-z0-9_\-]*)?:[A-Za-z0-9_\-]+(?:\.[A-Za-z0-9_\-]+)*)
    | (?P<PNAME_NS>[A-Za-z][A-Za-z0-9_\-]*:)
    | (?P<VAR>[?$][A-Za-z0-9_]+)
    | (?P<NUMBER>[+-]?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)
    | (?P<WORD>[A-Za-z_][A-Za-z0-9_\-]*)
    | (?P<OP>!=|<=|>=|\^\^|\|\||&&)
    | (?P<PUNCT>[{}()\[\].,;=<>!*+\-/^@|?:])
    """,
    re.VERBOSE,
)

_QUOTES = ('"', "'")


def lex_sparql(query_text: str) -> list[str]:
    """Tokenize SPARQL text into a normalized whitespace-free token list.

    Raises :class:`LexError` for an unterminated string literal, naming the
    byte offset where the literal starts.  Any other unrecognized character
    becomes a single-character token so lexing is total.
    """
    if not query_text or not query_text.strip():
        raise LexError("query text is empty")
    tokens: list[str] = []
    pos = 0
    n = len(query_text)
    while pos < n:
        ch = query_text[pos]
        if ch.isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(query_text, pos)
        if m:
            tokens.append(m.group())
            pos = m.end()
            continue
        if ch in _QUOTES:
            offset = len(query_text[:pos].encode("utf-8"))
            raise LexError(f"unterminated string literal at byte offset {offset}")
        tokens.append(ch)
        pos += 1
    return tokens


def join_tokens(tokens: list[str]) -> str:
    """Inverse presentation of a token list: single-space joined text."""
    return " ".join(tokens)
