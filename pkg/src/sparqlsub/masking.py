"""Convert lexed SPARQL token sequences to and from masked form.

Masking replaces knowledge-graph entity tokens with ``ent{i}`` placeholders,
relation tokens with ``rel{i}`` placeholders (numbered densely in first
occurrence order, repeated tokens reusing their placeholder), and rewrites
problem characters such as curly braces through a configurable delimiter
map (``{`` -> ``OB``, ``}`` -> ``CB``).  Variables, keywords and literals
pass through unchanged.  ``demask`` inverts the whole thing exactly.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Mapping

from .validation import check_token_sequence

ENT_PLACEHOLDER_RE = re.compile(r"ent[0-9]+")
REL_PLACEHOLDER_RE = re.compile(r"rel[0-9]+")

DEFAULT_ENTITY_PATTERNS = (
    r"wd:Q[0-9]+",
    r":m\.[0-9A-Za-z_]+",
    r":g\.[0-9A-Za-z_]+",
)
DEFAULT_RELATION_PATTERNS = (
    r"wdt:P[0-9]+",
    r"p:P[0-9]+",
    r"ps:P[0-9]+",
    r"pq:P[0-9]+",
    # Freebase-style dotted URIs under the default namespace, excluding mids.
    r":(?!m\.|g\.)[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z0-9_]+)+",
)
DEFAULT_SCHEMA_ALLOWLIST = frozenset({":type.object.type"})
DEFAULT_DELIMITER_MAP = {"{": "OB", "}": "CB", "^": "CARET"}


class MaskingError(ValueError):
    """Raised when a token sequence cannot be masked unambiguously."""


class DemaskError(ValueError):
    """Raised when a masked sequence cannot be inverted."""


@dataclass(frozen=True)
class MaskingConfig:
    """Token-matching rules that drive masking.

    Patterns are regular expressions matched against whole tokens.  Tokens in
    ``schema_allowlist`` are kept verbatim even if a relation pattern matches.
    ``delimiter_map`` maps single problem characters to printable aliases and
    must be injective so the rewrite can be undone.
    """

    entity_patterns: tuple[str, ...] = DEFAULT_ENTITY_PATTERNS
    relation_patterns: tuple[str, ...] = DEFAULT_RELATION_PATTERNS
    schema_allowlist: frozenset[str] = DEFAULT_SCHEMA_ALLOWLIST
    delimiter_map: Mapping[str, str] = field(
        default_factory=lambda: dict(DEFAULT_DELIMITER_MAP)
    )

    def __post_init__(self) -> None:
        object.__setattr__(self, "entity_patterns", tuple(self.entity_patterns))
        object.__setattr__(self, "relation_patterns", tuple(self.relation_patterns))
        object.__setattr__(self, "schema_allowlist", frozenset(self.schema_allowlist))
        object.__setattr__(self, "delimiter_map", dict(self.delimiter_map))
        for key in self.delimiter_map:
            if len(key) != 1:
                raise ValueError(f"delimiter_map keys must be single characters: {key!r}")
        aliases = list(self.delimiter_map.values())
        if len(set(aliases)) != len(aliases):
            raise ValueError("delimiter_map is not injective")
        for alias in aliases:
            if not alias or any(c.isspace() for c in alias):
                raise ValueError(f"bad delimiter alias: {alias!r}")

    @classmethod
    def from_json(cls, path: str | Path) -> "MaskingConfig":
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            entity_patterns=tuple(raw.get("entity_patterns", DEFAULT_ENTITY_PATTERNS)),
            relation_patterns=tuple(raw.get("relation_patterns", DEFAULT_RELATION_PATTERNS)),
            schema_allowlist=frozenset(raw.get("schema_allowlist", DEFAULT_SCHEMA_ALLOWLIST)),
            delimiter_map=dict(raw.get("delimiter_map", DEFAULT_DELIMITER_MAP)),
        )

    def to_json(self, path: str | Path) -> None:
        payload = {
            "entity_patterns": list(self.entity_patterns),
            "relation_patterns": list(self.relation_patterns),
            "schema_allowlist": sorted(self.schema_allowlist),
            "delimiter_map": dict(self.delimiter_map),
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class MaskingResult:
    """A masked token sequence plus the maps needed to invert masking."""

    masked: tuple[str, ...]
    entity_map: Mapping[str, str]
    relation_map: Mapping[str, str]

    def __post_init__(self) -> None:
        object.__setattr__(self, "masked", tuple(self.masked))
        object.__setattr__(self, "entity_map", dict(self.entity_map))
        object.__setattr__(self, "relation_map", dict(self.relation_map))


@lru_cache(maxsize=64)
def _compile(patterns: tuple[str, ...]) -> tuple[re.Pattern[str], ...]:
    return tuple(re.compile(p) for p in patterns)


def _matches_any(token: str, patterns: tuple[str, ...]) -> bool:
    return any(p.fullmatch(token) for p in _compile(patterns))


def mask(tokens: list[str], config: MaskingConfig | None = None) -> MaskingResult:
    """Mask entities, relations and problem characters in a token sequence.

    Raises :class:`MaskingError` when a token matches both entity and
    relation patterns, when a pass-through token collides with the
    placeholder namespace (``ent0``-style tokens), or when it contains a
    delimiter alias as a substring; any of those would make the result
    ambiguous or non-invertible.
    """
    config = config or MaskingConfig()
    tokens = check_token_sequence(tokens)
    aliases = tuple(config.delimiter_map.values())
    ent_assign: dict[str, str] = {}
    rel_assign: dict[str, str] = {}
    masked: list[str] = []
    for tok in tokens:
        if tok in config.schema_allowlist:
            masked.append(tok)
            continue
        is_ent = _matches_any(tok, config.entity_patterns)
        is_rel = _matches_any(tok, config.relation_patterns)
        if is_ent and is_rel:
            raise MaskingError(f"token matches both entity and relation patterns: {tok!r}")
        if is_ent:
            masked.append(ent_assign.setdefault(tok, f"ent{len(ent_assign)}"))
            continue
        if is_rel:
            masked.append(rel_assign.setdefault(tok, f"rel{len(rel_assign)}"))
            continue
        if ENT_PLACEHOLDER_RE.fullmatch(tok) or REL_PLACEHOLDER_RE.fullmatch(tok):
            raise MaskingError(f"pass-through token collides with placeholder namespace: {tok!r}")
        for alias in aliases:
            if alias in tok:
                raise MaskingError(
                    f"pass-through token contains delimiter alias {alias!r}: {tok!r}"
                )
        for char, alias in config.delimiter_map.items():
            if char in tok:
                tok = tok.replace(char, alias)
        masked.append(tok)
    entity_map = {ph: orig for orig, ph in ent_assign.items()}
    relation_map = {ph: orig for orig, ph in rel_assign.items()}
    return MaskingResult(masked=tuple(masked), entity_map=entity_map, relation_map=relation_map)


def demask(result: MaskingResult, config: MaskingConfig | None = None) -> list[str]:
    """Invert :func:`mask`, reproducing the original normalized tokens.

    Raises :class:`DemaskError` for a placeholder with no map entry.
    """
    config = config or MaskingConfig()
    inverse_delims = sorted(
        ((alias, char) for char, alias in config.delimiter_map.items()),
        key=lambda pair: -len(pair[0]),
    )
    out: list[str] = []
    for tok in result.masked:
        if ENT_PLACEHOLDER_RE.fullmatch(tok):
            if tok not in result.entity_map:
                raise DemaskError(f"dangling placeholder {tok!r} has no entity_map entry")
            out.append(result.entity_map[tok])
            continue
        if REL_PLACEHOLDER_RE.fullmatch(tok):
            if tok not in result.relation_map:
                raise DemaskError(f"dangling placeholder {tok!r} has no relation_map entry")
            out.append(result.relation_map[tok])
            continue
        for alias, char in inverse_delims:
            if alias in tok:
                tok = tok.replace(alias, char)
        out.append(tok)
    return out
