"""scikit-learn style transformers wrapping the functional core.

These make masking, substitution and segmentation compose with sklearn
pipelines and tooling (``get_params``/``set_params``/``clone`` all work).

- :class:`QueryMasker` is stateless: ``transform`` lexes and masks raw query
  strings into :class:`~sparqlsub.masking.MaskingResult` objects, and
  ``inverse_transform`` turns results back into normalized query strings.
- :class:`VocabSubstituter` learns the vocabulary and substitution map from
  a masked corpus in ``fit`` and rewrites token sequences in ``transform`` /
  ``inverse_transform``.
- :class:`SubwordSegmenter` segments words with a piece inventory loaded in
  ``fit``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .lexer import join_tokens, lex_sparql
from .masking import (
    DEFAULT_DELIMITER_MAP,
    DEFAULT_ENTITY_PATTERNS,
    DEFAULT_RELATION_PATTERNS,
    DEFAULT_SCHEMA_ALLOWLIST,
    MaskingConfig,
    MaskingResult,
    demask,
    mask,
)
from .substitution import (
    SCHEMES,
    SubstitutionMap,
    desubstitute,
    extract_vocabulary,
    generate_map,
    literal_census,
    substitute,
)
from .subword import SubwordModel, load_pieces, segment
from .validation import check_token_sequence
from .wordlist import load_wordlist


def _as_token_lists(X: Iterable) -> list[list[str]]:
    out = []
    for item in X:
        if isinstance(item, MaskingResult):
            out.append(list(item.masked))
        elif isinstance(item, str):
            out.append(check_token_sequence(item.split()))
        else:
            out.append(check_token_sequence(item))
    return out


class QueryMasker(BaseEstimator, TransformerMixin):
    """Lex raw SPARQL strings and mask entities, relations and delimiters.

    Parameters mirror :class:`~sparqlsub.masking.MaskingConfig`; ``None``
    means the GrailQA/Wikidata defaults.
    """

    def __init__(
        self,
        entity_patterns: Sequence[str] | None = None,
        relation_patterns: Sequence[str] | None = None,
        schema_allowlist: Sequence[str] | None = None,
        delimiter_map: dict | None = None,
        strip_prefixes: bool = True,
    ):
        self.entity_patterns = entity_patterns
        self.relation_patterns = relation_patterns
        self.schema_allowlist = schema_allowlist
        self.delimiter_map = delimiter_map
        self.strip_prefixes = strip_prefixes

    def _config(self) -> MaskingConfig:
        return MaskingConfig(
            entity_patterns=tuple(self.entity_patterns or DEFAULT_ENTITY_PATTERNS),
            relation_patterns=tuple(self.relation_patterns or DEFAULT_RELATION_PATTERNS),
            schema_allowlist=frozenset(self.schema_allowlist or DEFAULT_SCHEMA_ALLOWLIST),
            delimiter_map=dict(self.delimiter_map or DEFAULT_DELIMITER_MAP),
        )

    def fit(self, X=None, y=None):
        self.config_ = self._config()
        return self

    def transform(self, X: Iterable[str]) -> list[MaskingResult]:
        if not hasattr(self, "config_"):
            self.fit()
        from .pipeline import strip_prefix_decls

        out = []
        for query in X:
            tokens = lex_sparql(query)
            if self.strip_prefixes:
                tokens = strip_prefix_decls(tokens)
            out.append(mask(tokens, self.config_))
        return out

    def inverse_transform(self, X: Iterable[MaskingResult]) -> list[str]:
        check_is_fitted(self, "config_")
        return [join_tokens(demask(result, self.config_)) for result in X]


class VocabSubstituter(BaseEstimator, TransformerMixin):
    """Learn a seeded substitution map from a masked corpus and apply it.

    ``fit`` extracts the vocabulary (and the literal census used to keep
    codes collision-free) and generates the map for ``scheme``; ``transform``
    substitutes and ``inverse_transform`` substitutes back.
    """

    def __init__(self, scheme: str = "char2", seed: int = 0, wordlist_path: str | None = None):
        self.scheme = scheme
        self.seed = seed
        self.wordlist_path = wordlist_path

    def fit(self, X: Iterable, y=None):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        corpus = _as_token_lists(X)
        self.vocabulary_ = extract_vocabulary(corpus)
        wordlist = load_wordlist(self.wordlist_path) if self.wordlist_path else None
        self.map_ = generate_map(
            self.scheme,
            self.vocabulary_,
            self.seed,
            avoid=literal_census(corpus),
            wordlist=wordlist,
        )
        return self

    def transform(self, X: Iterable) -> list[list[str]]:
        check_is_fitted(self, "map_")
        return [substitute(seq, self.map_) for seq in _as_token_lists(X)]

    def inverse_transform(self, X: Iterable) -> list[list[str]]:
        check_is_fitted(self, "map_")
        return [desubstitute(seq, self.map_).tokens for seq in _as_token_lists(X)]

    @property
    def substitution_map_(self) -> SubstitutionMap:
        check_is_fitted(self, "map_")
        return self.map_


class SubwordSegmenter(BaseEstimator, TransformerMixin):
    """Segment words into subword pieces under a piece inventory file."""

    def __init__(
        self,
        pieces_path: str | None = None,
        boundary_marker: str | None = None,
        unknown_piece: str = "<unk>",
    ):
        self.pieces_path = pieces_path
        self.boundary_marker = boundary_marker
        self.unknown_piece = unknown_piece

    def fit(self, X=None, y=None):
        if self.pieces_path is None:
            from .deskmodel import desk_subword_model

            self.model_ = desk_subword_model(
                unknown_piece=self.unknown_piece,
                boundary_marker=self.boundary_marker,
            )
        else:
            self.model_ = load_pieces(
                self.pieces_path,
                boundary_marker=self.boundary_marker,
                unknown_piece=self.unknown_piece,
            )
        return self

    def transform(self, X: Iterable[str]) -> list[list[str]]:
        check_is_fitted(self, "model_")
        return [segment(self.model_, word) for word in X]

    @property
    def subword_model_(self) -> SubwordModel:
        check_is_fitted(self, "model_")
        return self.model_
