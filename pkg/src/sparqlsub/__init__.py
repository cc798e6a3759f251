"""SPARQL masking, vocabulary substitution, tokenizer statistics and evaluation."""

from .estimators import QueryMasker, SubwordSegmenter, VocabSubstituter
from .evaluation import (
    ErrorClass,
    EvalReport,
    classify_error,
    evaluate_pairs,
    exact_match,
    exact_match_rate,
)
from .lexer import LexError, join_tokens, lex_sparql
from .masking import (
    DemaskError,
    MaskingConfig,
    MaskingError,
    MaskingResult,
    demask,
    mask,
)
from .prefix_attention import (
    AttentionInputs,
    PrefixParams,
    attention,
    gradient_check,
    prefix_vectors,
    prefixed_attention,
)
from .pipeline import QARecord, SplitSpec, load_grailqa, run_preprocessing, split_records
from .substitution import (
    CapacityError,
    SubstitutionMap,
    Vocabulary,
    desubstitute,
    extract_vocabulary,
    gen_char1,
    gen_char_n,
    gen_dictionary,
    generate_map,
    substitute,
)
from .subword import SubwordModel, VocabStats, alfl, compression_ratios, load_pieces, segment, tsvs

__version__ = "0.1.0"

__all__ = [
    "AttentionInputs",
    "CapacityError",
    "DemaskError",
    "ErrorClass",
    "EvalReport",
    "LexError",
    "MaskingConfig",
    "MaskingError",
    "MaskingResult",
    "PrefixParams",
    "QARecord",
    "QueryMasker",
    "SplitSpec",
    "SubstitutionMap",
    "SubwordModel",
    "SubwordSegmenter",
    "VocabStats",
    "VocabSubstituter",
    "Vocabulary",
    "alfl",
    "attention",
    "classify_error",
    "compression_ratios",
    "demask",
    "desubstitute",
    "evaluate_pairs",
    "exact_match",
    "exact_match_rate",
    "extract_vocabulary",
    "gen_char1",
    "gen_char_n",
    "gen_dictionary",
    "generate_map",
    "gradient_check",
    "join_tokens",
    "lex_sparql",
    "load_grailqa",
    "load_pieces",
    "mask",
    "prefix_vectors",
    "prefixed_attention",
    "run_preprocessing",
    "segment",
    "split_records",
    "substitute",
    "tsvs",
]
