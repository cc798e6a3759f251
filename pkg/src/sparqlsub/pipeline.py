"""GrailQA ingestion, masking, deterministic splitting and JSONL export.

The pipeline turns a GrailQA-format JSON file into model-ready
train/dev/test JSONL files (``{"id", "input", "target"}`` per line), a
substitution map, a reject file for records that fail lexing or masking,
and a manifest that hash-chains configuration, map and outputs so a score
can always be traced back to the exact preprocessing that produced it.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .lexer import LexError, lex_sparql
from .masking import MaskingConfig, MaskingError, MaskingResult, mask
from .substitution import (
    SubstitutionMap,
    Vocabulary,
    extract_vocabulary,
    literal_census,
    substitute,
)

log = logging.getLogger(__name__)


class IngestionError(ValueError):
    """Raised when a dataset file cannot be read or parsed."""


@dataclass
class QARecord:
    qid: str
    question: str
    sparql: str
    masked: list[str] | None = None
    substituted: list[str] | None = None
    masking: MaskingResult | None = None


@dataclass(frozen=True)
class SplitSpec:
    train_n: int
    dev_n: int
    test_n: int
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("train_n", "dev_n", "test_n"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.train_n + self.dev_n + self.test_n


@dataclass
class RejectedRecord:
    qid: str
    sparql: str
    error: str


def load_grailqa(path: str | Path) -> list[QARecord]:
    """Load a GrailQA-format JSON array into raw records.

    Malformed entries (missing id, question or query) are skipped; one
    warning reports how many.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise IngestionError(f"cannot read dataset {path}: {exc}") from exc
    if not isinstance(raw, list):
        raise IngestionError(f"dataset {path} is not a JSON array")
    records: list[QARecord] = []
    skipped = 0
    seen_ids: set[str] = set()
    for entry in raw:
        if not isinstance(entry, dict):
            skipped += 1
            continue
        qid = entry.get("qid", entry.get("id"))
        question = entry.get("question")
        sparql = entry.get("sparql_query", entry.get("sparql"))
        if qid is None or not isinstance(question, str) or not isinstance(sparql, str) or not sparql.strip():
            skipped += 1
            continue
        qid = str(qid)
        if qid in seen_ids:
            skipped += 1
            continue
        seen_ids.add(qid)
        records.append(QARecord(qid=qid, question=question, sparql=sparql))
    if skipped:
        log.warning("skipped %d malformed entries in %s", skipped, path)
    return records


def split_records(
    records: Sequence[QARecord], spec: SplitSpec
) -> tuple[list[QARecord], list[QARecord], list[QARecord]]:
    """Seeded shuffle followed by a contiguous train/dev/test partition."""
    if spec.total > len(records):
        raise ValueError(
            f"split sizes sum to {spec.total} but only {len(records)} records are available"
        )
    import random

    shuffled = list(records)
    random.Random(spec.seed).shuffle(shuffled)
    train = shuffled[: spec.train_n]
    dev = shuffled[spec.train_n : spec.train_n + spec.dev_n]
    test = shuffled[spec.train_n + spec.dev_n : spec.total]
    return train, dev, test


def strip_prefix_decls(tokens: list[str]) -> list[str]:
    """Drop leading ``PREFIX name: <iri>`` declarations from a token list."""
    i = 0
    while i + 2 < len(tokens) and tokens[i].upper() == "PREFIX":
        ns = tokens[i + 1]
        iri = tokens[i + 2]
        if (ns.endswith(":") or ns == ":") and iri.startswith("<") and iri.endswith(">"):
            i += 3
        else:
            break
    return tokens[i:]


def apply_masking(
    records: Iterable[QARecord],
    config: MaskingConfig | None = None,
    strip_prefixes: bool = True,
) -> tuple[list[QARecord], list[RejectedRecord]]:
    """Lex and mask every record; failures are quarantined, not dropped."""
    config = config or MaskingConfig()
    ok: list[QARecord] = []
    rejects: list[RejectedRecord] = []
    for rec in records:
        try:
            tokens = lex_sparql(rec.sparql)
            if strip_prefixes:
                tokens = strip_prefix_decls(tokens)
            result = mask(tokens, config)
        except (LexError, MaskingError, ValueError) as exc:
            rejects.append(RejectedRecord(qid=rec.qid, sparql=rec.sparql, error=str(exc)))
            continue
        rec.masked = list(result.masked)
        rec.masking = result
        ok.append(rec)
    if rejects:
        log.warning("quarantined %d records that failed lexing or masking", len(rejects))
    return ok, rejects


def apply_substitution(records: Iterable[QARecord], smap: SubstitutionMap) -> None:
    for rec in records:
        if rec.masked is None:
            raise ValueError(f"record {rec.qid} has not been masked")
        rec.substituted = substitute(rec.masked, smap)


def export_jsonl(records: Sequence[QARecord], scheme: str, out_path: str | Path) -> None:
    """One ``{"id", "input", "target"}`` object per line, byte-deterministic."""
    lines = []
    for rec in records:
        if rec.substituted is None:
            raise ValueError(f"record {rec.qid} has no substituted query for scheme {scheme}")
        obj = {"id": rec.qid, "input": rec.question, "target": " ".join(rec.substituted)}
        lines.append(json.dumps(obj, ensure_ascii=True, separators=(",", ":")))
    Path(out_path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def write_rejects(rejects: Sequence[RejectedRecord], out_path: str | Path) -> None:
    lines = [
        json.dumps({"id": r.qid, "error": r.error, "sparql": r.sparql}, ensure_ascii=True)
        for r in rejects
    ]
    Path(out_path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def vocabulary_report(vocab: Vocabulary, reference: Sequence[str] | None) -> dict:
    """Observed vocabulary size, and the diff against a reference list if given."""
    report: dict = {"count": len(vocab), "words": list(vocab.words)}
    if reference is not None:
        ref = list(reference)
        report["expected_count"] = len(ref)
        report["missing"] = sorted(set(ref) - set(vocab.words))
        report["unexpected"] = sorted(set(vocab.words) - set(ref))
        report["matches_expected"] = not report["missing"] and not report["unexpected"]
    return report


@dataclass
class PreprocessResult:
    manifest: dict
    vocabulary: Vocabulary
    smap: SubstitutionMap
    train: list[QARecord] = field(repr=False, default_factory=list)
    dev: list[QARecord] = field(repr=False, default_factory=list)
    test: list[QARecord] = field(repr=False, default_factory=list)
    rejects: list[RejectedRecord] = field(repr=False, default_factory=list)


def run_preprocessing(
    dataset_path: str | Path,
    out_dir: str | Path,
    scheme: str,
    seed: int,
    split: SplitSpec,
    masking_config: MaskingConfig | None = None,
    wordlist: Sequence[str] | None = None,
    reference_vocab: Sequence[str] | None = None,
) -> PreprocessResult:
    """lex -> mask -> extract vocabulary -> generate map -> substitute -> split -> export."""
    from .substitution import generate_map

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = masking_config or MaskingConfig()

    records = load_grailqa(dataset_path)
    masked, rejects = apply_masking(records, config)
    if not masked:
        raise IngestionError("no records survived masking")

    corpus = [rec.masked for rec in masked]
    vocab = extract_vocabulary(corpus, source_corpus_id=str(dataset_path))
    census = literal_census(corpus)
    smap = generate_map(scheme, vocab, seed, avoid=census, wordlist=wordlist)
    apply_substitution(masked, smap)

    train, dev, test = split_records(masked, SplitSpec(
        train_n=split.train_n, dev_n=split.dev_n, test_n=split.test_n, seed=split.seed,
    ))

    paths = {
        "train": out_dir / "train.jsonl",
        "dev": out_dir / "dev.jsonl",
        "test": out_dir / "test.jsonl",
    }
    export_jsonl(train, scheme, paths["train"])
    export_jsonl(dev, scheme, paths["dev"])
    export_jsonl(test, scheme, paths["test"])

    masked_path = out_dir / "masked.jsonl"
    masked_lines = [
        json.dumps({"id": rec.qid, "target": " ".join(rec.masked or [])}, ensure_ascii=True)
        for rec in masked
    ]
    masked_path.write_text("".join(line + "\n" for line in masked_lines), encoding="utf-8")

    map_path = out_dir / "map.json"
    smap.to_json(map_path)
    config_path = out_dir / "masking_config.json"
    config.to_json(config_path)
    rejects_path = out_dir / "rejects.jsonl"
    write_rejects(rejects, rejects_path)

    manifest = {
        "dataset": str(dataset_path),
        "scheme": scheme,
        "seed": seed,
        "split": {
            "train_n": split.train_n,
            "dev_n": split.dev_n,
            "test_n": split.test_n,
            "seed": split.seed,
        },
        "counts": {
            "loaded": len(records),
            "masked": len(masked),
            "rejected": len(rejects),
            "train": len(train),
            "dev": len(dev),
            "test": len(test),
        },
        "vocabulary": vocabulary_report(vocab, reference_vocab),
        "hashes": {
            "masking_config": sha256_file(config_path),
            "map": sha256_file(map_path),
            **{name: sha256_file(p) for name, p in paths.items()},
        },
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return PreprocessResult(
        manifest=manifest, vocabulary=vocab, smap=smap,
        train=train, dev=dev, test=test, rejects=rejects,
    )
