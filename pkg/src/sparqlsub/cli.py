"""Command-line entry point.

Subcommands: ``preprocess`` (dataset -> masked/substituted JSONL splits +
manifest), ``stats`` (TSVS/ALFL/compression table for a run), ``evaluate``
(exact match + error histogram for a predictions file), ``classify``
(per-prediction error classes), ``gradcheck`` (prefix attention gradient
verification).  Every flag can also come from a JSON file via ``--config``;
explicit flags win.  Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .deskmodel import desk_subword_model
from .evaluation import ErrorClass, classify_error, evaluate_pairs
from .masking import MaskingConfig
from .pipeline import IngestionError, SplitSpec, run_preprocessing
from .prefix_attention import (
    AttentionInputs,
    PrefixParams,
    gradient_check,
    quadratic_loss,
    weighted_sum_loss,
)
from .substitution import SCHEMES, SubstitutionMap, desubstitute
from .subword import alfl, compression_ratios, load_pieces, tsvs
from .synthetic import expected_vocabulary
from .wordlist import load_wordlist

log = logging.getLogger("sparqlsub")


class DataError(RuntimeError):
    pass


def _read_jsonl(path: Path) -> list[dict]:
    rows = []
    try:
        with path.open(encoding="utf-8") as fh:
            for i, line in enumerate(fh):
                line = line.strip()
                if not line:
                    continue
                try:
                    rows.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{i + 1}: invalid JSON: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    return rows


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    try:
        overrides = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read --config {args.config}: {exc}")
    if not isinstance(overrides, dict):
        parser.error(f"--config {args.config} must hold a JSON object")
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if not hasattr(args, dest):
            parser.error(f"--config {args.config}: unknown option {key!r}")
        if getattr(args, dest) is None:
            setattr(args, dest, value)
    return args


def cmd_preprocess(args: argparse.Namespace) -> int:
    if args.dataset is None or args.out_dir is None:
        raise DataError("preprocess needs --dataset and --out-dir")
    scheme = args.scheme or "original"
    if scheme not in SCHEMES:
        raise DataError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    masking_config = (
        MaskingConfig.from_json(args.masking_config) if args.masking_config else MaskingConfig()
    )
    wordlist = load_wordlist(args.wordlist) if args.wordlist else None
    if args.reference_vocab:
        reference = load_wordlist(args.reference_vocab)
    else:
        reference = expected_vocabulary()

    from .pipeline import load_grailqa

    n_records = len(load_grailqa(args.dataset))
    if args.train_n is None and args.dev_n is None and args.test_n is None:
        train_n = round(n_records * 0.7)
        dev_n = round(n_records * 0.1)
        test_n = n_records - train_n - dev_n
    else:
        train_n = args.train_n or 0
        dev_n = args.dev_n or 0
        test_n = args.test_n or 0
    split = SplitSpec(
        train_n=train_n, dev_n=dev_n, test_n=test_n, seed=args.split_seed or 0
    )
    result = run_preprocessing(
        dataset_path=args.dataset,
        out_dir=args.out_dir,
        scheme=scheme,
        seed=args.seed or 0,
        split=split,
        masking_config=masking_config,
        wordlist=wordlist,
        reference_vocab=reference,
    )
    counts = result.manifest["counts"]
    vocab_info = result.manifest["vocabulary"]
    print(
        f"preprocessed {counts['masked']} records "
        f"(rejected {counts['rejected']}) into {args.out_dir} "
        f"[scheme={scheme} seed={args.seed or 0}]"
    )
    print(
        f"vocabulary: {vocab_info['count']} words"
        + (
            ""
            if vocab_info.get("matches_expected")
            else f" (expected {vocab_info.get('expected_count')}; "
            f"missing={vocab_info.get('missing')}, unexpected={vocab_info.get('unexpected')})"
        )
    )
    return 0


def _load_subword_model(args: argparse.Namespace):
    if args.pieces:
        return load_pieces(
            args.pieces,
            boundary_marker=args.boundary_marker,
            unknown_piece=args.unknown_piece or "<unk>",
        )
    return desk_subword_model(unknown_piece=args.unknown_piece or "<unk>")


def cmd_stats(args: argparse.Namespace) -> int:
    if args.run_dir is None:
        raise DataError("stats needs --run-dir (a preprocess output directory)")
    run_dir = Path(args.run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.exists():
        raise DataError(f"no manifest.json under {run_dir}; run preprocess first")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    smap = SubstitutionMap.from_json(run_dir / "map.json")
    model = _load_subword_model(args)

    masked_corpus = [row["target"].split() for row in _read_jsonl(run_dir / "masked.jsonl")]
    sub_corpus = []
    for name in ("train", "dev", "test"):
        sub_corpus.extend(row["target"].split() for row in _read_jsonl(run_dir / f"{name}.jsonl"))
    if not masked_corpus or not sub_corpus:
        raise DataError(f"run {run_dir} has empty corpora")

    orig = (tsvs(model, smap.forward.keys()), alfl(model, masked_corpus))
    new = (tsvs(model, smap.forward.values()), alfl(model, sub_corpus))
    vocab_ratio, length_ratio = compression_ratios(orig, new)

    rows = [
        ("original", orig[0], orig[1], 1.0, 1.0),
        (smap.scheme, new[0], new[1], vocab_ratio, length_ratio),
    ]
    header = f"{'setting':<12} {'TSVS':>6} {'ALFL':>9} {'vocab ratio':>12} {'length ratio':>13}"
    print(header)
    print("-" * len(header))
    for name, t, a, vr, lr in rows:
        print(f"{name:<12} {t:>6} {a:>9.2f} {vr:>12.4f} {lr:>13.4f}")
    if args.json:
        payload = {
            "scheme": smap.scheme,
            "original": {"tsvs": orig[0], "alfl": orig[1]},
            "substituted": {"tsvs": new[0], "alfl": new[1]},
            "vocab_compression_ratio": vocab_ratio,
            "length_compression_ratio": length_ratio,
            "manifest_scheme": manifest.get("scheme"),
        }
        Path(args.json).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")
    return 0


def _aligned_pairs(args: argparse.Namespace) -> tuple[list[str], list[list[str]], list[list[str]], int]:
    if args.predictions is None or args.gold is None or args.map is None:
        raise DataError("need --predictions, --gold and --map")
    preds_raw = _read_jsonl(Path(args.predictions))
    golds_raw = _read_jsonl(Path(args.gold))
    try:
        preds = {str(row["id"]): str(row["prediction"]) for row in preds_raw}
        golds = {str(row["id"]): str(row["target"]) for row in golds_raw}
    except KeyError as exc:
        raise DataError(f"missing field in predictions/gold file: {exc}") from exc
    missing = sorted(set(golds) - set(preds))
    extra = sorted(set(preds) - set(golds))
    if missing or extra:
        raise DataError(
            f"prediction ids do not align with gold ids: missing={missing[:10]} extra={extra[:10]}"
        )
    smap = SubstitutionMap.from_json(args.map)
    ids = [str(row["id"]) for row in golds_raw]
    pred_tokens = []
    gold_tokens = []
    unknown_total = 0
    for qid in ids:
        back = desubstitute(preds[qid].split(), smap)
        unknown_total += len(back.unknown)
        pred_tokens.append(back.tokens)
        gold_tokens.append(desubstitute(golds[qid].split(), smap).tokens)
    return ids, pred_tokens, gold_tokens, unknown_total


def cmd_evaluate(args: argparse.Namespace) -> int:
    ids, preds, golds, unknown_total = _aligned_pairs(args)
    report = evaluate_pairs(preds, golds, ids=ids)
    report.unknown_token_count = unknown_total
    print(report.format_table())
    if args.out_prefix:
        prefix = Path(args.out_prefix)
        prefix.parent.mkdir(parents=True, exist_ok=True)
        Path(f"{prefix}.json").write_text(report.to_json() + "\n", encoding="utf-8")
        Path(f"{prefix}.txt").write_text(report.format_table() + "\n", encoding="utf-8")
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    ids, preds, golds, _ = _aligned_pairs(args)
    rows = []
    for qid, p, g in zip(ids, preds, golds):
        rows.append({"id": qid, "class": classify_error(p, g).value})
    out_path = Path(args.out) if args.out else None
    text = "".join(json.dumps(row) + "\n" for row in rows)
    if out_path:
        out_path.write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    histogram: dict[str, int] = {}
    for row in rows:
        histogram[row["class"]] = histogram.get(row["class"], 0) + 1
    for cls in ErrorClass:
        if cls.value in histogram:
            print(f"{cls.value:<20} {histogram[cls.value]}", file=sys.stderr)
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    import numpy as np

    d = args.dim or 4
    C = args.prefix_len if args.prefix_len is not None else 3
    n = args.queries or 2
    m = args.keys or 3
    instances = args.instances or 20
    seed = args.seed or 0
    step = args.step or 1e-5
    tol = args.tol or 1e-4
    worst = 0.0
    for i in range(instances):
        rng = np.random.default_rng(seed + i)
        params = PrefixParams.random(d, C, seed=seed + i)
        inp = AttentionInputs(
            Q=rng.normal(size=(n, d)), K=rng.normal(size=(m, d)), V=rng.normal(size=(m, d))
        )
        if i % 2 == 0:
            loss, grad = quadratic_loss()
        else:
            loss, grad = weighted_sum_loss(rng.normal(size=(n, d)))
        dev = gradient_check(params, inp, loss, grad, step=step)
        worst = max(worst, dev)
    print(f"gradcheck: {instances} instances (d={d}, C={C}), max relative deviation {worst:.3e}")
    if worst > tol:
        print(f"FAILED: deviation exceeds tolerance {tol:g}", file=sys.stderr)
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparqlsub",
        description="SPARQL masking, vocabulary substitution, statistics and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="mask, substitute, split and export a dataset")
    p.add_argument("--dataset", help="GrailQA-format JSON file")
    p.add_argument("--out-dir", help="output directory for JSONL files and manifest")
    p.add_argument("--scheme", choices=SCHEMES, help="substitution scheme (default: original)")
    p.add_argument("--seed", type=int, help="substitution map seed (default: 0)")
    p.add_argument("--masking-config", help="masking config JSON (default: GrailQA rules)")
    p.add_argument("--wordlist", help="dictionary wordlist file (default: packaged list)")
    p.add_argument("--reference-vocab", help="expected vocabulary file for the manifest diff")
    p.add_argument("--train-n", type=int, help="train split size")
    p.add_argument("--dev-n", type=int, help="dev split size")
    p.add_argument("--test-n", type=int, help="test split size")
    p.add_argument("--split-seed", type=int, help="shuffle seed for the split (default: 0)")
    p.add_argument("--config", help="JSON file with defaults for any flag")
    p.set_defaults(handler=cmd_preprocess)

    p = sub.add_parser("stats", help="TSVS/ALFL and compression ratios for a preprocess run")
    p.add_argument("--run-dir", help="directory written by preprocess")
    p.add_argument("--pieces", help="subword piece file (default: packaged surrogate)")
    p.add_argument("--boundary-marker", help="word-boundary marker prefix in the piece file")
    p.add_argument("--unknown-piece", help="fallback piece (default: <unk>)")
    p.add_argument("--json", help="also write the stats to this JSON file")
    p.add_argument("--config", help="JSON file with defaults for any flag")
    p.set_defaults(handler=cmd_stats)

    for name, handler, extra in (
        ("evaluate", cmd_evaluate, "score a predictions file against gold targets"),
        ("classify", cmd_classify, "emit per-prediction error classes"),
    ):
        p = sub.add_parser(name, help=extra)
        p.add_argument("--predictions", help='JSONL with {"id", "prediction"} lines')
        p.add_argument("--gold", help='exported JSONL with {"id", "target"} lines')
        p.add_argument("--map", help="substitution map JSON from preprocess")
        if name == "evaluate":
            p.add_argument("--out-prefix", help="write <prefix>.json and <prefix>.txt reports")
        else:
            p.add_argument("--out", help="write per-id classes JSONL here (default: stdout)")
        p.add_argument("--config", help="JSON file with defaults for any flag")
        p.set_defaults(handler=handler)

    p = sub.add_parser("gradcheck", help="verify prefix attention gradients numerically")
    p.add_argument("--dim", type=int, help="model dimension d (default: 4)")
    p.add_argument("--prefix-len", type=int, help="prefix length C (default: 3)")
    p.add_argument("--queries", type=int, help="query rows n (default: 2)")
    p.add_argument("--keys", type=int, help="key/value rows m (default: 3)")
    p.add_argument("--instances", type=int, help="random instances to check (default: 20)")
    p.add_argument("--seed", type=int, help="base seed (default: 0)")
    p.add_argument("--step", type=float, help="central difference step (default: 1e-5)")
    p.add_argument("--tol", type=float, help="max allowed relative deviation (default: 1e-4)")
    p.add_argument("--config", help="JSON file with defaults for any flag")
    p.set_defaults(handler=cmd_gradcheck)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    args = _apply_config(args, parser)
    try:
        return args.handler(args)
    except (DataError, IngestionError, OSError, ValueError) as exc:
        stage = args.command
        print(f"sparqlsub {stage}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
