"""Acceptance suite: one test per release criterion, at its stated tolerance.

Each test prints a single ``[PASS]``/``[FAIL]`` line (visible with
``pytest -s``).  Two environment variables switch individual checks from the
packaged desk-scale stand-ins to genuine artifacts:

* ``GRAILQA_TRAIN_JSON`` - a real GrailQA train JSON export
* ``SUBWORD_PIECES_FILE`` (plus optional ``SUBWORD_BOUNDARY_MARKER``) - a
  genuine pretrained tokenizer piece inventory, one piece per line
"""

import json
import os
import random

import numpy as np
import pytest

from sparqlsub.cli import main
from sparqlsub.corruptions import (
    delete_triple,
    inject_raw_brace,
    swap_placeholders,
    synthetic_predictions,
    unbalance_delimiters,
    whitespace_variant,
)
from sparqlsub.deskmodel import DESK_BOUNDARY_MARKER
from sparqlsub.evaluation import ErrorClass, classify_error, evaluate_pairs, exact_match
from sparqlsub.lexer import lex_sparql
from sparqlsub.masking import demask, mask
from sparqlsub.pipeline import SplitSpec, apply_masking, load_grailqa, run_preprocessing, strip_prefix_decls
from sparqlsub.prefix_attention import (
    AttentionInputs,
    PrefixParams,
    attention,
    gradient_check,
    prefix_vectors,
    prefixed_attention,
    quadratic_loss,
    softmax_rows,
    weighted_sum_loss,
)
from sparqlsub.substitution import SCHEMES, extract_vocabulary, generate_map, substitute, desubstitute
from sparqlsub.subword import alfl, load_pieces, tsvs
from sparqlsub.synthetic import expected_vocabulary, generate_corpus, write_grailqa_json

from conftest import CORPUS_N, CORPUS_SEED, MAP_SEEDS

from test_prefix_attention import oracle_mlp

# Published reference statistics the artifact mirrors: per-scheme
# (TSVS, ALFL) with original = (124, 125).
REFERENCE_STATS = {
    "original": (124, 125),
    "dictionary": (49, 44),
    "char1": (57, 57),
    "char2": (90, 87),
    "char4": (159, 141),
    "char8": (306, 263),
}
RATIO_TOLERANCE = 0.10


def _report(name: str, ok: bool, detail: str = "") -> None:
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] {name}" + (f" - {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_round_trip_integrity(masked_corpus, corpus_vocab, corpus_census, masking_config):
    originals = [
        strip_prefix_decls(lex_sparql(rec["sparql_query"]))
        for rec in generate_corpus(CORPUS_N, seed=CORPUS_SEED)
    ]
    assert len(originals) >= 1000
    results = [mask(original, masking_config) for original in originals]
    failures = sum(
        demask(result, masking_config) != original
        for result, original in zip(results, originals)
    )
    for scheme in SCHEMES:
        for seed in MAP_SEEDS:
            smap = generate_map(scheme, corpus_vocab, seed, avoid=corpus_census)
            for result in results:
                masked = list(result.masked)
                restored = desubstitute(substitute(masked, smap), smap).tokens
                if restored != masked:
                    failures += 1
    total = len(SCHEMES) * len(MAP_SEEDS) * len(originals)
    _report(
        "round-trip integrity",
        failures == 0,
        f"{total} substitution round trips over {len(originals)} queries, {failures} failures",
    )


def test_vocabulary_census(masked_corpus, corpus_vocab, tmp_path, dataset_file):
    reference = expected_vocabulary()
    ok_local = len(corpus_vocab) == 48 and set(corpus_vocab.words) == set(reference)

    # the manifest must record the census and any diff
    out = tmp_path / "census_run"
    result = run_preprocessing(
        dataset_file, out, scheme="original", seed=0,
        split=SplitSpec(300, 40, 60, seed=1), reference_vocab=reference,
    )
    manifest = json.loads((out / "manifest.json").read_text())
    recorded = manifest["vocabulary"]
    ok_manifest = (
        recorded["count"] == len(result.vocabulary)
        and "missing" in recorded
        and "unexpected" in recorded
    )

    detail = f"bundled corpus vocabulary = {len(corpus_vocab)} words (expected 48)"
    external = os.environ.get("GRAILQA_TRAIN_JSON")
    if external:
        records = load_grailqa(external)
        masked, rejects = apply_masking(records)
        vocab = extract_vocabulary([r.masked for r in masked])
        missing = sorted(set(reference) - set(vocab.words))
        unexpected = sorted(set(vocab.words) - set(reference))
        detail += (
            f"; external dataset: {len(vocab)} words, missing={missing[:8]}, "
            f"unexpected={unexpected[:8]}, rejected={len(rejects)}"
        )
    _report("vocabulary census", ok_local and ok_manifest, detail)


def _active_subword_model():
    pieces_file = os.environ.get("SUBWORD_PIECES_FILE")
    if pieces_file:
        marker = os.environ.get("SUBWORD_BOUNDARY_MARKER", DESK_BOUNDARY_MARKER)
        return load_pieces(pieces_file, boundary_marker=marker), True
    from sparqlsub.deskmodel import desk_subword_model

    return desk_subword_model(), False


def test_tokenizer_statistics(masked_corpus, corpus_vocab, corpus_census):
    model, genuine = _active_subword_model()
    t0 = tsvs(model, corpus_vocab)
    a0 = alfl(model, masked_corpus)

    orderings_ok = True
    for seed in MAP_SEEDS:
        tsvs_by_n = {}
        alfl_by_n = {}
        for n in (1, 2, 4, 8):
            smap = generate_map(f"char{n}", corpus_vocab, seed, avoid=corpus_census)
            tsvs_by_n[n] = tsvs(model, smap.forward.values())
            alfl_by_n[n] = alfl(model, [substitute(s, smap) for s in masked_corpus])
        orderings_ok = orderings_ok and (
            tsvs_by_n[1] < tsvs_by_n[2] < tsvs_by_n[4] < tsvs_by_n[8]
        ) and (alfl_by_n[1] < alfl_by_n[2] < alfl_by_n[4] < alfl_by_n[8])

    ref_tsvs, ref_alfl = REFERENCE_STATS["original"]
    tsvs_ok = abs(t0 - ref_tsvs) <= RATIO_TOLERANCE * ref_tsvs
    detail = (
        f"{'genuine' if genuine else 'surrogate'} pieces: original TSVS={t0} "
        f"(reference {ref_tsvs} +-10%), ALFL={a0:.1f} on the bundled corpus; "
        f"orderings char1<char2<char4<char8 {'hold' if orderings_ok else 'violated'}"
    )
    if genuine and os.environ.get("GRAILQA_TRAIN_JSON"):
        records = load_grailqa(os.environ["GRAILQA_TRAIN_JSON"])
        masked, _ = apply_masking(records)
        corpus = [r.masked for r in masked]
        a0_ext = alfl(model, corpus)
        alfl_ok = abs(a0_ext - ref_alfl) <= RATIO_TOLERANCE * ref_alfl
        detail += f"; external corpus ALFL={a0_ext:.1f} (reference {ref_alfl} +-10%)"
        _report("tokenizer statistics", orderings_ok and tsvs_ok and alfl_ok, detail)
    else:
        _report("tokenizer statistics", orderings_ok and tsvs_ok, detail)


def test_compression_ratios(masked_corpus, corpus_vocab, corpus_census):
    model, _ = _active_subword_model()
    t0 = tsvs(model, corpus_vocab)
    a0 = alfl(model, masked_corpus)
    ref_t0, ref_a0 = REFERENCE_STATS["original"]
    worst = 0.0
    ok = True
    for scheme in ("char1", "char2", "char4", "char8"):
        ref_tn, ref_an = REFERENCE_STATS[scheme]
        target_vr = ref_tn / ref_t0
        target_lr = ref_an / ref_a0
        for seed in MAP_SEEDS:
            smap = generate_map(scheme, corpus_vocab, seed, avoid=corpus_census)
            vr = tsvs(model, smap.forward.values()) / t0
            lr = alfl(model, [substitute(s, smap) for s in masked_corpus]) / a0
            for got, want in ((vr, target_vr), (lr, target_lr)):
                rel = abs(got - want) / want
                worst = max(worst, rel)
                ok = ok and rel <= RATIO_TOLERANCE
    _report(
        "compression ratios",
        ok,
        f"worst relative deviation from reference ratios {worst * 100:.1f}% (limit 10%)",
    )


def test_evaluator_fidelity(masked_corpus):
    golds = masked_corpus[:400]
    report = evaluate_pairs(golds, golds)
    gold_ok = report.exact_match_pct == 100.0

    rng = random.Random(99)
    corruption_kinds = (
        swap_placeholders,
        delete_triple,
        unbalance_delimiters,
        inject_raw_brace,
    )
    checked = 0
    agreed = 0
    for gold in golds:
        noisy = whitespace_variant(gold, rng)
        checked += 1
        if exact_match(noisy, " ".join(gold)) and classify_error(noisy.split(), gold) is ErrorClass.CORRECT:
            agreed += 1
        for fn in corruption_kinds:
            out = fn(gold, rng)
            if out is None:
                continue
            checked += 1
            if classify_error(list(out.tokens), gold) is out.expected:
                agreed += 1
    _report(
        "evaluator fidelity",
        gold_ok and agreed == checked,
        f"gold-vs-gold 100.0; corruption suite agreement {agreed}/{checked}",
    )


def test_prefix_attention_checks():
    rng = np.random.default_rng(1234)

    # empty prefix equivalence is exact
    inp = AttentionInputs(
        Q=rng.normal(size=(3, 4)), K=rng.normal(size=(5, 4)), V=rng.normal(size=(5, 4))
    )
    empty_ok = np.array_equal(
        prefixed_attention(inp, PrefixParams.random(d=4, C=0, seed=0)), attention(inp)
    )

    # canonical prefix length: softmax rows over m + 50 entries sum to 1
    params50 = PrefixParams.random(d=4, C=50, seed=1)
    h_K, _ = prefix_vectors(params50)
    P = softmax_rows(inp.Q @ np.vstack([h_K, inp.K]).T / 2.0)
    rows_ok = P.shape[1] == 55 and np.max(np.abs(P.sum(axis=1) - 1.0)) < 1e-12

    # MLP against the independent loop oracle
    mlp_ok = True
    for seed in range(5):
        p = PrefixParams.random(d=4, C=3, seed=seed)
        h_K, h_V = prefix_vectors(p)
        mlp_ok = mlp_ok and np.max(
            np.abs(h_K - oracle_mlp(p.E, p.W_K1, p.b_K1, p.W_K2, p.b_K2))
        ) < 1e-12 and np.max(
            np.abs(h_V - oracle_mlp(p.E, p.W_V1, p.b_V1, p.W_V2, p.b_V2))
        ) < 1e-12

    worst = 0.0
    sums_ok = True
    for i in range(100):
        gen = np.random.default_rng(5000 + i)
        d = int(gen.integers(2, 9))
        C = int(gen.integers(0, 9))
        n = int(gen.integers(1, 4))
        m = int(gen.integers(1, 5))
        params = PrefixParams.random(d=d, C=C, seed=6000 + i)
        inst = AttentionInputs(
            Q=gen.normal(size=(n, d)), K=gen.normal(size=(m, d)), V=gen.normal(size=(m, d))
        )
        loss_pair = quadratic_loss() if i % 2 == 0 else weighted_sum_loss(gen.normal(size=(n, d)))
        worst = max(worst, gradient_check(params, inst, *loss_pair, step=1e-5))
        h_K, _ = prefix_vectors(params)
        P = softmax_rows(inst.Q @ np.vstack([h_K, inst.K]).T / np.sqrt(d))
        sums_ok = sums_ok and np.max(np.abs(P.sum(axis=1) - 1.0)) < 1e-12
    grad_ok = worst <= 1e-4
    _report(
        "prefix attention",
        empty_ok and rows_ok and mlp_ok and sums_ok and grad_ok,
        f"C=0 exact; softmax rows sum to 1 within 1e-12; "
        f"gradcheck max deviation {worst:.2e} over 100 instances (limit 1e-4)",
    )


def test_synthetic_prediction_rates(tmp_path):
    dataset = tmp_path / "data.json"
    write_grailqa_json(dataset, 1000, seed=17)
    run = tmp_path / "run"
    rc = main([
        "preprocess", "--dataset", str(dataset), "--out-dir", str(run),
        "--scheme", "char2", "--seed", "13",
        "--train-n", "0", "--dev-n", "0", "--test-n", "1000",
    ])
    assert rc == 0
    gold_rows = [json.loads(l) for l in (run / "test.jsonl").read_text().splitlines()]
    masked_by_id = {
        row["id"]: row["target"].split()
        for row in map(json.loads, (run / "masked.jsonl").read_text().splitlines())
    }
    golds_masked = [masked_by_id[row["id"]] for row in gold_rows]

    from sparqlsub.substitution import SubstitutionMap

    smap = SubstitutionMap.from_json(run / "map.json")
    results = {}
    for p in (0.0, 0.1, 0.25):
        preds = synthetic_predictions(golds_masked, smap, rate=p, seed=31)
        pred_file = tmp_path / f"preds_{p}.jsonl"
        pred_file.write_text("".join(
            json.dumps({"id": row["id"], "prediction": pred}) + "\n"
            for row, pred in zip(gold_rows, preds)
        ))
        rc = main([
            "evaluate", "--predictions", str(pred_file), "--gold", str(run / "test.jsonl"),
            "--map", str(run / "map.json"), "--out-prefix", str(tmp_path / f"report_{p}"),
        ])
        assert rc == 0
        report = json.loads((tmp_path / f"report_{p}.json").read_text())
        results[p] = report["exact_match_pct"]
    ok = all(abs(results[p] - 100.0 * (1.0 - p)) <= 0.5 for p in results)
    detail = ", ".join(f"p={p}: {em:.2f}%" for p, em in sorted(results.items()))
    _report("synthetic prediction rates", ok, detail)
