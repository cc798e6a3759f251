import json

import pytest

from sparqlsub.cli import main


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory, dataset_file):
    out = tmp_path_factory.mktemp("cli") / "run"
    rc = main([
        "preprocess", "--dataset", str(dataset_file), "--out-dir", str(out),
        "--scheme", "char2", "--seed", "13",
        "--train-n", "300", "--dev-n", "40", "--test-n", "60",
    ])
    assert rc == 0
    return out


def _gold_rows(run_dir):
    return [json.loads(l) for l in (run_dir / "test.jsonl").read_text().splitlines()]


def test_preprocess_outputs(run_dir):
    for name in ("train.jsonl", "dev.jsonl", "test.jsonl", "map.json", "manifest.json",
                 "masked.jsonl", "rejects.jsonl", "masking_config.json"):
        assert (run_dir / name).exists()
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["scheme"] == "char2"
    assert manifest["counts"]["train"] == 300


def test_preprocess_original_targets_equal_masked(tmp_path, dataset_file):
    out = tmp_path / "orig"
    rc = main([
        "preprocess", "--dataset", str(dataset_file), "--out-dir", str(out),
        "--scheme", "original",
        "--train-n", "300", "--dev-n", "40", "--test-n", "60",
    ])
    assert rc == 0
    masked = {r["id"]: r["target"] for r in map(json.loads, (out / "masked.jsonl").read_text().splitlines())}
    for name in ("train", "dev", "test"):
        for row in map(json.loads, (out / f"{name}.jsonl").read_text().splitlines()):
            assert row["target"] == masked[row["id"]]


def test_preprocess_missing_dataset(tmp_path, capsys):
    rc = main(["preprocess", "--dataset", str(tmp_path / "nope.json"), "--out-dir", str(tmp_path / "x")])
    assert rc == 1
    assert "preprocess" in capsys.readouterr().err


def test_preprocess_usage_error():
    with pytest.raises(SystemExit) as err:
        main(["preprocess", "--scheme", "bogus", "--dataset", "d", "--out-dir", "o"])
    assert err.value.code == 2


def test_stats_table(run_dir, capsys, tmp_path):
    stats_json = tmp_path / "stats.json"
    rc = main(["stats", "--run-dir", str(run_dir), "--json", str(stats_json)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "TSVS" in out and "ALFL" in out
    assert "original" in out and "char2" in out
    payload = json.loads(stats_json.read_text())
    assert payload["original"]["tsvs"] == 121
    assert 0 < payload["vocab_compression_ratio"] < 1


def test_evaluate_gold_against_itself(run_dir, tmp_path, capsys):
    preds = tmp_path / "preds.jsonl"
    preds.write_text("".join(
        json.dumps({"id": row["id"], "prediction": row["target"]}) + "\n"
        for row in _gold_rows(run_dir)
    ))
    rc = main([
        "evaluate", "--predictions", str(preds), "--gold", str(run_dir / "test.jsonl"),
        "--map", str(run_dir / "map.json"), "--out-prefix", str(tmp_path / "report"),
    ])
    assert rc == 0
    assert "exact match = 100.00" in capsys.readouterr().out
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["exact_match_pct"] == 100.0


def test_evaluate_detects_id_mismatch(run_dir, tmp_path, capsys):
    rows = _gold_rows(run_dir)
    preds = tmp_path / "preds.jsonl"
    preds.write_text(json.dumps({"id": "999999", "prediction": "x"}) + "\n")
    rc = main([
        "evaluate", "--predictions", str(preds), "--gold", str(run_dir / "test.jsonl"),
        "--map", str(run_dir / "map.json"),
    ])
    assert rc == 1
    err = capsys.readouterr().err
    assert "missing" in err and "extra=['999999']" in err
    assert rows  # gold rows were present, so some id must be reported missing


def test_evaluate_counts_raw_brace_as_non_printable(run_dir, tmp_path, capsys):
    rows = _gold_rows(run_dir)
    preds = tmp_path / "preds.jsonl"
    lines = []
    for i, row in enumerate(rows):
        target = row["target"]
        if i == 0:
            target = "{ " + target
        lines.append(json.dumps({"id": row["id"], "prediction": target}))
    preds.write_text("\n".join(lines) + "\n")
    rc = main([
        "evaluate", "--predictions", str(preds), "--gold", str(run_dir / "test.jsonl"),
        "--map", str(run_dir / "map.json"),
    ])
    assert rc == 0
    out = capsys.readouterr().out
    assert "non_printable" in out


def test_classify_writes_jsonl(run_dir, tmp_path):
    rows = _gold_rows(run_dir)
    preds = tmp_path / "preds.jsonl"
    preds.write_text("".join(
        json.dumps({"id": row["id"], "prediction": row["target"]}) + "\n" for row in rows
    ))
    out_file = tmp_path / "classes.jsonl"
    rc = main([
        "classify", "--predictions", str(preds), "--gold", str(run_dir / "test.jsonl"),
        "--map", str(run_dir / "map.json"), "--out", str(out_file),
    ])
    assert rc == 0
    classes = [json.loads(l) for l in out_file.read_text().splitlines()]
    assert len(classes) == len(rows)
    assert all(c["class"] == "correct" for c in classes)


def test_gradcheck_passes(capsys):
    rc = main(["gradcheck", "--instances", "4", "--dim", "3", "--prefix-len", "2"])
    assert rc == 0
    assert "max relative deviation" in capsys.readouterr().out


def test_gradcheck_tolerance_failure(capsys):
    rc = main(["gradcheck", "--instances", "2", "--tol", "1e-18"])
    assert rc == 1


def test_config_file_supplies_defaults(tmp_path, dataset_file, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "dataset": str(dataset_file),
        "out-dir": str(tmp_path / "run"),
        "scheme": "char1",
        "train-n": 300, "dev-n": 40, "test-n": 60,
    }))
    rc = main(["preprocess", "--config", str(cfg)])
    assert rc == 0
    assert (tmp_path / "run" / "manifest.json").exists()
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert manifest["scheme"] == "char1"


def test_idempotent_rerun_is_byte_identical(tmp_path, dataset_file):
    args = lambda out: [
        "preprocess", "--dataset", str(dataset_file), "--out-dir", str(out),
        "--scheme", "char8", "--seed", "29",
        "--train-n", "300", "--dev-n", "40", "--test-n", "60",
    ]
    assert main(args(tmp_path / "a")) == 0
    assert main(args(tmp_path / "b")) == 0
    for name in ("train.jsonl", "dev.jsonl", "test.jsonl", "map.json", "manifest.json"):
        a = (tmp_path / "a" / name).read_bytes()
        b = (tmp_path / "b" / name).read_bytes()
        if name == "manifest.json":
            a = a.replace(b"/a", b"/x")
            b = b.replace(b"/b", b"/x")
        assert a == b, name


def test_input_files_not_mutated(run_dir, dataset_file):
    before = dataset_file.read_bytes()
    assert main(["stats", "--run-dir", str(run_dir)]) == 0
    assert dataset_file.read_bytes() == before
