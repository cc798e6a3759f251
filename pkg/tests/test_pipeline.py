import json
import logging

import pytest

from sparqlsub.lexer import lex_sparql
from sparqlsub.masking import MaskingConfig
from sparqlsub.pipeline import (
    IngestionError,
    QARecord,
    SplitSpec,
    apply_masking,
    export_jsonl,
    load_grailqa,
    run_preprocessing,
    split_records,
    strip_prefix_decls,
    vocabulary_report,
)
from sparqlsub.substitution import desubstitute
from sparqlsub.masking import demask
from sparqlsub.synthetic import expected_vocabulary


def test_load_counts(dataset_file):
    records = load_grailqa(dataset_file)
    assert len(records) == 400
    assert all(rec.qid and rec.question and rec.sparql for rec in records)


def test_load_empty_array(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("[]")
    assert load_grailqa(path) == []


def test_load_skips_malformed_with_warning(tmp_path, caplog):
    path = tmp_path / "mixed.json"
    path.write_text(json.dumps([
        {"qid": 1, "question": "q ?", "sparql_query": "SELECT ?x WHERE { ?x :a.b :c.d }"},
        {"qid": 2, "question": "no query"},
    ]))
    with caplog.at_level(logging.WARNING):
        records = load_grailqa(path)
    assert len(records) == 1
    assert "skipped 1" in caplog.text


def test_load_unparseable_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(IngestionError):
        load_grailqa(path)
    with pytest.raises(IngestionError):
        load_grailqa(tmp_path / "missing.json")


def test_strip_prefix_decls():
    tokens = lex_sparql(
        "PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> "
        "PREFIX : <http://rdf.freebase.com/ns/> SELECT ?x"
    )
    assert strip_prefix_decls(tokens) == ["SELECT", "?x"]


def test_split_sizes_and_disjointness(dataset_file):
    records = load_grailqa(dataset_file)
    train, dev, test = split_records(records, SplitSpec(300, 40, 60, seed=1))
    assert (len(train), len(dev), len(test)) == (300, 40, 60)
    ids = [r.qid for r in train + dev + test]
    assert len(set(ids)) == 400


def test_split_determinism(dataset_file):
    records = load_grailqa(dataset_file)
    a = split_records(records, SplitSpec(10, 5, 5, seed=9))
    b = split_records(records, SplitSpec(10, 5, 5, seed=9))
    assert [r.qid for r in a[0]] == [r.qid for r in b[0]]
    c = split_records(records, SplitSpec(10, 5, 5, seed=10))
    assert [r.qid for r in a[0]] != [r.qid for r in c[0]]


def test_split_at_grailqa_scale():
    records = [QARecord(qid=str(i), question="q ?", sparql="ASK { }") for i in range(44337)]
    train, dev, test = split_records(records, SplitSpec(31035, 4434, 8868, seed=0))
    assert (len(train), len(dev), len(test)) == (31035, 4434, 8868)
    assert len({r.qid for r in train} | {r.qid for r in dev} | {r.qid for r in test}) == 44337


def test_split_single_record():
    rec = QARecord(qid="1", question="q", sparql="ASK { }")
    train, dev, test = split_records([rec], SplitSpec(1, 0, 0))
    assert train == [rec] and dev == [] and test == []


def test_split_oversize_rejected(dataset_file):
    records = load_grailqa(dataset_file)
    with pytest.raises(ValueError):
        split_records(records, SplitSpec(400, 1, 0))


def test_apply_masking_quarantines_bad_records():
    records = [
        QARecord(qid="ok", question="q", sparql="SELECT ?x WHERE { ?x :a.b :c.d . }"),
        QARecord(qid="bad", question="q", sparql='ASK WHERE "unterminated'),
    ]
    ok, rejects = apply_masking(records)
    assert [r.qid for r in ok] == ["ok"]
    assert [r.qid for r in rejects] == ["bad"]
    assert "string literal" in rejects[0].error


def test_export_byte_determinism(tmp_path, dataset_file):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        run_preprocessing(
            dataset_file, out, scheme="char2", seed=13,
            split=SplitSpec(300, 40, 60, seed=1),
        )
    for name in ("train.jsonl", "dev.jsonl", "test.jsonl", "map.json", "masked.jsonl"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_export_reload_fixpoint(tmp_path, dataset_file):
    out = tmp_path / "run"
    result = run_preprocessing(
        dataset_file, out, scheme="dictionary", seed=7,
        split=SplitSpec(300, 40, 60, seed=1),
    )
    rows = [json.loads(l) for l in (out / "test.jsonl").read_text().splitlines()]
    assert len(rows) == 60
    assert set(rows[0]) == {"id", "input", "target"}
    reexport = tmp_path / "again.jsonl"
    export_jsonl(result.test, "dictionary", reexport)
    assert reexport.read_bytes() == (out / "test.jsonl").read_bytes()


def test_end_to_end_round_trip(tmp_path, dataset_file):
    out = tmp_path / "run"
    result = run_preprocessing(
        dataset_file, out, scheme="char4", seed=29,
        split=SplitSpec(300, 40, 60, seed=1),
    )
    config = MaskingConfig()
    for rec in result.train + result.dev + result.test:
        back = desubstitute(rec.substituted, result.smap).tokens
        assert back == rec.masked
        original = demask(rec.masking, config)
        assert original == strip_prefix_decls(lex_sparql(rec.sparql))


def test_manifest_contents(tmp_path, dataset_file):
    out = tmp_path / "run"
    result = run_preprocessing(
        dataset_file, out, scheme="char2", seed=13,
        split=SplitSpec(300, 40, 60, seed=1),
        reference_vocab=expected_vocabulary(),
    )
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["counts"]["masked"] == 400
    assert manifest["counts"]["rejected"] == 0
    assert manifest["vocabulary"]["count"] == 48
    assert manifest["vocabulary"]["matches_expected"] is True
    assert set(manifest["hashes"]) == {"masking_config", "map", "train", "dev", "test"}
    assert manifest == result.manifest


def test_vocabulary_report_diff(corpus_vocab):
    reference = list(expected_vocabulary())[:-1] + ["EXTRA_WORD"]
    report = vocabulary_report(corpus_vocab, reference)
    assert report["count"] == 48
    assert report["matches_expected"] is False
    assert report["missing"] == ["EXTRA_WORD"]
    assert report["unexpected"] == ["rel6"]
