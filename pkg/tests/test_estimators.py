import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.pipeline import Pipeline

from sparqlsub.estimators import QueryMasker, SubwordSegmenter, VocabSubstituter
from sparqlsub.masking import MaskingResult
from sparqlsub.synthetic import generate_corpus

QUERIES = [rec["sparql_query"] for rec in generate_corpus(40, seed=21)]


def test_masker_transform_and_inverse():
    masker = QueryMasker().fit()
    results = masker.transform(QUERIES)
    assert all(isinstance(r, MaskingResult) for r in results)
    restored = masker.inverse_transform(results)
    remasked = masker.transform(restored)
    assert [r.masked for r in remasked] == [r.masked for r in results]


def test_masker_get_set_params():
    masker = QueryMasker(strip_prefixes=False)
    params = masker.get_params()
    assert params["strip_prefixes"] is False
    cloned = clone(masker)
    assert cloned.get_params() == params


def test_substituter_fit_transform_inverse():
    masked = [list(r.masked) for r in QueryMasker().fit().transform(QUERIES)]
    sub = VocabSubstituter(scheme="char2", seed=13).fit(masked)
    assert len(sub.vocabulary_) == 48
    out = sub.transform(masked)
    assert [len(s) for s in out] == [len(s) for s in masked]
    assert sub.inverse_transform(out) == masked


def test_substituter_accepts_masking_results():
    results = QueryMasker().fit().transform(QUERIES)
    sub = VocabSubstituter(scheme="dictionary", seed=7).fit(results)
    out = sub.transform(results)
    assert sub.inverse_transform(out) == [list(r.masked) for r in results]


def test_substituter_requires_fit():
    with pytest.raises(NotFittedError):
        VocabSubstituter().transform([["SELECT"]])


def test_substituter_rejects_unknown_scheme():
    with pytest.raises(ValueError):
        VocabSubstituter(scheme="charZ").fit([["SELECT"]])


def test_pipeline_composition():
    pipe = Pipeline([
        ("mask", QueryMasker()),
        ("sub", VocabSubstituter(scheme="char4", seed=3)),
    ])
    out = pipe.fit_transform(QUERIES)
    assert len(out) == len(QUERIES)
    assert all(isinstance(seq, list) for seq in out)


def test_segmenter_default_model():
    seg = SubwordSegmenter().fit()
    pieces = seg.transform(["SELECT", "DISTINCT"])
    assert pieces[0] == ["▁SE", "LECT"]


def test_segmenter_custom_pieces(tmp_path):
    path = tmp_path / "pieces.txt"
    path.write_text("AB\nA\nB\nC\n")
    seg = SubwordSegmenter(pieces_path=str(path)).fit()
    assert seg.transform(["ABC"]) == [["AB", "C"]]


def test_segmenter_clone_keeps_params(tmp_path):
    seg = SubwordSegmenter(boundary_marker="_", unknown_piece="?")
    assert clone(seg).get_params() == seg.get_params()
