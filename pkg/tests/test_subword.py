import pytest

from sparqlsub.substitution import Vocabulary, generate_map, substitute
from sparqlsub.subword import (
    SubwordModel,
    VocabStats,
    alfl,
    compression_ratios,
    load_pieces,
    segment,
    segment_text,
    tsvs,
    vocab_stats,
)


def model_of(*pieces, marker=None):
    return SubwordModel(pieces=frozenset(pieces), boundary_marker=marker)


def test_single_piece_hit():
    assert segment(model_of("A"), "A") == ["A"]


def test_greedy_longest_match():
    # hand trace: at position 0 the two-character piece wins, then "C"
    assert segment(model_of("AB", "A", "B", "C"), "ABC") == ["AB", "C"]


def test_empty_word():
    assert segment(model_of("A"), "") == []


def test_unknown_characters_fall_back():
    assert segment(model_of("A"), "AXA") == ["A", "<unk>", "A"]


def test_marked_form_tried_first():
    m = model_of("▁AB", "AB", "A", "B", marker="▁")
    assert segment(m, "AB") == ["▁AB"]


def test_marker_alone_emitted_when_no_marked_match():
    m = model_of("▁", "*", marker="▁")
    assert segment(m, "*") == ["▁", "*"]


def test_faithful_concatenation(desk_model, corpus_vocab):
    marker = desk_model.boundary_marker
    for word in corpus_vocab:
        pieces = segment(desk_model, word)
        joined = "".join(p[len(marker):] if p.startswith(marker) else p for p in pieces)
        assert joined == word


def test_segment_text_splits_on_whitespace(desk_model):
    a = segment_text(desk_model, "SELECT DISTINCT")
    b = segment(desk_model, "SELECT") + segment(desk_model, "DISTINCT")
    assert a == b


def test_tsvs_trivial():
    assert tsvs(model_of("A", "B"), Vocabulary(("A", "B"))) == 2


def test_tsvs_bounds(desk_model, corpus_vocab):
    total = tsvs(desk_model, corpus_vocab)
    per_word = [segment(desk_model, w) for w in corpus_vocab]
    assert total <= sum(len(p) for p in per_word)
    assert total >= max(len(set(p)) for p in per_word)


def test_alfl_single_query_of_single_piece_tokens():
    m = model_of("A", "B", "C")
    assert alfl(m, [["A", "B", "C"]]) == 3.0


def test_alfl_empty_corpus_rejected(desk_model):
    with pytest.raises(ValueError):
        alfl(desk_model, [])


def test_compression_ratios_identity():
    assert compression_ratios((124, 125.0), (124, 125.0)) == (1.0, 1.0)


def test_compression_ratios_values():
    vocab_ratio, length_ratio = compression_ratios((124, 125.0), (57, 263.0))
    assert vocab_ratio == pytest.approx(57 / 124)
    assert length_ratio == pytest.approx(263 / 125)


def test_compression_ratio_zero_denominator():
    with pytest.raises(ValueError):
        compression_ratios((0, 1.0), (5, 5.0))


def test_vocab_stats_with_baseline(desk_model, corpus_vocab, masked_corpus):
    base = vocab_stats(desk_model, corpus_vocab, masked_corpus)
    assert isinstance(base, VocabStats)
    again = vocab_stats(desk_model, corpus_vocab, masked_corpus, baseline=base)
    assert again.vocab_compression_ratio == pytest.approx(1.0)
    assert again.length_compression_ratio == pytest.approx(1.0)


def test_statistics_deterministic(desk_model, corpus_vocab, masked_corpus):
    assert tsvs(desk_model, corpus_vocab) == tsvs(desk_model, corpus_vocab)
    assert alfl(desk_model, masked_corpus) == alfl(desk_model, masked_corpus)


def test_code_length_orderings(desk_model, corpus_vocab, corpus_census, masked_corpus):
    tsvs_by_n = {}
    alfl_by_n = {}
    for n in (1, 2, 4, 8):
        smap = generate_map(f"char{n}", corpus_vocab, seed=13, avoid=corpus_census)
        tsvs_by_n[n] = tsvs(desk_model, smap.forward.values())
        alfl_by_n[n] = alfl(desk_model, [substitute(s, smap) for s in masked_corpus])
    assert tsvs_by_n[1] < tsvs_by_n[2] < tsvs_by_n[4] < tsvs_by_n[8]
    assert alfl_by_n[1] < alfl_by_n[2] < alfl_by_n[4] < alfl_by_n[8]


def test_piece_file_loader(tmp_path):
    path = tmp_path / "pieces.txt"
    path.write_text("A\t-1.5\nBC\n\nD\n", encoding="utf-8")
    model = load_pieces(path)
    assert model.pieces == frozenset({"A", "BC", "D"})
    assert segment(model, "ABCD") == ["A", "BC", "D"]
