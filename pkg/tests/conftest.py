import pytest

from sparqlsub.deskmodel import desk_subword_model
from sparqlsub.lexer import lex_sparql
from sparqlsub.masking import MaskingConfig, mask
from sparqlsub.pipeline import strip_prefix_decls
from sparqlsub.substitution import extract_vocabulary, literal_census
from sparqlsub.synthetic import generate_corpus, write_grailqa_json

CORPUS_N = 1200
CORPUS_SEED = 5
MAP_SEEDS = (7, 13, 29)


@pytest.fixture(scope="session")
def masking_config():
    return MaskingConfig()


@pytest.fixture(scope="session")
def masked_corpus(masking_config):
    """1200 generated queries, lexed, prefix-stripped and masked."""
    corpus = generate_corpus(CORPUS_N, seed=CORPUS_SEED)
    out = []
    for rec in corpus:
        tokens = strip_prefix_decls(lex_sparql(rec["sparql_query"]))
        out.append(list(mask(tokens, masking_config).masked))
    return out


@pytest.fixture(scope="session")
def corpus_vocab(masked_corpus):
    return extract_vocabulary(masked_corpus, source_corpus_id="synthetic-1200")


@pytest.fixture(scope="session")
def corpus_census(masked_corpus):
    return literal_census(masked_corpus)


@pytest.fixture(scope="session")
def desk_model():
    return desk_subword_model()


@pytest.fixture(scope="session")
def dataset_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "grailqa_like.json"
    write_grailqa_json(path, 400, seed=3)
    return path
