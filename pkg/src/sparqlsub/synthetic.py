"""Seeded GrailQA-format corpus generator for demos and desk-scale testing.

Real deployments point the pipeline at an actual GrailQA JSON export; this
module produces files with the same shape (``qid``/``question``/
``sparql_query`` entries, Freebase-style ids, PREFIX headers) whose masked
vocabulary is exactly the 48 reference words shipped in
``data/reference_vocab.txt``.  Generation is a pure function of (n, seed).
"""

from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path

_DOMAINS = (
    "aviation", "music", "sports", "medicine", "geography", "astronomy",
    "film", "education", "chemistry", "architecture", "biology", "finance",
    "computer", "religion", "military", "opera", "boats", "comic_books",
)
_NOUNS = (
    "airport", "album", "league", "disease", "river", "planet", "director",
    "school", "element", "bridge", "species", "currency", "processor",
    "temple", "regiment", "singer", "vessel", "publisher", "instrument",
    "stadium", "compound", "glacier", "satellite", "festival", "academy",
)
_ATTRS = (
    "airport_type", "release_year", "team_count", "risk_factor", "length",
    "mass", "film_count", "enrollment", "atomic_number", "span", "habitat",
    "issuer", "clock_speed", "height", "size", "genre", "tonnage", "title",
)
_QUESTION_HEADS = (
    "what", "which", "name the", "find the", "identify the", "list the",
)
_COMPARATORS = ("<", ">", "<=", ">=", "=")
_XSD_TYPES = ("xsd:integer", "xsd:float", "xsd:dateTime", "xsd:gYear")

_MID_ALPHABET = "0123456789bcdfghjklmnpqrstvwxyz_"

PREFIX_HEADER = (
    "PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#> "
    "PREFIX rdfs: <http://www.w3.org/2000/01/rdf-schema#> "
    "PREFIX : <http://rdf.freebase.com/ns/> "
)


def expected_vocabulary() -> tuple[str, ...]:
    """The 48 reference masked-vocabulary words, from the packaged data file."""
    text = resources.files("sparqlsub.data").joinpath("reference_vocab.txt").read_text("utf-8")
    return tuple(w.strip() for w in text.splitlines() if w.strip())


def _mid(rng: random.Random) -> str:
    return ":m.0" + "".join(rng.choice(_MID_ALPHABET) for _ in range(rng.randint(4, 6)))


def _domain_type(rng: random.Random) -> str:
    return f":{rng.choice(_DOMAINS)}.{rng.choice(_NOUNS)}"


def _relation(rng: random.Random) -> str:
    return f":{rng.choice(_DOMAINS)}.{rng.choice(_NOUNS)}.{rng.choice(_ATTRS)}"


def _distinct(rng: random.Random, fn, k: int) -> list[str]:
    out: list[str] = []
    while len(out) < k:
        cand = fn(rng)
        if cand not in out:
            out.append(cand)
    return out


def _literal(rng: random.Random, kind: str) -> str:
    if kind == "xsd:integer":
        return f'"{rng.randint(1, 5000)}"^^xsd:integer'
    if kind == "xsd:float":
        return f'"{rng.randint(1, 400)}.{rng.randint(0, 9)}"^^xsd:float'
    if kind == "xsd:dateTime":
        return (
            f'"{rng.randint(1900, 2020)}-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}'
            f'T{rng.randint(0, 23):02d}:{rng.randint(0, 59):02d}:00"^^xsd:dateTime'
        )
    return f'"{rng.randint(1700, 2020)}"^^xsd:gYear'


def _topic(rng: random.Random) -> str:
    return f"{rng.choice(_QUESTION_HEADS)} {rng.choice(_NOUNS)}"


def _q_iid(rng: random.Random) -> tuple[str, str]:
    dom = _domain_type(rng)
    rel = _relation(rng)
    mid = _mid(rng)
    sparql = (
        "SELECT DISTINCT ?x0 WHERE { "
        f"?x0 :type.object.type {dom} . "
        f"VALUES ?x1 {{ {mid} }} "
        f"?x0 {rel} ?x1 . "
        "FILTER ( ?x0 != ?x1 ) }"
    )
    return f"{_topic(rng)} is linked to the topic {mid[3:]} ?", sparql


def _q_count(rng: random.Random) -> tuple[str, str]:
    _, inner = _q_iid(rng)
    sparql = "SELECT ( COUNT ( ?x0 ) AS ?value ) WHERE { " + inner + " }"
    return f"how many {rng.choice(_NOUNS)}s are linked to that topic ?", sparql


def _q_compare(rng: random.Random, comparator: str | None = None, xsd: str | None = None) -> tuple[str, str]:
    dom = _domain_type(rng)
    rel = _relation(rng)
    cmp_op = comparator or rng.choice(_COMPARATORS)
    kind = xsd or rng.choice(_XSD_TYPES + (None,))
    value = _literal(rng, kind) if kind else str(rng.randint(1, 900)) + "." + str(rng.randint(0, 9))
    sparql = (
        "SELECT DISTINCT ?x0 WHERE { "
        f"?x0 :type.object.type {dom} . "
        f"?x0 {rel} ?x1 . "
        f"FILTER ( ?x1 {cmp_op} {value} ) }}"
    )
    return f"{_topic(rng)} has a value {cmp_op} the bound ?", sparql


def _q_superlative(rng: random.Random, direction: str | None = None) -> tuple[str, str]:
    dom = _domain_type(rng)
    rel = _relation(rng)
    order = direction or rng.choice(("DESC", "ASC"))
    sparql = (
        "SELECT DISTINCT ?x0 WHERE { "
        f"?x0 :type.object.type {dom} . "
        f"?x0 {rel} ?x1 . }} "
        f"ORDER BY {order} ( ?x1 ) LIMIT 1"
    )
    word = "largest" if order == "DESC" else "smallest"
    return f"{_topic(rng)} has the {word} value ?", sparql


def _q_aggregate(rng: random.Random, agg: str | None = None) -> tuple[str, str]:
    dom = _domain_type(rng)
    rel = _relation(rng)
    fn = agg or rng.choice(("MAX", "MIN"))
    sparql = (
        f"SELECT ( {fn} ( ?x1 ) AS ?value ) WHERE {{ "
        "SELECT DISTINCT ?x1 WHERE { "
        f"?x0 :type.object.type {dom} . "
        f"?x0 {rel} ?x1 . }} }}"
    )
    return f"what is the {fn.lower()} value over those records ?", sparql


def _q_multihop(rng: random.Random) -> tuple[str, str]:
    dom = _domain_type(rng)
    r1, r2 = _distinct(rng, _relation, 2)
    mid = _mid(rng)
    bound = ""
    if rng.random() < 0.5:
        r3 = _relation(rng)
        while r3 in (r1, r2):
            r3 = _relation(rng)
        value = _literal(rng, rng.choice(_XSD_TYPES))
        bound = f"?x2 {r3} ?x3 . FILTER ( ?x3 {rng.choice(_COMPARATORS)} {value} ) "
    sparql = (
        "SELECT DISTINCT ?x0 WHERE { "
        f"?x0 :type.object.type {dom} . "
        f"VALUES ?x1 {{ {mid} }} "
        f"?x0 {r1} ?x2 . "
        f"?x2 {r2} ?x1 . "
        f"{bound}"
        "FILTER ( ?x0 != ?x1 ) FILTER ( ?x0 != ?x2 ) }"
    )
    return f"{_topic(rng)} connects through an intermediate to {mid[3:]} ?", sparql


def _q_deep_chain(rng: random.Random) -> tuple[str, str]:
    dom1, dom2 = _distinct(rng, _domain_type, 2)
    r1, r2, r3, r4, r5 = _distinct(rng, _relation, 5)
    mid = _mid(rng)
    sparql = (
        "SELECT DISTINCT ?x0 WHERE { "
        f"?x0 :type.object.type {dom1} . "
        f"VALUES ?x1 {{ {mid} }} "
        f"?x0 {r1} ?x2 . "
        f"?x2 :type.object.type {dom2} . "
        f"?x2 {r2} ?x3 . "
        f"?x3 {r3} ?x4 . "
        f"?x4 {r4} ?x1 . "
        f"?x0 {r5} ?x1 . "
        "FILTER ( ?x0 != ?x2 ) }"
    )
    return f"{_topic(rng)} reaches {mid[3:]} over a long chain ?", sparql


def _q_multi_entity(rng: random.Random) -> tuple[str, str]:
    dom = _domain_type(rng)
    r1, r2, r3, r4 = _distinct(rng, _relation, 4)
    m1, m2, m3, m4 = _distinct(rng, _mid, 4)
    sparql = (
        "SELECT DISTINCT ?x0 WHERE { "
        f"?x0 :type.object.type {dom} . "
        f"VALUES ?x1 {{ {m1} }} "
        f"VALUES ?x2 {{ {m2} }} "
        f"VALUES ?x3 {{ {m3} }} "
        f"VALUES ?x4 {{ {m4} }} "
        f"?x0 {r1} ?x1 . "
        f"?x0 {r2} ?x2 . "
        f"?x0 {r3} ?x3 . "
        f"?x0 {r4} ?x4 . }}"
    )
    return f"{_topic(rng)} is linked to all four topics ?", sparql


_WEIGHTED_TEMPLATES = (
    (_q_iid, 22),
    (_q_count, 14),
    (_q_compare, 24),
    (_q_superlative, 8),
    (_q_aggregate, 6),
    (_q_multihop, 14),
    (_q_deep_chain, 7),
    (_q_multi_entity, 5),
)


def _coverage_block(rng: random.Random) -> list[tuple[str, str]]:
    """One instance per construction so small corpora cover all 48 words."""
    block = [
        _q_iid(rng),
        _q_count(rng),
        _q_superlative(rng, "DESC"),
        _q_superlative(rng, "ASC"),
        _q_aggregate(rng, "MAX"),
        _q_aggregate(rng, "MIN"),
        _q_multihop(rng),
        _q_deep_chain(rng),
        _q_multi_entity(rng),
    ]
    for cmp_op in _COMPARATORS:
        block.append(_q_compare(rng, comparator=cmp_op))
    for kind in _XSD_TYPES:
        block.append(_q_compare(rng, xsd=kind))
    return block


def generate_corpus(n: int, seed: int = 0) -> list[dict]:
    """``n`` GrailQA-shaped records: qid, question, sparql_query."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = random.Random(seed)
    pairs = _coverage_block(rng)[:n]
    templates = [fn for fn, w in _WEIGHTED_TEMPLATES for _ in range(w)]
    while len(pairs) < n:
        pairs.append(rng.choice(templates)(rng))
    records = []
    for i, (question, sparql) in enumerate(pairs[:n]):
        records.append(
            {
                "qid": str(2000000 + i),
                "question": question,
                "sparql_query": PREFIX_HEADER + sparql,
            }
        )
    return records


def write_grailqa_json(path: str | Path, n: int, seed: int = 0) -> None:
    Path(path).write_text(
        json.dumps(generate_corpus(n, seed), indent=1) + "\n", encoding="utf-8"
    )
