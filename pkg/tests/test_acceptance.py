"""Acceptance suite: every guarantee the package makes, checked end to end.

Each test carries a ``criterion`` marker; the terminal summary prints
one PASS/FAIL line per criterion. Oracles here are deliberately
independent re-implementations (arbitrary-precision arithmetic,
factorial brute force, exhaustive scans, a standalone grammar checker)
rather than calls back into the code under test. Everything runs
offline; the whole suite stays well under two minutes.
"""

import itertools
import random
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from loke import datasets, evaluation, extractor, kb, linker, rdf
from loke.model import EntityRecord, PropertyRecord, RawTriple, normalize, tokenize

import ntcheck
from conftest import FIXTURES
from test_kernels import reference_levenshtein

# ---------------------------------------------------------------------------
# confidence formula


@pytest.mark.criterion("confidence formula matches arbitrary-precision oracle")
def test_confidence_formula_sweep():
    import mpmath

    mpmath.mp.dps = 50
    p = mpmath.mpf("0.999")
    u = mpmath.mpf("0.5")
    previous = None
    for eps in range(10001):
        expected = float((1 - u) + u * p**eps)
        got = linker.link_confidence(eps)
        assert abs(got - expected) <= 1e-12, f"eps={eps}: {got} vs {expected}"
        if previous is not None:
            assert got <= previous, f"confidence increased at eps={eps}"
        previous = got


@pytest.mark.criterion("confidence formula matches arbitrary-precision oracle")
def test_confidence_anchor_values():
    assert linker.link_confidence(0) == 1.0
    assert abs(linker.link_confidence(693) - 0.75) <= 1e-4


@pytest.mark.criterion("confidence formula matches arbitrary-precision oracle")
@given(
    eps=st.integers(min_value=0, max_value=5000),
    step=st.integers(min_value=1, max_value=5000),
    p=st.floats(min_value=0.01, max_value=0.99),
    u=st.floats(min_value=0.01, max_value=0.99),
)
def test_confidence_monotone_property(eps, step, p, u):
    params = linker.ConfidenceParams(p=p, u=u)
    assert linker.link_confidence(eps + step, params) <= linker.link_confidence(
        eps, params
    )


# ---------------------------------------------------------------------------
# published-table consistency


@pytest.mark.criterion("published table rows are internally consistent")
@pytest.mark.parametrize(
    "precision,recall,f1",
    [
        (0.005, 0.009, 0.007),
        (0.248, 0.195, 0.218),
        (0.101, 0.28, 0.148),
    ],
    ids=["baseline-row", "linked-row", "unlinked-row"],
)
def test_table_row_consistency(precision, recall, f1):
    # the baseline row is known-bad: F1(0.005, 0.009) = 0.00643, which
    # misses the printed 0.007 by more than the tolerance. Kept as
    # stated rather than widened; see the README's evaluation notes.
    assert abs(evaluation.f1_score(precision, recall) - f1) <= 0.0005


# ---------------------------------------------------------------------------
# sentence scorer vs factorial brute force


def _bag(triple):
    tokens = Counter()
    for slot in (triple.subject, triple.predicate, triple.object):
        tokens.update(tokenize(slot))
    return tokens


def _pair(pred_bag, gold_bag):
    shared = sum((pred_bag & gold_bag).values())
    precision = Fraction(shared, sum(pred_bag.values())) if pred_bag else Fraction(0)
    recall = Fraction(shared, sum(gold_bag.values())) if gold_bag else Fraction(0)
    return precision, recall


def brute_force_scores(preds, golds):
    """Exact (precision_sum, recall_sum) by enumerating every assignment."""
    pred_bags = [_bag(t) for t in preds]
    gold_bags = [_bag(t) for t in golds]
    precision_sum = Fraction(0)
    for pred_bag in pred_bags:
        best = Fraction(0)
        for gold_bag in gold_bags:
            best = max(best, _pair(pred_bag, gold_bag)[0])
        precision_sum += best

    recall_sum = Fraction(0)
    k = min(len(preds), len(golds))
    for gold_idx in itertools.combinations(range(len(golds)), k):
        for pred_idx in itertools.permutations(range(len(preds)), k):
            total = sum(
                (_pair(pred_bags[pi], gold_bags[gi])[1] for pi, gi in zip(pred_idx, gold_idx)),
                Fraction(0),
            )
            recall_sum = max(recall_sum, total)
    return precision_sum, recall_sum


@pytest.mark.criterion("sentence scorer equals factorial brute force")
def test_scorer_against_brute_force():
    rng = random.Random(20230817)
    vocab = ["alpha", "beta", "gamma", "delta", "epsilon", "zeta"]

    def term():
        return " ".join(rng.choices(vocab, k=rng.randint(1, 2)))

    def triple():
        return RawTriple(term(), rng.choice(vocab), term())

    for round_no in range(200):
        preds = [triple() for _ in range(rng.randint(0, 4))]
        golds = [triple() for _ in range(rng.randint(0, 4))]
        got_p, got_r = evaluation.score_sentence(preds, golds)
        want_p, want_r = brute_force_scores(preds, golds)
        assert got_p == float(want_p), f"round {round_no}: precision"
        assert got_r == float(want_r), f"round {round_no}: recall"


# ---------------------------------------------------------------------------
# linker vs exhaustive scan


def exhaustive_link(records, query):
    """Replicate the linking contract without the inverted index."""
    query_tokens = set(tokenize(query))
    pool = []
    for record in records:
        for label in {record.preferred_label, *record.aliases}:
            score = len(query_tokens & set(tokenize(label)))
            if score:
                pool.append((record.id, label, score))
    pool.sort(key=lambda row: (-row[2], len(row[1]), row[0], row[1]))
    pool = pool[:10]
    if not pool:
        return None
    best = None
    for record_id, label, score in pool:
        eps = reference_levenshtein(normalize(query), normalize(label))
        key = (eps, -score, int(record_id[1:]), label)
        if best is None or key < best[0]:
            best = (key, record_id, label, eps)
    return best[1], best[2], best[3]


@pytest.mark.criterion("linker equals exhaustive-scan oracle")
def test_link_term_against_exhaustive_scan():
    rng = random.Random(1789)
    for _ in range(100):
        vocab = [f"w{k}" for k in range(rng.randint(8, 40))]
        records = []
        for i in range(1, rng.randint(5, 1000) + 1):
            label = " ".join(rng.choices(vocab, k=rng.randint(1, 3)))
            aliases = [
                " ".join(rng.choices(vocab, k=rng.randint(1, 2)))
                for _ in range(rng.randint(0, 2))
            ]
            records.append(EntityRecord(f"Q{i}", label, aliases))
        index = kb.build_index(records, "entity")

        for _ in range(10):
            query = " ".join(rng.choices(vocab, k=rng.randint(1, 3)))
            got = linker.link_term(index, query)
            want = exhaustive_link(records, query)
            if want is None:
                assert got is None, f"query {query!r} should not link"
            else:
                assert got is not None, f"query {query!r} should link"
                assert (got.id, got.matched_label, got.edit_distance) == want


# ---------------------------------------------------------------------------
# end-to-end replay


SENTENCES = [
    "Tiram is a town and Village Development Committee in Pyuthan, "
    "a Middle Hills district of Rapti Zone, western Nepal.",
    "Toxabramis maensis is a species of ray-finned fish in the genus Toxabramis.",
    "Bahaa al-Farra (born 10 March 1991) is a Palestinian runner from Gaza.",
]

EXPECTED_TRIPLES = [
    ["Tiram", "type", "town"],
    ["Tiram", "type", "Village Development Committee"],
    ["Tiram", "location", "Pyuthan"],
    ["Pyuthan", "type", "Middle Hills district"],
    ["Pyuthan", "location", "Rapti Zone"],
    ["Rapti Zone", "location", "western Nepal"],
    ["Toxabramis maensis", "species", "ray-finned fish"],
    ["Toxabramis maensis", "genus", "Toxabramis"],
    ["Bahaa al-Farra", "born", "10 March 1991", "date"],
    ["Bahaa al-Farra", "citizenship", "Palestine"],
    ["Bahaa al-Farra", "occupation", "runner"],
    ["Bahaa al-Farra", "location", "Gaza"],
]

E = "http://www.wikidata.org/entity/"
D = "http://www.wikidata.org/prop/direct/"
L = "http://example.org/loke/"

EXPECTED_NTRIPLES = sorted(
    [
        f"<{E}Q7001> <{D}P31> <{E}Q7002> .",
        f"<{E}Q7001> <{D}P31> <{E}Q7003> .",
        f"<{E}Q7001> <{D}P276> <{E}Q7004> .",
        f"<{E}Q7004> <{D}P31> <{E}Q7006> .",
        f"<{E}Q7004> <{D}P276> <{E}Q7005> .",
        f"<{E}Q7005> <{D}P276> <{E}Q837> .",
        f"<{E}Q7008> <{L}species> <{E}Q7010> .",
        f"<{E}Q7008> <{D}P171> <{E}Q7009> .",
        f'<{E}Q7011> <{D}P569> "10 March 1991"'
        "^^<http://www.w3.org/2001/XMLSchema#date> .",
        f"<{E}Q7011> <{D}P27> <{E}Q219060> .",
        f"<{E}Q7011> <{D}P106> <{E}Q7014> .",
        f"<{E}Q7011> <{D}P276> <{E}Q7013> .",
    ]
)


@pytest.fixture(scope="module")
def replay_results():
    backend = extractor.ReplayBackend.from_file(str(FIXTURES / "replay.jsonl"))
    template = extractor.PromptTemplate.default()
    return [extractor.extract(backend, template, s) for s in SENTENCES]


@pytest.fixture(scope="module")
def linked_statements(replay_results, entity_index, property_index):
    return [
        (result.sentence, linker.link_statement(t, entity_index, property_index))
        for result in replay_results
        for t in result.triples
    ]


@pytest.mark.criterion("end-to-end replay reproduces the worked example")
def test_replay_triples_verbatim(replay_results):
    rows = [t.to_list() for r in replay_results for t in r.triples]
    assert rows == EXPECTED_TRIPLES
    assert not any(r.parse_warnings for r in replay_results)
    born = replay_results[2].triples[0]
    assert born.literal_type == "date"


@pytest.mark.criterion("end-to-end replay reproduces the worked example")
def test_replay_statement_confidences(linked_statements):
    by_raw = {tuple(stmt.raw.to_list()): stmt for _, stmt in linked_statements}
    inexact = {
        ("Pyuthan", "type", "Middle Hills district"),
        ("Rapti Zone", "location", "western Nepal"),
        ("Toxabramis maensis", "species", "ray-finned fish"),
    }
    for row in EXPECTED_TRIPLES:
        if tuple(row) in inexact:
            continue
        assert by_raw[tuple(row)].statement_confidence == 1.0, row
    # two statements link at a distance, one predicate not at all
    middle_hills = by_raw[("Pyuthan", "type", "Middle Hills district")]
    assert middle_hills.statement_confidence == pytest.approx(
        linker.link_confidence(9), abs=1e-15
    )
    western = by_raw[("Rapti Zone", "location", "western Nepal")]
    assert western.statement_confidence == pytest.approx(
        linker.link_confidence(8), abs=1e-15
    )
    species = by_raw[("Toxabramis maensis", "species", "ray-finned fish")]
    assert species.predicate_link is None
    assert species.statement_confidence is None


@pytest.mark.criterion("end-to-end replay reproduces the worked example")
def test_replay_label_correction(linked_statements):
    by_raw = {tuple(stmt.raw.to_list()): stmt for _, stmt in linked_statements}
    corrected = linker.correct_labels(by_raw[("Bahaa al-Farra", "citizenship", "Palestine")])
    assert corrected.to_list() == [
        "Bahaa al-Farra",
        "country of citizenship",
        "State of Palestine",
    ]
    corrected = linker.correct_labels(
        by_raw[("Bahaa al-Farra", "born", "10 March 1991", "date")]
    )
    assert corrected.to_list() == [
        "Bahaa al-Farra",
        "date of birth",
        "10 March 1991",
        "date",
    ]
    assert (
        linker.correct_labels(by_raw[("Bahaa al-Farra", "occupation", "runner")]).object
        == "athletics competitor"
    )
    assert linker.correct_labels(by_raw[("Tiram", "type", "town")]).predicate == "instance of"
    assert (
        linker.correct_labels(by_raw[("Toxabramis maensis", "genus", "Toxabramis")]).predicate
        == "parent taxon"
    )
    assert (
        linker.correct_labels(by_raw[("Rapti Zone", "location", "western Nepal")]).object
        == "Nepal"
    )


@pytest.mark.criterion("end-to-end replay reproduces the worked example")
def test_replay_ntriples_line_for_line(linked_statements):
    text = rdf.emit([stmt for _, stmt in linked_statements])
    lines = text.splitlines()
    assert lines == EXPECTED_NTRIPLES
    # the independent grammar checker accepts every line
    assert len(ntcheck.check_document(text)) == len(EXPECTED_NTRIPLES)


@pytest.mark.criterion("end-to-end replay reproduces the worked example")
def test_replay_scores_against_reference_triples(linked_statements):
    golds = {
        normalize(record.sentence): list(record.gold_triples)
        for record in datasets.load_tekgen(str(FIXTURES / "gold.jsonl"))
    }
    groups = {}
    for sentence, stmt in linked_statements:
        groups.setdefault(normalize(sentence), []).append(stmt)
    items = [(groups.get(key, []), gold) for key, gold in golds.items()]
    report = evaluation.score_corpus(items)
    assert report.golds == 3 and report.predictions == 12
    assert report.optimal.recall > 0

    born_pred = RawTriple("Bahaa al-Farra", "born", "10 March 1991", "date")
    born_gold = RawTriple("Bahaa al-Farra", "date of birth", "10 March 1991")
    pair = evaluation.tuple_match(born_pred, born_gold)
    assert pair.pair_recall >= float(Fraction(5, 8))


# ---------------------------------------------------------------------------
# AUC toy curve


@pytest.mark.criterion("AUC of the documented toy curve")
def test_auc_toy_curve():
    auc = evaluation.curve_auc([(0.5, 1.0), (1.0, 0.5)])
    assert abs(auc - 0.875) <= 1e-9


# ---------------------------------------------------------------------------
# linkability invariants


@pytest.mark.criterion("linkability fraction invariants")
def test_linkability_random_invariants():
    rng = random.Random(5150)
    for _ in range(100):
        vocab = [f"v{k}" for k in range(rng.randint(4, 12))]

        def term():
            return " ".join(rng.choices(vocab, k=rng.randint(1, 2)))

        entities = kb.build_index(
            [EntityRecord(f"Q{i}", term()) for i in range(1, rng.randint(2, 20))],
            "entity",
        )
        properties = kb.build_index(
            [PropertyRecord(f"P{i}", term()) for i in range(1, rng.randint(2, 8))],
            "property",
        )
        triples = [
            RawTriple(term(), term(), term(), "year" if rng.random() < 0.3 else None)
            for _ in range(rng.randint(1, 15))
        ]
        report = evaluation.linkability(triples, entities, properties)
        for frac in (report.s_frac, report.p_frac, report.o_frac, report.t_frac):
            assert 0.0 <= frac <= 1.0
        assert report.t_frac <= min(report.s_frac, report.p_frac, report.o_frac) + 1e-12
        literal_count = sum(1 for t in triples if t.literal_type is not None)
        assert report.o_count <= len(triples) - literal_count


@pytest.mark.criterion("linkability fraction invariants")
def test_linkability_literal_objects_never_link(entity_index, property_index):
    # object label is a perfectly linkable entity, but the literal tag wins
    triples = [RawTriple("Tiram", "country", "Nepal", "date")]
    report = evaluation.linkability(triples, entity_index, property_index)
    assert report.o_frac == 0.0 and report.t_frac == 0.0


@pytest.mark.criterion("linkability fraction invariants")
def test_linkability_fully_linked_toy():
    entities = kb.build_index(
        [EntityRecord("Q7001", "Tiram"), EntityRecord("Q837", "Nepal")], "entity"
    )
    properties = kb.build_index([PropertyRecord("P17", "country")], "property")
    report = evaluation.linkability(
        [RawTriple("Tiram", "country", "Nepal")], entities, properties
    )
    assert (report.s_frac, report.p_frac, report.o_frac, report.t_frac) == (
        1.0,
        1.0,
        1.0,
        1.0,
    )


# ---------------------------------------------------------------------------
# parser robustness


@pytest.mark.criterion("completion parser survives fuzzing")
def test_parse_completion_fuzz():
    rng = random.Random(0xF00D)
    snippets = [
        b'[["a","b","c"]]',
        b"[[",
        b"]]",
        b'"x"',
        b"[1,2",
        b'{"a":[',
        b"\xff\xf0\x80",
        b"[true,false]",
        b"null",
        b'[["a","b","c","d","e"]]',
        b"updates:",
        b"\\u0000",
    ]
    for i in range(10000):
        if rng.random() < 0.5:
            raw = bytes(rng.randrange(256) for _ in range(rng.randint(0, 80)))
        else:
            raw = b"".join(
                rng.choice(snippets) for _ in range(rng.randint(0, 6))
            )
        triples, warnings = extractor.parse_completion(raw)  # must never raise
        assert isinstance(triples, list) and isinstance(warnings, list)
        if b"[" not in raw:
            assert warnings, f"case {i}: junk input produced no warning"
