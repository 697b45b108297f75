import csv
import random
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reuserepo.corpus import CorpusSpec, generate_corpus
from reuserepo.engines import RankedHit, search
from reuserepo.errors import InvalidArgument, InvalidSpec, NoData
from reuserepo.evaluation import (
    RATIO_CUTS,
    TIME_CUTS,
    ExpectationMatrix,
    MethodMetrics,
    OrdinalRating,
    compare_with_expectation,
    evaluate_all,
    evaluate_method,
    metrics_from_raw,
    run_benchmark,
    to_ordinal,
)
from reuserepo.golden import METHODS

from oracles import reference_eval

DATA = Path(__file__).parent / "data"
R = OrdinalRating


@pytest.fixture(scope="module")
def corpus():
    return generate_corpus(CorpusSpec(size=120, queries_per_method=4), seed=11)


def test_corpus_is_deterministic():
    a = generate_corpus(CorpusSpec(size=60), seed=3).to_json()
    b = generate_corpus(CorpusSpec(size=60), seed=3).to_json()
    c = generate_corpus(CorpusSpec(size=60), seed=4).to_json()
    assert a == b and a != c


def test_size_one_corpus_has_a_planted_keyword():
    c = generate_corpus(CorpusSpec(size=1), seed=0)
    assert len(c.assets) == 1
    (q, rel), = c.queries
    assert q.method == "descriptive"
    assert rel == {c.assets[0].id} and q.keywords <= c.assets[0].keywords


def test_relevant_ids_exist(corpus):
    ids = {a.id for a in corpus.assets}
    assert {q.method for q, _ in corpus.queries} == set(METHODS)
    for q, rel in corpus.queries:
        assert rel and rel <= ids


def test_operational_relevance_matches_brute_force(corpus):
    for q, rel in corpus.queries_for("operational"):
        passing = set()
        for a in corpus.assets:
            if a.program is None or a.is_pattern:
                continue
            if all(reference_eval(a.program, s.args) == ("ok", s.expected) for s in q.samples):
                passing.add(a.id)
        assert passing == rel


@pytest.mark.parametrize("bad", [dict(size=0), dict(vocabulary=3), dict(relevance_density=0.0),
                                 dict(queries_per_method=0)])
def test_invalid_spec(bad):
    with pytest.raises(InvalidSpec):
        generate_corpus(CorpusSpec(**bad), seed=0)
    with pytest.raises(InvalidSpec):
        CorpusSpec.from_dict({"sizes": 3})


def test_perfect_and_empty_engines(corpus):
    lookup = {q: rel for q, rel in corpus.queries_for("informational")}
    by_text = {q.text: rel for q, rel in lookup.items()}

    def perfect(q):
        return [RankedHit(i, "", 1.0, "informational", "") for i in sorted(by_text[q.text], key=str)]

    m = evaluate_method("informational", corpus, runs=1, engine=perfect)
    assert (m.precision, m.recall, m.coverage_ratio) == (1.0, 1.0, 1.0)
    e = evaluate_method("informational", corpus, runs=1, engine=lambda q: [])
    assert (e.precision, e.recall, e.coverage_ratio) == (0.0, 0.0, 0.0)
    assert e.precision_undefined and e.elapsed_us > 0


def test_metrics_recomputed_by_hand(corpus):
    m = evaluate_method("topological", corpus, k=3, runs=1)
    snap = corpus.snapshot
    precisions, recalls, covered = [], [], 0
    for q, rel in corpus.queries_for("topological"):
        got = {h.id for h in search(snap, q)[:3]}
        inter = len(got & rel)
        if got:
            precisions.append(inter / len(got))
        recalls.append(inter / len(rel))
        covered += inter > 0
    assert m.precision == pytest.approx(sum(precisions) / len(precisions))
    assert m.recall == pytest.approx(sum(recalls) / len(recalls))
    assert m.coverage_ratio == covered / len(recalls)


def test_metrics_from_raw_small_case():
    m = metrics_from_raw("x", [(["a", "b"], ["a"]), ([], ["c"]), (["d"], ["d", "e"])], 1.0)
    assert m.precision == pytest.approx((0.5 + 1.0) / 2)
    assert m.recall == pytest.approx((1 + 0 + 0.5) / 3)
    assert m.coverage_ratio == pytest.approx(2 / 3)
    with pytest.raises(NoData):
        metrics_from_raw("x", [], 1.0)


def test_no_data_for_absent_method():
    c = generate_corpus(CorpusSpec(size=1), seed=0)
    with pytest.raises(NoData):
        evaluate_method("structural", c, runs=1)
    with pytest.raises(InvalidArgument):
        evaluate_method("nonsense", c, runs=1)


@pytest.mark.parametrize("value,want", [(0.0, R.VL), (0.19, R.VL), (0.2, R.L), (0.5, R.M),
                                        (0.8, R.VH), (1.0, R.VH), (0.6, R.H)])
def test_to_ordinal_examples(value, want):
    assert to_ordinal(value) is want


def test_to_ordinal_scan():
    rng = random.Random(0)
    for cuts in (RATIO_CUTS, TIME_CUTS):
        for _ in range(500):
            v = rng.uniform(-1, cuts[-1] * 1.5)
            want = [R.VL, R.L, R.M, R.H, R.VH][sum(v >= c for c in cuts)]
            assert to_ordinal(v, cuts) is want


@pytest.mark.parametrize("cuts", [(0.1, 0.1, 0.3, 0.4), (0.4, 0.3, 0.2, 0.1), (0.1, 0.2, 0.3)])
def test_to_ordinal_bad_cuts(cuts):
    with pytest.raises(InvalidArgument):
        to_ordinal(0.5, cuts)


@given(st.floats(0, 1), st.floats(0, 1))
def test_to_ordinal_monotone(a, b):
    if a <= b:
        assert to_ordinal(a) <= to_ordinal(b)


def test_unknown_rating_not_comparable():
    with pytest.raises(TypeError):
        R.U < R.H
    assert not R.U.comparable(R.VL)


def _tsv(name):
    with open(DATA / name, newline="") as fh:
        rows = list(csv.reader(fh, delimiter="\t"))
    return rows[0][1:], {r[0].lower(): r[1:] for r in rows[1:]}


def test_matrix_matches_checked_in_tables():
    mx = ExpectationMatrix.from_tables()
    for name, table in (("technical_criteria.tsv", mx.technical), ("managerial_criteria.tsv", mx.managerial)):
        crit, rows = _tsv(name)
        assert set(rows) == set(METHODS)
        for m, cells in rows.items():
            for c, cell in zip(crit, cells):
                assert table[(m, c)].value == cell, (m, c)
    assert mx["informational", "precision"] is R.M
    assert mx["topological", "precision"] is R.U
    assert not mx.managerial_measurable


def _mm(name, **kw):
    base = dict(precision=0.5, recall=0.5, coverage_ratio=0.5, elapsed_us=10.0)
    base.update(kw)
    return MethodMetrics(name, **base)


def test_identical_metrics_violate_differing_ratings():
    out = compare_with_expectation({m: _mm(m) for m in METHODS})
    prec = [c for c in out["checks"] if c["criterion"] == "precision"]
    assert prec and not any(c["holds"] for c in prec)
    # U never enters a comparison
    assert all("topological" not in (c["lower"], c["higher"]) for c in prec)
    assert out["gated_pass"] is False


def test_gated_pairs_need_factor():
    metrics = {m: _mm(m) for m in METHODS}
    metrics["descriptive"] = _mm("descriptive", elapsed_us=1.0)
    metrics["structural"] = _mm("structural", elapsed_us=1.0)
    metrics["informational"] = _mm("informational", elapsed_us=1.4)
    metrics["denotational"] = _mm("denotational", elapsed_us=2.0)
    out = compare_with_expectation(metrics)
    gated = {(c["lower"], c["higher"]): c["holds"] for c in out["checks"] if c["gated"]}
    assert gated == {("descriptive", "informational"): False, ("descriptive", "denotational"): True,
                     ("structural", "denotational"): True}
    with pytest.raises(InvalidArgument):
        compare_with_expectation({"descriptive": metrics["descriptive"]})


def test_evaluate_all_parallel_matches_sequential(corpus):
    seq = evaluate_all(corpus, runs=1)
    par = evaluate_all(corpus, runs=1, workers=3)
    assert set(seq) == set(par) == set(METHODS)
    for m in METHODS:
        assert seq[m].raw == par[m].raw


def test_benchmark_report_shape():
    rep = run_benchmark(CorpusSpec(size=30, queries_per_method=2), seed=1, runs=1, scale=2)
    assert rep["sizes"] == [30, 60] and rep["format_version"] == 1
    assert set(rep["growth"]) == set(METHODS)
    assert set(rep["bins"]["descriptive"]) == {"precision", "recall", "coverage_ratio", "time_complexity"}
