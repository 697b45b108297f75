"""One test per acceptance criterion; each records a PASS/FAIL line for the session summary."""

import random
import time
from contextlib import contextmanager

import pytest

from reuserepo.assets import AssetRecord
from reuserepo.corpus import CorpusSpec, generate_corpus
from reuserepo.engines import (
    InformationalQ,
    OperationalQ,
    Sample,
    TopologicalQ,
    levenshtein,
    search,
)
from reuserepo.evaluation import GATE_FACTOR, GATED_TIME_PAIRS, ExpectationMatrix, run_benchmark
from reuserepo.minilang import instantiate, match_ast, to_source
from reuserepo.minilang.generate import ProgramGenerator
from reuserepo.golden import GOLDEN_QUERIES, golden_records
from reuserepo.pipeline import fuse_rankings
from reuserepo.store import Repository, open_repository
from reuserepo.text import fold

from conftest import ACCEPTANCE, random_record
from oracles import dp_edit_distance, reference_eval, tfidf_cosine
from test_engines import COMP, golden_query, random_corpus, snap
from test_eval import _tsv
from test_minilang import outcome, random_pattern_pair
from test_pipeline import build, run_workflow
from test_store import assert_coherent


@contextmanager
def criterion(n, title):
    ok = False
    try:
        yield
        ok = True
    finally:
        ACCEPTANCE[n] = (ok, title)


def test_ac1_golden_corpus():
    with criterion(1, "golden corpus: six queries return their record as unique top hit, < 1 s"):
        t0 = time.perf_counter()
        repo = Repository.in_memory(clock=lambda: 0)
        originals = {str(r.id): r for r in golden_records()}
        for r in golden_records():
            repo.add(r)
        snapshot = repo.snapshot()
        for method, fields, expected in GOLDEN_QUERIES:
            hits = search(snapshot, golden_query(method, fields))
            assert str(hits[0].id) == expected, method
            assert len(hits) == 1 or hits[1].score < hits[0].score, method
            got = repo.get(hits[0].id)
            assert got.to_dict() == {**originals[expected].to_dict(), "created_at": 0}
        assert time.perf_counter() - t0 < 1.0


def test_ac2_tfidf_oracle():
    with criterion(2, "tf-idf scores match hand-computed cosine on three corpora to 1e-9"):
        corpora = [
            (["apple banana", "banana", "durian"], ["apple", "banana", "apple durian"]),
            (["software reuse", "agility", "port"], ["software reuse", "reuse"]),
            (["kiwi kiwi lime", "lime mango", "mango", "kiwi lime mango", "papaya"], ["kiwi mango", "lime"]),
        ]
        for labels, queries in corpora:
            recs = [AssetRecord(f"d{i}", COMP, label=t) for i, t in enumerate(labels)]
            s = snap(recs)
            docs = {f"d{i}": f"d{i} {t}" for i, t in enumerate(labels)}
            for q in queries:
                want = tfidf_cosine(q, docs)
                got = {h.name: h.score for h in search(s, InformationalQ(q, k=100))}
                want = {d: v for d, v in want.items() if v > 0}
                assert got.keys() == want.keys(), q
                for d, v in want.items():
                    assert abs(got[d] - v) <= 1e-9


def test_ac3_topological_oracle():
    with criterion(3, "Levenshtein(port, support) = 3 and top-1 minimality on 50 corpora"):
        assert dp_edit_distance("port", "support") == 3 == levenshtein("port", "support")
        rng = random.Random(303)
        for _ in range(50):
            s = snap(random_corpus(rng, rng.randint(1, 50)))
            q = rng.choice(["port", "suport", "alpa", "cty", "agile", "gamma delta"])
            top = search(s, TopologicalQ(q, k=1))[0]

            def dist(r):
                cands = [fold(x) for x in (r.name, r.identity, *r.keywords) if fold(x)]
                return min(dp_edit_distance(q, c) / max(len(q), len(c)) for c in cands)
            assert 1 - top.score == pytest.approx(min(dist(r) for r in s.ordered), abs=1e-12)


def test_ac4_operational_oracle():
    with criterion(4, "operational perfect set equals brute force on 20 corpora; 200 reference checks"):
        rng = random.Random(404)
        for _ in range(20):
            gen = ProgramGenerator(rng, max_depth=3, int_range=(-3, 3))
            recs = [AssetRecord(f"p{i}", COMP, payload=to_source(
                gen.program(arity=2, returns="Int", param_types=("Int", "Int")))) for i in range(rng.randint(1, 20))]
            s = snap(recs)
            target = rng.choice(recs).program
            samples = []
            for _ in range(3):
                args = (rng.randint(-3, 3), rng.randint(-3, 3))
                r = reference_eval(target, args)
                samples.append(Sample(args, r[1] if r[0] == "ok" else 0))
            full = {h.id for h in search(s, OperationalQ(samples=tuple(samples), k=100)) if h.score == 1.0}
            brute = {r.id for r in s.ordered
                     if all(reference_eval(r.program, x.args) == ("ok", x.expected) for x in samples)}
            assert full == brute
        gen = ProgramGenerator(rng, max_depth=5, mistype_rate=0.1, int_range=(-5, 5))
        for _ in range(200):
            p = gen.program()
            args = gen.args_for(p)
            assert outcome(p, args) == reference_eval(p, args), to_source(p)


def test_ac5_structural_round_trip():
    with criterion(5, "100 pattern/bindings pairs round-trip through instantiate and match"):
        rng = random.Random(505)
        for _ in range(100):
            pat, bindings = random_pattern_pair(rng)
            assert match_ast(pat, instantiate(pat, bindings)) == bindings


def test_ac6_index_coherence(tmp_path):
    with criterion(6, "index lookups equal full scans after 200-step add/remove sequences"):
        rng = random.Random(606)
        for trial in range(3):
            repo = open_repository(tmp_path / str(trial), create_if_missing=True)
            live = []
            for _ in range(200):
                if live and rng.random() < 0.35:
                    repo.remove(live.pop(rng.randrange(len(live))))
                else:
                    live.append(repo.add(random_record(rng)))
                assert_coherent(repo)
            assert_coherent(open_repository(tmp_path / str(trial)))


def test_ac7_workflow():
    with criterion(7, "NotFound -> complete stub -> add -> Found for 20 queries over all six methods"):
        corpus = generate_corpus(CorpusSpec(size=200), seed=707)
        repo = Repository.in_memory()
        for a in corpus.assets:
            repo.add(a)
        run_workflow(repo, 20, seed=7071)


def test_ac8_criteria_matrix():
    with criterion(8, "gated latency orderings >= 1.5x at N=800 (median of 5); matrix equals tables"):
        mx = ExpectationMatrix.from_tables()
        for name, table in (("technical_criteria.tsv", mx.technical), ("managerial_criteria.tsv", mx.managerial)):
            crit, rows = _tsv(name)
            for m, cells in rows.items():
                assert [table[(m, c)].value for c in crit] == cells
        report = run_benchmark(CorpusSpec(size=200), seed=0, runs=5, scale=4)
        assert report["sizes"] == [200, 800]
        gated = {(c["lower"], c["higher"]): c for c in report["checks"] if c["gated"]}
        assert set(gated) == set(GATED_TIME_PAIRS)
        for pair, c in gated.items():
            print(f"{pair[0]} < {pair[1]}: {c['lower_value']:.1f} vs {c['higher_value']:.1f} us, x{c['factor']:.1f}")
            assert c["factor"] >= GATE_FACTOR, pair
        assert report["gated_pass"]


def test_ac9_fusion_properties():
    with criterion(9, "fusion permutation invariance and monotonicity on 500 families"):
        rng = random.Random(909)
        for _ in range(500):
            family = []
            for _ in range(rng.randint(1, 5)):
                ids = rng.sample(range(20), rng.randint(0, 10))
                family.append([(i, rng.random()) for i in ids])
            lists = build(family)
            fused = fuse_rankings(lists, k=100)
            shuffled = list(lists)
            rng.shuffle(shuffled)
            assert fuse_rankings(shuffled, k=100) == fused
            # monotonicity: promoting an asset to the head of one list never lowers its fused score
            nonempty = [i for i, l in enumerate(lists) if len(l) > 1]
            if not nonempty:
                continue
            li = rng.choice(nonempty)
            victim = lists[li][-1]
            before = {h.id: h.score for h in fused}[victim.id]
            promoted = [list(l) for l in lists]
            promoted[li] = [h for h in lists[li] if h.id != victim.id]
            top = promoted[li][0].score
            promoted[li].insert(0, type(victim)(victim.id, victim.name, min(1.0, top + 1.0), victim.method,
                                                victim.explanation))
            after = {h.id: h.score for h in fuse_rankings(promoted, k=100)}[victim.id]
            assert after >= before
