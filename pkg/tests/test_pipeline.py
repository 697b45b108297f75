import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from reuserepo.assets import AssetId, AssetRecord, Prefix
from reuserepo.corpus import CorpusSpec, generate_corpus
from reuserepo.engines import DescriptiveQ, OperationalQ, RankedHit, Sample
from reuserepo.errors import ContractViolation
from reuserepo.pipeline import (
    Found,
    NotFound,
    RegistrationStub,
    dispatch,
    fuse_rankings,
    make_stub,
    search_or_register,
)
from reuserepo.store import Repository

from workflow import METHOD_CYCLE, complete, fresh_query


def hit(seq, score, method="m"):
    return RankedHit(AssetId(Prefix.TEXT, seq), f"n{seq}", score, method, f"why {method}")


def ranked(hits):
    return sorted(hits, key=RankedHit.sort_key)


def test_dispatch_rules():
    assert dispatch(OperationalQ(samples=(Sample((1,), 1),))) == ["operational"]
    assert dispatch("software reuse") == ["informational", "topological"]
    assert dispatch("Agility") == ["informational", "topological", "descriptive"]


def test_fuse_single_list_keeps_order():
    lst = ranked([hit(1, 0.9), hit(2, 0.5), hit(3, 0.1)])
    fused = fuse_rankings([lst])
    assert [h.id for h in fused] == [h.id for h in lst]
    assert fused[0].score == pytest.approx(1 / 61)


def test_fuse_two_lists_same_asset():
    fused = fuse_rankings([[hit(1, 0.3, "a")], [hit(1, 0.8, "b")]])
    assert len(fused) == 1
    assert fused[0].score == pytest.approx(2 / 61)
    assert fused[0].method_score == 0.8


def test_fuse_keeps_best_rank_explanation():
    a = ranked([hit(1, 0.9, "a"), hit(2, 0.8, "a")])
    b = ranked([hit(2, 0.7, "b")])
    fused = {h.id: h for h in fuse_rankings([a, b])}
    assert fused[AssetId(Prefix.TEXT, 2)].method == "b"


def test_fuse_rejects_unsorted():
    with pytest.raises(ContractViolation):
        fuse_rankings([[hit(1, 0.1), hit(2, 0.9)]])


def test_fuse_truncates_to_k():
    lst = ranked([hit(i, 1 / (i + 1)) for i in range(30)])
    assert len(fuse_rankings([lst], k=5)) == 5


ranked_families = st.lists(
    st.lists(st.tuples(st.integers(0, 15), st.floats(0, 1)), max_size=12, unique_by=lambda t: t[0]),
    min_size=1, max_size=5,
)


def build(family):
    return [ranked([hit(i, s, f"m{j}") for i, s in lst]) for j, lst in enumerate(family)]


@settings(max_examples=200)
@given(ranked_families, st.randoms(use_true_random=False))
def test_fusion_properties(family, rnd):
    lists = build(family)
    fused = fuse_rankings(lists, k=100)
    # formula
    want = {}
    for lst in lists:
        for r, h in enumerate(lst, start=1):
            want[h.id] = want.get(h.id, 0.0) + 1 / (60 + r)
    assert {h.id: h.score for h in fused} == pytest.approx(want)
    assert [(-h.score, str(h.id)) for h in fused] == sorted((-h.score, str(h.id)) for h in fused)
    # permutation invariance
    shuffled = list(lists)
    rnd.shuffle(shuffled)
    assert fuse_rankings(shuffled, k=100) == fused
    # monotonicity
    firsts = {lst[0].id for lst in lists if lst}
    if len(firsts) == 1 and all(lists):
        assert fused[0].id == firsts.pop()


def test_empty_repository_not_found():
    out = search_or_register(Repository.in_memory(), "anything")
    assert isinstance(out, NotFound)
    assert out.registration_stub.fields["name"] == "anything"
    assert out.to_dict()["stub"]["kind"] == {"category": "Unclassified", "subkind": "pending"}


def test_agility_found_at_high_threshold(golden_repo):
    out = search_or_register(golden_repo, DescriptiveQ(frozenset({"Agility"})), threshold=0.9)
    assert isinstance(out, Found) and out.hits[0].name == "feedback"
    assert out.hits[0].method_score >= 0.9


def test_raw_text_found(golden_repo):
    out = search_or_register(golden_repo, "software reuse")
    assert isinstance(out, Found) and str(out.hits[0].id) == "Text_6562"
    assert out.methods_used == ["informational", "topological"]


def test_pipeline_does_not_mutate(golden_repo):
    before = golden_repo.checksum()
    search_or_register(golden_repo, "nothing like this")
    assert golden_repo.checksum() == before and golden_repo.record_count == 6


@pytest.mark.parametrize("threshold", [0.0, 0.3, 0.6, 0.9, 1.0])
def test_threshold_monotonic(golden_repo, threshold):
    for q in ("port", "software", "agile", "update", "zzz"):
        low = search_or_register(golden_repo, q, threshold=threshold)
        high = search_or_register(golden_repo, q, threshold=min(1.0, threshold + 0.2))
        if isinstance(low, NotFound):
            assert isinstance(high, NotFound)


def test_stub_serializes_selectors():
    q = OperationalQ("sorter", samples=(Sample((1, 2), 3),))
    d = make_stub(q).to_dict()
    assert d["executable_name"] == "sorter" and d["notes"]["samples"] == [{"args": [1, 2], "expected": 3}]
    rec = AssetRecord.from_dict({**d, "kind": {"category": "Implemented", "subkind": "System"},
                                 "payload": "fn(a: Int, b: Int) -> Int { a + b }"})
    assert rec.executable_name == "sorter"


def run_workflow(repo, n_queries, seed):
    rng = random.Random(seed)
    for i in range(n_queries):
        method = METHOD_CYCLE[i % len(METHOD_CYCLE)]
        made = fresh_query(method, rng)
        q, behaviour = made if isinstance(made, tuple) else (made, None)
        first = search_or_register(repo, q)
        assert isinstance(first, NotFound), (method, first)
        record = complete(first.registration_stub, q, behaviour)
        rid = repo.add(record)
        second = search_or_register(repo, q)
        assert isinstance(second, Found), (method, second)
        assert second.hits[0].id == rid, method


def test_workflow_convergence_on_generated_corpus():
    corpus = generate_corpus(CorpusSpec(size=120), seed=4)
    repo = Repository.in_memory()
    for a in corpus.assets:
        repo.add(a)
    run_workflow(repo, 12, seed=1)
