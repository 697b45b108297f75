"""Search-or-register workflow: dispatch, reciprocal-rank fusion, registration stubs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence, Union

from .assets import KIND_VOCABULARY, PENDING_KIND, AssetKind, AssetRecord, SemanticSignature
from .engines import (
    DENOTATIONAL,
    DESCRIPTIVE,
    INFORMATIONAL,
    OPERATIONAL,
    STRUCTURAL,
    TOPOLOGICAL,
    DescriptiveQ,
    DenotationalQ,
    EngineConfig,
    InformationalQ,
    OperationalQ,
    Query,
    RankedHit,
    StructuralQ,
    TopologicalQ,
    search,
)
from .errors import ContractViolation, InvalidArgument
from .minilang import to_source
from .store import Repository, Snapshot
from .text import fold_key, terms

RRF_CONSTANT = 60
DEFAULT_THRESHOLD = 0.5


def dispatch(query: Query | str) -> list[str]:
    """Methods to run for a query. Raw text goes to the text-based engines."""
    if isinstance(query, str):
        methods = [INFORMATIONAL, TOPOLOGICAL]
        if len(terms(query)) == 1:
            methods.append(DESCRIPTIVE)
        return methods
    return [query.method]


def queries_for(query: Query | str, k: int = 10) -> list[Query]:
    """Expand a query into one typed query per dispatched method."""
    if not isinstance(query, str):
        return [query]
    out: list[Query] = []
    for method in dispatch(query):
        if method == INFORMATIONAL:
            out.append(InformationalQ(query, k=k))
        elif method == TOPOLOGICAL:
            out.append(TopologicalQ(query, k=k))
        elif method == DESCRIPTIVE:
            out.append(DescriptiveQ(keywords=frozenset({query.strip()}), k=k))
    return out


def _is_sorted(hits: Sequence[RankedHit]) -> bool:
    return all(a.sort_key() <= b.sort_key() for a, b in zip(hits, hits[1:]))


def fuse_rankings(lists: Sequence[Sequence[RankedHit]], k: int = 10,
                  constant: int = RRF_CONSTANT) -> list[RankedHit]:
    """Reciprocal-rank fusion: an asset scores sum(1 / (constant + rank)) over the lists.

    Ranks start at 1. A fused hit keeps the method and explanation of its best
    single-method rank; ``method_score`` holds the highest single-method score.
    """
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")
    fused: dict = {}
    best: dict = {}
    top_score: dict = {}
    for hits in lists:
        if not _is_sorted(hits):
            raise ContractViolation("input ranking is not sorted by (score desc, id asc)")
        for rank, hit in enumerate(hits, start=1):
            fused.setdefault(hit.id, []).append(1.0 / (constant + rank))
            # best rank wins; equal ranks resolved by score then method name for determinism
            key = (rank, -hit.score, hit.method)
            if hit.id not in best or key < best[hit.id][0]:
                best[hit.id] = (key, hit)
            top_score[hit.id] = max(top_score.get(hit.id, 0.0), hit.score)
    out = [
        # fsum is exactly rounded, so list order cannot perturb the sum
        RankedHit(rid, best[rid][1].name, math.fsum(parts), best[rid][1].method,
                  best[rid][1].explanation, method_score=top_score[rid])
        for rid, parts in fused.items()
    ]
    out.sort(key=RankedHit.sort_key)
    return out[:k]


@dataclass(frozen=True)
class RegistrationStub:
    """A partially filled record derived from an unanswered query.

    ``fields`` uses AssetRecord field names; selectors that have no record
    field (samples, shape, facets) travel in ``notes`` for the developer.
    """

    fields: dict[str, Any]
    notes: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {}
        for key, value in self.fields.items():
            if isinstance(value, frozenset):
                value = sorted(value)
            elif isinstance(value, SemanticSignature):
                value = value.to_dict()
            d[key] = value
        d.setdefault("kind", {"category": PENDING_KIND.category, "subkind": PENDING_KIND.subkind})
        if self.notes:
            d["notes"] = self.notes
        return d

    def complete(self, **overrides) -> AssetRecord:
        """Build a record from the stub plus the developer's additions (kind, payload...)."""
        d = dict(self.fields)
        d.update(overrides)
        if "kind" not in d:
            d["kind"] = PENDING_KIND
        if isinstance(d["kind"], dict):
            d["kind"] = AssetKind(d["kind"]["category"], d["kind"]["subkind"])
        d.setdefault("extra", {})
        return AssetRecord(**d)


@dataclass(frozen=True)
class Found:
    hits: list[RankedHit]
    methods_used: list[str]
    status = "found"

    def to_dict(self) -> dict:
        return {"status": "found", "methods": self.methods_used, "hits": [h.to_dict() for h in self.hits]}


@dataclass(frozen=True)
class NotFound:
    registration_stub: RegistrationStub
    methods_used: list[str] = field(default_factory=list)
    hits: list[RankedHit] = field(default_factory=list)
    status = "not_found"

    def to_dict(self) -> dict:
        return {"status": "not_found", "methods": self.methods_used,
                "stub": self.registration_stub.to_dict()}


PipelineOutcome = Union[Found, NotFound]


def _kind_from_facets(facets) -> tuple[dict | None, list[str]]:
    """Split facets into a kind suggestion and leftovers."""
    lookup = {}
    for cat, subs in KIND_VOCABULARY.items():
        for sub in subs:
            lookup[fold_key(sub)] = (cat, sub)
    kind, rest = None, []
    for f in sorted(facets):
        hit = lookup.get(fold_key(f))
        if hit and kind is None:
            kind = {"category": hit[0], "subkind": hit[1]}
        elif fold_key(f) not in {fold_key(c) for c in KIND_VOCABULARY}:
            rest.append(f)
    return kind, rest


def make_stub(query: Query | str) -> RegistrationStub:
    """Map a query's selectors onto record fields."""
    f: dict[str, Any] = {}
    notes: dict[str, Any] = {}
    if isinstance(query, str) or isinstance(query, InformationalQ):
        text = query if isinstance(query, str) else query.text
        f.update(name=text.strip(), label=text.strip())
        if len(terms(text)) == 1:
            f["keywords"] = frozenset({text.strip()})
    elif isinstance(query, TopologicalQ):
        f.update(name=query.text.strip(), identity=query.text.strip())
    elif isinstance(query, DescriptiveQ):
        kws = sorted(query.keywords)
        f["name"] = kws[0] if kws else "component"
        if kws:
            f["keywords"] = frozenset(kws)
        kind, rest = _kind_from_facets(query.facets)
        if kind:
            f["kind"] = kind
        if rest:
            f["language"] = rest[0]
            if rest[1:]:
                notes["facets"] = rest[1:]
    elif isinstance(query, OperationalQ):
        f["name"] = query.name_hint or "component"
        if query.name_hint:
            f["executable_name"] = query.name_hint
        if query.samples:
            notes["samples"] = [{"args": list(s.args), "expected": s.expected} for s in query.samples]
    elif isinstance(query, DenotationalQ):
        f["name"] = query.name_hint or "specification"
        if query.name_hint:
            f["non_executable_name"] = query.name_hint
        sig = query.signature
        if sig is not None or query.spec_terms:
            base = sig or SemanticSignature((), "Bool")
            f["signature"] = SemanticSignature(base.inputs, base.output, base.pre_terms,
                                               base.post_terms | frozenset(query.spec_terms))
            if sig is None:
                notes["signature"] = "unspecified: fill in inputs/output"
    elif isinstance(query, StructuralQ):
        f["name"] = query.class_name or query.package or "pattern"
        for attr in ("package", "class_name", "pattern_family"):
            if getattr(query, attr):
                f[attr] = getattr(query, attr)
        if query.shape is not None:
            notes["shape"] = to_source(query.shape)
    return RegistrationStub(f, notes)


def run_methods(snapshot: Snapshot, query: Query | str, k: int = 10,
                config: EngineConfig = EngineConfig()) -> tuple[list[str], list[list[RankedHit]]]:
    methods, lists = [], []
    for q in queries_for(query, k):
        methods.append(q.method)
        lists.append(search(snapshot, q, config))
    return methods, lists


def search_or_register(handle: Repository | Snapshot, query: Query | str,
                       threshold: float = DEFAULT_THRESHOLD, k: int = 10,
                       constant: int = RRF_CONSTANT,
                       config: EngineConfig = EngineConfig()) -> PipelineOutcome:
    """Found when the top fused hit's best single-method score reaches ``threshold``.

    Never writes to the repository: a NotFound carries a stub that the caller
    completes and stores with an explicit add.
    """
    if not 0.0 <= threshold <= 1.0:
        raise InvalidArgument(f"threshold must lie in [0, 1], got {threshold}")
    snapshot = handle.snapshot() if isinstance(handle, Repository) else handle
    methods, lists = run_methods(snapshot, query, k, config)
    fused = fuse_rankings(lists, k, constant)
    if fused and fused[0].method_score >= threshold:
        return Found(fused, methods)
    return NotFound(make_stub(query), methods, fused)
