"""The six retrieval methods, each a pure function of (snapshot, query).

Every engine returns RankedHit lists sorted by score descending, ties broken
by the rendered asset id ascending, truncated to the query's ``k``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Union

from .assets import AssetId, SemanticSignature
from .distance import levenshtein
from .errors import EmptyQuery, EvalError, InvalidArgument, InvalidSamples, NotFound, WrongKind
from .minilang import (
    DEFAULT_BUDGET,
    Expr,
    Program,
    evaluate,
    format_expr,
    has_holes,
    instantiate,
    match_ast,
    parse_any,
    parse_expr,
    to_source,
    type_of,
)
from .store import Snapshot
from .text import fold, fold_key, term_counts

INFORMATIONAL = "informational"
DESCRIPTIVE = "descriptive"
OPERATIONAL = "operational"
DENOTATIONAL = "denotational"
TOPOLOGICAL = "topological"
STRUCTURAL = "structural"
METHODS = (INFORMATIONAL, DESCRIPTIVE, OPERATIONAL, DENOTATIONAL, TOPOLOGICAL, STRUCTURAL)

DEFAULT_K = 10


class DegenerateQueryWarning(UserWarning):
    """A structural shape with no holes and no metadata selectors."""


@dataclass(frozen=True)
class EngineConfig:
    signature_weight: float = 0.6
    terms_weight: float = 0.4
    step_budget: int = DEFAULT_BUDGET


@dataclass(frozen=True)
class RankedHit:
    id: AssetId
    name: str
    score: float
    method: str
    explanation: str = ""
    # set on fused hits: the score the best single method gave this asset
    method_score: float | None = None

    def sort_key(self):
        return (-self.score, str(self.id))

    def to_dict(self) -> dict:
        d = {
            "id": str(self.id),
            "name": self.name,
            "score": round(self.score, 6),
            "method": self.method,
            "explanation": self.explanation,
        }
        if self.method_score is not None:
            d["method_score"] = round(self.method_score, 6)
        return d


# Queries. ``k`` is the maximum number of hits returned.

@dataclass(frozen=True)
class InformationalQ:
    text: str
    k: int = DEFAULT_K
    method = INFORMATIONAL


@dataclass(frozen=True)
class DescriptiveQ:
    keywords: frozenset[str] = frozenset()
    facets: frozenset[str] = frozenset()
    k: int = DEFAULT_K
    method = DESCRIPTIVE

    def __post_init__(self):
        object.__setattr__(self, "keywords", frozenset(self.keywords))
        object.__setattr__(self, "facets", frozenset(self.facets))


@dataclass(frozen=True)
class Sample:
    args: tuple
    expected: object

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))


@dataclass(frozen=True)
class OperationalQ:
    name_hint: str | None = None
    samples: tuple[Sample, ...] = ()
    k: int = DEFAULT_K
    method = OPERATIONAL

    def __post_init__(self):
        object.__setattr__(self, "samples", tuple(
            s if isinstance(s, Sample) else Sample(*s) for s in self.samples))


@dataclass(frozen=True)
class DenotationalQ:
    name_hint: str | None = None
    signature: SemanticSignature | None = None
    spec_terms: frozenset[str] = frozenset()
    k: int = DEFAULT_K
    method = DENOTATIONAL

    def __post_init__(self):
        object.__setattr__(self, "spec_terms", frozenset(self.spec_terms))


@dataclass(frozen=True)
class TopologicalQ:
    text: str
    k: int = DEFAULT_K
    method = TOPOLOGICAL


@dataclass(frozen=True)
class StructuralQ:
    package: str | None = None
    class_name: str | None = None
    pattern_family: str | None = None
    shape: Program | Expr | None = None
    k: int = DEFAULT_K
    method = STRUCTURAL

    @property
    def metadata(self) -> dict[str, str]:
        sel = {"package": self.package, "class": self.class_name, "pattern": self.pattern_family}
        return {tag: fold_key(v) for tag, v in sel.items() if v and fold_key(v)}


Query = Union[InformationalQ, DescriptiveQ, OperationalQ, DenotationalQ, TopologicalQ, StructuralQ]
QUERY_TYPES = {q.method: q for q in (InformationalQ, DescriptiveQ, OperationalQ, DenotationalQ,
                                     TopologicalQ, StructuralQ)}


def rank(hits, k: int) -> list[RankedHit]:
    if k < 1:
        raise InvalidArgument(f"k must be >= 1, got {k}")
    return sorted(hits, key=RankedHit.sort_key)[:k]


def _hit(snapshot: Snapshot, rid: AssetId, score: float, method: str, why: str) -> RankedHit:
    return RankedHit(rid, snapshot.records[rid].name, min(1.0, max(0.0, score)), method, why)


def search_informational(snapshot: Snapshot, q: InformationalQ) -> list[RankedHit]:
    """Cosine similarity of tf-idf vectors (raw tf, idf = ln(N/df))."""
    qtf = term_counts(q.text)
    if not qtf:
        raise EmptyQuery("informational query has no terms after folding")
    n = len(snapshot)
    text_index = snapshot.indexes.text
    qvec: dict[str, float] = {}
    for term, tf in qtf.items():
        postings = text_index.get(term)
        if postings:
            qvec[term] = tf * math.log(n / len(postings))
    if not qvec:
        return []
    dots: dict[AssetId, float] = {}
    shared: dict[AssetId, list[str]] = {}
    for term, qw in qvec.items():
        postings = text_index[term]
        idf = math.log(n / len(postings))
        for rid, tf in postings.items():
            dots[rid] = dots.get(rid, 0.0) + qw * tf * idf
            shared.setdefault(rid, []).append(term)
    qnorm = math.sqrt(sum(w * w for w in qvec.values()))
    norms = snapshot.doc_norms
    hits = []
    for rid, dot in dots.items():
        denom = qnorm * norms.get(rid, 0.0)
        score = dot / denom if denom > 0 else 0.0
        hits.append(_hit(snapshot, rid, score, INFORMATIONAL, "terms: " + ", ".join(sorted(shared[rid]))))
    return rank(hits, q.k)


def search_descriptive(snapshot: Snapshot, q: DescriptiveQ) -> list[RankedHit]:
    """Fraction of queried keywords and facets the asset carries (exact folded match)."""
    keywords = {fold_key(k) for k in q.keywords} - {""}
    facets = {fold_key(f) for f in q.facets} - {""}
    total = len(keywords) + len(facets)
    if total == 0:
        raise EmptyQuery("descriptive query needs a keyword or facet")
    matched: dict[AssetId, list[str]] = {}
    for key in sorted(keywords):
        for rid in snapshot.indexes.keyword.get(key, ()):
            matched.setdefault(rid, []).append(key)
    for key in sorted(facets):
        for rid in snapshot.indexes.facet.get(key, ()):
            matched.setdefault(rid, []).append(f"facet:{key}")
    hits = [
        _hit(snapshot, rid, len(m) / total, DESCRIPTIVE, "matched: " + ", ".join(m))
        for rid, m in matched.items()
    ]
    return rank(hits, q.k)


def _check_samples(samples: tuple[Sample, ...]) -> None:
    arities = {len(s.args) for s in samples}
    if len(arities) > 1:
        raise InvalidSamples(f"samples disagree on arity: {sorted(arities)}")
    for s in samples:
        try:
            for v in (*s.args, s.expected):
                type_of(v)
        except EvalError as exc:
            raise InvalidSamples(str(exc)) from None


def sample_passes(program: Program, sample: Sample, budget: int = DEFAULT_BUDGET) -> bool:
    """True iff the program returns exactly the expected value (same type) on the sample."""
    try:
        out = evaluate(program, sample.args, budget)
    except EvalError:
        return False
    return type_of(out) == type_of(sample.expected) and out == sample.expected


def search_operational(snapshot: Snapshot, q: OperationalQ,
                       config: EngineConfig = EngineConfig()) -> list[RankedHit]:
    """Run executable payloads on the sample inputs; score is the fraction reproduced."""
    hint = fold(q.name_hint)
    if not hint and not q.samples:
        raise EmptyQuery("operational query needs a name hint or samples")
    _check_samples(q.samples)
    candidates = snapshot.executables
    if hint:
        candidates = [r for r in candidates
                      if hint in fold(r.name) or hint in fold(r.executable_name)]
    hits = []
    for r in candidates:
        if not q.samples:
            hits.append(_hit(snapshot, r.id, 1.0, OPERATIONAL, f"name matches {q.name_hint!r}"))
            continue
        passed = sum(sample_passes(r.program, s, config.step_budget) for s in q.samples)
        if passed:
            hits.append(_hit(snapshot, r.id, passed / len(q.samples), OPERATIONAL,
                             f"samples passed: {passed}/{len(q.samples)}"))
    return rank(hits, q.k)


def signature_compatibility(query: SemanticSignature, asset: SemanticSignature | None) -> float:
    if asset is None:
        return 0.0
    if query.inputs == asset.inputs and query.output == asset.output:
        return 1.0
    if len(query.inputs) == len(asset.inputs):
        return 0.5
    return 0.0


def jaccard(a: frozenset | set, b: frozenset | set) -> float:
    union = a | b
    return len(a & b) / len(union) if union else 0.0


def search_denotational(snapshot: Snapshot, q: DenotationalQ,
                        config: EngineConfig = EngineConfig()) -> list[RankedHit]:
    """Weighted signature compatibility plus spec-term overlap over non-executable assets."""
    hint = fold(q.name_hint)
    terms = frozenset(t.casefold() for t in q.spec_terms if t.strip())
    if not hint and q.signature is None and not terms:
        raise EmptyQuery("denotational query needs a name hint, signature or spec terms")
    if q.signature is not None and terms:
        w_sig, w_terms = config.signature_weight, config.terms_weight
    else:
        w_sig = w_terms = 1.0
    hits = []
    for r in snapshot.specifications:
        if hint and hint not in fold(r.name) and hint not in fold(r.non_executable_name):
            continue
        if q.signature is None and not terms:
            hits.append(_hit(snapshot, r.id, 1.0, DENOTATIONAL, f"name matches {q.name_hint!r}"))
            continue
        score = 0.0
        why = []
        if q.signature is not None:
            s = signature_compatibility(q.signature, r.signature)
            score += w_sig * s
            why.append(f"signature {s:g}")
        if terms:
            asset_terms = r.signature.terms if r.signature is not None else frozenset()
            j = jaccard(terms, asset_terms)
            score += w_terms * j
            why.append(f"terms {j:.3f}")
        if score > 0:
            hits.append(_hit(snapshot, r.id, score, DENOTATIONAL, ", ".join(why)))
    return rank(hits, q.k)


def topological_distance(query: str, record) -> tuple[float, str]:
    """Smallest normalized edit distance from the folded query to any descriptor."""
    best, best_s = 1.0, ""
    for s in (record.name, record.identity, *sorted(record.keywords)):
        s = fold(s)
        if not s:
            continue
        d = levenshtein(query, s) / max(len(query), len(s))
        if d < best or not best_s:
            best, best_s = d, s
    return best, best_s


def search_topological(snapshot: Snapshot, q: TopologicalQ) -> list[RankedHit]:
    """Nearest assets by normalized Levenshtein distance over name, identity and keywords."""
    text = fold(q.text)
    if not text:
        raise EmptyQuery("topological query is empty")
    hits = []
    for r in snapshot.ordered:
        d, s = topological_distance(text, r)
        hits.append(_hit(snapshot, r.id, 1.0 - d, TOPOLOGICAL, f"distance {d:.6f} to {s!r}"))
    return rank(hits, q.k)


def search_structural(snapshot: Snapshot, q: StructuralQ) -> list[RankedHit]:
    """Match package/class/pattern selectors and, optionally, an AST shape."""
    meta = q.metadata
    if not meta and q.shape is None:
        raise EmptyQuery("structural query needs a selector or a shape")
    if q.shape is not None and not meta and not has_holes(q.shape):
        warnings.warn("shape has no holes and no metadata selectors", DegenerateQueryWarning, stacklevel=2)
    total = len(meta) + (q.shape is not None)
    matched: dict[AssetId, list[str]] = {}
    for tag, value in sorted(meta.items()):
        for rid in snapshot.indexes.structure.get((tag, value), ()):
            matched.setdefault(rid, []).append(tag)
    hits = []
    if q.shape is None:
        # metadata alone retrieves patterns only; executables need a shape
        for rid, tags in matched.items():
            if not snapshot.records[rid].is_pattern:
                continue
            hits.append(_hit(snapshot, rid, len(tags) / total, STRUCTURAL, "matched: " + ", ".join(tags)))
        return rank(hits, q.k)
    for r in snapshot.ordered:
        if r.program is None:
            continue
        bindings = match_ast(q.shape, r.program)
        if bindings is None:
            continue
        tags = matched.get(r.id, []) + ["shape"]
        shown = "; ".join(f"?{h} = {format_expr(e, r.program.params)}" for h, e in sorted(bindings.items()))
        why = "matched: " + ", ".join(tags) + (f" [{shown}]" if shown else "")
        hits.append(_hit(snapshot, r.id, len(tags) / total, STRUCTURAL, why))
    return rank(hits, q.k)


def retrieve_and_instantiate(snapshot: Snapshot, asset_id, bindings: Mapping[str, Expr | str]) -> str:
    """Fill a pattern asset's holes; binding values may be AST fragments or source text."""
    rid = asset_id if isinstance(asset_id, AssetId) else AssetId.parse(asset_id)
    record = snapshot.records.get(rid)
    if record is None:
        raise NotFound(f"unknown asset id {rid}")
    if not record.is_pattern:
        raise WrongKind(f"{rid} is not a pattern asset")
    program = record.program
    frags = {
        name: parse_expr(v, program.params, allow_free_vars=True) if isinstance(v, str) else v
        for name, v in bindings.items()
    }
    return to_source(instantiate(program, frags))


_ENGINES = {
    InformationalQ: lambda s, q, c: search_informational(s, q),
    DescriptiveQ: lambda s, q, c: search_descriptive(s, q),
    OperationalQ: search_operational,
    DenotationalQ: search_denotational,
    TopologicalQ: lambda s, q, c: search_topological(s, q),
    StructuralQ: lambda s, q, c: search_structural(s, q),
}


def search(snapshot: Snapshot, query: Query, config: EngineConfig = EngineConfig()) -> list[RankedHit]:
    try:
        engine = _ENGINES[type(query)]
    except KeyError:
        raise InvalidArgument(f"not a query: {query!r}") from None
    if query.k < 1:
        raise InvalidArgument(f"k must be >= 1, got {query.k}")
    return engine(snapshot, query, config)


# Serialization: one JSON object per query, tagged by ``method``.

def query_to_dict(q: Query) -> dict:
    d: dict = {"method": q.method}
    if isinstance(q, (InformationalQ, TopologicalQ)):
        d["text"] = q.text
    elif isinstance(q, DescriptiveQ):
        d["keywords"] = sorted(q.keywords)
        d["facets"] = sorted(q.facets)
    elif isinstance(q, OperationalQ):
        d["name_hint"] = q.name_hint
        d["samples"] = [{"args": list(s.args), "expected": s.expected} for s in q.samples]
    elif isinstance(q, DenotationalQ):
        d["name_hint"] = q.name_hint
        d["signature"] = None if q.signature is None else str(q.signature)
        d["spec_terms"] = sorted(q.spec_terms)
    elif isinstance(q, StructuralQ):
        d["package"] = q.package
        d["class_name"] = q.class_name
        d["pattern_family"] = q.pattern_family
        d["shape"] = None if q.shape is None else to_source(q.shape)
    d["k"] = q.k
    return d


def query_from_dict(d: Mapping) -> Query:
    method = d.get("method")
    if method not in QUERY_TYPES:
        raise InvalidArgument(f"unknown method {method!r}")
    k = d.get("k", DEFAULT_K)
    if method in (INFORMATIONAL, TOPOLOGICAL):
        return QUERY_TYPES[method](d["text"], k=k)
    if method == DESCRIPTIVE:
        return DescriptiveQ(frozenset(d.get("keywords", ())), frozenset(d.get("facets", ())), k=k)
    if method == OPERATIONAL:
        samples = tuple(Sample(tuple(s["args"]), s["expected"]) for s in d.get("samples", ()))
        return OperationalQ(d.get("name_hint"), samples, k=k)
    if method == DENOTATIONAL:
        sig = d.get("signature")
        return DenotationalQ(d.get("name_hint"), SemanticSignature.parse(sig) if sig else None,
                             frozenset(d.get("spec_terms", ())), k=k)
    shape = d.get("shape")
    return StructuralQ(d.get("package"), d.get("class_name"), d.get("pattern_family"),
                       parse_any(shape) if shape else None, k=k)
