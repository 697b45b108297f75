"""Synthetic ground-truth corpora with planted relevance.

Each query's relevant set is constructed, not judged: a planted keyword is
written into exactly its relevant assets, a planted linear behaviour is
implemented by exactly its relevant programs, and so on.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from functools import cached_property

from .assets import (
    KIND_VOCABULARY,
    PATTERN_KIND,
    AssetId,
    AssetKind,
    AssetRecord,
    SemanticSignature,
    dominant_prefix,
)
from .engines import (
    DenotationalQ,
    DescriptiveQ,
    InformationalQ,
    OperationalQ,
    Query,
    Sample,
    StructuralQ,
    TopologicalQ,
    query_to_dict,
    sample_passes,
)
from .errors import InvalidSpec
from .minilang import BinOp, IntLit, Let, Param, Program, Var, has_holes, to_source
from .minilang.ast import BASE_TYPES
from .minilang.generate import ProgramGenerator, random_word
from .store import Repository, Snapshot

ROLES = ("key", "text", "exe", "nonexe", "id", "pat")
LANGUAGES = ("C++", "Java", "Python", "C#", "Go")
FAMILIES = ("Object oriented", "Functional", "Procedural", "Reactive")


@dataclass(frozen=True)
class CorpusSpec:
    size: int = 200
    vocabulary: int = 60
    relevance_density: float = 0.01
    queries_per_method: int = 10

    def validate(self) -> None:
        if self.size < 1:
            raise InvalidSpec("corpus size must be >= 1")
        if self.vocabulary < 10:
            raise InvalidSpec("vocabulary must hold at least 10 words")
        if not 0.0 < self.relevance_density <= 1.0:
            raise InvalidSpec("relevance_density must lie in (0, 1]")
        if self.queries_per_method < 1:
            raise InvalidSpec("queries_per_method must be >= 1")

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusSpec":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidSpec(f"unknown spec field(s): {', '.join(sorted(unknown))}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise InvalidSpec(str(exc)) from None


@dataclass
class GroundTruthCorpus:
    assets: list[AssetRecord]
    queries: list[tuple[Query, frozenset[AssetId]]]
    seed: int
    spec: CorpusSpec
    # id of the behaviour each planted program implements, for the operational oracle
    notes: dict = field(default_factory=dict)

    def queries_for(self, method: str) -> list[tuple[Query, frozenset[AssetId]]]:
        return [(q, rel) for q, rel in self.queries if q.method == method]

    @cached_property
    def snapshot(self) -> Snapshot:
        repo = Repository.in_memory(clock=lambda: 0)
        for r in self.assets:
            repo.add(r)
        snap = repo.snapshot()
        # warm lazily computed views so that timed engine calls exclude them
        snap.ordered, snap.executables, snap.specifications, snap.doc_norms
        for r in snap.ordered:
            r.program
        return snap

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "spec": asdict(self.spec),
                "assets": [a.to_dict() for a in self.assets],
                "queries": [
                    {"query": query_to_dict(q), "relevant": sorted(str(i) for i in rel)}
                    for q, rel in self.queries
                ],
            },
            sort_keys=True,
            ensure_ascii=False,
        )


def _vocabulary(rng: random.Random, n: int) -> list[str]:
    words: set[str] = set()
    while len(words) < n:
        words.add(random_word(rng, rng.randint(5, 8)))
    return sorted(words)


def _random_kind(rng: random.Random) -> AssetKind:
    cat = rng.choice(sorted(KIND_VOCABULARY))
    return AssetKind(cat, rng.choice(KIND_VOCABULARY[cat]))


def _linear_program(rng: random.Random, c1: int, c2: int, c3: int) -> Program:
    """a*c1 + b*c2 + c3 in one of several equivalent shapes."""
    a, b = Param(0), Param(1)
    form = rng.randrange(3)
    if form == 0:
        body = BinOp("+", BinOp("+", BinOp("*", a, IntLit(c1)), BinOp("*", b, IntLit(c2))), IntLit(c3))
    elif form == 1:
        body = BinOp("+", IntLit(c3), BinOp("+", BinOp("*", IntLit(c2), b), BinOp("*", IntLit(c1), a)))
    else:
        body = Let("t", BinOp("*", a, IntLit(c1)),
                   BinOp("+", Var("t"), BinOp("+", BinOp("*", b, IntLit(c2)), IntLit(c3))))
    return Program((("a", "Int"), ("b", "Int")), "Int", body)


def _independent_samples(rng: random.Random) -> list[tuple[int, int]]:
    while True:
        pts = [(rng.randint(-9, 9), rng.randint(-9, 9)) for _ in range(3)]
        (x1, y1), (x2, y2), (x3, y3) = pts
        det = x1 * (y2 - y3) - y1 * (x2 - x3) + (x2 * y3 - x3 * y2)
        if det != 0:
            return pts


def generate_corpus(spec: CorpusSpec, seed: int) -> GroundTruthCorpus:
    """Deterministic in (spec, seed)."""
    spec.validate()
    rng = random.Random(seed)
    vocab = _vocabulary(rng, spec.vocabulary)
    roles = [ROLES[i % len(ROLES)] for i in range(spec.size)]
    by_role: dict[str, list[int]] = {r: [] for r in ROLES}
    for i, role in enumerate(roles):
        by_role[role].append(i)

    # base attributes per asset, mutated by planting below
    fields: list[dict] = []
    for i, role in enumerate(roles):
        f: dict = {"name": f"{rng.choice(vocab)} {rng.choice(vocab)}", "kind": _random_kind(rng)}
        if rng.random() < 0.5:
            f["language"] = rng.choice(LANGUAGES)
        if role == "text":
            f["label"] = " ".join(rng.choice(vocab) for _ in range(rng.randint(4, 8)))
        elif role == "key":
            f["keywords"] = set(rng.sample(vocab, rng.randint(1, 3)))
        elif role == "id":
            f["identity"] = random_word(rng, rng.randint(6, 9))
        elif role == "nonexe":
            arity = rng.randint(0, 3)
            f["signature"] = dict(inputs=tuple(rng.choice(BASE_TYPES) for _ in range(arity)),
                                  output=rng.choice(BASE_TYPES),
                                  post_terms=set(rng.sample(vocab, rng.randint(2, 4))))
            f["non_executable_name"] = rng.choice(vocab)
        elif role == "pat":
            f["kind"] = PATTERN_KIND
            f["package"] = rng.choice(vocab).capitalize()
            f["class_name"] = rng.choice(vocab).capitalize()
            f["pattern_family"] = rng.choice(FAMILIES)
        fields.append(f)

    want = max(1, round(spec.relevance_density * spec.size))
    free = {role: rng.sample(ids, len(ids)) for role, ids in by_role.items()}

    def draw(role: str) -> list[int] | None:
        """Relevant assets for one query; disjoint across queries of the same method."""
        pool = free[role]
        if not pool:
            return None
        take = min(want, len(pool))
        out, free[role] = pool[:take], pool[take:]
        return out

    planned: list[tuple[Query, list[int]]] = []
    notes: dict = {"behaviours": {}}
    nq = spec.queries_per_method

    if by_role["text"]:
        for qi in range(nq):
            term = f"inf{qi}{random_word(rng, 4)}"
            rel = draw("text")
            if rel is None:
                break
            for i in rel:
                fields[i]["label"] += f" {term}"
            planned.append((InformationalQ(f"{term} {rng.choice(vocab)} {rng.choice(vocab)}"), rel))

    if by_role["key"]:
        for qi in range(nq):
            kw = f"kw{qi}{random_word(rng, 4)}"
            rel = draw("key")
            if rel is None:
                break
            for i in rel:
                fields[i]["keywords"].add(kw)
            planned.append((DescriptiveQ(frozenset({kw})), rel))

    if by_role["id"]:
        for qi in range(nq):
            base = random_word(rng, 8)
            rel = draw("id")
            if rel is None:
                break
            for n, i in enumerate(rel):
                chars = list(base)
                chars[n % len(chars)] = "0123456789"[n % 10]
                fields[i]["identity"] = "".join(chars)
            planned.append((TopologicalQ(base), rel))

    if by_role["nonexe"]:
        for qi in range(nq):
            term = f"den{qi}{random_word(rng, 4)}"
            arity = rng.randint(1, 3)
            sig = SemanticSignature.parse(
                ",".join(rng.choice(BASE_TYPES) for _ in range(arity)) + "->" + rng.choice(BASE_TYPES))
            rel = draw("nonexe")
            if rel is None:
                break
            for i in rel:
                fields[i]["signature"].update(inputs=sig.inputs, output=sig.output)
                fields[i]["signature"]["post_terms"].add(term)
            planned.append((DenotationalQ(signature=sig, spec_terms=frozenset({term})), rel))

    if by_role["pat"]:
        for qi in range(nq):
            pkg = f"Pkg{qi}{random_word(rng, 3)}"
            rel = draw("pat")
            if rel is None:
                break
            family = rng.choice(FAMILIES) if qi % 2 else None
            for i in rel:
                fields[i]["package"] = pkg
                if family:
                    fields[i]["pattern_family"] = family
            planned.append((StructuralQ(package=pkg.lower(), pattern_family=family), rel))

    # executables: planted linear behaviours, the rest random programs
    behaviours: dict[int, tuple[int, int, int]] = {}
    op_queries: list[tuple[OperationalQ, list[int]]] = []
    if by_role["exe"]:
        used: set[tuple[int, int, int]] = set()
        for qi in range(nq):
            rel = draw("exe")
            if rel is None:
                break
            coeffs = (rng.randint(-9, 9), rng.randint(-9, 9), rng.randint(-50, 50))
            while coeffs in used:
                coeffs = (rng.randint(-9, 9), rng.randint(-9, 9), rng.randint(-50, 50))
            used.add(coeffs)
            c1, c2, c3 = coeffs
            pts = _independent_samples(rng)
            samples = tuple(Sample((x, y), c1 * x + c2 * y + c3) for x, y in pts)
            for i in rel:
                behaviours[i] = coeffs
            op_queries.append((OperationalQ(samples=samples), rel))
        gen = ProgramGenerator(rng, max_depth=3)
        for i in by_role["exe"]:
            if i in behaviours:
                program = _linear_program(rng, *behaviours[i])
            else:
                while True:
                    program = gen.program()
                    if not any(all(sample_passes(program, s) for s in q.samples) for q, _ in op_queries):
                        break
            fields[i]["payload"] = f"# {rng.choice(vocab)} {rng.choice(vocab)}\n{to_source(program)}\n"
        planned.extend(op_queries)
        notes["behaviours"] = {str(i): list(c) for i, c in behaviours.items()}

    if by_role["pat"]:
        pgen = ProgramGenerator(rng, max_depth=3, hole_rate=0.3)
        for i in by_role["pat"]:
            program = pgen.program()
            while not has_holes(program):
                program = pgen.program()
            fields[i]["payload"] = to_source(program) + "\n"

    assets: list[AssetRecord] = []
    for seq, f in enumerate(fields):
        kw = dict(f)
        if "keywords" in kw:
            kw["keywords"] = frozenset(kw["keywords"])
        if "signature" in kw:
            s = kw["signature"]
            kw["signature"] = SemanticSignature(s["inputs"], s["output"], frozenset(),
                                                frozenset(s["post_terms"]))
        record = AssetRecord(**kw)
        assets.append(record.with_id(AssetId(dominant_prefix(record), seq)))

    queries = [(q, frozenset(assets[i].id for i in rel)) for q, rel in planned]
    # order queries by method for readability; stable within a method
    method_rank = {m: n for n, m in enumerate(("informational", "descriptive", "operational",
                                                "denotational", "topological", "structural"))}
    queries.sort(key=lambda qr: method_rank[qr[0].method])
    return GroundTruthCorpus(assets, queries, seed, spec, notes)
