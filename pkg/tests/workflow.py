"""Scripted stand-in for the developer in the search-or-register loop."""

import random

from reuserepo.assets import PATTERN_KIND, AssetKind
from reuserepo.engines import (
    DenotationalQ,
    DescriptiveQ,
    InformationalQ,
    OperationalQ,
    Sample,
    StructuralQ,
    TopologicalQ,
)
from reuserepo.minilang.generate import random_word
from reuserepo.assets import SemanticSignature

METHOD_CYCLE = ("informational", "descriptive", "operational", "denotational", "topological", "structural")


def fresh_query(method: str, rng: random.Random):
    """A query whose answer is very unlikely to exist in a generated corpus."""
    word = lambda: "q" + random_word(rng, 11)
    if method == "informational":
        return InformationalQ(f"{word()} {word()}")
    if method == "descriptive":
        return DescriptiveQ(frozenset({word()}))
    if method == "operational":
        c1, c2, c3 = rng.randint(100, 200), rng.randint(100, 200), rng.randint(1000, 2000)
        pts = [(1, 0), (0, 1), (2, 3)]
        return OperationalQ(samples=tuple(Sample((x, y), c1 * x + c2 * y + c3) for x, y in pts)), (c1, c2, c3)
    if method == "denotational":
        ins = ",".join(rng.choice(("Int", "Str", "Bool")) for _ in range(rng.randint(5, 8)))
        return DenotationalQ(signature=SemanticSignature.parse(f"{ins}->Str"), spec_terms=frozenset({word()}))
    if method == "topological":
        return TopologicalQ(word())
    return StructuralQ(package=word().capitalize(), class_name=word())


def complete(stub, query, behaviour=None):
    """What the developer adds: a kind, and a payload where the asset needs one."""
    if isinstance(query, OperationalQ):
        c1, c2, c3 = behaviour
        return stub.complete(kind=AssetKind("Implemented", "Components"),
                             payload=f"fn(a: Int, b: Int) -> Int {{ a * {c1} + b * {c2} + {c3} }}")
    if isinstance(query, StructuralQ):
        return stub.complete(kind=PATTERN_KIND, payload="fn(a: Str) -> Str { concat(a, ?suffix) }")
    if isinstance(query, DenotationalQ):
        return stub.complete(kind=AssetKind("Intermediate", "Requirements"))
    return stub.complete(kind=AssetKind("Implemented", "Components"))
