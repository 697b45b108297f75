import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from reuserepo.assets import KIND_VOCABULARY, PATTERN_KIND, AssetKind, AssetRecord, SemanticSignature
from reuserepo.minilang import has_holes, to_source
from reuserepo.minilang.ast import BASE_TYPES
from reuserepo.minilang.generate import ProgramGenerator
from reuserepo.golden import golden_records
from reuserepo.store import Repository

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

WORDS = ["alpha", "beta", "gamma", "delta", "port", "support", "agility", "reuse", "state", "city",
         "update", "counter", "Java", "C++", "object-oriented"]


@pytest.fixture
def golden_repo():
    repo = Repository.in_memory(clock=lambda: 0)
    for r in golden_records():
        repo.add(r)
    return repo


@pytest.fixture
def clock():
    return lambda: 1700000000


def random_record(rng: random.Random) -> AssetRecord:
    """A valid record of a random dominant kind, without id."""
    role = rng.choice(["text", "key", "id", "exe", "nonexe", "pat"])
    cat = rng.choice(sorted(KIND_VOCABULARY))
    kw = dict(name=" ".join(rng.sample(WORDS, 2)), kind=AssetKind(cat, rng.choice(KIND_VOCABULARY[cat])))
    if rng.random() < 0.5:
        kw["language"] = rng.choice(["Java", "C++", "Python"])
    if rng.random() < 0.3 or role == "text":
        kw["label"] = " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 5)))
    if rng.random() < 0.3 or role == "key":
        kw["keywords"] = frozenset(rng.sample(WORDS, rng.randint(1, 3)))
    if rng.random() < 0.3 or role == "id":
        kw["identity"] = rng.choice(WORDS)
    if role == "exe":
        gen = ProgramGenerator(rng, max_depth=3)
        kw["payload"] = f"# {rng.choice(WORDS)} note\n" + to_source(gen.program()) + "\n"
        kw["executable_name"] = rng.choice(WORDS)
    elif role == "nonexe":
        kw["signature"] = SemanticSignature(tuple(rng.choice(BASE_TYPES) for _ in range(rng.randint(0, 3))),
                                            rng.choice(BASE_TYPES), frozenset(),
                                            frozenset(w.lower() for w in rng.sample(WORDS, 2)))
        kw["non_executable_name"] = rng.choice(WORDS)
    elif role == "pat":
        gen = ProgramGenerator(rng, max_depth=3, hole_rate=0.4)
        prog = gen.program()
        while not has_holes(prog):
            prog = gen.program()
        kw.update(payload=to_source(prog), kind=PATTERN_KIND, package=rng.choice(WORDS),
                  class_name=rng.choice(WORDS), pattern_family=rng.choice(["Object oriented", "Functional"]))
    return AssetRecord(**kw)


seeds = st.integers(min_value=0, max_value=2**32 - 1)


# acceptance criteria outcomes, printed once at the end of the session
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title = ACCEPTANCE[n]
        terminalreporter.write_line(f"AC{n} {'PASS' if ok else 'FAIL'}  {title}")
