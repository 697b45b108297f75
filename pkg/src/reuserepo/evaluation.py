"""Measure retrieval methods on planted corpora and compare against the expert ratings."""

from __future__ import annotations

import json
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from enum import Enum
from functools import total_ordering
from typing import Mapping, Sequence

from .corpus import CorpusSpec, GroundTruthCorpus, generate_corpus
from .engines import METHODS, EngineConfig, search
from .errors import InvalidArgument, NoData
from .golden import MANAGERIAL_CRITERIA, MANAGERIAL_RATINGS, TECHNICAL_CRITERIA, TECHNICAL_RATINGS

RATIO_CUTS = (0.2, 0.4, 0.6, 0.8)
# microseconds per query, one bin per decade
TIME_CUTS = (10.0, 100.0, 1000.0, 10000.0)
MEASURED_CRITERIA = ("precision", "recall", "coverage_ratio", "time_complexity")
# (faster, slower) pairs whose latency gap is a pass/fail gate
GATED_TIME_PAIRS = (
    ("descriptive", "informational"),
    ("descriptive", "denotational"),
    ("structural", "denotational"),
)
GATE_FACTOR = 1.5
DEFAULT_RUNS = 5


@total_ordering
class OrdinalRating(Enum):
    VL = "VL"
    L = "L"
    M = "M"
    H = "H"
    VH = "VH"
    U = "U"

    @property
    def level(self) -> int | None:
        return None if self is OrdinalRating.U else ("VL", "L", "M", "H", "VH").index(self.value)

    def comparable(self, other: "OrdinalRating") -> bool:
        return self.level is not None and other.level is not None

    def __lt__(self, other):
        if not isinstance(other, OrdinalRating):
            return NotImplemented
        if not self.comparable(other):
            raise TypeError("U is not comparable")
        return self.level < other.level


_BINS = (OrdinalRating.VL, OrdinalRating.L, OrdinalRating.M, OrdinalRating.H, OrdinalRating.VH)


def to_ordinal(value: float, thresholds: Sequence[float] = RATIO_CUTS) -> OrdinalRating:
    """Bin ``value`` by four ascending cuts; a value on a cut falls in the upper bin."""
    cuts = tuple(thresholds)
    if len(cuts) != 4:
        raise InvalidArgument(f"need 4 cut points, got {len(cuts)}")
    if any(b <= a for a, b in zip(cuts, cuts[1:])):
        raise InvalidArgument(f"cut points must be strictly ascending: {cuts}")
    n = 0
    for c in cuts:
        if value >= c:
            n += 1
    return _BINS[n]


@dataclass(frozen=True)
class ExpectationMatrix:
    technical: dict
    managerial: dict
    managerial_measurable: bool = False

    @classmethod
    def from_tables(cls) -> "ExpectationMatrix":
        def load(table, criteria):
            return {(m, c): OrdinalRating(table[m][i]) for m in METHODS for i, c in enumerate(criteria)}
        return cls(load(TECHNICAL_RATINGS, TECHNICAL_CRITERIA), load(MANAGERIAL_RATINGS, MANAGERIAL_CRITERIA))

    def __getitem__(self, key: tuple[str, str]) -> OrdinalRating:
        if key in self.technical:
            return self.technical[key]
        return self.managerial[key]

    def rows(self, managerial: bool = False) -> list[list[str]]:
        table, crit = (self.managerial, MANAGERIAL_CRITERIA) if managerial else (self.technical, TECHNICAL_CRITERIA)
        return [[m] + [table[(m, c)].value for c in crit] for m in METHODS]

    def to_dict(self) -> dict:
        return {
            "technical": {m: {c: self.technical[(m, c)].value for c in TECHNICAL_CRITERIA} for m in METHODS},
            "managerial": {m: {c: self.managerial[(m, c)].value for c in MANAGERIAL_CRITERIA} for m in METHODS},
            "managerial_measurable": self.managerial_measurable,
        }


@dataclass
class MethodMetrics:
    method: str
    precision: float
    recall: float
    coverage_ratio: float
    elapsed_us: float
    precision_undefined: bool = False
    # per query: (retrieved ids in rank order, relevant ids), both as strings
    raw: list[tuple[list[str], list[str]]] = field(default_factory=list, repr=False)

    def to_dict(self, include_raw: bool = False) -> dict:
        d = asdict(self)
        if not include_raw:
            d.pop("raw")
        return d


def metrics_from_raw(method: str, raw: Sequence[tuple[Sequence[str], Sequence[str]]],
                     elapsed_us: float) -> MethodMetrics:
    """Precision/recall/coverage from retrieval outputs; usable as an independent recomputation."""
    if not raw:
        raise NoData(f"no queries for method {method}")
    precisions, recalls, covered = [], [], 0
    for retrieved, relevant in raw:
        got, rel = set(retrieved), set(relevant)
        hit = len(got & rel)
        if got:
            precisions.append(hit / len(got))
        recalls.append(hit / len(rel) if rel else 0.0)
        covered += hit > 0
    return MethodMetrics(
        method=method,
        precision=statistics.fmean(precisions) if precisions else 0.0,
        recall=statistics.fmean(recalls),
        coverage_ratio=covered / len(raw),
        elapsed_us=elapsed_us,
        precision_undefined=not precisions,
        raw=[(list(r), sorted(rel)) for r, rel in raw],
    )


def evaluate_method(method: str, corpus: GroundTruthCorpus, k: int = 10, runs: int = DEFAULT_RUNS,
                    config: EngineConfig = EngineConfig(), engine=None) -> MethodMetrics:
    """Run every query of ``method``; elapsed is the median over runs of the per-query median.

    ``engine`` replaces the search function (tests use it to inject fixed outputs).
    """
    if method not in METHODS:
        raise InvalidArgument(f"unknown method {method!r}")
    if runs < 1:
        raise InvalidArgument("runs must be >= 1")
    queries = [(replace(q, k=k), rel) for q, rel in corpus.queries_for(method)]
    if not queries:
        raise NoData(f"corpus has no {method} queries")
    snapshot = corpus.snapshot
    run = engine or (lambda q: search(snapshot, q, config))
    run_medians = []
    outputs = None
    for _ in range(runs):
        times, outs = [], []
        for q, _rel in queries:
            t0 = time.perf_counter_ns()
            hits = run(q)
            times.append((time.perf_counter_ns() - t0) / 1000.0)
            outs.append([str(h.id) for h in hits])
        run_medians.append(statistics.median(times))
        outputs = outputs or outs
    raw = [(out, [str(i) for i in rel]) for out, (_q, rel) in zip(outputs, queries)]
    # floor at one nanosecond so that elapsed stays strictly positive on coarse clocks
    return metrics_from_raw(method, raw, max(statistics.median(run_medians), 0.001))


def evaluate_all(corpus: GroundTruthCorpus, k: int = 10, runs: int = DEFAULT_RUNS,
                 methods: Sequence[str] = METHODS, workers: int = 1) -> dict[str, MethodMetrics]:
    """Sequential by default. With workers > 1 timings are meaningless and runs is forced to 1."""
    corpus.snapshot  # build outside any timed region
    present = [m for m in methods if corpus.queries_for(m)]
    if workers <= 1:
        return {m: evaluate_method(m, corpus, k, runs) for m in present}
    with ThreadPoolExecutor(max_workers=workers) as pool:
        done = pool.map(lambda m: evaluate_method(m, corpus, k, 1), present)
        return dict(zip(present, done))


def _measured(m: MethodMetrics, criterion: str) -> float:
    return m.elapsed_us if criterion == "time_complexity" else getattr(m, criterion)


@dataclass(frozen=True)
class OrderingCheck:
    criterion: str
    lower: str  # method the ratings place lower
    higher: str
    lower_value: float
    higher_value: float
    holds: bool
    gated: bool = False
    factor: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def compare_with_expectation(metrics: Mapping[str, MethodMetrics],
                             matrix: ExpectationMatrix | None = None,
                             gate_factor: float = GATE_FACTOR) -> dict:
    """Pairwise ordering checks for every measured criterion.

    A pair is checked when both ratings are known and differ; it holds when the
    measured values are strictly ordered the same way. Gated time pairs must
    also differ by ``gate_factor``.
    """
    if len(metrics) < 2:
        raise InvalidArgument("need metrics for at least two methods")
    matrix = matrix or ExpectationMatrix.from_tables()
    names = [m for m in METHODS if m in metrics]
    checks: list[OrderingCheck] = []
    for crit in MEASURED_CRITERIA:
        for i, a in enumerate(names):
            for b in names[i + 1:]:
                ra, rb = matrix[(a, crit)], matrix[(b, crit)]
                if not ra.comparable(rb) or ra == rb:
                    continue
                lo, hi = (a, b) if ra < rb else (b, a)
                lv, hv = _measured(metrics[lo], crit), _measured(metrics[hi], crit)
                gated = crit == "time_complexity" and (lo, hi) in GATED_TIME_PAIRS
                factor = hv / lv if crit == "time_complexity" and lv > 0 else None
                holds = lv < hv
                if gated:
                    holds = factor is not None and factor >= gate_factor
                checks.append(OrderingCheck(crit, lo, hi, lv, hv, holds, gated, factor))
    bins = {}
    for m in names:
        mm = metrics[m]
        bins[m] = {c: to_ordinal(_measured(mm, c), TIME_CUTS if c == "time_complexity" else RATIO_CUTS).value
                   for c in MEASURED_CRITERIA}
    return {
        "measured": {m: metrics[m].to_dict() for m in names},
        "bins": bins,
        "checks": [c.to_dict() for c in checks],
        "gated_pass": all(c.holds for c in checks if c.gated),
        "diagnostic_failures": sum(not c.holds for c in checks if not c.gated),
    }


def run_benchmark(spec: CorpusSpec = CorpusSpec(), seed: int = 0, k: int = 10,
                  runs: int = DEFAULT_RUNS, scale: int = 4) -> dict:
    """Evaluate at sizes N and scale*N; ordering checks use the larger corpus."""
    sizes = (spec.size, spec.size * scale)
    per_size = {}
    for n in sizes:
        corpus = generate_corpus(replace(spec, size=n), seed)
        per_size[n] = evaluate_all(corpus, k, runs)
    small, large = per_size[sizes[0]], per_size[sizes[1]]
    matrix = ExpectationMatrix.from_tables()
    report = compare_with_expectation(large, matrix)
    report.update(
        format_version=1,
        seed=seed,
        k=k,
        runs=runs,
        spec=asdict(spec),
        sizes=list(sizes),
        elapsed_us={str(n): {m: mm.elapsed_us for m, mm in per_size[n].items()} for n in sizes},
        growth={m: large[m].elapsed_us / small[m].elapsed_us for m in large if m in small},
        expectation=matrix.to_dict(),
    )
    return report


def format_report(report: dict) -> str:
    """Human-readable table."""
    lines = []
    n_small, n_large = report["sizes"]
    header = f"{'method':<14}{'prec':>7}{'recall':>8}{'cover':>7}{'us@' + str(n_small):>11}" \
             f"{'us@' + str(n_large):>11}{'growth':>8}  bins(P/R/C/T)  expected(P/R/C/T)"
    lines.append(header)
    lines.append("-" * len(header))
    exp = report["expectation"]["technical"]
    for m, d in report["measured"].items():
        b = report["bins"][m]
        expected = "/".join(exp[m][c] for c in MEASURED_CRITERIA)
        prec = f"{d['precision']:.3f}" + ("*" if d["precision_undefined"] else "")
        lines.append(
            f"{m:<14}{prec:>7}{d['recall']:>8.3f}{d['coverage_ratio']:>7.3f}"
            f"{report['elapsed_us'][str(n_small)][m]:>11.1f}{d['elapsed_us']:>11.1f}"
            f"{report['growth'][m]:>8.2f}  {'/'.join(b[c] for c in MEASURED_CRITERIA):<14} {expected}")
    lines.append("")
    lines.append("ordering checks (lower-rated < higher-rated):")
    for c in report["checks"]:
        tag = "GATE" if c["gated"] else "diag"
        extra = f" x{c['factor']:.2f}" if c["factor"] is not None else ""
        lines.append(f"  [{tag}] {'ok  ' if c['holds'] else 'FAIL'} {c['criterion']}: "
                     f"{c['lower']} {c['lower_value']:.4g} < {c['higher']} {c['higher_value']:.4g}{extra}")
    lines.append("")
    lines.append("managerial and human ratings (reference only, not measured):")
    mgr = report["expectation"]["managerial"]
    for m in METHODS:
        lines.append(f"  {m:<14}" + " ".join(f"{c}={mgr[m][c]}" for c in MANAGERIAL_CRITERIA))
    lines.append("")
    lines.append(f"gated orderings: {'PASS' if report['gated_pass'] else 'FAIL'}")
    return "\n".join(lines)


def write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
