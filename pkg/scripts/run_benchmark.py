"""Run the retrieval benchmark at N and 4N and print the ordering report."""

import argparse
import sys

from reuserepo.corpus import CorpusSpec
from reuserepo.evaluation import DEFAULT_RUNS, format_report, run_benchmark, write_report


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--size", type=int, default=200, help="smaller corpus size N")
    p.add_argument("--scale", type=int, default=4, help="larger corpus is scale * N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--runs", type=int, default=DEFAULT_RUNS)
    p.add_argument("--queries", type=int, default=10, help="queries per method")
    p.add_argument("--out", help="write the JSON report here")
    args = p.parse_args(argv)
    spec = CorpusSpec(size=args.size, queries_per_method=args.queries)
    report = run_benchmark(spec, seed=args.seed, k=args.k, runs=args.runs, scale=args.scale)
    print(format_report(report))
    if args.out:
        write_report(report, args.out)
    return 0 if report["gated_pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
