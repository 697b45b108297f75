#!/usr/bin/env python3
"""Write the six example records as records.jsonl, optionally seeding a repository."""

import argparse
import json
from pathlib import Path

from reuserepo.golden import golden_records
from reuserepo.store import Repository


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="tests/data/golden_corpus.jsonl")
    ap.add_argument("--repo", help="also add the records to this repository (created if missing)")
    ap.add_argument("--now", type=int, default=0, help="created_at written into each record")
    args = ap.parse_args()

    records = golden_records()
    lines = [json.dumps({**r.to_dict(), "created_at": args.now}, sort_keys=True, ensure_ascii=False)
             for r in records]
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} records to {args.out}")
    if args.repo:
        with Repository.open(args.repo, create_if_missing=True, clock=lambda: args.now) as repo:
            for r in records:
                repo.add(r)
        print(f"seeded {args.repo}")


if __name__ == "__main__":
    main()
