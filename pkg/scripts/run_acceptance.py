#!/usr/bin/env python3
"""Run the verification suite and print one pass/fail line per criterion."""
import argparse
import json
import sys

from bcalc import verify


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--suite", default="all", choices=sorted(verify.SUITES))
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()
    results = verify.run_suite(args.suite)
    if args.json:
        print(json.dumps(
            [{"id": r.cid, "name": r.name, "passed": r.passed, "detail": r.detail}
             for r in results],
            indent=2,
        ))
    else:
        for r in results:
            print(r.line())
        print(f"{sum(r.passed for r in results)}/{len(results)} criteria passed")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
