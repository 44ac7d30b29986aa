"""Verify every corpus entry and print a summary table (a thin wrapper over the CLI).

    python3 scripts/run_corpus.py [--samples N] [--seed S] [--json report.json]
"""
import argparse
import sys

from jensen_cert import cli


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--json", help="also write the JSON report to this path")
    args = ap.parse_args(argv)
    base = ["corpus", "--samples", str(args.samples)]
    if args.seed is not None:
        base += ["--seed", str(args.seed)]
    if args.json:
        cli.run(base + ["--format", "json", "-o", args.json])
    return cli.run(base + ["--mixed-signs"])


if __name__ == "__main__":
    sys.exit(main())
