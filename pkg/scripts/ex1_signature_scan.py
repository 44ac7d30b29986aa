"""Scan the ex1 exponent c: Hessian class counts versus whether the inequality holds.

    python3 scripts/ex1_signature_scan.py --samples 20000 --c -3 -2 -1.5 -1.1 -0.5 0 0.5
"""
import argparse
import csv
import sys

from jensen_cert import corpus
from jensen_cert.jensen import DEFAULT_SEED

FIELDS = ["c", "asserted", "inequality_holds", "min_margin", "signature_holds",
          "indefinite_fraction", "worst_eigenvalue", "witness_x", "witness_y"]


def scan(cs, samples, seed):
    for c in cs:
        ineq = corpus.verify_entry("ex1", {"c": c}, n_samples=samples, seed=seed)
        sig = corpus.verify_hessian_signature("ex1", {"c": c}, n_samples=samples, seed=seed)
        yield {
            "c": c,
            "asserted": ineq.asserted,
            "inequality_holds": ineq.passed,
            "min_margin": ineq.min_margin,
            "signature_holds": sig.passed,
            "indefinite_fraction": sig.class_counts.get("indefinite", 0) / samples,
            "worst_eigenvalue": sig.worst_eigenvalue,
            "witness_x": sig.worst_point[0],
            "witness_y": sig.worst_point[1],
        }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--c", type=float, nargs="+", default=[-3.0, -2.0, -1.5, -1.1, -0.5, 0.0, 0.5])
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = ap.parse_args(argv)
    out = csv.DictWriter(sys.stdout, FIELDS)
    out.writeheader()
    for row in scan(args.c, args.samples, args.seed):
        out.writerow(row)


if __name__ == "__main__":
    main()
