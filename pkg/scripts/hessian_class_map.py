"""Point-wise Hessian class of a two-variable formula over a grid, as CSV for plotting.

    python3 scripts/hessian_class_map.py "y^3/(sqrt(x)*(x^2+y^2)^c)" --param c=-2 --range 0.05:4 --n 60
"""
import argparse
import csv
import sys

import numpy as np

from jensen_cert.autodiff import hessian_array
from jensen_cert.errors import DomainError
from jensen_cert.expr import function
from jensen_cert.symmat import classify_batch


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("formula")
    ap.add_argument("--vars", default="x,y")
    ap.add_argument("--param", action="append", default=[], help="name=value")
    ap.add_argument("--range", default="0.05:4", help="lo:hi used for both axes")
    ap.add_argument("--n", type=int, default=50)
    ap.add_argument("--log", action="store_true", help="log-spaced grid")
    args = ap.parse_args(argv)

    params = {k: float(v) for k, v in (p.split("=", 1) for p in args.param)}
    f = function(args.formula, args.vars.split(","), params)
    lo, hi = (float(v) for v in args.range.split(":"))
    axis = np.geomspace(lo, hi, args.n) if args.log else np.linspace(lo, hi, args.n)
    pts = np.array([(a, b) for a in axis for b in axis])

    out = csv.writer(sys.stdout)
    out.writerow([*f.variables, "class", "min_eigenvalue", "max_eigenvalue"])
    for p in pts:
        try:
            classes, lam = classify_batch(hessian_array(f, p[None]))
            out.writerow([*p, classes[0].short, lam[0, 0], lam[0, -1]])
        except DomainError:
            out.writerow([*p, "domain_error", "", ""])


if __name__ == "__main__":
    main()
