"""Command-line front end.

Subcommands: ``hessian``, ``check``, ``curvature``, ``corpus``, ``search``.
Exit codes: 0 success, 1 a definite region with a gap of the wrong sign (a bug
sentinel), 2 parse error, 3 evaluation/domain error, 4 a claimed or expected
direction failed.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from . import autodiff as ad
from . import corpus, expr, surface
from .errors import DomainError, NumericalError, ParseError
from .jensen import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    PointTriple,
    Verdict,
    check_jensen,
    check_jensen_many,
    combine_verdicts,
    cyclic_stack,
    default_threads,
    gaps_batch,
    map_chunks,
)
from .symmat import (
    DEFAULT_TOL,
    classify_eigen,
    classify_sylvester_strict,
    eigenvalues,
    leading_principal_minors,
)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_PARSE = 2
EXIT_DOMAIN = 3
EXIT_CLAIM = 4

SEARCH_CHUNK = 65536

CURVATURE_FIELDS = ("value", "p", "q", "r", "s", "t", "E", "F", "G", "L", "M", "N", "K", "H")


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    command: str
    formula: Optional[str] = None
    corpus_id: Optional[str] = None
    variables: Tuple[str, ...] = ()
    params: dict = field(default_factory=dict)
    bounds: List[Tuple[float, float]] = field(default_factory=list)
    log_sampling: bool = False
    shape: str = "parallel"
    points: Optional[list] = None
    samples: int = 1000
    region_samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    tol: float = DEFAULT_TOL
    claim: Optional[str] = None
    output_format: str = "text"
    output: Optional[str] = None
    threads: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise CliError("--samples must be >= 1", EXIT_PARSE)
        if self.region_samples < 1:
            raise CliError("--region-samples must be >= 1", EXIT_PARSE)
        for lo, hi in self.bounds:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise CliError(f"invalid bounds {lo}:{hi}", EXIT_PARSE)
            if self.log_sampling and lo <= 0:
                raise CliError("log sampling needs positive bounds", EXIT_PARSE)

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("output")
        d.pop("threads")
        d["bounds"] = [list(b) for b in self.bounds]
        d["variables"] = list(self.variables)
        return d


# ----------------------------------------------------------------- parsing


def _parse_floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise CliError(f"cannot read numbers from {text!r}", EXIT_PARSE) from None


def _parse_points(text: str) -> List[List[float]]:
    return [_parse_floats(p) for p in text.split(";") if p.strip()]


def _parse_params(items: Sequence[str]) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise CliError(f"--param expects name=value, got {item!r}", EXIT_PARSE)
        k, v = item.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise CliError(f"bad parameter value {v!r}", EXIT_PARSE) from None
    return out


def _parse_bounds(text: Optional[str], variables: Sequence[str], default: Tuple[float, float]):
    if not text:
        return [default] * len(variables)

    def one(s):
        try:
            lo, hi = s.split(":")
            return float(lo), float(hi)
        except ValueError:
            raise CliError(f"bounds must look like lo:hi, got {s!r}", EXIT_PARSE) from None

    if "=" not in text:
        return [one(text)] * len(variables)
    per = {}
    for part in text.split(","):
        name, rng = part.split("=", 1)
        per[name.strip()] = one(rng)
    missing = [v for v in variables if v not in per]
    if missing:
        raise CliError(f"no bounds for {', '.join(missing)}", EXIT_PARSE)
    return [per[v] for v in variables]


def _function(cfg: RunConfig) -> Tuple[ad.ScalarFn, Optional[corpus.CorpusEntry]]:
    if cfg.corpus_id:
        try:
            entry = corpus.get_entry(cfg.corpus_id)
            return entry.function(cfg.params), entry
        except KeyError as err:
            raise CliError(str(err.args[0]), EXIT_PARSE) from None
    if not cfg.formula:
        raise CliError("a formula (-f) or a corpus id (--corpus) is required", EXIT_PARSE)
    return expr.function(cfg.formula, cfg.variables, cfg.params), None


# ----------------------------------------------------------------- output


def _clean(obj):
    """Make a report JSON-safe: numpy -> python, non-finite floats -> None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def envelope(cfg: RunConfig, status: str, code: int, results: dict, timing: Optional[float] = None) -> dict:
    report = {
        "tool": "jensen-cert",
        "version": __version__,
        "command": cfg.command,
        "config": cfg.echo(),
        "status": status,
        "exit_code": code,
        "results": results,
    }
    if timing is not None:
        report["timing"] = {"seconds": timing}
    return _clean(report)


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(cfg: RunConfig, text: str):
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fmt(v) -> str:
    if v is None:
        return "nan"
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


# ----------------------------------------------------------------- commands


def cmd_hessian(cfg: RunConfig):
    f, _ = _function(cfg)
    if not cfg.points or len(cfg.points) != 1:
        raise CliError("hessian needs exactly one point (-p)", EXIT_PARSE)
    x = np.array(cfg.points[0])
    if len(x) != f.arity:
        raise CliError(f"point has {len(x)} coordinates, function takes {f.arity}", EXIT_PARSE)
    value, grad, h = ad.value_gradient_hessian(f, x)
    sylv = classify_sylvester_strict(h, cfg.tol)
    results = {
        "point": x.tolist(),
        "value": value,
        "gradient": grad.tolist(),
        "hessian": h.tolist(),
        "minors": leading_principal_minors(h),
        "eigenvalues": eigenvalues(h).tolist(),
        "class": classify_eigen(h, cfg.tol).value,
        "sylvester": sylv.value if sylv is not None else "indeterminate",
    }
    if f.arity == 2:
        results["r"], results["s"], results["t"] = h[0, 0], h[0, 1], h[1, 1]
    return "ok", EXIT_OK, results


def _sample_box(rng, n, bounds, log):
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    if log:
        return np.exp(rng.uniform(np.log(lo), np.log(hi), size=(n, len(bounds))))
    return rng.uniform(lo, hi, size=(n, len(bounds)))


def _sample_triples(cfg: RunConfig, arity: int, n: int, rng) -> np.ndarray:
    if cfg.shape in ("cyclic2", "cyclic3"):
        dim = 2 if cfg.shape == "cyclic2" else 3
        if dim != arity:
            raise CliError(f"shape {cfg.shape} needs a function of {dim} variables", EXIT_PARSE)
        if len(set(cfg.bounds)) != 1:
            raise CliError("cyclic shapes need the same bounds for every variable", EXIT_PARSE)
        return cyclic_stack(_sample_box(rng, n, cfg.bounds[:1] * 3, cfg.log_sampling), dim)
    if cfg.shape == "parallel":
        pts = _sample_box(rng, 3 * n, cfg.bounds, cfg.log_sampling)
        return pts.reshape(n, 3, arity)
    raise CliError(f"unknown shape {cfg.shape!r}", EXIT_PARSE)


def _explicit_triple(cfg: RunConfig, arity: int) -> np.ndarray:
    try:
        t = PointTriple(cfg.points).array
    except ValueError as err:
        raise CliError(f"bad --points: {err}", EXIT_PARSE) from None
    if t.shape[1] != arity:
        raise CliError(f"points have {t.shape[1]} coordinates, function takes {arity}", EXIT_PARSE)
    return t[None]


_EXPECT_OK = {
    "ge": {Verdict.HOLDS_GE, Verdict.HOLDS_BOTH},
    "le": {Verdict.HOLDS_LE, Verdict.HOLDS_BOTH},
    "both": {Verdict.HOLDS_BOTH},
    "inconclusive": {Verdict.INCONCLUSIVE},
}


def cmd_check(cfg: RunConfig):
    f, entry = _function(cfg)
    if cfg.points:
        triples = _explicit_triple(cfg, f.arity)
    elif entry is not None:
        triples = corpus.sample_triples(entry, cfg.samples, corpus.entry_rng(entry.id, cfg.seed, salt=3))
    else:
        triples = _sample_triples(cfg, f.arity, cfg.samples, np.random.default_rng([cfg.seed, 3]))
    reports = check_jensen_many(f, triples, cfg.region_samples, cfg.seed, cfg.tol, cfg.threads)
    verdict = combine_verdicts(r.verdict for r in reports)
    counts = {}
    for r in reports:
        counts[r.verdict.value] = counts.get(r.verdict.value, 0) + 1
    scaled = np.array([r.gap / (1.0 + abs(r.f_centroid)) for r in reports])
    results = {
        "n_triples": len(reports),
        "verdict": verdict.value,
        "verdict_counts": dict(sorted(counts.items())),
        "min_scaled_gap": float(scaled.min()),
        "max_scaled_gap": float(scaled.max()),
        "witness_min_gap": reports[int(np.argmin(scaled))].to_dict(),
        "witness_max_gap": reports[int(np.argmax(scaled))].to_dict(),
        "violations": [dict(r.to_dict(), index=i) for i, r in enumerate(reports)
                       if r.verdict == Verdict.VIOLATES_THEOREM][:10],
    }
    if len(reports) == 1:
        results["report"] = reports[0].to_dict()
    if entry is not None:
        sign = 1.0 if entry.direction == ">=" else -1.0
        lhs = corpus.lhs_values(f, triples)
        rhs = entry.rhs_values(triples, cfg.params)
        margins = sign * (lhs - rhs) / (1.0 + np.abs(rhs))
        results["corpus"] = {
            "direction": entry.direction,
            "rhs": entry.rhs_text,
            "min_margin": float(margins.min()),
            "argmin": triples[int(np.argmin(margins))].tolist(),
            "n_violations": int(np.sum(margins < -cfg.tol)),
        }
    if verdict == Verdict.VIOLATES_THEOREM:
        return "violation", EXIT_VIOLATION, results
    if cfg.claim and verdict not in _EXPECT_OK[cfg.claim]:
        return "claim_failed", EXIT_CLAIM, results
    if entry is not None and results["corpus"]["n_violations"]:
        return "claim_failed", EXIT_CLAIM, results
    return "ok", EXIT_OK, results


def _grid_points(cfg: RunConfig, h: float) -> np.ndarray:
    axes = [np.arange(lo, hi + 0.5 * h, h) for lo, hi in cfg.bounds]
    uu, vv = np.meshgrid(*axes, indexing="ij")
    return np.stack([uu.ravel(), vv.ravel()], axis=1)


def _curvature_row(f, uv, tol):
    try:
        value = float(f.at(uv))
        j = surface.jet(f, uv)
    except DomainError:
        return dict(zip(CURVATURE_FIELDS, [None] * len(CURVATURE_FIELDS)), **{"class": "", "status": "domain_error"})
    ff = surface.fundamental_forms(j)
    k = float(surface.gauss_curvature(j))
    classes, _ = surface.classify_by_curvature(j, tol)
    row = {"value": value, "p": j.p, "q": j.q, "r": j.r, "s": j.s, "t": j.t,
           "E": ff.E, "F": ff.F, "G": ff.G, "L": ff.L, "M": ff.M, "N": ff.N,
           "K": k, "H": float(surface.mean_curvature(j))}
    row = {k_: float(v) for k_, v in row.items()}
    row["class"] = classes[0].value
    row["status"] = "ok"
    return row


def cmd_curvature(cfg: RunConfig, grid: Optional[float] = None, triple: Optional[list] = None):
    f, _ = _function(cfg)
    if f.arity != 2:
        raise CliError("curvature needs a function of two variables", EXIT_PARSE)
    if cfg.points:
        pts = np.array(cfg.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise CliError("curvature points must have two coordinates", EXIT_PARSE)
    elif grid:
        if grid <= 0:
            raise CliError("--grid must be positive", EXIT_PARSE)
        pts = _grid_points(cfg, grid)
    else:
        raise CliError("curvature needs --grid or -p points", EXIT_PARSE)
    rows = []
    for uv in pts:
        row = _curvature_row(f, uv, cfg.tol)
        row["point"] = uv.tolist()
        rows.append(row)
    ok_rows = [r for r in rows if r["status"] == "ok"]
    results = {
        "variables": list(f.variables),
        "fields": list(CURVATURE_FIELDS),
        "rows": rows,
        "n_points": len(rows),
        "n_ok": len(ok_rows),
        "K_range": [min(r["K"] for r in ok_rows), max(r["K"] for r in ok_rows)] if ok_rows else None,
    }
    status, code = "ok", EXIT_OK
    if triple is not None:
        try:
            t = PointTriple(triple).array
        except ValueError as err:
            raise CliError(f"bad --triple: {err}", EXIT_PARSE) from None
        geo = surface.curvature_check(f, t, cfg.region_samples, cfg.seed, cfg.tol)
        alg = check_jensen(f, t, cfg.region_samples, cfg.seed, cfg.tol)
        results["curvature_check"] = geo.to_dict()
        results["hessian_check"] = alg.to_dict()
        results["agree"] = geo.verdict == alg.verdict
        if Verdict.VIOLATES_THEOREM in (geo.verdict, alg.verdict):
            status, code = "violation", EXIT_VIOLATION
        elif cfg.claim and geo.verdict not in _EXPECT_OK[cfg.claim]:
            status, code = "claim_failed", EXIT_CLAIM
    return status, code, results


def curvature_csv(results: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(results["variables"]) + list(CURVATURE_FIELDS) + ["class", "status"])
    for row in results["rows"]:
        vals = ["" if row[k] is None else repr(float(row[k])) for k in CURVATURE_FIELDS]
        w.writerow([repr(float(c)) for c in row["point"]] + vals + [row["class"], row["status"]])
    return buf.getvalue()


def cmd_corpus(cfg: RunConfig, only: Sequence[str] = (), mixed_signs: bool = False):
    ids = list(only) or [e.id for e in corpus.list_entries()]
    entries = []
    any_fail = False
    for eid in ids:
        try:
            entry = corpus.get_entry(eid)
        except KeyError as err:
            raise CliError(str(err.args[0]), EXIT_PARSE) from None
        params = {k: v for k, v in cfg.params.items() if k in entry.params}
        rep = corpus.verify_entry(eid, params, cfg.samples, cfg.seed, cfg.tol,
                                  mixed_signs=mixed_signs and eid == "ex5", threads=cfg.threads)
        sig = corpus.verify_hessian_signature(eid, params, cfg.samples, cfg.seed, cfg.tol)
        asserted = entry.asserted(params)

        def status(ok):
            if not asserted:
                return "unasserted"
            return "pass" if ok else "fail"

        checks = {
            "margin": status(rep.margin_ok),
            "equality": status(rep.equality_ok),
            "signature": status(sig.passed),
        }
        any_fail |= "fail" in checks.values()
        entries.append({"id": eid, "checks": checks, "inequality": rep.to_dict(), "signature": sig.to_dict()})
    results = {"entries": entries, "n_entries": len(entries), "all_passed": not any_fail}
    if any_fail:
        return "claim_failed", EXIT_CLAIM, results
    return "ok", EXIT_OK, results


def cmd_search(cfg: RunConfig):
    f, _ = _function(cfg)
    if cfg.claim not in ("ge", "le"):
        raise CliError("search needs --claim ge or --claim le", EXIT_PARSE)
    sign = 1.0 if cfg.claim == "ge" else -1.0

    def run(c, start, stop):
        rng = np.random.default_rng([cfg.seed, 4, c])
        t = _sample_triples(cfg, f.arity, stop - start, rng)
        gaps, fg = gaps_batch(f, t)
        margin = sign * gaps / (1.0 + np.abs(fg))
        bad = np.flatnonzero(margin < -cfg.tol)
        i = int(np.argmin(margin))
        first = None
        if len(bad):
            k = int(bad[0])
            first = {"index": start + k, "chunk": c, "offset_in_chunk": k, "triple": t[k].tolist(),
                     "gap": float(gaps[k]), "scaled_margin": float(margin[k])}
        return {"worst": (float(margin[i]), start + i, c, i, t[i].tolist(), float(gaps[i])),
                "n_bad": int(len(bad)), "first": first}

    parts = map_chunks(run, cfg.samples, cfg.threads, chunk=SEARCH_CHUNK)
    worst = min((p["worst"] for p in parts), key=lambda w: (w[0], w[1]))
    n_bad = sum(p["n_bad"] for p in parts)
    first = next((p["first"] for p in parts if p["first"] is not None), None)
    results = {
        "claim": cfg.claim,
        "n_samples": cfg.samples,
        "n_violations": n_bad,
        "worst_margin": worst[0],
        "worst": {"index": worst[1], "chunk": worst[2], "offset_in_chunk": worst[3],
                  "triple": worst[4], "gap": worst[5]},
        "first_violation": first,
        "reproduce": {"seed": cfg.seed, "chunk_size": SEARCH_CHUNK,
                      "rng": "numpy default_rng([seed, 4, chunk])"},
    }
    if n_bad:
        return "counterexample_found", EXIT_CLAIM, results
    return "ok", EXIT_OK, results


# ----------------------------------------------------------------- text rendering


def render_text(report: dict) -> str:
    res = report["results"]
    cmd = report["command"]
    lines = [f"{cmd}: {report['status']} (exit {report['exit_code']})"]
    if cmd == "hessian":
        for k in ("point", "value", "gradient", "hessian", "minors", "eigenvalues", "class", "sylvester"):
            lines.append(f"  {k:12s} {_fmt(res[k])}")
        if "r" in res:
            lines.append(f"  r={_fmt(res['r'])} s={_fmt(res['s'])} t={_fmt(res['t'])}")
    elif cmd == "check":
        lines.append(f"  verdict      {res['verdict']}  over {res['n_triples']} triple(s) {res['verdict_counts']}")
        lines.append(f"  scaled gap   min {_fmt(res['min_scaled_gap'])}  max {_fmt(res['max_scaled_gap'])}")
        if "corpus" in res:
            c = res["corpus"]
            lines.append(f"  LHS {c['direction']} {c['rhs']}: min_margin {_fmt(c['min_margin'])}, "
                         f"violations {c['n_violations']}")
        for v in res["violations"]:
            lines.append(f"  VIOLATION    {v['points']} gap {_fmt(v['gap'])}")
    elif cmd == "curvature":
        lines.append(f"  points {res['n_points']}, evaluable {res['n_ok']}, K range {_fmt(res['K_range'])}")
        for row in res["rows"]:
            if row["status"] == "ok":
                lines.append(f"  {_fmt(row['point'])}: K={_fmt(row['K'])} H={_fmt(row['H'])} {row['class']}")
            else:
                lines.append(f"  {_fmt(row['point'])}: {row['status']}")
        if "agree" in res:
            lines.append(f"  curvature verdict {res['curvature_check']['verdict']}, "
                         f"hessian verdict {res['hessian_check']['verdict']}, agree={res['agree']}")
    elif cmd == "corpus":
        lines.append(f"  {'id':6s} {'margin':10s} {'equality':10s} {'signature':10s} min_margin")
        for e in res["entries"]:
            c = e["checks"]
            lines.append(f"  {e['id']:6s} {c['margin']:10s} {c['equality']:10s} {c['signature']:10s} "
                         f"{_fmt(e['inequality']['min_margin'])}")
            if c["signature"] == "fail":
                s = e["signature"]
                lines.append(f"         signature witness {_fmt(s['worst_point'])} "
                             f"eigenvalue {_fmt(s['worst_eigenvalue'])}")
            ms = e["inequality"].get("mixed_signs")
            if ms:
                lines.append(f"         mixed signs: {ms}")
    elif cmd == "search":
        lines.append(f"  claim {res['claim']}: {res['n_violations']} violation(s) in {res['n_samples']} samples")
        lines.append(f"  worst margin {_fmt(res['worst_margin'])} at {_fmt(res['worst']['triple'])}")
        if res["first_violation"]:
            fv = res["first_violation"]
            lines.append(f"  first violation #{fv['index']}: {_fmt(fv['triple'])} gap {_fmt(fv['gap'])}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------- argparse


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jensen-cert", description="Hessian definiteness and three-point Jensen checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-f", "--formula", help="function formula, e.g. 'x^2/(x+y)'")
    common.add_argument("-v", "--vars", default=None, help="comma-separated variable names in axis order")
    common.add_argument("--corpus", dest="corpus_id", help="use a built-in corpus function instead of -f")
    common.add_argument("--param", action="append", default=[], help="name=value constant (repeatable)")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"default {DEFAULT_SEED} (0xC0DE)")
    common.add_argument("--format", dest="output_format", choices=("text", "json", "csv"), default="text")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: JENSEN_CERT_THREADS or CPU count)")
    common.add_argument("--timing", action="store_true", help="include wall time in JSON (breaks byte-identity)")

    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--samples", type=int, default=1000, help="number of sampled triples")
    sampling.add_argument("--region-samples", type=int, default=DEFAULT_SAMPLES,
                          help="random Hessian samples per triangle (7 fixed points are always added)")
    sampling.add_argument("--bounds", help="lo:hi for all variables, or x=lo:hi,y=lo:hi")
    sampling.add_argument("--log", dest="log_sampling", action="store_true", help="log-uniform sampling")
    sampling.add_argument("--shape", choices=("cyclic2", "cyclic3", "parallel"), default="parallel")

    h = sub.add_parser("hessian", parents=[common], help="value, gradient, Hessian and its class at a point")
    h.add_argument("-p", "--point", required=True, help="comma-separated coordinates")

    c = sub.add_parser("check", parents=[common, sampling], help="three-point Jensen check")
    c.add_argument("--points", help="explicit triple 'a,b;c,d;e,f'")
    c.add_argument("--expect", dest="claim", choices=sorted(_EXPECT_OK), help="required overall verdict")

    k = sub.add_parser("curvature", parents=[common], help="fundamental forms and Gauss curvature")
    k.add_argument("--grid", type=float, help="grid spacing over --bounds")
    k.add_argument("--bounds", help="lo:hi for both variables, or u=lo:hi,v=lo:hi (default -1:1)")
    k.add_argument("-p", "--points", help="points 'u,v;u,v'")
    k.add_argument("--triple", help="run the curvature-based and Hessian-based Jensen checks on 'a,b;c,d;e,f'")
    k.add_argument("--region-samples", type=int, default=DEFAULT_SAMPLES)
    k.add_argument("--expect", dest="claim", choices=sorted(_EXPECT_OK))

    cp = sub.add_parser("corpus", parents=[common], help="verify the built-in inequality corpus")
    cp.add_argument("--only", action="append", default=[], help="entry id (repeatable)")
    cp.add_argument("--samples", type=int, default=10_000)
    cp.add_argument("--mixed-signs", action="store_true", help="also sample ex5 with mixed signs")
    cp.add_argument("--manifest", action="store_true", help="print the corpus manifest as JSON and exit")

    s = sub.add_parser("search", parents=[common, sampling], help="random counterexample search")
    s.add_argument("--claim", choices=("ge", "le"), required=True)
    return p


def _config_from_args(args) -> RunConfig:
    command = args.command
    if getattr(args, "corpus_id", None) and args.formula:
        raise CliError("use either -f or --corpus, not both", EXIT_PARSE)
    if args.corpus_id:
        try:
            variables = corpus.get_entry(args.corpus_id).variables
        except KeyError as err:
            raise CliError(str(err.args[0]), EXIT_PARSE) from None
    elif args.vars:
        variables = tuple(v.strip() for v in args.vars.split(",") if v.strip())
    elif command == "curvature":
        variables = ("u", "v")
    elif command == "corpus":
        variables = ()
    else:
        raise CliError("-v/--vars is required with -f", EXIT_PARSE)
    default_bounds = (-1.0, 1.0)
    bounds = _parse_bounds(getattr(args, "bounds", None), variables, default_bounds) if variables else []
    points = None
    if command == "hessian":
        points = [_parse_floats(args.point)]
    elif getattr(args, "points", None):
        points = _parse_points(args.points)
    threads = args.threads if args.threads is not None else default_threads()
    return RunConfig(
        command=command,
        formula=args.formula,
        corpus_id=args.corpus_id,
        variables=tuple(variables),
        params=_parse_params(args.param),
        bounds=bounds,
        log_sampling=getattr(args, "log_sampling", False),
        shape=getattr(args, "shape", "parallel"),
        points=points,
        samples=getattr(args, "samples", 1),
        region_samples=getattr(args, "region_samples", DEFAULT_SAMPLES),
        seed=args.seed,
        tol=args.tol,
        claim=getattr(args, "claim", None),
        output_format=args.output_format,
        output=args.output,
        threads=max(1, threads),
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "corpus" and args.manifest:
        sys.stdout.write(json.dumps(corpus.manifest(), indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    start = time.perf_counter()
    try:
        cfg = _config_from_args(args)
        if cfg.command == "hessian":
            status, code, results = cmd_hessian(cfg)
        elif cfg.command == "check":
            status, code, results = cmd_check(cfg)
        elif cfg.command == "curvature":
            triple = _parse_points(args.triple) if args.triple else None
            status, code, results = cmd_curvature(cfg, grid=args.grid, triple=triple)
        elif cfg.command == "corpus":
            status, code, results = cmd_corpus(cfg, only=args.only, mixed_signs=args.mixed_signs)
        else:
            status, code, results = cmd_search(cfg)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code
    except ParseError as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except (DomainError, NumericalError, ArithmeticError) as err:
        print(f"evaluation error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    timing = time.perf_counter() - start if args.timing else None
    report = envelope(cfg, status, code, results, timing)
    if cfg.output_format == "json":
        _emit(cfg, dumps(report))
    elif cfg.output_format == "csv":
        if cfg.command != "curvature":
            print("error: csv output is only available for curvature", file=sys.stderr)
            return EXIT_PARSE
        _emit(cfg, curvature_csv(report["results"]))
    else:
        _emit(cfg, render_text(report))
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
