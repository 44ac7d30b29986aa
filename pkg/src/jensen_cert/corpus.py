"""Catalogue of worked inequalities and the harness that checks them.

Each entry pairs a function with a three-point shape and a closed-form right
hand side.  ``verify_entry`` samples admissible inputs and measures the margin
of the closed-form inequality; ``verify_hessian_signature`` checks the
claimed convexity/concavity class of the function on its domain.  Both are
seeded and deterministic.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import mpmath
import numpy as np

from . import autodiff as ad
from . import expr
from .jensen import DEFAULT_SEED, cyclic_stack, map_chunks
from .symmat import DEFAULT_TOL, Definiteness, classify_batch

SAMPLE_LO = 1e-2
SAMPLE_HI = 1e2
EQUALITY_POINTS = (0.01, 1.0, 100.0)
EQUALITY_TOL = 1e-10
MAX_LISTED_VIOLATIONS = 10


def _const(fn) -> float:
    """Evaluate a constant expression in 40-digit arithmetic, round once to float."""
    with mpmath.workdps(40):
        return float(fn(mpmath.mpf))


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    title: str
    formula: str
    variables: tuple
    shape: str  # cyclic2 | cyclic3 | parallel
    expected_class: Definiteness
    signature: str
    det_zero: bool
    domain: str
    rhs_text: str
    rhs: Callable = field(compare=False, repr=False)
    params: Dict[str, float] = field(default_factory=dict)
    params_in_range: Optional[Callable] = field(default=None, compare=False, repr=False)
    params_note: str = ""

    @property
    def arity(self) -> int:
        return len(self.variables)

    @property
    def direction(self) -> str:
        return ">=" if self.expected_class.nonnegative else "<="

    def resolve_params(self, params=None) -> dict:
        merged = dict(self.params)
        for k, v in (params or {}).items():
            if k not in self.params:
                raise KeyError(f"{self.id} has no parameter {k!r}")
            merged[k] = float(v)
        return merged

    def asserted(self, params=None) -> bool:
        """Whether the entry's claims are asserted for these parameter values."""
        if self.params_in_range is None:
            return True
        return bool(self.params_in_range(self.resolve_params(params)))

    def function(self, params=None) -> ad.ScalarFn:
        return expr.function(self.formula, self.variables, self.resolve_params(params), name=self.id)

    def rhs_values(self, triples: np.ndarray, params=None) -> np.ndarray:
        params = self.resolve_params(params)
        if self.shape == "parallel":
            return self.rhs(triples.sum(axis=1), **params)
        return self.rhs(triples[:, :, 0].sum(axis=1), **params)

    def manifest(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "formula": self.formula,
            "variables": list(self.variables),
            "arity": self.arity,
            "domain": self.domain,
            "shape": self.shape,
            "expected_class": self.expected_class.value,
            "signature": self.signature,
            "det_zero": self.det_zero,
            "direction": self.direction,
            "rhs": self.rhs_text,
            "params": dict(self.params),
            "params_note": self.params_note,
        }


def _norm_rhs(colsum):
    return np.sqrt(np.sum(colsum * colsum, axis=1))


def _ex1_rhs(s, c):
    k = _const(lambda mpf: mpf(3) ** (2 * mpf(c) - mpf(3) / 2) / mpf(2) ** mpf(c))
    return k * s ** (2.5 - 2.0 * c)


_EX2_K = _const(lambda mpf: mpmath.sqrt(3) / mpf(2) ** (mpf(1) / 4))
_EX3_K = _const(lambda mpf: 9 * mpmath.sqrt(3) / mpf(2) ** (mpf(1) / 4))


def _ex4_rhs(colsum):
    x, y = colsum[:, 0], colsum[:, 1]
    return x * y / np.sqrt(x * x + y * y)


_ENTRIES = (
    CorpusEntry(
        id="norm3",
        title="Euclidean norm in R^3",
        formula="sqrt(x1^2 + x2^2 + x3^2)",
        variables=("x1", "x2", "x3"),
        shape="parallel",
        expected_class=Definiteness.POSITIVE_SEMIDEFINITE,
        signature="D1 >= 0, D2 >= 0, D3 = 0",
        det_zero=True,
        domain="x_i, y_i, z_i > 0",
        rhs_text="sqrt((x1+y1+z1)^2 + (x2+y2+z2)^2 + (x3+y3+z3)^2)",
        rhs=_norm_rhs,
    ),
    CorpusEntry(
        id="ex1",
        title="y^3 / (sqrt(x) (x^2+y^2)^c)",
        formula="y^3/(sqrt(x)*(x^2+y^2)^c)",
        variables=("x", "y"),
        shape="cyclic2",
        expected_class=Definiteness.POSITIVE_SEMIDEFINITE,
        signature="mu >= 0, lambda >= 0",
        det_zero=False,
        domain="x, y, z > 0",
        rhs_text="3^(2c-3/2)/2^c * (x+y+z)^(5/2-2c)",
        rhs=_ex1_rhs,
        params={"c": -2.0},
        params_in_range=lambda p: p["c"] < -1.0,
        params_note="claims asserted only for c < -1",
    ),
    CorpusEntry(
        id="ex2",
        title="sqrt(xy) / (x^2+y^2)^(1/4)",
        formula="sqrt(x*y)/(x^2+y^2)^(1/4)",
        variables=("x", "y"),
        shape="cyclic2",
        expected_class=Definiteness.NEGATIVE_SEMIDEFINITE,
        signature="mu <= 0, lambda >= 0",
        det_zero=False,
        domain="x, y, z > 0",
        rhs_text="sqrt(3)/2^(1/4) * sqrt(x+y+z)",
        rhs=lambda s: _EX2_K * np.sqrt(s),
    ),
    CorpusEntry(
        id="ex3",
        title="1 / (sqrt(xy) (x^2+y^2)^(1/4))",
        formula="1/(sqrt(x*y)*(x^2+y^2)^(1/4))",
        variables=("x", "y"),
        shape="cyclic2",
        expected_class=Definiteness.POSITIVE_SEMIDEFINITE,
        signature="mu >= 0, lambda >= 0",
        det_zero=False,
        domain="x, y, z > 0",
        rhs_text="9 sqrt(3) / (2^(1/4) (x+y+z)^(3/2))",
        rhs=lambda s: _EX3_K / s ** 1.5,
    ),
    CorpusEntry(
        id="ex4",
        title="xy / sqrt(x^2+y^2)",
        formula="x*y/sqrt(x^2+y^2)",
        variables=("x", "y"),
        shape="parallel",
        expected_class=Definiteness.NEGATIVE_SEMIDEFINITE,
        signature="mu <= 0, lambda = 0",
        det_zero=True,
        domain="x_i, y_i > 0",
        rhs_text="(x1+x2+x3)(y1+y2+y3) / sqrt((x1+x2+x3)^2 + (y1+y2+y3)^2)",
        rhs=_ex4_rhs,
    ),
    CorpusEntry(
        id="ex5",
        title="x^2 / (x+y)",
        formula="x^2/(x+y)",
        variables=("x", "y"),
        shape="cyclic2",
        expected_class=Definiteness.POSITIVE_SEMIDEFINITE,
        signature="mu >= 0, lambda = 0",
        det_zero=True,
        domain="x, y, z > 0 (mixed signs with x+y, y+z, z+x != 0 on request)",
        rhs_text="(x+y+z)/2",
        rhs=lambda s: 0.5 * s,
    ),
)


def list_entries() -> List[CorpusEntry]:
    return list(_ENTRIES)


def get_entry(entry_id: str) -> CorpusEntry:
    for e in _ENTRIES:
        if e.id == entry_id:
            return e
    raise KeyError(f"unknown corpus entry {entry_id!r}; known: {', '.join(e.id for e in _ENTRIES)}")


def manifest() -> list:
    return [e.manifest() for e in _ENTRIES]


def entry_rng(entry_id: str, seed: int, chunk: int = 0, salt: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(entry_id.encode()), int(salt), int(chunk)])


def log_uniform(rng: np.random.Generator, shape, lo: float = SAMPLE_LO, hi: float = SAMPLE_HI) -> np.ndarray:
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=shape))


def sample_triples(entry: CorpusEntry, n: int, rng: np.random.Generator) -> np.ndarray:
    """Admissible point triples of shape (n, 3, arity), coordinates log-uniform."""
    if entry.shape == "parallel":
        return log_uniform(rng, (n, 3, entry.arity))
    return cyclic_stack(log_uniform(rng, (n, 3)), 3 if entry.shape == "cyclic3" else 2)


def symmetric_triple(entry: CorpusEntry, value: float) -> np.ndarray:
    return np.full((1, 3, entry.arity), float(value))


def lhs_values(f: ad.ScalarFn, triples: np.ndarray) -> np.ndarray:
    m, _, d = triples.shape
    return np.asarray(f.at(triples.reshape(3 * m, d))).reshape(m, 3).sum(axis=1)


@dataclass
class EntryReport:
    id: str
    params: dict
    n_samples: int
    seed: int
    asserted: bool
    min_margin: float
    argmin: list
    n_violations: int
    violations: list
    equality: list
    mixed_signs: Optional[dict] = None

    @property
    def margin_ok(self) -> bool:
        return self.n_violations == 0

    @property
    def equality_ok(self) -> bool:
        return all(e["passed"] for e in self.equality)

    @property
    def passed(self) -> bool:
        return self.margin_ok and self.equality_ok

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "params": self.params,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "asserted": self.asserted,
            "min_margin": self.min_margin,
            "argmin": self.argmin,
            "n_violations": self.n_violations,
            "violations": self.violations,
            "equality": self.equality,
            "mixed_signs": self.mixed_signs,
            "passed": self.passed,
        }


def _mixed_triples(rng, n):
    """(x, y, z) with random signs; pairwise sums kept at least SAMPLE_LO away from 0."""
    xyz = log_uniform(rng, (n, 3)) * rng.choice([-1.0, 1.0], size=(n, 3))
    pair = np.stack([xyz[:, 0] + xyz[:, 1], xyz[:, 1] + xyz[:, 2], xyz[:, 2] + xyz[:, 0]], axis=1)
    keep = np.all(np.abs(pair) >= SAMPLE_LO, axis=1)
    return xyz[keep], pair[keep]


def verify_entry(entry_id: str, params=None, n_samples: int = 10_000, seed: int = DEFAULT_SEED,
                 tol: float = DEFAULT_TOL, mixed_signs: bool = False, threads: int = 1) -> EntryReport:
    """Sample the entry's inequality and record the worst scaled margin.

    The margin of one sample is ``+-(LHS - RHS) / (1 + |RHS|)`` with the sign
    chosen so that the claimed inequality means margin >= 0; samples below
    ``-tol`` count as violations.  Equality at x = y = z is checked separately
    to ``EQUALITY_TOL``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    entry = get_entry(entry_id)
    params = entry.resolve_params(params)
    f = entry.function(params)
    sign = 1.0 if entry.direction == ">=" else -1.0
    mixed_info = None

    if mixed_signs:
        if entry.id != "ex5":
            raise ValueError("mixed-sign sampling is only defined for ex5")
        rng = entry_rng(entry.id, seed, salt=1)
        xyz, pair = _mixed_triples(rng, n_samples)
        triples = cyclic_stack(xyz, 2)
        lhs = lhs_values(f, triples)
        rhs = entry.rhs_values(triples, params)
        pos = np.all(pair > 0, axis=1)
        neg = np.all(pair < 0, axis=1)
        mixed_info = {
            "n_kept": int(len(xyz)),
            "positive_branch": int(pos.sum()),
            "negative_branch": int(neg.sum()),
            "crossing": int((~pos & ~neg).sum()),
            "negative_branch_reversed": int(np.sum(neg & (lhs < rhs - tol * (1 + np.abs(rhs))))),
            "crossing_reversed": int(np.sum(~pos & ~neg & (lhs < rhs - tol * (1 + np.abs(rhs))))),
        }
        # only the positive branch is asserted; the rest is recorded above
        triples, lhs, rhs = triples[pos], lhs[pos], rhs[pos]
        margins = sign * (lhs - rhs) / (1.0 + np.abs(rhs))
    else:
        def run(c, start, stop):
            t = sample_triples(entry, stop - start, entry_rng(entry.id, seed, c))
            lhs = lhs_values(f, t)
            rhs = entry.rhs_values(t, params)
            return t, sign * (lhs - rhs) / (1.0 + np.abs(rhs))

        parts = map_chunks(run, n_samples, threads)
        triples = np.concatenate([p[0] for p in parts])
        margins = np.concatenate([p[1] for p in parts])

    if len(margins):
        i = int(np.argmin(margins))
        min_margin, argmin = float(margins[i]), triples[i].tolist()
    else:
        min_margin, argmin = float("inf"), []
    bad = np.flatnonzero(margins < -tol)
    violations = [{"index": int(k), "triple": triples[k].tolist(), "margin": float(margins[k])}
                  for k in bad[:MAX_LISTED_VIOLATIONS]]

    equality = []
    for v in EQUALITY_POINTS:
        t = symmetric_triple(entry, v)
        lhs = float(lhs_values(f, t)[0])
        rhs = float(entry.rhs_values(t, params)[0])
        diff = abs(lhs - rhs)
        equality.append({"value": v, "lhs": lhs, "rhs": rhs, "abs_diff": diff,
                         "passed": bool(diff <= EQUALITY_TOL * (1.0 + abs(rhs)))})

    return EntryReport(
        id=entry.id,
        params=params,
        n_samples=int(n_samples),
        seed=int(seed),
        asserted=entry.asserted(params),
        min_margin=min_margin,
        argmin=argmin,
        n_violations=int(len(bad)),
        violations=violations,
        equality=equality,
        mixed_signs=mixed_info,
    )


@dataclass
class SignatureReport:
    id: str
    params: dict
    n_samples: int
    seed: int
    asserted: bool
    passed: bool
    class_counts: dict
    n_incompatible: int
    worst_point: list
    worst_eigenvalue: float
    mu_range: list
    det_range: list
    max_abs_det: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _compatible(found: Definiteness, expected: Definiteness) -> bool:
    if found == Definiteness.ZERO:
        return True
    if expected.nonnegative:
        return found in (Definiteness.POSITIVE_DEFINITE, Definiteness.POSITIVE_SEMIDEFINITE)
    return found in (Definiteness.NEGATIVE_DEFINITE, Definiteness.NEGATIVE_SEMIDEFINITE)


def verify_hessian_signature(entry_id: str, params=None, n_samples: int = 10_000, seed: int = DEFAULT_SEED,
                             tol: float = DEFAULT_TOL) -> SignatureReport:
    """Classify the Hessian at sampled domain points against the entry's claimed class.

    PD is accepted where PSD is claimed.  For entries whose Hessian determinant is
    claimed to vanish identically, |det H| must stay below ``tol * max(1, |H|)**n``.
    Determinants are reported scaled by ``max(1, |H|)**n``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    entry = get_entry(entry_id)
    params = entry.resolve_params(params)
    f = entry.function(params)
    pts = log_uniform(entry_rng(entry.id, seed, salt=2), (n_samples, entry.arity))
    hess = ad.hessian_array(f, pts)
    classes, lam = classify_batch(hess, tol)
    n = entry.arity
    scale = np.maximum(1.0, np.max(np.abs(hess), axis=(1, 2)))
    det_scaled = np.linalg.det(hess) / scale ** n
    ok = np.array([_compatible(c, entry.expected_class) for c in classes])
    if entry.det_zero:
        ok &= np.abs(det_scaled) <= tol
    if entry.expected_class.nonnegative:
        key = lam[:, 0] / scale
        j = int(np.argmin(key))
        worst = float(lam[j, 0])
    else:
        key = lam[:, -1] / scale
        j = int(np.argmax(key))
        worst = float(lam[j, -1])
    if not ok.all():
        j = int(np.flatnonzero(~ok)[0])
        worst = float(lam[j, 0] if entry.expected_class.nonnegative else lam[j, -1])
    counts: Dict[str, int] = {}
    for c in classes:
        counts[c.value] = counts.get(c.value, 0) + 1
    mu = hess[:, 0, 0]
    return SignatureReport(
        id=entry.id,
        params=params,
        n_samples=int(n_samples),
        seed=int(seed),
        asserted=entry.asserted(params),
        passed=bool(ok.all()),
        class_counts=dict(sorted(counts.items())),
        n_incompatible=int((~ok).sum()),
        worst_point=pts[j].tolist(),
        worst_eigenvalue=worst,
        mu_range=[float(mu.min()), float(mu.max())],
        det_range=[float(det_scaled.min()), float(det_scaled.max())],
        max_abs_det=float(np.abs(det_scaled).max()),
    )
