"""Three-point Jensen inequalities.

For three points P1, P2, P3 with centroid G the gap

    gap = f(P1) + f(P2) + f(P3) - 3 f(G)

is non-negative when the Hessian of f is positive semidefinite on the
triangle spanned by the points and non-positive when it is negative
semidefinite.  ``check_jensen`` evaluates the gap, certifies the Hessian
class on the triangle by sampling, and reports whether the two agree.  The
certificate is empirical: a finite set of Hessian evaluations, not a proof.
"""
from __future__ import annotations

import enum
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import reduce
from typing import List, Optional, Sequence

import numpy as np

from . import autodiff as ad
from .errors import DomainError
from .symmat import DEFAULT_TOL, Definiteness, classify_batch, meet

DEFAULT_SEED = 0xC0DE  # 49374
DEFAULT_SAMPLES = 16
CHUNK_SIZE = 2048

# vertices, edge midpoints and centroid, as barycentric weights
MANDATORY_WEIGHTS = np.array(
    [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.5, 0.5, 0.0],
        [0.0, 0.5, 0.5],
        [0.5, 0.0, 0.5],
        [1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
    ]
)

# t_i subtracts the other two coordinates: i=1 -> (2, 3), i=2 -> (1, 3), i=3 -> (1, 2)
SIGMA = (1, 0, 0)
MU = (2, 2, 1)


class Verdict(str, enum.Enum):
    HOLDS_GE = "holds_ge"
    HOLDS_LE = "holds_le"
    HOLDS_BOTH = "holds_both"
    INCONCLUSIVE = "inconclusive"
    VIOLATES_THEOREM = "violates_theorem"


@dataclass(frozen=True)
class PointTriple:
    points: tuple

    def __post_init__(self):
        arr = np.asarray(self.points, dtype=float)
        if arr.shape not in ((3, 2), (3, 3)):
            raise ValueError(f"expected three points in R^2 or R^3, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("points must be finite")
        object.__setattr__(self, "points", tuple(tuple(float(v) for v in p) for p in arr))

    @property
    def dim(self) -> int:
        return len(self.points[0])

    @property
    def array(self) -> np.ndarray:
        return np.array(self.points)

    def __iter__(self):
        return iter(self.points)


def _as_array(t) -> np.ndarray:
    if isinstance(t, PointTriple):
        return t.array
    return PointTriple(t).array


def cyclic3_triple(x: float, y: float, z: float) -> PointTriple:
    return PointTriple(((x, y, z), (y, z, x), (z, x, y)))


def cyclic2_triple(x: float, y: float, z: float) -> PointTriple:
    return PointTriple(((x, y), (y, z), (z, x)))


def parallel_triple(p1, p2, p3) -> PointTriple:
    return PointTriple((tuple(p1), tuple(p2), tuple(p3)))


def cyclic_stack(xyz: np.ndarray, dim: int) -> np.ndarray:
    """Vectorized cyclic triples from an (m, 3) array of (x, y, z) rows."""
    x, y, z = xyz[:, 0], xyz[:, 1], xyz[:, 2]
    if dim == 3:
        rows = [(x, y, z), (y, z, x), (z, x, y)]
    elif dim == 2:
        rows = [(x, y), (y, z), (z, x)]
    else:
        raise ValueError("dim must be 2 or 3")
    return np.stack([np.stack(r, axis=-1) for r in rows], axis=1)


def centroid(t) -> np.ndarray:
    return _as_array(t).mean(axis=0)


def _eval_located(f: ad.ScalarFn, pts: np.ndarray) -> np.ndarray:
    """f at each row of ``pts``; on failure, re-raise naming the first bad point."""
    try:
        return np.asarray(f.at(pts), dtype=float) * np.ones(len(pts))
    except DomainError:
        for p in pts:
            try:
                f.at(p)
            except DomainError as err:
                raise err.at_point(p) from None
        raise


def _hessians_located(f: ad.ScalarFn, pts: np.ndarray) -> np.ndarray:
    try:
        return ad.hessian_array(f, pts)
    except DomainError:
        for p in pts:
            try:
                ad.hessian_array(f, p)
            except DomainError as err:
                raise err.at_point(p) from None
        raise


def gaps_batch(f: ad.ScalarFn, triples: np.ndarray):
    """Gaps and centroid values for an (m, 3, d) stack.  Returns (gap, f(G))."""
    m, _, d = triples.shape
    vals = _eval_located(f, triples.reshape(3 * m, d)).reshape(m, 3)
    fg = _eval_located(f, triples.mean(axis=1))
    return vals.sum(axis=1) - 3.0 * fg, fg


def jensen_gap(f: ad.ScalarFn, t) -> float:
    arr = _as_array(t)
    gap, _ = gaps_batch(f, arr[None])
    return float(gap[0])


def barycentric_weights(rng: np.random.Generator, m: int, samples: int) -> np.ndarray:
    """Mandatory weights followed by ``samples`` uniform draws on the simplex, per triple."""
    e = rng.standard_exponential((m, samples, 3))
    rand = e / e.sum(axis=2, keepdims=True)
    fixed = np.broadcast_to(MANDATORY_WEIGHTS, (m, len(MANDATORY_WEIGHTS), 3))
    return np.concatenate([fixed, rand], axis=1)


def _region_meet(classes: Sequence[Definiteness]) -> Definiteness:
    return reduce(meet, classes)


@dataclass
class RegionCertificate:
    region_class: Definiteness
    n_points: int
    worst_point: np.ndarray
    worst_eigenvalue: float


def _certify_stack(hess: np.ndarray, pts: np.ndarray, m: int, k: int, tol: float) -> List[RegionCertificate]:
    classes, lam = classify_batch(hess, tol)
    lam = lam.reshape(m, k, -1)
    pts = pts.reshape(m, k, -1)
    scale = np.maximum(1.0, np.max(np.abs(hess), axis=(-2, -1))).reshape(m, k)
    out = []
    for i in range(m):
        cls = _region_meet(classes[i * k:(i + 1) * k])
        if cls.nonpositive and cls != Definiteness.ZERO:
            j = int(np.argmax(lam[i, :, -1] / scale[i]))
            worst = float(lam[i, j, -1])
        else:
            j = int(np.argmin(lam[i, :, 0] / scale[i]))
            worst = float(lam[i, j, 0])
        out.append(RegionCertificate(cls, k, pts[i, j].copy(), worst))
    return out


def certify_regions(f: ad.ScalarFn, triples: np.ndarray, samples: int, rng: np.random.Generator,
                    tol: float = DEFAULT_TOL) -> List[RegionCertificate]:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    m, _, d = triples.shape
    w = barycentric_weights(rng, m, samples)
    pts = np.einsum("mkj,mjd->mkd", w, triples)
    k = pts.shape[1]
    flat = pts.reshape(m * k, d)
    hess = _hessians_located(f, flat)
    return _certify_stack(hess, flat, m, k, tol)


def certify_region(f: ad.ScalarFn, t, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                   tol: float = DEFAULT_TOL) -> Definiteness:
    """Hessian class on the closed triangle of ``t`` (sampled certificate)."""
    arr = _as_array(t)
    return certify_regions(f, arr[None], samples, _chunk_rng(seed, 0), tol)[0].region_class


@dataclass
class JensenReport:
    gap: float
    centroid: np.ndarray
    region_class: Definiteness
    verdict: Verdict
    hull_samples: int
    worst_hessian_point: np.ndarray
    tol: float
    points: Optional[np.ndarray] = None
    f_centroid: float = float("nan")

    def to_dict(self) -> dict:
        return {
            "gap": float(self.gap),
            "centroid": [float(v) for v in self.centroid],
            "region_class": self.region_class.value,
            "verdict": self.verdict.value,
            "hull_samples": int(self.hull_samples),
            "worst_hessian_point": [float(v) for v in self.worst_hessian_point],
            "tol": float(self.tol),
            "points": None if self.points is None else [[float(v) for v in p] for p in self.points],
        }


def verdict_for(region_class: Definiteness, gap: float, tol: float) -> Verdict:
    """Map a region class and a gap to a verdict; ``tol`` is the absolute gap slack."""
    if region_class == Definiteness.INDEFINITE:
        return Verdict.INCONCLUSIVE
    if region_class == Definiteness.ZERO:
        return Verdict.HOLDS_BOTH if abs(gap) <= tol else Verdict.VIOLATES_THEOREM
    if region_class.nonnegative:
        return Verdict.HOLDS_GE if gap >= -tol else Verdict.VIOLATES_THEOREM
    return Verdict.HOLDS_LE if gap <= tol else Verdict.VIOLATES_THEOREM


def gap_tolerance(f_centroid, tol: float = DEFAULT_TOL):
    return tol * (1.0 + np.abs(f_centroid))


def _chunk_rng(seed: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(chunk)])


def default_threads() -> int:
    env = os.environ.get("JENSEN_CERT_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def map_chunks(fn, n_items: int, threads: int = 1, chunk: int = CHUNK_SIZE) -> list:
    """Run ``fn(chunk_index, start, stop)`` over fixed-size chunks, results in chunk order.

    Chunk boundaries do not depend on ``threads``, so seeded results don't either.
    """
    bounds = [(c, s, min(s + chunk, n_items)) for c, s in enumerate(range(0, n_items, chunk))]
    if threads <= 1 or len(bounds) <= 1:
        return [fn(*b) for b in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))


def _check_chunk(f, triples, samples, rng, tol):
    gaps, fg = gaps_batch(f, triples)
    certs = certify_regions(f, triples, samples, rng, tol)
    reports = []
    for i, cert in enumerate(certs):
        slack = float(gap_tolerance(fg[i], tol))
        reports.append(
            JensenReport(
                gap=float(gaps[i]),
                centroid=triples[i].mean(axis=0),
                region_class=cert.region_class,
                verdict=verdict_for(cert.region_class, float(gaps[i]), slack),
                hull_samples=cert.n_points,
                worst_hessian_point=cert.worst_point,
                tol=slack,
                points=triples[i].copy(),
                f_centroid=float(fg[i]),
            )
        )
    return reports


def check_jensen_many(f: ad.ScalarFn, triples, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                      tol: float = DEFAULT_TOL, threads: int = 1) -> List[JensenReport]:
    """``check_jensen`` over an (m, 3, d) stack of triples."""
    triples = np.asarray(triples, dtype=float)
    if triples.ndim != 3 or triples.shape[1] != 3 or triples.shape[2] != f.arity:
        raise ValueError(f"expected shape (m, 3, {f.arity}), got {triples.shape}")

    def run(c, start, stop):
        return _check_chunk(f, triples[start:stop], samples, _chunk_rng(seed, c), tol)

    return [r for part in map_chunks(run, len(triples), threads) for r in part]


def check_jensen(f: ad.ScalarFn, t, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                 tol: float = DEFAULT_TOL) -> JensenReport:
    """Gap, sampled Hessian class on the triangle, and the resulting verdict.

    ``tol`` is relative: the gap may miss its predicted sign by up to
    ``tol * (1 + |f(G)|)``, and eigenvalues within ``tol * max(1, |H|)`` of
    zero count as zero.
    """
    return check_jensen_many(f, _as_array(t)[None], samples, seed, tol)[0]


def combine_verdicts(verdicts) -> Verdict:
    """Overall verdict over many triples."""
    vs = set(verdicts)
    if not vs:
        return Verdict.INCONCLUSIVE
    if Verdict.VIOLATES_THEOREM in vs:
        return Verdict.VIOLATES_THEOREM
    if vs == {Verdict.HOLDS_BOTH}:
        return Verdict.HOLDS_BOTH
    if vs <= {Verdict.HOLDS_GE, Verdict.HOLDS_BOTH}:
        return Verdict.HOLDS_GE
    if vs <= {Verdict.HOLDS_LE, Verdict.HOLDS_BOTH}:
        return Verdict.HOLDS_LE
    return Verdict.INCONCLUSIVE


def symmetrization_coeffs(y1: float, y2: float, y3: float):
    """Coefficients t with (1/3) x.y - (1/9) sum(x) sum(y) = x.t."""
    y = (y1, y2, y3)
    return tuple((2.0 * y[i] - y[SIGMA[i]] - y[MU[i]]) / 9.0 for i in range(3))


def symmetrization_form(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(x @ y / 3.0 - x.sum() * y.sum() / 9.0)


def symmetrization_form_linear(x, y) -> float:
    t = symmetrization_coeffs(*y)
    return float(sum(xi * ti for xi, ti in zip(x, t)))


def gap_moment_form(hess, t) -> float:
    """(3/2) sum_ik H_ik ((1/3) sum_j p_i^j p_k^j - g_i g_k); equals the gap for quadratic f."""
    p = _as_array(t)
    h = np.asarray(hess.to_array() if hasattr(hess, "to_array") else hess, dtype=float)
    g = p.mean(axis=0)
    moments = p.T @ p / 3.0 - np.outer(g, g)
    return float(1.5 * np.sum(h * moments))


def gap_symmetrized_form(hess, t) -> float:
    """The moment form rewritten through the symmetrization coefficients.

    The coefficients act on the point index j: for each coordinate pair (i, k)
    the moment term is sum_j p_i^j t_k^j with t_k built from (p_k^1, p_k^2, p_k^3).
    """
    p = _as_array(t)
    h = np.asarray(hess.to_array() if hasattr(hess, "to_array") else hess, dtype=float)
    d = p.shape[1]
    total = 0.0
    for i in range(d):
        for k in range(d):
            total += h[i, k] * symmetrization_form_linear(p[:, i], p[:, k])
    return 1.5 * total
