"""Graph surfaces w = f(u, v): fundamental forms, curvature, and the curvature test.

With p = f_u, q = f_v, r = f_uu, s = f_uv, t = f_vv the surface {u, v, f(u, v)}
has E = 1 + p^2, F = pq, G = 1 + q^2 and L, M, N = (r, s, t) / sqrt(1 + p^2 + q^2),
so the Gauss curvature (LN - M^2)/(EG - F^2) reduces to (rt - s^2)/(1 + p^2 + q^2)^2.
Its sign is the sign of the Hessian determinant, so "r >= 0 and K >= 0" is the
2x2 semidefiniteness test for f read geometrically.  ``curvature_check`` runs
the Jensen check through that route.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import List

import numpy as np

from . import autodiff as ad
from .jensen import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_TOL,
    JensenReport,
    _as_array,
    _chunk_rng,
    _hessians_located,
    _region_meet,
    barycentric_weights,
    gap_tolerance,
    gaps_batch,
    map_chunks,
    verdict_for,
)
from .symmat import Definiteness

CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class SurfaceJet:
    p: float
    q: float
    r: float
    s: float
    t: float

    def as_tuple(self):
        return (self.p, self.q, self.r, self.s, self.t)


@dataclass(frozen=True)
class FundamentalForms:
    E: float
    F: float
    G: float
    L: float
    M: float
    N: float


def jet(f: ad.ScalarFn, uv) -> SurfaceJet:
    """First and second partials of f at ``uv``, or at each row of an (m, 2) array."""
    if f.arity != 2:
        raise ValueError("surface functions take exactly two variables")
    uv = np.asarray(uv, dtype=float)
    du = ad.hd_eval(f, uv, 0, 0)
    dv = ad.hd_eval(f, uv, 1, 1)
    duv = ad.hd_eval(f, uv, 0, 1)
    return SurfaceJet(du.e1, dv.e1, du.e12, duv.e12, dv.e12)


def fundamental_forms(j: SurfaceJet) -> FundamentalForms:
    w = np.sqrt(1.0 + j.p * j.p + j.q * j.q)
    return FundamentalForms(
        E=1.0 + j.p * j.p,
        F=j.p * j.q,
        G=1.0 + j.q * j.q,
        L=j.r / w,
        M=j.s / w,
        N=j.t / w,
    )


def gauss_curvature(j: SurfaceJet):
    """(rt - s^2) / (1 + p^2 + q^2)^2, cross-checked against (LN - M^2)/(EG - F^2).

    The two must agree to ``CONSISTENCY_TOL`` relative to the size of the
    cancelling terms, (|rt| + s^2) / (1 + p^2 + q^2)^2.  Computing EG - F^2
    from the forms cancels badly once |pq| is large, so the tolerance grows
    with EG / (EG - F^2), and points where that cancellation leaves no
    correct digits at all are not compared.
    """
    w2 = 1.0 + j.p * j.p + j.q * j.q
    k = (j.r * j.t - j.s * j.s) / (w2 * w2)
    ff = fundamental_forms(j)
    with np.errstate(all="ignore"):
        k_forms = (ff.L * ff.N - ff.M * ff.M) / (ff.E * ff.G - ff.F * ff.F)
        cond = ff.E * ff.G / w2
    size = (np.abs(j.r * j.t) + j.s * j.s) / (w2 * w2)
    eps = np.finfo(float).eps
    tol = np.maximum(CONSISTENCY_TOL, 8.0 * eps * cond) * np.maximum(1.0, size)
    checked = cond * eps < 1e-3
    if np.any(checked & ~(np.abs(k - k_forms) <= tol)):
        raise ArithmeticError("Gauss curvature formulas disagree")
    return k


def mean_curvature(j: SurfaceJet):
    """Diagnostic only: (EN - 2FM + GL) / (2(EG - F^2))."""
    ff = fundamental_forms(j)
    return (ff.E * ff.N - 2.0 * ff.F * ff.M + ff.G * ff.L) / (2.0 * (ff.E * ff.G - ff.F * ff.F))


def _jets_located(f, pts) -> SurfaceJet:
    h = _hessians_located(f, pts)
    g = np.stack([ad.hd_eval(f, pts, 0, 0).e1, ad.hd_eval(f, pts, 1, 1).e1], axis=-1)
    return SurfaceJet(g[:, 0], g[:, 1], h[:, 0, 0], h[:, 0, 1], h[:, 1, 1])


_CURV_CODES = [
    Definiteness.POSITIVE_DEFINITE,
    Definiteness.NEGATIVE_DEFINITE,
    Definiteness.ZERO,
    Definiteness.POSITIVE_SEMIDEFINITE,
    Definiteness.NEGATIVE_SEMIDEFINITE,
    Definiteness.INDEFINITE,
]


def classify_by_curvature(j: SurfaceJet, tol: float = DEFAULT_TOL):
    """Point-wise class from the signs of r, t and K.

    With eps = tol * max(1, |r|, |s|, |t|), the smallest eigenvalue exceeds
    eps exactly when r > eps and det(H - eps I) > 0, and det(H -+ eps I) is
    K (1 + p^2 + q^2)^2 -+ eps (r + t) + eps^2.  Shifting by eps this way
    keeps the thresholds identical to the eigenvalue classifier, so the two
    routes only differ by rounding.
    """
    p, q, r, s, t = (np.atleast_1d(np.asarray(v, dtype=float)) for v in j.as_tuple())
    k = gauss_curvature(SurfaceJet(p, q, r, s, t))
    det = k * (1.0 + p * p + q * q) ** 2
    scale = np.maximum.reduce([np.ones_like(r), np.abs(r), np.abs(s), np.abs(t)])
    eps = tol * scale
    det_lo = det - eps * (r + t) + eps * eps  # det(H - eps I)
    det_hi = det + eps * (r + t) + eps * eps  # det(H + eps I)
    psd = (r >= -eps) & (t >= -eps) & (det_hi >= 0)
    nsd = (r <= eps) & (t <= eps) & (det_lo >= 0)
    code = np.select(
        [(r > eps) & (det_lo > 0), (r < -eps) & (det_hi > 0), psd & nsd, psd, nsd],
        [0, 1, 2, 3, 4],
        default=5,
    )
    return [_CURV_CODES[c] for c in code], k


def _curvature_chunk(f, triples, samples, rng, tol):
    m, _, d = triples.shape
    gaps, fg = gaps_batch(f, triples)
    w = barycentric_weights(rng, m, samples)
    pts = np.einsum("mkj,mjd->mkd", w, triples)
    k = pts.shape[1]
    flat = pts.reshape(m * k, d)
    jets = _jets_located(f, flat)
    classes, curv = classify_by_curvature(jets, tol)
    curv = curv.reshape(m, k)
    reports = []
    for i in range(m):
        cls = _region_meet(classes[i * k:(i + 1) * k])
        jworst = int(np.argmin(curv[i]))
        slack = float(gap_tolerance(fg[i], tol))
        reports.append(
            JensenReport(
                gap=float(gaps[i]),
                centroid=triples[i].mean(axis=0),
                region_class=cls,
                verdict=verdict_for(cls, float(gaps[i]), slack),
                hull_samples=k,
                worst_hessian_point=pts[i, jworst].copy(),
                tol=slack,
                points=triples[i].copy(),
                f_centroid=float(fg[i]),
            )
        )
    return reports


def curvature_check_many(f: ad.ScalarFn, triples, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                         tol: float = DEFAULT_TOL, threads: int = 1) -> List[JensenReport]:
    triples = np.asarray(triples, dtype=float)
    if f.arity != 2 or triples.ndim != 3 or triples.shape[1:] != (3, 2):
        raise ValueError("curvature check needs a function of two variables and (m, 3, 2) triples")

    def run(c, start, stop):
        return _curvature_chunk(f, triples[start:stop], samples, _chunk_rng(seed, c), tol)

    return [r for part in map_chunks(run, len(triples), threads) for r in part]


def curvature_check(f: ad.ScalarFn, t, samples: int = DEFAULT_SAMPLES, seed: int = DEFAULT_SEED,
                    tol: float = DEFAULT_TOL) -> JensenReport:
    """Jensen verdict for a graph surface decided by the signs of r and K on the triangle.

    Uses the same sample points as :func:`jensen.check_jensen` for equal seeds,
    so the two verdicts are directly comparable.
    """
    return curvature_check_many(f, _as_array(t)[None], samples, seed, tol)[0]

