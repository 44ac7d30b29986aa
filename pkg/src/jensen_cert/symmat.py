"""Symmetric matrices and their definiteness.

Two classifiers are provided.  ``classify_sylvester_strict`` applies the
leading-principal-minor test literally and can only certify *strict*
definiteness.  ``classify_eigen`` looks at the eigenvalues and also resolves
the semidefinite cases, which is what the Jensen checks rely on.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import NumericalError

DEFAULT_TOL = 1e-9
MAX_EIGEN_DIM = 16
MAX_JACOBI_SWEEPS = 50


class Definiteness(str, enum.Enum):
    POSITIVE_DEFINITE = "positive_definite"
    NEGATIVE_DEFINITE = "negative_definite"
    POSITIVE_SEMIDEFINITE = "positive_semidefinite"
    NEGATIVE_SEMIDEFINITE = "negative_semidefinite"
    INDEFINITE = "indefinite"
    ZERO = "zero"

    @property
    def short(self) -> str:
        return _SHORT[self]

    def mirror(self) -> "Definiteness":
        return _MIRROR[self]

    @property
    def nonnegative(self) -> bool:
        return self in (Definiteness.POSITIVE_DEFINITE, Definiteness.POSITIVE_SEMIDEFINITE, Definiteness.ZERO)

    @property
    def nonpositive(self) -> bool:
        return self in (Definiteness.NEGATIVE_DEFINITE, Definiteness.NEGATIVE_SEMIDEFINITE, Definiteness.ZERO)


_SHORT = {
    Definiteness.POSITIVE_DEFINITE: "PD",
    Definiteness.NEGATIVE_DEFINITE: "ND",
    Definiteness.POSITIVE_SEMIDEFINITE: "PSD",
    Definiteness.NEGATIVE_SEMIDEFINITE: "NSD",
    Definiteness.INDEFINITE: "Indefinite",
    Definiteness.ZERO: "Zero",
}
_MIRROR = {
    Definiteness.POSITIVE_DEFINITE: Definiteness.NEGATIVE_DEFINITE,
    Definiteness.NEGATIVE_DEFINITE: Definiteness.POSITIVE_DEFINITE,
    Definiteness.POSITIVE_SEMIDEFINITE: Definiteness.NEGATIVE_SEMIDEFINITE,
    Definiteness.NEGATIVE_SEMIDEFINITE: Definiteness.POSITIVE_SEMIDEFINITE,
    Definiteness.INDEFINITE: Definiteness.INDEFINITE,
    Definiteness.ZERO: Definiteness.ZERO,
}


def meet(a: Definiteness, b: Definiteness) -> Definiteness:
    """Weakest class compatible with both ``a`` and ``b``.

    Used to combine point-wise classifications over a region.  Commutative and
    associative, so the result does not depend on evaluation order.
    """
    if a == b:
        return a
    if Definiteness.INDEFINITE in (a, b):
        return Definiteness.INDEFINITE
    if a.nonnegative and b.nonnegative:
        return Definiteness.POSITIVE_SEMIDEFINITE
    if a.nonpositive and b.nonpositive:
        return Definiteness.NEGATIVE_SEMIDEFINITE
    return Definiteness.INDEFINITE


@dataclass(frozen=True)
class SymMatrix:
    """Dense symmetric real matrix kept as its row-major upper triangle."""

    n: int
    entries: tuple

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if len(self.entries) != self.n * (self.n + 1) // 2:
            raise ValueError(f"expected {self.n * (self.n + 1) // 2} entries, got {len(self.entries)}")
        entries = tuple(float(v) for v in self.entries)
        if not all(math.isfinite(v) for v in entries):
            raise ValueError("matrix entries must be finite")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_array(cls, a, atol: float = 1e-12) -> "SymMatrix":
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {a.shape}")
        scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
        if np.any(np.abs(a - a.T) > atol * scale):
            raise ValueError("matrix is not symmetric")
        n = a.shape[0]
        iu = np.triu_indices(n)
        return cls(n, tuple(a[iu]))

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls.from_array(np.eye(n))

    @classmethod
    def diag(cls, values: Sequence[float]) -> "SymMatrix":
        return cls.from_array(np.diag(values))

    def _index(self, i: int, k: int) -> int:
        if i > k:
            i, k = k, i
        if not (0 <= i and k < self.n):
            raise IndexError((i, k))
        return i * self.n - i * (i - 1) // 2 + (k - i)

    def __getitem__(self, ik):
        i, k = ik
        return self.entries[self._index(i, k)]

    def to_array(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        a[np.triu_indices(self.n)] = self.entries
        return a + np.triu(a, 1).T

    def max_abs(self) -> float:
        return max(abs(v) for v in self.entries)

    def __neg__(self) -> "SymMatrix":
        return SymMatrix(self.n, tuple(-v for v in self.entries))

    def tolist(self):
        return self.to_array().tolist()


def effective_tol(scale: float, tol: float = DEFAULT_TOL) -> float:
    """Relative tolerance above unit scale, absolute below it."""
    return tol * max(1.0, scale)


def _det_small(a: np.ndarray) -> float:
    k = a.shape[0]
    if k == 1:
        return float(a[0, 0])
    if k == 2:
        return float(a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0])
    return float(
        a[0, 0] * (a[1, 1] * a[2, 2] - a[1, 2] * a[2, 1])
        - a[0, 1] * (a[1, 0] * a[2, 2] - a[1, 2] * a[2, 0])
        + a[0, 2] * (a[1, 0] * a[2, 1] - a[1, 1] * a[2, 0])
    )


def _det_lu(a: np.ndarray) -> float:
    # Gaussian elimination with partial pivoting
    a = a.astype(float).copy()
    k = a.shape[0]
    det = 1.0
    for col in range(k):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if a[piv, col] == 0.0:
            return 0.0
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            det = -det
        det *= a[col, col]
        a[col + 1:, col:] -= np.outer(a[col + 1:, col] / a[col, col], a[col, col:])
    return float(det)


def leading_principal_minors(a: SymMatrix) -> list:
    """Determinants D_1..D_n of the top-left k x k blocks."""
    full = a.to_array()
    return [_det_small(full[:k, :k]) if k <= 3 else _det_lu(full[:k, :k]) for k in range(1, a.n + 1)]


def classify_sylvester_strict(a: SymMatrix, tol: float = DEFAULT_TOL) -> Optional[Definiteness]:
    """Strict Sylvester test on the leading principal minors.

    Returns ``POSITIVE_DEFINITE`` when every D_k is positive,
    ``NEGATIVE_DEFINITE`` when every (-1)^k D_k is positive, and ``None``
    (indeterminate) otherwise; semidefinite and indefinite matrices cannot be
    told apart from the leading minors alone.  D_k is compared after dividing
    by ``max(1, max|a_ij|)**k``, so ``tol`` is absolute for matrices with
    entries below one.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    scale = max(1.0, a.max_abs())
    scaled = [d / scale ** k for k, d in enumerate(leading_principal_minors(a), start=1)]
    if all(d > tol for d in scaled):
        return Definiteness.POSITIVE_DEFINITE
    if all((-1) ** k * d > tol for k, d in enumerate(scaled, start=1)):
        return Definiteness.NEGATIVE_DEFINITE
    return None


def jacobi_eigenvalues(stack: np.ndarray, max_sweeps: int = MAX_JACOBI_SWEEPS) -> np.ndarray:
    """Eigenvalues of a stack of symmetric matrices by cyclic Jacobi rotations.

    ``stack`` has shape (m, n, n); all m matrices are rotated together.  Returns
    shape (m, n), each row sorted ascending.
    """
    a = np.array(stack, dtype=float, copy=True)
    if a.ndim == 2:
        a = a[None]
    m, n, _ = a.shape
    if n == 1:
        return a[:, :, 0].copy()
    total = np.sqrt(np.sum(a * a, axis=(1, 2)))
    offmask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(a[:, offmask] ** 2, axis=1))
        if np.all(off <= 1e-15 * total):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                active = apq != 0.0
                if not np.any(active):
                    continue
                safe = np.where(active, apq, 1.0)
                theta = (a[:, q, q] - a[:, p, p]) / (2.0 * safe)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                cc = c[:, None]
                sc = s[:, None]
                col_p = a[:, :, p].copy()
                col_q = a[:, :, q].copy()
                a[:, :, p] = cc * col_p - sc * col_q
                a[:, :, q] = sc * col_p + cc * col_q
                row_p = a[:, p, :].copy()
                row_q = a[:, q, :].copy()
                a[:, p, :] = cc * row_p - sc * row_q
                a[:, q, :] = sc * row_p + cc * row_q
                a[:, p, q] = np.where(active, 0.0, a[:, p, q])
                a[:, q, p] = a[:, p, q]
    else:
        raise NumericalError(f"Jacobi eigenvalue iteration did not converge in {max_sweeps} sweeps")
    return np.sort(np.diagonal(a, axis1=1, axis2=2), axis=1)


def eigenvalues_2x2(stack: np.ndarray) -> np.ndarray:
    stack = np.asarray(stack, dtype=float)
    a, b, d = stack[..., 0, 0], stack[..., 0, 1], stack[..., 1, 1]
    mid = 0.5 * (a + d)
    rad = np.hypot(0.5 * (a - d), b)
    return np.stack([mid - rad, mid + rad], axis=-1)


def eigenvalues_batch(stack: np.ndarray) -> np.ndarray:
    """Sorted eigenvalues of each matrix in a (m, n, n) stack."""
    stack = np.asarray(stack, dtype=float)
    n = stack.shape[-1]
    if n > MAX_EIGEN_DIM:
        raise ValueError(f"eigenvalue classifier supports n <= {MAX_EIGEN_DIM}, got {n}")
    if n == 1:
        return stack[..., 0].copy()
    if n == 2:
        return eigenvalues_2x2(stack)
    return jacobi_eigenvalues(stack)


def eigenvalues(a: SymMatrix) -> np.ndarray:
    return eigenvalues_batch(a.to_array()[None])[0]


def classify_eigenvalues(lam, scale: float, tol: float = DEFAULT_TOL) -> Definiteness:
    """Classify from eigenvalues; |lambda| <= tol * max(1, scale) counts as zero."""
    eps = effective_tol(scale, tol)
    lo, hi = float(np.min(lam)), float(np.max(lam))
    if lo > eps:
        return Definiteness.POSITIVE_DEFINITE
    if hi < -eps:
        return Definiteness.NEGATIVE_DEFINITE
    if lo >= -eps and hi <= eps:
        return Definiteness.ZERO
    if lo >= -eps:
        return Definiteness.POSITIVE_SEMIDEFINITE
    if hi <= eps:
        return Definiteness.NEGATIVE_SEMIDEFINITE
    return Definiteness.INDEFINITE


def classify_eigen(a: SymMatrix, tol: float = DEFAULT_TOL) -> Definiteness:
    if tol <= 0:
        raise ValueError("tol must be positive")
    return classify_eigenvalues(eigenvalues(a), a.max_abs(), tol)


_CODES = [
    Definiteness.POSITIVE_DEFINITE,
    Definiteness.NEGATIVE_DEFINITE,
    Definiteness.ZERO,
    Definiteness.POSITIVE_SEMIDEFINITE,
    Definiteness.NEGATIVE_SEMIDEFINITE,
    Definiteness.INDEFINITE,
]


def classify_batch(stack: np.ndarray, tol: float = DEFAULT_TOL):
    """Classify every matrix of a (m, n, n) stack.

    Same rules as :func:`classify_eigenvalues`, vectorized.  Returns
    ``(classes, eigenvalues)`` with eigenvalues of shape (m, n).
    """
    stack = np.asarray(stack, dtype=float)
    lam = eigenvalues_batch(stack)
    eps = tol * np.maximum(1.0, np.max(np.abs(stack), axis=(-2, -1)))
    lo, hi = lam[:, 0], lam[:, -1]
    code = np.select(
        [lo > eps, hi < -eps, (lo >= -eps) & (hi <= eps), lo >= -eps, hi <= eps],
        [0, 1, 2, 3, 4],
        default=5,
    )
    return [_CODES[c] for c in code], lam
