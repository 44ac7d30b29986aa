"""Hyper-dual numbers and exact Hessians.

A hyper-dual number ``a + b e1 + c e2 + d e1e2`` with ``e1**2 = e2**2 = 0``
carries, after evaluating f at ``x + e1 u + e2 v``, the value f(x), the two
directional derivatives and the mixed second derivative ``u^T H v`` with no
truncation error.  Components may be floats or numpy arrays of a common shape,
which lets one pass evaluate the same derivative at many points at once.

A central finite-difference Hessian is kept alongside as an independent check.
"""
from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .symmat import SymMatrix

DEFAULT_FD_STEP = 1e-4


def _any(mask) -> bool:
    return bool(np.any(mask))


class HyperDual:
    __slots__ = ("re", "e1", "e2", "e12")
    # make ndarray <op> HyperDual defer to our reflected operators
    __array_ufunc__ = None

    def __init__(self, re, e1=0.0, e2=0.0, e12=0.0):
        self.re = re
        self.e1 = e1
        self.e2 = e2
        self.e12 = e12

    @classmethod
    def const(cls, value):
        return cls(value, 0.0, 0.0, 0.0)

    def __repr__(self):
        return f"HyperDual({self.re!r}, {self.e1!r}, {self.e2!r}, {self.e12!r})"

    def astuple(self):
        return (self.re, self.e1, self.e2, self.e12)

    def chain(self, g, dg, d2g):
        """Apply a scalar function given its value and first two derivatives at ``re``."""
        return HyperDual(g, dg * self.e1, dg * self.e2, dg * self.e12 + d2g * self.e1 * self.e2)

    def __neg__(self):
        return HyperDual(-self.re, -self.e1, -self.e2, -self.e12)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.re + other.re, self.e1 + other.e1, self.e2 + other.e2, self.e12 + other.e12)
        return HyperDual(self.re + other, self.e1, self.e2, self.e12)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(self.re - other.re, self.e1 - other.e1, self.e2 - other.e2, self.e12 - other.e12)
        return HyperDual(self.re - other, self.e1, self.e2, self.e12)

    def __rsub__(self, other):
        return HyperDual(other - self.re, -self.e1, -self.e2, -self.e12)

    def __mul__(self, other):
        if isinstance(other, HyperDual):
            return HyperDual(
                self.re * other.re,
                self.re * other.e1 + self.e1 * other.re,
                self.re * other.e2 + self.e2 * other.re,
                self.re * other.e12 + self.e1 * other.e2 + self.e2 * other.e1 + self.e12 * other.re,
            )
        return HyperDual(self.re * other, self.e1 * other, self.e2 * other, self.e12 * other)

    __rmul__ = __mul__

    def reciprocal(self):
        if _any(self.re == 0):
            raise DomainError("division by zero")
        inv = 1.0 / self.re
        return self.chain(inv, -inv * inv, 2.0 * inv * inv * inv)

    def __truediv__(self, other):
        if isinstance(other, HyperDual):
            return self * other.reciprocal()
        if _any(np.asarray(other) == 0):
            raise DomainError("division by zero")
        return self * (1.0 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k):
        if isinstance(k, numbers.Integral):
            return int_power(self, int(k))
        return real_power(self, k)


def real_part(u):
    return u.re if isinstance(u, HyperDual) else u


def int_power(u, k: int):
    """u**k by repeated squaring; valid for any real base (negative k needs u != 0)."""
    if k < 0:
        if _any(np.asarray(real_part(u)) == 0):
            raise DomainError("zero raised to a negative power")
        return 1.0 / int_power(u, -k) if not isinstance(u, HyperDual) else int_power(u, -k).reciprocal()
    result = 1.0
    base = u
    first = True
    while k:
        if k & 1:
            result = base if first else result * base
            first = False
        k >>= 1
        if k:
            base = base * base
    return result


def sqrt(u):
    re = real_part(u)
    if isinstance(u, HyperDual):
        # derivative blows up at 0
        if _any(np.asarray(re) <= 0):
            raise DomainError("sqrt of a non-positive argument")
        r = np.sqrt(re)
        return u.chain(r, 0.5 / r, -0.25 / (r * re))
    if _any(np.asarray(re) < 0):
        raise DomainError("sqrt of a negative argument")
    return np.sqrt(u)


def exp(u):
    if isinstance(u, HyperDual):
        e = np.exp(u.re)
        return u.chain(e, e, e)
    return np.exp(u)


def log(u):
    re = real_part(u)
    if _any(np.asarray(re) <= 0):
        raise DomainError("ln of a non-positive argument")
    if isinstance(u, HyperDual):
        return u.chain(np.log(re), 1.0 / re, -1.0 / (re * re))
    return np.log(u)


def real_power(u, c):
    """u**c for u > 0, computed as exp(c ln u)."""
    if _any(np.asarray(real_part(u)) <= 0):
        raise DomainError("non-integer power of a non-positive base")
    return exp(c * log(u))


@dataclass(frozen=True)
class ScalarFn:
    """A function of 2 or 3 real variables, evaluable over floats, arrays and HyperDual.

    ``body`` receives one positional argument per variable.
    """

    arity: int
    body: Callable = field(compare=False)
    name: str = ""
    variables: tuple = ()
    source: Optional[str] = None

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError("arity must be positive")
        if not self.variables:
            object.__setattr__(self, "variables", tuple(f"x{i + 1}" for i in range(self.arity)))

    def __call__(self, *args):
        if len(args) != self.arity:
            raise TypeError(f"{self.name or 'function'} takes {self.arity} arguments, got {len(args)}")
        return self.body(*args)

    def at(self, x):
        """Evaluate at one point, or at each row of an (m, arity) array."""
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            val = self(*[x[..., i] for i in range(self.arity)])
        if not np.all(np.isfinite(val)):
            raise DomainError("non-finite function value", point=x if x.ndim == 1 else None)
        return val


def _columns(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return [float(v) for v in x]
    return [x[:, i] for i in range(x.shape[1])]


def hd_eval(f: ScalarFn, x, i: int, j: int) -> HyperDual:
    """Evaluate f at x seeded along axes i (e1) and j (e2).

    ``x`` may be one point or an (m, arity) array of points.
    """
    if not (0 <= i < f.arity and 0 <= j < f.arity):
        raise IndexError(f"axis out of range for arity {f.arity}")
    cols = _columns(x)
    if len(cols) != f.arity:
        raise ValueError(f"point has {len(cols)} coordinates, function takes {f.arity}")
    args = []
    for k, v in enumerate(cols):
        args.append(HyperDual(v, 1.0 if k == i else 0.0, 1.0 if k == j else 0.0, 0.0))
    with np.errstate(all="ignore"):
        out = f(*args)
    if not isinstance(out, HyperDual):
        out = HyperDual.const(out)
    vals = [np.broadcast_to(np.asarray(c, dtype=float), np.shape(cols[0])) for c in out.astuple()]
    if not all(np.all(np.isfinite(c)) for c in vals):
        raise DomainError("non-finite value or derivative")
    if np.ndim(cols[0]) == 0:
        return HyperDual(*(float(c) for c in vals))
    return HyperDual(*vals)


def hessian_array(f: ScalarFn, x) -> np.ndarray:
    """Hessian at one point (shape (n, n)) or at m points (shape (m, n, n))."""
    x = np.asarray(x, dtype=float)
    n = f.arity
    single = x.ndim == 1
    pts = x[None] if single else x
    h = np.empty((pts.shape[0], n, n))
    for i in range(n):
        for j in range(i, n):
            d = hd_eval(f, pts, i, j).e12
            h[:, i, j] = d
            h[:, j, i] = d
    return h[0] if single else h


def hessian(f: ScalarFn, x) -> SymMatrix:
    h = hessian_array(f, np.asarray(x, dtype=float))
    n = f.arity
    return SymMatrix(n, tuple(h[i, k] for i in range(n) for k in range(i, n)))


def gradient(f: ScalarFn, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.array([hd_eval(f, x, i, i).e1 for i in range(f.arity)]).T


def value_gradient_hessian(f: ScalarFn, x):
    """Value, gradient and Hessian at one point from the n(n+1)/2 passes."""
    x = np.asarray(x, dtype=float)
    n = f.arity
    grad = np.empty(n)
    h = np.empty((n, n))
    value = None
    for i in range(n):
        for j in range(i, n):
            r = hd_eval(f, x, i, j)
            if i == j:
                grad[i] = r.e1
                value = r.re
            h[i, j] = h[j, i] = r.e12
    return value, grad, SymMatrix(n, tuple(h[i, k] for i in range(n) for k in range(i, n)))


def fd_hessian(f: ScalarFn, x, h: float = DEFAULT_FD_STEP) -> SymMatrix:
    """Central-difference Hessian; an oracle independent of the hyper-dual path."""
    if h <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    n = f.arity

    def ev(p):
        return float(f.at(p))

    f0 = ev(x)
    e = np.eye(n) * h
    out = np.empty((n, n))
    for i in range(n):
        out[i, i] = (ev(x + e[i]) - 2.0 * f0 + ev(x - e[i])) / (h * h)
        for k in range(i + 1, n):
            v = (ev(x + e[i] + e[k]) - ev(x + e[i] - e[k]) - ev(x - e[i] + e[k]) + ev(x - e[i] - e[k])) / (4.0 * h * h)
            out[i, k] = out[k, i] = v
    out = 0.5 * (out + out.T)
    return SymMatrix.from_array(out)
