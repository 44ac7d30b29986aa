import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from jensen_cert import corpus
from jensen_cert.autodiff import (
    HyperDual,
    ScalarFn,
    fd_hessian,
    gradient,
    hd_eval,
    hessian,
    hessian_array,
    value_gradient_hessian,
)
from jensen_cert.errors import DomainError
from jensen_cert.expr import function
from jensen_cert.symmat import leading_principal_minors

finite = st.floats(-1e3, 1e3, allow_nan=False)
hyperduals = st.builds(HyperDual, finite, finite, finite, finite)


def close(a: HyperDual, b: HyperDual, rel=1e-9):
    scale = 1.0 + max(abs(v) for v in a.astuple() + b.astuple())
    return all(abs(x - y) <= rel * scale for x, y in zip(a.astuple(), b.astuple()))


# ------------------------------------------------------------------ algebra

@given(hyperduals, hyperduals, hyperduals)
def test_multiplication_is_associative_and_distributive(a, b, c):
    assert close((a * b) * c, a * (b * c), rel=1e-6)
    assert close(a * (b + c), a * b + a * c, rel=1e-9)


@given(hyperduals, st.floats(0.5, 10))
def test_division_inverts_multiplication(a, r):
    b = HyperDual(r, 0.3, -0.2, 0.1)
    assert close((a * b) / b, a, rel=1e-9)


def test_numpy_arrays_defer_to_hyperdual():
    h = HyperDual(2.0, 1.0, 0.0, 0.0)
    out = np.array([1.0, 2.0]) * h
    assert isinstance(out, HyperDual)
    np.testing.assert_array_equal(out.re, [2.0, 4.0])


def test_integer_power_on_negative_base():
    h = HyperDual(-2.0, 1.0, 1.0, 0.0) ** 3
    assert h.astuple() == (-8.0, 12.0, 12.0, -12.0)


def test_fractional_power_needs_positive_base():
    with pytest.raises(DomainError):
        HyperDual(-1.0, 1.0, 1.0, 0.0) ** 0.5


# ------------------------------------------------------------ hd_eval examples

def test_hd_eval_bilinear():
    f = ScalarFn(2, lambda a, b: a * b)
    assert hd_eval(f, (3.0, 5.0), 0, 1).astuple() == (15.0, 5.0, 3.0, 1.0)


def test_hd_eval_square():
    f = ScalarFn(1, lambda a: a * a)
    assert hd_eval(f, (4.0,), 0, 0).astuple() == (16.0, 8.0, 8.0, 2.0)


def test_hd_eval_norm_diagonal():
    f = function("sqrt(x1^2 + x2^2 + x3^2)", ["x1", "x2", "x3"])
    # (x2^2 + x3^2) / r^3 at (0, 0, 1)
    assert hd_eval(f, (0.0, 0.0, 1.0), 0, 0).e12 == pytest.approx(1.0, abs=1e-15)


def test_hd_eval_vectorized_matches_pointwise(rng):
    f = function("x^2/(x+y)", ["x", "y"])
    pts = rng.uniform(0.1, 5, size=(20, 2))
    batch = hd_eval(f, pts, 0, 1)
    for k, p in enumerate(pts):
        assert batch.e12[k] == hd_eval(f, p, 0, 1).e12


def test_hd_eval_rejects_nonfinite():
    f = function("1/x", ["x"])
    with pytest.raises(DomainError):
        hd_eval(f, (0.0,), 0, 0)


# ----------------------------------------------------------- hessian examples

def test_hessian_quadratic_is_twice_identity(rng):
    f = function("x1^2 + x2^2 + x3^2", ["x1", "x2", "x3"])
    for p in rng.normal(size=(5, 3)):
        np.testing.assert_array_equal(hessian(f, p).to_array(), 2 * np.eye(3))


def test_hessian_ex5_by_hand():
    h = hessian(function("x^2/(x+y)", ["x", "y"]), (1.0, 1.0))
    assert (h[0, 0], h[0, 1], h[1, 1]) == pytest.approx((0.25, -0.25, 0.25), abs=1e-15)


def test_hessian_norm_minors():
    h = hessian(function("sqrt(x1^2 + x2^2 + x3^2)", ["x1", "x2", "x3"]), (1.0, 1.0, 1.0))
    d = leading_principal_minors(h)
    assert d[1] == pytest.approx(1 / 9, abs=1e-14)
    assert abs(d[2]) < 1e-14


def test_hessian_is_exactly_symmetric(rng):
    f = function("exp(x*y) * ln(1 + x^2) / (1 + y^2)", ["x", "y"])
    for p in rng.normal(size=(10, 2)):
        a = hessian_array(f, p)
        assert np.array_equal(a, a.T)


def test_quadratic_hessian_constant_across_points(rng):
    f = function("3*x^2 - 2*x*y + 0.5*y^2 + 7*x - y + 4", ["x", "y"])
    ref = hessian_array(f, np.zeros(2))
    h = hessian_array(f, rng.uniform(-100, 100, size=(200, 2)))
    assert np.max(np.abs(h - ref)) <= 1e-12


# ---------------------------------------------------------- gradient examples

@pytest.mark.parametrize(
    "text, variables, point, expected",
    [
        ("x1 + 2*x2", ["x1", "x2"], (7.0, -3.0), (1.0, 2.0)),
        ("x1*x2*x3", ["x1", "x2", "x3"], (1.0, 2.0, 3.0), (6.0, 3.0, 2.0)),
        ("sqrt(x*x + y*y)", ["x", "y"], (3.0, 4.0), (0.6, 0.8)),
    ],
)
def test_gradient_examples(text, variables, point, expected):
    np.testing.assert_allclose(gradient(function(text, variables), point), expected, atol=1e-15)


def test_value_gradient_hessian_consistent():
    f = function("x^3*y + y^2", ["x", "y"])
    v, g, h = value_gradient_hessian(f, (2.0, 3.0))
    assert v == 33.0
    np.testing.assert_array_equal(g, [36.0, 14.0])
    np.testing.assert_array_equal(h.to_array(), [[36.0, 12.0], [12.0, 2.0]])


# ---------------------------------------------------------------- fd oracle

def test_fd_examples():
    assert fd_hessian(function("x^2", ["x"]), (1.0,))[0, 0] == pytest.approx(2.0, abs=1e-6)
    assert fd_hessian(function("x1*x2", ["x1", "x2"]), (2.0, 3.0))[0, 1] == pytest.approx(1.0, abs=1e-6)


def test_fd_agrees_on_ex4():
    f = function("x*y/sqrt(x^2+y^2)", ["x", "y"])
    a, b = hessian(f, (1.0, 2.0)).to_array(), fd_hessian(f, (1.0, 2.0)).to_array()
    assert np.max(np.abs(a - b)) <= 1e-5


def test_fd_rejects_bad_step():
    with pytest.raises(ValueError):
        fd_hessian(function("x^2", ["x"]), (1.0,), h=0.0)


# ------------------------------------------------------- symbolic cross-check

def _sympy_hessian(entry, params):
    syms = sp.symbols(" ".join(entry.variables), positive=True)
    env = dict(zip(entry.variables, syms))
    env.update({k: sp.nsimplify(v) for k, v in params.items()})
    env["ln"] = sp.log
    expr = sp.sympify(entry.formula.replace("^", "**"), locals=env)
    return syms, sp.hessian(expr, syms)


@pytest.mark.parametrize("entry", corpus.list_entries(), ids=lambda e: e.id)
def test_hessian_matches_symbolic(entry, rng):
    params = entry.resolve_params(None)
    syms, H = _sympy_hessian(entry, params)
    num = sp.lambdify(syms, H, "numpy")
    f = entry.function(params)
    for p in np.exp(rng.uniform(np.log(0.1), np.log(10.0), size=(10, entry.arity))):
        expected = np.array(num(*p), dtype=float)
        got = hessian_array(f, p)
        np.testing.assert_allclose(got, expected, rtol=1e-10, atol=1e-10 * (1 + np.abs(expected).max()))


# -------------------------------------------------------------- Taylor order

@pytest.mark.parametrize("entry", corpus.list_entries(), ids=lambda e: e.id)
def test_second_order_taylor_remainder_is_cubic(entry, rng):
    f = entry.function(entry.resolve_params(None))
    slopes = []
    for _ in range(5):
        g = np.exp(rng.uniform(np.log(0.5), np.log(2.0), size=entry.arity))
        d = rng.normal(size=entry.arity)
        d /= np.linalg.norm(d)
        v, grad, h = value_gradient_hessian(f, g)
        H = h.to_array()
        deltas = np.logspace(-3, -1.5, 6)
        rem = [abs(float(f.at(g + t * d)) - v - t * grad @ d - 0.5 * t * t * d @ H @ d) for t in deltas]
        slopes.append(np.polyfit(np.log(deltas), np.log(rem), 1)[0])
    assert min(slopes) >= 2.7
