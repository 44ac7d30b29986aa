import json
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from jensen_cert import corpus
from jensen_cert.symmat import Definiteness as D
from jensen_cert.symmat import SymMatrix, classify_eigen

IDS = ["norm3", "ex1", "ex2", "ex3", "ex4", "ex5"]

# Right-hand sides typed out independently, evaluated exactly by sympy.
S = sp.Symbol("S", positive=True)
X, Y = sp.symbols("X Y", positive=True)
RHS_ORACLE = {
    "ex1": lambda c: 3 ** (2 * c - sp.Rational(3, 2)) / 2 ** c * S ** (sp.Rational(5, 2) - 2 * c),
    "ex2": lambda: sp.sqrt(3) / 2 ** sp.Rational(1, 4) * sp.sqrt(S),
    "ex3": lambda: 9 * sp.sqrt(3) / (2 ** sp.Rational(1, 4) * S ** sp.Rational(3, 2)),
    "ex5": lambda: S / 2,
}


def _sym_f(entry, params):
    syms = sp.symbols(" ".join(entry.variables), positive=True)
    env = dict(zip(entry.variables, syms))
    env.update({k: sp.nsimplify(v) for k, v in params.items()})
    return syms, sp.sympify(entry.formula.replace("^", "**"), locals=env)


# ------------------------------------------------------------------ catalogue

def test_six_families():
    assert [e.id for e in corpus.list_entries()] == IDS


def test_unknown_entry_and_param():
    with pytest.raises(KeyError):
        corpus.get_entry("ex9")
    with pytest.raises(KeyError):
        corpus.get_entry("ex1").resolve_params({"d": 1.0})


@pytest.mark.parametrize("eid", IDS)
def test_formula_evaluates_at_reference_point(eid):
    e = corpus.get_entry(eid)
    assert np.isfinite(e.function().at(np.ones(e.arity)))


def test_manifest_is_json_and_complete():
    m = json.loads(json.dumps(corpus.manifest()))
    assert [x["id"] for x in m] == IDS
    for x in m:
        assert {"id", "formula", "domain", "shape", "expected_class", "rhs", "direction"} <= set(x)
    assert {x["id"]: x["direction"] for x in m} == {
        "norm3": ">=", "ex1": ">=", "ex2": "<=", "ex3": ">=", "ex4": "<=", "ex5": ">="}


def test_ex1_parameter_range():
    e = corpus.get_entry("ex1")
    assert e.asserted({"c": -2}) and e.asserted({"c": -1.1})
    assert not e.asserted({"c": -1}) and not e.asserted({"c": 0.5})


# ------------------------------------------------------------- sharp constants

def test_ex5_equality_by_hand():
    t = corpus.symmetric_triple(corpus.get_entry("ex5"), 1.0)
    assert corpus.lhs_values(corpus.get_entry("ex5").function(), t)[0] == 1.5
    assert corpus.get_entry("ex5").rhs_values(t)[0] == 1.5


def test_ex1_equality_at_ones_is_twelve():
    e = corpus.get_entry("ex1")
    t = corpus.symmetric_triple(e, 1.0)
    # f(1,1) = 1 / 2^c = 4 for c = -2;  rhs = 3^(2c-3/2)/2^c * 3^(5/2-2c) = 3 * 4
    assert Fraction(3) * Fraction(1, 2) ** -2 == 12
    assert corpus.lhs_values(e.function({"c": -2}), t)[0] == pytest.approx(12, rel=1e-15)
    assert e.rhs_values(t, {"c": -2})[0] == pytest.approx(12, rel=1e-15)


@pytest.mark.parametrize("eid, params", [("ex1", {"c": -2}), ("ex1", {"c": -1.5}), ("ex2", {}), ("ex3", {}), ("ex5", {})])
def test_rhs_matches_exact_oracle(eid, params):
    e = corpus.get_entry(eid)
    oracle = RHS_ORACLE[eid](*(sp.nsimplify(v) for v in params.values()))
    for s in (0.03, 1.0, 3.0, 250.0):
        t = np.array([[[s / 3, 0.0], [s / 3, 0.0], [s / 3, 0.0]]])
        exact = float(oracle.subs(S, sp.nsimplify(s)).evalf(30))
        assert e.rhs_values(t, params)[0] == pytest.approx(exact, rel=1e-14)


@pytest.mark.parametrize("eid", IDS)
@pytest.mark.parametrize("v", corpus.EQUALITY_POINTS)
def test_equality_at_symmetric_point_against_exact_lhs(eid, v):
    e = corpus.get_entry(eid)
    params = e.resolve_params(None)
    syms, fx = _sym_f(e, params)
    vv = sp.nsimplify(v)
    exact_lhs = 3 * fx.subs({s: vv for s in syms})
    t = corpus.symmetric_triple(e, v)
    rhs = e.rhs_values(t, params)[0]
    assert abs(float(exact_lhs.evalf(30)) - rhs) <= 1e-10 * (1 + abs(rhs))


# ------------------------------------------------------------------- margins

@pytest.mark.parametrize("eid", IDS)
def test_inequality_holds_on_samples(eid):
    r = corpus.verify_entry(eid, n_samples=3000, seed=5)
    assert r.passed, r.violations
    assert r.min_margin >= -1e-9
    assert len(r.argmin) == 3


def test_report_is_deterministic_and_thread_independent():
    a = corpus.verify_entry("ex3", n_samples=5000, seed=9, threads=1).to_dict()
    b = corpus.verify_entry("ex3", n_samples=5000, seed=9, threads=3).to_dict()
    assert a == b
    assert corpus.verify_entry("ex3", n_samples=5000, seed=10).to_dict() != a


positive = st.floats(0, 1e3, allow_nan=False)


@given(st.lists(positive, min_size=9, max_size=9))
def test_norm_triangle_inequality(v):
    e = corpus.get_entry("norm3")
    t = np.array(v).reshape(1, 3, 3)
    lhs = np.linalg.norm(t[0], axis=1).sum()
    assert lhs - e.rhs_values(t)[0] >= -1e-12 * (1 + lhs)


def test_samples_are_log_uniform_in_range():
    e = corpus.get_entry("ex2")
    t = corpus.sample_triples(e, 20000, corpus.entry_rng("ex2", 1))
    logs = np.log10(t[:, :, 0].ravel())
    assert logs.min() >= -2 and logs.max() <= 2
    assert abs(np.mean(logs)) < 0.05


def test_rejects_zero_samples():
    with pytest.raises(ValueError):
        corpus.verify_entry("ex5", n_samples=0)


# ---------------------------------------------------------------- signatures

@pytest.mark.parametrize("eid", ["norm3", "ex2", "ex3", "ex4", "ex5"])
def test_signature_holds(eid):
    r = corpus.verify_hessian_signature(eid, n_samples=3000, seed=4)
    assert r.passed, (r.class_counts, r.worst_point)


def test_ex4_signature_details():
    r = corpus.verify_hessian_signature("ex4", n_samples=3000)
    assert r.mu_range[1] <= 1e-9
    assert r.max_abs_det <= 1e-9


def test_ex5_determinant_vanishes():
    assert corpus.verify_hessian_signature("ex5", n_samples=3000).max_abs_det <= 1e-9


@pytest.mark.parametrize("c", [-1.1, -1.5, -2.0, -3.0])
def test_ex1_signature_is_indefinite_somewhere(c):
    """The claimed mu >= 0, lambda >= 0 does not hold on the whole quadrant.

    The sampled witness is confirmed with an exact symbolic Hessian.
    """
    r = corpus.verify_hessian_signature("ex1", {"c": c}, n_samples=2000, seed=1)
    assert not r.passed
    e = corpus.get_entry("ex1")
    syms, fx = _sym_f(e, {"c": c})
    H = sp.hessian(fx, syms).subs(dict(zip(syms, map(sp.nsimplify, r.worst_point))))
    assert sp.N(H.det(), 30) < 0
    h = np.array(sp.N(H, 30).tolist(), dtype=float)
    assert classify_eigen(SymMatrix.from_array(h, atol=1e-9)) is D.INDEFINITE


def test_ex1_inequality_survives_indefinite_hessian():
    for c in (-1.1, -1.5, -2.0, -3.0):
        assert corpus.verify_entry("ex1", {"c": c}, n_samples=3000).passed


@pytest.mark.parametrize("c", [-0.5, 0.0])
def test_ex1_outside_range_is_recorded_not_asserted(c):
    r = corpus.verify_hessian_signature("ex1", {"c": c}, n_samples=1000)
    assert r.asserted is False
    assert sum(r.class_counts.values()) == 1000


# -------------------------------------------------------------- mixed signs

def test_ex5_mixed_sign_sampling():
    r = corpus.verify_entry("ex5", n_samples=20000, mixed_signs=True)
    info = r.mixed_signs
    assert info["positive_branch"] + info["negative_branch"] + info["crossing"] == info["n_kept"]
    assert r.n_violations == 0
    # f(-x, -y) = -f(x, y) and the rhs is odd too, so the negative branch flips the inequality
    assert info["negative_branch"] > 0
    assert info["negative_branch_reversed"] >= 0.9 * info["negative_branch"]


def test_mixed_signs_only_for_ex5():
    with pytest.raises(ValueError):
        corpus.verify_entry("ex2", mixed_signs=True)
