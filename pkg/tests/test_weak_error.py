import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specweak.errors import InvalidInput, InvalidSmoothness, QuadratureUnderResolved
from specweak.filters import FilterFunction
from specweak.kernels import KernelModel
from specweak.operators import OperatorConstants
from specweak.regularization import GramSystem, SpectralSolution, solve
from specweak.weak_error import (TestFunctionalA1, TestFunctionalAdjoint, a1_weights, adjoint_weights,
                                 bound_a1, bound_adjoint, functional_from_json, optimal_lambda,
                                 pair_a1, pair_adjoint, theoretical_rate)

BROWNIAN = KernelModel.brownian()
TIK = FilterFunction.tikhonov()
UNIT = OperatorConstants(1.0, 1.0, 1.0)


def g_line(x):
    return np.asarray(x, dtype=float)


def exact_line_solution():
    # K(., 1) = x reproduces g exactly
    return SpectralSolution(GramSystem(BROWNIAN, [1.0]), np.array([1.0]), 1.0, TIK)


def zero_solution():
    return SpectralSolution(GramSystem(BROWNIAN, [0.5]), np.array([0.0]), 1.0, TIK)


def random_solution(seed, n=30):
    rng = np.random.default_rng(seed)
    x = np.unique(rng.random(n))
    y = np.sin(3 * x) + 0.1 * rng.standard_normal(x.size)
    return solve(BROWNIAN, x, y, TIK, float(10 ** rng.uniform(-5, -1)))


def g_sin(x):
    return np.sin(3 * np.asarray(x, dtype=float))


def test_pair_a1_examples():
    chi = TestFunctionalA1.indicator(0.2, 0.7)
    assert chi.a1_seminorm == 2
    assert pair_a1(chi, exact_line_solution(), g_line) == pytest.approx(0.0, abs=1e-15)
    # g_hat = 0 leaves -<psi, f> = -(g(0.7) - g(0.2))
    assert pair_a1(chi, zero_solution(), g_line) == pytest.approx(-0.5)
    s = solve(BROWNIAN, [0.4], [0.3], TIK, 0.1)
    single = TestFunctionalA1([0.4], [1.0])
    assert pair_a1(single, s, g_line) == s.evaluate_g([0.4])[0] - 0.4


def test_pair_adjoint_examples():
    psi = TestFunctionalAdjoint.smoothed_indicator(0.2, 0.7, 0.1)
    assert psi.c_psi == pytest.approx(math.sqrt(20))
    assert psi.quadrature_norm() == pytest.approx(psi.c_psi, rel=1e-8)
    assert pair_adjoint(psi, exact_line_solution(), g_line) == pytest.approx(0.0, abs=1e-14)
    # <psi0, x> = b - a + eps
    assert pair_adjoint(psi, zero_solution(), g_line) == pytest.approx(-0.6, rel=1e-13)


def test_dualities_on_random_instances():
    chi = TestFunctionalA1.indicator(0.2, 0.7)
    psi = TestFunctionalAdjoint.smoothed_indicator(0.2, 0.7, 0.1)
    grid = np.union1d(np.linspace(0, 1, 501), chi.nodes)
    for seed in range(20):
        s = random_solution(seed)
        e_grid = s.evaluate_g(grid) - g_sin(grid)
        p1 = pair_a1(chi, s, g_sin)
        assert abs(p1) <= chi.a1_seminorm * np.max(np.abs(e_grid)) * (1 + 1e-12)
        # chi-consistency: exactly (g_hat - g)(b) - (g_hat - g)(a)
        ea, eb = s.evaluate_g(chi.nodes) - g_sin(chi.nodes)
        assert p1 == eb - ea
        t, w = psi.quadrature(s.nodes[:, 0])
        e = s.evaluate_g(t) - g_sin(t)
        pa = pair_adjoint(psi, s, g_sin)
        assert abs(pa) <= math.sqrt(w @ psi.psi0(t) ** 2) * math.sqrt(w @ e ** 2) * (1 + 1e-12)


def test_batched_weights_match_pairings():
    chi = TestFunctionalA1.indicator(0.2, 0.7)
    psi = TestFunctionalAdjoint.smoothed_indicator(0.2, 0.7, 0.1)
    s = random_solution(3)
    w, c = adjoint_weights(psi, s.system, g_sin)
    assert w @ s.coefficients - c == pytest.approx(pair_adjoint(psi, s, g_sin), abs=1e-13)
    w, c = a1_weights(chi, s.system, g_sin)
    assert w @ s.coefficients - c == pytest.approx(pair_a1(chi, s, g_sin), abs=1e-13)


def test_adjoint_tends_to_a1_as_eps_shrinks():
    chi = TestFunctionalA1.indicator(0.3, 0.6)
    s = random_solution(5)
    target = pair_a1(chi, s, g_sin)
    gaps = []
    for eps in (1e-2, 1e-3, 1e-4):
        psi = TestFunctionalAdjoint.smoothed_indicator(0.3, 0.6, eps)
        gaps.append(abs(pair_adjoint(psi, s, g_sin) - target))
    assert gaps[-1] < 1e-3 and gaps[2] < gaps[0]


def test_under_resolved_quadrature_detected():
    k = KernelModel.gaussian(scale=0.002)
    x = np.linspace(0.05, 0.95, 40)
    s = solve(k, x, np.cos(40 * x), TIK, 1e-8)
    psi = TestFunctionalAdjoint.smoothed_indicator(0.2, 0.7, 0.1, panels=2, order=4)
    with pytest.raises(QuadratureUnderResolved):
        pair_adjoint(psi, s, lambda t: np.zeros_like(t))


def test_functional_json():
    chi = functional_from_json({"class": "a1", "nodes": [0.2, 0.7], "weights": [-1, 1]})
    assert chi.a1_seminorm == 2
    psi = functional_from_json({"class": "adjoint", "psi0": "smoothed-indicator", "a": 0.2, "b": 0.7, "eps": 0.1})
    assert functional_from_json(psi.to_json()).c_psi == psi.c_psi
    assert functional_from_json(chi.to_json()).a1_seminorm == 2
    with pytest.raises(InvalidInput):
        functional_from_json({"class": "adjoint", "psi0": "other"})
    with pytest.raises(InvalidInput):
        TestFunctionalAdjoint.smoothed_indicator(0.05, 0.7, 0.1)


def test_bound_examples():
    assert bound_adjoint(1, 1, 0.01, 1, 1, 0.01, 0.0, 10, UNIT, 1.0) == pytest.approx(0.02)
    assert bound_a1(1, 1, 0.04, 1, 1, 0.0016, 0.0, 10, UNIT, 1.0) == pytest.approx(0.24)
    # h -> 0 leaves the sqrt(lam) floor plus the variance term
    c = OperatorConstants(2 / math.pi, 1.0, 0.5)
    v = bound_a1(2, 1, 1e-12, 1, 1, 0.01, 0.1, 100, c, 1.0)
    assert v == pytest.approx(2 * (0.1 + 1.0 * 0.1 / 10 / 0.01), rel=1e-5)
    with pytest.raises(InvalidSmoothness):
        bound_adjoint(1, 1, 0.01, 0.5, 1, 0.01, 0.0, 10, UNIT, 1.0)
    with pytest.raises(InvalidSmoothness):
        bound_a1(1, 1, 0.01, 1, 2, 0.01, 0.0, 10, UNIT, 1.0)


def test_bound_noise_terms():
    c = OperatorConstants(0.7, 0.9, 0.4)
    base = bound_adjoint(2, 1, 0.01, 1, 1, 0.01, 0.0, 100, c, 1.0)
    full = bound_adjoint(2, 1, 0.01, 1, 1, 0.01, 0.1, 100, c, 1.0)
    assert full - base == pytest.approx(2 * 0.7 * math.sqrt(0.9) * 0.1 / 10 / 0.01)
    t1 = bound_adjoint(2, 1, 0.01, 1, 1, 0.01, 0.1, 100, c, 1.0, trace_class=True) - base
    t2 = bound_adjoint(2, 1, 0.01, 1, 1, 0.01, 0.1, 200, c, 1.0, trace_class=True) - base
    assert t2 == pytest.approx(t1 / 2)
    assert t1 == pytest.approx(2 * 0.7 * 0.1 / 100 / 0.01 * 0.4)
    a = bound_a1(1, 1, 0.01, 1, 1, 0.01, 0.1, 100, c, 2.0) - bound_a1(1, 1, 0.01, 1, 1, 0.01, 0.0, 100, c, 2.0)
    assert a == pytest.approx(0.9 * 0.1 / 10 * 2.0 / 0.01)


def test_optimal_lambda_examples():
    assert optimal_lambda("a1", True, 1000, 0.1, 0.5) == pytest.approx(2.1544e-3, rel=1e-4)
    assert optimal_lambda("adjoint", False, 100, 0.1, 1e-4) == pytest.approx(1.0)
    assert optimal_lambda("a1", False, 8, 1.0, 0.1) == pytest.approx(0.5)
    with pytest.raises(InvalidInput):
        optimal_lambda("a1", False, 0, 1.0, 0.1)
    with pytest.raises(InvalidInput):
        optimal_lambda("other", False, 10, 1.0, 0.1)


def test_theoretical_rates():
    assert theoretical_rate("adjoint", True, 1, 1) == (pytest.approx(2 / 3), pytest.approx(1 / 3))
    assert theoretical_rate("a1", True, 1, 1) == (pytest.approx(1 / 3), pytest.approx(2 / 3))
    assert theoretical_rate("adjoint", False, 10, 1).error == 0.5
    assert theoretical_rate("adjoint", False, 10, 1).lam == 0.0
    assert theoretical_rate("a1", False, 10, 1) == (pytest.approx(1 / 6), pytest.approx(1 / 3))
    with pytest.raises(InvalidSmoothness):
        theoretical_rate("a1", True, 0.5, 1)


@pytest.mark.parametrize("rule", ["adjoint", "a1"])
@pytest.mark.parametrize("trace", [False, True])
def test_formula_lambda_is_near_minimizer(rule, trace):
    # With every constant equal to 1 the bound is const + A sqrt(lam) + B / lam
    # and the formula lambda is the exact minimizer up to the factor 2^(-2/3),
    # which costs at most (2^(-1/3) + 2^(-1/3)) / 1.5 - 1 < 6% in the bound.
    n, nu, h = 1000, 0.1, 0.5 ** 10
    lam0 = optimal_lambda(rule, trace, n, nu, h)
    if rule == "adjoint":
        def b(lam):
            return bound_adjoint(1, 1, h, 1, 1, lam, nu, n, UNIT, 1.0, trace)
    else:
        def b(lam):
            return bound_a1(1, 1, h, 1, 1, lam, nu, n, UNIT, 1.0, trace)
    grid = lam0 * np.geomspace(0.1, 10, 2001)
    best = min(b(v) for v in grid)
    assert b(lam0) <= 1.06 * best


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_property_l1_duality(seed):
    rng = np.random.default_rng(seed)
    s = random_solution(seed, n=20)
    z = np.unique(rng.random(4))
    psi = TestFunctionalA1(z, rng.standard_normal(z.size))
    e = s.evaluate_g(z) - g_sin(z)
    assert abs(pair_a1(psi, s, g_sin)) <= psi.a1_seminorm * np.max(np.abs(e)) * (1 + 1e-12)
