import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specweak.errors import DimensionMismatch, InvalidLambda
from specweak.filters import FilterFunction
from specweak.geometry import PointSet
from specweak.kernels import KernelModel
from specweak.regularization import (GramSystem, NoiseModel, add_noise, discrete_residual_norm,
                                     evaluate_g, hk_norm, solve)

TIK, TSVD = FilterFunction.tikhonov(), FilterFunction.tsvd()


def instance(seed, n=60, family="brownian"):
    rng = np.random.default_rng(seed)
    if family == "brownian":
        k, x = KernelModel.brownian(), np.unique(rng.random(n))
    else:
        k, x = KernelModel.gaussian(), np.unique(rng.uniform(-3, 3, n))
    return k, x, rng.standard_normal(x.size)


def test_one_node_example():
    s = solve(KernelModel.brownian(), [1.0], [1.0], TIK, 1.0)
    assert s.coefficients[0] == pytest.approx(0.5)
    assert evaluate_g(s, 1.0)[0] == pytest.approx(0.5)
    assert hk_norm(s) == pytest.approx(0.5)


@pytest.mark.parametrize("family", ["brownian", "gaussian"])
def test_ridge_identity(family):
    k, x, y = instance(1, 100, family)
    lam = 1e-3
    s = solve(k, x, y, TIK, lam)
    K = k.gram(x)
    a = np.linalg.solve(K + x.size * lam * np.eye(x.size), y)
    assert np.linalg.norm(s.coefficients - a) <= 1e-8 * np.linalg.norm(a)
    assert discrete_residual_norm(s, y) == pytest.approx(np.linalg.norm(y - K @ a), rel=1e-8)


def test_tsvd_interpolates():
    k, x, y = instance(2, 80)
    system = GramSystem(k, x)
    lam = 0.5 * system.spectrum[system.spectrum > 0].min()
    s = system.solve(y, TSVD, lam)
    assert np.linalg.norm(s.at_nodes() - y) <= 1e-8 * np.linalg.norm(y)
    assert discrete_residual_norm(s, y) <= 1e-8 * np.linalg.norm(y)


def test_zero_coefficients_and_nodes():
    k, x, y = instance(3, 20)
    s = solve(k, x, y, TIK, 0.1)
    np.testing.assert_allclose(s.evaluate_g(x), s.at_nodes(), atol=1e-12)
    s.coefficients = np.zeros_like(s.coefficients)
    assert np.all(s.evaluate_g(np.linspace(0, 1, 5)) == 0)
    assert hk_norm(s) == 0
    assert discrete_residual_norm(s, y) == pytest.approx(np.linalg.norm(y))


def test_hk_norm_decreases_in_lambda():
    k, x, y = instance(4, 40)
    system = GramSystem(k, x)
    norms = [hk_norm(system.solve(y, TIK, lam)) for lam in np.geomspace(1e-4, 1e3, 30)]
    assert all(b < a for a, b in zip(norms, norms[1:]))


def test_linearity():
    k, x, y1 = instance(5, 50)
    y2 = np.random.default_rng(9).standard_normal(x.size)
    system = GramSystem(k, x)
    for f in (TIK, TSVD, FilterFunction.landweber(1.0)):
        lam = 0.01
        lhs = system.coefficients(2 * y1 - 3 * y2, f, lam)
        rhs = 2 * system.coefficients(y1, f, lam) - 3 * system.coefficients(y2, f, lam)
        assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(lhs)


def test_batched_columns_match_single_solves():
    k, x, _ = instance(6, 30)
    system = GramSystem(k, x)
    Y = np.random.default_rng(0).standard_normal((x.size, 4))
    A = system.coefficients(Y, TIK, 0.05)
    for j in range(4):
        np.testing.assert_allclose(A[:, j], system.coefficients(Y[:, j], TIK, 0.05), rtol=1e-12, atol=1e-14)


def test_errors():
    k, x, y = instance(7, 10)
    with pytest.raises(DimensionMismatch):
        solve(k, x, y[:-1], TIK, 0.1)
    with pytest.raises(InvalidLambda):
        solve(k, x, y, TIK, 0.0)
    s = solve(k, x, y, TIK, 0.1)
    with pytest.raises(DimensionMismatch):
        discrete_residual_norm(s, y[:-1])


def test_noise_model():
    y = np.arange(5.0)
    np.testing.assert_array_equal(add_noise(y, NoiseModel(0.0, 1)), y)
    a = NoiseModel(1.0, 42).sample(10 ** 5)
    np.testing.assert_array_equal(a, NoiseModel(1.0, 42).sample(10 ** 5))
    assert abs(a.mean()) <= 0.02 and 0.98 <= a.var() <= 1.02
    assert not np.array_equal(a[:10], NoiseModel(1.0, 43).sample(10))
    # prefix stability: a shorter draw is a prefix of a longer one
    np.testing.assert_array_equal(NoiseModel(0.5, 3).sample(7), NoiseModel(0.5, 3).sample(8)[:7])


def test_noise_is_gaussian():
    from scipy import stats
    z = NoiseModel(1.0, 7).standard_normal(20000)
    assert stats.kstest(z, "norm").pvalue > 1e-3


def test_dump(tmp_path):
    k, x, y = instance(8, 5)
    s = solve(k, PointSet(x), y, TIK, 0.1)
    s.dump(tmp_path / "s.csv", tmp_path / "s.json", seed=11)
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0] == "x_1,coefficient" and len(lines) == 6
    meta = json.loads((tmp_path / "s.json").read_text())
    assert meta["lambda"] == 0.1 and meta["seed"] == 11 and meta["filter"] == {"kind": "tikhonov"}


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.floats(1e-6, 1.0), st.sampled_from(["brownian", "gaussian"]))
def test_property_ridge_identity(seed, lam, family):
    k, x, y = instance(seed, 40, family)
    s = solve(k, x, y, TIK, lam)
    a = np.linalg.solve(k.gram(x) + x.size * lam * np.eye(x.size), y)
    assert np.linalg.norm(s.coefficients - a) <= 1e-8 * np.linalg.norm(a)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(["tikhonov", "tsvd", "landweber"]))
def test_property_spectral_sampling_inequalities(seed, kind):
    # g = sum c_j K(., z_j) sampled at the nodes: residual and norm bounds
    # with the analytic constants of each filter family
    rng = np.random.default_rng(seed)
    k = KernelModel.brownian()
    x = np.unique(rng.random(int(rng.integers(2, 40))))
    z = np.unique(rng.random(3))
    c = rng.standard_normal(z.size)
    g_norm = math.sqrt(c @ k.gram(z) @ c)
    y = k.matrix(x, z) @ c
    f = FilterFunction(kind)
    consts = {"tikhonov": (0.5, 1.0), "tsvd": (1.0, 1.0), "landweber": (1 / math.sqrt(2 * math.e), 1.0)}[kind]
    for m in (1, 3, 10, 100, 1000):
        lam = 1.0 / m
        s = solve(k, x, y, f, lam)
        assert discrete_residual_norm(s, y) <= consts[0] * math.sqrt(x.size * lam) * g_norm * (1 + 1e-6)
        assert hk_norm(s) <= consts[1] * g_norm * (1 + 1e-6)
