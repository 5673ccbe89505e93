import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from specweak.errors import DomainViolation, EmptyPointSet, GridTooLarge, InvalidCount, TooFewPoints
from specweak.geometry import (Domain, PointSet, evaluation_grid, fill_distance, generate_points,
                               quasi_uniformity_ratio, separation_distance)


def brute_separation(pts):
    best = math.inf
    for a, b in itertools.combinations(pts, 2):
        best = min(best, float(np.sum((a - b) ** 2)))
    return 0.5 * math.sqrt(best)


def brute_fill(pts, grid):
    worst = 0.0
    for g in grid:
        worst = max(worst, min(float(np.sum((g - p) ** 2)) for p in pts))
    return math.sqrt(worst)


def test_separation_examples():
    assert separation_distance(PointSet([0.0, 0.5, 1.0])) == 0.25
    assert separation_distance(PointSet([[0, 0], [3, 4]])) == 2.5


def test_fill_examples():
    dom = Domain.interval()
    fd = fill_distance(PointSet([0.0, 0.5, 1.0]), dom, resolution=101)
    assert fd.value == pytest.approx(0.25)
    assert fd.tolerance == pytest.approx(0.01)
    assert fill_distance(PointSet([0.5]), dom, 101).value == pytest.approx(0.5)


def test_errors():
    with pytest.raises(TooFewPoints):
        separation_distance(PointSet([0.3]))
    with pytest.raises(EmptyPointSet):
        fill_distance(PointSet(np.empty((0, 1))), Domain.interval())
    with pytest.raises(GridTooLarge):
        fill_distance(PointSet([[0.5, 0.5]]), Domain.unit_cube(2), resolution=5000)
    with pytest.raises(InvalidCount):
        generate_points("halton", 0, Domain.interval())
    with pytest.raises(DomainViolation):
        PointSet([1.5], Domain.interval())
    with pytest.raises(ValueError):
        PointSet([0.2, 0.2])


@pytest.mark.parametrize("d", [1, 2])
def test_oracles_on_random_sets(d):
    dom = Domain.unit_cube(d)
    res = 201 if d == 1 else 31
    grid = evaluation_grid(dom, res)
    for seed in range(25):
        rng = np.random.default_rng(seed)
        X = PointSet(rng.random((int(rng.integers(2, 30)), d)), dom)
        q = separation_distance(X)
        fd = fill_distance(X, dom, res)
        assert q == brute_separation(X.points)
        assert fd.value == brute_fill(X.points, grid)
        assert q <= fd.value + fd.tolerance


def test_uniform_grid():
    X = generate_points("uniform-grid", 5, Domain.interval())
    np.testing.assert_allclose(X.points[:, 0], [0, 0.25, 0.5, 0.75, 1.0])
    Y = generate_points("uniform-grid", 10, Domain.unit_cube(2))
    assert Y.n == 9 and "rounded" in Y.note
    assert generate_points("uniform-grid", 1, Domain.interval(0, 2)).points[0, 0] == 1.0


def test_halton_matches_radical_inverse():
    def radical_inverse(i, base):
        f, r = 1.0, 0.0
        while i:
            f /= base
            r += f * (i % base)
            i //= base
        return r
    X = generate_points("halton", 20, Domain.unit_cube(2))
    expect = [[radical_inverse(i, 2), radical_inverse(i, 3)] for i in range(1, 21)]
    np.testing.assert_allclose(X.points, expect, atol=1e-15)


def test_quasi_uniform_grid_ratio():
    X = generate_points("uniform-grid", 11, Domain.interval())
    assert quasi_uniformity_ratio(X, Domain.interval(), 201) == pytest.approx(1.0)


@pytest.mark.parametrize("scheme", ["jittered-grid", "iid-uniform", "halton"])
def test_generation_deterministic_and_inside(scheme):
    dom = Domain((-1.0, 2.0), (1.0, 3.0))
    a = generate_points(scheme, 16, dom, seed=7)
    b = generate_points(scheme, 16, dom, seed=7)
    np.testing.assert_array_equal(a.points, b.points)
    assert np.all(dom.contains(a.points))


def test_csv_round_trip(tmp_path):
    X = generate_points("halton", 7, Domain.unit_cube(2))
    X.to_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "x_1,x_2"
    np.testing.assert_array_equal(PointSet.from_csv(tmp_path / "p.csv").points, X.points)


def test_domain_json_round_trip():
    dom = Domain((0.0, -1.0), (1.0, 1.0))
    assert Domain.from_json(dom.to_json()) == dom


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, 10**6), min_size=2, max_size=15, unique=True))
def test_property_q_le_h(xs):
    X = PointSet(np.asarray(xs) / 10**6)
    fd = fill_distance(X, Domain.interval(), 501)
    assert separation_distance(X) <= fd.value + fd.tolerance
