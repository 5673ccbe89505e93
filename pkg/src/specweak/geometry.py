"""Sampling-set geometry: domains, node generation, fill and separation distance."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import qmc

from .errors import (
    DomainViolation,
    EmptyPointSet,
    GridTooLarge,
    InvalidCount,
    TooFewPoints,
)

DEFAULT_GRID_CAP = 10**7
SCHEMES = ("uniform-grid", "jittered-grid", "halton", "iid-uniform")


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box ``prod_k [lower_k, upper_k]``."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lower))
        hi = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lo) != len(hi) or len(lo) == 0:
            raise ValueError("lower and upper must have the same positive length")
        if any(not l < u for l, u in zip(lo, hi)):
            raise ValueError(f"degenerate box {lo} x {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def interval(cls, a: float = 0.0, b: float = 1.0) -> "Domain":
        return cls((a,), (b,))

    @classmethod
    def unit_cube(cls, d: int) -> "Domain":
        return cls((0.0,) * d, (1.0,) * d)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @property
    def side(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    def contains(self, pts, atol: float = 0.0) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        lo, hi = np.asarray(self.lower), np.asarray(self.upper)
        return np.all((pts >= lo - atol) & (pts <= hi + atol), axis=1)

    def to_json(self) -> list:
        return [[l, u] for l, u in zip(self.lower, self.upper)]

    @classmethod
    def from_json(cls, spec) -> "Domain":
        spec = np.asarray(spec, dtype=float)
        if spec.ndim == 1:
            spec = spec[None, :]
        return cls(tuple(spec[:, 0]), tuple(spec[:, 1]))


class PointSet:
    """Pairwise-distinct nodes stored as an ``(n, d)`` array."""

    def __init__(self, points, domain: Domain | None = None, note: str = ""):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise ValueError("points must be an (n, d) array")
        if domain is not None:
            if pts.shape[1] != domain.dim:
                raise DomainViolation("point dimension differs from domain dimension")
            if pts.shape[0] and not np.all(domain.contains(pts)):
                raise DomainViolation("point outside the domain")
        if pts.shape[0] > 1 and _min_pair_sq(pts) == 0.0:
            raise ValueError("points must be pairwise distinct")
        pts.setflags(write=False)
        self.points = pts
        self.domain = domain
        self.note = note

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"PointSet(n={self.n}, d={self.dim})"

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"x_{k + 1}" for k in range(self.dim)])
            for row in self.points:
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path, domain: Domain | None = None) -> "PointSet":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        return cls(np.array(rows[1:], dtype=float).reshape(len(rows) - 1, len(rows[0])), domain)


def _min_pair_sq(pts: np.ndarray) -> float:
    # O(n^2) scan in row blocks to bound memory
    n = pts.shape[0]
    best = math.inf
    block = max(1, 2_000_000 // max(n, 1))
    for start in range(0, n, block):
        chunk = pts[start:start + block]
        diff = chunk[:, None, :] - pts[None, :, :]
        sq = np.sum(diff * diff, axis=-1)
        idx = np.arange(chunk.shape[0])
        sq[idx, start + idx] = np.inf
        best = min(best, float(sq.min()))
    return best


def separation_distance(X: PointSet) -> float:
    """Half the smallest pairwise Euclidean distance between nodes."""
    if X.n < 2:
        raise TooFewPoints("separation distance needs at least two points")
    return 0.5 * math.sqrt(_min_pair_sq(X.points))


class FillDistance(NamedTuple):
    value: float
    tolerance: float
    resolution: int


def evaluation_grid(dom: Domain, resolution: int) -> np.ndarray:
    axes = [np.linspace(l, u, resolution) for l, u in zip(dom.lower, dom.upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _nearest_sq(grid: np.ndarray, pts: np.ndarray) -> np.ndarray:
    if pts.shape[1] == 1:
        # sorted 1-D lookup, same arithmetic as the brute-force scan
        xs = np.sort(pts[:, 0])
        g = grid[:, 0]
        if len(xs) == 1:
            return (g - xs[0]) ** 2
        j = np.clip(np.searchsorted(xs, g), 1, len(xs) - 1)
        return np.minimum((g - xs[j - 1]) ** 2, (g - xs[j]) ** 2)
    out = np.empty(grid.shape[0])
    block = max(1, 4_000_000 // max(pts.shape[0], 1))
    for start in range(0, grid.shape[0], block):
        chunk = grid[start:start + block]
        diff = chunk[:, None, :] - pts[None, :, :]
        out[start:start + block] = np.sum(diff * diff, axis=-1).min(axis=1)
    return out


def fill_distance(X: PointSet, dom: Domain, resolution: int = 1001,
                  grid_cap: int = DEFAULT_GRID_CAP) -> FillDistance:
    """Grid approximation of ``sup_x min_i |x - x_i|``.

    The supremum is taken over a regular grid with ``resolution`` points per
    axis, so the returned value underestimates the true fill distance by at
    most the grid-cell diagonal, reported as ``tolerance``.
    """
    if X.n == 0:
        raise EmptyPointSet("fill distance of an empty set")
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if resolution ** dom.dim > grid_cap:
        raise GridTooLarge(f"{resolution}^{dom.dim} grid exceeds cap {grid_cap}")
    grid = evaluation_grid(dom, resolution)
    value = math.sqrt(float(_nearest_sq(grid, X.points).max()))
    tol = float(np.sqrt(np.sum((dom.side / (resolution - 1)) ** 2)))
    return FillDistance(value, tol, resolution)


def quasi_uniformity_ratio(X: PointSet, dom: Domain, resolution: int = 1001) -> float:
    """``q / h``; in ``(0, 1]`` up to the grid tolerance on ``h``."""
    return separation_distance(X) / fill_distance(X, dom, resolution).value


def _grid_points(n: int, dom: Domain) -> tuple[np.ndarray, str]:
    d = dom.dim
    m = int(round(n ** (1.0 / d)))
    while m ** d > n:
        m -= 1
    while (m + 1) ** d <= n:
        m += 1
    note = "" if m ** d == n else f"rounded n={n} down to {m ** d}"
    if m == 1:
        centre = 0.5 * (np.asarray(dom.lower) + np.asarray(dom.upper))
        return centre[None, :], note
    return evaluation_grid(dom, m), note


def generate_points(scheme: str, n: int, dom: Domain, seed: int = 0) -> PointSet:
    """Deterministic node sets.

    ``uniform-grid`` is endpoint-inclusive (a single point sits at the box
    centre). ``jittered-grid`` perturbs each of ``m^d`` cell centres inside
    its own cell. ``halton`` uses the first ``d`` primes, skipping index 0.
    """
    if n <= 0:
        raise InvalidCount("n must be positive")
    lo = np.asarray(dom.lower)
    side = dom.side
    note = ""
    if scheme == "uniform-grid":
        pts, note = _grid_points(n, dom)
    elif scheme == "jittered-grid":
        m = max(1, int(math.floor(n ** (1.0 / dom.dim) + 1e-9)))
        if m ** dom.dim != n:
            note = f"rounded n={n} down to {m ** dom.dim}"
        rng = np.random.Generator(np.random.PCG64(seed))
        cells = evaluation_grid(Domain.unit_cube(dom.dim), m) * (m - 1) if m > 1 else np.zeros((1, dom.dim))
        u = (cells + rng.uniform(0.05, 0.95, size=cells.shape)) / m
        pts = lo + u * side
    elif scheme == "halton":
        sampler = qmc.Halton(d=dom.dim, scramble=False)
        sampler.fast_forward(1)
        pts = lo + sampler.random(n) * side
    elif scheme == "iid-uniform":
        rng = np.random.Generator(np.random.PCG64(seed))
        pts = lo + rng.random((n, dom.dim)) * side
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return PointSet(pts, dom, note=note)
