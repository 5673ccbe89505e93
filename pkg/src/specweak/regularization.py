"""Spectral regularized solutions in coefficient space.

Conventions
-----------
The semi-discrete operator uses the normalized adjoint
``A_n^* w = (1/n) sum_i w_i phi_{x_i}``. On ``span{phi_{x_i}}`` the operator
``A_n^* A_n`` acts on coefficient vectors as ``G = K / n`` (``K`` the Gram
matrix), so

    f_hat = sum_i a_i phi_{x_i},   a = (1/n) s_lam(G) y,

and ``g_hat(x) = sum_i a_i K(x, x_i)``. For Tikhonov this is
``(K + n lam I) a = y``; a ridge parameter ``mu`` acting on ``K`` directly
corresponds to ``lam = mu / n``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidLambda
from .filters import FilterFunction
from .geometry import PointSet
from .kernels import KernelModel
from .linalg import SymEig, sym_eig


def _node_array(X) -> np.ndarray:
    if isinstance(X, PointSet):
        return X.points
    pts = np.asarray(X, dtype=float)
    return pts.reshape(-1, 1) if pts.ndim <= 1 else pts


class GramSystem:
    """Gram matrix of ``(kernel, nodes)`` with the eigensystem of ``G = K/n``.

    Built once and shared across regularization parameters and noise draws.
    Eigenvalues at or below ``n * eps * mu_max`` are set to exactly zero.
    """

    def __init__(self, kernel: KernelModel, X):
        self.kernel = kernel
        self.nodes = _node_array(X)
        self.K = kernel.gram(self.nodes)
        self.n = self.K.shape[0]
        eig = sym_eig(self.K / self.n)
        mu = eig.eigenvalues.copy()
        mu[mu <= eig.default_rank_tol()] = 0.0
        self.eig = SymEig(mu, eig.eigenvectors)

    @property
    def spectrum(self) -> np.ndarray:
        return self.eig.eigenvalues

    def coefficients(self, y, f: FilterFunction, lam: float) -> np.ndarray:
        """``(1/n) s_lam(G) y``; ``y`` may hold one data vector per column."""
        y = np.asarray(y, dtype=float)
        if y.shape[0] != self.n:
            raise DimensionMismatch(f"{y.shape[0]} data values for {self.n} nodes")
        if not lam > 0:
            raise InvalidLambda(f"lambda must be positive, got {lam!r}")
        sv = np.asarray(f.s(lam, self.spectrum), dtype=float) / self.n
        Q = self.eig.eigenvectors
        proj = Q.T @ y
        return Q @ (sv * proj if y.ndim == 1 else sv[:, None] * proj)

    def solve(self, y, f: FilterFunction, lam: float) -> "SpectralSolution":
        a = self.coefficients(y, f, lam)
        return SpectralSolution(self, a, float(lam), f)


@dataclass
class SpectralSolution:
    """``f_hat = sum_i a_i phi_{x_i}`` together with the system that produced it."""

    system: GramSystem
    coefficients: np.ndarray
    lam: float
    filter: FilterFunction

    @property
    def nodes(self) -> np.ndarray:
        return self.system.nodes

    @property
    def gram_eig(self) -> SymEig:
        return self.system.eig

    def at_nodes(self) -> np.ndarray:
        return self.system.K @ self.coefficients

    def evaluate_g(self, x) -> np.ndarray:
        """``g_hat(x) = sum_i a_i K(x, x_i)`` at one point or an array of points."""
        pts = _node_array(x)
        return self.system.kernel.matrix(pts, self.nodes) @ self.coefficients

    def dump(self, csv_path, json_path, seed: int | None = None) -> None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            d = self.nodes.shape[1]
            w.writerow([f"x_{k + 1}" for k in range(d)] + ["coefficient"])
            for row, c in zip(self.nodes, self.coefficients):
                w.writerow([repr(float(v)) for v in row] + [repr(float(c))])
        meta = {"lambda": self.lam, "filter": self.filter.to_json(), "seed": seed,
                "kernel": self.system.kernel.to_json(), "n": self.system.n}
        with open(json_path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)


def solve(k: KernelModel, X, y, f: FilterFunction, lam: float,
          system: GramSystem | None = None) -> SpectralSolution:
    """Spectral regularized solution ``s_lam(A_n^* A_n) A_n^* y`` in coefficient form."""
    system = system or GramSystem(k, X)
    return system.solve(y, f, lam)


def evaluate_g(s: SpectralSolution, x) -> np.ndarray:
    return s.evaluate_g(x)


def discrete_residual_norm(s: SpectralSolution, y) -> float:
    """Unnormalized Euclidean norm ``||y - K a||_2``."""
    y = np.asarray(y, dtype=float)
    if y.shape != (s.system.n,):
        raise DimensionMismatch(f"{y.shape} data for {s.system.n} nodes")
    return float(np.linalg.norm(y - s.at_nodes()))


def hk_norm(s: SpectralSolution) -> float:
    """Native-space norm ``sqrt(a^T K a)`` of ``g_hat`` (equal to ``||f_hat||``)."""
    a = s.coefficients
    return math.sqrt(max(float(a @ s.system.K @ a), 0.0))


@dataclass(frozen=True)
class NoiseModel:
    """I.i.d. centred Gaussian noise with standard deviation ``nu``.

    Uniforms come from numpy's PCG64 bit generator seeded with ``seed``;
    Gaussians are produced by the Box-Muller transform, consuming two
    uniforms per pair of normals.
    """

    nu: float
    seed: int = 0

    def __post_init__(self):
        if not self.nu >= 0:
            raise ValueError("noise level must be non-negative")

    def standard_normal(self, size: int) -> np.ndarray:
        rng = np.random.Generator(np.random.PCG64(self.seed))
        pairs = (size + 1) // 2
        u = rng.random((pairs, 2))
        radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))  # 1 - u lies in (0, 1]
        angle = 2.0 * math.pi * u[:, 1]
        z = np.empty(2 * pairs)
        z[0::2] = radius * np.cos(angle)
        z[1::2] = radius * np.sin(angle)
        return z[:size]

    def sample(self, size: int) -> np.ndarray:
        if self.nu == 0:
            return np.zeros(size)
        return self.nu * self.standard_normal(size)


def add_noise(y, nm: NoiseModel) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if nm.nu == 0:
        return y.copy()
    return y + nm.sample(y.size).reshape(y.shape)
