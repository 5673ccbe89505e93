"""Reproducing kernels induced by forward operators, and Gram assembly.

Every kernel is of the form ``K(x, x') = <phi_x, phi_x'>`` for a feature
map ``phi``. Closed forms are used where available:

* ``brownian``: ``phi_x = 1_[0, x]`` in ``L2[0, 1]`` gives ``min(x, x')``.
* ``gaussian-autocorrelation``: ``phi_x(t) = exp(-(x - t)^2 / s^2)`` gives
  ``s sqrt(pi/2) exp(-(x - x')^2 / (2 s^2))``.
* ``imq``: ``(1 + (eps r)^2)^(-1/2)``, with no operator behind it.

``operator-induced`` kernels integrate a user feature map numerically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, DomainViolation
from .geometry import PointSet

FAMILIES = ("brownian", "gaussian-autocorrelation", "imq", "operator-induced")


def _as_points(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim == 0:
        return x.reshape(1, 1)
    if x.ndim == 1:
        return x[:, None]
    return x


def _sqdist(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - Y[None, :, :]
    return np.sum(diff * diff, axis=-1)


@dataclass(frozen=True)
class KernelModel:
    """A positive-definite kernel plus the smoothness metadata used by the rate formulas.

    ``tau`` is the Sobolev order of the native-space embedding (``inf`` for
    the analytic kernels) and ``dim`` the ambient dimension.
    """

    family: str
    params: dict = field(default_factory=dict)
    tau: float = 1.0
    dim: int = 1
    feature: Callable | None = field(default=None, compare=False, repr=False)

    @classmethod
    def brownian(cls) -> "KernelModel":
        return cls("brownian", {}, tau=1.0, dim=1)

    @classmethod
    def gaussian(cls, scale: float = 1.0, dim: int = 1) -> "KernelModel":
        if scale <= 0:
            raise ValueError("scale must be positive")
        return cls("gaussian-autocorrelation", {"scale": float(scale)}, tau=math.inf, dim=dim)

    @classmethod
    def imq(cls, shape: float = 1.0, dim: int = 1) -> "KernelModel":
        if shape <= 0:
            raise ValueError("shape must be positive")
        return cls("imq", {"shape": float(shape)}, tau=math.inf, dim=dim)

    @classmethod
    def operator_induced(cls, feature: Callable, support: tuple, order: int = 64,
                         panels: int = 1, tau: float = 1.0, dim: int = 1) -> "KernelModel":
        """Kernel ``int phi(x, t) phi(x', t) dt`` over ``support`` by Gauss-Legendre.

        ``feature(x, t)`` receives ``x`` of shape ``(n, 1)`` and ``t`` of shape
        ``(1, m)`` and must broadcast to ``(n, m)``.
        """
        params = {"support": (float(support[0]), float(support[1])),
                  "order": int(order), "panels": int(panels)}
        return cls("operator-induced", params, tau=tau, dim=dim, feature=feature)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == "operator-induced" and self.feature is None:
            raise ValueError("operator-induced kernels need a feature map")

    # -- evaluation -------------------------------------------------------

    def _check_domain(self, P: np.ndarray) -> None:
        if P.shape[1] != self.dim:
            raise DomainViolation(f"expected {self.dim}-dimensional points, got {P.shape[1]}")
        if not np.all(np.isfinite(P)):
            raise DomainViolation("non-finite point")
        if self.family == "brownian" and (np.any(P < 0.0) or np.any(P > 1.0)):
            raise DomainViolation("brownian kernel lives on [0, 1]")

    def _quadrature(self):
        a, b = self.params["support"]
        order, panels = self.params["order"], self.params["panels"]
        t0, w0 = np.polynomial.legendre.leggauss(order)
        edges = np.linspace(a, b, panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        t = (mid[:, None] + half[:, None] * t0[None, :]).ravel()
        w = (half[:, None] * w0[None, :]).ravel()
        return t, w

    def features(self, x) -> tuple[np.ndarray, np.ndarray]:
        """Feature map sampled on the quadrature rule (operator-induced only)."""
        t, w = self._quadrature()
        P = _as_points(x)
        return np.asarray(self.feature(P, t[None, :]), dtype=float), w

    def matrix(self, X, Y) -> np.ndarray:
        """Cross-kernel matrix ``K(X_i, Y_j)``."""
        X, Y = _as_points(X), _as_points(Y)
        self._check_domain(X)
        self._check_domain(Y)
        if self.family == "brownian":
            return np.minimum(X[:, 0][:, None], Y[:, 0][None, :])
        if self.family == "gaussian-autocorrelation":
            s = self.params["scale"]
            return s * math.sqrt(math.pi / 2) * np.exp(-_sqdist(X, Y) / (2 * s * s))
        if self.family == "imq":
            eps = self.params["shape"]
            return 1.0 / np.sqrt(1.0 + eps * eps * _sqdist(X, Y))
        FX, w = self.features(X)
        FY, _ = self.features(Y)
        return (FX * w) @ FY.T

    def eval(self, x, xp) -> float:
        row = np.asarray(x, dtype=float).reshape(1, -1)
        col = np.asarray(xp, dtype=float).reshape(1, -1)
        return float(self.matrix(row, col)[0, 0])

    def diagonal(self, X) -> np.ndarray:
        X = _as_points(X)
        self._check_domain(X)
        if self.family == "brownian":
            return X[:, 0].copy()
        if self.family == "gaussian-autocorrelation":
            return np.full(X.shape[0], self.params["scale"] * math.sqrt(math.pi / 2))
        if self.family == "imq":
            return np.ones(X.shape[0])
        FX, w = self.features(X)
        return (FX * FX) @ w

    def gram(self, X) -> np.ndarray:
        pts = X.points if isinstance(X, PointSet) else _as_points(X)
        if pts.shape[0] == 0:
            raise DimensionMismatch("empty point set")
        K = self.matrix(pts, pts)
        return 0.5 * (K + K.T)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        if self.family == "operator-induced":
            raise ValueError("operator-induced kernels carry a callable and cannot be serialized")
        return {"family": self.family, "params": dict(self.params)}

    @classmethod
    def from_json(cls, spec: dict) -> "KernelModel":
        family = spec["family"]
        params = spec.get("params", {}) or {}
        if family == "brownian":
            return cls.brownian()
        if family == "gaussian-autocorrelation":
            return cls.gaussian(params.get("scale", 1.0), params.get("dim", 1))
        if family == "imq":
            return cls.imq(params.get("shape", 1.0), params.get("dim", 1))
        raise ValueError(f"kernel family {family!r} cannot be built from JSON")


def rkhs_norm_expansion(k: KernelModel, X, coeffs) -> float:
    """Native-space norm ``sqrt(c^T K c)`` of ``sum_i c_i K(., x_i)``."""
    c = np.asarray(coeffs, dtype=float)
    K = k.gram(X)
    if c.shape != (K.shape[0],):
        raise DimensionMismatch(f"{c.shape[0]} coefficients for {K.shape[0]} nodes")
    return math.sqrt(max(float(c @ K @ c), 0.0))
