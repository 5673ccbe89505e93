"""Concrete forward problems: integration on [0, 1] and Gaussian convolution.

Elements of the source space are only ever handled through point
evaluators and node expansions ``sum_i a_i phi_{x_i}``; nothing is
discretized globally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .errors import DomainViolation, InvalidIndex
from .geometry import Domain, PointSet
from .kernels import KernelModel

GAUSS_HALF_WIDTH = 8.0  # exp(-64) is below double precision


def _gauss_legendre(a, b, order):
    t, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return 0.5 * (a + b) + half * t, half * w


@dataclass(frozen=True)
class SourcePair:
    """An exact source ``f`` with its image ``g = A f``."""

    name: str
    f_eval: Callable
    g_eval: Callable
    hk_norm_g: float | None = None


class OperatorConstants(NamedTuple):
    sigma_max: float
    c_phi_sq: float
    trace_bound: float


class ForwardProblem:
    """A forward operator ``(A f)(x) = <f, phi_x>`` and its induced kernel.

    Parameters
    ----------
    name : str
        ``"integration"`` or ``"gaussian-convolution"``.
    domain : Domain, optional
        Observation set. Defaults to ``[0, 1]`` and ``[-3, 3]`` respectively.
    """

    NAMES = ("integration", "gaussian-convolution")

    def __init__(self, name: str, domain: Domain | None = None):
        if name not in self.NAMES:
            raise ValueError(f"unknown operator {name!r}")
        self.name = name
        if name == "integration":
            self.domain = domain or Domain.interval(0.0, 1.0)
            if self.domain.lower[0] < 0.0 or self.domain.upper[0] > 1.0:
                raise DomainViolation("integration operator is defined on [0, 1]")
            self.kernel = KernelModel.brownian()
        else:
            self.domain = domain or Domain.interval(-3.0, 3.0)
            self.kernel = KernelModel.gaussian(1.0)

    def __repr__(self):
        return f"ForwardProblem({self.name!r}, domain={self.domain.to_json()})"

    @classmethod
    def integration(cls) -> "ForwardProblem":
        return cls("integration")

    @classmethod
    def gaussian_convolution(cls, domain: Domain | None = None) -> "ForwardProblem":
        return cls("gaussian-convolution", domain)

    # -- feature map -------------------------------------------------------

    def feature(self, x, t):
        """``phi_x(t)``, broadcasting over ``x`` and ``t``."""
        x = np.asarray(x, dtype=float)
        t = np.asarray(t, dtype=float)
        if self.name == "integration":
            return ((t >= 0.0) & (t <= x)).astype(float)
        return np.exp(-((x - t) ** 2))

    def feature_norm_sq(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.name == "integration":
            return x.copy()
        return np.full(x.shape, math.sqrt(math.pi / 2))

    @property
    def c_phi_sq(self) -> float:
        """``sup_x ||phi_x||^2`` over the observation domain."""
        if self.name == "integration":
            return float(self.domain.upper[0])
        return math.sqrt(math.pi / 2)

    @cached_property
    def sigma_max(self) -> float:
        """Largest singular value of ``A`` as a map into ``L2`` of the domain."""
        if self.name == "integration" and self.domain == Domain.interval(0.0, 1.0):
            return 2.0 / math.pi
        return nystrom_sigma_max(self.kernel, self.domain)

    def forward(self, f_eval: Callable, x, order: int = 96) -> np.ndarray:
        """``(A f)(x)`` by Gauss-Legendre quadrature of the defining integral."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty(x.shape)
        for i, xi in enumerate(x):
            if self.name == "integration":
                if xi == 0.0:
                    out[i] = 0.0
                    continue
                t, w = _gauss_legendre(0.0, xi, order)
                out[i] = w @ f_eval(t)
            else:
                t, w = _gauss_legendre(xi - GAUSS_HALF_WIDTH, xi + GAUSS_HALF_WIDTH, order)
                out[i] = w @ (np.exp(-((xi - t) ** 2)) * f_eval(t))
        return out

    def check_points(self, X) -> np.ndarray:
        if isinstance(X, PointSet):
            pts = X.points
        else:
            pts = np.asarray(X, dtype=float)
            pts = pts.reshape(-1, 1) if pts.ndim <= 1 else pts
        if pts.shape[1] != 1 or not np.all(self.domain.contains(pts)):
            raise DomainViolation(f"points outside {self.domain.to_json()}")
        return pts[:, 0]

    def to_json(self, source_pair=0) -> dict:
        return {"operator": self.name, "domain": self.domain.to_json(), "source_pair": source_pair}

    @classmethod
    def from_json(cls, spec: dict) -> tuple["ForwardProblem", SourcePair]:
        dom = Domain.from_json(spec["domain"]) if "domain" in spec else None
        p = cls(spec["operator"], dom)
        key = spec.get("source_pair", 0)
        pairs = builtin_source_pairs(p)
        if isinstance(key, int):
            return p, pairs[key]
        for s in pairs:
            if s.name == key:
                return p, s
        raise ValueError(f"no source pair named {key!r}")


def nystrom_sigma_max(k: KernelModel, dom: Domain, order: int = 200) -> float:
    """Square root of the top eigenvalue of the kernel integral operator on ``dom``."""
    t, w = _gauss_legendre(dom.lower[0], dom.upper[0], order)
    sw = np.sqrt(w)
    M = sw[:, None] * k.matrix(t, t) * sw[None, :]
    return math.sqrt(float(np.linalg.eigvalsh(0.5 * (M + M.T))[-1]))


def sample_data(p: ForwardProblem, s: SourcePair, X) -> np.ndarray:
    """Noise-free data ``y_i = g(x_i)``."""
    return np.asarray(s.g_eval(p.check_points(X)), dtype=float)


class SingularTriple(NamedTuple):
    sigma: float
    u: Callable
    v: Callable


def analytic_svd_integration(j: int) -> SingularTriple:
    """j-th singular triple of ``(A f)(x) = int_0^x f`` on ``L2[0, 1]``."""
    if int(j) != j or j < 1:
        raise InvalidIndex("singular index starts at 1")
    w = (j - 0.5) * math.pi
    return SingularTriple(
        sigma=1.0 / w,
        u=lambda x: math.sqrt(2.0) * np.sin(w * np.asarray(x, dtype=float)),
        v=lambda t: math.sqrt(2.0) * np.cos(w * np.asarray(t, dtype=float)),
    )


def builtin_source_pairs(p: ForwardProblem) -> list[SourcePair]:
    if p.name == "integration":
        s1 = analytic_svd_integration(1)
        two_pi = 2 * math.pi
        return [
            SourcePair("constant", lambda t: np.ones_like(np.asarray(t, dtype=float)),
                       lambda x: np.asarray(x, dtype=float) * 1.0, 1.0),
            SourcePair("cosine", lambda t: np.cos(two_pi * np.asarray(t, dtype=float)),
                       lambda x: np.sin(two_pi * np.asarray(x, dtype=float)) / two_pi,
                       1.0 / math.sqrt(2.0)),
            SourcePair("first-singular", s1.v, lambda x: s1.sigma * s1.u(x), 1.0),
        ]
    # f(t) = exp(-t^2) = phi_0, so g = K(., 0) and ||g||_K = sqrt(K(0, 0))
    amp = math.sqrt(math.pi / 2)
    return [
        SourcePair("gaussian-bump", lambda t: np.exp(-np.asarray(t, dtype=float) ** 2),
                   lambda x: amp * np.exp(-0.5 * np.asarray(x, dtype=float) ** 2),
                   amp ** 0.5),
    ]


def operator_constants(p: ForwardProblem, X) -> OperatorConstants:
    """``sigma_max``, ``sup ||phi_x||^2`` and ``C'' = (1/n) sum_i K(x_i, x_i)``."""
    x = p.check_points(X)
    if x.size == 0:
        raise ValueError("empty point set")
    trace = float(np.mean(p.kernel.diagonal(x)))
    return OperatorConstants(p.sigma_max, p.c_phi_sq, trace)
