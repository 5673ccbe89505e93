"""Test functionals, weak-error pairings, bound evaluators and rate exponents.

Two classes of test functionals are supported:

``TestFunctionalA1``
    finite combinations ``psi = sum_j alpha_j phi_{z_j}``. Because
    ``<phi_z, f> = (A f)(z)``, the pairing with ``f_hat - f`` reduces to
    ``sum_j alpha_j (g_hat - g)(z_j)`` and needs no quadrature.

``TestFunctionalAdjoint``
    ``psi = A^* psi0`` for a data-space function ``psi0``; then
    ``<psi, f_hat - f> = int psi0 (g_hat - g)``, evaluated by composite
    Gauss-Legendre quadrature.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import InvalidInput, InvalidSmoothness, QuadratureUnderResolved
from .operators import OperatorConstants
from .regularization import GramSystem, SpectralSolution


@dataclass(frozen=True)
class TestFunctionalA1:
    __test__ = False  # not a pytest class despite the name

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.nodes, dtype=float).ravel()
        a = np.asarray(self.weights, dtype=float).ravel()
        if z.shape != a.shape:
            raise InvalidInput("one weight per node")
        object.__setattr__(self, "nodes", z)
        object.__setattr__(self, "weights", a)

    @classmethod
    def indicator(cls, a: float, b: float) -> "TestFunctionalA1":
        """``1_[a, b] = phi_b - phi_a`` for the integration operator."""
        return cls([a, b], [-1.0, 1.0])

    @property
    def a1_seminorm(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def to_json(self) -> dict:
        return {"class": "a1", "nodes": self.nodes.tolist(), "weights": self.weights.tolist()}


@dataclass(frozen=True)
class TestFunctionalAdjoint:
    """``psi = A^* psi0`` with ``psi0`` piecewise smooth between ``breakpoints``.

    ``breakpoints`` delimit the support of ``psi0``; quadrature panels are
    aligned to them (and, at pairing time, to the kinks of the kernel).
    """

    __test__ = False

    psi0: Callable
    c_psi: float
    breakpoints: tuple
    panels: int = 20
    order: int = 8
    params: dict = field(default_factory=dict)

    @classmethod
    def smoothed_indicator(cls, a: float, b: float, eps: float, **kw) -> "TestFunctionalAdjoint":
        """``psi0 = (1/eps)(-1_[a-eps, a] + 1_[b, b+eps])``, so ``A^* psi0`` is a
        continuous ramp-up/ramp-down version of ``1_[a, b]`` and
        ``||psi0||^2 = 2/eps``."""
        if not (eps > 0 and a - eps >= 0 and a < b and b + eps <= 1):
            raise InvalidInput("need eps > 0 and eps <= a < b <= 1 - eps")

        def psi0(x):
            x = np.asarray(x, dtype=float)
            return (((x >= b) & (x <= b + eps)).astype(float)
                    - ((x >= a - eps) & (x <= a)).astype(float)) / eps

        return cls(psi0, math.sqrt(2.0 / eps), (a - eps, a, b, b + eps),
                   params={"psi0": "smoothed-indicator", "a": a, "b": b, "eps": eps}, **kw)

    def support_pieces(self) -> list[tuple[float, float]]:
        bp = self.breakpoints
        if self.params.get("psi0") == "smoothed-indicator":
            return [(bp[0], bp[1]), (bp[2], bp[3])]
        return [(bp[i], bp[i + 1]) for i in range(len(bp) - 1)]

    def quadrature(self, kinks=(), order: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Composite Gauss-Legendre rule over the support of ``psi0``.

        The panel count is split evenly across support pieces; every kink
        inside a piece becomes an extra panel boundary.
        """
        order = order or self.order
        t0, w0 = np.polynomial.legendre.leggauss(order)
        pieces = self.support_pieces()
        per_piece = max(1, self.panels // len(pieces))
        kinks = np.unique(np.asarray(kinks, dtype=float).ravel())
        ts, ws = [], []
        for lo, hi in pieces:
            edges = np.linspace(lo, hi, per_piece + 1)
            inner = kinks[(kinks > lo) & (kinks < hi)]
            edges = np.unique(np.concatenate([edges, inner]))
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            ts.append((mid[:, None] + half[:, None] * t0[None, :]).ravel())
            ws.append((half[:, None] * w0[None, :]).ravel())
        return np.concatenate(ts), np.concatenate(ws)

    def quadrature_norm(self) -> float:
        t, w = self.quadrature()
        return math.sqrt(float(w @ self.psi0(t) ** 2))

    def to_json(self) -> dict:
        return {"class": "adjoint", **self.params}


def functional_from_json(spec: dict):
    if spec["class"] == "a1":
        return TestFunctionalA1(spec["nodes"], spec["weights"])
    if spec["class"] == "adjoint":
        if spec.get("psi0") != "smoothed-indicator":
            raise InvalidInput("only the smoothed-indicator psi0 can be built from JSON")
        return TestFunctionalAdjoint.smoothed_indicator(spec["a"], spec["b"], spec["eps"])
    raise InvalidInput(f"unknown functional class {spec['class']!r}")


# -- pairings -------------------------------------------------------------

def pair_a1(psi: TestFunctionalA1, s: SpectralSolution, g_true: Callable):
    """``<psi, f_hat - f> = sum_j alpha_j (g_hat(z_j) - g(z_j))``."""
    gh = s.evaluate_g(psi.nodes)
    g = np.asarray(g_true(psi.nodes), dtype=float)
    diff = gh - (g if gh.ndim == 1 else g[:, None])
    return psi.weights @ diff


def _kink_points(s: SpectralSolution) -> np.ndarray:
    if s.system.kernel.family == "brownian":
        return s.nodes[:, 0]
    return np.empty(0)


def pair_adjoint(psi: TestFunctionalAdjoint, s: SpectralSolution, g_true: Callable,
                 check: bool = True):
    """``<A^* psi0, f_hat - f> = int psi0 (g_hat - g)`` by quadrature.

    With ``check`` the order-``p`` result is compared with the order-``p/2``
    rule; a gap above ``1e-6 * c_psi * ||g_hat - g||`` raises
    :class:`QuadratureUnderResolved`.
    """
    kinks = _kink_points(s)

    def rule(order):
        t, w = psi.quadrature(kinks, order)
        e = s.evaluate_g(t)
        g = np.asarray(g_true(t), dtype=float)
        e = e - (g if e.ndim == 1 else g[:, None])
        p0w = psi.psi0(t) * w
        return p0w @ e, np.sqrt(w @ (e * e) if e.ndim == 1 else w @ (e * e))

    val, enorm = rule(psi.order)
    if check:
        low, _ = rule(max(2, psi.order // 2))
        gap = np.max(np.abs(np.asarray(val) - low))
        if gap > 1e-6 * psi.c_psi * np.max(enorm) + 1e-13 * (1 + np.max(np.abs(val))):
            raise QuadratureUnderResolved(f"quadrature disagreement {gap:.3e}")
    return val


def adjoint_weights(psi: TestFunctionalAdjoint, system: GramSystem, g_true: Callable
                    ) -> tuple[np.ndarray, float]:
    """Vectors for batched pairings: ``<psi, f_hat - f> = w @ a - c``.

    ``w_i = int psi0 K(., x_i)`` and ``c = int psi0 g``.
    """
    kinks = system.nodes[:, 0] if system.kernel.family == "brownian" else ()
    t, wq = psi.quadrature(kinks)
    p0w = psi.psi0(t) * wq
    Kt = system.kernel.matrix(t, system.nodes)
    return p0w @ Kt, float(p0w @ np.asarray(g_true(t), dtype=float))


def a1_weights(psi: TestFunctionalA1, system: GramSystem, g_true: Callable
               ) -> tuple[np.ndarray, float]:
    """Same as :func:`adjoint_weights` for an ``A1`` functional."""
    Kz = system.kernel.matrix(psi.nodes, system.nodes)
    return psi.weights @ Kz, float(psi.weights @ np.asarray(g_true(psi.nodes), dtype=float))


# -- bounds ---------------------------------------------------------------

def _check_smoothness(tau, d):
    if not tau > d / 2:
        raise InvalidSmoothness(f"need tau > d/2, got tau={tau}, d={d}")


def _bias_core(C_f, h, tau, d, lam):
    if math.isinf(tau):
        return C_f * math.sqrt(lam)
    return C_f * (h ** (tau - d / 2) + math.sqrt(lam))


def bound_adjoint(c_psi, C_f, h, tau, d, lam, nu, n, consts: OperatorConstants,
                  E_filter: float, trace_class: bool = False) -> float:
    """Weak-error bound for ``psi = A^* psi0`` with ``||psi0|| = c_psi``.

    ``c_psi (C_f h^{d/2} (h^{tau-d/2} + sqrt(lam)) + noise)`` where the noise
    term is ``sigma_max sqrt(c_phi_sq) nu E / (sqrt(n) lam)``, or
    ``sigma_max nu E C'' / (n lam)`` on the trace-class branch.
    """
    _check_smoothness(tau, d)
    bias = C_f * h ** (d / 2) * (_bias_core(1.0, h, tau, d, lam))
    if trace_class:
        noise = consts.sigma_max * nu / n * E_filter / lam * consts.trace_bound
    else:
        noise = consts.sigma_max * math.sqrt(consts.c_phi_sq) * nu / math.sqrt(n) * E_filter / lam
    return c_psi * (bias + noise)


def bound_a1(a1_seminorm, C_f, h, tau, d, lam, nu, n, consts: OperatorConstants,
             E_filter: float, trace_class: bool = False) -> float:
    """Weak-error bound for ``psi`` in ``A1``: no ``h^{d/2}`` prefactor on the bias;
    the noise term is ``c_phi_sq nu E / (sqrt(n) lam)`` or
    ``sqrt(c_phi_sq) nu E C'' / (n lam)``."""
    _check_smoothness(tau, d)
    bias = _bias_core(C_f, h, tau, d, lam)
    if trace_class:
        noise = math.sqrt(consts.c_phi_sq) * nu / n * E_filter / lam * consts.trace_bound
    else:
        noise = consts.c_phi_sq * nu / math.sqrt(n) * E_filter / lam
    return a1_seminorm * (bias + noise)


def optimal_lambda(rule: str, trace_class: bool, n: int, nu: float, h: float, d: int = 1) -> float:
    """Bias/variance balancing choice of ``lam`` (proportionality constant 1)."""
    if n < 1 or not nu > 0 or not h > 0:
        raise InvalidInput("need n >= 1, nu > 0, h > 0")
    if rule == "adjoint":
        base = (nu / n) ** (2 / 3) if trace_class else (nu * nu / n) ** (1 / 3)
        return base * h ** (-d / 3)
    if rule == "a1":
        return (nu / n) ** (2 / 3) if trace_class else (nu * nu / n) ** (1 / 3)
    raise InvalidInput(f"unknown rule {rule!r}")


class RateExponent(NamedTuple):
    error: float
    """``beta`` in ``E|<psi, f_hat - f>| = O(n^-beta)``."""
    lam: float
    """``kappa`` in the matching schedule ``lam = O(n^-kappa)``."""


def theoretical_rate(cls: str, trace_class: bool, tau: float, d: int = 1) -> RateExponent:
    if cls == "adjoint":
        if not tau > 0:
            raise InvalidSmoothness("tau must be positive")
        if trace_class:
            return RateExponent(min(tau / d, 2 / 3), 1 / 3)
        return RateExponent(min(tau / d, 1 / 2), 0.0)
    if cls == "a1":
        _check_smoothness(tau, d)
        if trace_class:
            return RateExponent(min(tau / d - 1 / 2, 1 / 3), 2 / 3)
        return RateExponent(min(tau / d - 1 / 2, 1 / 6), 1 / 3)
    raise InvalidInput(f"unknown class {cls!r}")
