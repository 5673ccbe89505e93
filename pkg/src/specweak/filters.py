"""Spectral filter families and grid certificates of their constants.

A filter ``s_lam`` regularizes ``1/t``. Three properties are certified on
finite grids: ``sup |t s_lam(t)| <= D``, ``sup |lam s_lam(t)| <= E`` and the
qualification bound ``sup |t^a (1 - t s_lam(t))| <= C_a lam^a``. A grid can
only witness these on the range it covers, so certificates record that range.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyGrid, InvalidLambda, LandweberContraction, QualificationExceeded

KINDS = ("tikhonov", "tsvd", "landweber")
LAMBDA_RTOL = 1e-9


@dataclass(frozen=True)
class FilterFunction:
    """One of the Tikhonov, spectral cut-off or Landweber families.

    Landweber is indexed by an integer iteration count ``m`` with
    ``lam = 1/m``; ``iterations`` is the default count.
    """

    kind: str
    gamma: float = 1.0
    iterations: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}")
        if self.kind == "landweber":
            if self.gamma <= 0:
                raise ValueError("Landweber step gamma must be positive")
            if int(self.iterations) != self.iterations or self.iterations < 1:
                raise ValueError("Landweber iteration count must be a positive integer")

    @classmethod
    def tikhonov(cls) -> "FilterFunction":
        return cls("tikhonov")

    @classmethod
    def tsvd(cls) -> "FilterFunction":
        return cls("tsvd")

    @classmethod
    def landweber(cls, gamma: float = 1.0, iterations: int = 1) -> "FilterFunction":
        return cls("landweber", float(gamma), int(iterations))

    @property
    def qualification(self) -> float:
        return 1.0 if self.kind == "tikhonov" else math.inf

    @property
    def default_lambda(self) -> float:
        return 1.0 / self.iterations if self.kind == "landweber" else 1.0

    def iterations_for(self, lam: float) -> int:
        """Landweber iteration count encoded by ``lam = 1/m``."""
        m = round(1.0 / lam)
        if m < 1 or abs(m * lam - 1.0) > LAMBDA_RTOL:
            raise InvalidLambda(f"Landweber needs lam = 1/m for integer m, got {lam!r}")
        return int(m)

    def _check(self, lam, t) -> np.ndarray:
        if not lam > 0:
            raise InvalidLambda(f"lambda must be positive, got {lam!r}")
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("filters are defined for t >= 0")
        if self.kind == "landweber":
            # for t > 0, |1 - gamma t| < 1 is gamma t < 2; testing that form
            # avoids 1 - gamma t rounding to 1 for tiny t
            if np.any(self.gamma * t >= 2.0):
                raise LandweberContraction(
                    f"|1 - gamma t| >= 1 for some t; need t < {2.0 / self.gamma}")
        return t

    def s(self, lam: float, t):
        """Filter value ``s_lam(t)``; vectorized over ``t``."""
        t = self._check(lam, t)
        if self.kind == "tikhonov":
            out = 1.0 / (lam + t)
        elif self.kind == "tsvd":
            out = np.zeros_like(t)
            keep = t >= lam
            out[keep] = 1.0 / t[keep]
        else:
            out = self._landweber_s(self.iterations_for(lam), t)
        return out if out.ndim else float(out)

    def _landweber_s(self, m: int, t: np.ndarray) -> np.ndarray:
        # gamma * sum_{k<m} q^k with q = 1 - gamma t, summed as (1 - q^m) / t.
        # For 0 < q < 1 the numerator is -expm1(m log1p(-gamma t)), which keeps
        # full relative accuracy as t -> 0; at t = 0 the sum is gamma m.
        g = self.gamma
        out = np.full(t.shape, g * m)
        pos = t > 0
        small = pos & (g * t < 1.0)
        out[small] = -np.expm1(m * np.log1p(-g * t[small])) / t[small]
        big = pos & ~small
        out[big] = (1.0 - (1.0 - g * t[big]) ** m) / t[big]
        return out

    def residual(self, lam: float, t):
        """``r_lam(t) = 1 - t s_lam(t)`` in closed form."""
        t = self._check(lam, t)
        if self.kind == "tikhonov":
            out = lam / (lam + t)
        elif self.kind == "tsvd":
            out = (t < lam).astype(float)
        else:
            out = (1.0 - self.gamma * t) ** self.iterations_for(lam)
        return out if out.ndim else float(out)

    def critical_points(self, lam: float, a: float) -> list[float]:
        """Maximizers of ``t^a r_lam(t)`` (on the continuum) for this family."""
        if self.kind == "tikhonov":
            return [a * lam / (1.0 - a)] if a < 1 else []
        if self.kind == "tsvd":
            return [float(np.nextafter(lam, 0.0)), lam]
        m = self.iterations_for(lam)
        return [a / (self.gamma * (m + a))]

    def to_json(self) -> dict:
        if self.kind == "landweber":
            return {"kind": self.kind, "gamma": self.gamma, "iterations": self.iterations}
        return {"kind": self.kind}

    @classmethod
    def from_json(cls, spec: dict) -> "FilterFunction":
        kind = spec["kind"]
        if kind == "landweber":
            return cls.landweber(spec.get("gamma", 1.0), spec.get("iterations", 1))
        return cls(kind)


def s_lambda(f: FilterFunction, lam: float, t):
    return f.s(lam, t)


def residual(f: FilterFunction, lam: float, t):
    return f.residual(lam, t)


@dataclass
class Certificate:
    """Grid maxima standing in for the suprema of the three filter properties."""

    filter: dict
    D: float
    E: float
    C: dict
    argmax: dict
    lambda_range: tuple
    t_range: tuple
    n_lambda: int
    n_t: int
    extra: dict = field(default_factory=dict)

    def C_a(self, a: float) -> float:
        return self.C[float(a)]

    def to_json(self) -> str:
        payload = {
            "filter": self.filter,
            "D": self.D,
            "E": self.E,
            "C": {repr(k): v for k, v in self.C.items()},
            "argmax": self.argmax,
            "lambda_range": list(self.lambda_range),
            "t_range": list(self.t_range),
            "n_lambda": self.n_lambda,
            "n_t": self.n_t,
            **self.extra,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def certify_constants(f: FilterFunction, lambda_grid, t_grid, a_list=(0.5,),
                      add_critical: bool = True) -> Certificate:
    """Certify ``D``, ``E`` and ``C_a`` for ``a`` in ``a_list`` on the given grids.

    With ``add_critical`` the per-``lam`` maximizers of ``t^a r_lam(t)`` that
    fall inside the t-range are appended to the grid (for the cut-off filter
    this is the last float below ``lam``), so the maxima approach the
    suprema rather than depending on grid luck.
    """
    lams = np.asarray(lambda_grid, dtype=float).ravel()
    ts = np.asarray(t_grid, dtype=float).ravel()
    if lams.size == 0 or ts.size == 0:
        raise EmptyGrid("certification grids must be non-empty")
    if np.any(lams <= 0):
        raise InvalidLambda("lambda grid must be positive")
    a_list = [float(a) for a in a_list]
    for a in a_list:
        if a > f.qualification or a <= 0:
            raise QualificationExceeded(f"a={a} outside (0, {f.qualification}]")
    t_lo, t_hi = float(ts.min()), float(ts.max())

    D = E = -math.inf
    D_arg = E_arg = None
    C = {a: -math.inf for a in a_list}
    C_arg = {a: None for a in a_list}
    for lam in lams:
        sv = np.asarray(f.s(lam, ts))
        ts_s = np.abs(ts * sv)
        i = int(np.argmax(ts_s))
        if ts_s[i] > D:
            D, D_arg = float(ts_s[i]), (float(lam), float(ts[i]))
        ls = np.abs(lam * sv)
        i = int(np.argmax(ls))
        if ls[i] > E:
            E, E_arg = float(ls[i]), (float(lam), float(ts[i]))
        for a in a_list:
            tt = ts
            if add_critical:
                extra = [c for c in f.critical_points(lam, a) if t_lo <= c <= t_hi]
                if extra:
                    tt = np.concatenate([ts, extra])
            r = np.abs(np.asarray(f.residual(lam, tt)))
            val = tt ** a * r / lam ** a
            i = int(np.argmax(val))
            if val[i] > C[a]:
                C[a], C_arg[a] = float(val[i]), (float(lam), float(tt[i]))
    return Certificate(
        filter=f.to_json(), D=D, E=E, C=C,
        argmax={"D": D_arg, "E": E_arg, "C": {repr(a): C_arg[a] for a in a_list}},
        lambda_range=(float(lams.min()), float(lams.max())), t_range=(t_lo, t_hi),
        n_lambda=int(lams.size), n_t=int(ts.size),
    )


def analytic_constants(f: FilterFunction) -> dict:
    """Closed-form ``D``, ``E``, ``C_{1/2}`` on unbounded ranges (Landweber: ``gamma t <= 1``)."""
    if f.kind == "tikhonov":
        return {"D": 1.0, "E": 1.0, "C_half": 0.5}
    if f.kind == "tsvd":
        return {"D": 1.0, "E": 1.0, "C_half": 1.0}
    # sup_m sqrt(m t)(1 - gamma t)^m <= 1/sqrt(2 e gamma); lam s <= gamma
    return {"D": 1.0, "E": f.gamma, "C_half": 1.0 / math.sqrt(2 * math.e * f.gamma)}
