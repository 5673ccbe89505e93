"""Batch experiments: rate studies, lemma sweeps, noise amplification,
sampling-inequality probes, filter certification and geometry summaries.

Every experiment is driven by an :class:`ExperimentConfig` and is
deterministic for a fixed config. Monte Carlo trial ``t`` draws its noise
from seed ``base_seed + t`` and trial results are reduced in ascending
trial order, so the outcome does not depend on how trials are scheduled.
"""
from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigInvalid, DegenerateData, InvalidInput
from .filters import FilterFunction, analytic_constants, certify_constants
from .geometry import (Domain, PointSet, fill_distance, generate_points,
                       separation_distance)
from .kernels import KernelModel
from .operators import ForwardProblem, operator_constants
from .regularization import GramSystem, NoiseModel, discrete_residual_norm, hk_norm
from .weak_error import (TestFunctionalA1, a1_weights,
                         adjoint_weights, bound_a1, bound_adjoint, functional_from_json,
                         optimal_lambda, theoretical_rate)

SCHEMA_VERSION = 1
CSV_HEADER = ["n", "h", "lambda", "mean_err", "std_err", "bound", "wall_time"]
_U64 = 2 ** 64


# -- configuration ----------------------------------------------------------

@dataclass
class ExperimentConfig:
    """Everything an experiment needs; ``options`` holds per-experiment knobs."""

    problem: dict = field(default_factory=lambda: {"operator": "integration", "source_pair": 0})
    kernel: dict | None = None
    filter: dict = field(default_factory=lambda: {"kind": "tikhonov"})
    n_schedule: list = field(default_factory=lambda: [32, 64, 128, 256, 512, 1024])
    point_scheme: str = "uniform-grid"
    lambda_rule: dict = field(default_factory=lambda: {"optimal": {"class": "adjoint", "trace_class": True}})
    nu: float = 0.05
    trials: int = 200
    base_seed: int = 0
    functional: dict = field(default_factory=lambda: {
        "class": "adjoint", "psi0": "smoothed-indicator", "a": 0.2, "b": 0.7, "eps": 0.1})
    output_dir: str = "out"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        ns = self.n_schedule
        if not isinstance(ns, list) or not ns or not all(isinstance(n, int) and n >= 1 for n in ns):
            raise ConfigInvalid("n_schedule must be a non-empty list of positive integers")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ConfigInvalid("n_schedule must be strictly increasing")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigInvalid("trials must be a positive integer")
        if not isinstance(self.base_seed, int) or not 0 <= self.base_seed < _U64:
            raise ConfigInvalid("base_seed must be an unsigned 64-bit integer")
        if not (isinstance(self.nu, (int, float)) and self.nu >= 0 and math.isfinite(self.nu)):
            raise ConfigInvalid("nu must be a finite non-negative number")
        rule = self.lambda_rule
        if not isinstance(rule, dict) or len(rule) != 1 or next(iter(rule)) not in ("fixed", "optimal"):
            raise ConfigInvalid('lambda_rule must be {"fixed": value} or {"optimal": {...}}')
        if "fixed" in rule and not (isinstance(rule["fixed"], (int, float)) and rule["fixed"] > 0):
            raise ConfigInvalid("fixed lambda must be positive")
        if "optimal" in rule and rule["optimal"].get("class") not in ("adjoint", "a1"):
            raise ConfigInvalid("optimal lambda rule needs class 'adjoint' or 'a1'")
        try:
            p, _ = self.build_problem()
            k = self.build_kernel(p)
            FilterFunction.from_json(self.filter)
            functional_from_json(self.functional)
        except ConfigInvalid:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigInvalid(str(exc)) from exc
        if p.name == "integration" and k.family != "brownian":
            raise ConfigInvalid("the integration problem requires the brownian kernel")

    # builders
    def build_problem(self):
        return ForwardProblem.from_json(self.problem)

    def build_kernel(self, p: ForwardProblem) -> KernelModel:
        return p.kernel if self.kernel is None else KernelModel.from_json(self.kernel)

    def build_filter(self) -> FilterFunction:
        return FilterFunction.from_json(self.filter)

    def build_functional(self):
        return functional_from_json(self.functional)

    def to_json(self) -> dict:
        return {"schema": SCHEMA_VERSION, **asdict(self)}

    @classmethod
    def from_json(cls, spec: dict) -> "ExperimentConfig":
        if not isinstance(spec, dict):
            raise ConfigInvalid("config must be a JSON object")
        if spec.get("schema") != SCHEMA_VERSION:
            raise ConfigInvalid(f"unsupported config schema {spec.get('schema')!r}")
        known = set(cls.__dataclass_fields__)
        unknown = set(spec) - known - {"schema"}
        if unknown:
            raise ConfigInvalid(f"unknown config keys {sorted(unknown)}")
        return cls(**{k: v for k, v in spec.items() if k != "schema"})


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            spec = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_json(spec)


# -- reports ----------------------------------------------------------------

@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class Report:
    """Outcome of one experiment: named pass/fail checks plus raw numbers."""

    name: str
    checks: list = field(default_factory=list)
    data: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, passed: bool, detail: str = "") -> bool:
        self.checks.append(Check(name, bool(passed), detail))
        return bool(passed)

    def to_json(self) -> str:
        payload = {"name": self.name, "passed": self.passed,
                   "checks": [asdict(c) for c in self.checks], "data": self.data}
        return json.dumps(payload, indent=2, sort_keys=True, default=_json_default)

    def write(self, out_dir) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{self.name}.json"
        path.write_text(self.to_json() + "\n")
        self.files.append(str(path))
        return path


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


# -- shared helpers ---------------------------------------------------------

def _fill(X: PointSet, dom: Domain) -> float:
    # in 1-D this resolution puts every midpoint of a uniform grid on the
    # evaluation grid, so uniform-grid fill distances come out exact
    if dom.dim == 1:
        step = 2 * max(X.n - 1, 1)
        res = step * math.ceil(1000 / step) + 1
        return fill_distance(X, dom, res).value
    return fill_distance(X, dom).value


def _noise_matrix(n: int, nu: float, base_seed: int, trials: int) -> np.ndarray:
    """Column ``t`` holds the noise of trial ``t`` (seed ``base_seed + t``)."""
    cols = [NoiseModel(nu, (base_seed + t) % _U64).sample(n) for t in range(trials)]
    return np.stack(cols, axis=1)


def _certified_E(f: FilterFunction, lam: float, spectrum: np.ndarray) -> float:
    t = np.concatenate([[0.0], spectrum[spectrum > 0]])
    return certify_constants(f, [lam], t).E


def _resolve_lambda(cfg: ExperimentConfig, f: FilterFunction, n: int, h: float, d: int) -> float:
    rule = cfg.lambda_rule
    if "fixed" in rule:
        lam = float(rule["fixed"])
    else:
        o = rule["optimal"]
        lam = optimal_lambda(o["class"], bool(o.get("trace_class", False)), n, cfg.nu, h, d)
    if f.kind == "landweber":
        lam = 1.0 / max(1, math.ceil(1.0 / lam - 1e-9))
    return lam


# -- rate study -------------------------------------------------------------

@dataclass
class RateRecord:
    n: int
    h: float
    lam: float
    mean_abs_weak_error: float
    std_error: float
    bound_value: float
    wall_time: float

    def __post_init__(self):
        if self.mean_abs_weak_error < 0 or not self.h > 0:
            raise InvalidInput("need mean error >= 0 and h > 0")


@dataclass
class RateStudy:
    records: list
    slope: float
    stderr: float
    C_f: float
    theoretical: float
    dominance_violations: list
    report: Report
    files: list = field(default_factory=list)


def fit_loglog_slope(records) -> tuple[float, float]:
    """Least-squares slope of ``log(error)`` against ``log(n)`` and its standard error.

    ``records`` is a sequence of :class:`RateRecord` or of ``(n, error)`` pairs.
    """
    pairs = [(r.n, r.mean_abs_weak_error) if isinstance(r, RateRecord) else tuple(r)
             for r in records]
    if len(pairs) < 3:
        raise DegenerateData("need at least 3 points to fit a slope")
    n, err = (np.asarray(v, dtype=float) for v in zip(*pairs))
    if np.any(err <= 0) or np.any(n <= 0):
        raise DegenerateData("log-log fit needs positive n and errors")
    x, y = np.log(n), np.log(err)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise DegenerateData("all n values are equal")
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    dof = len(x) - 2
    stderr = math.sqrt(float(resid @ resid) / dof / sxx) if dof > 0 else 0.0
    return slope, stderr


def _pairing_weights(psi, system, g_eval):
    if isinstance(psi, TestFunctionalA1):
        return a1_weights(psi, system, g_eval)
    return adjoint_weights(psi, system, g_eval)


def _bound(psi, trace_class, C_f, h, tau, d, lam, nu, n, consts, E):
    if isinstance(psi, TestFunctionalA1):
        return bound_a1(psi.a1_seminorm, C_f, h, tau, d, lam, nu, n, consts, E, trace_class)
    return bound_adjoint(psi.c_psi, C_f, h, tau, d, lam, nu, n, consts, E, trace_class)


def run_rate_study(cfg: ExperimentConfig, write: bool = True) -> RateStudy:
    """Monte Carlo weak errors along ``cfg.n_schedule`` with a fitted log-log slope.

    The bias constant ``C_f`` is fitted from noise-free solves at the two
    smallest ``n`` as the largest ratio of observed bias to the bias shape
    of the bound, so the bound dominates at those pilot levels by construction.
    """
    p, pair = cfg.build_problem()
    k = cfg.build_kernel(p)
    f = cfg.build_filter()
    psi = cfg.build_functional()
    cls = "a1" if isinstance(psi, TestFunctionalA1) else "adjoint"
    rule = cfg.lambda_rule.get("optimal", {})
    trace_class = bool(rule.get("trace_class", cfg.options.get("trace_class", False)))
    d = p.domain.dim

    levels = []
    for n in cfg.n_schedule:
        t0 = time.perf_counter()
        X = generate_points(cfg.point_scheme, n, p.domain, seed=cfg.base_seed % _U64)
        h = _fill(X, p.domain)
        lam = _resolve_lambda(cfg, f, X.n, h, d)
        system = GramSystem(k, X)
        y = np.asarray(pair.g_eval(X.points[:, 0]), dtype=float)
        w, c = _pairing_weights(psi, system, pair.g_eval)
        bias = float(w @ system.coefficients(y, f, lam) - c)
        noise = system.coefficients(_noise_matrix(X.n, cfg.nu, cfg.base_seed, cfg.trials), f, lam)
        # linearity: pairing of trial t = bias + w @ (noise coefficients of trial t)
        errs = np.abs(bias + w @ noise)
        mean = float(np.sum(errs) / cfg.trials)
        std = float(np.std(errs, ddof=1) / math.sqrt(cfg.trials)) if cfg.trials > 1 else 0.0
        consts = operator_constants(p, X)
        E = _certified_E(f, lam, system.spectrum)
        levels.append(dict(n=X.n, h=h, lam=lam, mean=mean, std=std, bias=bias,
                           consts=consts, E=E, wall=time.perf_counter() - t0))

    tau = k.tau
    shapes = [_bound(psi, trace_class, 1.0, L["h"], tau, d, L["lam"], 0.0, L["n"], L["consts"], L["E"])
              for L in levels]
    C_f = max(abs(L["bias"]) / s for L, s in zip(levels[:2], shapes[:2]))
    records = []
    for L in levels:
        b = _bound(psi, trace_class, C_f, L["h"], tau, d, L["lam"], cfg.nu, L["n"], L["consts"], L["E"])
        records.append(RateRecord(L["n"], L["h"], L["lam"], L["mean"], L["std"], b, L["wall"]))

    try:
        slope, stderr = fit_loglog_slope(records)
    except DegenerateData:
        slope, stderr = math.nan, math.nan
    violations = [r.n for r in records if r.mean_abs_weak_error > r.bound_value]
    try:
        theo = theoretical_rate(cls, trace_class, tau, d).error
    except (InvalidInput, ValueError):
        theo = math.nan

    rep = Report("rates")
    rep.data.update(slope=slope, stderr=stderr, C_f=C_f, theoretical_exponent=theo,
                    functional_class=cls, trace_class=trace_class,
                    bias=[L["bias"] for L in levels],
                    records=[asdict(r) for r in records])
    rep.check("bound dominance", not violations,
              f"mean error above bound at n={violations}" if violations else "")
    slope_max = cfg.options.get("slope_max")
    if slope_max is not None:
        rep.check("slope", slope <= slope_max, f"slope {slope:.4f} vs threshold {slope_max}")
    study = RateStudy(records, slope, stderr, C_f, theo, violations, rep)
    if write:
        study.files = emit_outputs(records, cfg.output_dir, slope=slope,
                                   record_wall_time=bool(cfg.options.get("record_wall_time", False)))
        rep.data["wall_time"] = {str(r.n): r.wall_time for r in records}
        rep.files.extend(study.files)
        rep.write(cfg.output_dir)
        study.files = list(rep.files)
    return study


# -- outputs ----------------------------------------------------------------

def _csv_text(records, record_wall_time: bool) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        wt = repr(float(r.wall_time)) if record_wall_time else ""
        w.writerow([str(int(r.n)), repr(float(r.h)), repr(float(r.lam)),
                    repr(float(r.mean_abs_weak_error)), repr(float(r.std_error)),
                    repr(float(r.bound_value)), wt])
    return buf.getvalue()


def _svg_text(series: dict, slope: float | None, title: str) -> str:
    W, H, left, right, top, bottom = 800, 600, 90, 30, 50, 70
    xs = np.concatenate([np.log10(np.asarray(s[0], dtype=float)) for s in series.values()])
    ys = np.concatenate([np.log10(np.asarray(s[1], dtype=float)) for s in series.values()])
    x0, x1 = math.floor(xs.min() * 10) / 10, math.ceil(xs.max() * 10) / 10
    y0, y1 = math.floor(ys.min()), math.ceil(ys.max())
    x1 = x1 if x1 > x0 else x0 + 1
    y1 = y1 if y1 > y0 else y0 + 1

    def px(v):
        return left + (v - x0) / (x1 - x0) * (W - left - right)

    def py(v):
        return H - bottom - (v - y0) / (y1 - y0) * (H - top - bottom)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" width="{W}" height="{H}">',
           f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2}" y="28" text-anchor="middle" font-size="18">{title}</text>',
           f'<line x1="{left}" y1="{H - bottom}" x2="{W - right}" y2="{H - bottom}" stroke="black"/>',
           f'<line x1="{left}" y1="{top}" x2="{left}" y2="{H - bottom}" stroke="black"/>']
    for e in range(math.ceil(x0), math.floor(x1) + 1):
        X = px(e)
        out.append(f'<line x1="{X:.2f}" y1="{H - bottom}" x2="{X:.2f}" y2="{H - bottom + 6}" stroke="black"/>')
        out.append(f'<text x="{X:.2f}" y="{H - bottom + 22}" text-anchor="middle" font-size="13">1e{e}</text>')
    for e in range(y0, y1 + 1):
        Y = py(e)
        out.append(f'<line x1="{left - 6}" y1="{Y:.2f}" x2="{left}" y2="{Y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 10}" y="{Y + 4:.2f}" text-anchor="end" font-size="13">1e{e}</text>')
    out.append(f'<text x="{W / 2}" y="{H - 20}" text-anchor="middle" font-size="14">n</text>')
    colours = ["#1f5fa8", "#c2410c", "#15803d", "#7e22ce"]
    for i, (name, (sx, sy)) in enumerate(series.items()):
        col = colours[i % len(colours)]
        pts = " ".join(f"{px(math.log10(a)):.2f},{py(math.log10(b)):.2f}" for a, b in zip(sx, sy))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{col}" stroke-width="2"/>')
        out.append(f'<text x="{W - right - 150}" y="{top + 20 + 18 * i}" fill="{col}" font-size="14">{name}</text>')
    if slope is not None and math.isfinite(slope):
        out.append(f'<text x="{left + 15}" y="{top + 20}" font-size="14">fitted slope {slope:.4f}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_outputs(records, out_dir, slope: float | None = None, stem: str = "rates",
                 record_wall_time: bool = False) -> list[str]:
    """Write ``<stem>.csv`` and a log-log ``<stem>.svg`` of error and bound against ``n``.

    Wall times vary between runs, so they are only written to the CSV when
    ``record_wall_time`` is set; otherwise the column is left empty and the
    CSV is byte-identical across reruns.
    """
    records = list(records)
    if not records:
        raise InvalidInput("no records to emit")
    csv_body = _csv_text(records, record_wall_time)
    ns = [r.n for r in records]
    series = {"mean |weak error|": (ns, [r.mean_abs_weak_error for r in records])}
    if all(r.bound_value > 0 and math.isfinite(r.bound_value) for r in records):
        series["bound"] = (ns, [r.bound_value for r in records])
    series = {k: v for k, v in series.items() if all(e > 0 for e in v[1])}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / f"{stem}.csv"]
    paths[0].write_text(csv_body)
    if series:
        paths.append(out / f"{stem}.svg")
        paths[1].write_text(_svg_text(series, slope, "weak error vs n"))
    return [str(pth) for pth in paths]


# -- lemma sweep ------------------------------------------------------------

def _distinct_uniform(rng, n, lo, hi):
    x = np.unique(lo + (hi - lo) * rng.random(n))
    return x


def _lambda_grid(f: FilterFunction, lo: float, hi: float, count: int) -> np.ndarray:
    lams = np.geomspace(lo, hi, count)
    if f.kind != "landweber":
        return lams
    ms, prev = [], 0
    for m in np.round(1.0 / lams[::-1]).astype(int):
        prev = max(prev + 1, int(m))
        ms.append(prev)
    return 1.0 / np.asarray(ms[::-1], dtype=float)


def run_lemma_bounds(cfg: ExperimentConfig) -> Report:
    """Sweep the two spectral sampling inequalities on random instances.

    For ``g = sum_j c_j K(., z_j)`` sampled at random nodes and each filter
    and ``lam`` on a log-grid, checks

    * ``||y - K a||_2 <= C_{1/2} sqrt(n lam) ||g||_K`` and
    * ``||g_hat||_K <= D ||g||_K``

    with ``D`` and ``C_{1/2}`` certified on a t-grid that contains the
    instance's spectrum. The residual is the plain Euclidean norm; ``n lam``
    is the ridge parameter acting on ``K`` itself (see :mod:`.regularization`).
    """
    o = cfg.options
    instances = int(o.get("instances", 100))
    n_max = int(o.get("n_max", 60))
    lo, hi, count = o.get("lambda_grid", [1e-6, 1.0, 20])
    slack = float(o.get("slack", 1e-6))
    filters = [FilterFunction.from_json(s) for s in o.get(
        "filters", [{"kind": "tikhonov"}, {"kind": "tsvd"}, {"kind": "landweber", "gamma": 1.0}])]
    kernels = o.get("kernels", ["brownian", "gaussian"])

    rep = Report("lemma")
    counts = {f.kind: {"checked": 0, "violations": 0, "worst_residual": 0.0, "worst_norm": 0.0}
              for f in filters}
    degenerate = 0
    for i in range(instances):
        rng = np.random.Generator(np.random.PCG64((cfg.base_seed + i) % _U64))
        fam = kernels[i % len(kernels)]
        k, (a, b) = (KernelModel.brownian(), (0.0, 1.0)) if fam == "brownian" else \
            (KernelModel.gaussian(1.0), (-3.0, 3.0))
        X = _distinct_uniform(rng, int(rng.integers(2, n_max + 1)), a, b)
        Z = _distinct_uniform(rng, int(rng.integers(1, 9)), a, b)
        c = rng.standard_normal(Z.size)
        g_norm = math.sqrt(max(float(c @ k.gram(Z) @ c), 0.0))
        y = k.matrix(X, Z) @ c
        system = GramSystem(k, X)
        mu = system.spectrum
        t_grid = np.concatenate([[0.0], mu[mu > 0], np.geomspace(1e-12, max(mu[0], 1e-12), 200)])
        for f in filters:
            lams = _lambda_grid(f, lo, hi, count)
            cert = certify_constants(f, lams, t_grid)
            C, D = cert.C_a(0.5), cert.D
            ent = counts[f.kind]
            for lam in lams:
                s = system.solve(y, f, lam)
                rr = discrete_residual_norm(s, y) / (C * math.sqrt(system.n * lam) * g_norm)
                nr = hk_norm(s) / (D * g_norm)
                if f.kind == "tsvd" and lam > mu[0]:
                    degenerate += 1
                ent["checked"] += 1
                ent["worst_residual"] = max(ent["worst_residual"], rr)
                ent["worst_norm"] = max(ent["worst_norm"], nr)
                if rr > 1 + slack or nr > 1 + slack:
                    ent["violations"] += 1
    for kind, ent in counts.items():
        rep.check(f"{kind}: residual and norm inequalities", ent["violations"] == 0,
                  f"{ent['violations']} of {ent['checked']} violated; worst ratios "
                  f"{ent['worst_residual']:.6f}, {ent['worst_norm']:.6f}")
    rep.data.update(counts=counts, tsvd_above_spectrum=degenerate, instances=instances)
    return rep


# -- noise amplification ----------------------------------------------------

def l2_gram(k: KernelModel, nodes: np.ndarray, dom: Domain, panels: int = 64, order: int = 8):
    """``M_ij = int K(x, x_i) K(x, x_j) dx`` over ``dom`` by composite Gauss-Legendre.

    Panel edges include the nodes for the brownian kernel, whose sections
    have kinks there, so the rule is exact for it.
    """
    lo, hi = dom.lower[0], dom.upper[0]
    edges = np.linspace(lo, hi, panels + 1)
    if k.family == "brownian":
        edges = np.unique(np.concatenate([edges, nodes[:, 0]]))
    t0, w0 = np.polynomial.legendre.leggauss(order)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * t0).ravel()
    w = (half[:, None] * w0).ravel()
    Kt = k.matrix(t, nodes)
    return (Kt * w[:, None]).T @ Kt


def noise_amplification(p: ForwardProblem, X: PointSet, f: FilterFunction, lam: float,
                        nu: float, trials: int, base_seed: int = 0, sup_points: int = 1001):
    """Monte Carlo ``E||g_hat_noisy - g_hat||_{L2}`` and ``sup_x E|g_hat_noisy - g_hat|(x)``.

    The difference only depends on the noise, so it is computed directly as
    the regularized reconstruction of the noise vector.
    """
    system = GramSystem(p.kernel, X)
    if nu == 0:
        return 0.0, 0.0, system
    A = system.coefficients(_noise_matrix(X.n, nu, base_seed, trials), f, lam)
    M = l2_gram(p.kernel, system.nodes, p.domain)
    norms = np.sqrt(np.maximum(np.einsum("it,ij,jt->t", A, M, A), 0.0))
    grid = np.linspace(p.domain.lower[0], p.domain.upper[0], sup_points)
    sup_mean = float(np.max(np.sum(np.abs(p.kernel.matrix(grid, system.nodes) @ A), axis=1) / trials))
    return float(np.sum(norms) / trials), sup_mean, system


def run_noise_amplification(cfg: ExperimentConfig) -> Report:
    o = cfg.options
    p, _ = cfg.build_problem()
    f = cfg.build_filter()
    n = int(o.get("n", 100))
    lam = float(o.get("lambda", 0.01))
    nus = [float(v) for v in o.get("nus", [0.05, 0.1, 0.2])]
    X = generate_points(cfg.point_scheme, n, p.domain, seed=cfg.base_seed % _U64)
    consts = operator_constants(p, X)
    rep = Report("noise-amp")
    rows = []
    for nu in nus:
        est, sup_mean, system = noise_amplification(p, X, f, lam, nu, cfg.trials, cfg.base_seed)
        E = _certified_E(f, lam, system.spectrum)
        bound = consts.sigma_max * E * nu * math.sqrt(consts.c_phi_sq) / (math.sqrt(X.n) * lam)
        trace = consts.sigma_max * E * nu * consts.trace_bound / (X.n * lam)
        rows.append(dict(nu=nu, estimate=est, sup_mean=sup_mean, bound=bound,
                         ratio=est / bound if bound else 0.0, E=E,
                         trace_bound=trace, within_trace_bound=est <= trace))
        rep.check(f"nu={nu}: estimate <= bound", est <= bound, f"{est:.6f} <= {bound:.6f}")
    per_nu = [r["estimate"] / r["nu"] for r in rows if r["nu"] > 0]
    if len(per_nu) > 1:
        spread = (max(per_nu) - min(per_nu)) / min(per_nu)
        rep.check("linear in nu within 10%", spread <= 0.10, f"relative spread {spread:.3e}")
    rep.data.update(n=X.n, lam=lam, trials=cfg.trials, constants=consts._asdict(), rows=rows)
    return rep


# -- sampling-inequality probe ----------------------------------------------

def run_sampling_probe(cfg: ExperimentConfig) -> Report:
    """Noise-free errors ``g - g_hat_lam`` on a halving-``h`` ladder.

    At each level the constant ``C'`` is the largest observed ratio of the
    error to ``h^{d/gamma} (h^{tau-d/2} + sqrt(lam)) ||g||_K`` over the
    ``lam`` grid, with ``d/gamma = 0`` for the sup norm and ``d/2`` for the
    discrete L2 norm.
    """
    o = cfg.options
    p, pair = cfg.build_problem()
    k = cfg.build_kernel(p)
    f = cfg.build_filter()
    levels = int(o.get("levels", 6))
    k0 = int(o.get("k0", 3))
    lo, hi, count = o.get("lambda_grid", [1e-8, 1e-1, 8])
    m_eval = int(o.get("eval_points", 4097))
    factor = float(o.get("stability_factor", 3.0))
    band = float(o.get("slope_band", 0.2))
    tau, d = k.tau, p.domain.dim
    if pair.hk_norm_g is None:
        raise ConfigInvalid("the sampling probe needs a source pair with known native-space norm")
    gnorm = pair.hk_norm_g
    grid = np.linspace(p.domain.lower[0], p.domain.upper[0], m_eval)
    g_grid = pair.g_eval(grid)

    rows = []
    for lev in range(levels):
        n = 2 ** (k0 + lev) + 1
        X = generate_points("uniform-grid", n, p.domain)
        h = _fill(X, p.domain)
        system = GramSystem(k, X)
        y = pair.g_eval(X.points[:, 0])
        sched = h ** (2 * tau - d)
        lams = sorted(set(_lambda_grid(f, lo, hi, count).tolist()) | {_resolve_sched(f, sched)})
        best_sup = best_l2 = 0.0
        sched_err = None
        Kg = k.matrix(grid, system.nodes)
        for lam in lams:
            e = g_grid - Kg @ system.coefficients(y, f, lam)
            sup = float(np.max(np.abs(e)))
            l2 = float(np.sqrt(np.mean(e * e)))
            shape = (h ** (tau - d / 2) + math.sqrt(lam)) * gnorm
            best_sup = max(best_sup, sup / shape)
            best_l2 = max(best_l2, l2 / (h ** (d / 2) * shape))
            if lam == _resolve_sched(f, sched):
                sched_err = sup
        rows.append(dict(n=n, h=h, C_sup=best_sup, C_l2=best_l2, schedule_lambda=sched,
                         schedule_sup_error=sched_err))
    rep = Report("sampling-probe")
    for key in ("C_sup", "C_l2"):
        a, b = rows[-2][key], rows[-1][key]
        ratio = max(a, b) / min(a, b) if min(a, b) > 0 else math.inf
        rep.check(f"{key} stable across the two finest levels", ratio < factor,
                  f"{a:.4g} vs {b:.4g} (factor {ratio:.3f})")
    target = -(tau - d / 2)
    try:
        slope, stderr = fit_loglog_slope([(r["n"], r["schedule_sup_error"]) for r in rows])
    except DegenerateData:
        slope, stderr = math.nan, math.nan
    rep.check("scheduled sup error slope", abs(slope - target) <= band,
              f"slope {slope:.4f} vs {target} +/- {band}")
    rep.data.update(rows=rows, slope=slope, stderr=stderr, target_slope=target)
    return rep


def _resolve_sched(f: FilterFunction, lam: float) -> float:
    if f.kind == "landweber":
        return 1.0 / max(1, math.ceil(1.0 / lam - 1e-9))
    return lam


# -- filter certification ---------------------------------------------------

DEFAULT_CERTIFICATIONS = [
    {"filter": {"kind": "tikhonov"}, "lambda_grid": [1e-6, 1.0, 61],
     "t_grid": [1e-10, 100.0, 241], "include_zero": True, "a": [0.5, 1.0]},
    {"filter": {"kind": "tsvd"}, "lambda_grid": [1e-6, 1.0, 61],
     "t_grid": [1e-10, 100.0, 241], "include_zero": True, "a": [0.5, 1.0]},
    {"filter": {"kind": "landweber", "gamma": 1.0}, "iterations": [1, 64],
     "t_linear": [0.0, 1.0, 1001], "a": [0.5, 1.0]},
]


def _cert_grids(entry: dict, f: FilterFunction):
    if "iterations" in entry:
        m0, m1 = entry["iterations"]
        lams = 1.0 / np.arange(m0, m1 + 1, dtype=float)
    else:
        lams = np.geomspace(*entry["lambda_grid"][:2], int(entry["lambda_grid"][2]))
    if "t_linear" in entry:
        ts = np.linspace(*entry["t_linear"][:2], int(entry["t_linear"][2]))
    else:
        ts = np.geomspace(*entry["t_grid"][:2], int(entry["t_grid"][2]))
        if entry.get("include_zero", True):
            ts = np.concatenate([[0.0], ts])
    return lams, ts


def run_filter_certification(cfg: ExperimentConfig, write: bool = True) -> Report:
    entries = cfg.options.get("certifications", DEFAULT_CERTIFICATIONS)
    rep = Report("certify-filters")
    certs = {}
    for entry in entries:
        f = FilterFunction.from_json(entry["filter"])
        lams, ts = _cert_grids(entry, f)
        cert = certify_constants(f, lams, ts, entry.get("a", [0.5]))
        certs[f.kind] = cert
        ref = analytic_constants(f)
        if f.kind == "tikhonov":
            for key, val in (("D", cert.D), ("E", cert.E), ("C_half", cert.C_a(0.5))):
                rep.check(f"tikhonov {key}", abs(val - ref[key]) <= 1e-6, f"{val!r} vs {ref[key]}")
        elif f.kind == "tsvd":
            for a, val in cert.C.items():
                rep.check(f"tsvd C_{a}", abs(val - 1.0) <= 1e-12, repr(val))
        else:
            rep.check("landweber D <= 1", cert.D <= 1 + 1e-9, repr(cert.D))
        if write:
            out = Path(cfg.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"certificate_{f.kind}.json"
            path.write_text(cert.to_json() + "\n")
            rep.files.append(str(path))
    rep.data["certificates"] = {k: json.loads(c.to_json()) for k, c in certs.items()}
    return rep


# -- geometry ---------------------------------------------------------------

def run_geometry(cfg: ExperimentConfig, write: bool = True) -> Report:
    p, _ = cfg.build_problem()
    dom = Domain.from_json(cfg.options["domain"]) if "domain" in cfg.options else p.domain
    rep = Report("geometry")
    rows = []
    for n in cfg.n_schedule:
        X = generate_points(cfg.point_scheme, n, dom, seed=cfg.base_seed % _U64)
        fd = fill_distance(X, dom)
        q = separation_distance(X) if X.n > 1 else math.inf
        rows.append(dict(n=X.n, fill=fd.value, tolerance=fd.tolerance, separation=q,
                         ratio=q / fd.value if X.n > 1 and fd.value > 0 else math.nan,
                         note=X.note))
        if X.n > 1:
            rep.check(f"n={X.n}: q <= h", q <= fd.value + fd.tolerance,
                      f"q={q:.6g}, h={fd.value:.6g} (+{fd.tolerance:.2g})")
        if write:
            out = Path(cfg.output_dir)
            out.mkdir(parents=True, exist_ok=True)
            path = out / f"points_{cfg.point_scheme}_{X.n}.csv"
            X.to_csv(path)
            rep.files.append(str(path))
    rep.data.update(scheme=cfg.point_scheme, domain=dom.to_json(), rows=rows)
    return rep
