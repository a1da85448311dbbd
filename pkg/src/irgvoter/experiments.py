"""Consensus-time exponents and the Monte Carlo scaling harness.

The exponent functions return ``c`` in ``E tau_cons = N**c`` up to
polylogarithmic factors, for the whole graph (``scope="global"``) or for the
component of vertex 1 (``scope="component1"``).  :func:`scaling_experiment`
measures the same exponent as a least-squares log-log slope.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass, field

import numpy as np

from .dynamics import CoalConfig, VoterConfig, _run_coal, _run_voter, layout, summarize
from .graphgen import GraphSpec, sample_graph, spec_violations
from .rng import RngStream, as_stream
from .structure import components, find_long_double_star, find_simple_double_star

SCOPES = ("global", "component1")
DEFAULT_TOLERANCE = 0.15


# -- exponent tables -------------------------------------------------------------

@dataclass(frozen=True)
class ExponentQuery:
    gamma: float
    theta: float
    dynamics: str = "classical"
    scope: str = "global"

    def __post_init__(self):
        if not 0 < self.gamma < 0.5:
            raise ValueError(f"gamma must lie in (0, 1/2), got {self.gamma}")
        if self.dynamics not in ("classical", "discursive"):
            raise ValueError("dynamics must be 'classical' or 'discursive'")
        if self.scope not in SCOPES:
            raise ValueError(f"scope must be one of {SCOPES}")


def branches(gamma: float, dynamics: str, scope: str = "global") -> list:
    """Piecewise description ``[(theta_lo, theta_hi, f), ...]`` ordered by theta.

    Each ``f`` maps theta to the exponent; neighbouring pieces share their
    threshold.
    """
    g = gamma
    if dynamics == "classical" and scope == "global":
        a, b = 0.0, 1 / (2 - 2 * g)
        return [(-math.inf, a, lambda t: g * (1 - t) / (2 - 2 * g)),
                (a, b, lambda t: g / (2 - 2 * g)),
                (b, 1.0, lambda t: g * t),
                (1.0, math.inf, lambda t: g)]
    if dynamics == "classical":
        a, b = 0.0, g / (1 - g)
        return [(-math.inf, a, lambda t: g * g * (1 - t) / (1 - g)),
                (a, b, lambda t: g * g / (1 - g)),
                (b, 1.0, lambda t: g * t),
                (1.0, math.inf, lambda t: g)]
    if scope == "global":
        a, b = 2 * g, (3 - 4 * g) / (2 - 2 * g)
        return [(-math.inf, a, lambda t: g * (2 - t) / (2 - 2 * g)),
                (a, 1.0, lambda t: g),
                (1.0, b, lambda t: g * (2 - t)),
                (b, math.inf, lambda t: g / (2 - 2 * g))]
    a, b = 3 - 1 / g, (2 - 3 * g) / (1 - g)
    return [(-math.inf, a, lambda t: g * g * (2 - t) / (1 - g)),
            (a, 1.0, lambda t: g),
            (1.0, b, lambda t: g * (2 - t)),
            (b, math.inf, lambda t: g * g / (1 - g))]


def theoretical_exponent(gamma, theta=None, dynamics="classical", scope="global") -> float:
    """Exponent of the expected consensus time.

    Accepts either an :class:`ExponentQuery` or the four fields.  Closed
    thresholds follow the tables: for the classical model the middle plateau
    is ``0 <= theta <= 1/(2-2 gamma)``; for the discursive one it is
    ``2 gamma <= theta <= 1``.  The function is continuous, so the side a
    threshold is assigned to does not change the value.
    """
    q = gamma if isinstance(gamma, ExponentQuery) else ExponentQuery(gamma, theta, dynamics, scope)
    t = float(q.theta)
    for lo, hi, f in branches(q.gamma, q.dynamics, q.scope):
        if t < hi or hi == math.inf:
            return float(f(t))
    raise AssertionError("unreachable")


def thresholds(gamma: float, dynamics: str, scope: str = "global") -> list:
    return [hi for _, hi, _ in branches(gamma, dynamics, scope)[:-1]]


def exponent_in_tau(tau: float, theta: float, dynamics: str = "classical", scope: str = "global") -> float:
    """Exponent in terms of the degree power law ``tau = 1 + 1/gamma`` (``tau > 3``)."""
    if not tau > 3:
        raise ValueError("tau must exceed 3")
    return theoretical_exponent(1.0 / (tau - 1.0), theta, dynamics, scope)


# -- scaling harness ----------------------------------------------------------------------

def parse_grid(text: str) -> list:
    """``"lo:hi:xK"`` -> ``[lo, lo*K, ...]`` up to ``hi``; or a comma list."""
    m = re.fullmatch(r"\s*(\d+)\s*:\s*(\d+)\s*:\s*x\s*([0-9.]+)\s*", text)
    if m:
        lo, hi, k = int(m.group(1)), int(m.group(2)), float(m.group(3))
        if k <= 1 or lo < 2 or hi < lo:
            raise ValueError(f"bad grid {text!r}")
        out, x = [], float(lo)
        while x <= hi * (1 + 1e-12):
            out.append(int(round(x)))
            x *= k
        return out
    return [int(v) for v in text.split(",") if v.strip()]


def validate_grid(grid) -> list:
    grid = [int(n) for n in grid]
    if len(grid) < 4:
        raise ValueError("scaling grid needs at least 4 points")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("scaling grid must be strictly increasing")
    return grid


def fit_slope(ns, means) -> tuple:
    """Least-squares ``log mean = a + slope * log N``; returns ``(slope, intercept)``."""
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(means, dtype=np.float64))
    slope, intercept = np.polyfit(x, y, 1)
    return float(slope), float(intercept)


@dataclass
class ScalingPoint:
    N: int
    reps: int
    mean: float
    stderr: float
    median: float
    q05: float
    q95: float
    n_censored: int


@dataclass
class ScalingResult:
    grid: list
    per_N: list
    slope: float
    ci_low: float
    ci_high: float
    median_slope: float
    theory: float
    target: float
    tolerance: float
    verdict: str
    n_censored: int
    config: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def summary(self) -> dict:
        return {"slope": self.slope, "ci_low": self.ci_low, "ci_high": self.ci_high,
                "median_slope": self.median_slope, "theory": self.theory, "target": self.target,
                "tolerance": self.tolerance, "verdict": self.verdict, "n_censored": self.n_censored,
                "grid": list(self.grid), "config": self.config}

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=1, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "mean", "stderr", "reps", "median", "n_censored"])
        for p in self.per_N:
            w.writerow([p.N, repr(p.mean), repr(p.stderr), p.reps, repr(p.median), p.n_censored])
        return buf.getvalue()


def _replicate_times(spec: GraphSpec, dynamics, theta, init, u, reps, stream: RngStream,
                     quenched: bool, horizon, mode):
    vals = np.empty(reps)
    cen = np.zeros(reps, bool)
    graph_stream = RngStream(stream.seed, f"graph/{spec.n}")
    g = sample_graph(spec, graph_stream) if quenched else None
    for r in range(reps):
        if not quenched:
            g = sample_graph(spec, graph_stream.with_replicate(r))
        lay = layout(g)
        s = RngStream(stream.seed, f"{stream.purpose}/{spec.n}", r)
        if init == "unique":
            # the coalescing dual has the same law and is cheaper
            _, taus, _, c = _run_coal(lay, g, CoalConfig(dynamics, theta, horizon=horizon), s)
        else:
            _, taus, _, c = _run_voter(lay, VoterConfig(dynamics, theta, "bernoulli", u, horizon, mode), s)
        vals[r] = taus.max() if len(taus) else 0.0
        cen[r] = c
    return vals, cen


def scaling_experiment(template: GraphSpec, dynamics: str, theta: float, grid, reps: int, rng,
                       init: str = "bernoulli", u: float = 0.5, tolerance: float = DEFAULT_TOLERANCE,
                       target: float | None = None, quenched: bool = False, horizon: float | None = None,
                       mode: str = "naive", n_boot: int = 1000, min_reps: int = 50) -> ScalingResult:
    """Fit the growth exponent of the mean consensus time over a grid of N.

    Args:
        template: graph parameters; its ``n`` is replaced by each grid value.
        dynamics, theta: voter dynamics.
        grid: strictly increasing list of at least 4 sizes.
        reps: replicates per grid point (a fresh graph per replicate unless
            ``quenched``).
        rng: RngStream or seed.  Graph ``r`` at size ``N`` uses purpose
            ``graph/N``; its dynamics use ``<purpose>/N``.
        init: ``"bernoulli"`` (voter model with ``u``) or ``"unique"``
            (simulated through the coalescing dual).
        tolerance: verdict threshold on ``|slope - target|``.
        target: defaults to the theoretical exponent.

    Returns:
        ScalingResult; censored replicates are excluded and counted.
    """
    grid = validate_grid(grid)
    if reps < min_reps:
        raise ValueError(f"reps must be at least {min_reps}")
    stream = as_stream(rng, "scaling")
    theory = theoretical_exponent(template.gamma, theta, dynamics)
    target = theory if target is None else float(target)
    points, samples = [], []
    total_cen = 0
    for n in grid:
        spec = template.replace(n=n)
        vals, cen = _replicate_times(spec, dynamics, theta, init, u, reps, stream, quenched, horizon, mode)
        st = summarize(vals, cen)
        x = vals[~cen]
        samples.append(x)
        total_cen += int(cen.sum())
        points.append(ScalingPoint(n, st.reps, st.mean, st.stderr, st.q50, st.q05, st.q95, st.n_censored))
    means = [p.mean for p in points]
    slope, _ = fit_slope(grid, means)
    median_slope, _ = fit_slope(grid, [max(p.median, 1e-300) for p in points])
    boot = np.empty(n_boot)
    bgen = RngStream(stream.seed, "bootstrap").generator()
    for b in range(n_boot):
        bm = [x[bgen.integers(0, len(x), len(x))].mean() for x in samples]
        boot[b] = fit_slope(grid, bm)[0]
    lo, hi = (float(v) for v in np.quantile(boot, [0.025, 0.975]))
    verdict = "pass" if abs(slope - target) <= tolerance else "fail"
    config = {"beta": template.beta, "gamma": template.gamma, "variant": template.variant,
              "dynamics": dynamics, "theta": theta, "init": init, "u": u, "reps": reps,
              "seed": stream.seed, "purpose": stream.purpose, "quenched": quenched,
              "horizon": horizon, "mode": mode, "n_boot": n_boot}
    return ScalingResult(grid, points, slope, lo, hi, median_slope, theory, target, tolerance,
                         verdict, total_cen, config)


# -- probes ----------------------------------------------------------------------------------

@dataclass
class ComponentTiming:
    label: str
    rep: int
    size: int
    mean: float
    stderr: float


@dataclass
class ProbeReport:
    dynamics: str
    theta: float
    component1: ComponentTiming
    double_star: ComponentTiming | None
    witness: dict | None
    dominant: str | None
    predicted_global: float
    predicted_component1: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def _timing(g, comp_rep, label, dynamics, theta, reps, stream: RngStream) -> ComponentTiming:
    cfg = CoalConfig(dynamics, theta)
    lay = layout(g)
    c = int(components(g).component_id[comp_rep])
    vals = np.empty(reps)
    for r in range(reps):
        _, taus, _, _ = _run_coal(lay, g, cfg, stream.with_replicate(r), only=[c])
        vals[r] = taus.max() if len(taus) else 0.0
    st = summarize(vals)
    size = int(lay.hi[c] - lay.lo[c])
    return ComponentTiming(label, int(lay.reps[c]), size, st.mean, st.stderr)


def component_probe(g, dynamics: str, theta: float, rng, reps: int = 50, gamma: float | None = None) -> ProbeReport:
    """Coalescing-dual (unique-opinion consensus) times on the component of
    vertex 1 and on a double-star component, and which of the two is slower.

    The simple double star is preferred; the long one is used when no simple
    witness exists.  Without any witness the comparison is reported as
    unavailable (``dominant = None``).
    """
    stream = as_stream(rng, "probe")
    gamma = g.meta.get("gamma") if gamma is None else gamma
    c1 = _timing(g, 1, "component1", dynamics, theta, reps, stream)
    w = find_simple_double_star(g, gamma=gamma) or find_long_double_star(g, gamma=gamma)
    ds = None
    dominant = None
    if w is not None:
        ds = _timing(g, w.hubs[0], "double_star", dynamics, theta, reps, stream)
        if ds.rep == c1.rep:
            dominant = "same_component"
        else:
            dominant = "component1" if c1.mean > ds.mean else "double_star"
    valid = gamma is not None and 0 < gamma < 0.5
    return ProbeReport(dynamics, theta, c1, ds, None if w is None else asdict(w), dominant,
                       theoretical_exponent(gamma, theta, dynamics) if valid else float("nan"),
                       theoretical_exponent(gamma, theta, dynamics, "component1") if valid else None)


@dataclass
class AgreementReport:
    n: int
    beta: float
    gamma: float
    reps: int
    stats: dict
    standardized: dict
    relative: dict

    def to_dict(self) -> dict:
        return asdict(self)


def model_agreement_probe(n: int, beta: float, gamma: float, rng, variants=("cl", "snr", "grg"),
                          reps: int = 1000) -> AgreementReport:
    """Edge count, maximum degree and largest component across variants.

    Differences are reported against the first variant as
    ``(mean_a - mean_b) / sqrt(se_a**2 + se_b**2)`` (standardized) and
    ``mean_a / mean_b - 1`` (relative).
    """
    stream = as_stream(rng, "agreement")
    names = ("edges", "max_degree", "largest_component")
    stats = {}
    raw = {}
    for v in variants:
        spec = GraphSpec(n, beta, gamma, v)
        rows = np.empty((reps, 3))
        gs = RngStream(stream.seed, f"{stream.purpose}/{v}")
        for r in range(reps):
            g = sample_graph(spec, gs.with_replicate(r))
            rows[r] = (g.edge_count, g.degrees.max(), components(g).sizes().max())
        raw[v] = rows
        stats[v] = {k: {"mean": float(rows[:, i].mean()),
                        "stderr": float(rows[:, i].std(ddof=1) / math.sqrt(reps))}
                    for i, k in enumerate(names)}
    base = variants[0]
    std, rel = {}, {}
    for v in variants:
        std[v], rel[v] = {}, {}
        for k in names:
            a, b = stats[v][k], stats[base][k]
            se = math.hypot(a["stderr"], b["stderr"])
            std[v][k] = 0.0 if v == base else ((a["mean"] - b["mean"]) / se if se > 0 else 0.0)
            rel[v][k] = a["mean"] / b["mean"] - 1.0
    return AgreementReport(n, beta, gamma, reps, stats, std, rel)


def config_violations(n=None, beta=None, gamma=None, variant="cl", allow_nonsubcritical=False,
                      theta=None, dynamics=None, grid=None, reps=None) -> list:
    """Every violated precondition of a run, without running it."""
    out = []
    if n is not None and beta is not None and gamma is not None:
        out += spec_violations(n, beta, gamma, variant, allow_nonsubcritical)
    if gamma is not None and not 0 < gamma < 0.5:
        out.append(f"K_gamma undefined: gamma must lie in (0, 1/2), got {gamma}")
    if dynamics is not None and dynamics not in ("classical", "discursive"):
        out.append(f"unknown dynamics {dynamics!r}")
    if theta is not None and not math.isfinite(theta):
        out.append("theta must be finite")
    if grid is not None:
        try:
            validate_grid(parse_grid(grid) if isinstance(grid, str) else grid)
        except ValueError as e:
            out.append(str(e))
    if reps is not None and reps < 1:
        out.append("reps must be >= 1")
    return out
