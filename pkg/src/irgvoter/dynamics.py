"""Event-driven Monte Carlo for the voter models and their coalescing duals.

Both voter dynamics are simulated through vertex activations: vertex ``v``
fires at rate ``d(v)**theta`` and picks a uniform neighbour ``u``.

* classical:  ``v`` copies the opinion of ``u``
* discursive: the pair adopts the opinion of ``v`` or of ``u``, each with
  probability 1/2

For the discursive model the ordered update ``i <- j`` then happens at rate
``d(i)**theta / d(i) / 2 + d(j)**theta / d(j) / 2``, i.e.
``(d(i)**(theta-1) + d(j)**(theta-1)) / 2``, which is the rate in the model
definition.  ``mode="reference"`` checks this with one exponential clock per
ordered pair.

``mode="active"`` only schedules discordant updates.  Discarding the no-op
events of a Poisson process thins it to the process of effective updates, so
the law of the opinion path is unchanged; only the event count differs.

Components are simulated independently, each on its own counter-block
sub-stream keyed by the component's smallest vertex, and ``tau_cons`` is the
largest per-component consensus time.  Consensus in a component is detected
by a count of distinct opinions reaching 1 (an O(1) update, valid because a
connected component is opinion-constant iff only one opinion is present).
"""

from __future__ import annotations

import heapq
import json
import math
import time
from dataclasses import dataclass, field

import numba
import numpy as np

from .graphgen import Graph
from .rng import RngStream, as_stream
from .structure import components

DYNAMICS = ("classical", "discursive")
MODES = ("naive", "active", "reference")
_DYN = {"classical": 0, "discursive": 1}

_TAG_INIT = 1
_TAG_DYN = 0


@dataclass(frozen=True)
class VoterConfig:
    """Voter run parameters; ``init`` is ``"unique"`` or ``"bernoulli"`` (with ``u``)."""

    dynamics: str = "classical"
    theta: float = 0.0
    init: str = "bernoulli"
    u: float = 0.5
    horizon: float | None = None
    mode: str = "naive"

    def __post_init__(self):
        if self.dynamics not in DYNAMICS:
            raise ValueError(f"dynamics must be one of {DYNAMICS}")
        if self.init not in ("unique", "bernoulli"):
            raise ValueError("init must be 'unique' or 'bernoulli'")
        if self.init == "bernoulli" and not 0 < self.u < 1:
            raise ValueError("bernoulli init needs 0 < u < 1")
        if self.horizon is not None and not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")


@dataclass(frozen=True)
class CoalConfig:
    """Coalescing-walk run parameters.

    ``starts`` is ``"all"``, ``"pair"`` (with ``pair=(x, y)``) or
    ``"stationary_pair"`` (two independent draws from the stationary law of the
    component of ``root``).
    """

    dynamics: str = "classical"
    theta: float = 0.0
    starts: str = "all"
    pair: tuple | None = None
    root: int = 1
    horizon: float | None = None

    def __post_init__(self):
        if self.dynamics not in DYNAMICS:
            raise ValueError(f"dynamics must be one of {DYNAMICS}")
        if self.starts not in ("all", "pair", "stationary_pair"):
            raise ValueError("starts must be 'all', 'pair' or 'stationary_pair'")
        if self.starts == "pair" and (self.pair is None or len(self.pair) != 2):
            raise ValueError("starts='pair' needs pair=(x, y)")
        if self.horizon is not None and not self.horizon > 0:
            raise ValueError("horizon must be positive")


@dataclass
class SimOutcome:
    """Result of one voter run.

    ``reps``/``taus`` list the components of size at least 2 (isolated vertices
    are trivially in consensus at time 0).  A censored component holds the
    horizon as its time.
    """

    tau_cons: float
    reps: np.ndarray
    taus: np.ndarray
    events: int
    censored: bool
    elapsed: float

    @property
    def per_component_tau(self) -> dict:
        return {int(r): float(t) for r, t in zip(self.reps, self.taus)}


@dataclass
class CoalOutcome:
    tau_coal: float
    reps: np.ndarray
    taus: np.ndarray
    jumps: int
    censored: bool
    elapsed: float

    @property
    def per_component_tau(self) -> dict:
        return {int(r): float(t) for r, t in zip(self.reps, self.taus)}


# -- layout -------------------------------------------------------------------

class Layout:
    """Graph relabelled so every component is a contiguous block ``lo:hi``.

    Vertex ``v`` becomes ``pos[v]`` (0-based); components keep the order of
    :func:`structure.components`.  ``rev[s]`` is the slot of the reverse
    direction of slot ``s``.
    """

    def __init__(self, g: Graph):
        dec = components(g)
        order = np.concatenate(dec.components)
        pos = np.empty(g.n + 1, np.int64)
        pos[0] = -1
        pos[order] = np.arange(g.n)
        deg_simple = np.diff(g.indptr)[order]
        self.indptr = np.zeros(g.n + 1, np.int64)
        self.indptr[1:] = np.cumsum(deg_simple)
        rows = [g.indices[g.indptr[v]:g.indptr[v + 1]] for v in order]
        flat = np.concatenate(rows) if rows else np.zeros(0, np.int64)
        self.indices = pos[flat].astype(np.int64)
        self.indices = _sort_rows(self.indptr, self.indices)
        self.rev = _reverse_slots(self.indptr, self.indices)
        self.degree = deg_simple.astype(np.float64)
        self.order = order
        self.pos = pos
        sizes = dec.sizes()
        self.lo = np.concatenate([[0], np.cumsum(sizes)[:-1]]).astype(np.int64)
        self.hi = np.cumsum(sizes).astype(np.int64)
        self.reps = dec.rep
        self.n = g.n


def layout(g: Graph) -> Layout:
    if not g.is_simple:
        raise ValueError("voter dynamics need a simple graph; collapse() first")
    cached = g.__dict__.get("_layout")
    if cached is None:
        cached = g.__dict__["_layout"] = Layout(g)
    return cached


@numba.njit(cache=True)
def _sort_rows(indptr, indices):
    out = indices.copy()
    for v in range(len(indptr) - 1):
        out[indptr[v]:indptr[v + 1]] = np.sort(out[indptr[v]:indptr[v + 1]])
    return out


@numba.njit(cache=True)
def _reverse_slots(indptr, indices):
    rev = np.empty(len(indices), np.int64)
    for v in range(len(indptr) - 1):
        for s in range(indptr[v], indptr[v + 1]):
            u = indices[s]
            a, b = indptr[u], indptr[u + 1]
            rev[s] = a + np.searchsorted(indices[a:b], v)
    return rev


# -- Fenwick trees --------------------------------------------------------------

@numba.njit(cache=True)
def _fw_build(w):
    n = len(w)
    t = np.zeros(n + 1)
    for i in range(n):
        t[i + 1] += w[i]
        j = (i + 1) + ((i + 1) & -(i + 1))
        if j <= n:
            t[j] += t[i + 1]
    return t


@numba.njit(cache=True)
def _fw_add(t, i, x):
    i += 1
    n = len(t) - 1
    while i <= n:
        t[i] += x
        i += i & -i


@numba.njit(cache=True)
def _fw_total(t):
    n = len(t) - 1
    s = 0.0
    i = n
    while i > 0:
        s += t[i]
        i -= i & -i
    return s


@numba.njit(cache=True)
def _fw_find(t, r):
    # smallest index whose prefix sum exceeds r
    n = len(t) - 1
    pos = 0
    step = 1
    while step * 2 <= n:
        step *= 2
    while step > 0:
        nxt = pos + step
        if nxt <= n and t[nxt] <= r:
            pos = nxt
            r -= t[nxt]
        step //= 2
    return min(pos, n - 1)


# -- voter kernels -------------------------------------------------------------------

@numba.njit(cache=True)
def _voter_naive(indptr, indices, degree, lo, hi, op0, nop, dyn, theta, horizon, rng):
    m = hi - lo
    cum = np.empty(m)
    acc = 0.0
    for k in range(m):
        acc += degree[lo + k] ** theta
        cum[k] = acc
    total = acc
    op = op0.copy()
    counts = np.zeros(nop, np.int64)
    distinct = 0
    for k in range(m):
        if counts[op[k]] == 0:
            distinct += 1
        counts[op[k]] += 1
    t = 0.0
    events = 0
    while distinct > 1:
        t += rng.standard_exponential() / total
        if t > horizon:
            return horizon, events, True
        k = np.searchsorted(cum, rng.random() * total, side="right")
        if k >= m:
            k = m - 1
        v = lo + k
        a = indptr[v]
        d = indptr[v + 1] - a
        u = indices[a + int(rng.random() * d)]
        events += 1
        if dyn == 0 or rng.random() < 0.5:
            dst, src = v - lo, u - lo
        else:
            dst, src = u - lo, v - lo
        o_old = op[dst]
        o_new = op[src]
        if o_old != o_new:
            counts[o_old] -= 1
            if counts[o_old] == 0:
                distinct -= 1
            counts[o_new] += 1
            op[dst] = o_new
    return t, events, False


@numba.njit(cache=True)
def _slot_rate(indptr, indices, degree, v, u, dyn, theta):
    hv = degree[v] ** (theta - 1.0)
    if dyn == 0:
        return hv
    return 0.5 * (hv + degree[u] ** (theta - 1.0))


@numba.njit(cache=True)
def _voter_active(indptr, indices, rev, degree, lo, hi, op0, nop, dyn, theta, horizon, rng):
    # one Fenwick leaf per directed slot s = (v -> u): "v adopts u's opinion"
    m = hi - lo
    s0 = indptr[lo]
    ns = indptr[hi] - s0
    rate = np.empty(ns)
    src = np.empty(ns, np.int64)
    for v in range(lo, hi):
        for s in range(indptr[v], indptr[v + 1]):
            rate[s - s0] = _slot_rate(indptr, indices, degree, v, indices[s], dyn, theta)
            src[s - s0] = v
    op = op0.copy()
    counts = np.zeros(nop, np.int64)
    distinct = 0
    for k in range(m):
        if counts[op[k]] == 0:
            distinct += 1
        counts[op[k]] += 1
    w = np.zeros(ns)
    for s in range(ns):
        if op[src[s] - lo] != op[indices[s + s0] - lo]:
            w[s] = rate[s]
    tree = _fw_build(w)
    updates = 0
    t = 0.0
    events = 0
    while distinct > 1:
        total = _fw_total(tree)
        s = _fw_find(tree, rng.random() * total)
        if w[s] == 0.0:
            # rounding residue in the tree; rebuild and redraw the slot
            tree = _fw_build(w)
            updates = 0
            continue
        t += rng.standard_exponential() / total
        if t > horizon:
            return horizon, events, True
        v = src[s] - lo
        u = indices[s + s0] - lo
        events += 1
        o_old = op[v]
        o_new = op[u]
        counts[o_old] -= 1
        if counts[o_old] == 0:
            distinct -= 1
        counts[o_new] += 1
        op[v] = o_new
        gv = v + lo
        for sl in range(indptr[gv], indptr[gv + 1]):
            x = indices[sl] - lo
            disc = op[x] != o_new
            for ss in (sl - s0, rev[sl] - s0):
                nw = rate[ss] if disc else 0.0
                if nw != w[ss]:
                    _fw_add(tree, ss, nw - w[ss])
                    w[ss] = nw
                    updates += 1
        if updates > 4 * ns + 64:
            tree = _fw_build(w)
            updates = 0
    return t, events, False


def _voter_reference(indptr, indices, degree, lo, hi, op0, dyn, theta, horizon, gen):
    """One exponential clock per ordered adjacent pair ``(i, j)`` firing
    ``i <- j``; pure Python, for cross-checking only."""
    op = list(op0)
    counts = {}
    for o in op:
        counts[o] = counts.get(o, 0) + 1
    heap = []
    rates = {}
    for v in range(lo, hi):
        for s in range(indptr[v], indptr[v + 1]):
            u = int(indices[s])
            hv = degree[v] ** (theta - 1.0)
            r = hv if dyn == 0 else 0.5 * (hv + degree[u] ** (theta - 1.0))
            rates[(v, u)] = r
            heap.append((gen.standard_exponential() / r, v, u))
    heapq.heapify(heap)
    events = 0
    t = 0.0
    while len(counts) > 1:
        t, v, u = heapq.heappop(heap)
        if t > horizon:
            return horizon, events, True
        events += 1
        heapq.heappush(heap, (t + gen.standard_exponential() / rates[(v, u)], v, u))
        a, b = op[v - lo], op[u - lo]
        if a != b:
            counts[a] -= 1
            if counts[a] == 0:
                del counts[a]
            counts[b] = counts.get(b, 0) + 1
            op[v - lo] = b
    return t, events, False


# -- coalescing kernel -----------------------------------------------------------------

@numba.njit(cache=True)
def _jump_tables(indptr, indices, degree, lo, hi, dyn, theta):
    s0 = indptr[lo]
    ns = indptr[hi] - s0
    cum = np.empty(ns)
    q = np.empty(hi - lo)
    for v in range(lo, hi):
        acc = 0.0
        for s in range(indptr[v], indptr[v + 1]):
            acc += _slot_rate(indptr, indices, degree, v, indices[s], dyn, theta)
            cum[s - s0] = acc
        q[v - lo] = acc
    return cum, q


@numba.njit(cache=True)
def _destination(indptr, indices, cum, s0, v, qv, rng):
    a, b = indptr[v], indptr[v + 1]
    r = rng.random() * qv
    k = np.searchsorted(cum[a - s0:b - s0], r, side="right")
    if k >= b - a:
        k = b - a - 1
    return indices[a + k]


@numba.njit(cache=True)
def _coalesce(indptr, indices, degree, lo, hi, occ0, dyn, theta, horizon, rng):
    m = hi - lo
    s0 = indptr[lo]
    cum, q = _jump_tables(indptr, indices, degree, lo, hi, dyn, theta)
    occ = occ0.copy()
    w = np.zeros(m)
    count = 0
    for k in range(m):
        if occ[k]:
            w[k] = q[k]
            count += 1
    tree = _fw_build(w)
    updates = 0
    t = 0.0
    jumps = 0
    while count > 1:
        total = _fw_total(tree)
        k = _fw_find(tree, rng.random() * total)
        if not occ[k]:
            tree = _fw_build(w)
            updates = 0
            continue
        t += rng.standard_exponential() / total
        if t > horizon:
            return horizon, jumps, True
        u = _destination(indptr, indices, cum, s0, k + lo, q[k], rng) - lo
        jumps += 1
        occ[k] = False
        _fw_add(tree, k, -w[k])
        w[k] = 0.0
        if occ[u]:
            count -= 1
        else:
            occ[u] = True
            _fw_add(tree, u, q[u])
            w[u] = q[u]
        updates += 2
        if updates > 4 * m + 64:
            tree = _fw_build(w)
            updates = 0
    return t, jumps, False


@numba.njit(cache=True)
def _walk(indptr, indices, degree, lo, hi, start, steps, dyn, theta, rng):
    s0 = indptr[lo]
    cum, q = _jump_tables(indptr, indices, degree, lo, hi, dyn, theta)
    path = np.empty(steps + 1, np.int64)
    hold = np.empty(steps)
    path[0] = start
    v = start
    for i in range(steps):
        hold[i] = rng.standard_exponential() / q[v - lo]
        v = _destination(indptr, indices, cum, s0, v, q[v - lo], rng)
        path[i + 1] = v
    return path, hold


# -- public simulators ------------------------------------------------------------------

def _horizon(h):
    return math.inf if h is None else float(h)


def _block(stream: RngStream, index: int, tag: int, scratch):
    return stream.block(index, tag) if scratch is None else stream.reseat(scratch, index, tag)


def _initial_opinions(lay: Layout, cfg: VoterConfig, stream: RngStream, scratch=None):
    """Opinions in layout order.  Bernoulli draws are indexed by vertex label,
    so a vertex's initial opinion does not depend on the rest of the graph."""
    if cfg.init == "unique":
        local = np.arange(lay.n, dtype=np.int64)
        return local - np.repeat(lay.lo, lay.hi - lay.lo), None
    draws = _block(stream, 0, _TAG_INIT, scratch).random(lay.n + 1)
    return (draws[lay.order] < cfg.u).astype(np.int64), 2


def _run_voter(lay: Layout, cfg: VoterConfig, stream: RngStream, only=None, scratch=None):
    ops, nop = _initial_opinions(lay, cfg, stream, scratch)
    dyn = _DYN[cfg.dynamics]
    horizon = _horizon(cfg.horizon)
    reps, taus = [], []
    events = 0
    censored = False
    for c in range(len(lay.lo)) if only is None else only:
        lo, hi = int(lay.lo[c]), int(lay.hi[c])
        if hi - lo < 2:
            continue
        op0 = ops[lo:hi]
        reps.append(int(lay.reps[c]))
        if nop == 2 and (op0 == op0[0]).all():
            taus.append(0.0)
            continue
        k = hi - lo if nop is None else nop
        gen = _block(stream, int(lay.reps[c]), _TAG_DYN, scratch)
        if cfg.mode == "naive":
            t, e, cen = _voter_naive(lay.indptr, lay.indices, lay.degree, lo, hi, op0, k, dyn,
                                     float(cfg.theta), horizon, gen)
        elif cfg.mode == "active":
            t, e, cen = _voter_active(lay.indptr, lay.indices, lay.rev, lay.degree, lo, hi, op0, k,
                                      dyn, float(cfg.theta), horizon, gen)
        else:
            t, e, cen = _voter_reference(lay.indptr, lay.indices, lay.degree, lo, hi, op0, dyn,
                                         float(cfg.theta), horizon, gen)
        taus.append(t)
        events += e
        censored |= cen
    return np.array(reps, np.int64), np.array(taus), events, censored


def simulate_voter(g: Graph, cfg: VoterConfig, rng, components_only=None) -> SimOutcome:
    """Run one voter realisation on every component of ``g``.

    Args:
        g: simple graph.
        cfg: dynamics, temperature, initial law, horizon and scheduler mode.
        rng: an :class:`RngStream` (or a seed).  Component ``C`` runs on the
            block sub-stream keyed by ``min(C)``.
        components_only: optional list of representatives to simulate; the
            others are skipped (their streams are untouched).

    Returns:
        SimOutcome with ``tau_cons`` the maximum over components.
    """
    t0 = time.perf_counter()
    stream = as_stream(rng, "voter")
    lay = layout(g)
    only = None
    if components_only is not None:
        cid = components(g).component_id
        only = sorted({int(cid[int(r)]) for r in components_only})
    reps, taus, events, censored = _run_voter(lay, cfg, stream, only)
    tau = float(taus.max()) if len(taus) else 0.0
    return SimOutcome(tau, reps, taus, events, censored, time.perf_counter() - t0)


def _pair_starts(lay: Layout, g: Graph, cfg: CoalConfig, stream: RngStream, scratch=None):
    if cfg.starts == "pair":
        x, y = (int(v) for v in cfg.pair)
        cid = components(g).component_id
        if cid[x] != cid[y]:
            raise ValueError("pair lies in two different components; the walkers never meet")
        return int(cid[x]), [x, y]
    c = int(components(g).component_id[cfg.root])
    lo, hi = int(lay.lo[c]), int(lay.hi[c])
    d = lay.degree[lo:hi]
    if cfg.dynamics == "classical":
        pi = d ** (1.0 - cfg.theta) if hi - lo > 1 else np.ones(1)
    else:
        pi = np.ones(hi - lo)
    pi = pi / pi.sum()
    gen = _block(stream, int(lay.reps[c]), _TAG_INIT, scratch)
    xy = gen.choice(hi - lo, size=2, p=pi)
    return c, [int(lay.order[lo + xy[0]]), int(lay.order[lo + xy[1]])]


def _run_coal(lay: Layout, g: Graph, cfg: CoalConfig, stream: RngStream, only=None, scratch=None):
    dyn = _DYN[cfg.dynamics]
    horizon = _horizon(cfg.horizon)
    reps, taus = [], []
    jumps = 0
    censored = False
    if cfg.starts == "all":
        plan = [(c, None) for c in (range(len(lay.lo)) if only is None else only)]
    else:
        plan = [_pair_starts(lay, g, cfg, stream, scratch)]
    for c, walkers in plan:
        lo, hi = int(lay.lo[c]), int(lay.hi[c])
        if hi - lo < 2:
            continue
        reps.append(int(lay.reps[c]))
        if walkers is None:
            occ = np.ones(hi - lo, np.bool_)
        else:
            occ = np.zeros(hi - lo, np.bool_)
            for v in walkers:
                occ[lay.pos[v] - lo] = True
        if occ.sum() < 2:
            taus.append(0.0)
            continue
        gen = _block(stream, int(lay.reps[c]), _TAG_DYN, scratch)
        t, j, cen = _coalesce(lay.indptr, lay.indices, lay.degree, lo, hi, occ, dyn,
                              float(cfg.theta), horizon, gen)
        taus.append(t)
        jumps += j
        censored |= cen
    return np.array(reps, np.int64), np.array(taus), jumps, censored


def simulate_coalescing(g: Graph, cfg: CoalConfig, rng, components_only=None) -> CoalOutcome:
    """Coalescing walks with jump rates ``Q(v, .)`` of the chosen dynamics.

    The state is the set of occupied vertices; a walker that jumps onto an
    occupied vertex merges with it.  With ``starts="all"`` every component is
    run on its own sub-stream and ``tau_coal`` is the maximum.
    """
    t0 = time.perf_counter()
    stream = as_stream(rng, "coalescing")
    lay = layout(g)
    only = None
    if components_only is not None:
        cid = components(g).component_id
        only = sorted({int(cid[int(r)]) for r in components_only})
    reps, taus, jumps, censored = _run_coal(lay, g, cfg, stream, only)
    tau = float(taus.max()) if len(taus) else 0.0
    return CoalOutcome(tau, reps, taus, jumps, censored, time.perf_counter() - t0)


def walk_path(g: Graph, start: int, steps: int, dynamics: str = "classical", theta: float = 0.0,
              rng=None):
    """Jump chain and holding times of a single walker from ``start``.

    Returns ``(vertices, holds)`` with ``steps + 1`` vertex labels.
    """
    lay = layout(g)
    c = int(components(g).component_id[start])
    lo, hi = int(lay.lo[c]), int(lay.hi[c])
    if hi - lo < 2:
        raise ValueError("start vertex is isolated")
    gen = as_stream(rng, "walk").block(int(lay.reps[c]), _TAG_DYN)
    path, hold = _walk(lay.indptr, lay.indices, lay.degree, lo, hi, int(lay.pos[start]), int(steps),
                       _DYN[dynamics], float(theta), gen)
    return lay.order[path], hold


# -- batches -----------------------------------------------------------------------------

@dataclass
class BatchStats:
    values: np.ndarray
    reps: int
    n_censored: int
    mean: float
    var: float
    stderr: float
    q05: float
    q50: float
    q95: float
    seed: int
    purpose: str
    meta: dict = field(default_factory=dict)

    def record(self) -> dict:
        """JSON record ``{N, beta, gamma, variant, dynamics, theta, init, reps,
        mean, stderr, q05, q50, q95, seed}`` (plus censoring count)."""
        out = {k: self.meta.get(k) for k in ("N", "beta", "gamma", "variant", "dynamics", "theta", "init")}
        out.update(reps=self.reps, mean=self.mean, stderr=self.stderr, q05=self.q05, q50=self.q50,
                   q95=self.q95, seed=self.seed, n_censored=self.n_censored)
        return out

    def to_json(self) -> str:
        return json.dumps(self.record(), sort_keys=True)


def summarize(values, censored=None, seed=0, purpose="", meta=None) -> BatchStats:
    values = np.asarray(values, dtype=np.float64)
    cen = np.zeros(len(values), bool) if censored is None else np.asarray(censored, bool)
    x = values[~cen]
    n = len(x)
    if n == 0:
        nan = float("nan")
        return BatchStats(values, 0, int(cen.sum()), nan, nan, nan, nan, nan, nan, seed, purpose, meta or {})
    var = float(x.var(ddof=1)) if n > 1 else 0.0
    q05, q50, q95 = (float(v) for v in np.quantile(x, [0.05, 0.5, 0.95]))
    return BatchStats(values, n, int(cen.sum()), float(x.mean()), var, math.sqrt(var / n),
                      q05, q50, q95, seed, purpose, dict(meta or {}))


def batch(g: Graph, cfg, reps: int, rng, meta=None) -> BatchStats:
    """Independent replicates on a fixed graph; replicate ``i`` uses stream
    ``(seed, purpose, i)``.  ``cfg`` is a :class:`VoterConfig` or a
    :class:`CoalConfig`.  Censored replicates are excluded from the
    statistics and counted."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    voter = isinstance(cfg, VoterConfig)
    stream = as_stream(rng, "voter" if voter else "coalescing")
    lay = layout(g)
    vals = np.empty(reps)
    cen = np.zeros(reps, bool)
    scratch = stream.block()  # one bit generator, reseated per block
    for i in range(reps):
        s = stream.with_replicate(i)
        if voter:
            _, taus, _, c = _run_voter(lay, cfg, s, scratch=scratch)
        else:
            _, taus, _, c = _run_coal(lay, g, cfg, s, scratch=scratch)
        vals[i] = taus.max() if len(taus) else 0.0
        cen[i] = c
    info = {"N": g.n, "beta": g.meta.get("beta"), "gamma": g.meta.get("gamma"),
            "variant": g.meta.get("variant"), "dynamics": cfg.dynamics, "theta": cfg.theta,
            "init": (cfg.init if voter else f"coalescing:{cfg.starts}")}
    info.update(meta or {})
    return summarize(vals, cen, stream.seed, stream.purpose, info)
