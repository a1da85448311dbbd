"""Exact quantities for the random walks dual to the voter models.

Given one connected component and a dynamics, :func:`build_generator` returns
the rate matrix ``Q`` of the walk that traces opinions backwards:

* classical:  ``Q(i, j) = d(i)**(theta - 1)`` for ``i ~ j``
* discursive: ``Q(i, j) = (d(i)**(theta - 1) + d(j)**(theta - 1)) / 2``

Both are reversible, with stationary law proportional to ``d**(1 - theta)``
(classical) or uniform (discursive).  Everything else here is exact linear
algebra on that chain or on chains built from it: hitting times, meeting
times of two independent copies (also observed on a subset), full
coalescence, voter consensus from Bernoulli or all-distinct opinions,
relaxation and mixing times, and an audit of the inequalities relating them.

Problem sizes are capped (see :data:`CAPS`); exceeding a cap raises
:class:`CapExceeded` rather than approximating.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graphgen import Graph

DYNAMICS = ("classical", "discursive")

CAPS = {
    "hit": 2000,       # states for hitting-time solves
    "product": 200,    # states for the two-walker product chain
    "coal": 7,         # states for the occupied-set coalescence chain
    "voter": 12,       # states for the {0,1}-voter chain (2**n configurations)
    "unique": 7,       # states for the voter chain on opinion partitions
    "cut_exhaustive": 12,
}

RESIDUAL_TOL = 1e-9


class CapExceeded(RuntimeError):
    pass


class SolveError(RuntimeError):
    pass


def _cap(kind: str, n: int, cap=None):
    limit = CAPS[kind] if cap is None else cap
    if n > limit:
        raise CapExceeded(f"{kind} solve needs {n} states, cap is {limit}")


def _check_dynamics(dynamics):
    if dynamics not in DYNAMICS:
        raise ValueError(f"dynamics must be one of {DYNAMICS}, got {dynamics!r}")


# -- generator ---------------------------------------------------------------

@dataclass
class RateMatrix:
    """Generator of a reversible chain on the vertices ``states``.

    ``rates`` holds the off-diagonal entries (sparse); ``exit[i] = -Q(i, i)``.
    ``degrees`` is set when the chain comes from a graph.
    """

    states: np.ndarray
    rates: sp.csr_matrix
    dynamics: str | None = None
    theta: float | None = None
    degrees: np.ndarray | None = None

    def __post_init__(self):
        self.rates = sp.csr_matrix(self.rates)
        self.exit = np.asarray(self.rates.sum(axis=1)).ravel()

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def Q(self) -> np.ndarray:
        q = self.rates.toarray()
        np.fill_diagonal(q, -self.exit)
        return q

    def Q_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.rates - sp.diags(self.exit))

    def index(self, v: int) -> int:
        pos = np.searchsorted(self.states, v)
        if pos >= self.n or self.states[pos] != v:
            raise KeyError(v)
        return int(pos)

    @classmethod
    def from_dense(cls, Q, states=None) -> "RateMatrix":
        Q = np.array(Q, dtype=np.float64)
        off = Q.copy()
        np.fill_diagonal(off, 0.0)
        if (off < 0).any():
            raise ValueError("off-diagonal rates must be non-negative")
        states = np.arange(1, len(Q) + 1) if states is None else np.asarray(states)
        return cls(states=states, rates=sp.csr_matrix(off))


def build_generator(g: Graph, comp=None, dynamics: str = "classical", theta: float = 0.0) -> RateMatrix:
    """Walk generator on one connected component of a simple graph.

    ``comp`` defaults to all vertices (the graph must then be connected).
    """
    _check_dynamics(dynamics)
    if not g.is_simple:
        raise ValueError("generators are defined on simple graphs; collapse() first")
    comp = np.arange(1, g.n + 1) if comp is None else np.sort(np.asarray(comp, dtype=np.int64))
    deg = g.degrees[comp].astype(np.float64)
    if len(comp) > 1 and (deg == 0).any():
        raise ValueError("isolated vertex inside a component of size > 1")
    pos = {int(v): i for i, v in enumerate(comp)}
    rows, cols = [], []
    for i, v in enumerate(comp):
        for u in g.neighbors(int(v)):
            j = pos.get(int(u))
            if j is None:
                raise ValueError(f"vertex set is not closed: {int(v)} ~ {int(u)}")
            rows.append(i)
            cols.append(j)
    rows = np.array(rows, dtype=np.int64)
    cols = np.array(cols, dtype=np.int64)
    with np.errstate(divide="ignore"):
        h = np.where(deg > 0, deg ** (theta - 1.0), 0.0)
    if dynamics == "classical":
        vals = h[rows]
    else:
        vals = 0.5 * (h[rows] + h[cols])
    rates = sp.csr_matrix((vals, (rows, cols)), shape=(len(comp), len(comp)))
    if len(comp) > 1:
        from scipy.sparse.csgraph import connected_components
        if connected_components(rates, directed=False)[0] != 1:
            raise ValueError("vertex set is not connected")
    return RateMatrix(states=comp, rates=rates, dynamics=dynamics, theta=theta,
                      degrees=g.degrees[comp].copy())


def stationary(rm: RateMatrix, dynamics: str | None = None, theta: float | None = None) -> np.ndarray:
    """Stationary law: ``d**(1-theta)`` normalised (classical), uniform (discursive).

    Chains without a dynamics label are solved numerically.  The result is
    checked against ``pi Q = 0``.
    """
    dynamics = rm.dynamics if dynamics is None else dynamics
    theta = rm.theta if theta is None else theta
    if rm.n == 1:
        return np.ones(1)
    if dynamics == "classical":
        pi = rm.degrees.astype(np.float64) ** (1.0 - theta)
    elif dynamics == "discursive":
        pi = np.ones(rm.n)
    else:
        Q = rm.Q
        A = np.vstack([Q.T, np.ones(rm.n)])
        b = np.zeros(rm.n + 1)
        b[-1] = 1.0
        pi = np.linalg.lstsq(A, b, rcond=None)[0]
    pi = pi / pi.sum()
    scale = max(1.0, float(np.abs(rm.exit).max()))
    resid = np.abs(rm.Q_sparse().T @ pi).max() / scale
    if resid > 1e-12:
        raise SolveError(f"pi Q = 0 violated (residual {resid:.2e})")
    return pi


def detailed_balance_residual(rm: RateMatrix, pi) -> float:
    F = sp.diags(pi) @ rm.rates
    return float(abs(F - F.T).max()) if rm.n > 1 else 0.0


def conductances(rm: RateMatrix, pi=None) -> sp.csr_matrix:
    """Ergodic flows ``c(ij) = pi(i) Q(i, j)`` (symmetric, sparse)."""
    pi = stationary(rm) if pi is None else pi
    return sp.csr_matrix(sp.diags(pi) @ rm.rates)


def _check_residual(A, x, b, what):
    r = A @ x - b
    bn = max(np.abs(b).max(), 1e-300)
    if np.abs(r).max() > RESIDUAL_TOL * max(bn, 1.0) * max(1.0, np.abs(x).max() / max(bn, 1.0)):
        raise SolveError(f"{what}: residual {np.abs(r).max():.3e} too large")


def _dense_solve(A, b, what):
    lu = sla.lu_factor(A)
    x = sla.lu_solve(lu, b)
    _check_residual(A, x, b, what)
    return x


def _sparse_solve(A, b, what):
    A = sp.csc_matrix(A)
    x = spla.splu(A).solve(np.asarray(b, dtype=np.float64))
    _check_residual(A, x, b, what)
    return x


# -- hitting ------------------------------------------------------------------

@dataclass
class HittingTimes:
    """``matrix[x, y] = E_x T_y``; ``per_target[s] = max_x E_x T_s``."""

    matrix: np.ndarray
    t_hit: float
    per_target: np.ndarray
    worst_pair: tuple


def hitting_times(rm: RateMatrix, cap=None, method: str = "auto") -> HittingTimes:
    """Expected hitting times between all pairs of states.

    ``method="direct"`` solves ``-Q_{-y} h = 1`` once per target with a dense
    LU.  ``method="fundamental"`` uses one factorisation of ``Pi - Q`` and
    ``E_x T_y = (Z_yy - Z_xy) / pi_y``.  ``auto`` picks direct below 150
    states.  Both are residual-checked against every target's system.
    """
    n = rm.n
    _cap("hit", n, cap)
    if n == 1:
        return HittingTimes(np.zeros((1, 1)), 0.0, np.zeros(1), (rm.states[0], rm.states[0]))
    Q = rm.Q
    if method == "auto":
        method = "direct" if n < 150 else "fundamental"
    if method == "direct":
        H = np.zeros((n, n))
        for y in range(n):
            keep = np.r_[0:y, y + 1:n]
            H[keep, y] = _dense_solve(-Q[np.ix_(keep, keep)], np.ones(n - 1), "hitting")
    elif method == "fundamental":
        pi = stationary(rm)
        Pi = np.tile(pi, (n, 1))
        Z = np.linalg.inv(Pi - Q) - Pi
        H = (np.diag(Z)[None, :] - Z) / pi[None, :]
        np.fill_diagonal(H, 0.0)
    else:
        raise ValueError(f"unknown method {method!r}")
    # every target system at once: (Q H)[x, y] = -1 for x != y
    R = Q @ H + 1.0
    np.fill_diagonal(R, 0.0)
    if np.abs(R).max() > RESIDUAL_TOL * max(1.0, np.abs(Q).max() * np.abs(H).max()):
        raise SolveError(f"hitting: residual {np.abs(R).max():.3e} too large")
    per = H.max(axis=0)
    x, y = np.unravel_index(np.argmax(H), H.shape)
    return HittingTimes(H, float(H.max()), per, (int(rm.states[x]), int(rm.states[y])))


# -- meeting -------------------------------------------------------------------

def product_generator(rm: RateMatrix) -> sp.csr_matrix:
    """Generator of two independent copies on ordered pairs, index ``x * n + y``."""
    Q = rm.Q_sparse()
    I = sp.identity(rm.n, format="csr")
    return sp.csr_matrix(sp.kron(Q, I) + sp.kron(I, Q))


@dataclass
class MeetingTimes:
    """``matrix[x, y] = E_{x,y} tau_meet``; ``t_meet`` is its max and
    ``t_meet_pi`` its ``pi x pi`` average."""

    matrix: np.ndarray
    t_meet: float
    t_meet_pi: float


def meeting_times(rm: RateMatrix, pi=None, cap=None) -> MeetingTimes:
    n = rm.n
    _cap("product", n, cap)
    pi = stationary(rm) if pi is None else np.asarray(pi)
    M = np.zeros((n, n))
    if n > 1:
        P = product_generator(rm)
        off = np.array([x * n + y for x in range(n) for y in range(n) if x != y])
        A = -P[off][:, off]
        m = _sparse_solve(A, np.ones(len(off)), "meeting")
        M.flat[off] = m
    return MeetingTimes(M, float(M.max()), float(pi @ M @ pi))


@dataclass
class ObservedMeeting:
    """Meeting of the product chain observed (censored) on ``A x A``.

    ``matrix`` is indexed by positions in ``subset``; ``t_meet_pi`` averages
    it over ``pi x pi`` restricted to ``A x A`` and renormalised.
    """

    subset: np.ndarray
    matrix: np.ndarray
    t_meet_pi: float
    pi_A: float


def observed_meeting(rm: RateMatrix, subset, pi=None, cap=None) -> ObservedMeeting:
    """Exact subset meeting time by censoring the product chain onto ``A x A``.

    The censored generator is the Schur complement
    ``G = Q_SS + Q_SB (-Q_BB)^{-1} Q_BS`` with ``S = A x A``; meeting is
    absorption in the diagonal of ``S``.  Time only runs while both walkers
    sit in ``A``.
    """
    n = rm.n
    _cap("product", n, cap)
    pi = stationary(rm) if pi is None else np.asarray(pi)
    A_idx = np.array(sorted({rm.index(int(v)) for v in subset}), dtype=np.int64)
    if len(A_idx) == 0:
        raise ValueError("subset must be non-empty")
    a = len(A_idx)
    S = (A_idx[:, None] * n + A_idx[None, :]).ravel()
    inS = np.zeros(n * n, bool)
    inS[S] = True
    B = np.nonzero(~inS)[0]
    P = product_generator(rm)
    G = P[S][:, S].toarray()
    if len(B):
        QBB = sp.csc_matrix(-P[B][:, B])
        QBS = P[B][:, S].toarray()
        lu = spla.splu(QBB)
        X = lu.solve(QBS)
        _check_residual(QBB, X, QBS, "censoring")
        G = G + P[S][:, B] @ X
    diag_local = np.array([i * a + i for i in range(a)])
    off_local = np.setdiff1d(np.arange(a * a), diag_local)
    Mloc = np.zeros(a * a)
    if len(off_local):
        # every off-diagonal state must reach the diagonal
        reach = np.zeros(a * a, bool)
        reach[diag_local] = True
        adj = (np.abs(G) > 0)
        changed = True
        while changed:
            new = reach | adj[:, reach].any(axis=1)
            changed = bool((new != reach).any())
            reach = new
        if not reach.all():
            raise SolveError("A x A is disconnected from its diagonal under censoring")
        Mloc[off_local] = _dense_solve(-G[np.ix_(off_local, off_local)], np.ones(len(off_local)),
                                       "observed meeting")
    Mloc = Mloc.reshape(a, a)
    piA = pi[A_idx]
    mass = float(piA.sum())
    return ObservedMeeting(rm.states[A_idx], Mloc, float(piA @ Mloc @ piA) / mass**2, mass)


# -- coalescence and consensus -------------------------------------------------

def coalescence_time(rm: RateMatrix, cap=None, return_all: bool = False):
    """Expected time for walkers started on every state to coalesce.

    Walkers merge on contact, so the occupied set is a Markov chain on the
    non-empty subsets; absorption is at the singletons.
    """
    n = rm.n
    _cap("coal", n, cap)
    if n == 1:
        return (0.0, {1: 0.0}) if return_all else 0.0
    Q = rm.Q
    full = (1 << n) - 1
    states = [s for s in range(1, full + 1) if bin(s).count("1") >= 2]
    pos = {s: i for i, s in enumerate(states)}
    rows, cols, vals = [], [], []
    diag = np.zeros(len(states))
    for s in states:
        i = pos[s]
        for v in range(n):
            if not s >> v & 1:
                continue
            for u in range(n):
                r = Q[v, u]
                if u == v or r == 0:
                    continue
                diag[i] += r
                t = (s & ~(1 << v)) | (1 << u)
                j = pos.get(t)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    vals.append(-r)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(states), len(states))) + sp.diags(diag)
    h = _sparse_solve(A, np.ones(len(states)), "coalescence")
    if return_all:
        return float(h[pos[full]]), {s: float(h[pos[s]]) for s in states}
    return float(h[pos[full]])


def _voter_binary(rm: RateMatrix):
    n = rm.n
    Q = rm.Q
    full = (1 << n) - 1
    states = list(range(1, full))  # 0 and full are absorbing
    pos = {s: i for i, s in enumerate(states)}
    rows, cols, vals = [], [], []
    diag = np.zeros(len(states))
    for s in states:
        i = pos[s]
        for a in range(n):
            for b in range(n):
                r = Q[a, b]
                if a == b or r == 0 or ((s >> a) & 1) == ((s >> b) & 1):
                    continue
                diag[i] += r
                t = s ^ (1 << a)
                j = pos.get(t)
                if j is not None:
                    rows.append(i)
                    cols.append(j)
                    vals.append(-r)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(states), len(states))) + sp.diags(diag)
    h = _sparse_solve(A, np.ones(len(states)), "voter")
    out = np.zeros(full + 1)
    out[states] = h
    return out


def _canonical(labels):
    seen = {}
    return tuple(seen.setdefault(x, len(seen)) for x in labels)


def _voter_partitions(rm: RateMatrix) -> float:
    """Voter chain from all-distinct opinions, on opinion partitions."""
    n = rm.n
    Q = rm.Q
    start = tuple(range(n))
    states = {start: 0}
    order = [start]
    trans = []
    i = 0
    while i < len(order):
        s = order[i]
        out = {}
        for a in range(n):
            for b in range(n):
                r = Q[a, b]
                if a == b or r == 0 or s[a] == s[b]:
                    continue
                t = list(s)
                t[a] = s[b]
                t = _canonical(t)
                out[t] = out.get(t, 0.0) + r
        for t in out:
            if t not in states:
                states[t] = len(order)
                order.append(t)
        trans.append(out)
        i += 1
    absorbing = tuple([0] * n)
    live = [s for s in order if s != absorbing]
    pos = {s: k for k, s in enumerate(live)}
    rows, cols, vals = [], [], []
    diag = np.zeros(len(live))
    for s, out in zip(order, trans):
        if s == absorbing:
            continue
        k = pos[s]
        for t, r in out.items():
            diag[k] += r
            if t in pos:
                rows.append(k)
                cols.append(pos[t])
                vals.append(-r)
    A = sp.csr_matrix((vals, (rows, cols)), shape=(len(live), len(live))) + sp.diags(diag)
    h = _sparse_solve(A, np.ones(len(live)), "voter partitions")
    return float(h[pos[start]])


def consensus_time(rm: RateMatrix, init="unique", u: float | None = None, cap=None) -> float:
    """Expected consensus time of the voter model driven by ``rm``.

    ``init`` is ``"unique"`` (all opinions distinct; solved on the chain of
    opinion partitions, independently of the coalescing walks),
    ``"bernoulli"`` with probability ``u`` (exact average over the product
    law of the ``{0,1}`` voter chain), or an explicit 0/1 configuration.
    """
    n = rm.n
    if n == 1:
        return 0.0
    if isinstance(init, str) and init == "unique":
        _cap("unique", n, cap)
        return _voter_partitions(rm)
    if isinstance(init, str) and init == "bernoulli":
        if u is None or not 0 < u < 1:
            raise ValueError("bernoulli init needs 0 < u < 1")
        _cap("voter", n, cap)
        h = _voter_binary(rm)
        s = np.arange(1 << n)
        ones = np.array([bin(x).count("1") for x in s])
        prob = u ** ones * (1 - u) ** (n - ones)
        return float(prob @ h)
    config = np.asarray(init, dtype=np.int64)
    if len(config) != n:
        raise ValueError("configuration length must match the state count")
    if (config == config[0]).all():
        return 0.0
    _cap("voter", n, cap)
    h = _voter_binary(rm)
    return float(h[int(sum(int(b) << i for i, b in enumerate(config)))])


# -- spectral ------------------------------------------------------------------

@dataclass
class SpectralResult:
    t_rel: float
    t_mix: float
    t_mix_from: np.ndarray
    times: np.ndarray
    d: np.ndarray
    eigenvalues: np.ndarray


class _Semigroup:
    """``P_t`` via the spectral decomposition of the symmetrised generator."""

    def __init__(self, rm: RateMatrix, pi):
        self.pi = pi
        s = np.sqrt(pi)
        S = (s[:, None] * rm.Q) / s[None, :]
        S = 0.5 * (S + S.T)
        self.mu, self.V = np.linalg.eigh(S)
        self.s = s

    def P(self, t):
        E = (self.V * np.exp(self.mu * t)) @ self.V.T
        return E * (self.s[None, :] / self.s[:, None])

    def tv_rows(self, t):
        return 0.5 * np.abs(self.P(t) - self.pi[None, :]).sum(axis=1)


def _crossing(f, lo, hi, rtol=1e-6):
    # f non-increasing, f(lo) > 1/4 >= f(hi)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if f(mid) <= 0.25:
            hi = mid
        else:
            lo = mid
    return hi


def spectral(rm: RateMatrix, pi=None, cap=None, grid_points: int = 200) -> SpectralResult:
    """Relaxation time, mixing time and the worst-case TV curve ``d(t)``.

    ``t_mix`` is the first ``t`` with ``d(t) <= 1/4``, located on a
    log-spaced grid and refined by bisection to ``1e-6`` relative.
    ``t_mix_from[i]`` is the same threshold for the chain started at ``i``.
    """
    n = rm.n
    _cap("hit", n, cap)
    pi = stationary(rm) if pi is None else np.asarray(pi)
    if n == 1:
        return SpectralResult(0.0, 0.0, np.zeros(1), np.zeros(1), np.zeros(1), np.zeros(1))
    sg = _Semigroup(rm, pi)
    lam = np.sort(-sg.mu)
    gap = lam[1]
    t_rel = 1.0 / gap
    t_hi = t_rel
    while sg.tv_rows(t_hi).max() > 0.25:
        t_hi *= 2.0
    times = np.concatenate([[0.0], np.geomspace(t_rel * 1e-4, 4 * t_hi, grid_points)])
    dcurve = np.array([sg.tv_rows(t).max() for t in times])
    from_each = np.zeros(n)
    for i in range(n):
        fi = lambda t, i=i: sg.tv_rows(t)[i]
        if fi(0.0) <= 0.25:
            continue
        k = int(np.argmax([fi(t) <= 0.25 for t in times]))
        from_each[i] = _crossing(fi, times[k - 1], times[k])
    k = int(np.argmax(dcurve <= 0.25))
    t_mix = _crossing(lambda t: sg.tv_rows(t).max(), times[k - 1], times[k]) if k > 0 else 0.0
    return SpectralResult(float(t_rel), float(t_mix), from_each, times, dcurve, lam)


# -- bottleneck ------------------------------------------------------------------

def bottleneck_ratio(rm: RateMatrix, pi=None, rng=None, samples: int = 4096):
    """``max_A pi(A) pi(A^c) / sum_{x in A, y notin A} c(xy)``.

    Exhaustive over all cuts for at most ``CAPS['cut_exhaustive']`` states;
    otherwise random cuts plus single-state cuts.  Returns
    ``(value, cut, exhaustive)``.
    """
    n = rm.n
    pi = stationary(rm) if pi is None else np.asarray(pi)
    if n == 1:
        return 0.0, (), True
    C = conductances(rm, pi).toarray()
    exhaustive = n <= CAPS["cut_exhaustive"]
    if exhaustive:
        masks = np.arange(1, 1 << (n - 1))  # state n-1 always outside A
        member = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(bool)
    else:
        from .rng import as_generator
        gen = as_generator(rng if rng is not None else 0)
        member = gen.random((samples, n)) < 0.5
        member = np.vstack([member, np.eye(n, dtype=bool)])
        keep = member.any(axis=1) & ~member.all(axis=1)
        member = member[keep]
    best, cut = 0.0, ()
    for A in member:
        pa = pi[A].sum()
        flow = C[np.ix_(A, ~A)].sum()
        r = pa * (1 - pa) / flow
        if r > best:
            best, cut = r, tuple(int(v) for v in rm.states[A])
    return float(best), cut, exhaustive


# -- quantities and audit -------------------------------------------------------------

@dataclass
class ChainQuantities:
    n: int
    dynamics: str | None
    theta: float | None
    t_hit: float
    t_hit_per_target: list
    t_meet: float
    t_meet_pi: float
    t_coal: float | None
    t_cons_u: dict
    t_rel: float
    t_mix: float
    conductances: dict

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def chain_quantities(rm: RateMatrix, us=(0.5,)) -> ChainQuantities:
    pi = stationary(rm)
    hit = hitting_times(rm)
    meet = meeting_times(rm, pi)
    spec_ = spectral(rm, pi)
    t_coal = coalescence_time(rm) if rm.n <= CAPS["coal"] else None
    cons = {}
    if rm.n <= CAPS["voter"]:
        cons = {str(u): consensus_time(rm, "bernoulli", u) for u in us}
    C = conductances(rm, pi).tocoo()
    cond = {f"{int(rm.states[i])}-{int(rm.states[j])}": float(c)
            for i, j, c in zip(C.row, C.col, C.data) if i < j}
    return ChainQuantities(rm.n, rm.dynamics, rm.theta, hit.t_hit,
                           [float(x) for x in hit.per_target], meet.t_meet, meet.t_meet_pi,
                           t_coal, cons, spec_.t_rel, spec_.t_mix, cond)


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    passed: bool | None
    equality: bool = False
    note: str = ""

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass
class AuditReport:
    n: int
    dynamics: str | None
    theta: float | None
    checks: list = field(default_factory=list)
    observed: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.passed is not None)

    def failures(self) -> list:
        return [c for c in self.checks if c.passed is False]

    def get(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "n": self.n, "dynamics": self.dynamics, "theta": self.theta, "passed": self.passed,
            "checks": [dict(asdict(c), slack=c.slack) for c in self.checks],
            "observed": self.observed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)


def _le(name, lhs, rhs, note="", rtol=1e-9):
    lhs, rhs = float(lhs), float(rhs)
    eq = abs(lhs - rhs) <= rtol * max(abs(rhs), 1e-300)
    return Check(name, lhs, rhs, lhs <= rhs * (1 + rtol) + 1e-300, eq, note)


def _bfs_paths(adj, src):
    prev = {src: None}
    q = deque([src])
    while q:
        u = q.popleft()
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                q.append(v)
    return prev


def default_subsets(rm: RateMatrix) -> list:
    """Whole state space plus, when degrees are known, every star ``{k} + L_k``."""
    subsets = [tuple(int(v) for v in rm.states)]
    if rm.degrees is not None and rm.n > 2:
        adj = rm.rates.tolil().rows
        for i in range(rm.n):
            leaves = [j for j in adj[i] if rm.degrees[j] == 1]
            if leaves:
                star = tuple(sorted(int(rm.states[x]) for x in [i] + leaves))
                if star not in subsets:
                    subsets.append(star)
    return subsets


def bound_audit(rm: RateMatrix, pi=None, subsets=None) -> AuditReport:
    """Evaluate every constant-bearing inequality between the exact quantities.

    Each check records ``lhs <= rhs``.  The conductance lower bound on
    ``t_meet`` has an unspecified constant, so only the observed ratio
    ``t_meet / bottleneck`` is reported (under ``observed``).
    """
    n = rm.n
    pi = stationary(rm) if pi is None else np.asarray(pi)
    rep = AuditReport(n, rm.dynamics, rm.theta)
    if n == 1:
        return rep
    hit = hitting_times(rm)
    H = hit.matrix
    meet = meeting_times(rm, pi)
    spc = spectral(rm, pi)
    C = conductances(rm, pi).toarray()
    q = rm.exit

    if n <= CAPS["coal"]:
        t_coal = coalescence_time(rm)
        rep.checks.append(_le("meet_le_coal", meet.t_meet, t_coal))
        rep.checks.append(_le("coal_le_e_log_meet", t_coal, math.e * (math.log(n) + 2) * meet.t_meet))
    rep.checks.append(_le("meet_le_hit", meet.t_meet, hit.t_hit))
    rep.checks.append(_le("meet_pi_le_meet", meet.t_meet_pi, meet.t_meet))

    # commute times against series resistance along a shortest path
    adj = [list(np.nonzero(C[i] > 0)[0]) for i in range(n)]
    worst = None
    all_eq = True
    for i in range(n):
        prev = _bfs_paths(adj, i)
        for j in range(i + 1, n):
            r, v = 0.0, j
            while prev[v] is not None:
                r += 1.0 / C[prev[v], v]
                v = prev[v]
            c = _le("commute_le_path_resistance", H[i, j] + H[j, i], r,
                    note=f"pair ({int(rm.states[i])},{int(rm.states[j])})")
            all_eq &= c.equality
            # ties go to the longer path
            if worst is None or (c.lhs / c.rhs, c.rhs) > (worst.lhs / worst.rhs, worst.rhs):
                worst = c
    worst.equality = all_eq or worst.equality
    rep.checks.append(worst)
    ecc = [max(len_path(_bfs_paths(adj, i), j) for j in range(n)) for i in range(n)]
    diam = max(ecc)
    rep.checks.append(_le("hit_le_diam_max_resistance", hit.t_hit, diam * max(1.0 / C[C > 0])))

    # stationary meeting lower bound
    s2 = float((pi ** 2).sum())
    rep.checks.append(_le("meet_pi_lower_bound", (1 - s2) ** 2 / (4 * float((q * pi ** 2).sum())), meet.t_meet_pi))

    # bottleneck against relaxation, and the unknown conductance constant
    b, cut, exhaustive = bottleneck_ratio(rm, pi)
    rep.checks.append(_le("bottleneck_le_rel", b, spc.t_rel,
                          note="" if exhaustive else "sampled cuts: lower estimate of the max"))
    rep.observed["conductance_ratio_meet_over_bottleneck"] = meet.t_meet / b
    rep.observed["bottleneck_cut"] = list(cut)

    # mixing
    EpiT = pi @ H
    i_worst = int(np.argmax(spc.t_mix_from / (2 * EpiT)))
    rep.checks.append(_le("mix_from_le_2_Epi_T", spc.t_mix_from[i_worst], 2 * EpiT[i_worst],
                          note=f"start {int(rm.states[i_worst])}"))
    s_best = int(np.argmin(hit.per_target))
    rep.checks.append(_le("mix_le_16_hit_s", spc.t_mix, 16 * hit.per_target[s_best],
                          note=f"s = {int(rm.states[s_best])}"))
    rep.checks.append(_le("rel_over_const_le_mix", spc.t_rel / (1 + 1 / math.log(2)), spc.t_mix))
    ratio = hit.per_target / pi
    s_tree = int(np.argmin(ratio))
    rep.checks.append(_le("meet_le_189_hit_s_over_pi_s", meet.t_meet, 189 * ratio[s_tree],
                          note=f"s = {int(rm.states[s_tree])}"))

    # partial meeting, for each supplied subset
    for A in (default_subsets(rm) if subsets is None else subsets):
        om = observed_meeting(rm, A, pi)
        pa = om.pi_A
        rhs = 188 * hit.per_target[s_best] + 2 * om.t_meet_pi / pa ** 2 + 1568 * hit.per_target[s_best] / pa ** 4
        rep.checks.append(_le("partial_meeting", meet.t_meet, rhs, note=f"A = {list(A)}"))
        if (rm.dynamics == "classical" and rm.degrees is not None and len(A) > 1
                and any(rm.degrees[rm.index(v)] > 1 for v in A)):
            k = max(A, key=lambda v: rm.degrees[rm.index(v)])
            leaves = [v for v in A if v != k and rm.degrees[rm.index(v)] == 1]
            if len(leaves) == len(A) - 1:
                dk = float(rm.degrees[rm.index(k)])
                rep.checks.append(_le("star_observed_meeting", om.t_meet_pi, (3 + dk ** rm.theta) / 2,
                                      note=f"k = {k}"))
    return rep


def len_path(prev, j):
    k = 0
    while prev[j] is not None:
        j = prev[j]
        k += 1
    return k


# -- catalog ---------------------------------------------------------------------------

def _path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(1, n)])


def random_connected_graph(n: int, p: float, rng) -> Graph:
    from .rng import as_generator
    gen = as_generator(rng)
    pairs = list(itertools.combinations(range(1, n + 1), 2))
    while True:
        keep = gen.random(len(pairs)) < p
        g = Graph.from_edges(n, [e for e, k in zip(pairs, keep) if k])
        from .structure import components
        if len(components(g)) == 1:
            return g


def catalog(n_random: int = 20, seed: int = 20240501) -> dict:
    """Small connected test graphs: K2, P3, P4, K_{1,3}, C4, K4 and
    ``n_random`` seeded connected G(5, 1/2) graphs."""
    from .rng import RngStream
    out = {
        "K2": _path(2),
        "P3": _path(3),
        "P4": _path(4),
        "K13": Graph.from_edges(4, [(1, 2), (1, 3), (1, 4)]),
        "C4": Graph.from_edges(4, [(1, 2), (2, 3), (3, 4), (1, 4)]),
        "K4": Graph.from_edges(4, list(itertools.combinations(range(1, 5), 2))),
    }
    for r in range(n_random):
        out[f"R5_{r:02d}"] = random_connected_graph(5, 0.5, RngStream(seed, "catalog", r))
    return out
