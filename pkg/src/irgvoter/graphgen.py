"""Random graphs from the subcritical class G(beta, gamma).

Vertices are labelled ``1..n`` everywhere; the label is part of the model
because vertex ``i`` carries weight proportional to ``i**-gamma``.  Four
variants share the Chung-Lu kernel ``p_ij = min(beta * n**(2*gamma-1) *
i**-gamma * j**-gamma, 1)``:

* ``cl``  -- edge ``{i, j}`` present with probability ``p_ij``
* ``snr`` -- simple Norros-Reittu, probability ``1 - exp(-p_ij)``
* ``grg`` -- generalised random graph, probability ``p_ij / (1 + p_ij)``
* ``mnr`` -- Norros-Reittu multigraph, ``Pois(w(i) w(j) / w([n]))`` parallel
  edges per pair and ``Pois(w(i)**2 / w([n]))`` loops per vertex

Sampling is exact.  The default method walks each row ``i`` with geometric
skips over ``j > i`` (the edge probability is non-increasing in ``j``), which
costs ``O(n + edges)`` instead of ``O(n**2)``.  ``method="enumerate"`` draws
one uniform per pair and is kept as a reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numba
import numpy as np

from .rng import as_generator

VARIANTS = ("cl", "snr", "grg", "mnr")
_VARIANT_CODE = {v: k for k, v in enumerate(VARIANTS)}

# Loop mean is MNR_LOOP_FACTOR * w(i)**2 / w([n]); 1.0 keeps the root degree
# of the branching-process coupling exactly Pois(w(k)).
MNR_LOOP_FACTOR = 1.0


@dataclass(frozen=True)
class GraphSpec:
    """Parameters ``(n, beta, gamma, variant)`` of one member of the class.

    ``beta + 2*gamma < 1`` (subcriticality) is enforced unless
    ``allow_nonsubcritical`` is set.
    """

    n: int
    beta: float
    gamma: float
    variant: str = "cl"
    allow_nonsubcritical: bool = False

    def __post_init__(self):
        object.__setattr__(self, "variant", str(self.variant).lower())
        for msg in self.violations():
            raise ValueError(msg)

    def violations(self) -> list[str]:
        return spec_violations(self.n, self.beta, self.gamma, self.variant,
                               self.allow_nonsubcritical)

    @property
    def scale(self) -> float:
        """``beta * n**(2 gamma - 1)``, the common prefactor of all kernels."""
        return self.beta * self.n ** (2.0 * self.gamma - 1.0)

    @property
    def is_simple(self) -> bool:
        return self.variant != "mnr"

    def replace(self, **changes) -> "GraphSpec":
        fields = dict(n=self.n, beta=self.beta, gamma=self.gamma, variant=self.variant,
                      allow_nonsubcritical=self.allow_nonsubcritical)
        fields.update(changes)
        return GraphSpec(**fields)


def spec_violations(n, beta, gamma, variant="cl", allow_nonsubcritical=False) -> list[str]:
    out = []
    if int(n) != n or n < 2:
        out.append(f"n must be an integer >= 2, got {n}")
    if not beta > 0:
        out.append(f"beta must be positive, got {beta}")
    if not gamma > 0:
        out.append(f"gamma must be positive, got {gamma}")
    if str(variant).lower() not in VARIANTS:
        out.append(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    if beta > 0 and gamma > 0 and beta + 2 * gamma >= 1 and not allow_nonsubcritical:
        out.append(f"not subcritical: beta + 2*gamma = {beta + 2 * gamma:g} >= 1")
    return out


class Graph:
    """Immutable undirected (multi)graph on vertices ``1..n``.

    Adjacency is stored in CSR form with one slot per vertex label, so slot 0
    is always empty: the neighbours of ``v`` are
    ``indices[indptr[v]:indptr[v+1]]`` in increasing order, with the matching
    edge multiplicities in ``mult``.  ``loops[v]`` counts self-loops.
    """

    def __init__(self, n, indptr, indices, mult, loops, meta=None):
        self.n = int(n)
        self.indptr = _frozen(indptr, np.int64)
        self.indices = _frozen(indices, np.int64)
        self.mult = _frozen(mult, np.int64)
        self.loops = _frozen(loops, np.int64)
        self.meta = dict(meta or {})
        if len(self.indptr) != self.n + 2 or len(self.loops) != self.n + 1:
            raise ValueError("inconsistent adjacency arrays")

    @classmethod
    def from_edges(cls, n, edges=(), mult=None, loops=None, meta=None) -> "Graph":
        """Build from an iterable of ``(i, j)`` pairs with ``i != j``.

        Repeated pairs accumulate multiplicity.  ``loops`` is either a length
        ``n + 1`` count array or a mapping ``vertex -> count``.
        """
        e = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                       dtype=np.int64).reshape(-1, 2)
        m = np.ones(len(e), np.int64) if mult is None else np.asarray(mult, np.int64)
        if len(e) and (e.min() < 1 or e.max() > n):
            raise ValueError("vertex labels must lie in 1..n")
        if np.any(e[:, 0] == e[:, 1]):
            raise ValueError("self-loops go in `loops`, not in the edge list")
        lo = np.minimum(e[:, 0], e[:, 1])
        hi = np.maximum(e[:, 0], e[:, 1])
        if len(e):
            key = lo * (n + 1) + hi
            uniq, inv = np.unique(key, return_inverse=True)
            m = np.bincount(inv, weights=m).astype(np.int64)
            lo, hi = uniq // (n + 1), uniq % (n + 1)
            keep = m > 0
            lo, hi, m = lo[keep], hi[keep], m[keep]
        lp = np.zeros(n + 1, np.int64)
        if loops is not None:
            if isinstance(loops, dict):
                for v, c in loops.items():
                    lp[int(v)] += int(c)
            else:
                lp[:] = np.asarray(loops, np.int64)
        return cls._from_pairs(n, lo, hi, m, lp, meta)

    @classmethod
    def _from_pairs(cls, n, lo, hi, m, loops, meta=None) -> "Graph":
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        mm = np.concatenate([m, m])
        order = np.lexsort((dst, src))
        src, dst, mm = src[order], dst[order], mm[order]
        counts = np.bincount(src, minlength=n + 2)[: n + 2]
        indptr = np.zeros(n + 2, np.int64)
        indptr[1:] = np.cumsum(counts)[: n + 1]
        return cls(n, indptr, dst, mm, loops, meta)

    # -- queries -----------------------------------------------------------
    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def multiplicities(self, v: int) -> np.ndarray:
        return self.mult[self.indptr[v]:self.indptr[v + 1]]

    @cached_property
    def sources(self) -> np.ndarray:
        """Row label of every CSR entry (aligned with ``indices``)."""
        src = np.repeat(np.arange(self.n + 1, dtype=np.int64), np.diff(self.indptr))
        src.setflags(write=False)
        return src

    @cached_property
    def degrees(self) -> np.ndarray:
        """``d(v)`` for ``v = 0..n`` (entry 0 unused): edge endpoints, loops count 2."""
        d = np.bincount(self.sources, weights=self.mult, minlength=self.n + 1).astype(np.int64)
        d += 2 * self.loops
        d.setflags(write=False)
        return d

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    @property
    def is_simple(self) -> bool:
        return bool(np.all(self.mult == 1) and not self.loops.any())

    @property
    def edge_count(self) -> int:
        """Number of edges counted with multiplicity, loops included."""
        return int(self.mult.sum() // 2 + self.loops.sum())

    def edges(self):
        """Yield ``(i, j, m)`` for ``i < j`` in lexicographic order."""
        for i in range(1, self.n + 1):
            a, b = self.indptr[i], self.indptr[i + 1]
            for j, m in zip(self.indices[a:b], self.mult[a:b]):
                if j > i:
                    yield i, int(j), int(m)

    def edge_array(self) -> np.ndarray:
        """``(E, 3)`` array of ``(i, j, m)`` rows with ``i < j``."""
        src = self.sources
        keep = self.indices > src
        return np.column_stack([src[keep], self.indices[keep], self.mult[keep]])

    def has_edge(self, i: int, j: int) -> bool:
        nb = self.neighbors(i)
        k = np.searchsorted(nb, j)
        return bool(k < len(nb) and nb[k] == j)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n == other.n and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.mult, other.mult)
                and np.array_equal(self.loops, other.loops))

    __hash__ = None

    def __repr__(self):
        kind = "simple" if self.is_simple else "multi"
        return f"Graph(n={self.n}, edges={self.edge_count}, {kind})"

    def csgraph(self):
        """scipy CSR adjacency on 0-based rows ``0..n`` (row 0 is the unused slot)."""
        from scipy.sparse import csr_matrix
        return csr_matrix((np.ones(len(self.indices)), self.indices, self.indptr),
                          shape=(self.n + 1, self.n + 1))


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


# -- kernels -----------------------------------------------------------------

def edge_prob(i: int, j: int, spec: GraphSpec) -> float:
    """Edge probability ``q_ij`` of the simple variants.

    For ``mnr`` the Poisson mean ``w(i) w(j) / w([n])`` of the pair
    multiplicity is returned instead (it is not a probability).
    """
    if not (1 <= i <= spec.n and 1 <= j <= spec.n):
        raise ValueError("vertex out of range")
    if i == j:
        if spec.is_simple:
            raise ValueError("simple variants have no loops (i == j)")
        return MNR_LOOP_FACTOR * spec.scale * float(i) ** (-2.0 * spec.gamma)
    raw = spec.scale * float(i) ** (-spec.gamma) * float(j) ** (-spec.gamma)
    return _q_from_raw(raw, _VARIANT_CODE[spec.variant])


def _q_from_raw(raw, code):
    p = min(raw, 1.0)
    if code == 0:
        return p
    if code == 1:
        return -math.expm1(-p)
    if code == 2:
        return p / (1.0 + p)
    return raw


def _power_sum(n: int, gamma: float) -> float:
    return float(np.sum(np.arange(1, n + 1, dtype=np.float64) ** (-gamma)))


def weight(i: int, spec: GraphSpec) -> float:
    """Norros-Reittu weight ``w(i) = sum_j beta n**(2g-1) i**-g j**-g``."""
    if not 1 <= i <= spec.n:
        raise ValueError("vertex out of range")
    return spec.scale * float(i) ** (-spec.gamma) * _power_sum(spec.n, spec.gamma)


def weights(spec: GraphSpec) -> np.ndarray:
    """All weights as an array indexed ``0..n`` (entry 0 is 0)."""
    w = np.zeros(spec.n + 1)
    w[1:] = spec.scale * np.arange(1, spec.n + 1, dtype=np.float64) ** (-spec.gamma) * _power_sum(spec.n, spec.gamma)
    return w


def total_weight(spec: GraphSpec) -> float:
    """``w([n])``."""
    return spec.scale * _power_sum(spec.n, spec.gamma) ** 2


# -- sampling ----------------------------------------------------------------

@numba.njit(cache=True)
def _grow(a, size):
    b = np.empty(max(2 * len(a), size), a.dtype)
    b[: len(a)] = a
    return b


@numba.njit(cache=True)
def _q(scale, ai, aj, code):
    raw = scale * ai * aj
    p = min(raw, 1.0)
    if code == 0:
        return p
    if code == 2:
        return p / (1.0 + p)
    # snr and the occupancy probability of an mnr pair
    return -math.expm1(-(raw if code == 3 else p))


@numba.njit(cache=True)
def _zero_truncated_poisson(mu, rng):
    # inverse cdf of Pois(mu) conditioned on >= 1
    u = rng.random() * (-math.expm1(-mu))
    k = 1
    term = mu * math.exp(-mu)
    acc = term
    while acc < u and k < 10000:
        k += 1
        term *= mu / k
        acc += term
    return k


@numba.njit(cache=True)
def _sample_skip(n, scale, gamma, code, rng):
    a = np.empty(n + 1)
    a[0] = 0.0
    for v in range(1, n + 1):
        a[v] = float(v) ** (-gamma)
    lo = np.empty(64, np.int64)
    hi = np.empty(64, np.int64)
    mm = np.empty(64, np.int64)
    m = 0
    for i in range(1, n):
        j = i + 1
        p = _q(scale, a[i], a[j], code)
        while j <= n and p > 0.0:
            if p < 1.0:
                r = rng.random()
                if r <= 0.0:
                    break
                skip = math.floor(math.log(r) / math.log1p(-p))
                if skip > n:
                    break
                j += int(skip)
                if j > n:
                    break
            qj = _q(scale, a[i], a[j], code)
            if rng.random() * p < qj:
                if m == len(lo):
                    lo = _grow(lo, m + 1)
                    hi = _grow(hi, m + 1)
                    mm = _grow(mm, m + 1)
                lo[m] = i
                hi[m] = j
                mm[m] = _zero_truncated_poisson(scale * a[i] * a[j], rng) if code == 3 else 1
                m += 1
            p = qj
            j += 1
    loops = np.zeros(n + 1, np.int64)
    if code == 3:
        for v in range(1, n + 1):
            loops[v] = rng.poisson(MNR_LOOP_FACTOR * scale * a[v] * a[v])
    return lo[:m], hi[:m], mm[:m], loops


def _sample_enumerate(spec: GraphSpec, gen: np.random.Generator):
    n, code = spec.n, _VARIANT_CODE[spec.variant]
    a = np.arange(1, n + 1, dtype=np.float64) ** (-spec.gamma)
    los, his, mms = [], [], []
    for i in range(1, n):
        raw = spec.scale * a[i - 1] * a[i:]
        if code == 3:
            m = gen.poisson(raw)
            keep = m > 0
        else:
            p = np.minimum(raw, 1.0)
            q = p if code == 0 else (-np.expm1(-p) if code == 1 else p / (1 + p))
            keep = gen.random(len(q)) < q
            m = np.ones(len(q), np.int64)
        js = np.nonzero(keep)[0] + i + 1
        los.append(np.full(len(js), i, np.int64))
        his.append(js)
        mms.append(m[keep].astype(np.int64))
    loops = np.zeros(n + 1, np.int64)
    if code == 3:
        loops[1:] = gen.poisson(MNR_LOOP_FACTOR * spec.scale * a * a)
    cat = lambda xs: np.concatenate(xs) if xs else np.zeros(0, np.int64)
    return cat(los), cat(his), cat(mms), loops


def sample_graph(spec: GraphSpec, rng, method: str = "skip") -> Graph:
    """Draw one graph from ``spec``.

    Args:
        spec: model parameters.
        rng: an :class:`~irgvoter.rng.RngStream` (or numpy Generator / int seed).
        method: ``"skip"`` (exact geometric skipping, default) or
            ``"enumerate"`` (one uniform per pair, O(n**2)).

    Returns:
        An immutable :class:`Graph`; deterministic given ``(spec, rng)``.
    """
    gen = as_generator(rng)
    if method == "skip":
        lo, hi, mm, loops = _sample_skip(spec.n, spec.scale, spec.gamma, _VARIANT_CODE[spec.variant], gen)
    elif method == "enumerate":
        lo, hi, mm, loops = _sample_enumerate(spec, gen)
    else:
        raise ValueError(f"unknown sampling method {method!r}")
    meta = dict(n=spec.n, beta=spec.beta, gamma=spec.gamma, variant=spec.variant)
    return Graph._from_pairs(spec.n, lo, hi, mm, loops, meta)


def collapse(g: Graph) -> Graph:
    """Flatten parallel edges to single edges and delete loops."""
    pairs = g.edge_array()
    meta = dict(g.meta)
    if meta.get("variant") == "mnr":
        meta["variant"] = "snr"
    return Graph._from_pairs(g.n, pairs[:, 0], pairs[:, 1], np.ones(len(pairs), np.int64),
                             np.zeros(g.n + 1, np.int64), meta)


# -- text format -----------------------------------------------------------------

def format_graph(g: Graph, spec: GraphSpec | None = None) -> str:
    """Render as text: header ``N beta gamma variant`` then ``i j [m]`` lines.

    Loops are written as ``i i m``.  Multiplicity 1 is omitted.
    """
    if spec is not None:
        head = f"{spec.n} {spec.beta!r} {spec.gamma!r} {spec.variant}"
    else:
        md = g.meta
        head = f"{g.n} {md.get('beta', 0.0)!r} {md.get('gamma', 0.0)!r} {md.get('variant', 'cl')}"
    lines = [head]
    for i, j, m in g.edges():
        lines.append(f"{i} {j}" if m == 1 else f"{i} {j} {m}")
    for v in np.nonzero(g.loops)[0]:
        lines.append(f"{v} {v} {int(g.loops[v])}")
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise ValueError("empty graph file")
    head = rows[0]
    if len(head) != 4:
        raise ValueError("header must be `N beta gamma variant`")
    n = int(head[0])
    meta = dict(n=n, beta=float(head[1]), gamma=float(head[2]), variant=head[3].lower())
    edges, mult, loops = [], [], np.zeros(n + 1, np.int64)
    for r in rows[1:]:
        if len(r) not in (2, 3):
            raise ValueError(f"bad edge line: {' '.join(r)}")
        i, j = int(r[0]), int(r[1])
        m = int(r[2]) if len(r) == 3 else 1
        if i == j:
            loops[i] += m
        else:
            edges.append((i, j))
            mult.append(m)
    return Graph.from_edges(n, edges, mult, loops, meta)


def write_graph(path, g: Graph, spec: GraphSpec | None = None) -> None:
    Path(path).write_text(format_graph(g, spec), encoding="utf-8")


def read_graph(path) -> Graph:
    return parse_graph(Path(path).read_text(encoding="utf-8"))
