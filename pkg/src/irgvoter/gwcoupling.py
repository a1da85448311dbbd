"""Marked Galton-Watson coupling for the Norros-Reittu multigraph.

A tree rooted at vertex ``k`` has a ``Pois(w(k))`` root offspring; every other
individual draws a mark ``M`` with ``P(M = m) ~ m**-gamma`` on ``1..n`` and
then ``Pois(w(M))`` children.  Scanning a forest of such trees in breadth-first
order and thinning repeated marks (and descendants of thinned individuals)
reproduces the multigraph exactly in law: edge counts between two surviving
marks are read off from the children of whichever of the two comes first.

Mark 0 stands for the cemetery mark of the truncated law (weight 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graphgen import Graph, GraphSpec, weights
from .rng import as_generator

DAGGER = 0
DEFAULT_SIZE_GUARD = 10**7


class TreeOverflowError(RuntimeError):
    """Tree exceeded the size guard; parameters are too close to criticality."""


@dataclass(frozen=True)
class MarkLaw:
    """Mark distribution ``P(M = m) ~ m**-gamma`` on ``1..n``.

    With ``truncation = z`` every mark ``m <= z`` is replaced by the cemetery
    mark 0, which has weight 0.
    """

    n: int
    gamma: float
    truncation: int | None = None

    def __post_init__(self):
        p = np.arange(1, self.n + 1, dtype=np.float64) ** (-self.gamma)
        cdf = np.cumsum(p)
        cdf /= cdf[-1]
        cdf[-1] = 1.0
        object.__setattr__(self, "_cdf", cdf)

    def pmf(self) -> np.ndarray:
        """Probabilities indexed ``0..n`` (index 0 is the cemetery mass)."""
        out = np.zeros(self.n + 1)
        out[1:] = np.diff(np.concatenate([[0.0], self._cdf]))
        if self.truncation:
            z = min(self.truncation, self.n)
            out[0] = out[1 : z + 1].sum()
            out[1 : z + 1] = 0.0
        return out

    def sample(self, size, rng) -> np.ndarray:
        gen = as_generator(rng)
        m = np.searchsorted(self._cdf, gen.random(size), side="right") + 1
        m = np.minimum(m, self.n)
        if self.truncation:
            m[m <= self.truncation] = DAGGER
        return m.astype(np.int64)


@dataclass
class MarkedTree:
    """Flat breadth-first array of one marked tree.

    Node 0 is the root.  ``parent[v] < v`` for every non-root node and the
    children of each node occupy a contiguous run, in birth order, so array
    order equals breadth-first (Ulam-Harris length-then-lexicographic) order.
    """

    marks: np.ndarray
    parent: np.ndarray
    offspring: np.ndarray
    depth: np.ndarray
    thinned: np.ndarray | None = None

    @property
    def root_mark(self) -> int:
        return int(self.marks[0])

    def __len__(self):
        return len(self.marks)

    @property
    def first_child(self) -> np.ndarray:
        fc = np.full(len(self), -1, np.int64)
        starts = np.concatenate([[1], 1 + np.cumsum(self.offspring)[:-1]])
        fc[self.offspring > 0] = starts[self.offspring > 0]
        return fc

    def labels(self) -> list:
        """Ulam-Harris label of every node as a tuple of 1-based child indices."""
        lab = [()]
        fc = self.first_child
        for v in range(1, len(self)):
            p = int(self.parent[v])
            lab.append(lab[p] + (v - int(fc[p]) + 1,))
        return lab

    def to_text(self) -> str:
        """Line per node: ``ulam_label mark offspring thinned``.

        The root label is ``∅``; other labels are dot-separated child indices
        (``1.2``); the cemetery mark is written ``†``.
        """
        th = self.thinned if self.thinned is not None else np.zeros(len(self), bool)
        out = []
        for lab, m, x, t in zip(self.labels(), self.marks, self.offspring, th):
            name = ".".join(map(str, lab)) if lab else "∅"
            mark = "†" if m == DAGGER else str(int(m))
            out.append(f"{name} {mark} {int(x)} {int(bool(t))}")
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "MarkedTree":
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        labels = [() if r[0] in ("∅", "") else tuple(int(x) for x in r[0].split(".")) for r in rows]
        order = sorted(range(len(rows)), key=lambda i: (len(labels[i]), labels[i]))
        if [labels[i] for i in order] != labels:
            raise ValueError("nodes must be listed in breadth-first order")
        index = {lab: i for i, lab in enumerate(labels)}
        parent = np.array([-1] + [index[lab[:-1]] for lab in labels[1:]], dtype=np.int64)
        marks = np.array([DAGGER if r[1] == "†" else int(r[1]) for r in rows], dtype=np.int64)
        offspring = np.array([int(r[2]) for r in rows], dtype=np.int64)
        thinned = np.array([bool(int(r[3])) for r in rows])
        depth = np.array([len(lab) for lab in labels], dtype=np.int64)
        counts = np.bincount(parent[1:], minlength=len(rows)) if len(rows) > 1 else np.zeros(len(rows), np.int64)
        if not np.array_equal(counts, offspring):
            raise ValueError("offspring counts disagree with the labels")
        return cls(marks, parent, offspring, depth, thinned)

    @classmethod
    def from_children(cls, root_mark: int, children: dict) -> "MarkedTree":
        """Small fixtures: ``children`` maps a label tuple to a list of child marks."""
        marks, parent, depth, labels = [root_mark], [-1], [0], [()]
        i = 0
        while i < len(labels):
            for c, m in enumerate(children.get(labels[i], []), start=1):
                labels.append(labels[i] + (c,))
                marks.append(m)
                parent.append(i)
                depth.append(depth[i] + 1)
            i += 1
        parent = np.array(parent, dtype=np.int64)
        offspring = np.bincount(parent[1:], minlength=len(marks)).astype(np.int64) if len(marks) > 1 else np.zeros(1, np.int64)
        return cls(np.array(marks, dtype=np.int64), parent, offspring, np.array(depth, dtype=np.int64))


def sample_tree(k: int, spec: GraphSpec, rng, truncation: int | None = None,
                size_guard: int = DEFAULT_SIZE_GUARD, law: MarkLaw | None = None) -> MarkedTree:
    """Grow the marked tree rooted at vertex ``k`` generation by generation."""
    if not 1 <= k <= spec.n:
        raise ValueError("root vertex out of range")
    gen = as_generator(rng)
    w = weights(spec)
    law = law or MarkLaw(spec.n, spec.gamma, truncation)
    marks = [np.array([k], np.int64)]
    parents = [np.array([-1], np.int64)]
    offs = []
    depth = 0
    total = 1
    frontier_marks = marks[0]
    start = 0
    while len(frontier_marks):
        x = gen.poisson(w[frontier_marks])
        offs.append(x.astype(np.int64))
        nchild = int(x.sum())
        total += nchild
        if total > size_guard:
            raise TreeOverflowError(f"tree exceeded {size_guard} nodes")
        child_parent = np.repeat(np.arange(start, start + len(frontier_marks)), x)
        start += len(frontier_marks)
        frontier_marks = law.sample(nchild, gen)
        depth += 1
        if nchild:
            marks.append(frontier_marks)
            parents.append(child_parent)
    m = np.concatenate(marks)
    par = np.concatenate(parents)
    off = np.concatenate(offs)
    dep = np.zeros(len(m), np.int64)
    for v in range(1, len(m)):
        dep[v] = dep[par[v]] + 1
    return MarkedTree(m, par, off, dep)


def tree_size(k: int, spec: GraphSpec, rng, truncation: int | None = None,
              law: MarkLaw | None = None, w=None, size_guard: int = DEFAULT_SIZE_GUARD) -> int:
    """Total progeny of the marked tree without materialising it."""
    gen = as_generator(rng)
    w = weights(spec) if w is None else w
    law = law or MarkLaw(spec.n, spec.gamma, truncation)
    alive = int(gen.poisson(w[k]))
    total = 1 + alive
    while alive:
        alive = int(gen.poisson(w[law.sample(alive, gen)]).sum())
        total += alive
        if total > size_guard:
            raise TreeOverflowError(f"tree exceeded {size_guard} nodes")
    return total


@dataclass
class ThinResult:
    """Output of the thinning scan.

    ``graph`` lives on vertices ``1..n`` (marks that never survive are
    isolated there); ``vertices`` lists the surviving marks.
    """

    graph: Graph
    vertices: np.ndarray
    trees: list


def thin_forest(trees, n: int | None = None) -> ThinResult:
    """Thin a forest scanned tree by tree in breadth-first order.

    A node is thinned if its parent is thinned or an earlier unthinned node
    carries the same mark (cemetery marks are always thinned).  Every pair of
    unthinned nodes ``v < w`` is joined by ``X_v(M_w)`` edges, the number of
    children of ``v`` carrying the mark of ``w``; ``X_v(M_v)`` gives loops.
    Each tree's ``thinned`` flags are filled in place.
    """
    trees = list(trees)
    if n is None:
        n = max(int(t.marks.max()) for t in trees)
    owner_pos = {}  # mark -> global scan position of its unthinned carrier
    pos = 0
    for t in trees:
        marks = t.marks.tolist()
        parent = t.parent.tolist()
        th = [False] * len(marks)
        for v, m in enumerate(marks):
            p = parent[v]
            if (p >= 0 and th[p]) or m == DAGGER or m in owner_pos:
                th[v] = True
            else:
                owner_pos[m] = pos + v
        t.thinned = np.array(th, dtype=bool)
        pos += len(marks)
    edges = {}
    loops = np.zeros(n + 1, np.int64)
    pos = 0
    for t in trees:
        if len(t) == 1:
            pos += 1
            continue
        marks = t.marks.tolist()
        fc = t.first_child.tolist()
        off = t.offspring.tolist()
        th = t.thinned.tolist()
        for v, mv in enumerate(marks):
            if th[v] or off[v] == 0:
                continue
            here = pos + v
            for mc in marks[fc[v]: fc[v] + off[v]]:
                if mc == DAGGER:
                    continue
                if mc == mv:
                    loops[mv] += 1
                elif owner_pos[mc] > here:
                    key = (mv, mc) if mv < mc else (mc, mv)
                    edges[key] = edges.get(key, 0) + 1
        pos += len(marks)
    verts = np.array(sorted(owner_pos), dtype=np.int64)
    e = np.array(list(edges), dtype=np.int64).reshape(-1, 2)
    mult = np.array(list(edges.values()), dtype=np.int64)
    g = Graph.from_edges(n, e, mult, loops, meta=dict(variant="mnr"))
    return ThinResult(g, verts, trees)


def sample_forest(spec: GraphSpec, rng, law: MarkLaw | None = None) -> list:
    """Independent marked trees rooted at ``1..n``, grown generation-wise together."""
    gen = as_generator(rng)
    w = weights(spec)
    law = law or MarkLaw(spec.n, spec.gamma)
    n = spec.n
    tree = [np.arange(n, dtype=np.int64)]
    mark = [np.arange(1, n + 1, dtype=np.int64)]
    parent = [np.full(n, -1, np.int64)]
    depth = [np.zeros(n, np.int64)]
    offs = []
    front_mark, front_tree = mark[0], tree[0]
    start = 0
    total = n
    while len(front_mark):
        x = gen.poisson(w[front_mark]).astype(np.int64)
        offs.append(x)
        nchild = int(x.sum())
        total += nchild
        if total > DEFAULT_SIZE_GUARD:
            raise TreeOverflowError(f"forest exceeded {DEFAULT_SIZE_GUARD} nodes")
        parent.append(np.repeat(np.arange(start, start + len(front_mark)), x))
        start += len(front_mark)
        front_tree = np.repeat(front_tree, x)
        front_mark = law.sample(nchild, gen)
        tree.append(front_tree)
        mark.append(front_mark)
        depth.append(np.full(nchild, len(depth), np.int64))
    tree, mark, parent = np.concatenate(tree), np.concatenate(mark), np.concatenate(parent)
    depth = np.concatenate(depth)
    off = np.concatenate(offs)
    # global node id -> (tree, position in that tree's breadth-first array)
    order = np.argsort(tree, kind="stable")
    local = np.empty(len(tree), np.int64)
    bounds = np.concatenate([[0], np.cumsum(np.bincount(tree, minlength=n))])
    local[order] = np.arange(len(tree)) - bounds[tree[order]]
    out = []
    for k in range(n):
        idx = order[bounds[k]:bounds[k + 1]]
        par = parent[idx]
        par = np.where(par >= 0, local[np.maximum(par, 0)], -1)
        out.append(MarkedTree(mark[idx], par, off[idx], depth[idx]))
    return out


def sample_thinned_forest(spec: GraphSpec, rng) -> ThinResult:
    """All ``n`` trees drawn jointly, then thinned in root order."""
    return thin_forest(sample_forest(spec, rng), spec.n)


def cluster_size_thinned(k: int, spec: GraphSpec, rng) -> int:
    """``|T^k_thin|``: number of surviving marks of the single tree at ``k``."""
    t = sample_tree(k, spec, rng)
    th = thin_forest([t], spec.n)
    return len(th.vertices)


# -- limit weight and the dominating tree ------------------------------------------

@dataclass(frozen=True)
class LimitWeight:
    """Pareto weight with density ``((1-g)/g) m**(1/g-1) x**(-1/g)`` on ``x > m``,
    where ``m = beta / (1 - gamma)``."""

    beta: float
    gamma: float

    @property
    def x_min(self) -> float:
        return self.beta / (1.0 - self.gamma)

    @property
    def mean(self) -> float:
        if self.gamma >= 0.5:
            return math.inf
        return self.beta / (1.0 - 2.0 * self.gamma)

    def density(self, x):
        x = np.asarray(x, dtype=np.float64)
        g, m = self.gamma, self.x_min
        return np.where(x > m, (1 - g) / g * m ** (1 / g - 1) * x ** (-1 / g), 0.0)

    def survival(self, x):
        x = np.asarray(x, dtype=np.float64)
        return np.where(x > self.x_min, (x / self.x_min) ** (1 - 1 / self.gamma), 1.0)

    def median(self) -> float:
        return self.x_min * 2.0 ** (self.gamma / (1.0 - self.gamma))


def sample_limit_weight(lw: LimitWeight, rng, size=None):
    """Inverse-cdf draws ``x_min * U**(-gamma/(1-gamma))``."""
    if not lw.gamma < 0.5:
        raise ValueError("the limit weight needs gamma < 1/2")
    gen = as_generator(rng)
    u = gen.random(size)
    # 1 - U avoids a zero base
    return lw.x_min * (1.0 - u) ** (-lw.gamma / (1.0 - lw.gamma))


def gw_total_sizes(lw: LimitWeight, alpha: float, samples: int, rng,
                   size_guard: int = DEFAULT_SIZE_GUARD) -> np.ndarray:
    """Total progeny of ``samples`` independent trees with offspring ``Pois(alpha W*)``."""
    gen = as_generator(rng)
    sizes = np.ones(samples, np.int64)
    alive = np.ones(samples, np.int64)
    while alive.any():
        idx = np.nonzero(alive)[0]
        cnt = alive[idx]
        w = sample_limit_weight(lw, gen, int(cnt.sum()))
        tree_of = np.repeat(np.arange(len(idx)), cnt)
        lam = np.bincount(tree_of, weights=w, minlength=len(idx)) * alpha
        born = gen.poisson(lam)
        alive[:] = 0
        alive[idx] = born
        sizes[idx] += born
        if sizes.max() > size_guard:
            raise TreeOverflowError(f"tree exceeded {size_guard} nodes")
    return sizes


@dataclass
class TailReport:
    alpha: float
    beta: float
    gamma: float
    samples: int
    mean_size: float
    mean_size_stderr: float
    mean_size_theory: float
    slope: float
    slope_ci: tuple
    slope_theory: float
    fit_range: tuple
    pmf_slope: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _ccdf_fit(sizes, k_lo, k_hi, npts=12):
    ks = np.unique(np.round(np.geomspace(k_lo, k_hi, npts)).astype(np.int64))
    s = np.sort(sizes)
    ccdf = 1.0 - np.searchsorted(s, ks, side="left") / len(s)  # P(|T| >= k)
    ok = ccdf > 0
    x, y = np.log(ks[ok]), np.log(ccdf[ok])
    return np.polyfit(x, y, 1)[0]


def _pmf_fit(sizes, k_lo, k_hi, nbins=10):
    edges = np.unique(np.round(np.geomspace(k_lo, k_hi + 1, nbins + 1)).astype(np.int64))
    counts, _ = np.histogram(sizes, bins=edges)
    widths = np.diff(edges)
    mids = np.sqrt(edges[:-1] * (edges[1:] - 1).clip(min=edges[:-1]))
    ok = counts > 0
    return np.polyfit(np.log(mids[ok]), np.log(counts[ok] / widths[ok]), 1)[0]


def gw_tail_statistics(spec_or_weight, alpha: float, samples: int, rng,
                       k_lo: int = 10, min_tail: int = 50, n_boot: int = 200) -> TailReport:
    """Log-log tail slope of the total size of ``Pois(alpha W*)`` trees.

    The complementary cdf ``P(|T| >= k)`` is fitted by least squares on a
    geometric grid from ``k_lo`` up to the size exceeded by ``min_tail``
    trees.  The CI is a percentile bootstrap over trees.
    """
    if isinstance(spec_or_weight, LimitWeight):
        lw = spec_or_weight
    else:
        lw = LimitWeight(spec_or_weight.beta, spec_or_weight.gamma)
    upper = (1.0 - 2.0 * lw.gamma) / lw.beta
    if not 1.0 < alpha < upper:
        raise ValueError(f"alpha must lie in (1, {upper:g})")
    gen = as_generator(rng)
    sizes = gw_total_sizes(lw, alpha, samples, gen)
    k_hi = float(np.sort(sizes)[-min_tail])
    if k_hi <= k_lo * 2:
        raise ValueError("too few large trees for a tail fit")
    slope = _ccdf_fit(sizes, k_lo, k_hi)
    boots = []
    for _ in range(n_boot):
        b = sizes[gen.integers(0, samples, samples)]
        bh = float(np.sort(b)[-min_tail])
        if bh > k_lo * 2:
            boots.append(_ccdf_fit(b, k_lo, bh))
    ci = (float(np.quantile(boots, 0.025)), float(np.quantile(boots, 0.975))) if boots else (math.nan, math.nan)
    m = alpha * lw.mean
    return TailReport(alpha=alpha, beta=lw.beta, gamma=lw.gamma, samples=samples,
                      mean_size=float(sizes.mean()),
                      mean_size_stderr=float(sizes.std(ddof=1) / math.sqrt(samples)),
                      mean_size_theory=1.0 / (1.0 - m), slope=float(slope), slope_ci=ci,
                      slope_theory=1.0 - 1.0 / lw.gamma, fit_range=(k_lo, k_hi),
                      pmf_slope=float(_pmf_fit(sizes, k_lo, k_hi)))
