"""Component structure of sampled graphs.

Connected components, the big-vertex threshold ``K_gamma``, per-component
diameter / degree sums / cycle surplus, branches, empirical degree moments and
locators for the two double-star witnesses.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections import deque
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graphgen import Graph, GraphSpec


@dataclass(frozen=True)
class ComponentDecomposition:
    """Partition of ``1..n`` into connected components.

    Components are ordered by their representative (minimal vertex), so
    component 0 always contains vertex 1.  ``component_id[v]`` is the index of
    the component of ``v`` (entry 0 is -1).
    """

    component_id: np.ndarray
    components: list
    rep: np.ndarray

    def of(self, v: int) -> np.ndarray:
        return self.components[self.component_id[v]]

    def sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.components], dtype=np.int64)

    def __len__(self):
        return len(self.components)


def components(g: Graph) -> ComponentDecomposition:
    cached = g.__dict__.get("_components")
    if cached is not None:
        return cached
    _, labels = connected_components(g.csgraph(), directed=False)
    labels = labels[1:]
    # relabel so that ids follow first appearance, i.e. increasing representative
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first)
    remap = np.empty(len(order), np.int64)
    remap[order] = np.arange(len(order))
    cid = remap[inv]
    verts = np.argsort(cid, kind="stable") + 1
    bounds = np.cumsum(np.bincount(cid, minlength=len(order)))[:-1]
    comps = np.split(verts, bounds)
    for c in comps:
        c.setflags(write=False)
    rep = np.array([c[0] for c in comps], dtype=np.int64)
    full = np.concatenate([[-1], cid]).astype(np.int64)
    full.setflags(write=False)
    dec = ComponentDecomposition(full, comps, rep)
    g.__dict__["_components"] = dec
    return dec


def k_gamma(n: int, gamma: float) -> float:
    """Big-vertex threshold ``n**((1-2g)/(2-2g)) * ln n``."""
    if not 0 < gamma < 0.5:
        raise ValueError("K_gamma is defined for 0 < gamma < 1/2")
    return n ** ((1 - 2 * gamma) / (2 - 2 * gamma)) * math.log(n)


def _window_low(n: int, gamma: float) -> float:
    return n ** ((1 - 2 * gamma) / (2 - 2 * gamma))


# -- per-component statistics --------------------------------------------------

def _bfs(g: Graph, src: int, allowed=None):
    dist = {src: 0}
    far = src
    q = deque([src])
    while q:
        u = q.popleft()
        for v in g.neighbors(u):
            v = int(v)
            if v not in dist and (allowed is None or v in allowed):
                dist[v] = dist[u] + 1
                if dist[v] > dist[far]:
                    far = v
                q.append(v)
    return dist, far


def component_edges(g: Graph, comp) -> int:
    """Edges inside ``comp`` counted with multiplicity, loops included."""
    comp = np.asarray(comp)
    return int((g.degrees[comp].sum() - 2 * g.loops[comp].sum()) // 2 + g.loops[comp].sum())


def diameter(g: Graph, comp, exact: bool = True) -> int:
    """Graph distance diameter of one component.

    Trees use the double sweep, which is exact on trees.  Otherwise BFS runs
    from every vertex unless ``exact=False`` (double sweep, a lower bound).
    """
    comp = [int(v) for v in comp]
    if len(comp) <= 1:
        return 0
    if len(comp) == 2:
        return 1
    surplus = component_edges(g, comp) - len(comp) + 1
    if surplus == 0 or not exact:
        _, far = _bfs(g, comp[0])
        dist, far2 = _bfs(g, far)
        return dist[far2]
    best = 0
    for v in comp:
        dist, far = _bfs(g, v)
        best = max(best, dist[far])
    return best


def branches(g: Graph, comp) -> list:
    """Components of ``comp`` minus its minimal vertex, each as a sorted array."""
    comp = sorted(int(v) for v in comp)
    rest = set(comp[1:])
    seen = set()
    out = []
    for v in comp[1:]:
        if v in seen:
            continue
        dist, _ = _bfs(g, v, allowed=rest)
        seen.update(dist)
        out.append(np.array(sorted(dist), dtype=np.int64))
    out.sort(key=lambda b: b[0])
    return out


def empirical_moment(g: Graph, comp, eta: float) -> float:
    """``sum_{v in comp} d(v)**eta`` for ``eta >= 1``."""
    if eta < 1:
        raise ValueError("eta must be >= 1")
    d = g.degrees[np.asarray(comp, dtype=np.int64)].astype(np.float64)
    return float(np.sum(d ** eta))


def leaf_neighbours(g: Graph, k: int) -> np.ndarray:
    """Neighbours of ``k`` with degree exactly 1."""
    nb = g.neighbors(k)
    return nb[g.degrees[nb] == 1]


# -- report ------------------------------------------------------------------

@dataclass
class ComponentStats:
    rep: int
    size: int
    edges: int
    degree_sum: int
    diameter: int
    surplus: int
    is_tree: bool
    is_big: bool


@dataclass
class BigVertexStats:
    k: int
    degree: int
    leaves: int
    component_rep: int
    max_branch_degree_sum: int | None


@dataclass
class StructureReport:
    n: int
    gamma: float
    k_gamma: float
    big_vertices: list
    components: list = field(default_factory=list)
    big: list = field(default_factory=list)

    @property
    def all_big_trees(self) -> bool:
        return all(c.is_tree for c in self.components if c.is_big)

    @property
    def max_diameter(self) -> int:
        return max((c.diameter for c in self.components), default=0)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "gamma": self.gamma,
            "k_gamma": self.k_gamma,
            "n_components": len(self.components),
            "n_big_vertices": len(self.big_vertices),
            "all_big_trees": self.all_big_trees,
            "max_diameter": self.max_diameter,
            "components": [asdict(c) for c in self.components],
            "big": [asdict(b) for b in self.big],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def components_csv(self) -> str:
        buf = io.StringIO()
        cols = ["rep", "size", "edges", "degree_sum", "diameter", "surplus", "is_tree", "is_big"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for c in self.components:
            w.writerow([getattr(c, k) for k in cols])
        return buf.getvalue()


def structure_report(g: Graph, spec: GraphSpec | None = None, gamma: float | None = None,
                     min_size: int = 1, exact_diameter: bool = True) -> StructureReport:
    """Per-component and per-big-vertex statistics.

    Components smaller than ``min_size`` are left out of the component table
    (they still count for the big-vertex set).
    """
    if gamma is None:
        gamma = spec.gamma if spec is not None else g.meta["gamma"]
    n = g.n
    kg = k_gamma(n, gamma)
    dec = components(g)
    kmax = min(n, int(math.floor(kg)))
    big_ids = sorted(set(int(dec.component_id[k]) for k in range(1, kmax + 1)))
    big_set = set(big_ids)
    big_vertices = np.sort(np.concatenate([dec.components[c] for c in big_ids])) if big_ids else np.zeros(0, np.int64)
    rep = StructureReport(n=n, gamma=gamma, k_gamma=kg, big_vertices=big_vertices.tolist())
    deg = g.degrees
    for cid, comp in enumerate(dec.components):
        if len(comp) < min_size and cid not in big_set:
            continue
        e = component_edges(g, comp)
        surplus = e - len(comp) + 1
        rep.components.append(ComponentStats(
            rep=int(comp[0]), size=len(comp), edges=e, degree_sum=int(deg[comp].sum()),
            diameter=diameter(g, comp, exact=exact_diameter), surplus=surplus,
            is_tree=surplus == 0, is_big=cid in big_set))
    branch_max = {}
    for cid in big_ids:
        comp = dec.components[cid]
        bs = branches(g, comp)
        branch_max[cid] = max((int(deg[b].sum()) for b in bs), default=0)
    for k in range(1, kmax + 1):
        cid = int(dec.component_id[k])
        rep.big.append(BigVertexStats(k=k, degree=int(deg[k]), leaves=len(leaf_neighbours(g, k)),
                                      component_rep=int(dec.rep[cid]),
                                      max_branch_degree_sum=branch_max.get(cid)))
    return rep


# -- double stars ----------------------------------------------------------------

@dataclass(frozen=True)
class DoubleStarWitness:
    kind: str
    hubs: tuple
    path: tuple
    hub_degrees: tuple


def _is_tree_component(g: Graph, v: int) -> bool:
    comp = components(g).of(v)
    return component_edges(g, comp) == len(comp) - 1


def find_simple_double_star(g: Graph, spec: GraphSpec | None = None, gamma: float | None = None):
    """Lexicographically first adjacent pair ``x < y`` with both indices in
    ``[n**((1-2g)/(2-2g)), K_gamma]`` whose component is a tree, else None."""
    gamma = gamma if gamma is not None else (spec.gamma if spec is not None else g.meta["gamma"])
    lo = max(1, math.ceil(_window_low(g.n, gamma)))
    hi = min(g.n, math.floor(k_gamma(g.n, gamma)))
    for x in range(lo, hi + 1):
        for y in g.neighbors(x):
            y = int(y)
            if y <= x:
                continue
            if y > hi:
                break
            if _is_tree_component(g, x):
                return DoubleStarWitness("simple", (x, y), (x, y), (g.degree(x), g.degree(y)))
    return None


def find_long_double_star(g: Graph, spec: GraphSpec | None = None, gamma: float | None = None):
    """Path ``(v1, v2, v3, v4)`` with ``d(v2) = d(v3) = 2`` and ``v1, v4 <= K_gamma``.

    Scans adjacent degree-2 pairs ``v2 < v3`` in increasing order; the first
    pair whose outer neighbours are both distinct and at most ``K_gamma`` wins.
    """
    gamma = gamma if gamma is not None else (spec.gamma if spec is not None else g.meta["gamma"])
    hi = k_gamma(g.n, gamma)
    deg = g.degrees
    for v2 in np.nonzero(deg == 2)[0]:
        v2 = int(v2)
        nb2 = g.neighbors(v2)
        if len(nb2) != 2:
            continue
        for v3 in nb2:
            v3 = int(v3)
            if v3 <= v2 or deg[v3] != 2 or len(g.neighbors(v3)) != 2:
                continue
            v1 = int(nb2[nb2 != v3][0])
            nb3 = g.neighbors(v3)
            v4 = int(nb3[nb3 != v2][0])
            if v1 == v4 or v1 > hi or v4 > hi:
                continue
            a, b = (v1, v4) if v1 < v4 else (v4, v1)
            path = (v1, v2, v3, v4) if v1 < v4 else (v4, v3, v2, v1)
            return DoubleStarWitness("long", (a, b), path, (int(deg[a]), int(deg[b])))
    return None
