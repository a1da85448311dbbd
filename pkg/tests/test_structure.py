import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irgvoter.graphgen import Graph, GraphSpec, sample_graph
from irgvoter.rng import RngStream
from irgvoter.structure import (branches, components, diameter, empirical_moment,
                                find_long_double_star, find_simple_double_star, k_gamma,
                                leaf_neighbours, structure_report)


def star(n_leaves, n=None):
    n = n or n_leaves + 1
    return Graph.from_edges(n, [(1, j) for j in range(2, n_leaves + 2)], meta={"gamma": 0.3})


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(1, n)], meta={"gamma": 0.3})


def random_tree(n, rng):
    # uniform attachment tree with shuffled labels
    perm = rng.permutation(n) + 1
    edges = [(perm[i], perm[rng.integers(i)]) for i in range(1, n)]
    return Graph.from_edges(n, edges, meta={"gamma": 0.3})


# -- components ------------------------------------------------------------------

def test_components_small_cases():
    assert [c.tolist() for c in components(Graph.from_edges(3)).components] == [[1], [2], [3]]
    dec = components(Graph.from_edges(3, [(1, 2)]))
    assert [c.tolist() for c in dec.components] == [[1, 2], [3]]
    assert dec.rep.tolist() == [1, 3]


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), gamma=st.floats(0.05, 0.45))
def test_components_partition(seed, gamma):
    spec = GraphSpec(50, 0.9 * (1 - 2 * gamma), gamma)
    g = sample_graph(spec, RngStream(seed))
    dec = components(g)
    allv = np.sort(np.concatenate(dec.components))
    assert allv.tolist() == list(range(1, 51))
    assert dec.sizes().sum() == 50
    for cid, c in enumerate(dec.components):
        assert dec.rep[cid] == c.min()
        assert np.all(dec.component_id[c] == cid)
        # no edge leaves a component
        for v in c:
            assert np.all(dec.component_id[g.neighbors(v)] == cid)
    assert np.all(np.diff(dec.rep) > 0)


# -- k_gamma -------------------------------------------------------------------------

def test_k_gamma_value_and_bounds():
    assert k_gamma(10**4, 0.25) == pytest.approx(10 ** (4 / 3) * math.log(10**4), rel=1e-12)
    assert k_gamma(10**4, 0.25) == pytest.approx(198.43, abs=0.01)
    with pytest.raises(ValueError):
        k_gamma(100, 0.5)
    vals = [k_gamma(10**5, g) for g in np.linspace(0.05, 0.45, 9)]
    assert np.all(np.diff(vals) < 0)


# -- report --------------------------------------------------------------------------

def test_report_on_star():
    rep = structure_report(star(5), gamma=0.3)
    (c,) = rep.components
    assert (c.diameter, c.degree_sum, c.is_tree) == (2, 10, True)
    assert len(leaf_neighbours(star(5), 1)) == 5
    assert rep.big[0].leaves == 5


def test_report_on_path_and_triangle():
    (c,) = structure_report(path(4), gamma=0.3).components
    assert c.diameter == 3 and c.surplus == 0
    tri = Graph.from_edges(3, [(1, 2), (2, 3), (1, 3)], meta={"gamma": 0.3})
    (c,) = structure_report(tri, gamma=0.3).components
    assert c.surplus == 1 and not c.is_tree


@pytest.mark.parametrize("n", [1, 2, 5, 17])
def test_path_diameter(n):
    assert diameter(path(n), range(1, n + 1)) == n - 1


def test_big_vertex_set_is_union_of_components():
    spec = GraphSpec(2000, 0.2, 0.3)
    g = sample_graph(spec, RngStream(3))
    rep = structure_report(g, spec)
    dec = components(g)
    kmax = int(math.floor(rep.k_gamma))
    expect = sorted(set(np.concatenate([dec.of(k) for k in range(1, kmax + 1)]).tolist()))
    assert rep.big_vertices == expect
    for c in rep.components:
        assert c.surplus >= 0 and c.is_tree == (c.surplus == 0)


def test_report_is_deterministic_and_serializes():
    spec = GraphSpec(3000, 0.1, 0.4)
    g = sample_graph(spec, RngStream(5))
    a, b = structure_report(g, spec), structure_report(g, spec)
    assert a.to_json() == b.to_json()
    csv_text = a.components_csv()
    assert csv_text.splitlines()[0] == "rep,size,edges,degree_sum,diameter,surplus,is_tree,is_big"
    assert len(csv_text.splitlines()) == len(a.components) + 1


# -- branches and moments ------------------------------------------------------------

def test_branches_examples():
    assert [b.tolist() for b in branches(star(3), [1, 2, 3, 4])] == [[2], [3], [4]]
    assert [b.tolist() for b in branches(path(3), [1, 2, 3])] == [[2, 3]]


def test_branch_count_equals_root_degree_on_random_trees():
    rng = np.random.default_rng(17)
    for _ in range(300):
        n = int(rng.integers(2, 13))
        t = random_tree(n, rng)
        comp = list(range(1, n + 1))
        assert len(branches(t, comp)) == t.degree(1)
        assert sum(len(b) for b in branches(t, comp)) == n - 1
        assert t.degrees[1:].sum() == 2 * n - 2
        assert empirical_moment(t, comp, 1) == 2 * n - 2


def test_empirical_moment_examples():
    assert empirical_moment(star(3), [1, 2, 3, 4], 2) == 12
    with pytest.raises(ValueError):
        empirical_moment(star(3), [1], 0.5)


def test_moment_scaling_across_seeds():
    spec = GraphSpec(10**5, 0.1, 0.4)
    for seed in range(1, 21):
        g = sample_graph(spec, RngStream(seed, "graph"))
        m = empirical_moment(g, components(g).of(1), 2)
        # log scale with a rounding guard: 1e5**0.8 is not exact in floating point
        r = math.log10(m) - 2 * spec.gamma * math.log10(spec.n)
        assert -2 - 1e-12 <= r <= 2 + 1e-12, (seed, m)


# -- double stars --------------------------------------------------------------------

def test_simple_double_star_fixture():
    g = Graph.from_edges(100, [(10, 11)], meta={"gamma": 0.1})
    lo = 100 ** (0.8 / 1.8)
    assert lo <= 10 and 11 <= k_gamma(100, 0.1)
    w = find_simple_double_star(g, gamma=0.1)
    assert w.kind == "simple" and w.hubs == (10, 11) and w.hub_degrees == (1, 1)
    assert find_simple_double_star(Graph.from_edges(100, meta={"gamma": 0.1})) is None


def test_simple_double_star_requires_tree():
    g = Graph.from_edges(100, [(10, 11), (11, 12), (10, 12)], meta={"gamma": 0.1})
    assert find_simple_double_star(g) is None


def test_long_double_star_fixture():
    # hub 1 with leaves, path 1-50-60-2, hub 2 with leaves
    edges = [(1, 50), (50, 60), (60, 2)] + [(1, j) for j in range(70, 75)] + [(2, j) for j in range(80, 85)]
    g = Graph.from_edges(100, edges, meta={"gamma": 0.3})
    w = find_long_double_star(g)
    assert w.kind == "long" and w.hubs == (1, 2) and w.path == (1, 50, 60, 2)
    assert w.hub_degrees == (6, 6)
    assert find_long_double_star(star(5)) is None


def _seed_fraction(finder):
    spec = GraphSpec(10**5, 0.05, 0.45)
    hits = [finder(sample_graph(spec, RngStream(seed, "graph")), spec) is not None for seed in range(1, 21)]
    return float(np.mean(hits))


def test_simple_double_star_frequency():
    frac = _seed_fraction(find_simple_double_star)
    print(f"simple double star found in {frac:.2f} of seeds")
    assert frac >= 0.9


def test_long_double_star_frequency():
    frac = _seed_fraction(find_long_double_star)
    print(f"long double star found in {frac:.2f} of seeds")
    assert frac > 0.5
