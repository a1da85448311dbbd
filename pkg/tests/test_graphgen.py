import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irgvoter.graphgen import (MNR_LOOP_FACTOR, Graph, GraphSpec, collapse, edge_prob, format_graph,
                               parse_graph, sample_graph, spec_violations, total_weight, weight, weights)
from irgvoter.rng import RngStream
from irgvoter.structure import components

mp.mp.dps = 30


def mp_p(n, beta, gamma, i, j):
    return min(mp.mpf(beta) * mp.mpf(n) ** (2 * mp.mpf(gamma) - 1) * mp.mpf(i) ** -mp.mpf(gamma)
               * mp.mpf(j) ** -mp.mpf(gamma), 1)


# -- edge_prob ---------------------------------------------------------------

def test_cl_edge_prob_hand_value():
    spec = GraphSpec(100, 0.05, 0.45)
    ref = mp.mpf("0.05") * mp.mpf(100) ** mp.mpf("-0.1") * mp.mpf(2) ** mp.mpf("-0.45")
    assert edge_prob(1, 2, spec) == pytest.approx(float(ref), rel=1e-13)
    assert edge_prob(1, 2, spec) == pytest.approx(0.0230944, abs=1e-7)


def test_cl_truncates_at_one():
    forced = GraphSpec(2, 5.0, 0.1, allow_nonsubcritical=True)
    assert forced.scale * 2 ** -0.1 > 1
    assert edge_prob(1, 2, forced) == 1.0
    assert edge_prob(1, 2, forced.replace(variant="grg")) == 0.5


def test_snr_first_order_matches_cl():
    # choose beta so that p = 1e-8 exactly at (1, 2)
    n, gamma = 100, 0.3
    beta = 1e-8 / (n ** (2 * gamma - 1) * 2 ** -gamma)
    cl = edge_prob(1, 2, GraphSpec(n, beta, gamma, "cl"))
    snr = edge_prob(1, 2, GraphSpec(n, beta, gamma, "snr"))
    assert cl == pytest.approx(1e-8, rel=1e-12)
    assert abs(snr / cl - 1) < 1e-8


@pytest.mark.parametrize("variant,f", [("snr", lambda p: 1 - mp.e ** -p), ("grg", lambda p: p / (1 + p))])
def test_variant_formulas(variant, f):
    spec = GraphSpec(50, 0.2, 0.35, variant)
    for i, j in [(1, 2), (3, 40), (17, 18), (49, 50)]:
        assert edge_prob(i, j, spec) == pytest.approx(float(f(mp_p(50, 0.2, 0.35, i, j))), rel=1e-12)


def test_mnr_returns_poisson_means():
    spec = GraphSpec(30, 0.1, 0.3, "mnr")
    w = weights(spec)
    W = total_weight(spec)
    assert edge_prob(2, 7, spec) == pytest.approx(w[2] * w[7] / W, rel=1e-12)
    assert edge_prob(4, 4, spec) == pytest.approx(MNR_LOOP_FACTOR * w[4] ** 2 / W, rel=1e-12)


def test_loops_rejected_for_simple_variants():
    with pytest.raises(ValueError):
        edge_prob(3, 3, GraphSpec(10, 0.1, 0.3))


# -- weights -----------------------------------------------------------------

def test_weight_hand_value():
    spec = GraphSpec(2, 0.1, 0.2)
    ref = mp.mpf("0.1") * mp.mpf(2) ** mp.mpf("-0.6") * (1 + mp.mpf(2) ** mp.mpf("-0.2"))
    assert weight(1, spec) == pytest.approx(float(ref), rel=1e-13)
    assert weight(1, spec) == pytest.approx(0.1234103, abs=1e-7)


@pytest.mark.parametrize("gamma", [0.1, 0.25, 0.4, 0.45])
def test_weight_asymptotics(gamma):
    n, beta = 10**6, 0.05
    spec = GraphSpec(n, beta, gamma)
    ratio = weight(1, spec) / ((beta / (1 - gamma)) * n ** gamma)
    assert abs(ratio - 1) < 1e-3


def test_weights_strictly_decreasing_and_total():
    spec = GraphSpec(500, 0.1, 0.3)
    w = weights(spec)
    assert np.all(np.diff(w[1:]) < 0)
    assert w[1:].sum() == pytest.approx(total_weight(spec), rel=1e-12)
    assert w[0] == 0


# -- spec validation ------------------------------------------------------------

def test_subcritical_gate():
    with pytest.raises(ValueError, match="not subcritical"):
        GraphSpec(100, 0.3, 0.4)
    GraphSpec(100, 0.3, 0.4, allow_nonsubcritical=True)
    assert spec_violations(1, -1, 0, "xx")  # several problems at once
    assert len(spec_violations(1, -1, 0, "xx")) == 4


def test_variant_case_insensitive():
    assert GraphSpec(10, 0.1, 0.2, "SNR").variant == "snr"


# -- sampling -------------------------------------------------------------------

def test_two_vertex_edge_frequency():
    spec = GraphSpec(2, 0.3, 0.3)
    p = edge_prob(1, 2, spec)
    reps = 100_000
    gen = RngStream(5, "t").generator()
    hits = sum(sample_graph(spec, gen).edge_count for _ in range(reps))
    se = math.sqrt(p * (1 - p) / reps)
    assert abs(hits / reps - p) < 3 * se


def _pair_counts(spec, reps, method, seed):
    n = spec.n
    counts = np.zeros((n + 1, n + 1))
    for r in range(reps):
        g = sample_graph(spec, RngStream(seed, method, r), method=method)
        e = g.edge_array()
        np.add.at(counts, (e[:, 0], e[:, 1]), 1)
    return counts


@pytest.mark.parametrize("variant", ["cl", "snr", "grg"])
def test_pair_marginals_match_edge_prob(variant):
    # 20-pair sample at N=20; skip sampler vs closed form
    spec = GraphSpec(20, 0.3, 0.3, variant)
    reps = 100_000
    gen = RngStream(11, variant).generator()
    counts = np.zeros((21, 21))
    for _ in range(reps):
        e = sample_graph(spec, gen).edge_array()
        counts[e[:, 0], e[:, 1]] += 1
    pairs = [(i, j) for i in range(1, 21) for j in range(i + 1, 21)]
    pick = np.random.default_rng(0).choice(len(pairs), 20, replace=False)
    for k in pick:
        i, j = pairs[k]
        p = edge_prob(i, j, spec)
        se = math.sqrt(p * (1 - p) / reps)
        assert abs(counts[i, j] / reps - p) < 3 * se, (i, j)


def test_skip_and_enumerate_agree_in_law():
    spec = GraphSpec(40, 0.2, 0.35)
    reps = 4000
    a = _pair_counts(spec, reps, "skip", 1)
    b = _pair_counts(spec, reps, "enumerate", 2)
    ea, eb = a.sum() / reps, b.sum() / reps
    # mean edge counts within 4 combined standard errors (Poisson-ish bound)
    se = math.sqrt((ea + eb) / reps)
    assert abs(ea - eb) < 4 * se


def test_mnr_degree_of_vertex_one_counts_loops_twice():
    spec = GraphSpec(100, 0.1, 0.3, "mnr")
    reps = 10_000
    gen = RngStream(3, "mnr").generator()
    d = np.array([sample_graph(spec, gen).degree(1) for _ in range(reps)], dtype=float)
    w1 = weight(1, spec)
    # d(1) = Pois(w1 - loop mean) + 2 Pois(loop mean)
    loop_mean = edge_prob(1, 1, spec)
    assert abs(d.mean() - (w1 + loop_mean)) < 3 * d.std() / math.sqrt(reps)


def test_mnr_total_edge_count_at_vertex_is_poisson_weight():
    # the number of edges at vertex 1 (a loop counted once) is Pois(w(1))
    spec = GraphSpec(100, 0.1, 0.3, "mnr")
    reps = 10_000
    gen = RngStream(4, "mnr").generator()
    x = np.empty(reps)
    for r in range(reps):
        g = sample_graph(spec, gen)
        x[r] = g.multiplicities(1).sum() + g.loops[1]
    w1 = weight(1, spec)
    assert abs(x.mean() - w1) < 3 * math.sqrt(w1 / reps)


def test_collapsed_mnr_has_snr_marginals():
    spec = GraphSpec(12, 0.3, 0.3, "mnr")
    snr = spec.replace(variant="snr")
    reps = 20_000
    gen = RngStream(8, "collapse").generator()
    counts = np.zeros((13, 13))
    for _ in range(reps):
        e = collapse(sample_graph(spec, gen)).edge_array()
        counts[e[:, 0], e[:, 1]] += 1
    for i, j in [(1, 2), (1, 12), (3, 4), (5, 11), (11, 12)]:
        p = edge_prob(i, j, snr)
        se = math.sqrt(p * (1 - p) / reps)
        assert abs(counts[i, j] / reps - p) < 3 * se


def test_reproducible_and_distinct_streams():
    spec = GraphSpec(2000, 0.1, 0.4, "grg")
    a = sample_graph(spec, RngStream(9, "graph", 3))
    b = sample_graph(spec, RngStream(9, "graph", 3))
    c = sample_graph(spec, RngStream(9, "graph", 4))
    assert a == b
    assert not a == c


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 300), gamma=st.floats(0.05, 0.45), seed=st.integers(0, 2**32),
       variant=st.sampled_from(["cl", "snr", "grg"]))
def test_simple_graphs_are_symmetric_and_simple(n, gamma, seed, variant):
    beta = 0.9 * (1 - 2 * gamma)
    g = sample_graph(GraphSpec(n, beta, gamma, variant), RngStream(seed))
    assert g.is_simple
    for i, j, m in g.edges():
        assert i < j and m == 1
        assert g.has_edge(j, i)
    assert g.degrees[1:].sum() == 2 * g.edge_count


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 10**6), gamma=st.floats(0.01, 0.49), i=st.integers(1, 10**6), data=st.data())
def test_edge_prob_bounded_and_monotone(n, gamma, i, data):
    beta = data.draw(st.floats(1e-4, 1 - 2 * gamma - 1e-4))
    i = min(i, n - 1)
    j = data.draw(st.integers(i + 1, n))
    for v in ("cl", "snr", "grg"):
        spec = GraphSpec(n, beta, gamma, v)
        p = edge_prob(i, j, spec)
        assert 0 <= p <= 1
        if j < n:
            assert edge_prob(i, j + 1, spec) <= p


# -- collapse and text format ----------------------------------------------------------

def test_collapse_example_and_idempotent():
    g = Graph.from_edges(3, [(1, 2)], mult=[3], loops={1: 1})
    c = collapse(g)
    assert list(c.edges()) == [(1, 2, 1)]
    assert c.loops.sum() == 0
    assert collapse(c) == c


def test_collapse_preserves_components():
    for r in range(100):
        g = sample_graph(GraphSpec(50, 0.2, 0.3, "mnr"), RngStream(21, "mnr", r))
        a = components(g).component_id
        b = components(collapse(g)).component_id
        assert np.array_equal(a, b)


def test_text_roundtrip():
    g = sample_graph(GraphSpec(300, 0.2, 0.3, "mnr"), RngStream(2))
    text = format_graph(g)
    assert text.splitlines()[0] == "300 0.2 0.3 mnr"
    h = parse_graph(text)
    assert h == g
    assert h.meta["variant"] == "mnr"


def test_degree_counts_loops_twice():
    g = Graph.from_edges(2, [(1, 2)], mult=[2], loops={1: 1})
    assert g.degree(1) == 4 and g.degree(2) == 2
    assert g.edge_count == 3
