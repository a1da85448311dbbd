"""Sample a subcritical scale-free random graph and look at its components.

With beta + 2 gamma < 1 the graph breaks into many small pieces.  The
vertices with small index carry the largest weights, so the components that
contain them are the "big" ones; they are almost always trees, and vertex 1
is a star centre with roughly w(1) ~ beta/(1-gamma) N^gamma neighbours.
"""

import numpy as np

from irgvoter import GraphSpec, RngStream, sample_graph, weight
from irgvoter.structure import components, find_simple_double_star, structure_report

spec = GraphSpec(20_000, beta=0.1, gamma=0.4)
g = sample_graph(spec, RngStream(1, "graph"))
print(f"N = {g.n}, edges = {g.edge_count}")

dec = components(g)
sizes = dec.sizes()
print(f"{len(dec)} components, largest {sizes.max()}, mean size {sizes.mean():.2f}")
print(f"component of vertex 1 has {len(dec.of(1))} vertices")

# vertex 1: expected degree is its weight
print(f"d(1) = {g.degree(1)}, w(1) = {weight(1, spec):.1f}")

# big components are the ones holding a vertex of index <= K_gamma
rep = structure_report(g, spec, min_size=50, exact_diameter=False)
print(f"K_gamma = {rep.k_gamma:.1f}, {len(rep.big_vertices)} vertices in big components, "
      f"all big components trees: {rep.all_big_trees}")
for b in rep.big[:5]:
    print(f"  k={b.k:2d} degree={b.degree:3d} leaves={b.leaves:3d} component rep={b.component_rep}")

# double stars are the slow witnesses for the classical dynamics at high temperature
ds_spec = GraphSpec(100_000, beta=0.05, gamma=0.45)
for seed in range(1, 6):
    w = find_simple_double_star(sample_graph(ds_spec, RngStream(seed, "graph")), ds_spec)
    print(f"seed {seed}: " + ("no simple double star" if w is None
                               else f"hubs {w.hubs} with degrees {w.hub_degrees}"))
