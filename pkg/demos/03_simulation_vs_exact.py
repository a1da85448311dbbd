"""Monte Carlo consensus times against the exact values.

The simulator runs one Gillespie process per component.  On small graphs its
sample means should sit within a few standard errors of the exact solve; on
a sampled random graph the consensus time is the maximum over components.
"""

from irgvoter import GraphSpec, RngStream, sample_graph
from irgvoter.chains import build_generator, catalog, coalescence_time, consensus_time
from irgvoter.dynamics import CoalConfig, VoterConfig, batch, simulate_voter

cat = catalog(n_random=0)
for name in ("K2", "P3", "K13"):
    g = cat[name]
    rm = build_generator(g, dynamics="discursive", theta=1.0)
    exact = consensus_time(rm, "bernoulli", 0.3)
    st = batch(g, VoterConfig("discursive", 1.0, "bernoulli", 0.3), 20_000, RngStream(3, name))
    print(f"{name:4s} voter u=0.3   MC {st.mean:.4f} +- {st.stderr:.4f}   exact {exact:.4f}")
    exact = coalescence_time(build_generator(g))
    st = batch(g, CoalConfig("classical", 0.0), 20_000, RngStream(4, name))
    print(f"{name:4s} coalescing    MC {st.mean:.4f} +- {st.stderr:.4f}   exact {exact:.4f}")

g = sample_graph(GraphSpec(5_000, 0.1, 0.4), RngStream(5, "graph"))
out = simulate_voter(g, VoterConfig("classical", 0.0), RngStream(5, "voter"))
slow = max(out.per_component_tau.items(), key=lambda kv: kv[1])
print(f"random graph: tau_cons = {out.tau_cons:.2f} over {len(out.reps)} components, "
      f"slowest is the component of vertex {slow[0]}; {out.events} events")
