"""Exact voter and walk quantities on small graphs.

On a graph with a handful of vertices every quantity of interest is the
solution of a finite linear system: hitting and meeting times, the
coalescence time of walkers started everywhere, and the expected consensus
time from unique or random binary opinions.  Duality says the voter model
from unique opinions and the coalescing walks take the same time; the
binary start is sandwiched between 2u(1-u) t_coal and t_coal.
"""

from irgvoter.chains import bound_audit, build_generator, catalog, chain_quantities, consensus_time

cat = catalog(n_random=2)
for name in ("K2", "P3", "K13", "C4", "R5_00"):
    g = cat[name]
    for dyn, theta in (("classical", 0.0), ("classical", 2.0), ("discursive", 0.0)):
        rm = build_generator(g, dynamics=dyn, theta=theta)
        q = chain_quantities(rm, us=(0.1, 0.5))
        tu = consensus_time(rm, "unique")
        print(f"{name:6s} {dyn:10s} theta={theta:3.1f}  t_hit={q.t_hit:7.3f}  t_meet={q.t_meet:6.3f}  "
              f"t_coal={q.t_coal:6.3f}  t_cons(unique)={tu:6.3f}  "
              f"t_cons(0.1)={q.t_cons_u['0.1']:6.3f}  t_rel={q.t_rel:5.3f}")

# the audit evaluates every inequality with explicit constants
rep = bound_audit(build_generator(cat["P3"]))
for c in rep.checks:
    flag = "=" if c.equality else ("ok" if c.passed else "FAIL")
    print(f"  {c.name:30s} {c.lhs:10.4f} <= {c.rhs:10.4f}  {flag} {c.note}")
