"""Voter-model consensus on subcritical scale-free random graphs.

Monte Carlo engines, exact small-chain solvers and structural statistics for
the classical and discursive voter models on the inhomogeneous random graph
class with edge probabilities ``beta * N**(2*gamma - 1) * (i*j)**(-gamma)``.
"""

__version__ = "0.1.0"

from .rng import RngStream
from .graphgen import Graph, GraphSpec, collapse, edge_prob, sample_graph, weight

__all__ = [
    "__version__",
    "RngStream",
    "Graph",
    "GraphSpec",
    "collapse",
    "edge_prob",
    "sample_graph",
    "weight",
]
