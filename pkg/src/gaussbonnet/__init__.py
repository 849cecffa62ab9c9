"""Exterior calculus on weighted graphs and Kirchhoff current flows on truncated infinite graphs."""
from .cochains import Cochain0, Cochain1, extend_by_zero, inner0, inner1, restrict
from .graph import (
    GraphError, MetricAssignment, ParseError, Subgraph, WeightedGraph, complement, degree,
    metric_distance, parse_graph, serialize_graph,
)
from .hodge import (
    Cycle, FlandersProblem, FlandersSolution, NonzeroMean, NotConverged, SolverConfig, cycle_form,
    fundamental_cycles, period, poisson0, positivity_estimate, project_ker_delta, solve_flanders,
)
from .operators import assemble, d, delta, gauss_bonnet, laplacian0, laplacian1

__version__ = "0.1.0"
