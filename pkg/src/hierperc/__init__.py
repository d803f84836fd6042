"""Long-range percolation on hierarchical (ultrametric) lattices.

Sampling of the distance-dependent random graph, per-ball cluster densities
and their Monte Carlo renormalisation recursion, annulus cutsets, effective
resistance diagnostics and nearest-neighbour random walks, bound together by
a reproducible experiment CLI.
"""

__version__ = "0.1.0"

from .model import (AnalysisParams, ConnectivityProfile,  # noqa: F401
                    ScheduleProfile)
from .sampler import (PercolationGraph, SampleConfig, load_graph,  # noqa: F401
                      sample_graph, save_graph, thin_graph)
from .space import AnnulusSpec, BallSpec, HAddress, hdist  # noqa: F401
