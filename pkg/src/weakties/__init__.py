"""Tie-strength percolation and push/republish diffusion on social graphs."""
from ._accel import backend
from .errors import ConfigError, DataError, WeakTiesError
from .graph import (ComponentLabeling, Graph, IdMap, bfs_rings, connected_components,
                    generate_community_graph, generate_scale_free, load_edge_list, write_edge_list)
from .strength import (StrengthTable, all_strengths, degree_strength_correlation, edge_strength,
                       strength_cdf)
from .percolation import (PercolationSweep, RemovalOrder, critical_fraction, fraction_grid,
                          percolation_sweep, removal_order, s_bar)
from .diffusion import (MetricSeries, ModelParams, f_local_profile, remove_then_diffuse,
                        republish_count, run_diffusion, run_replications, selection_weights)

__version__ = "0.1.0"
