"""Graph-fused lasso solvers (decomposed ADMM and network lasso) and the local rate model."""

from ._core import (
    DimensionError,
    EdgePartition,
    Graph,
    GraphError,
    RateError,
    block_soft_threshold,
    chain_graph,
    default_rho_grid,
    empty_partition,
    fused_pair_solve,
    gen_chain,
    gen_grid,
    gen_jump_chain,
    greedy_matching,
    grid_graph,
    grid_partition,
    is_maximal,
    load_edge_list,
    objective,
    rate_curve,
    solve,
)

__all__ = [
    "DimensionError",
    "EdgePartition",
    "Graph",
    "GraphError",
    "RateError",
    "block_soft_threshold",
    "chain_graph",
    "default_rho_grid",
    "empty_partition",
    "fused_pair_solve",
    "gen_chain",
    "gen_grid",
    "gen_jump_chain",
    "greedy_matching",
    "grid_graph",
    "grid_partition",
    "is_maximal",
    "load_edge_list",
    "objective",
    "rate_curve",
    "solve",
]
