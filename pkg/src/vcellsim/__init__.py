"""Uplink virtual-cell network simulator.

Pipeline: generate a network realization, cluster BSs into virtual cells,
build and color the BS interference graph, allocate frequency bands,
water-fill transmit powers per cell, then evaluate SIC rates under full
cross-cell interference. The harness sweeps the pipeline over Monte Carlo
realizations.
"""

from ._kernels import backend_name, get_kernels
from .clustering import (
    ClusterHierarchy,
    ScheduleInfeasibleError,
    SizeSchedule,
    VirtualCellPartition,
    affiliate_users,
    build_hierarchy,
    minimax_linkage,
    minimax_radius,
)
from .evaluator import (
    DecodingSchedule,
    RateReport,
    decode_cell,
    evaluate_system,
    interference_covariance,
    sic_rates_given_order,
)
from .freqalloc import (
    FrequencyPlan,
    allocate_group_bands,
    assign_bs_bands,
    assign_user_bands,
    build_frequency_plan,
)
from .harness import (
    AggregateRow,
    SweepConfig,
    SweepError,
    emit_csv,
    load_sweep_config,
    read_csv,
    run_sweep,
)
from .intergraph import Coloring, InterferenceGraph, build_interference_graph, color_graph
from .powalloc import (
    CellPowerProblem,
    CellSolveResult,
    PowerAllocation,
    build_cell_problem,
    cell_objective,
    effective_gains,
    solve_all_cells,
    solve_cell,
    waterfill_single_user,
)
from .scenario import (
    ChannelParams,
    NetworkRealization,
    ScenarioConfig,
    dbm_to_mw,
    distance,
    generate_realization,
    load_scenario_config,
)

__version__ = "0.1.0"

__all__ = [
    "AggregateRow",
    "CellPowerProblem",
    "CellSolveResult",
    "ChannelParams",
    "ClusterHierarchy",
    "Coloring",
    "DecodingSchedule",
    "FrequencyPlan",
    "InterferenceGraph",
    "NetworkRealization",
    "PowerAllocation",
    "RateReport",
    "ScenarioConfig",
    "ScheduleInfeasibleError",
    "SizeSchedule",
    "SweepConfig",
    "SweepError",
    "VirtualCellPartition",
    "affiliate_users",
    "allocate_group_bands",
    "assign_bs_bands",
    "assign_user_bands",
    "backend_name",
    "build_cell_problem",
    "build_frequency_plan",
    "build_hierarchy",
    "build_interference_graph",
    "cell_objective",
    "color_graph",
    "dbm_to_mw",
    "decode_cell",
    "distance",
    "effective_gains",
    "emit_csv",
    "evaluate_system",
    "generate_realization",
    "get_kernels",
    "interference_covariance",
    "load_scenario_config",
    "load_sweep_config",
    "minimax_linkage",
    "minimax_radius",
    "read_csv",
    "run_sweep",
    "sic_rates_given_order",
    "solve_all_cells",
    "solve_cell",
    "waterfill_single_user",
]
