"""End-to-end Bell experiment: protocol simulation, CHSH statistics, joint feasibility."""

from ..models import SettingsQuad
from .chsh import (
    CELLS,
    ChshEstimate,
    OptimizationResult,
    StrategyEnumeration,
    analytic_chsh,
    chsh_function,
    correlation_sweep,
    enumerate_deterministic_strategies,
    estimate_chsh,
    estimate_chsh_from_pmfs,
    grid_search_max_abs_chsh,
    mixture_chsh,
    optimize_angles,
)
from .feasibility import (
    FeasibilityResult,
    chsh_variants,
    empirical_pmfs,
    feasibility_for_pmfs,
    joint_feasibility,
    joint_pairwise_pmf,
    phase_one_simplex,
)
from .nosignal import NoSignalingResult, no_signaling_test, two_proportion_z
from .protocol import (
    ExperimentConfig,
    Network,
    has_alice_bob_edge,
    message_graph,
    run_protocol,
)

TSIRELSON_SETTINGS = SettingsQuad(0.0, 90.0, 45.0, 315.0)

__all__ = [
    "CELLS", "ChshEstimate", "OptimizationResult", "StrategyEnumeration", "analytic_chsh",
    "chsh_function", "correlation_sweep", "enumerate_deterministic_strategies", "estimate_chsh",
    "estimate_chsh_from_pmfs", "grid_search_max_abs_chsh", "mixture_chsh", "optimize_angles",
    "FeasibilityResult", "chsh_variants", "empirical_pmfs", "feasibility_for_pmfs",
    "joint_feasibility", "joint_pairwise_pmf", "phase_one_simplex",
    "NoSignalingResult", "no_signaling_test", "two_proportion_z",
    "ExperimentConfig", "Network", "has_alice_bob_edge", "message_graph", "run_protocol",
    "TSIRELSON_SETTINGS",
]
