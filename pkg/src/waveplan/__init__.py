"""Optimal influence-budget allocation over consensus networks.

Spectral water-filling produces exact bang-bang schedules for linear
objectives, certifies switch-count bounds, and cross-checks everything
against simulation and brute-force enumeration oracles.
"""

from .bounds import (
    SwitchBoundReport,
    bound_general,
    bound_linear,
    count_exp_poly_zeros,
    switch_bound_report,
)
from .bundles import seven_agent_problem, seven_agent_sigmoid_problem
from .costate import (
    ChannelProfile,
    TerminalCostate,
    adjoint_check,
    channel_profile,
    eval_h,
    integrate_h,
    terminal_costate,
)
from .dynamics import Trajectory, closed_form_gain, objective_value, simulate
from .errors import ContractError, NumericalError, ValidationError
from .graph import (
    Laplacian,
    SpectralDecomposition,
    WeightedGraph,
    build_laplacian,
    random_geometric_graph,
    spectral_decompose,
)
from .oracle import EnumerationSpec, OracleResult, enumerate_best, grid_slack
from .problem import (
    CampaignProblem,
    Channel,
    ConditionReport,
    CostModel,
    Drift,
    Objective,
    check_conditions,
    problem_from_dict,
    problem_to_dict,
    validate_problem,
)
from .sigmoid import LateDeciderSet, SigmoidSolution, late_deciders, solve_sigmoid
from .sweep import run_sweep
from .waterfill import (
    BangBangSchedule,
    ChannelSchedule,
    WaterfillSolution,
    on_set,
    solve,
    solve_with_costate,
    spend_for_beta,
    threshold_profile,
)

__version__ = "0.1.0"
