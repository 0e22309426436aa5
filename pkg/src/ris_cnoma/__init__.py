"""Transmit-power minimization for a surface-assisted two-user cooperative
NOMA cell: channel simulation, closed-form HD/FD power control, SDR-based
phase optimization, alternating optimization, brute-force verification and
a Monte-Carlo experiment harness.
"""

from .alt_opt import AoConfig, AoTrace, baseline_no_ris, optimize_fd, optimize_hd
from .experiments import ExperimentRecord, ExperimentSpec, run_experiment
from .gains import LinkGains, combined_gain, fd_gains, hd_gains, wrap_phases
from .oracle import coordinate_ascent_phases, grid_feasible, grid_search_power
from .phase_opt import (LiftedProblem, build_fd_lifting, build_hd_lifting,
                        ct_phase_alignment, gaussian_randomization)
from .power_fd import (FdCandidateSet, fd_candidates, fd_feasibility,
                       fd_optimal_power, fd_rates, fd_targets)
from .power_hd import (FeasibleBox, InfeasibleError, PowerSolution,
                       SinrTargets, hd_feasibility, hd_optimal_power,
                       hd_rates, hd_targets)
from .scenario import (ChannelRealization, ScenarioConfig, generate_realization,
                       path_loss, sample_rayleigh, sample_rician)
from .sdp import (SdpInstance, SdpOptions, SdpSolution, check_solution,
                  eig_factor, solve_max_slack)

__version__ = "0.1.0"

__all__ = [
    "AoConfig", "AoTrace", "ChannelRealization", "ExperimentRecord",
    "ExperimentSpec", "FdCandidateSet", "FeasibleBox", "InfeasibleError",
    "LiftedProblem", "LinkGains", "PowerSolution", "ScenarioConfig",
    "SdpInstance", "SdpOptions", "SdpSolution", "SinrTargets",
    "baseline_no_ris", "build_fd_lifting", "build_hd_lifting",
    "check_solution", "combined_gain", "coordinate_ascent_phases",
    "ct_phase_alignment", "eig_factor", "fd_candidates", "fd_feasibility",
    "fd_gains", "fd_optimal_power", "fd_rates", "fd_targets",
    "gaussian_randomization", "generate_realization", "grid_feasible",
    "grid_search_power", "hd_feasibility", "hd_gains", "hd_optimal_power",
    "hd_rates", "hd_targets", "optimize_fd", "optimize_hd", "path_loss",
    "run_experiment", "sample_rayleigh", "sample_rician", "solve_max_slack",
    "wrap_phases",
]
