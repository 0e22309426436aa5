"""Alternating optimization: closed-form power control and relaxation-based
phase updates, repeated until the total-power objective stalls.

The relaying-slot phases (HD) are set once by the closed-form alignment;
the broadcast-slot phases start from the far-user cascade alignment (by
default) and are refined each iteration through the lifted feasibility
problem plus Gaussian randomization.  Because the randomization never
discards the incumbent, a feasible first iteration stays feasible and the
objective sequence is non-increasing.  With all cascaded links zeroed the
loop collapses to the single closed-form solve used as the no-surface
benchmark.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import phase_opt, power_fd, power_hd
from .gains import fd_gains, hd_gains, wrap_phases
from .power_hd import InfeasibleError, PowerSolution
from .scenario import ChannelRealization, ScenarioConfig
from .sdp import SdpOptions, solve_max_slack

INIT_MODES = ("random-phases", "ct-aligned", "zeros")


@dataclass(frozen=True)
class AoConfig:
    epsilon: float = 1e-3  # watts; stop when the per-iteration drop is smaller
    max_iters: int = 20
    num_samples: int = 1000
    init_mode: str = "ct-aligned"
    sdp_options: SdpOptions = field(
        default_factory=lambda: SdpOptions(tol_bisect=1e-2, inner_cap=1500,
                                           proj_tol=1e-6, max_span=0.5))
    seed: int = 0

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.init_mode not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}")


@dataclass
class AoTrace:
    objectives: list[float]
    power: PowerSolution
    theta1: np.ndarray
    theta2: np.ndarray | None
    iterations: int
    feasible: bool
    feasible_flags: list[bool]


def _init_phases(ch: ChannelRealization, mode: str, init_mode: str,
                 rng: np.random.Generator) -> np.ndarray:
    if init_mode == "random-phases":
        return rng.uniform(0.0, 2.0 * np.pi, ch.m_elements)
    if init_mode == "zeros":
        return np.zeros(ch.m_elements)
    # Coherent alignment of the BS -> surface -> far-user cascade.
    return phase_opt.align_phases(ch.h_bf, ch.h_rf, ch.h_br)


def _run_loop(ch: ChannelRealization, cfg: ScenarioConfig, ao: AoConfig,
              mode: str, rng: np.random.Generator | None) -> AoTrace:
    rng = rng if rng is not None else np.random.default_rng(ao.seed)
    theta1 = wrap_phases(_init_phases(ch, mode, ao.init_mode, rng))
    theta2 = None
    if mode == "HD":
        theta2 = phase_opt.ct_phase_alignment(ch.h_nf, ch.h_nr, ch.h_rf_hat)
        targets = power_hd.hd_targets(cfg.r_n_th, cfg.r_f_th)
    else:
        targets = power_fd.fd_targets(cfg.r_n_th, cfg.r_f_th)

    objectives: list[float] = []
    flags: list[bool] = []
    power = PowerSolution.infeasible()

    for it in range(1, ao.max_iters + 1):
        if mode == "HD":
            g = hd_gains(ch, theta1, theta2, cfg)
            gate = power_hd.hd_feasibility(g, targets)
        else:
            g = fd_gains(ch, theta1, cfg)
            gate = power_fd.fd_feasibility(g, targets)
        if not gate.feasible:
            flags.append(False)
            break
        power = (power_hd.hd_optimal_power(g, targets, cfg) if mode == "HD"
                 else power_fd.fd_optimal_power(g, targets, cfg))
        objectives.append(power.total_watts)
        flags.append(True)

        stalled = (len(objectives) >= 2
                   and objectives[-2] - objectives[-1] < ao.epsilon)
        if stalled or math.isinf(ao.epsilon) or ch.m_elements == 0 \
                or it == ao.max_iters:
            break

        if mode == "HD":
            lifted = phase_opt.build_hd_lifting(
                ch, power, targets, power.beta * g.gamma_d, cfg, theta1)
        else:
            lifted = phase_opt.build_fd_lifting(ch, power, targets, cfg, theta1)
        vbar = phase_opt.lifted_vector(theta1)
        sol = solve_max_slack(lifted.instance, ao.sdp_options,
                              warm_start=np.outer(vbar, vbar.conj()))
        theta1 = phase_opt.gaussian_randomization(sol, lifted,
                                                  ao.num_samples, rng)

    feasible = bool(flags and flags[0])
    return AoTrace(objectives, power, theta1, theta2, len(objectives),
                   feasible, flags)


def optimize_hd(ch: ChannelRealization, cfg: ScenarioConfig, ao: AoConfig,
                rng: np.random.Generator | None = None) -> AoTrace:
    """Alternating optimization for the two-slot relaying mode."""
    return _run_loop(ch, cfg, ao, "HD", rng)


def optimize_fd(ch: ChannelRealization, cfg: ScenarioConfig, ao: AoConfig,
                rng: np.random.Generator | None = None) -> AoTrace:
    """Alternating optimization for the single-slot relaying mode."""
    return _run_loop(ch, cfg, ao, "FD", rng)


def baseline_no_ris(ch: ChannelRealization, cfg: ScenarioConfig,
                    mode: str) -> PowerSolution:
    """Closed-form optimum with all cascaded links zeroed (direct links and,
    in FD, the self-interference stay).  Identical to optimize_* at M=0."""
    ch0 = ch.without_ris()
    zeros = np.zeros(ch0.m_elements)
    try:
        if mode == "HD":
            g = hd_gains(ch0, zeros, zeros, cfg)
            return power_hd.hd_optimal_power(
                g, power_hd.hd_targets(cfg.r_n_th, cfg.r_f_th), cfg)
        g = fd_gains(ch0, zeros, cfg)
        return power_fd.fd_optimal_power(
            g, power_fd.fd_targets(cfg.r_n_th, cfg.r_f_th), cfg)
    except InfeasibleError:
        return PowerSolution.infeasible()
