"""Closed-form power control for the half-duplex relaying mode.

For fixed surface phases the three power variables are the BS allocation
fractions (alpha_n, alpha_f) and the relay fraction beta.  Feasibility
reduces to an interval test on alpha_n and beta, and the optimum is the
cheaper of two corner candidates: push beta down with alpha_f at its lower
envelope, or set beta = 0 and raise alpha_f until the combining constraint
holds.  Both candidates are validated against the full constraint set; in
the rare case both fail while the region is nonempty, the grid oracle takes
over (and the instance is logged).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .gains import LinkGains

log = logging.getLogger(__name__)

RATE_TOL = 1e-9  # absolute tolerance on rate/constraint equalities


@dataclass(frozen=True)
class SinrTargets:
    """SINR thresholds equivalent to the rate QoS floors.

    HD pays the two-slot pre-log: t = 2^(2 R_th) - 1.  FD: t = 2^R_th - 1.
    """

    t_n: float
    t_f: float
    mode: str

    def __post_init__(self):
        if self.mode not in ("HD", "FD"):
            raise ValueError(f"mode must be HD or FD, got {self.mode!r}")
        if self.t_n < 0 or self.t_f < 0:
            raise ValueError("targets must be >= 0")


@dataclass(frozen=True)
class PowerSolution:
    alpha_n: float
    alpha_f: float
    beta: float
    feasible: bool
    total_watts: float

    @classmethod
    def make(cls, alpha_n: float, alpha_f: float, beta: float,
             p_bs: float, p_n: float) -> "PowerSolution":
        total = (alpha_n + alpha_f) * p_bs + beta * p_n
        return cls(alpha_n, alpha_f, beta, True, total)

    @classmethod
    def infeasible(cls) -> "PowerSolution":
        return cls(0.0, 0.0, 0.0, False, float("inf"))


@dataclass(frozen=True)
class FeasibleBox:
    """Interval bounds whose non-emptiness decides feasibility."""

    alpha_min: float
    alpha_max: float
    beta_min: float
    beta_max: float
    feasible: bool


class InfeasibleError(ValueError):
    """Raised when an optimizer is called on an infeasible instance."""

    def __init__(self, box: FeasibleBox):
        super().__init__(f"power control infeasible: {box}")
        self.box = box


def hd_targets(r_n_th: float, r_f_th: float) -> SinrTargets:
    if r_n_th < 0 or r_f_th < 0:
        raise ValueError("rate thresholds must be >= 0")
    return SinrTargets(2.0 ** (2.0 * r_n_th) - 1.0,
                       2.0 ** (2.0 * r_f_th) - 1.0, "HD")


def hd_rates(g: LinkGains, p: PowerSolution) -> tuple[float, float, float, float]:
    """(R_n_to_n, R_n_to_f, R_mrc, R_f_to_f) in bits/s/Hz."""
    an, af, b = p.alpha_n, p.alpha_f, p.beta
    r_nn = 0.5 * np.log2(1.0 + an * g.gamma_bn)
    r_nf = 0.5 * np.log2(1.0 + af * g.gamma_bn / (an * g.gamma_bn + 1.0))
    r_mrc = 0.5 * np.log2(1.0 + af * g.gamma_bf / (an * g.gamma_bf + 1.0)
                          + b * g.gamma_d)
    return r_nn, r_nf, r_mrc, min(r_nf, r_mrc)


def constraint_margins(g: LinkGains, p: PowerSolution,
                       t: SinrTargets) -> np.ndarray:
    """Normalized margins of the three QoS constraints in SINR form.

    Entry k is (achieved_k - target_k) / (1 + target_k); all >= 0 means the
    power solution meets every rate floor.
    """
    an, af, b = p.alpha_n, p.alpha_f, p.beta
    s_nn = an * g.gamma_bn
    s_nf = af * g.gamma_bn / (an * g.gamma_bn + 1.0)
    s_mrc = af * g.gamma_bf / (an * g.gamma_bf + 1.0) + b * g.gamma_d
    return np.array([(s_nn - t.t_n) / (1.0 + t.t_n),
                     (s_nf - t.t_f) / (1.0 + t.t_f),
                     (s_mrc - t.t_f) / (1.0 + t.t_f)])


def _satisfies_all(g: LinkGains, t: SinrTargets, an: float, af: float,
                   b: float) -> bool:
    if not (-RATE_TOL <= an <= af + RATE_TOL):
        return False
    if an + af > 1.0 + RATE_TOL or not (-RATE_TOL <= b <= 1.0 + RATE_TOL):
        return False
    p = PowerSolution(an, af, b, True, 0.0)
    return bool(np.all(constraint_margins(g, p, t) >= -RATE_TOL))


def hd_feasibility(g: LinkGains, t: SinrTargets) -> FeasibleBox:
    """Interval gate: a power triple exists iff alpha_min <= alpha_max and
    beta_min <= beta_max (beta_max is the relay's full budget)."""
    if g.mode != "HD" or t.mode != "HD":
        raise ValueError("hd_feasibility needs HD gains and HD targets")
    if t.t_n == 0.0 and t.t_f == 0.0:
        return FeasibleBox(0.0, 0.5, 0.0, 1.0, True)
    if g.gamma_bn <= 0.0:
        return FeasibleBox(float("inf"), 0.5, 0.0, 1.0, False)

    alpha_min = t.t_n / g.gamma_bn
    alpha_max = min(0.5, (g.gamma_bn - t.t_f) / (g.gamma_bn * (t.t_f + 1.0)))

    # Lowest relay fraction, reached at alpha_n = alpha_min with the whole
    # remaining BS budget 1 - alpha_min on the far user's stream.
    if g.gamma_bf > 0.0:
        need = t.t_f - (g.gamma_bn - t.t_n) / (t.t_n + g.gamma_bn / g.gamma_bf)
    else:
        need = t.t_f
    if need <= 0.0:
        beta_min = 0.0
    elif g.gamma_d > 0.0:
        beta_min = need / g.gamma_d
    else:
        beta_min = float("inf")  # no relay path can close the gap

    feasible = alpha_min <= alpha_max and beta_min <= 1.0
    return FeasibleBox(alpha_min, alpha_max, beta_min, 1.0, feasible)


def hd_optimal_power(g: LinkGains, t: SinrTargets, cfg) -> PowerSolution:
    """Minimum-total-power triple for fixed phases (two-candidate argmin)."""
    box = hd_feasibility(g, t)
    if not box.feasible:
        raise InfeasibleError(box)
    if t.t_n == 0.0 and t.t_f == 0.0:
        return PowerSolution.make(0.0, 0.0, 0.0, cfg.p_bs, cfg.p_n)

    a_min = box.alpha_min
    envelope = max(a_min, a_min * t.t_f + t.t_f / g.gamma_bn)
    candidates = []

    # Direction 1: cheapest BS split, then the lowest relay fraction the
    # combining constraint still demands.  The relay budget caps beta at 1,
    # which pushes alpha_f up to what the combining constraint needs at
    # full relay power (a regime the two-direction form leaves implicit).
    af1 = envelope
    if g.gamma_bf > 0.0 and t.t_f > g.gamma_d:
        af1 = max(af1, (t.t_f - g.gamma_d) * (a_min * g.gamma_bf + 1.0)
                  / g.gamma_bf)
    need1 = t.t_f - af1 * g.gamma_bf / (a_min * g.gamma_bf + 1.0)
    if need1 <= 0.0:
        candidates.append((a_min, af1, 0.0))
    elif g.gamma_d > 0.0:
        candidates.append((a_min, af1, min(need1 / g.gamma_d, 1.0)))

    # Direction 2: no relay power; alpha_f absorbs the combining constraint
    # (and stays above the SIC-decoding envelope).
    if g.gamma_bf > 0.0:
        af2 = max(t.t_f * (a_min * g.gamma_bf + 1.0) / g.gamma_bf, envelope)
        candidates.append((a_min, af2, 0.0))

    valid = [c for c in candidates if _satisfies_all(g, t, *c)]
    if not valid:
        # Theorem-2-incomplete region (e.g. the optimum rides beta = 1);
        # the grid oracle takes over.  The feasibility proof's corner point
        # (alpha_min, 1 - alpha_min, beta_min) is feasible whenever the gate
        # passes, so the result stays well-defined even off-grid.
        log.warning("both HD candidates invalid on a feasible box; "
                    "falling back to grid search: gains=%s targets=%s", g, t)
        corner = (a_min, 1.0 - a_min, min(1.0, max(0.0, box.beta_min)))
        if _satisfies_all(g, t, *corner):
            valid.append(corner)
        from . import oracle
        ref = oracle.grid_search_power(g, t, cfg, step=1e-3)
        if ref.feasible:
            valid.append((ref.alpha_n, ref.alpha_f, ref.beta))
        if not valid:
            raise InfeasibleError(box)

    best = min(valid, key=lambda c: (c[0] + c[1]) * cfg.p_bs + c[2] * cfg.p_n)
    an, af, b = best
    return PowerSolution.make(an, af, min(max(b, 0.0), 1.0), cfg.p_bs, cfg.p_n)
