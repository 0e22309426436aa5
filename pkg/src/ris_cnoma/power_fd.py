"""Closed-form power control for the full-duplex relaying mode.

Relaying and broadcast share one slot, so the relay's residual
self-interference couples beta into both near-user constraints.  The
near-user decoding constraint pins alpha_n to an affine function of beta;
feasibility is an interval test on beta plus the half-budget cap on
alpha_n, and the optimum sits on one of at most three corner points of
the (alpha_n, beta) region, each completed by the smallest admissible
alpha_f.  With all cascaded links zeroed this same path is the
"FD without surface" benchmark.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .gains import LinkGains
from .power_hd import (RATE_TOL, FeasibleBox, InfeasibleError, PowerSolution,
                       SinrTargets)

log = logging.getLogger(__name__)

_C_TOL = 1e-12  # tie tolerance on the two beta-slope constants


@dataclass(frozen=True)
class FdCandidateSet:
    """Corner candidates (alpha_n[i], beta[i]) with their completed alpha_f."""

    l: int
    alpha_n_list: np.ndarray
    beta_list: np.ndarray
    alpha_f_list: np.ndarray
    region_case: int


def fd_targets(r_n_th: float, r_f_th: float) -> SinrTargets:
    if r_n_th < 0 or r_f_th < 0:
        raise ValueError("rate thresholds must be >= 0")
    return SinrTargets(2.0 ** r_n_th - 1.0, 2.0 ** r_f_th - 1.0, "FD")


def fd_rates(g: LinkGains, p: PowerSolution) -> tuple[float, float, float, float]:
    """(R_n_to_n, R_n_to_f, R_mrc, R_f_to_f) in bits/s/Hz."""
    an, af, b = p.alpha_n, p.alpha_f, p.beta
    r_nf = np.log2(1.0 + af * g.gamma_bn / (an * g.gamma_bn + b * g.gamma_si + 1.0))
    r_nn = np.log2(1.0 + an * g.gamma_bn / (b * g.gamma_si + 1.0))
    r_mrc = np.log2(1.0 + (af * g.gamma_bf + b * g.gamma_d) / (an * g.gamma_bf + 1.0))
    return r_nn, r_nf, r_mrc, min(r_nf, r_mrc)


def constraint_margins(g: LinkGains, p: PowerSolution,
                       t: SinrTargets) -> np.ndarray:
    """Normalized SINR-domain margins of the three QoS constraints."""
    an, af, b = p.alpha_n, p.alpha_f, p.beta
    s_nn = an * g.gamma_bn / (b * g.gamma_si + 1.0)
    s_nf = af * g.gamma_bn / (an * g.gamma_bn + b * g.gamma_si + 1.0)
    s_mrc = (af * g.gamma_bf + b * g.gamma_d) / (an * g.gamma_bf + 1.0)
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


def fd_feasibility(g: LinkGains, t: SinrTargets) -> FeasibleBox:
    """Interval gate on beta plus the half-budget cap on alpha_n.

    alpha_min/alpha_max are the pinned alpha_n values at beta_min/beta_max;
    feasible iff beta_min <= beta_max and alpha_min <= 1/2.
    """
    if g.mode != "FD" or t.mode != "FD":
        raise ValueError("fd_feasibility needs FD gains and FD targets")
    if t.t_n == 0.0 and t.t_f == 0.0:
        return FeasibleBox(0.0, 0.0, 0.0, 1.0, True)
    if g.gamma_bn <= 0.0:
        return FeasibleBox(float("inf"), float("inf"), 0.0, 1.0, False)

    beta_lo, beta_hi = 0.0, 1.0

    # Near user's own rate vs the BS budget: n2 - d2*beta >= 0 up to scale.
    n2 = g.gamma_bn - t.t_f - t.t_n * (1.0 + t.t_f)
    d2 = g.gamma_si * (t.t_n * (1.0 + t.t_f) + t.t_f)
    if d2 > 0.0:
        beta_hi = min(beta_hi, n2 / d2)
    elif n2 < 0.0:
        beta_lo, beta_hi = 1.0, 0.0  # beta-independent and violated

    # Near user's own rate vs the combining constraint: the sign of c1 - c2
    # decides whether relay power helps or hurts.
    c1 = (g.gamma_bf / g.gamma_bn) * (1.0 + t.t_f) * t.t_n * g.gamma_si
    c2 = g.gamma_d
    n3 = g.gamma_bf - t.t_f - g.gamma_bf * (1.0 + t.t_f) * t.t_n / g.gamma_bn
    if abs(c1 - c2) <= _C_TOL:
        if n3 < 0.0:
            beta_lo, beta_hi = 1.0, 0.0
    elif c1 < c2:
        beta_lo = max(beta_lo, n3 / (c1 - c2))
    else:
        beta_hi = min(beta_hi, n3 / (c1 - c2))

    slope = g.gamma_si * t.t_n / g.gamma_bn
    alpha_min = slope * beta_lo + t.t_n / g.gamma_bn
    alpha_max = slope * beta_hi + t.t_n / g.gamma_bn
    feasible = beta_lo <= beta_hi and alpha_min <= 0.5
    return FeasibleBox(alpha_min, alpha_max, beta_lo, beta_hi, feasible)


def fd_candidates(g: LinkGains, t: SinrTargets,
                  box: FeasibleBox) -> FdCandidateSet:
    """Corner candidates of the (alpha_n, beta) region.

    beta_c is the crossing of the two far-user bounds; it is clamped into
    [beta_min, beta_max], and the candidate list follows from which pinned
    alpha values stay under the half-budget cap.  Candidates that bust the
    SIC ordering or the BS budget after completing alpha_f are dropped.
    """
    if not box.feasible:
        raise InfeasibleError(box)
    slope = g.gamma_si * t.t_n / g.gamma_bn
    intercept = t.t_n / g.gamma_bn

    # Crossing of the two alpha_f lower bounds (equivalently of the two
    # alpha_n upper bounds); beyond it the binding far-user constraint
    # switches, so the piecewise-affine objective can only kink here.
    num_c = t.t_f * (g.gamma_bn - g.gamma_bf)
    den_c = g.gamma_bn * g.gamma_d + g.gamma_bf * g.gamma_si * t.t_f
    if den_c > 0.0:
        beta_c = num_c / den_c
    else:
        beta_c = float("inf") if num_c > 0 else (-float("inf") if num_c < 0 else 0.0)

    b_min, b_max = box.beta_min, box.beta_max
    a_min, a_max = box.alpha_min, box.alpha_max
    if beta_c < b_min:
        a0, b0 = a_min, b_min
    elif beta_c <= b_max:
        a0, b0 = slope * beta_c + intercept, beta_c
    else:
        a0, b0 = a_max, b_max

    if a0 <= 0.5 and a_max <= 0.5:
        case, alphas, betas = 1, [a_min, a0, a_max], [b_min, b0, b_max]
    elif a0 <= 0.5:
        case, alphas, betas = 2, [a_min, a0], [b_min, b0]
    elif a_max <= 0.5:
        case, alphas, betas = 3, [a_min, a_max], [b_min, b_max]
    else:
        case, alphas, betas = 4, [a_min], [b_min]

    an = np.array(alphas)
    bb = np.array(betas)
    x1 = t.t_f * an + (g.gamma_si * t.t_f / g.gamma_bn) * bb + t.t_f / g.gamma_bn
    if g.gamma_bf > 0.0:
        x2 = t.t_f * an - (g.gamma_d / g.gamma_bf) * bb + t.t_f / g.gamma_bf
    else:
        # No BS-far link: the combining constraint leans on relay power only.
        x2 = np.where(bb * g.gamma_d >= t.t_f - RATE_TOL, 0.0, np.inf)
    # alpha_f's lower envelope includes the SIC floor alpha_n (binding for
    # small far-user targets); only budget violators are dropped.
    af = np.maximum(np.maximum(x1, x2), an)

    keep = af <= 1.0 - an + RATE_TOL
    if not np.all(keep):
        an, bb, af = an[keep], bb[keep], af[keep]
    return FdCandidateSet(int(an.size), an, bb, af, case)


def fd_optimal_power(g: LinkGains, t: SinrTargets, cfg) -> PowerSolution:
    """Minimum-total-power triple for fixed phases (corner-point argmin)."""
    box = fd_feasibility(g, t)
    if not box.feasible:
        raise InfeasibleError(box)
    if t.t_n == 0.0 and t.t_f == 0.0:
        return PowerSolution.make(0.0, 0.0, 0.0, cfg.p_bs, cfg.p_n)

    cs = fd_candidates(g, t, box)
    valid = [(cs.alpha_n_list[i], cs.alpha_f_list[i], cs.beta_list[i])
             for i in range(cs.l)
             if _satisfies_all(g, t, cs.alpha_n_list[i], cs.alpha_f_list[i],
                               cs.beta_list[i])]
    if not valid:
        # The beta_min corner with alpha_f raised to the SIC floor is
        # feasible whenever the gate passes; the grid oracle refines.
        log.warning("all FD candidates invalid on a feasible region; "
                    "falling back to grid search: gains=%s targets=%s", g, t)
        an0 = box.alpha_min
        x1 = t.t_f * an0 + (g.gamma_si * t.t_f / g.gamma_bn) * box.beta_min \
            + t.t_f / g.gamma_bn
        x2 = t.t_f * an0 - (g.gamma_d / g.gamma_bf) * box.beta_min \
            + t.t_f / g.gamma_bf if g.gamma_bf > 0 else 0.0
        corner = (an0, max(x1, x2, an0), box.beta_min)
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
    return PowerSolution.make(float(an), float(af), float(min(max(b, 0.0), 1.0)),
                              cfg.p_bs, cfg.p_n)
