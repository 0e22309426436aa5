"""Independent brute-force verifiers for the closed-form optimizers.

The grid search scans (alpha_n, alpha_f, beta) exhaustively and evaluates
the QoS constraints from the SINR expressions re-implemented here on
purpose: a disagreement with the closed-form modules means one of the two
is wrong.  Pruning only ever uses the monotone objective (a larger
coefficient at equal others costs more), never constraint reasoning.
The coordinate-ascent phase sweep is a plain baseline for judging the
relaxation-based phase optimizer.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .gains import cascade_coefficient
from .power_hd import PowerSolution, SinrTargets

_EPS = 1e-9  # same equality tolerance as the closed-form modules


@njit(cache=True)
def _grid_scan(hd_mode, gbn, gbf, gd, gsi, tn, tf, pbs, pn, step, feas_only):
    """Exhaustive scan; returns (found, alpha_n, alpha_f, beta).

    Grid is {0, step, ..., 1} on each axis, restricted by the SIC ordering
    alpha_n <= alpha_f and the budget alpha_n + alpha_f <= 1.  Break rules
    are objective-dominance only: within a (alpha_n, beta) pair totals rise
    with alpha_f, within an alpha_n they rise with beta, and across
    alpha_n the 2*alpha_n*pbs floor rises.
    """
    n = int(round(1.0 / step))
    best_total = np.inf
    best_an = -1.0
    best_af = -1.0
    best_b = -1.0
    found = False
    for i_an in range(n // 2 + 1):
        an = i_an * step
        if an > 0.5:
            break
        if 2.0 * an * pbs > best_total + 1e-15:
            break
        for i_b in range(n + 1):
            b = i_b * step
            partial = 2.0 * an * pbs + b * pn
            if partial > best_total + 1e-15:
                break
            if hd_mode:
                ok_nn = an * gbn >= tn - _EPS * (1.0 + tn)
            else:
                ok_nn = an * gbn >= (tn - _EPS * (1.0 + tn)) * (b * gsi + 1.0)
            if not ok_nn:
                continue
            for i_af in range(i_an, n + 1 - i_an):
                af = i_af * step
                if af > 1.0 - an + 1e-15:
                    break
                total = (an + af) * pbs + b * pn
                if total > best_total + 1e-15:
                    break
                if hd_mode:
                    s_nf = af * gbn / (an * gbn + 1.0)
                    s_mrc = af * gbf / (an * gbf + 1.0) + b * gd
                else:
                    s_nf = af * gbn / (an * gbn + b * gsi + 1.0)
                    s_mrc = (af * gbf + b * gd) / (an * gbf + 1.0)
                thr = tf - _EPS * (1.0 + tf)
                if s_nf >= thr and s_mrc >= thr:
                    better = total < best_total - 1e-15
                    tie = abs(total - best_total) <= 1e-15
                    lex = tie and (an < best_an
                                   or (an == best_an and af < best_af)
                                   or (an == best_an and af == best_af
                                       and b < best_b))
                    if better or lex or not found:
                        best_total = total
                        best_an, best_af, best_b = an, af, b
                        found = True
                    if feas_only:
                        return True, best_an, best_af, best_b
                    break  # larger alpha_f at this (alpha_n, beta) costs more
    return found, best_an, best_af, best_b


def grid_search_power(g, t: SinrTargets, cfg, step: float) -> PowerSolution:
    """Best feasible grid triple, or the infeasible marker if none exists."""
    if not 0.0 < step <= 0.1:
        raise ValueError("step must be in (0, 0.1]")
    found, an, af, b = _grid_scan(g.mode == "HD", g.gamma_bn, g.gamma_bf,
                                  g.gamma_d, g.gamma_si, t.t_n, t.t_f,
                                  cfg.p_bs, cfg.p_n, step, False)
    if not found:
        return PowerSolution.infeasible()
    return PowerSolution.make(an, af, b, cfg.p_bs, cfg.p_n)


def grid_feasible(g, t: SinrTargets, cfg, step: float) -> bool:
    """Whether any grid triple satisfies all constraints (early exit)."""
    if not 0.0 < step <= 0.1:
        raise ValueError("step must be in (0, 0.1]")
    found, _, _, _ = _grid_scan(g.mode == "HD", g.gamma_bn, g.gamma_bf,
                                g.gamma_d, g.gamma_si, t.t_n, t.t_f,
                                cfg.p_bs, cfg.p_n, step, True)
    return bool(found)


def _margins_at(ch, theta, theta2, mode, cfg, p: PowerSolution,
                t: SinrTargets) -> float:
    """Minimum normalized margin of the mode's QoS constraints at theta.

    Independent re-statement of the SINR expressions (log-free form).
    """
    an, af, b = p.alpha_n, p.alpha_f, p.beta
    g_bn = cfg.p_bs * abs(ch.h_bn + cascade_coefficient(ch.h_rn, theta, ch.h_br)) ** 2 / cfg.sigma2_n
    g_bf = cfg.p_bs * abs(ch.h_bf + cascade_coefficient(ch.h_rf, theta, ch.h_br)) ** 2 / cfg.sigma2_f
    if mode == "HD":
        g_d = cfg.p_n * abs(ch.h_nf + cascade_coefficient(ch.h_rf_hat, theta2, ch.h_nr)) ** 2 / cfg.sigma2_f
        s_nn = an * g_bn
        s_nf = af * g_bn / (an * g_bn + 1.0)
        s_mrc = af * g_bf / (an * g_bf + 1.0) + b * g_d
    else:
        g_d = cfg.p_n * abs(ch.h_nf + cascade_coefficient(ch.h_rf, theta, ch.h_rn)) ** 2 / cfg.sigma2_f
        g_si = cfg.p_n * ch.gamma_si_raw / cfg.sigma2_n
        s_nn = an * g_bn / (b * g_si + 1.0)
        s_nf = af * g_bn / (an * g_bn + b * g_si + 1.0)
        s_mrc = (af * g_bf + b * g_d) / (an * g_bf + 1.0)
    return min((s_nn - t.t_n) / (1.0 + t.t_n),
               (s_nf - t.t_f) / (1.0 + t.t_f),
               (s_mrc - t.t_f) / (1.0 + t.t_f))


def coordinate_ascent_phases(ch, p: PowerSolution, mode: str, cfg,
                             t: SinrTargets, sweeps: int, grid: int,
                             theta_init: np.ndarray | None = None,
                             theta2: np.ndarray | None = None) -> np.ndarray:
    """Element-by-element exact line search on a uniform angle grid.

    Maximizes the minimum normalized constraint margin; the current angle
    of each element is always among the candidates, so the objective never
    decreases.  theta2 (HD relaying slot) is held fixed.
    """
    if grid < 8:
        raise ValueError("grid must be >= 8")
    m = ch.m_elements
    theta = np.zeros(m) if theta_init is None else np.array(theta_init, dtype=float)
    if theta2 is None:
        theta2 = np.zeros(m)
    if sweeps <= 0 or m == 0:
        return theta

    angles = 2.0 * np.pi * np.arange(grid) / grid
    for _ in range(sweeps):
        for mm in range(m):
            best_phi = theta[mm]
            best_val = _margins_at(ch, theta, theta2, mode, cfg, p, t)
            for phi in angles:
                theta[mm] = phi
                val = _margins_at(ch, theta, theta2, mode, cfg, p, t)
                if val > best_val:
                    best_val, best_phi = val, phi
            theta[mm] = best_phi
    return theta
