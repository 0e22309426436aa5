"""Surface phase optimization: closed-form relaying-slot alignment plus the
semidefinite lifting / Gaussian randomization step for the broadcast phases.

The unit-modulus phase vector is lifted through the bordered-block matrices
built from the cascade products (receive side conjugated, one shared
convention with the gains module); the rank constraint is dropped and the
resulting feasibility problem handed to the max-slack solver.  Candidates
recovered by randomization are judged on the original constraint margins,
and the incumbent phases always compete, so a phase update can never lose
feasibility or raise the power objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gains import wrap_phases
from .power_hd import PowerSolution, SinrTargets
from .scenario import ChannelRealization, ScenarioConfig
from .sdp import SdpInstance, SdpSolution, eig_factor


def align_phases(h_direct: complex, h_rx: np.ndarray,
                 h_tx: np.ndarray) -> np.ndarray:
    """Phases rotating every cascade term onto the direct path's phase."""
    prod = np.conj(np.asarray(h_rx)) * np.asarray(h_tx)
    theta = np.where(np.abs(prod) > 0.0, np.angle(h_direct) - np.angle(prod), 0.0)
    return wrap_phases(theta)


def ct_phase_alignment(h_nf: complex, h_nr: np.ndarray,
                       h_rf_hat: np.ndarray) -> np.ndarray:
    """Relaying-slot phases that combine all paths coherently at the far user.

    Satisfies |h_nf + sum_m conj(h_rf_hat[m]) e^{j theta_m} h_nr[m]| =
    |h_nf| + sum_m |h_rf_hat[m] h_nr[m]| exactly.
    """
    h_nr = np.asarray(h_nr)
    h_rf_hat = np.asarray(h_rf_hat)
    if h_nr.shape != h_rf_hat.shape:
        raise ValueError("h_nr and h_rf_hat must share one length")
    return align_phases(h_nf, h_rf_hat, h_nr)


def lifted_vector(theta: np.ndarray, t: complex = 1.0) -> np.ndarray:
    """Unit-modulus lifting [e^{-j theta}; t] matching the v^H Phi change
    of variables (so the cascade coefficient is v_bar[:M]^H Phi * t)."""
    return np.concatenate([np.exp(-1j * np.asarray(theta, dtype=float)),
                           [complex(t)]])


def _bordered(phi: np.ndarray, h_direct: complex) -> np.ndarray:
    m = phi.shape[0]
    q = np.zeros((m + 1, m + 1), dtype=complex)
    q[:m, :m] = np.outer(phi, phi.conj())
    q[:m, m] = phi * np.conj(h_direct)
    q[m, :m] = h_direct * phi.conj()
    return q


@dataclass
class LiftedProblem:
    """Assembled SDP instance plus everything needed to score candidates
    on the original (un-lifted) constraints."""

    mode: str
    instance: SdpInstance
    q_bn: np.ndarray
    q_bf: np.ndarray
    q_nf: np.ndarray | None
    dp_bn: float
    dp_bf: float
    dp_nf: float
    phi: np.ndarray
    psi: np.ndarray
    xi: np.ndarray | None
    h_bn: complex
    h_bf: complex
    h_nf: complex
    p: PowerSolution
    t: SinrTargets
    sinr2: float
    gamma_si: float
    p_bs: float
    p_n: float
    sigma2_n: float
    sigma2_f: float
    theta_incumbent: np.ndarray

    @property
    def m_elements(self) -> int:
        return self.phi.shape[0]


def _normalize(a_raw: np.ndarray, lhs_const: float, rhs_const: float,
               fallback: float) -> tuple[np.ndarray, float]:
    """Scale tr(A V) + lhs >= rhs by its threshold constant, then cap |b|<=1.

    The threshold constant puts all constraints on a common O(1) margin
    scale; a zero threshold (clamped or zero-target constraints) falls back
    to the receiver noise power.
    """
    scale1 = rhs_const if rhs_const > 0.0 else fallback
    a = a_raw / scale1
    b = (rhs_const - lhs_const) / scale1
    scale2 = 1.0 / (abs(b) + 1.0)
    return a * scale2, b * scale2


def build_hd_lifting(ch: ChannelRealization, p: PowerSolution, t: SinrTargets,
                     sinr2: float, cfg: ScenarioConfig,
                     theta_incumbent: np.ndarray | None = None) -> LiftedProblem:
    """Lift the broadcast-slot constraints; the relaying slot enters only
    through its fixed combining SINR (clamped so an already-satisfied
    combining constraint cannot flip the inequality)."""
    phi = np.conj(ch.h_rn) * ch.h_br
    psi = np.conj(ch.h_rf) * ch.h_br
    q_bn = _bordered(phi, ch.h_bn)
    q_bf = _bordered(psi, ch.h_bf)
    dp_bn = abs(ch.h_bn) ** 2
    dp_bf = abs(ch.h_bf) ** 2
    pb = cfg.p_bs

    cons = []
    cons.append(_normalize(p.alpha_n * pb * q_bn, p.alpha_n * pb * dp_bn,
                           t.t_n * cfg.sigma2_n, cfg.sigma2_n))
    c = max(0.0, t.t_f - sinr2)
    coef = (p.alpha_f - c * p.alpha_n) * pb
    cons.append(_normalize(coef * q_bf, coef * dp_bf, c * cfg.sigma2_f,
                           cfg.sigma2_f))
    coef = (p.alpha_f - t.t_f * p.alpha_n) * pb
    cons.append(_normalize(coef * q_bn, coef * dp_bn, t.t_f * cfg.sigma2_n,
                           cfg.sigma2_n))

    inst = SdpInstance(ch.m_elements + 1, cons)
    incumbent = np.zeros(ch.m_elements) if theta_incumbent is None \
        else np.asarray(theta_incumbent, dtype=float)
    return LiftedProblem("HD", inst, q_bn, q_bf, None, dp_bn, dp_bf,
                         abs(ch.h_nf) ** 2, phi, psi, None, ch.h_bn, ch.h_bf,
                         ch.h_nf, p, t, sinr2, 0.0, cfg.p_bs, cfg.p_n,
                         cfg.sigma2_n, cfg.sigma2_f, incumbent)


def build_fd_lifting(ch: ChannelRealization, p: PowerSolution, t: SinrTargets,
                     cfg: ScenarioConfig,
                     theta_incumbent: np.ndarray | None = None) -> LiftedProblem:
    """Lift all three single-slot constraints; the self-interference term
    is a phase-independent constant on the right-hand sides."""
    phi = np.conj(ch.h_rn) * ch.h_br
    psi = np.conj(ch.h_rf) * ch.h_br
    xi = np.conj(ch.h_rf) * ch.h_rn
    q_bn = _bordered(phi, ch.h_bn)
    q_bf = _bordered(psi, ch.h_bf)
    q_nf = _bordered(xi, ch.h_nf)
    dp_bn = abs(ch.h_bn) ** 2
    dp_bf = abs(ch.h_bf) ** 2
    dp_nf = abs(ch.h_nf) ** 2
    pb, pn = cfg.p_bs, cfg.p_n
    si_watts = p.beta * pn * ch.gamma_si_raw

    cons = []
    cons.append(_normalize(p.alpha_n * pb * q_bn, p.alpha_n * pb * dp_bn,
                           t.t_n * (si_watts + cfg.sigma2_n), cfg.sigma2_n))
    coef_bf = (p.alpha_f - t.t_f * p.alpha_n) * pb
    a_raw = coef_bf * q_bf + p.beta * pn * q_nf
    lhs = coef_bf * dp_bf + p.beta * pn * dp_nf
    cons.append(_normalize(a_raw, lhs, t.t_f * cfg.sigma2_f, cfg.sigma2_f))
    coef_bn = (p.alpha_f - t.t_f * p.alpha_n) * pb
    cons.append(_normalize(coef_bn * q_bn, coef_bn * dp_bn,
                           t.t_f * (si_watts + cfg.sigma2_n), cfg.sigma2_n))

    inst = SdpInstance(ch.m_elements + 1, cons)
    incumbent = np.zeros(ch.m_elements) if theta_incumbent is None \
        else np.asarray(theta_incumbent, dtype=float)
    gamma_si = pn * ch.gamma_si_raw / cfg.sigma2_n
    return LiftedProblem("FD", inst, q_bn, q_bf, q_nf, dp_bn, dp_bf, dp_nf,
                         phi, psi, xi, ch.h_bn, ch.h_bf, ch.h_nf, p, t,
                         0.0, gamma_si, cfg.p_bs, cfg.p_n, cfg.sigma2_n,
                         cfg.sigma2_f, incumbent)


def candidate_margins(lifted: LiftedProblem, thetas: np.ndarray) -> np.ndarray:
    """Minimum normalized original-constraint margin per candidate row."""
    thetas = np.atleast_2d(thetas)
    e = np.exp(1j * thetas)
    p, t = lifted.p, lifted.t
    g_bn = lifted.p_bs * np.abs(lifted.h_bn + e @ lifted.phi) ** 2 / lifted.sigma2_n
    g_bf = lifted.p_bs * np.abs(lifted.h_bf + e @ lifted.psi) ** 2 / lifted.sigma2_f
    if lifted.mode == "HD":
        s_nn = p.alpha_n * g_bn
        s_nf = p.alpha_f * g_bn / (p.alpha_n * g_bn + 1.0)
        s_mrc = p.alpha_f * g_bf / (p.alpha_n * g_bf + 1.0) + lifted.sinr2
    else:
        g_d = lifted.p_n * np.abs(lifted.h_nf + e @ lifted.xi) ** 2 / lifted.sigma2_f
        den_si = p.beta * lifted.gamma_si + 1.0
        s_nn = p.alpha_n * g_bn / den_si
        s_nf = p.alpha_f * g_bn / (p.alpha_n * g_bn + den_si)
        s_mrc = (p.alpha_f * g_bf + p.beta * g_d) / (p.alpha_n * g_bf + 1.0)
    m = np.minimum((s_nn - t.t_n) / (1.0 + t.t_n),
                   (s_nf - t.t_f) / (1.0 + t.t_f))
    return np.minimum(m, (s_mrc - t.t_f) / (1.0 + t.t_f))


def gaussian_randomization(sol: SdpSolution, lifted: LiftedProblem,
                           num_samples: int, rng: np.random.Generator) -> np.ndarray:
    """Recover unit-modulus phases from the lifted solution.

    Samples v_bar = U Sigma^{1/2} r with standard complex Gaussian r, maps
    each to phases through the arg-ratio against the last entry, and keeps
    the candidate (incumbent included) with the best worst-case margin of
    the original constraints.
    """
    m = lifted.m_elements
    if m == 0 or num_samples <= 0:
        return wrap_phases(lifted.theta_incumbent)

    u, lam = eig_factor(sol.v)
    lam = np.where(lam > lam[0] * 1e-12, lam, 0.0)  # drop eigh noise floor
    root = u * np.sqrt(lam)
    r = (rng.standard_normal((m + 1, num_samples))
         + 1j * rng.standard_normal((m + 1, num_samples))) / np.sqrt(2.0)
    vbar = np.concatenate([root @ r, u[:, :1]], axis=1)  # + principal eigvec
    denom = vbar[m, :]
    denom = np.where(np.abs(denom) > 0.0, denom, 1.0)
    thetas = wrap_phases(-np.angle(vbar[:m, :] / denom).T)

    cands = np.vstack([np.atleast_2d(lifted.theta_incumbent), thetas])
    margins = candidate_margins(lifted, cands)
    return cands[int(np.argmax(margins))]
