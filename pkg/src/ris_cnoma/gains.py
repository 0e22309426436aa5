"""Effective link gains for a fixed surface configuration.

Everything downstream of the channel model works with four scalar
dimensionless gains: gamma_bn, gamma_bf (BS to near/far user), gamma_d
(relay to far user) and gamma_si (residual self-interference, FD only).
The cascade convention is conj(h_rx[m]) * e^{j theta_m} * h_tx[m], i.e.
the receive-side vector enters conjugated; every module keeps to it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scenario import ChannelRealization, ScenarioConfig

TWO_PI = 2.0 * np.pi


def wrap_phases(theta: np.ndarray) -> np.ndarray:
    """Map phase angles into [0, 2*pi)."""
    return np.mod(np.asarray(theta, dtype=float), TWO_PI)


def cascade_coefficient(h_rx: np.ndarray, theta: np.ndarray,
                        h_tx: np.ndarray) -> complex:
    """sum_m conj(h_rx[m]) e^{j theta_m} h_tx[m]."""
    h_rx = np.asarray(h_rx)
    h_tx = np.asarray(h_tx)
    theta = np.asarray(theta, dtype=float)
    if not (h_rx.shape == h_tx.shape == theta.shape):
        raise ValueError("h_rx, theta and h_tx must share one length")
    return complex(np.sum(np.conj(h_rx) * np.exp(1j * theta) * h_tx))


def combined_gain(h_direct: complex, h_rx: np.ndarray, theta: np.ndarray,
                  h_tx: np.ndarray) -> float:
    """|h_direct + sum_m conj(h_rx[m]) e^{j theta_m} h_tx[m]|^2."""
    return abs(h_direct + cascade_coefficient(h_rx, theta, h_tx)) ** 2


@dataclass(frozen=True)
class LinkGains:
    """Normalized effective gains; gamma_si is zero in HD mode."""

    gamma_bn: float
    gamma_bf: float
    gamma_d: float
    gamma_si: float
    mode: str  # "HD" | "FD"

    def __post_init__(self):
        if self.mode not in ("HD", "FD"):
            raise ValueError(f"mode must be HD or FD, got {self.mode!r}")
        if min(self.gamma_bn, self.gamma_bf, self.gamma_d, self.gamma_si) < 0:
            raise ValueError("gains must be >= 0")
        if self.mode == "HD" and self.gamma_si != 0:
            raise ValueError("gamma_si must be 0 in HD mode")


def hd_gains(ch: ChannelRealization, theta1: np.ndarray, theta2: np.ndarray,
             cfg: ScenarioConfig) -> LinkGains:
    """Gains of the two-slot scheme: theta1 drives the broadcast slot,
    theta2 the relaying slot (which uses the re-drawn surface-to-far link)."""
    g_bn = cfg.p_bs * combined_gain(ch.h_bn, ch.h_rn, theta1, ch.h_br) / cfg.sigma2_n
    g_bf = cfg.p_bs * combined_gain(ch.h_bf, ch.h_rf, theta1, ch.h_br) / cfg.sigma2_f
    g_d = cfg.p_n * combined_gain(ch.h_nf, ch.h_rf_hat, theta2, ch.h_nr) / cfg.sigma2_f
    return LinkGains(g_bn, g_bf, g_d, 0.0, "HD")


def fd_gains(ch: ChannelRealization, theta: np.ndarray,
             cfg: ScenarioConfig) -> LinkGains:
    """Single-slot gains; the relay-to-surface channel is the reciprocal
    h_rn, and the self-interference gain is normalized by the near user's
    noise power."""
    g_bn = cfg.p_bs * combined_gain(ch.h_bn, ch.h_rn, theta, ch.h_br) / cfg.sigma2_n
    g_bf = cfg.p_bs * combined_gain(ch.h_bf, ch.h_rf, theta, ch.h_br) / cfg.sigma2_f
    g_d = cfg.p_n * combined_gain(ch.h_nf, ch.h_rf, theta, ch.h_rn) / cfg.sigma2_f
    g_si = cfg.p_n * ch.gamma_si_raw / cfg.sigma2_n
    return LinkGains(g_bn, g_bf, g_d, g_si, "FD")
