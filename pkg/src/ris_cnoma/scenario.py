"""Cell geometry, large-scale path loss and stochastic channel model.

One base station serves a near user (which also relays) and a far user,
assisted by an M-element reflecting surface.  Direct links and the
user-to-surface links are Rayleigh; the BS-surface and surface-far-user
links are Rician.  All draws are reproducible: a (master_seed, trial_index)
pair fully determines a realization, independently of trial order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

LINK_KEYS = ("bn", "bf", "nf", "br", "rf", "rn", "nr")


def db2lin(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def dbm2watts(x_dbm: float) -> float:
    return 10.0 ** (x_dbm / 10.0) / 1000.0


def watts2dbm(x_watts: float) -> float:
    return 10.0 * np.log10(x_watts * 1000.0)


def _default_eta() -> dict[str, float]:
    # bn 3.5, bf/nf 4, br/rf 2.2, nr 3; rn is not tabulated anywhere,
    # use the nr value (same endpoints, same environment).
    return {"bn": 3.5, "bf": 4.0, "nf": 4.0, "br": 2.2, "rf": 2.2, "rn": 3.0, "nr": 3.0}


@dataclass(frozen=True)
class ScenarioConfig:
    """Geometry, budgets and fading parameters of the two-user cell.

    Defaults are the standard simulation setting: BS at (0, 10, 0),
    RIS at (80, 10, 0) next to the far user at (80, 0, 0), near user at
    (40, 0, 0); BS budget 33 dBm, relay budget 23 dBm, noise -90 dBm,
    reference path loss -30 dB at 1 m, Rician factors 3 dB.
    """

    pos_bs: tuple[float, float, float] = (0.0, 10.0, 0.0)
    pos_ris: tuple[float, float, float] = (80.0, 10.0, 0.0)
    pos_uen: tuple[float, float, float] = (40.0, 0.0, 0.0)
    pos_uef: tuple[float, float, float] = (80.0, 0.0, 0.0)
    m_elements: int = 32
    p_bs: float = dbm2watts(33.0)
    p_n: float = dbm2watts(23.0)
    sigma2_n: float = dbm2watts(-90.0)
    sigma2_f: float = dbm2watts(-90.0)
    rho0: float = db2lin(-30.0)
    d0: float = 1.0
    eta: dict[str, float] = field(default_factory=_default_eta)
    kappa_br: float = db2lin(3.0)
    kappa_rf: float = db2lin(3.0)
    omega_si: float = db2lin(-100.0)
    r_n_th: float = 1.0
    r_f_th: float = 2.0
    los_mode: str = "all-ones"  # or "steering"
    los_angle: float = 0.0

    def __post_init__(self):
        for name in ("p_bs", "p_n", "sigma2_n", "sigma2_f", "rho0", "d0"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.m_elements < 0:
            raise ValueError("m_elements must be >= 0")
        for name in ("kappa_br", "kappa_rf", "omega_si", "r_n_th", "r_f_th"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        missing = [k for k in LINK_KEYS if k not in self.eta]
        if missing:
            raise ValueError(f"eta missing link exponents: {missing}")
        if any(self.eta[k] < 0 for k in LINK_KEYS):
            raise ValueError("path-loss exponents must be >= 0")
        if self.los_mode not in ("all-ones", "steering"):
            raise ValueError(f"unknown los_mode {self.los_mode!r}")
        for a, b in (("bs", "ris"), ("bs", "uen"), ("bs", "uef"),
                     ("ris", "uen"), ("ris", "uef"), ("uen", "uef")):
            if self.distance(a, b) <= 0:
                raise ValueError(f"nodes {a} and {b} are co-located")

    def position(self, node: str) -> np.ndarray:
        return np.asarray(getattr(self, f"pos_{node}"), dtype=float)

    def distance(self, a: str, b: str) -> float:
        return float(np.linalg.norm(self.position(a) - self.position(b)))

    def link_distance(self, link: str) -> float:
        ends = {"bn": ("bs", "uen"), "bf": ("bs", "uef"), "nf": ("uen", "uef"),
                "br": ("bs", "ris"), "rf": ("ris", "uef"), "rn": ("ris", "uen"),
                "nr": ("uen", "ris")}[link]
        return self.distance(*ends)

    def link_pl(self, link: str) -> float:
        return path_loss(self.link_distance(link), self.eta[link], self.rho0, self.d0)

    def los_vector(self) -> np.ndarray:
        if self.los_mode == "steering":
            m = np.arange(self.m_elements)
            return np.exp(1j * np.pi * m * np.sin(self.los_angle))
        return np.ones(self.m_elements, dtype=complex)

    def with_elements(self, m: int) -> "ScenarioConfig":
        return replace(self, m_elements=m)


@dataclass(eq=False)
class ChannelRealization:
    """One draw of every link plus the squared self-interference gain.

    h_nr is an independent draw for the HD relaying slot; full-duplex code
    paths must use h_rn in its place (reciprocal channel, same slot).
    """

    h_bn: complex
    h_bf: complex
    h_nf: complex
    h_br: np.ndarray
    h_rn: np.ndarray
    h_rf: np.ndarray
    h_rf_hat: np.ndarray
    h_nr: np.ndarray
    gamma_si_raw: float

    @property
    def m_elements(self) -> int:
        return self.h_br.shape[0]

    def __post_init__(self):
        m = self.h_br.shape[0]
        for name in ("h_rn", "h_rf", "h_rf_hat", "h_nr"):
            if getattr(self, name).shape != (m,):
                raise ValueError(f"{name} must have length {m}")
        if self.gamma_si_raw < 0:
            raise ValueError("gamma_si_raw must be >= 0")

    def without_ris(self) -> "ChannelRealization":
        """Copy with every cascaded link zeroed (direct links untouched)."""
        z = np.zeros(self.m_elements, dtype=complex)
        return ChannelRealization(self.h_bn, self.h_bf, self.h_nf,
                                  z, z.copy(), z.copy(), z.copy(), z.copy(),
                                  self.gamma_si_raw)


def path_loss(d: float, eta: float, rho0: float, d0: float = 1.0) -> float:
    """Power-law path loss rho0 * (d/d0)^(-eta) in linear units."""
    if d <= 0 or d0 <= 0:
        raise ValueError("distances must be > 0")
    if rho0 <= 0:
        raise ValueError("rho0 must be > 0")
    return rho0 * (d / d0) ** (-eta)


def sample_rayleigh(dim: int, pl: float, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. CN(0, pl) entries: unit-variance fading scaled by sqrt(pl)."""
    if dim < 0:
        raise ValueError("dim must be >= 0")
    if pl < 0:
        raise ValueError("pl must be >= 0")
    g = (rng.standard_normal(dim) + 1j * rng.standard_normal(dim)) / np.sqrt(2.0)
    return np.sqrt(pl) * g


def sample_rician(dim: int, pl: float, kappa: float, los: np.ndarray,
                  rng: np.random.Generator) -> np.ndarray:
    """Rician draw sqrt(pl) * (sqrt(1/(1+k)) g + sqrt(k/(1+k)) los).

    Per-entry second moment is pl for every kappa; kappa=0 degenerates to
    Rayleigh and kappa -> inf to the deterministic LoS component.
    """
    los = np.asarray(los)
    if los.shape != (dim,):
        raise ValueError(f"los must have shape ({dim},)")
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    g = sample_rayleigh(dim, 1.0, rng)
    mix = np.sqrt(1.0 / (1.0 + kappa)) * g + np.sqrt(kappa / (1.0 + kappa)) * los
    return np.sqrt(pl) * mix


def trial_rng(master_seed: int, trial_index: int) -> np.random.Generator:
    """Counter-style substream: independent of the order trials run in."""
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(trial_index,)))


def generate_realization(cfg: ScenarioConfig, trial_index: int,
                         master_seed: int) -> ChannelRealization:
    """Draw all links for one Monte-Carlo trial.

    Scalar links (and the unit SI draw) are consumed from the substream
    first, so they are bit-identical across sweeps of m_elements and
    omega_si for the same (master_seed, trial_index).
    """
    rng = trial_rng(master_seed, trial_index)
    m = cfg.m_elements

    h_bn = complex(sample_rayleigh(1, cfg.link_pl("bn"), rng)[0])
    h_bf = complex(sample_rayleigh(1, cfg.link_pl("bf"), rng)[0])
    h_nf = complex(sample_rayleigh(1, cfg.link_pl("nf"), rng)[0])
    h_si_unit = complex(sample_rayleigh(1, 1.0, rng)[0])
    gamma_si_raw = cfg.omega_si * abs(h_si_unit) ** 2

    los = cfg.los_vector()
    h_br = sample_rician(m, cfg.link_pl("br"), cfg.kappa_br, los, rng)
    h_rn = sample_rayleigh(m, cfg.link_pl("rn"), rng)
    h_rf = sample_rician(m, cfg.link_pl("rf"), cfg.kappa_rf, los, rng)
    h_rf_hat = sample_rician(m, cfg.link_pl("rf"), cfg.kappa_rf, los, rng)
    h_nr = sample_rayleigh(m, cfg.link_pl("nr"), rng)

    return ChannelRealization(h_bn, h_bf, h_nf, h_br, h_rn, h_rf, h_rf_hat,
                              h_nr, gamma_si_raw)
