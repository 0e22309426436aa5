import numpy as np
import pytest

from ris_cnoma.gains import (LinkGains, combined_gain, fd_gains, hd_gains,
                             wrap_phases)
from ris_cnoma.scenario import ChannelRealization, ScenarioConfig


def test_combined_gain_m_zero():
    z = np.zeros(0)
    assert combined_gain(3 - 4j, z, z, z) == pytest.approx(25.0)


def test_combined_gain_single_element():
    assert combined_gain(1.0, np.array([1.0 + 0j]), np.array([0.0]),
                         np.array([1.0 + 0j])) == pytest.approx(4.0)


def test_combined_gain_quarter_turn():
    # 1 + 2j from two quarter-turned unit cascades
    h_rx = np.array([1.0 + 0j, 1.0 + 0j])
    h_tx = np.array([1.0 + 0j, 1.0 + 0j])
    theta = np.array([np.pi / 2, np.pi / 2])
    assert combined_gain(1.0, h_rx, theta, h_tx) == pytest.approx(5.0)


def test_combined_gain_shape_error():
    with pytest.raises(ValueError):
        combined_gain(1.0, np.ones(2), np.zeros(3), np.ones(2))


def test_combined_gain_global_rotation_invariance():
    rng = np.random.default_rng(2)
    h = complex(rng.standard_normal() + 1j * rng.standard_normal())
    rx = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    tx = rng.standard_normal(5) + 1j * rng.standard_normal(5)
    th = rng.uniform(0, 2 * np.pi, 5)
    base = combined_gain(h, rx, th, tx)
    phi = 1.234
    rot = combined_gain(h * np.exp(1j * phi), rx * np.exp(-1j * phi / 2),
                        th, tx * np.exp(1j * phi / 2))
    assert rot == pytest.approx(base, rel=1e-12)


def test_combined_gain_coherent_upper_bound():
    rng = np.random.default_rng(4)
    h = complex(rng.standard_normal() + 1j * rng.standard_normal())
    rx = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    tx = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    bound = (abs(h) + np.sum(np.abs(rx) * np.abs(tx))) ** 2
    for _ in range(200):
        th = rng.uniform(0, 2 * np.pi, 6)
        assert combined_gain(h, rx, th, tx) <= bound + 1e-9


def _toy_channel(m=2, **kw):
    z = np.zeros(m, dtype=complex)
    defaults = dict(h_bn=0j, h_bf=0j, h_nf=0j, h_br=z, h_rn=z.copy(),
                    h_rf=z.copy(), h_rf_hat=z.copy(), h_nr=z.copy(),
                    gamma_si_raw=0.0)
    defaults.update(kw)
    return ChannelRealization(**defaults)


def test_hd_gains_zero_channels():
    cfg = ScenarioConfig(m_elements=2)
    g = hd_gains(_toy_channel(), np.zeros(2), np.zeros(2), cfg)
    assert (g.gamma_bn, g.gamma_bf, g.gamma_d, g.gamma_si) == (0, 0, 0, 0)
    assert g.mode == "HD"


def test_hd_gains_direct_ratio():
    # P_BS=2 W, sigma2=1e-12 W, combined gain 1e-9 -> 2000
    cfg = ScenarioConfig(m_elements=2, p_bs=2.0, sigma2_n=1e-12)
    ch = _toy_channel(h_bn=complex(np.sqrt(1e-9)))
    g = hd_gains(ch, np.zeros(2), np.zeros(2), cfg)
    assert g.gamma_bn == pytest.approx(2000.0)


def test_hd_gains_power_homogeneity():
    rng = np.random.default_rng(0)
    m = 3
    ch = _toy_channel(m,
                      h_bn=complex(rng.standard_normal() + 1j * rng.standard_normal()),
                      h_bf=1e-5 + 2e-5j, h_nf=3e-5 - 1e-5j,
                      h_br=(rng.standard_normal(m) + 1j * rng.standard_normal(m)) * 1e-4,
                      h_rn=(rng.standard_normal(m) + 1j * rng.standard_normal(m)) * 1e-4,
                      h_rf=(rng.standard_normal(m) + 1j * rng.standard_normal(m)) * 1e-4,
                      h_rf_hat=(rng.standard_normal(m) + 1j * rng.standard_normal(m)) * 1e-4,
                      h_nr=(rng.standard_normal(m) + 1j * rng.standard_normal(m)) * 1e-4)
    th = rng.uniform(0, 2 * np.pi, m)
    cfg1 = ScenarioConfig(m_elements=m, p_bs=1.0)
    cfg2 = ScenarioConfig(m_elements=m, p_bs=2.0)
    g1 = hd_gains(ch, th, th, cfg1)
    g2 = hd_gains(ch, th, th, cfg2)
    assert g2.gamma_bn == pytest.approx(2 * g1.gamma_bn, rel=1e-12)
    assert g2.gamma_bf == pytest.approx(2 * g1.gamma_bf, rel=1e-12)
    assert g2.gamma_d == pytest.approx(g1.gamma_d, rel=1e-12)


def test_fd_gains_si_ratio():
    # gamma_SI_raw=5e-13, P_n=0.2, sigma_n^2=1e-12 -> 0.1
    cfg = ScenarioConfig(m_elements=2, p_n=0.2, sigma2_n=1e-12)
    g = fd_gains(_toy_channel(gamma_si_raw=5e-13), np.zeros(2), cfg)
    assert g.gamma_si == pytest.approx(0.1)
    assert g.mode == "FD"


def test_fd_gains_omega_zero():
    cfg = ScenarioConfig(m_elements=2)
    assert fd_gains(_toy_channel(), np.zeros(2), cfg).gamma_si == 0.0


def test_fd_gains_use_reciprocal_relay_link():
    # gamma_d must be built from h_rn, not the HD-slot h_nr draw
    cfg = ScenarioConfig(m_elements=1)
    ch = _toy_channel(1, h_nf=0j, h_rf=np.array([1e-4 + 0j]),
                      h_rn=np.array([2e-4 + 0j]), h_nr=np.array([5e-4 + 0j]))
    g = fd_gains(ch, np.zeros(1), cfg)
    expect = cfg.p_n * abs(1e-4 * 2e-4) ** 2 / cfg.sigma2_f
    assert g.gamma_d == pytest.approx(expect, rel=1e-12)


def test_linkgains_validation():
    with pytest.raises(ValueError):
        LinkGains(1.0, 1.0, 1.0, 0.5, "HD")  # SI forbidden in HD
    with pytest.raises(ValueError):
        LinkGains(-1.0, 1.0, 1.0, 0.0, "HD")
    with pytest.raises(ValueError):
        LinkGains(1.0, 1.0, 1.0, 0.0, "XX")


def test_wrap_phases():
    th = wrap_phases(np.array([-0.1, 2 * np.pi + 0.2, 7.0]))
    assert np.all((0 <= th) & (th < 2 * np.pi))
