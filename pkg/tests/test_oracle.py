import numpy as np
import pytest

from ris_cnoma.gains import LinkGains
from ris_cnoma.oracle import (coordinate_ascent_phases, grid_feasible,
                              grid_search_power, _margins_at)
from ris_cnoma.phase_opt import ct_phase_alignment
from ris_cnoma.power_fd import fd_targets
from ris_cnoma.power_hd import PowerSolution, hd_targets
from ris_cnoma.scenario import ScenarioConfig, generate_realization


class Cfg:
    p_bs = 2.0
    p_n = 0.2


def test_grid_hd_worked_example_bound():
    g = LinkGains(100, 50, 20, 0, "HD")
    sol = grid_search_power(g, hd_targets(1.0, 1.0), Cfg, 1e-3)
    assert sol.feasible
    assert sol.total_watts <= 0.306 + 2 * Cfg.p_bs * 1e-3 + Cfg.p_n * 1e-3
    assert sol.total_watts >= 0.306 - 1e-9  # cannot beat the true optimum


def test_grid_zero_targets():
    g = LinkGains(100, 50, 20, 0, "HD")
    sol = grid_search_power(g, hd_targets(0.0, 0.0), Cfg, 1e-2)
    assert (sol.alpha_n, sol.alpha_f, sol.beta) == (0.0, 0.0, 0.0)


def test_grid_infeasible_fd_instance():
    g = LinkGains(1.5, 50, 20, 1, "FD")
    sol = grid_search_power(g, fd_targets(1.0, 1.0), Cfg, 1e-2)
    assert not sol.feasible
    assert not grid_feasible(g, fd_targets(1.0, 1.0), Cfg, 1e-2)


def test_grid_step_validation():
    g = LinkGains(100, 50, 20, 0, "HD")
    with pytest.raises(ValueError):
        grid_search_power(g, hd_targets(1.0, 1.0), Cfg, 0.5)
    with pytest.raises(ValueError):
        grid_search_power(g, hd_targets(1.0, 1.0), Cfg, 0.0)


def test_grid_respects_orderings():
    rng = np.random.default_rng(1)
    t = fd_targets(1.0, 1.0)
    for _ in range(20):
        g = LinkGains(*np.exp(rng.uniform(np.log(1), np.log(1e4), 3)),
                      rng.uniform(0, 10), "FD")
        sol = grid_search_power(g, t, Cfg, 1e-2)
        if sol.feasible:
            assert sol.alpha_n <= sol.alpha_f
            assert sol.alpha_n + sol.alpha_f <= 1.0 + 1e-12
            assert 0.0 <= sol.beta <= 1.0


def test_coordinate_ascent_zero_sweeps_is_identity():
    cfg = ScenarioConfig(m_elements=4)
    ch = generate_realization(cfg, 0, 50)
    p = PowerSolution(0.1, 0.3, 0.2, True, 0.0)
    t = fd_targets(cfg.r_n_th, cfg.r_f_th)
    th0 = np.linspace(0, 1, 4)
    out = coordinate_ascent_phases(ch, p, "FD", cfg, t, sweeps=0, grid=16,
                                   theta_init=th0)
    np.testing.assert_array_equal(out, th0)


def test_coordinate_ascent_monotone_margin():
    cfg = ScenarioConfig(m_elements=8)
    t = fd_targets(cfg.r_n_th, cfg.r_f_th)
    p = PowerSolution(0.05, 0.2, 0.1, True, 0.0)
    rng = np.random.default_rng(51)
    for tr in range(3):
        ch = generate_realization(cfg, tr, 51)
        th0 = rng.uniform(0, 2 * np.pi, 8)
        m0 = _margins_at(ch, th0, np.zeros(8), "FD", cfg, p, t)
        th = coordinate_ascent_phases(ch, p, "FD", cfg, t, sweeps=1, grid=16,
                                      theta_init=th0.copy())
        m1 = _margins_at(ch, th, np.zeros(8), "FD", cfg, p, t)
        assert m1 >= m0 - 1e-12


def test_coordinate_ascent_grid_validation():
    cfg = ScenarioConfig(m_elements=2)
    ch = generate_realization(cfg, 0, 52)
    p = PowerSolution(0.1, 0.2, 0.1, True, 0.0)
    with pytest.raises(ValueError):
        coordinate_ascent_phases(ch, p, "FD", cfg,
                                 fd_targets(1.0, 1.0), sweeps=1, grid=4)


def test_coordinate_ascent_single_element_recovers_alignment():
    # with one element and the near-user constraint dominant, the exact
    # 1-D search must land within one grid cell of the coherent alignment
    cfg = ScenarioConfig(m_elements=1)
    ch = generate_realization(cfg, 3, 53)
    # make the bn constraint the only binding one
    t = hd_targets(cfg.r_n_th, 0.0)
    g_at = lambda th: abs(ch.h_bn + np.conj(ch.h_rn[0]) * np.exp(1j * th)
                          * ch.h_br[0]) ** 2
    grid = 256
    p = PowerSolution(1e-9, 1e-9, 0.0, True, 0.0)
    th = coordinate_ascent_phases(ch, p, "HD", cfg, t, sweeps=1, grid=grid)
    from ris_cnoma.phase_opt import align_phases
    want = align_phases(ch.h_bn, ch.h_rn, ch.h_br)[0]
    diff = np.angle(np.exp(1j * (th[0] - want)))
    assert abs(diff) <= 2 * np.pi / grid + 1e-9
