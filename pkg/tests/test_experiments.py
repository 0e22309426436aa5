import json
import math

import numpy as np
import pytest

from ris_cnoma.cli import cli_main
from ris_cnoma.experiments import (CSV_COLUMNS, ConfigError, ExperimentSpec,
                                   load_config, run_experiment,
                                   scenario_from_dict, write_csv)
from ris_cnoma.scenario import ScenarioConfig

FAST = dict(trials=4, num_samples=100, max_iters=6)


def small_spec(kind, **kw):
    base = dict(kind=kind, scenario=ScenarioConfig(m_elements=4),
                master_seed=5, **FAST)
    base.update(kw)
    return ExperimentSpec(**base)


def read_csv(path):
    meta, rows = [], []
    header = None
    for line in open(path):
        line = line.rstrip("\n")
        if line.startswith("#"):
            meta.append(line)
        elif header is None:
            header = line.split(",")
        else:
            rows.append(dict(zip(header, line.split(","))))
    return meta, header, rows


def test_spec_validation():
    with pytest.raises(ConfigError):
        ExperimentSpec(kind="nope")
    with pytest.raises(ConfigError):
        ExperimentSpec(kind="convergence", trials=0)
    with pytest.raises(ConfigError):
        ExperimentSpec(kind="convergence", schemes=("warp",))
    with pytest.raises(ConfigError):
        ExperimentSpec(kind="convergence", elements_grid=(32, 8))


def test_power_vs_elements_records(tmp_path):
    spec = small_spec("power-vs-elements", elements_grid=(2, 4),
                      schemes=("ris-fd", "nofd"))
    out = tmp_path / "elem.csv"
    records = run_experiment(spec, str(out))
    assert len(records) == 4  # 2 sweep points x 2 schemes
    meta, header, rows = read_csv(out)
    assert header == list(CSV_COLUMNS)
    assert any("power means exclude infeasible trials" in m for m in meta)
    assert {r["scheme"] for r in rows} == {"ris-fd", "nofd"}
    for r in rows:
        assert 0.0 <= float(r["outage"]) <= 1.0


def test_no_ris_scheme_constant_across_elements():
    spec = small_spec("power-vs-elements", elements_grid=(2, 8),
                      schemes=("nofd",), trials=6)
    records = run_experiment(spec)
    watts = [r.mean_power_watts for r in records]
    assert watts[0] == pytest.approx(watts[1], abs=1e-15)


def test_determinism_byte_identical(tmp_path):
    spec = small_spec("power-vs-rate", rf_grid=(1.0, 2.0),
                      schemes=("ris-fd",), trials=1)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_experiment(spec, str(a))
    run_experiment(spec, str(b))
    assert a.read_bytes() == b.read_bytes()


def test_convergence_records():
    spec = small_spec("convergence", schemes=("ris-fd", "ris-hd"))
    records = run_experiment(spec)
    schemes = {r.scheme for r in records}
    assert schemes <= {"ris-fd", "ris-hd"}
    for scheme in schemes:
        vals = [r for r in records if r.scheme == scheme]
        assert [r.sweep_value for r in vals] == list(
            np.arange(1, len(vals) + 1, dtype=float))
        watts = [r.mean_power_watts for r in vals]
        assert all(b <= a + 1e-9 for a, b in zip(watts, watts[1:]))


def test_power_vs_rate_si_variants_label_schemes():
    spec = small_spec("power-vs-rate", rf_grid=(1.0,),
                      si_variants_db=(-100.0, -80.0),
                      schemes=("ris-fd", "ris-hd"), trials=2)
    records = run_experiment(spec)
    labels = {r.scheme for r in records}
    assert "ris-fd(si=-100dB)" in labels and "ris-fd(si=-80dB)" in labels
    assert "ris-hd" in labels  # HD has no self-interference axis


def test_power_split_schemes_and_split_consistency():
    spec = small_spec("power-split", split_elements=(4,),
                      si_grid_db=(-100.0,), schemes=("ris-fd",), trials=3)
    records = run_experiment(spec)
    labels = {r.scheme for r in records}
    assert labels == {"ris-fd-bs(M=4)", "ris-fd-uen(M=4)"}


def test_dbm_watts_columns_consistent():
    spec = small_spec("power-vs-elements", elements_grid=(4,),
                      schemes=("nofd",), trials=4)
    rec = run_experiment(spec)[0]
    if math.isfinite(rec.mean_power_dbm):
        back = 10 ** (rec.mean_power_dbm / 10) / 1000
        assert back == pytest.approx(rec.mean_power_watts, rel=1e-9)


def test_verify_columns(tmp_path):
    spec = small_spec("power-vs-elements", elements_grid=(4,),
                      schemes=("nofd",), trials=2, verify=True,
                      oracle_step=1e-2)
    out = tmp_path / "v.csv"
    records = run_experiment(spec, str(out))
    _, header, rows = read_csv(out)
    assert header[-3:] == ["oracle_power_dbm", "closed_minus_oracle_watts",
                           "min_margin"]
    for rec in records:
        if rec.min_margin is not None:
            assert rec.min_margin >= -1e-9
        if rec.closed_minus_oracle_watts is not None and \
                math.isfinite(rec.closed_minus_oracle_watts):
            assert rec.closed_minus_oracle_watts <= 1e-12


def test_scenario_from_dict_db_conversions():
    cfg = scenario_from_dict({"p_bs_dbm": 30.0, "rho0_db": -30.0,
                              "omega_si_db": -100.0, "m_elements": 7,
                              "eta": {"bn": 3.0}})
    assert cfg.p_bs == pytest.approx(1.0)
    assert cfg.rho0 == pytest.approx(1e-3)
    assert cfg.omega_si == pytest.approx(1e-10)
    assert cfg.m_elements == 7
    assert cfg.eta["bn"] == 3.0 and cfg.eta["rf"] == 2.2  # merged defaults


def test_scenario_from_dict_rejects_unknown():
    with pytest.raises(ConfigError):
        scenario_from_dict({"p_bs_zettawatts": 1.0})


def test_load_config_roundtrip(tmp_path):
    doc = {"scenario": {"m_elements": 3, "p_bs_dbm": 20.0},
           "experiment": {"trials": 2, "schemes": ["nofd"]}}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    merged = load_config(str(path))
    assert merged["scenario"].m_elements == 3
    assert merged["experiment"]["trials"] == 2


def test_load_config_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(str(bad))
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    weird = tmp_path / "weird.json"
    weird.write_text(json.dumps({"experiment": {"warp_factor": 9}}))
    with pytest.raises(ConfigError):
        load_config(str(weird))


def test_cli_runs_experiment(tmp_path):
    out = tmp_path / "cli.csv"
    code = cli_main(["--experiment", "power-vs-elements",
                     "--elements", "2,4", "--trials", "2", "--seed", "3",
                     "--schemes", "nofd", "--out", str(out)])
    assert code == 0
    _, header, rows = read_csv(out)
    assert len(rows) == 2
    assert {float(r["sweep_value"]) for r in rows} == {2.0, 4.0}


def test_cli_with_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"scenario": {"m_elements": 2},
                               "experiment": {"trials": 1,
                                              "schemes": ["nofd"]}}))
    out = tmp_path / "o.csv"
    code = cli_main(["--experiment", "power-vs-si", "--config", str(cfg),
                     "--si-grid-db", "-100", "--out", str(out)])
    assert code == 0
    assert out.exists()


def test_cli_unknown_flag_exits_1(capsys):
    assert cli_main(["--experiment", "convergence", "--warp", "9"]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_cli_missing_experiment_exits_1():
    assert cli_main([]) == 1


def test_cli_bad_config_exits_1(tmp_path):
    missing = tmp_path / "nope.json"
    code = cli_main(["--experiment", "convergence", "--config", str(missing)])
    assert code == 1


def test_worker_env_parallel_matches_serial(tmp_path, monkeypatch):
    spec = small_spec("power-vs-elements", elements_grid=(4,),
                      schemes=("nofd",), trials=4)
    a, b = tmp_path / "s.csv", tmp_path / "p.csv"
    monkeypatch.setenv("RIS_CNOMA_THREADS", "1")
    run_experiment(spec, str(a))
    monkeypatch.setenv("RIS_CNOMA_THREADS", "2")
    run_experiment(spec, str(b))
    assert a.read_bytes() == b.read_bytes()
