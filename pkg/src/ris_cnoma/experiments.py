"""Monte-Carlo harness: sweeps, trial fan-out, aggregation and CSV output.

Every sweep point is averaged over seeded, order-independent trials;
infeasible trials never enter power means and are reported as an outage
fraction instead (stated in the CSV metadata).  Runs are deterministic for
a fixed master seed: identical inputs give byte-identical CSV files.
"""

from __future__ import annotations

import dataclasses
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import alt_opt, oracle, power_fd, power_hd
from .alt_opt import AoConfig
from .gains import fd_gains, hd_gains
from .scenario import (ScenarioConfig, db2lin, dbm2watts, generate_realization,
                       watts2dbm)

KINDS = ("convergence", "power-vs-rate", "power-vs-elements", "power-vs-si",
         "power-split")
SCHEMES = ("ris-fd", "ris-hd", "nofd", "nohd")
CSV_COLUMNS = ("experiment", "sweep_name", "sweep_value", "scheme",
               "mean_power_dbm", "mean_power_watts", "outage", "mean_iters",
               "trials", "seed")
VERIFY_COLUMNS = ("oracle_power_dbm", "closed_minus_oracle_watts", "min_margin")


class ConfigError(ValueError):
    """Invalid experiment/scenario configuration."""


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    scenario: ScenarioConfig = field(default_factory=ScenarioConfig)
    trials: int = 200
    schemes: tuple[str, ...] = ("ris-fd", "ris-hd", "nofd")
    master_seed: int = 1
    rf_grid: tuple[float, ...] = (1.0, 1.5, 2.0, 2.5, 3.0)
    si_variants_db: tuple[float, ...] | None = None  # power-vs-rate overlay
    elements_grid: tuple[int, ...] = (8, 16, 32)
    si_grid_db: tuple[float, ...] = (-110.0, -100.0, -90.0, -80.0)
    split_elements: tuple[int, ...] = (16, 32)
    epsilon: float = 1e-3
    max_iters: int = 20
    num_samples: int = 1000
    init_mode: str = "ct-aligned"
    oracle_step: float = 1e-2
    verify: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        unknown = [s for s in self.schemes if s not in SCHEMES]
        if unknown:
            raise ConfigError(f"unknown schemes {unknown}; choose from {SCHEMES}")
        for name in ("rf_grid", "elements_grid", "si_grid_db", "split_elements"):
            vals = getattr(self, name)
            if any(not np.isfinite(v) for v in vals):
                raise ConfigError(f"{name} values must be finite")
            if list(vals) != sorted(vals):
                raise ConfigError(f"{name} values must be sorted")

    def ao_config(self, seed: int = 0) -> AoConfig:
        return AoConfig(epsilon=self.epsilon, max_iters=self.max_iters,
                        num_samples=self.num_samples,
                        init_mode=self.init_mode, seed=seed)


@dataclass
class ExperimentRecord:
    experiment: str
    sweep_name: str
    sweep_value: float
    scheme: str
    mean_power_dbm: float
    mean_power_watts: float
    outage: float
    mean_iters: float
    trials: int
    seed: int
    oracle_power_dbm: float | None = None
    closed_minus_oracle_watts: float | None = None
    min_margin: float | None = None


@dataclass
class _TrialOutcome:
    feasible: bool
    total_watts: float
    iterations: int
    bs_watts: float
    uen_watts: float
    objectives: tuple[float, ...]
    oracle_watts: float | None = None
    min_margin: float | None = None


def _scheme_rng(master_seed: int, trial: int, scheme: str) -> np.random.Generator:
    code = SCHEMES.index(scheme)
    return np.random.default_rng(
        np.random.SeedSequence(master_seed, spawn_key=(trial, 101, code)))


def _final_gains(ch, cfg, scheme, trace):
    if scheme == "ris-hd":
        return hd_gains(ch, trace.theta1, trace.theta2, cfg)
    return fd_gains(ch, trace.theta1, cfg)


def _run_scheme(ch, cfg: ScenarioConfig, scheme: str, spec: ExperimentSpec,
                trial: int) -> _TrialOutcome:
    if scheme in ("nofd", "nohd"):
        mode = "FD" if scheme == "nofd" else "HD"
        p = alt_opt.baseline_no_ris(ch, cfg, mode)
        out = _TrialOutcome(p.feasible, p.total_watts, 1,
                            (p.alpha_n + p.alpha_f) * cfg.p_bs,
                            p.beta * cfg.p_n, (p.total_watts,) if p.feasible else ())
        if spec.verify and p.feasible:
            ch0 = ch.without_ris()
            z = np.zeros(ch0.m_elements)
            g = hd_gains(ch0, z, z, cfg) if mode == "HD" else fd_gains(ch0, z, cfg)
            _attach_verify(out, g, p, cfg, spec, mode)
        return out

    rng = _scheme_rng(spec.master_seed, trial, scheme)
    ao = spec.ao_config()
    if scheme == "ris-hd":
        trace = alt_opt.optimize_hd(ch, cfg, ao, rng)
        mode = "HD"
    else:
        trace = alt_opt.optimize_fd(ch, cfg, ao, rng)
        mode = "FD"
    p = trace.power
    out = _TrialOutcome(trace.feasible, p.total_watts, trace.iterations,
                        (p.alpha_n + p.alpha_f) * cfg.p_bs,
                        p.beta * cfg.p_n, tuple(trace.objectives))
    if spec.verify and trace.feasible:
        _attach_verify(out, _final_gains(ch, cfg, scheme, trace), p, cfg,
                       spec, mode)
    return out


def _attach_verify(out: _TrialOutcome, g, p, cfg, spec: ExperimentSpec,
                   mode: str) -> None:
    t = (power_hd.hd_targets(cfg.r_n_th, cfg.r_f_th) if mode == "HD"
         else power_fd.fd_targets(cfg.r_n_th, cfg.r_f_th))
    ref = oracle.grid_search_power(g, t, cfg, spec.oracle_step)
    out.oracle_watts = ref.total_watts if ref.feasible else float("nan")
    margins = (power_hd.constraint_margins(g, p, t) if mode == "HD"
               else power_fd.constraint_margins(g, p, t))
    out.min_margin = float(np.min(margins))


def _run_trial(job) -> dict[str, _TrialOutcome]:
    cfg, trial, spec, schemes = job
    ch = generate_realization(cfg, trial, spec.master_seed)
    return {s: _run_scheme(ch, cfg, s, spec, trial) for s in schemes}


def _worker_count() -> int:
    env = os.environ.get("RIS_CNOMA_THREADS", "1")
    try:
        n = int(env)
    except ValueError:
        raise ConfigError(f"RIS_CNOMA_THREADS must be an integer, got {env!r}")
    return max(1, min(n, os.cpu_count() or 1))


def _map_trials(jobs):
    workers = _worker_count()
    if workers <= 1 or len(jobs) <= 1:
        return [_run_trial(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_trial, jobs, chunksize=8))


def _aggregate(outs: list[_TrialOutcome]):
    ok = [o for o in outs if o.feasible]
    outage = 1.0 - len(ok) / len(outs)
    watts = float(np.mean([o.total_watts for o in ok])) if ok else float("nan")
    iters = float(np.mean([o.iterations for o in ok])) if ok else float("nan")
    return watts, outage, iters, ok


def _record(spec, sweep_name, sweep_value, scheme, outs,
            watts_of=None) -> ExperimentRecord:
    watts, outage, iters, ok = _aggregate(outs)
    if watts_of is not None:
        watts = float(np.mean([watts_of(o) for o in ok])) if ok else float("nan")
    rec = ExperimentRecord(spec.kind, sweep_name, sweep_value, scheme,
                           watts2dbm(watts) if watts > 0 else float("nan"),
                           watts, outage, iters, len(outs), spec.master_seed)
    if spec.verify:
        ow = [o.oracle_watts for o in ok if o.oracle_watts is not None]
        mm = [o.min_margin for o in ok if o.min_margin is not None]
        if ow:
            mean_ow = float(np.mean(ow))
            rec.oracle_power_dbm = watts2dbm(mean_ow) if mean_ow > 0 else float("nan")
            rec.closed_minus_oracle_watts = watts - mean_ow
        if mm:
            rec.min_margin = float(np.min(mm))
    return rec


def _sweep_records(spec: ExperimentSpec, variants) -> list[ExperimentRecord]:
    """variants: list of (sweep_name, sweep_value, scheme_label, cfg, scheme)."""
    records = []
    for sweep_name, sweep_value, label, cfg, scheme in variants:
        jobs = [(cfg, tr, spec, (scheme,)) for tr in range(spec.trials)]
        outs = [res[scheme] for res in _map_trials(jobs)]
        records.append(_record(spec, sweep_name, sweep_value, label, outs))
    return records


def run_experiment(spec: ExperimentSpec,
                   out_path: str | None = None) -> list[ExperimentRecord]:
    """Run all sweep points of one experiment; optionally write the CSV."""
    if spec.kind == "convergence":
        records = _run_convergence(spec)
    elif spec.kind == "power-vs-rate":
        records = _run_power_vs_rate(spec)
    elif spec.kind == "power-vs-elements":
        records = _sweep_records(spec, [
            ("m_elements", m, s, spec.scenario.with_elements(m), s)
            for m in spec.elements_grid for s in spec.schemes])
    elif spec.kind == "power-vs-si":
        records = _sweep_records(spec, [
            ("omega_si_db", si, s, replace(spec.scenario, omega_si=db2lin(si)), s)
            for si in spec.si_grid_db for s in spec.schemes])
    else:
        records = _run_power_split(spec)
    if out_path is not None:
        write_csv(records, spec, out_path)
    return records


def _run_power_vs_rate(spec: ExperimentSpec) -> list[ExperimentRecord]:
    variants = []
    si_values = spec.si_variants_db
    for rf in spec.rf_grid:
        for s in spec.schemes:
            if si_values is None or s in ("ris-hd", "nohd"):
                cfg = replace(spec.scenario, r_f_th=rf)
                variants.append(("r_f_th", rf, s, cfg, s))
            else:
                for si in si_values:
                    cfg = replace(spec.scenario, r_f_th=rf, omega_si=db2lin(si))
                    variants.append(("r_f_th", rf, f"{s}(si={si:g}dB)", cfg, s))
    return _sweep_records(spec, variants)


def _run_convergence(spec: ExperimentSpec) -> list[ExperimentRecord]:
    """Mean objective per iteration; shorter traces are held at their last
    value so every trial contributes to every iteration row."""
    records = []
    ao_schemes = [s for s in spec.schemes if s in ("ris-fd", "ris-hd")]
    for scheme in ao_schemes:
        jobs = [(spec.scenario, tr, spec, (scheme,)) for tr in range(spec.trials)]
        outs = [res[scheme] for res in _map_trials(jobs)]
        ok = [o for o in outs if o.feasible and o.objectives]
        outage = 1.0 - len(ok) / len(outs)
        iters = float(np.mean([o.iterations for o in ok])) if ok else float("nan")
        depth = max((len(o.objectives) for o in ok), default=0)
        for k in range(1, depth + 1):
            vals = [o.objectives[min(k, len(o.objectives)) - 1] for o in ok]
            watts = float(np.mean(vals))
            records.append(ExperimentRecord(
                spec.kind, "iteration", float(k), scheme,
                watts2dbm(watts) if watts > 0 else float("nan"), watts,
                outage, iters, len(outs), spec.master_seed))
    return records


def _run_power_split(spec: ExperimentSpec) -> list[ExperimentRecord]:
    """BS and relay shares of the mean power, per surface size."""
    records = []
    ao_schemes = [s for s in spec.schemes if s in ("ris-fd", "ris-hd")]
    for m in spec.split_elements:
        for si in spec.si_grid_db:
            cfg = replace(spec.scenario.with_elements(m), omega_si=db2lin(si))
            for scheme in ao_schemes:
                jobs = [(cfg, tr, spec, (scheme,)) for tr in range(spec.trials)]
                outs = [res[scheme] for res in _map_trials(jobs)]
                records.append(_record(spec, "omega_si_db", si,
                                       f"{scheme}-bs(M={m})", outs,
                                       watts_of=lambda o: o.bs_watts))
                records.append(_record(spec, "omega_si_db", si,
                                       f"{scheme}-uen(M={m})", outs,
                                       watts_of=lambda o: o.uen_watts))
    return records


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _spec_meta(spec: ExperimentSpec) -> str:
    d = dataclasses.asdict(spec)
    d["scenario"] = dataclasses.asdict(spec.scenario)
    return json.dumps(d, sort_keys=True, separators=(",", ":"), default=str)


def write_csv(records: list[ExperimentRecord], spec: ExperimentSpec,
              out_path: str) -> None:
    """Atomic write; metadata lines, then the fixed header and rows."""
    columns = CSV_COLUMNS + (VERIFY_COLUMNS if spec.verify else ())
    lines = ["# ris-cnoma experiment results",
             "# note: power means exclude infeasible trials; outage is the "
             "infeasible fraction",
             f"# config: {_spec_meta(spec)}",
             ",".join(columns)]
    for r in records:
        lines.append(",".join(_fmt(getattr(r, c)) for c in columns))
    tmp = f"{out_path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    os.replace(tmp, out_path)


_SCENARIO_FIELDS = {f.name for f in dataclasses.fields(ScenarioConfig)}
_DB_FIELDS = {"rho0", "omega_si", "kappa_br", "kappa_rf"}
_DBM_FIELDS = {"p_bs", "p_n", "sigma2_n", "sigma2_f"}


def scenario_from_dict(raw: dict) -> ScenarioConfig:
    """Build a scenario from JSON-style keys; *_db / *_dbm suffixed keys are
    converted to linear units on load."""
    kwargs = {}
    for key, val in raw.items():
        if key.endswith("_dbm") and key[:-4] in _DBM_FIELDS:
            kwargs[key[:-4]] = dbm2watts(float(val))
        elif key.endswith("_db") and key[:-3] in _DB_FIELDS:
            kwargs[key[:-3]] = db2lin(float(val))
        elif key in _SCENARIO_FIELDS:
            if key.startswith("pos_"):
                val = tuple(float(v) for v in val)
            elif key == "eta":
                val = {**ScenarioConfig().eta, **{k: float(v) for k, v in val.items()}}
            kwargs[key] = val
        else:
            raise ConfigError(f"unknown scenario key {key!r}")
    try:
        return ScenarioConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


_EXPERIMENT_KEYS = {"kind", "trials", "schemes", "master_seed", "rf_grid",
                    "si_variants_db", "elements_grid", "si_grid_db",
                    "split_elements", "epsilon", "max_iters", "num_samples",
                    "init_mode", "oracle_step", "verify"}


def load_config(path: str) -> dict:
    """Read {"scenario": {...}, "experiment": {...}}; raises ConfigError."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(doc) - {"scenario", "experiment"}
    if unknown:
        raise ConfigError(f"unknown top-level config keys {sorted(unknown)}")
    exp = doc.get("experiment", {})
    bad = set(exp) - _EXPERIMENT_KEYS
    if bad:
        raise ConfigError(f"unknown experiment keys {sorted(bad)}")
    for key in ("schemes", "rf_grid", "si_variants_db", "elements_grid",
                "si_grid_db", "split_elements"):
        if key in exp and exp[key] is not None:
            exp[key] = tuple(exp[key])
    return {"scenario": scenario_from_dict(doc.get("scenario", {})),
            "experiment": exp}
