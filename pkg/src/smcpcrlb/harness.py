"""Experiment runner: run configs, presets, and CSV emission.

A run simulates ``M`` true trajectories from the master seed, feeds their
measurements to the particle bound, optionally evaluates the true-state
reference bound on the same ensemble, and writes

* ``bound.csv``  ``t,state_index,sqrt_pcrlb_approx,sqrt_pcrlb_theory``
* ``lambda.csv`` ``state_index,lambda_jj`` (only with the reference bound)
* ``config.yaml`` the config echo plus model metadata

Wall-clock timing lives on the report object and never reaches the files,
so identical configs give byte-identical outputs.
"""
import dataclasses
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .pcrlb import lambda_j, run_bound, theoretical_bound
from .ssm import (BALLISTIC_CASES, RAYLEIGH_PARAMETERIZATIONS, SCALE_SQUARED, BallisticModel,
                  GaussianLaw, LinearGaussianModel, UNGMModel, UNGMRayleighModel,
                  simulate_ensemble)

MODELS = ("ballistic", "ungm-gaussian", "ungm-rayleigh", "linear-gaussian")
CSV_HEADER = "t,state_index,sqrt_pcrlb_approx,sqrt_pcrlb_theory"
LAMBDA_HEADER = "state_index,lambda_jj"
MAX_SEED = 2 ** 64


@dataclass
class RunConfig:
    model: str
    n_particles: int
    m_sequences: int
    horizon_steps: int
    seed: int = 1
    case: int = None
    emit_theory: bool = True
    out_dir: str = None
    workers: int = 1
    emit_history: bool = False
    rayleigh_parameterization: str = SCALE_SQUARED
    comment: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError("model", f"must be one of {', '.join(MODELS)}; got {self.model!r}")
        for name in ("n_particles", "m_sequences", "horizon_steps", "workers"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(name, f"must be an integer >= 1; got {value!r}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < MAX_SEED:
            raise ConfigError("seed", f"must be an integer in [0, 2**64); got {self.seed!r}")
        if self.model == "ballistic":
            if self.case not in BALLISTIC_CASES:
                raise ConfigError("case", f"ballistic needs case 1-4; got {self.case!r}")
        elif self.case is not None:
            raise ConfigError("case", f"model {self.model} takes no case id")
        for name in ("emit_theory", "emit_history"):
            if not isinstance(getattr(self, name), bool):
                raise ConfigError(name, "must be true or false")
        if self.rayleigh_parameterization not in RAYLEIGH_PARAMETERIZATIONS:
            raise ConfigError("rayleigh_parameterization",
                              f"must be one of {', '.join(RAYLEIGH_PARAMETERIZATIONS)}")

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a mapping")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        for required in ("model", "n_particles", "m_sequences", "horizon_steps"):
            if required not in data:
                raise ConfigError(required, "missing")
        return cls(**data)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc.strerror}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError("config", f"{path} is not valid YAML: {exc}") from exc
    return RunConfig.from_dict(data)


def dump_config(config, extra=None):
    doc = {"config": config.to_dict()}
    if extra:
        doc.update(extra)
    return yaml.safe_dump(doc, sort_keys=False)


# --- presets -----------------------------------------------------------------

BALLISTIC_DESK = {"n_particles": 500, "m_sequences": 50}
BALLISTIC_FULL = {"n_particles": 1000, "m_sequences": 200}


def _ballistic_preset(case):
    gamma, sr, se = BALLISTIC_CASES[case]
    return RunConfig(
        model="ballistic", case=case, horizon_steps=60, seed=1, **BALLISTIC_DESK,
        comment=(f"scenario g=9.8, beta=40000, dT=2 s, T=120 s; case {case} "
                 f"gamma={gamma}, sigma_r={sr} m, sigma_e={se} rad; standard prior; "
                 "desk scale N=500, M=50 (full scale N=1000, M=200)"),
    )


PRESETS = {
    **{f"ballistic-case{k}": _ballistic_preset(k) for k in BALLISTIC_CASES},
    "example2-gaussian": RunConfig(
        model="ungm-gaussian", n_particles=100, m_sequences=200, horizon_steps=30, seed=1,
        comment="Growth model: Q=5e-3, R=1e-3, x0 ~ N(0, 0.01), N=100, M=200, T=30"),
    "example2-rayleigh": RunConfig(
        model="ungm-rayleigh", n_particles=100, m_sequences=200, horizon_steps=30, seed=1,
        comment="Growth model, Rayleigh sensor noise: Q=5e-3, R=1e-3, N=100, M=200, T=30"),
    "linear-sanity": RunConfig(
        model="linear-gaussian", n_particles=50, m_sequences=5, horizon_steps=50, seed=1,
        comment="invented: constant-velocity linear-Gaussian model, exact Kalman collapse"),
}


def preset(name, full_scale=False, **overrides):
    """A copy of a named preset with overrides applied (``None`` values ignored)."""
    if name not in PRESETS:
        raise ConfigError("preset", f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")
    config = PRESETS[name]
    if full_scale and config.model == "ballistic":
        config = config.replace(**BALLISTIC_FULL)
    return config.replace(**{k: v for k, v in overrides.items() if v is not None})


def linear_sanity_model():
    dt = 1.0
    return LinearGaussianModel(
        A=[[1.0, dt], [0.0, 1.0]],
        C=[[1.0, 0.0]],
        Q=0.1 * np.array([[dt ** 3 / 3, dt ** 2 / 2], [dt ** 2 / 2, dt]]),
        R=[[1.0]],
        prior=GaussianLaw(np.zeros(2), np.eye(2)),
    )


def build_model(config):
    if config.model == "ballistic":
        return BallisticModel(config.case)
    if config.model == "ungm-gaussian":
        return UNGMModel()
    if config.model == "ungm-rayleigh":
        return UNGMRayleighModel(parameterization=config.rayleigh_parameterization)
    return linear_sanity_model()


# --- running -----------------------------------------------------------------

@dataclass
class RunReport:
    config: RunConfig
    approx: object
    theory: object = None
    quality: object = None
    model_metadata: dict = field(default_factory=dict)
    seconds_per_sequence: float = math.nan

    def echo(self):
        """Config echo; parsing its ``config`` section reproduces the run."""
        return dump_config(self.config, {"model_metadata": _plain(self.model_metadata)})


def run(config, write=True):
    """Execute a run; writes outputs to ``config.out_dir`` when set and ``write``."""
    config.validate()
    model = build_model(config)
    trajectories = simulate_ensemble(model, config.m_sequences, config.horizon_steps, config.seed)
    start = time.perf_counter()
    approx = run_bound(model, trajectories, config.n_particles, config.seed,
                       workers=config.workers, keep_history=config.emit_history)
    elapsed = time.perf_counter() - start
    theory = quality = None
    if config.emit_theory:
        theory = theoretical_bound(model, trajectories, keep_history=config.emit_history)
        quality = lambda_j(approx, theory)
    report = RunReport(config, approx, theory, quality, model.metadata(),
                       elapsed / config.m_sequences)
    if write and config.out_dir is not None:
        write_outputs(report, config.out_dir)
    return report


# --- emission ------------------------------------------------------------------

def format_float(value):
    """Nine significant digits; integral values keep a trailing ``.0``."""
    text = format(float(value), ".9g")
    if text.lstrip("-").isdigit():
        text += ".0"
    return text


def bound_rows(report):
    approx = report.approx.sqrt_diagonal()
    theory = report.theory.sqrt_diagonal() if report.theory is not None else None
    for t in range(approx.shape[0]):
        for i in range(approx.shape[1]):
            th = format_float(theory[t, i]) if theory is not None else ""
            yield f"{t + 1},{i},{format_float(approx[t, i])},{th}"


def _write_lines(path, header, rows):
    path = Path(path)
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(header + "\n")
            for row in rows:
                fh.write(row + "\n")
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from exc
    return path


def emit_csv(report, path):
    return _write_lines(path, CSV_HEADER, bound_rows(report))


def emit_lambda(report, path):
    if report.quality is None:
        raise ValueError("no quality metric; run with emit_theory enabled")
    rows = (f"{i},{format_float(v)}" for i, v in enumerate(report.quality.diagonal))
    return _write_lines(path, LAMBDA_HEADER, rows)


def write_outputs(report, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [emit_csv(report, out / "bound.csv")]
    if report.quality is not None:
        written.append(emit_lambda(report, out / "lambda.csv"))
    (out / "config.yaml").write_text(report.echo())
    written.append(out / "config.yaml")
    if report.config.emit_history:
        written.append(_write_history(report, out / "history.npz"))
    return written


def _write_history(report, path):
    arrays = {}
    for label, series in (("approx", report.approx), ("theory", report.theory)):
        if series is None or not series.history:
            continue
        for key in ("d11", "d12", "d22", "j", "j_inv"):
            arrays[f"{label}_{key}"] = np.stack([step[key] for step in series.history])
    np.savez(path, **arrays)
    return Path(path)


def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    return value
