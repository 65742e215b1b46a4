"""Run configuration for the command-line front-end.

A configuration is a single JSON document. Parsing fills in defaults and
validates every nested object, and :meth:`RunConfig.canonical_json` gives a
stable text form so that parse -> serialize -> parse is the identity and the
configuration hash is reproducible.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .analytics import ScanPlan
from .exceptions import QimdError
from .fringe import MZI, NLI, InterferometerSpec, NoiseChannel, PhotonStatistics
from .oracle.sampling import SAMPLERS
from .working_point import SweepGrid

__all__ = ["SUBCOMMANDS", "FORMATS", "ConfigError", "MCSettings", "GridSettings", "RunConfig"]

SUBCOMMANDS = ("analytic", "wp", "mc", "sweep", "tables")
FORMATS = ("csv", "json")
SEED_MAX = 2**64 - 1


class ConfigError(QimdError, ValueError):
    """The configuration document is malformed or inconsistent."""


def _section(doc, key):
    value = doc.get(key, {})
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigError(f"'{key}' must be an object")
    return value


def _reject_unknown(section: dict, allowed, where):
    extra = sorted(set(section) - set(allowed))
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _number(value, where) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number")
    return float(value)


def _integer(value, where, minimum) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer")
    if value < minimum:
        raise ConfigError(f"{where} must be >= {minimum}")
    return value


def _axis(value, where) -> tuple:
    """An axis is either a list of numbers or ``{"start", "stop", "num", "log"}``."""
    if isinstance(value, dict):
        _reject_unknown(value, ("start", "stop", "num", "log"), where)
        start = _number(value.get("start"), f"{where}.start")
        stop = _number(value.get("stop"), f"{where}.stop")
        num = _integer(value.get("num"), f"{where}.num", 0)
        fn = np.geomspace if value.get("log", False) else np.linspace
        return tuple(float(x) for x in fn(start, stop, num)) if num else ()
    if not isinstance(value, list):
        raise ConfigError(f"{where} must be a list or a range object")
    return tuple(_number(x, f"{where}[]") for x in value)


@dataclass(frozen=True)
class MCSettings:
    shots: int = 100
    trials: int = 1000
    count_shots: int = 100000
    seed: int | None = None
    true_phase: float | None = None
    phase: float | None = None
    method: str = "glauber"
    count_method: str = "fock"

    @classmethod
    def from_dict(cls, d: dict) -> "MCSettings":
        _reject_unknown(d, cls.__dataclass_fields__, "mc")
        seed = d.get("seed")
        if seed is not None:
            seed = _integer(seed, "mc.seed", 0)
            if seed > SEED_MAX:
                raise ConfigError("mc.seed must fit in 64 bits")
        out = cls(
            shots=_integer(d.get("shots", cls.shots), "mc.shots", 1),
            trials=_integer(d.get("trials", cls.trials), "mc.trials", 2),
            count_shots=_integer(d.get("count_shots", cls.count_shots), "mc.count_shots", 2),
            seed=seed,
            true_phase=None if d.get("true_phase") is None else _number(d["true_phase"], "mc.true_phase"),
            phase=None if d.get("phase") is None else _number(d["phase"], "mc.phase"),
            method=d.get("method", cls.method),
            count_method=d.get("count_method", cls.count_method),
        )
        for name in ("method", "count_method"):
            if getattr(out, name) not in SAMPLERS:
                raise ConfigError(f"mc.{name} must be one of {SAMPLERS}")
        return out


@dataclass(frozen=True)
class GridSettings:
    kind: str = "MZI"
    eta: tuple = ()
    n0: tuple = ()
    noise_statistics: str = "thermal"
    n0_boundary: tuple = ()
    boundary_steps: int = 2

    @classmethod
    def from_dict(cls, d: dict) -> "GridSettings":
        _reject_unknown(d, cls.__dataclass_fields__, "grid")
        kind = str(d.get("kind", cls.kind)).upper()
        if kind not in ("MZI", "NLI"):
            raise ConfigError("grid.kind must be MZI or NLI")
        out = cls(
            kind=kind,
            eta=_axis(d.get("eta", []), "grid.eta"),
            n0=_axis(d.get("n0", []), "grid.n0"),
            noise_statistics=PhotonStatistics.parse(d.get("noise_statistics", cls.noise_statistics)).value,
            n0_boundary=_axis(d.get("n0_boundary", []), "grid.n0_boundary"),
            boundary_steps=_integer(d.get("boundary_steps", cls.boundary_steps), "grid.boundary_steps", 1),
        )
        out.sweep_grid()
        if any(not (0.0 < x < math.inf) for x in out.n0_boundary):
            raise ConfigError("grid.n0_boundary entries must be positive and finite")
        return out

    def sweep_grid(self) -> SweepGrid:
        try:
            return SweepGrid(self.eta, self.n0, self.noise_statistics)
        except ValueError as exc:
            raise ConfigError(f"grid: {exc}") from exc


def _spec_from_dict(d: dict) -> InterferometerSpec:
    kind = str(d.get("kind", "MZI")).upper()
    try:
        if kind == "MZI":
            _reject_unknown(d, ("kind", "n0", "T1", "T2"), "interferometer")
            return MZI(
                n0=_number(d.get("n0"), "interferometer.n0"),
                T1=_number(d.get("T1", 0.5), "interferometer.T1"),
                T2=_number(d.get("T2", 0.5), "interferometer.T2"),
            )
        if kind == "NLI":
            _reject_unknown(d, ("kind", "n0", "n0p"), "interferometer")
            n0 = _number(d.get("n0"), "interferometer.n0")
            return NLI(n0=n0, n0p=_number(d.get("n0p", n0), "interferometer.n0p"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"interferometer: {exc}") from exc
    raise ConfigError("interferometer.kind must be MZI or NLI")


def _spec_to_dict(spec: InterferometerSpec) -> dict:
    if isinstance(spec, MZI):
        return {"kind": "MZI", "n0": spec.n0, "T1": spec.T1, "T2": spec.T2}
    return {"kind": "NLI", "n0": spec.n0, "n0p": spec.n0p}


def _noise_from_dict(d: dict) -> NoiseChannel:
    _reject_unknown(d, ("eta", "mean", "statistics"), "noise")
    try:
        return NoiseChannel(
            eta=_number(d.get("eta", 1.0), "noise.eta"),
            mean_noise=_number(d.get("mean", 0.0), "noise.mean"),
            stats=PhotonStatistics.parse(d.get("statistics", "poissonian")),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"noise: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    subcommand: str
    spec: InterferometerSpec | None = None
    noise: NoiseChannel = field(default_factory=NoiseChannel)
    plan: ScanPlan = field(default_factory=lambda: ScanPlan(8))
    mc: MCSettings = field(default_factory=MCSettings)
    grid: GridSettings = field(default_factory=GridSettings)
    output_path: str | None = None
    output_format: str = "json"

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a JSON object")
        _reject_unknown(doc, ("subcommand", "interferometer", "noise", "plan", "mc", "grid", "output"), "config")
        sub = doc.get("subcommand")
        if sub not in SUBCOMMANDS:
            raise ConfigError(f"subcommand must be one of {SUBCOMMANDS}")
        spec = None
        if "interferometer" in doc and doc["interferometer"] is not None:
            spec = _spec_from_dict(_section(doc, "interferometer"))
        elif sub in ("analytic", "wp", "mc"):
            raise ConfigError(f"'{sub}' needs an interferometer")
        plan_doc = _section(doc, "plan")
        _reject_unknown(plan_doc, ("steps", "theta_jitter"), "plan")
        try:
            plan = ScanPlan(
                _integer(plan_doc.get("steps", 8), "plan.steps", 1),
                _number(plan_doc.get("theta_jitter", 0.0), "plan.theta_jitter"),
            )
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"plan: {exc}") from exc
        out_doc = _section(doc, "output")
        _reject_unknown(out_doc, ("path", "format"), "output")
        fmt = out_doc.get("format", "json")
        if fmt not in FORMATS:
            raise ConfigError(f"output.format must be one of {FORMATS}")
        path = out_doc.get("path")
        if path is not None and not isinstance(path, str):
            raise ConfigError("output.path must be a string")
        cfg = cls(
            subcommand=sub,
            spec=spec,
            noise=_noise_from_dict(_section(doc, "noise")),
            plan=plan,
            mc=MCSettings.from_dict(_section(doc, "mc")),
            grid=GridSettings.from_dict(_section(doc, "grid")),
            output_path=path,
            output_format=fmt,
        )
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        return cls.from_dict(doc)

    def validate(self):
        if self.subcommand == "mc" and self.mc.seed is None:
            raise ConfigError("'mc' requires mc.seed")

    def with_overrides(self, seed=None, out=None, fmt=None, subcommand=None) -> "RunConfig":
        cfg = self
        if subcommand is not None:
            cfg = replace(cfg, subcommand=subcommand)
        if seed is not None:
            if not 0 <= seed <= SEED_MAX:
                raise ConfigError("--seed must fit in 64 bits")
            cfg = replace(cfg, mc=replace(cfg.mc, seed=seed))
        if out is not None:
            cfg = replace(cfg, output_path=out)
        if fmt is not None:
            if fmt not in FORMATS:
                raise ConfigError(f"--format must be one of {FORMATS}")
            cfg = replace(cfg, output_format=fmt)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "interferometer": None if self.spec is None else _spec_to_dict(self.spec),
            "noise": {"eta": self.noise.eta, "mean": self.noise.mean_noise, "statistics": self.noise.stats.value},
            "plan": {"steps": self.plan.steps, "theta_jitter": self.plan.theta_jitter},
            "mc": {
                "shots": self.mc.shots,
                "trials": self.mc.trials,
                "count_shots": self.mc.count_shots,
                "seed": self.mc.seed,
                "true_phase": self.mc.true_phase,
                "phase": self.mc.phase,
                "method": self.mc.method,
                "count_method": self.mc.count_method,
            },
            "grid": {
                "kind": self.grid.kind,
                "eta": list(self.grid.eta),
                "n0": list(self.grid.n0),
                "noise_statistics": self.grid.noise_statistics,
                "n0_boundary": list(self.grid.n0_boundary),
                "boundary_steps": self.grid.boundary_steps,
            },
            "output": {"path": self.output_path, "format": self.output_format},
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), allow_nan=False)

    def config_hash(self) -> str:
        """SHA-256 of the canonical form, excluding the output destination."""
        doc = self.to_dict()
        doc.pop("output")
        text = json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
        return hashlib.sha256(text.encode()).hexdigest()
