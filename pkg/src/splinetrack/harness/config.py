"""Scenario configuration: one JSON document per experiment."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from ..motion import make_state
from ..scattering import SensorConfig

BUILTIN_DICTIONARY = "builtin:synthetic"

# Every key a config may carry, with its default.  Standard deviations are
# given per state component; covariances are their squares on the diagonal.
DEFAULTS: dict = {
    "seed": 0,
    "dictionary": BUILTIN_DICTIONARY,
    "true_class": "delta_wing",
    "sensors": [
        {"kind": "contour", "sigma": 1.0, "resolution": 5.0, "eta": 0.9, "period": 0.1},
        {"kind": "surface", "sigma": 1.0, "resolution": 5.0, "eta": 0.9, "period": 0.1},
    ],
    "scans": 100,
    "runs": 1,
    "workers": 1,
    "pose": {"g": [0.0, 0.0], "h": 0.0},
    "trajectory": {
        "initial": {"g": [0.0, 0.0], "h": 0.0, "s": 250.0, "sdot": 0.0, "omega": 0.0},
        "segments": [],
    },
    "tracker": {
        "Q_std": [1.0, 1.0, 0.05, 10.0, 0.1, 0.1],
        "E_std": [10.0, 10.0, 5.0],
        "P0_std": None,
        "heading_eps": 1e-3,
    },
    "shaper": {"delta": 0.9, "delta_R": 1.0, "particles": 1000, "particle_seed": 0, "threads": 1},
    "classification": {"delta_R": 0.0, "convergence_threshold": 0.95},
    "metrics": {"rho_min": None, "iou_cells": 512, "chamfer_samples": 1024},
    "bench": {
        "m_grid": [1, 10, 100, 1000],
        "N_grid": [100, 1000, 10000, 100000],
        "m_fixed": 100,
        "N_fixed": 10000,
        "vertices": 1024,
        "radius": 10.0,
        "sigma": 1.0,
        "repeats": 5,
    },
}


class ConfigError(ValueError):
    pass


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _as_cov(value) -> np.ndarray:
    """Scalar variance, 2-vector of variances or full 2x2 matrix."""
    a = np.asarray(value, dtype=float)
    if a.ndim == 0:
        return float(a) * np.eye(2)
    if a.shape == (2,):
        return np.diag(a)
    return a.reshape(2, 2)


@dataclass
class ScenarioConfig:
    raw: dict
    base_dir: Path = field(default_factory=Path.cwd)

    @classmethod
    def from_dict(cls, d: dict | None = None, base_dir=None) -> ScenarioConfig:
        unknown = set(d or {}) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(_merge(DEFAULTS, d or {}), Path(base_dir) if base_dir else Path.cwd())
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path) -> ScenarioConfig:
        path = Path(path)
        try:
            d = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(d, base_dir=path.parent)

    def check(self) -> None:
        if int(self.raw["scans"]) < 1:
            raise ConfigError("scans must be at least 1")
        if not self.raw["sensors"]:
            raise ConfigError("at least one sensor is required")
        try:
            self.sensors()
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad sensor block: {exc}") from exc
        kinds = [s["kind"] for s in self.raw["sensors"]]
        if len(set(kinds)) != len(kinds):
            raise ConfigError("at most one sensor per kind")

    def __getitem__(self, key):
        return self.raw[key]

    def with_overrides(self, **kw) -> ScenarioConfig:
        return ScenarioConfig(_merge(self.raw, kw), self.base_dir)

    @property
    def seed(self) -> int:
        return int(self.raw["seed"])

    @property
    def scans(self) -> int:
        return int(self.raw["scans"])

    @property
    def runs(self) -> int:
        return int(self.raw["runs"])

    def sensors(self) -> list[SensorConfig]:
        # contour first: sensors are processed in this order within a scan instant
        order = {"contour": 0, "surface": 1}
        blocks = sorted(self.raw["sensors"], key=lambda s: order.get(s.get("kind"), 2))
        return [SensorConfig.from_dict(s) for s in blocks]

    @property
    def period(self) -> float:
        return self.sensors()[0].period

    def dictionary_path(self) -> Path:
        ref = self.raw["dictionary"]
        if ref == BUILTIN_DICTIONARY:
            return Path(str(resources.files("splinetrack") / "data" / "synthetic_dictionary.json"))
        p = Path(ref)
        return p if p.is_absolute() else self.base_dir / p

    def initial_state(self) -> np.ndarray:
        ini = self.raw["trajectory"]["initial"]
        return make_state(ini.get("g", (0, 0)), ini.get("h", 0), ini.get("s", 0), ini.get("sdot", 0), ini.get("omega", 0))

    def segments(self) -> list[tuple[float, float, float]]:
        return [tuple(float(v) for v in seg) for seg in self.raw["trajectory"]["segments"]]

    def Q(self) -> np.ndarray:
        return np.diag(np.square(self.raw["tracker"]["Q_std"]))

    def E(self) -> np.ndarray:
        return np.diag(np.square(self.raw["tracker"]["E_std"]))

    def P0(self) -> np.ndarray:
        """Initial covariance; by default the pose block takes the virtual-measurement
        variances and the speed, speed-rate and turn-rate entries take the process ones."""
        std = self.raw["tracker"]["P0_std"]
        if std is None:
            std = list(self.raw["tracker"]["E_std"][:3]) + list(self.raw["tracker"]["Q_std"][3:])
        return np.diag(np.square(std))

    def delta_R(self) -> np.ndarray:
        return _as_cov(self.raw["shaper"]["delta_R"])

    def classification_delta_R(self) -> np.ndarray:
        return _as_cov(self.raw["classification"]["delta_R"])

    def to_json(self) -> str:
        return json.dumps(self.raw, indent=2, sort_keys=True)


def defaults_help() -> str:
    return json.dumps(DEFAULTS, indent=2)
