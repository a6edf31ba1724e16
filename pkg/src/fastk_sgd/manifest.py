"""Experiment manifests: parsing, validation and lossless snapshots.

A manifest is a YAML (or JSON) mapping::

    name: fig3
    timestamp: "2026-10-14T00:00:00Z"
    seeds: [0, 1, 2]
    output_dir: out/fig3
    targets: [950.0, "stationary:fixed_k40"]
    data: {kind: synthetic, m: 2000, d: 100, noise_sd: 1.0, seed: 1}
    arms:
      fixed_k40: {n: 50, eta: 0.0005, max_iterations: 6000, k: 40}
      adaptive:
        n: 50
        eta: 0.0005
        max_iterations: 6000
        mode: adaptive
        controller: {thresh: 10, burnin: 200, k_init: 10, k_max: 40, step: 10}

Unknown keys anywhere are rejected. Per-arm seeds are not allowed; each
replication takes its seed from ``seeds``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from .controller import ControllerConfig
from .data import gen_synthetic, load_dataset_csv, load_idx
from .engine import ExperimentConfig
from .numerics import DataSet
from .stragglers import ResponseDistribution


class ConfigError(ValueError):
    pass


_ARM_KEYS = {
    "n", "eta", "max_iterations", "mode", "k", "controller", "straggler",
    "loss", "reg", "loss_eval_cadence",
}
_CONTROLLER_KEYS = {"thresh", "burnin", "k_init", "k_max", "step", "factor"}
_STRAGGLER_KEYS = {"kind", "rate"}
_DATA_KEYS = {
    "synthetic": {"kind", "m", "d", "noise_sd", "seed"},
    "idx": {"kind", "images", "labels", "limit"},
    "csv": {"kind", "path"},
}
_MANIFEST_KEYS = {"name", "timestamp", "seeds", "output_dir", "targets", "data", "arms"}


def _check_keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected a mapping, got {type(d).__name__}")
    unknown = set(d) - set(allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown keys {sorted(unknown)}")


def _int(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
        raise ConfigError(f"{where}: expected an integer, got {v!r}")
    return int(v)


def _float(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float, np.integer, np.floating)):
        raise ConfigError(f"{where}: expected a number, got {v!r}")
    return float(v)


def experiment_from_dict(d: dict, where: str = "arm", seed: int = 0) -> ExperimentConfig:
    _check_keys(d, _ARM_KEYS, where)
    kw = {}
    try:
        for name in ("n", "max_iterations", "k", "loss_eval_cadence"):
            if d.get(name) is not None:
                kw[name] = _int(d[name], f"{where}.{name}")
        for name in ("eta", "reg"):
            if name in d:
                kw[name] = _float(d[name], f"{where}.{name}")
        for name in ("mode", "loss"):
            if name in d:
                kw[name] = str(d[name])
        if d.get("controller") is not None:
            c = d["controller"]
            _check_keys(c, _CONTROLLER_KEYS, f"{where}.controller")
            kw["controller"] = ControllerConfig(**{key: _int(v, f"{where}.controller.{key}") for key, v in c.items()})
        if "straggler" in d:
            s = d["straggler"]
            _check_keys(s, _STRAGGLER_KEYS, f"{where}.straggler")
            kw["straggler"] = ResponseDistribution(
                kind=str(s.get("kind", "exponential")), rate=_float(s.get("rate", 1.0), f"{where}.straggler.rate")
            )
        return ExperimentConfig(seed=seed, **kw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def experiment_to_dict(cfg: ExperimentConfig) -> dict:
    """Snapshot without the seed; inverse of :func:`experiment_from_dict`."""
    d = {
        "n": cfg.n,
        "eta": cfg.eta,
        "max_iterations": cfg.max_iterations,
        "mode": cfg.mode,
        "straggler": {"kind": cfg.straggler.kind, "rate": cfg.straggler.rate},
        "loss": cfg.loss,
        "reg": cfg.reg,
        "loss_eval_cadence": cfg.loss_eval_cadence,
    }
    if cfg.mode == "fixed":
        d["k"] = cfg.k
    else:
        d["controller"] = cfg.controller.to_dict()
    return d


@dataclass(frozen=True)
class RunManifest:
    name: str
    seeds: tuple
    arms: dict
    data: dict
    output_dir: str
    targets: tuple = ()
    timestamp: str = ""

    def __post_init__(self):
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if not self.arms:
            raise ConfigError("at least one arm is required")
        for t in self.targets:
            if isinstance(t, str):
                if not t.startswith("stationary:") or t.split(":", 1)[1] not in self.arms:
                    raise ConfigError(f"target {t!r} must be a number or 'stationary:<arm>'")

    def trace_path(self, arm: str, seed: int) -> Path:
        return Path(self.output_dir) / f"{arm}_seed{seed}.csv"

    @property
    def summary_path(self) -> Path:
        return Path(self.output_dir) / "summary.csv"

    def config_for(self, arm: str, seed: int) -> ExperimentConfig:
        return replace(self.arms[arm], seed=seed)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "timestamp": self.timestamp,
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
            "targets": list(self.targets),
            "data": dict(self.data),
            "arms": {name: experiment_to_dict(cfg) for name, cfg in self.arms.items()},
        }

    def snapshot(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _parse_data(d) -> dict:
    _check_keys(d, set().union(*_DATA_KEYS.values()), "data")
    kind = d.get("kind")
    if kind not in _DATA_KEYS:
        raise ConfigError(f"data.kind must be one of {sorted(_DATA_KEYS)}")
    _check_keys(d, _DATA_KEYS[kind], f"data ({kind})")
    out = {"kind": kind}
    if kind == "synthetic":
        out["m"] = _int(d.get("m"), "data.m")
        out["d"] = _int(d.get("d"), "data.d")
        out["noise_sd"] = _float(d.get("noise_sd", 1.0), "data.noise_sd")
        out["seed"] = _int(d.get("seed", 0), "data.seed")
    elif kind == "idx":
        out["images"] = str(d["images"])
        out["labels"] = str(d["labels"])
        if d.get("limit") is not None:
            out["limit"] = _int(d["limit"], "data.limit")
    else:
        out["path"] = str(d["path"])
    return out


def manifest_from_dict(d: dict) -> RunManifest:
    _check_keys(d, _MANIFEST_KEYS, "manifest")
    for key in ("name", "seeds", "output_dir", "data", "arms"):
        if key not in d:
            raise ConfigError(f"manifest: missing {key!r}")
    if not isinstance(d["arms"], dict):
        raise ConfigError("manifest.arms: expected a mapping of arm name to config")
    arms = {str(name): experiment_from_dict(cfg, f"arms.{name}") for name, cfg in d["arms"].items()}
    targets = []
    for t in d.get("targets") or []:
        targets.append(t if isinstance(t, str) else _float(t, "targets"))
    return RunManifest(
        name=str(d["name"]),
        seeds=tuple(_int(s, "seeds") for s in d["seeds"]),
        arms=arms,
        data=_parse_data(d["data"]),
        output_dir=str(d["output_dir"]),
        targets=tuple(targets),
        timestamp=str(d.get("timestamp", "")),
    )


def load_manifest(path) -> RunManifest:
    with open(path) as f:
        raw = yaml.safe_load(f)
    return manifest_from_dict(raw)


def load_data(spec: dict, base_dir: Path | None = None) -> DataSet:
    """Materialize the dataset described by a manifest ``data`` section."""
    base_dir = Path(base_dir) if base_dir is not None else Path(".")
    kind = spec["kind"]
    if kind == "synthetic":
        data, _ = gen_synthetic(spec["m"], spec["d"], np.random.default_rng(spec["seed"]), spec["noise_sd"])
        return data
    if kind == "idx":
        return load_idx(base_dir / spec["images"], base_dir / spec["labels"], spec.get("limit"))
    return load_dataset_csv(base_dir / spec["path"])
