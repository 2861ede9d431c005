"""Flat experiment configuration: defaults < config file < command-line flags."""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass
from typing import Any, Mapping

import yaml

DEFENSES = ("none", "return", "return_rop", "return_rr", "return_no_ens", "rd", "rde")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    database: str | None = None
    eval: str | None = None
    graph_cache: str | None = None
    report: str = "report.csv"
    manifest: str | None = None
    seed: int = 0
    max_users: int | None = None
    workers: int = 1
    k_list: tuple[int, ...] = (5, 10)
    max_hop: int | None = None
    # attack
    attack_delta: int = 3
    attack_kind: str = "random"
    attack_budget: int = 20
    # defenses
    defense: tuple[str, ...] = ("return",)
    m: int = 10
    count_mean: float = 3.5
    count_spread: float = 0.5
    min_count: int = 1
    vote: str = "borda"
    rd_count: int = 3
    benign_defense: bool = False
    disjoint_graphs: bool = False
    # victim
    recommender: str = "reference"
    endpoint: str | None = None
    remote_timeout: float = 10.0
    remote_max_in_flight: int = 4
    # external database quality
    db_inject_fraction: float | None = None
    db_delete_fraction: float | None = None

    def __post_init__(self):
        if not self.k_list or list(self.k_list) != sorted(set(self.k_list)) or self.k_list[0] < 1:
            raise ConfigError("k_list must be non-empty, strictly ascending and positive")
        for d in self.defense:
            if d not in DEFENSES:
                raise ConfigError(f"unknown defense {d!r}; choose from {', '.join(DEFENSES)}")
        if self.recommender not in ("reference", "remote"):
            raise ConfigError("recommender must be 'reference' or 'remote'")
        if self.recommender == "remote" and not self.endpoint:
            raise ConfigError("a remote recommender needs an endpoint")
        if self.attack_kind not in ("random", "greedy"):
            raise ConfigError("attack_kind must be 'random' or 'greedy'")
        if self.attack_delta < 0:
            raise ConfigError("attack_delta must be >= 0")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.db_inject_fraction is not None and self.db_delete_fraction is not None:
            raise ConfigError("choose at most one of db_inject_fraction / db_delete_fraction")

    @property
    def defenses(self) -> list[str]:
        return [d for d in self.defense if d != "none"]

    def check_paths(self) -> None:
        if not self.database:
            raise ConfigError("no database path configured")
        for key in ("database", "eval"):
            path = getattr(self, key)
            if path is not None and not os.path.isfile(path):
                raise ConfigError(f"{key} file not found: {path}")

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["k_list"] = list(self.k_list)
        d["defense"] = list(self.defense)
        return d


FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name: str, value: Any) -> Any:
    if value is None:
        return None
    if name in ("k_list", "defense"):
        if isinstance(value, str):
            value = [v.strip() for v in value.split(",") if v.strip()]
        if isinstance(value, (int,)):
            value = [value]
        conv = int if name == "k_list" else str
        try:
            return tuple(conv(v) for v in value)
        except (TypeError, ValueError):
            raise ConfigError(f"bad value for {name}: {value!r}") from None
    kind = FIELDS[name].type
    try:
        if "bool" in kind:
            if isinstance(value, str):
                if value.lower() in ("1", "true", "yes", "on"):
                    return True
                if value.lower() in ("0", "false", "no", "off"):
                    return False
                raise ValueError(value)
            return bool(value)
        if kind.startswith("int"):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if kind.startswith("float"):
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"bad value for {name}: {value!r}") from None
    return str(value)


def config_from_mapping(values: Mapping[str, Any], base: ExperimentConfig | None = None) -> ExperimentConfig:
    unknown = set(values) - set(FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    base = base or ExperimentConfig()
    updates = {k: _coerce(k, v) for k, v in values.items()}
    try:
        return dataclasses.replace(base, **updates)
    except TypeError as e:
        raise ConfigError(str(e)) from None


def load_config_file(path: str) -> dict[str, Any]:
    """Read a YAML (or JSON) config; a run manifest is accepted too."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    if "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    return data


def resolve_config(
    path: str | None, overrides: Mapping[str, Any] | None = None
) -> ExperimentConfig:
    cfg = ExperimentConfig()
    if path:
        cfg = config_from_mapping(load_config_file(path), cfg)
    if overrides:
        cfg = config_from_mapping({k: v for k, v in overrides.items() if v is not None}, cfg)
    return cfg

