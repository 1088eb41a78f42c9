"""Pipeline configuration: one structured file (YAML or JSON), unknown keys rejected."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import yaml

from dig.info_distances import FISHER_RAO

DM = "dm"


def parse_variant(value) -> Union[float, str]:
    """A gamma value in [-1, 1], ``'fisher-rao'`` or ``'dm'``."""
    if isinstance(value, str):
        v = value.strip().lower()
        if v in (FISHER_RAO, DM, "dm-baseline"):
            return FISHER_RAO if v == FISHER_RAO else DM
        if v.startswith("gamma"):
            v = v[5:].lstrip(":=")
        try:
            value = float(v)
        except ValueError:
            raise ValueError(f"unknown information distance {value!r}") from None
    value = float(value)
    if not -1.0 <= value <= 1.0:
        raise ValueError(f"gamma must lie in [-1, 1], got {value}")
    return value


def variant_name(v) -> str:
    return v if isinstance(v, str) else f"gamma={v:g}"


_NUMERIC = {
    "window_length": int, "window_stride": int, "n_bins": int, "l2": int, "rank_tol": float, "k": int,
    "alpha": float, "t_max": int, "log_floor": float, "m": int, "mds_tol": float, "mds_max_iter": int,
    "metrics_k": int, "permutations": int, "seed": int,
}


@dataclass
class PipelineConfig:
    input_path: Optional[str] = None
    input_format: str = "csv"
    output_dir: str = "dig-out"
    # optional preprocessing: {low_hz, high_hz, target_rate_hz}
    bandpass: Optional[dict] = None
    window_length: int = 3840
    window_stride: Optional[int] = None
    n_bins: int = 20
    l2: int = 10
    input_distance: str = "mahalanobis"
    rank_tol: float = 1e-10
    k: int = 5
    alpha: float = 10.0
    t: Union[int, str] = 10
    t_max: int = 64
    info_distance: Union[float, str] = 1.0
    log_floor: float = 1e-12
    m: int = 2
    mds_tol: float = 1e-6
    mds_max_iter: int = 500
    metrics_k: int = 5
    permutations: int = 999
    seed: int = 0
    # resume from a persisted input distance (plus its windows.csv)
    resume_distance: Optional[str] = None
    sweep_variants: list = field(default_factory=lambda: [-1.0, 0.0, 1.0, DM, FISHER_RAO])

    def __post_init__(self):
        self.validate()

    def validate(self) -> "PipelineConfig":
        errors = []

        def need(cond, msg):
            if not cond:
                errors.append(msg)

        if self.window_stride is None:
            self.window_stride = self.window_length
        # YAML 1.1 reads "1e-10" as a string, so numbers are coerced here
        for name, kind in _NUMERIC.items():
            value = getattr(self, name)
            try:
                setattr(self, name, kind(value))
            except (TypeError, ValueError):
                errors.append(f"{name} must be a number, got {value!r}")
        if errors:
            raise ValueError("invalid config: " + "; ".join(errors))
        need(self.input_format in ("csv", "binary"), "input_format must be csv or binary")
        need(self.window_length >= 1, "window_length must be >= 1")
        need(self.window_stride >= 1, "window_stride must be >= 1")
        need(self.n_bins >= 2, "n_bins must be >= 2")
        need(self.l2 >= 2, "l2 must be >= 2")
        need(self.input_distance in ("mahalanobis", "gaussian-geodesic"),
             "input_distance must be mahalanobis or gaussian-geodesic")
        need(self.rank_tol > 0, "rank_tol must be positive")
        need(self.k >= 1, "k must be >= 1")
        need(self.alpha >= 1, "alpha must be >= 1")
        if self.t != "auto":
            try:
                self.t = int(self.t)
            except (TypeError, ValueError):
                self.t = None
            need(self.t is not None and self.t >= 1, "t must be 'auto' or a positive integer")
        need(self.t_max >= 3, "t_max must be >= 3")
        try:
            self.info_distance = parse_variant(self.info_distance)
        except ValueError as exc:
            errors.append(f"info_distance: {exc}")
        try:
            self.sweep_variants = [parse_variant(v) for v in self.sweep_variants]
        except ValueError as exc:
            errors.append(f"sweep_variants: {exc}")
        need(0 < self.log_floor <= 1e-3, "log_floor must lie in (0, 1e-3]")
        need(self.m >= 1, "m must be >= 1")
        need(self.mds_tol > 0, "mds_tol must be positive")
        need(self.mds_max_iter >= 1, "mds_max_iter must be >= 1")
        need(self.metrics_k >= 1, "metrics_k must be >= 1")
        need(self.permutations >= 99, "permutations must be >= 99")
        if self.bandpass is not None:
            unknown = set(self.bandpass) - {"low_hz", "high_hz", "target_rate_hz"}
            need(not unknown, f"unknown bandpass keys: {sorted(unknown)}")
            need({"low_hz", "high_hz", "target_rate_hz"} <= set(self.bandpass),
                 "bandpass needs low_hz, high_hz and target_rate_hz")
        if errors:
            raise ValueError("invalid config: " + "; ".join(errors))
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path, overrides: Optional[dict] = None) -> "PipelineConfig":
        data = load_structured(path) if path else {}
        data.update(overrides or {})
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dump(self, path) -> Path:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return Path(path)


def load_structured(path) -> dict:
    """YAML or JSON mapping from a file."""
    data = yaml.safe_load(Path(path).read_text())
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"{path} must contain a mapping")
    return data
