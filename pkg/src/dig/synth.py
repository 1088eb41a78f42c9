"""Synthetic state-space processes with known latent states.

Latent coordinates follow independent SDEs ``d theta_i = a_i(theta_i) dt + s_i dW_i``
(Euler-Maruyama). Observations are ``z = y(theta) + xi`` with a linear or
sinusoidal observation map and i.i.d. additive noise.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from dig.core_data import MultivariateSeries


def _from_dict(cls, data: dict, where: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown keys in {where}: {sorted(unknown)}")
    return cls(**data)


@dataclass
class DriftSpec:
    kind: str = "ou"  # ou | zero | regime-switch
    rate: float = 1.0
    mean: float = 0.0
    levels: Optional[list] = None
    dwell: int = 1

    def __post_init__(self):
        if self.kind not in ("ou", "zero", "regime-switch"):
            raise ValueError(f"drift.kind must be ou, zero or regime-switch, got {self.kind!r}")
        if self.kind == "regime-switch":
            if not self.levels:
                raise ValueError("drift.levels must be non-empty for regime-switch")
            if self.dwell < 1:
                raise ValueError("drift.dwell must be >= 1")

    def target(self, n: int) -> float:
        if self.kind == "regime-switch":
            return self.levels[(n // self.dwell) % len(self.levels)]
        return self.mean

    def __call__(self, theta: float, n: int) -> float:
        if self.kind == "zero":
            return 0.0
        return -self.rate * (theta - self.target(n))


@dataclass
class ObservationSpec:
    kind: str = "sinusoidal-lift"  # linear | sinusoidal-lift
    matrix: Optional[list] = None
    target_dim: int = 10
    frequencies: list = field(default_factory=lambda: [1.0])

    def __post_init__(self):
        if self.kind not in ("linear", "sinusoidal-lift"):
            raise ValueError(f"observation.kind must be linear or sinusoidal-lift, got {self.kind!r}")
        if self.kind == "sinusoidal-lift" and (not self.frequencies or self.target_dim < 1):
            raise ValueError("observation needs target_dim >= 1 and at least one frequency")


@dataclass
class NoiseSpec:
    kind: str = "gaussian"  # gaussian | uniform
    sigma: float = 0.0
    halfwidth: float = 0.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise ValueError(f"noise.kind must be gaussian or uniform, got {self.kind!r}")
        if self.sigma < 0 or self.halfwidth < 0:
            raise ValueError("noise scale must be nonnegative")


@dataclass
class SyntheticProcessSpec:
    latent_dim: int = 1
    drift: list = field(default_factory=lambda: [DriftSpec()])
    diffusion_scale: list = field(default_factory=lambda: [1.0])
    dt: float = 0.01
    steps: int = 1000
    theta0: Optional[list] = None
    observation: ObservationSpec = field(default_factory=ObservationSpec)
    noise: NoiseSpec = field(default_factory=NoiseSpec)
    seed: int = 0
    sample_rate_hz: Optional[float] = None

    def __post_init__(self):
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be >= 1")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.steps < 2:
            raise ValueError(f"steps must be >= 2, got {self.steps}")
        if isinstance(self.drift, DriftSpec):
            self.drift = [self.drift]
        self.drift = [_from_dict(DriftSpec, d, "drift") if isinstance(d, dict) else d for d in self.drift]
        if len(self.drift) == 1 and self.latent_dim > 1:
            self.drift = self.drift * self.latent_dim
        if len(self.drift) != self.latent_dim:
            raise ValueError("drift needs one entry per latent coordinate")
        scale = np.broadcast_to(np.asarray(self.diffusion_scale, dtype=float), (self.latent_dim,))
        if np.any(scale < 0):
            raise ValueError("diffusion_scale must be nonnegative")
        self.diffusion_scale = scale.tolist()
        if self.theta0 is None:
            self.theta0 = [d.target(0) for d in self.drift]
        self.theta0 = np.broadcast_to(np.asarray(self.theta0, dtype=float), (self.latent_dim,)).tolist()
        if isinstance(self.observation, dict):
            self.observation = _from_dict(ObservationSpec, self.observation, "observation")
        if isinstance(self.noise, dict):
            self.noise = _from_dict(NoiseSpec, self.noise, "noise")
        obs = self.observation
        if obs.kind == "sinusoidal-lift" and obs.target_dim < self.latent_dim:
            raise ValueError("observation.target_dim must be >= latent_dim")
        if obs.kind == "linear" and obs.matrix is not None:
            mat = np.asarray(obs.matrix, dtype=float)
            if mat.ndim != 2 or mat.shape[1] != self.latent_dim or mat.shape[0] < self.latent_dim:
                raise ValueError("observation.matrix must be target_dim x latent_dim with target_dim >= latent_dim")

    @classmethod
    def from_dict(cls, data: dict) -> "SyntheticProcessSpec":
        return _from_dict(cls, dict(data), "synthetic spec")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass
class SyntheticDataset:
    observed: MultivariateSeries
    latent: np.ndarray
    regime_labels: Optional[np.ndarray] = None


def _stream(seed: int, purpose: int) -> np.random.Generator:
    return np.random.default_rng([seed, purpose])


def simulate_latent(spec: SyntheticProcessSpec) -> np.ndarray:
    """Euler-Maruyama path, ``steps x latent_dim``, starting at ``theta0``."""
    d = spec.latent_dim
    rng = _stream(spec.seed, 0)
    scale = np.asarray(spec.diffusion_scale) * np.sqrt(spec.dt)
    g = rng.standard_normal((spec.steps - 1, d))
    theta = np.empty((spec.steps, d))
    theta[0] = spec.theta0
    for n in range(spec.steps - 1):
        cur = theta[n]
        drift = np.array([spec.drift[i](cur[i], n) for i in range(d)])
        if not np.all(np.isfinite(drift)):
            raise FloatingPointError(f"non-finite drift at step {n}")
        theta[n + 1] = cur + drift * spec.dt + scale * g[n]
    return theta


def lift_directions(spec: SyntheticProcessSpec) -> np.ndarray:
    """Random unit directions, one per sin/cos channel pair."""
    n_pairs = (spec.observation.target_dim + 1) // 2
    w = _stream(spec.seed, 1).standard_normal((n_pairs, spec.latent_dim))
    return w / np.linalg.norm(w, axis=1, keepdims=True)


def clean_observation(latent: np.ndarray, spec: SyntheticProcessSpec) -> np.ndarray:
    latent = np.asarray(latent, dtype=float)
    obs = spec.observation
    if obs.kind == "linear":
        mat = np.eye(spec.latent_dim) if obs.matrix is None else np.asarray(obs.matrix, dtype=float)
        return latent @ mat.T
    w = lift_directions(spec)
    freqs = np.asarray(obs.frequencies, dtype=float)
    out = np.empty((len(latent), obs.target_dim))
    for j in range(obs.target_dim):
        pair = j // 2
        phase = freqs[pair % len(freqs)] * (latent @ w[pair])
        out[:, j] = np.sin(phase) if j % 2 == 0 else np.cos(phase)
    return out


def observation_noise(shape, spec: SyntheticProcessSpec) -> np.ndarray:
    rng = _stream(spec.seed, 2)
    noise = spec.noise
    if noise.kind == "gaussian":
        return noise.sigma * rng.standard_normal(shape)
    return rng.uniform(-noise.halfwidth, noise.halfwidth, shape)


def observe(latent: np.ndarray, spec: SyntheticProcessSpec) -> MultivariateSeries:
    """``z = y(theta) + xi`` with i.i.d. noise per sample and channel."""
    latent = np.asarray(latent, dtype=float)
    if not np.all(np.isfinite(latent)):
        raise ValueError("latent path has non-finite entries")
    y = clean_observation(latent, spec)
    z = y + observation_noise(y.shape, spec)
    rate = spec.sample_rate_hz or 1.0 / spec.dt
    return MultivariateSeries(z, rate, name="synthetic")


def generate(spec: SyntheticProcessSpec) -> SyntheticDataset:
    latent = simulate_latent(spec)
    labels = None
    drift = spec.drift[0]
    if drift.kind == "regime-switch":
        labels = (np.arange(spec.steps) // drift.dwell) % len(drift.levels)
    observed = observe(latent, spec)
    observed.labels = labels
    return SyntheticDataset(observed, latent, labels)


def regime_spec(n_regimes: int = 3, dwell: int = 4000, **overrides) -> SyntheticProcessSpec:
    """Default spec for a regime-switching process: levels evenly spaced in [-1, 1]."""
    if n_regimes < 1:
        raise ValueError("n_regimes must be >= 1")
    if dwell < 1:
        raise ValueError("dwell must be >= 1")
    levels = np.linspace(-1.0, 1.0, n_regimes).tolist() if n_regimes > 1 else [0.0]
    rate = overrides.pop("rate", 5.0)
    base = dict(
        latent_dim=1,
        drift=[DriftSpec("regime-switch", rate=rate, levels=levels, dwell=dwell)],
        diffusion_scale=[0.3],
        dt=0.01,
        steps=n_regimes * dwell * 4,
        observation=ObservationSpec("sinusoidal-lift", target_dim=10, frequencies=[0.5, 1.0, 1.5, 2.0, 2.5]),
        noise=NoiseSpec("gaussian", sigma=0.3),
        seed=0,
    )
    base.update(overrides)
    return SyntheticProcessSpec(**base)


def make_regime_dataset(n_regimes: int = 3, dwell: int = 4000, **overrides) -> SyntheticDataset:
    """Piecewise-constant latent levels cycled every ``dwell`` steps, with OU jitter."""
    return generate(regime_spec(n_regimes, dwell, **overrides))
