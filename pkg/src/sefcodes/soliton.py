"""Degree distributions for LT encoding.

All pmfs are indexed so that ``probs[d - 1] == P(degree = d)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class SolitonParams:
    k: int
    c: float
    delta: float

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if not self.c > 0:
            raise ConfigError(f"c must be > 0, got {self.c}")
        if not 0 < self.delta < 1:
            raise ConfigError(f"delta must lie in (0, 1), got {self.delta}")


@dataclass(frozen=True, eq=False)
class DegreePmf:
    k: int
    probs: np.ndarray
    kind: str
    # robust soliton only
    c: float | None = None
    delta: float | None = None
    R: float | None = None
    beta: float | None = None
    spike: int | None = None
    # all-at-once only
    s: int | None = None
    _cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (self.k,):
            raise ConfigError(f"pmf needs {self.k} entries, got shape {probs.shape}")
        if (probs < 0).any() or abs(probs.sum() - 1.0) > 1e-12:
            raise ConfigError("pmf entries must be >= 0 and sum to 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        object.__setattr__(self, "_cdf", cdf)

    def pmf(self, d: int) -> float:
        return float(self.probs[d - 1]) if 1 <= d <= self.k else 0.0

    def mean(self) -> float:
        return float(np.dot(np.arange(1, self.k + 1), self.probs))

    def describe(self) -> dict:
        out = {"kind": self.kind, "k": self.k}
        if self.kind == "robust":
            out.update(c=self.c, delta=self.delta, R=self.R, beta=self.beta, spike=self.spike)
        elif self.kind == "all_at_once":
            out["s"] = self.s
        return out


def ideal_soliton(k: int) -> DegreePmf:
    return DegreePmf(k, _ideal(k), "ideal")


def _ideal(k: int) -> np.ndarray:
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    d = np.arange(1, k + 1, dtype=float)
    rho = np.empty(k)
    rho[0] = 1.0 / k
    rho[1:] = 1.0 / (d[1:] * (d[1:] - 1.0))
    return rho


def spike_position(k: int, R: float) -> int:
    """``k/R`` rounded half-up; the caller checks it lands in ``[1, k]``."""
    return int(math.floor(k / R + 0.5))


def robust_soliton(params: SolitonParams) -> DegreePmf:
    k, c, delta = params.k, params.c, params.delta
    R = c * math.sqrt(k) * math.log(k / delta)
    if R <= 0:
        raise ConfigError(f"R = {R} is not positive for k={k}, c={c}, delta={delta}")
    spike = spike_position(k, R)
    if not 1 <= spike <= k:
        raise ConfigError(f"spike degree round(k/R) = {spike} outside [1, {k}] (k={k}, c={c}, delta={delta})")
    rho = _ideal(k)
    theta = np.zeros(k)
    d = np.arange(1, spike, dtype=float)
    theta[: spike - 1] = R / (d * k)
    theta[spike - 1] = R / k * math.log(R / delta)
    if theta[spike - 1] < 0:
        raise ConfigError(f"R/delta < 1 gives a negative spike (k={k}, c={c}, delta={delta})")
    unnorm = rho + theta
    beta = float(unnorm.sum())
    return DegreePmf(k, unnorm / beta, "robust", c=c, delta=delta, R=R, beta=beta, spike=spike)


def all_at_once(k: int, s: int) -> DegreePmf:
    if k < 1:
        raise ConfigError(f"k must be >= 1, got {k}")
    if not 1 <= s <= k:
        raise ConfigError(f"s must lie in [1, {k}], got {s}")
    probs = np.zeros(k)
    probs[s - 1] = 1.0
    return DegreePmf(k, probs, "all_at_once", s=s)


def sample_degree(pmf: DegreePmf, rng: np.random.Generator) -> int:
    """Inverse-CDF draw of one degree."""
    u = rng.random()
    return int(np.searchsorted(pmf._cdf, u, side="right")) + 1


def sample_degrees(pmf: DegreePmf, rng: np.random.Generator, n: int) -> np.ndarray:
    u = rng.random(n)
    return np.searchsorted(pmf._cdf, u, side="right") + 1
