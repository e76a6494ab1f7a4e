"""Bounded, symmetric noise distributions with exact CDFs.

The mechanism adds ``D * E`` to every answer, where ``E`` is drawn from one
of these models. The learner knows the model and uses its CDF to compute
the probabilities ``delta_p`` and ``p1`` that drive the shrink decision.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import UsageError

KINDS = ("uniform", "triangular", "truncated_gaussian")


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "uniform"
    u: float = 1e-3
    sigma: Optional[float] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown noise kind {self.kind!r}; choose from {KINDS}")
        if not (math.isfinite(self.u) and self.u > 0):
            raise UsageError(f"noise half-width u must be positive, got {self.u}")
        if self.kind == "truncated_gaussian":
            if self.sigma is None or not (math.isfinite(self.sigma) and self.sigma > 0):
                raise UsageError(f"truncated_gaussian needs a positive sigma, got {self.sigma}")

    # mass of the untruncated normal inside [-u, u]
    @property
    def _gauss_mass(self) -> float:
        return math.erf(self.u / (self.sigma * math.sqrt(2.0)))

    def sample(self, rng: np.random.Generator, size=None):
        """Draw from the model; returns a float when ``size`` is None."""
        u = self.u
        if size is None and self.kind == "uniform":
            return min(u, max(-u, rng.uniform(-u, u)))
        if self.kind == "uniform":
            x = rng.uniform(-u, u, size)
        elif self.kind == "triangular":
            x = rng.triangular(-u, 0.0, u, size)
        else:
            lo = ndtr(-u / self.sigma)
            hi = ndtr(u / self.sigma)
            x = self.sigma * ndtri(lo + rng.random(size) * (hi - lo))
        x = np.clip(x, -u, u)
        return float(x) if size is None else x

    def cdf(self, x: float) -> float:
        u = self.u
        if x <= -u:
            return 0.0
        if x >= u:
            return 1.0
        if self.kind == "uniform":
            return (x + u) / (2.0 * u)
        if self.kind == "triangular":
            if x <= 0.0:
                return (x + u) ** 2 / (2.0 * u * u)
            return 1.0 - (u - x) ** 2 / (2.0 * u * u)
        # symmetric form keeps cdf(-x) = 1 - cdf(x) exact
        s = math.erf(x / (self.sigma * math.sqrt(2.0))) / self._gauss_mass
        return 0.5 + 0.5 * s

    def central_mass(self, a: float) -> float:
        """P(-a <= E <= a) for a >= 0, computed without cancellation."""
        if a <= 0.0:
            return 0.0
        u = self.u
        if a >= u:
            return 1.0
        if self.kind == "uniform":
            return a / u
        if self.kind == "triangular":
            return 1.0 - (u - a) ** 2 / (u * u)
        return math.erf(a / (self.sigma * math.sqrt(2.0))) / self._gauss_mass


def sample(model: NoiseModel, rng: np.random.Generator) -> float:
    return model.sample(rng)


def cdf(model: NoiseModel, x: float) -> float:
    return model.cdf(x)


def _half_width(side: float, D: int) -> float:
    if side < 0:
        raise UsageError(f"side length must be nonnegative, got {side}")
    if D < 1:
        raise UsageError(f"D must be >= 1, got {D}")
    return side / (8.0 * D)


def delta_p(model: NoiseModel, side: float, D: int) -> float:
    """P(-side/(8D) <= E <= side/(8D))."""
    return model.central_mass(_half_width(side, D))


def p1(model: NoiseModel, side: float, D: int) -> float:
    """P(E > side/(8D))."""
    return 1.0 - model.cdf(_half_width(side, D))
