"""Query subspaces and query streams.

Subspaces are built from disjoint coordinate blocks with nonnegative weights,
so any nonnegative coefficient combination is a nonnegative vector. Queries are
either near a basis direction (``basis_mixture``) or a uniform nonnegative
combination of the basis (``uniform_coeff``), scaled into [0, 1]^D.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, UsageError
from .geometry import Basis
from .learner import angle_threshold

KINDS = ("uniform_coeff", "basis_mixture")


def make_subspace(D: int, d: int, rng: np.random.Generator) -> Basis:
    """Random orthonormal basis with nonnegative entries on disjoint coordinate blocks."""
    if not 1 <= d <= D:
        raise UsageError(f"need 1 <= d <= D, got d={d}, D={D}")
    perm = rng.permutation(D)
    cuts = np.sort(rng.choice(np.arange(1, D), size=d - 1, replace=False)) if d > 1 else []
    weights = rng.uniform(0.2, 1.0, size=D)
    vecs = np.zeros((d, D))
    for i, block in enumerate(np.split(perm, cuts)):
        w = weights[block]
        vecs[i, block] = w / np.linalg.norm(w)
    return Basis(vecs)


@dataclass(frozen=True, eq=False)
class QueryDistribution:
    subspace: Basis
    kind: str = "basis_mixture"
    mixture_weight: float = 0.5
    jitter_angle: Optional[float] = None
    scale_range: tuple[float, float] = (0.5, 1.0)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown query kind {self.kind!r}; choose from {KINDS}")
        if not 0.0 <= self.mixture_weight <= 1.0:
            raise UsageError(f"mixture_weight must lie in [0, 1], got {self.mixture_weight}")
        if self.jitter_angle is None:
            object.__setattr__(self, "jitter_angle", angle_threshold(self.subspace.d))
        if not 0.0 <= self.jitter_angle < math.pi / 2:
            raise UsageError(f"jitter_angle must lie in [0, pi/2), got {self.jitter_angle}")
        lo, hi = self.scale_range
        if not 0.0 < lo <= hi <= 1.0:
            raise UsageError(f"scale_range must satisfy 0 < lo <= hi <= 1, got {self.scale_range}")
        object.__setattr__(self, "scale_range", (float(lo), float(hi)))


def sample_coeffs(dist: QueryDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` query coefficient rows over ``dist.subspace``, shape ``(n, d)``.

    The same number of variates is drawn whatever the branch outcomes, so a
    stream's position depends only on how many queries were drawn.
    """
    d = dist.subspace.d
    E = dist.subspace.vectors
    lo, hi = dist.scale_range
    pick_basis = rng.random(n) < (dist.mixture_weight if dist.kind == "basis_mixture" else 0.0)
    idx = rng.integers(d, size=n)
    gamma = dist.jitter_angle * rng.random(n)
    mix = 1.0 - rng.random((n, d))          # in (0, 1]
    scale = rng.uniform(lo, hi, size=n)

    # near-basis: rotate e^idx by gamma toward a nonnegative mix of the other directions
    rows = np.arange(n)
    other = mix.copy()
    other[rows, idx] = 0.0
    norms = np.linalg.norm(other, axis=1)
    if d == 1:
        gamma = np.zeros(n)
        norms = np.ones(n)
    near = other * (np.sin(gamma) / norms)[:, None]
    near[rows, idx] = np.cos(gamma)

    # uniform combination, rescaled so the largest entry of the query equals 1
    peak = np.max(mix @ E, axis=1)
    spread = mix / peak[:, None]

    coeffs = np.where(pick_basis[:, None], near, spread)
    return coeffs * scale[:, None]


def sample_queries(dist: QueryDistribution, n: int, rng: np.random.Generator) -> np.ndarray:
    q = sample_coeffs(dist, n, rng) @ dist.subspace.vectors
    # rounding can leave entries a few ulps outside [0, 1]
    return np.clip(q, 0.0, 1.0)


def sample_query(dist: QueryDistribution, rng: np.random.Generator) -> np.ndarray:
    return sample_queries(dist, 1, rng)[0]


def within_angle_fractions(queries: np.ndarray, basis: Basis, theta: float) -> np.ndarray:
    """Per basis vector, the fraction of normalized queries with cosine >= cos(theta)."""
    qn = queries / np.linalg.norm(queries, axis=1, keepdims=True)
    cos = np.clip(qn @ basis.vectors.T, -1.0, 1.0)
    return np.mean(cos >= math.cos(theta), axis=0)


def estimate_p(dist: QueryDistribution, theta: float, n: int, rng: np.random.Generator) -> float:
    """Monte Carlo estimate of the least-covered direction's within-angle probability."""
    if n < 1:
        raise UsageError(f"n must be >= 1, got {n}")
    return float(np.min(within_angle_fractions(sample_queries(dist, n, rng), dist.subspace, theta)))


def r_from_p(p_hat: float) -> float:
    if p_hat <= 0.0:
        raise DegenerateInputError("p is 0: no basis direction is ever matched")
    return 2.0 / p_hat ** 2
