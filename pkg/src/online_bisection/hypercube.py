"""The learner's hypothesis region: a product of equal-length coefficient
intervals over an orthonormal basis.

The region is ``{sum_i f_i e^i : lower_i <= f_i <= upper_i}``. Its support
function has a closed form (pick ``upper_i`` where ``e^i . q >= 0`` and
``lower_i`` otherwise), so no LP solver is ever needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvariantViolation, UsageError
from .geometry import Basis, as_vector

SIDE_TOL = 1e-9
CONTAINS_SLACK = 1e-12


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Hypercube:
    """Box of coefficient intervals. Equal side lengths are checked by :func:`side_length`,
    which the learner calls after every shrink; support queries accept any box."""

    lower: np.ndarray
    upper: np.ndarray
    basis: Basis

    def __post_init__(self):
        lo = _frozen(self.lower)
        hi = _frozen(self.upper)
        if lo.shape != (self.basis.d,) or hi.shape != (self.basis.d,):
            raise UsageError(
                f"need {self.basis.d} intervals, got lower {lo.shape} / upper {hi.shape}"
            )
        if np.any(lo > hi):
            raise InvariantViolation("interval with lower > upper")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def d(self) -> int:
        return self.basis.d

    @property
    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.lower.tolist(), self.upper.tolist()))

    @cached_property
    def center_coeffs(self) -> np.ndarray:
        return _frozen((self.lower + self.upper) / 2.0)

    @cached_property
    def center(self) -> np.ndarray:
        return _frozen(self.center_coeffs @ self.basis.vectors)

    def __repr__(self):
        return f"Hypercube(d={self.d}, intervals={self.intervals})"


def initial(D: int, d: int, basis: Basis) -> Hypercube:
    """Every coefficient interval starts as [-sqrt(D), sqrt(D)]."""
    if basis.D != D or basis.d != d:
        raise UsageError(f"basis is {basis.d}x{basis.D}, expected {d}x{D}")
    r = math.sqrt(D)
    return Hypercube(np.full(d, -r), np.full(d, r), basis)


def _basis_products(hc: Hypercube, q) -> np.ndarray:
    q = as_vector(q, "q")
    if q.size != hc.basis.D:
        raise UsageError(f"query has dimension {q.size}, expected {hc.basis.D}")
    return hc.basis.vectors @ q


def support_from_products(lower, upper, proj) -> float:
    """max_f sum_i f_i proj_i over the box, given ``proj_i = e^i . q``."""
    return float(np.dot(np.where(proj >= 0.0, upper, lower), proj))


def support(hc: Hypercube, q) -> float:
    """Maximum of ``y . q`` over the hypercube, by the sign-split closed form."""
    return support_from_products(hc.lower, hc.upper, _basis_products(hc, q))


def threshold_from_products(lower, upper, proj) -> tuple[float, float, float]:
    hi = support_from_products(lower, upper, proj)
    lo = -support_from_products(lower, upper, -proj)
    return lo, hi, (lo + hi) / 2.0


def threshold_midpoint(hc: Hypercube, q) -> tuple[float, float, float]:
    """Return ``(min, max, midpoint)`` of ``y . q`` over the hypercube.

    The oracle threshold is the midpoint of the attainable range, not
    ``(max(-q) + max(q)) / 2``.
    """
    return threshold_from_products(hc.lower, hc.upper, _basis_products(hc, q))


def shrink_interval(interval, keep_upper: bool, alpha: float) -> tuple[float, float]:
    x, y = float(interval[0]), float(interval[1])
    if x > y:
        raise UsageError(f"interval [{x}, {y}] is reversed")
    if not 0.0 < alpha < 1.0:
        raise UsageError(f"alpha must lie in (0, 1), got {alpha}")
    if keep_upper:
        return (y - alpha * (y - x), y)
    return (x, x + alpha * (y - x))


def shrink(hc: Hypercube, keep_upper, alpha: float) -> Hypercube:
    """Shrink every interval by ``alpha``, toward its upper end where ``keep_upper[i]``."""
    keep = list(keep_upper)
    if len(keep) != hc.d:
        raise UsageError(f"need {hc.d} keep_upper flags, got {len(keep)}")
    new = [shrink_interval(iv, k, alpha) for iv, k in zip(hc.intervals, keep)]
    lo, hi = zip(*new)
    return Hypercube(np.array(lo), np.array(hi), hc.basis)


def representative(hc: Hypercube) -> np.ndarray:
    return hc.center


def contains(hc: Hypercube, coeffs) -> bool:
    c = as_vector(coeffs, "coeffs")
    if c.size != hc.d:
        raise UsageError(f"expected {hc.d} coefficients, got {c.size}")
    return bool(np.all(c >= hc.lower - CONTAINS_SLACK) and np.all(c <= hc.upper + CONTAINS_SLACK))


def side_length(hc: Hypercube) -> float:
    lengths = hc.upper - hc.lower
    if np.max(np.abs(lengths - lengths[0])) > SIDE_TOL:
        raise InvariantViolation(f"unequal side lengths {lengths.tolist()}")
    return float(lengths[0])
