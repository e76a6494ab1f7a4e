"""OnlineBisection: answer each query from the center of a shrinking hypercube.

Per query the learner answers ``center . q``. When ``q`` lies within angle
``phi`` of a basis vector ``e^i`` it spends its single oracle call asking
whether the noisy answer exceeds the midpoint of the attainable range, and
records the bit against direction ``i``. Once every direction has
``n_crit`` observations all intervals shrink to 3/4 of their length, each
toward the end the votes favour.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import hypercube as hcube
from . import noise as noise_mod
from .errors import DegenerateInputError, UsageError
from .geometry import Basis
from .noise import NoiseModel

ALPHA = 0.75


def angle_threshold(d: int) -> float:
    """phi = 2 arcsin(1 / (64 sqrt(d)))."""
    return 2.0 * math.asin(1.0 / (64.0 * math.sqrt(d)))


def stopping_side(T: int, d: int) -> float:
    return math.log(T) / math.sqrt(T * d)


def critical_count(log_T: float, delta_p: float) -> float:
    """Per-direction observation quota 30 ln(T) / delta_p^2."""
    if delta_p <= 0.0:
        raise DegenerateInputError("delta_p is 0: noise puts no mass near zero at this side length")
    return 30.0 * log_T / delta_p ** 2


def max_phases(D: int, d: int, T: int) -> int:
    """Upper bound on the number of shrinks before the stopping side is reached."""
    h_T = math.sqrt(T) / math.log(T)
    return math.ceil(math.log(2.0 * math.sqrt(D * d) * h_T) / math.log(1.0 / ALPHA)) + 1


@dataclass(slots=True)
class StepOutcome:
    answer: float
    matched_dim: Optional[int] = None
    oracle_bit: Optional[int] = None
    shrank: bool = False
    converged: bool = False


class OnlineBisection:
    """Mutable learner state. One instance per run; ``step`` is not thread-safe."""

    def __init__(self, D: int, d: int, T: int, basis: Basis, noise: NoiseModel,
                 *, shrink_enabled: bool = True):
        if not 1 <= d <= D:
            raise UsageError(f"need 1 <= d <= D, got d={d}, D={D}")
        if T < 2:
            raise UsageError(f"T must be >= 2 so that log(T) > 0, got {T}")
        if basis.d != d or basis.D != D:
            raise UsageError(f"basis is {basis.d}x{basis.D}, expected {d}x{D}")
        self.D = D
        self.d = d
        self.T = T
        self.noise = noise
        self.alpha = ALPHA
        self.phi = angle_threshold(d)
        self.log_T = math.log(T)
        self.stop_side = stopping_side(T, d)
        self.shrink_enabled = shrink_enabled
        self.hc = hcube.initial(D, d, basis)
        self.n_plus = [0] * d
        self.n_minus = [0] * d
        self.phase = 0
        self._basis_norms = np.linalg.norm(basis.vectors, axis=1)
        self._refresh_phase()

    @property
    def basis(self) -> Basis:
        return self.hc.basis

    def _refresh_phase(self):
        # side, delta_p, p1 and n_crit only change when the hypercube shrinks
        self.side = hcube.side_length(self.hc)
        self.delta_p = noise_mod.delta_p(self.noise, self.side, self.D)
        self.p1 = noise_mod.p1(self.noise, self.side, self.D)
        self.converged = self.side <= self.stop_side
        self._n_crit = critical_count(self.log_T, self.delta_p) if self.delta_p > 0 else math.inf

    def n_crit(self) -> float:
        """30 ln(T) / delta_p^2 for the current side length."""
        return critical_count(self.log_T, noise_mod.delta_p(self.noise, hcube.side_length(self.hc), self.D))

    def is_converged(self) -> bool:
        return hcube.side_length(self.hc) <= self.stop_side

    def answer(self, q) -> float:
        return float(np.dot(self.hc.center, q))

    def match(self, q) -> Optional[int]:
        """Index of the basis vector most aligned with ``q`` if it is within ``phi``, else None."""
        q = np.asarray(q, dtype=np.float64)
        proj = self.hc.basis.vectors @ q
        return self._match(q, proj)

    def _match(self, q, proj) -> Optional[int]:
        nq = math.sqrt(float(np.dot(q, q)))
        cos = proj / (nq * self._basis_norms)
        i = int(np.argmax(cos))
        c = min(1.0, max(-1.0, float(cos[i])))
        return i if math.acos(c) <= self.phi else None

    def step(self, q, ask: Callable[[float], int]) -> StepOutcome:
        """Process one query. ``ask(theta)`` may be called at most once."""
        q = np.asarray(q, dtype=np.float64)
        out = StepOutcome(answer=self.answer(q))
        if self.converged:
            out.converged = True
            return out
        proj = self.hc.basis.vectors @ q
        i = self._match(q, proj)
        if i is None:
            return out
        _, _, theta = hcube.threshold_from_products(self.hc.lower, self.hc.upper, proj)
        bit = ask(theta)
        out.matched_dim = i
        out.oracle_bit = bit
        if bit:
            self.n_plus[i] += 1
        else:
            self.n_minus[i] += 1
        if self.shrink_enabled and self._ready():
            self.shrink()
            out.shrank = True
        return out

    def _ready(self) -> bool:
        nc = self._n_crit
        return all(a + b >= nc for a, b in zip(self.n_plus, self.n_minus))

    def keep_upper_flags(self) -> list[bool]:
        # p1 and delta_p come from the side length before anything shrinks
        p1, dp = self.p1, self.delta_p
        flags = []
        for plus, minus in zip(self.n_plus, self.n_minus):
            n = plus + minus
            flags.append(plus > n * p1 + n * dp / 2.0)
        return flags

    def shrink(self):
        self.hc = hcube.shrink(self.hc, self.keep_upper_flags(), self.alpha)
        self.n_plus = [0] * self.d
        self.n_minus = [0] * self.d
        self.phase += 1
        self._refresh_phase()

    def scalar_state(self) -> dict:
        """Every scalar the learner carries between queries, excluding the basis."""
        state = {
            "D": self.D, "d": self.d, "T": self.T, "alpha": self.alpha, "phi": self.phi,
            "log_T": self.log_T, "stop_side": self.stop_side, "phase": self.phase,
            "side": self.side, "delta_p": self.delta_p, "p1": self.p1,
            "n_crit": self._n_crit, "converged": self.converged,
            "shrink_enabled": self.shrink_enabled,
        }
        for i in range(self.d):
            state[f"lower[{i}]"] = float(self.hc.lower[i])
            state[f"upper[{i}]"] = float(self.hc.upper[i])
            state[f"n_plus[{i}]"] = self.n_plus[i]
            state[f"n_minus[{i}]"] = self.n_minus[i]
        return state

    def state_scalar_count(self) -> int:
        return len(self.scalar_state())


def new_learner(D: int, d: int, T: int, basis: Basis, noise: NoiseModel, **kw) -> OnlineBisection:
    return OnlineBisection(D, d, T, basis, noise, **kw)


def n_crit(state: OnlineBisection) -> float:
    return state.n_crit()


def is_converged(state: OnlineBisection) -> bool:
    return state.is_converged()


def step(state: OnlineBisection, q, ask: Callable[[float], int]) -> StepOutcome:
    return state.step(q, ask)


def shrink(state: OnlineBisection):
    state.shrink()
