"""Experiment runner: builds a world from a config and drives the online loop.

The learner sees queries and one-shot ``ask`` capabilities only. The true
answer ``w* . q`` is used here, on the experimenter's side, to score errors.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Iterator, Optional

import numpy as np

from . import hypercube as hcube
from .config import ExperimentConfig
from .errors import InvariantViolation, UsageError
from .geometry import Basis, project_coeffs
from .learner import OnlineBisection, StepOutcome
from .protocol import Database, Mechanism
from .querygen import QueryDistribution, make_subspace, sample_queries

CSV_HEADER = ("t", "error", "avg_error_so_far", "phase", "side_length", "oracle_called", "matched_dim")
CHUNK = 4096


@dataclass(slots=True)
class RunRecord:
    t: int
    error: float
    avg_error_so_far: float
    phase: int
    side_length: float
    oracle_called: int
    matched_dim: int

    def csv_row(self) -> str:
        return (f"{self.t},{self.error:.17g},{self.avg_error_so_far:.17g},{self.phase},"
                f"{self.side_length:.17g},{self.oracle_called},{self.matched_dim}\n")


@dataclass
class RunSummary:
    T: int
    avg_error: float
    final_side: float
    phases: int
    oracle_calls: int
    converged: bool
    converged_at: Optional[int]
    contained: bool
    w_star_coeffs: np.ndarray = field(repr=False)
    final_center: np.ndarray = field(repr=False)


@dataclass
class BatchReport:
    mean_abs_error: float
    bound: float
    bound_satisfied: bool
    final_side: float
    converged: bool
    eval_oracle_calls: int
    online: RunSummary = field(repr=False)


@dataclass
class ScalingReport:
    T_list: list[int]
    avg_errors: list[float]
    slope: float
    shrink_enabled: bool
    seeds: list[int]


class RunningMean:
    """Kahan-compensated running mean."""

    __slots__ = ("n", "_sum", "_c")

    def __init__(self):
        self.n = 0
        self._sum = 0.0
        self._c = 0.0

    def _add(self, x: float):
        y = x - self._c
        t = self._sum + y
        self._c = (t - self._sum) - y
        self._sum = t

    def add(self, x: float) -> float:
        self._add(x)
        self.n += 1
        return self._sum / self.n

    def add_block(self, xs: np.ndarray):
        """Add many values at once; only the final mean is observable."""
        self._add(math.fsum(xs.tolist()))
        self.n += len(xs)

    @property
    def mean(self) -> float:
        return self._sum / self.n if self.n else 0.0


class World:
    """Everything one seeded run needs. Random streams are independent children of ``cfg.seed``."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        ss_wstar, ss_sub, ss_query, ss_noise, ss_eval = np.random.SeedSequence(cfg.seed).spawn(5)
        if cfg.w_star_mode == "explicit":
            w_star = np.array(cfg.w_star_values, dtype=np.float64)
        else:
            w_star = np.random.default_rng(ss_wstar).random(cfg.D)
        self.db = Database(w_star)
        self.basis: Basis = make_subspace(cfg.D, cfg.d, np.random.default_rng(ss_sub))
        self.noise = cfg.noise_model()
        self.dist = QueryDistribution(
            self.basis, kind=cfg.query_kind, mixture_weight=cfg.mixture_weight,
            jitter_angle=cfg.jitter_angle, scale_range=(cfg.scale_lo, cfg.scale_hi),
        )
        self.query_rng = np.random.default_rng(ss_query)
        self.eval_rng = np.random.default_rng(ss_eval)
        self.mechanism = Mechanism(self.db, self.noise, np.random.default_rng(ss_noise))

    @property
    def w_star(self) -> np.ndarray:
        return self.db.w_star

    def query_chunks(self, total: int) -> Iterator[np.ndarray]:
        left = total
        while left > 0:
            n = min(CHUNK, left)
            yield sample_queries(self.dist, n, self.query_rng)
            left -= n

    def new_learner(self, *, shrink_enabled: bool = True) -> OnlineBisection:
        cfg = self.cfg
        return OnlineBisection(cfg.D, cfg.d, cfg.T, self.basis, self.noise, shrink_enabled=shrink_enabled)


def drive(world: World, learner: OnlineBisection, *,
          sink: Optional[Callable[[RunRecord], None]] = None,
          on_step: Optional[Callable[[OnlineBisection, StepOutcome], None]] = None,
          fast_tail: bool = True) -> RunSummary:
    """Feed ``T`` queries to ``learner``.

    Once the learner has converged its answers depend only on the frozen
    center, so with ``fast_tail`` the remaining queries are scored in bulk.
    """
    T = world.cfg.T
    w_star = world.w_star
    mech = world.mechanism
    mean = RunningMean()
    converged_at = None
    t = 0
    for chunk in world.query_chunks(T):
        i, n = 0, len(chunk)
        while i < n and not (fast_tail and learner.converged):
            q = chunk[i]
            i += 1
            t += 1
            phase, side = learner.phase, learner.side
            outcome = learner.step(q, mech.ask_for(q))
            err = abs(outcome.answer - float(np.dot(w_star, q)))
            avg = mean.add(err)
            if outcome.converged and converged_at is None:
                converged_at = t
            if sink is not None:
                called = outcome.oracle_bit is not None
                sink(RunRecord(t, err, avg, phase, side, int(called),
                               outcome.matched_dim if called else -1))
            if on_step is not None:
                on_step(learner, outcome)
        if i == n:
            continue
        tail = chunk[i:]
        if converged_at is None:
            converged_at = t + 1
        errs = np.abs(tail @ learner.hc.center - tail @ w_star)
        if sink is None:
            mean.add_block(errs)
            t += len(tail)
        else:
            phase, side = learner.phase, learner.side
            for err in errs.tolist():
                t += 1
                sink(RunRecord(t, err, mean.add(err), phase, side, 0, -1))
    if t != T:
        raise InvariantViolation(f"processed {t} queries, expected {T}")
    w_coeffs = project_coeffs(w_star, world.basis)
    return RunSummary(
        T=T, avg_error=mean.mean, final_side=learner.side, phases=learner.phase,
        oracle_calls=mech.calls, converged=learner.converged, converged_at=converged_at,
        contained=hcube.contains(learner.hc, w_coeffs),
        w_star_coeffs=w_coeffs, final_center=np.array(learner.hc.center_coeffs),
    )


def run_online(cfg: ExperimentConfig, *, sink=None, on_step=None, shrink_enabled: bool = True,
               fast_tail: bool = True) -> RunSummary:
    world = World(cfg)
    return drive(world, world.new_learner(shrink_enabled=shrink_enabled), sink=sink,
                 on_step=on_step, fast_tail=fast_tail)


def batch_bound(D: int, T: int) -> float:
    return math.sqrt(D) * math.log(T) / math.sqrt(T)


def run_batch(cfg: ExperimentConfig, *, sink=None) -> BatchReport:
    """Learn online for ``T`` queries, then score the frozen center on ``eval_M`` fresh queries."""
    world = World(cfg)
    learner = world.new_learner()
    summary = drive(world, learner, sink=sink)
    return evaluate_frozen(world, learner, summary)


def evaluate_frozen(world: World, learner: OnlineBisection, summary: RunSummary) -> BatchReport:
    """Score a finished learner's center on ``eval_M`` fresh queries without touching the oracle."""
    cfg = world.cfg
    calls_before = world.mechanism.calls
    w_T = learner.hc.center
    total = 0.0
    n = 0
    for start in range(0, cfg.eval_M, CHUNK):
        qs = sample_queries(world.dist, min(CHUNK, cfg.eval_M - start), world.eval_rng)
        total += math.fsum(np.abs(qs @ w_T - qs @ world.w_star).tolist())
        n += len(qs)
    mae = total / n
    bound = batch_bound(cfg.D, cfg.T)
    return BatchReport(
        mean_abs_error=mae, bound=bound, bound_satisfied=mae <= bound,
        final_side=summary.final_side, converged=summary.converged,
        eval_oracle_calls=world.mechanism.calls - calls_before, online=summary,
    )


def loglog_slope(T_list, values) -> float:
    x = np.log(np.asarray(T_list, dtype=np.float64))
    y = np.log(np.asarray(values, dtype=np.float64))
    return float(np.polyfit(x, y, 1)[0])


def run_scaling(cfg: ExperimentConfig, T_list: Iterable[int], *, shrink_enabled: bool = True,
                n_seeds: int = 1) -> ScalingReport:
    """Average error at each horizon, and the least-squares slope of ln(error) vs ln(T).

    Every horizon reuses the seeds ``cfg.seed .. cfg.seed + n_seeds - 1``; the
    error at a horizon is the mean over those seeds.
    """
    T_list = [int(T) for T in T_list]
    if len(T_list) < 3 or any(a >= b for a, b in zip(T_list, T_list[1:])):
        raise UsageError(f"need at least 3 strictly increasing horizons, got {T_list}")
    if n_seeds < 1:
        raise UsageError(f"n_seeds must be >= 1, got {n_seeds}")
    seeds = [cfg.seed + k for k in range(n_seeds)]
    avgs = []
    for T in T_list:
        runs = [run_online(cfg.with_(T=T, seed=s), shrink_enabled=shrink_enabled).avg_error
                for s in seeds]
        avgs.append(math.fsum(runs) / len(runs))
    return ScalingReport(T_list, avgs, loglog_slope(T_list, avgs), shrink_enabled, seeds)


class CsvSink:
    """Streams records to a text file with the fixed header."""

    def __init__(self, fh: io.TextIOBase):
        self.fh = fh
        fh.write(",".join(CSV_HEADER) + "\n")

    def __call__(self, rec: RunRecord):
        self.fh.write(rec.csv_row())


def write_run_csv(cfg: ExperimentConfig, path, **kw) -> RunSummary:
    with open(path, "w", newline="\n") as fh:
        return run_online(cfg, sink=CsvSink(fh), **kw)


def load_records(path, *, rtol: float = 1e-9) -> list[RunRecord]:
    """Read a run CSV and check ``avg_error_so_far`` against a fresh prefix mean."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise UsageError(f"unexpected CSV header {header}")
        recs = [RunRecord(int(r[0]), float(r[1]), float(r[2]), int(r[3]),
                          float(r[4]), int(r[5]), int(r[6])) for r in reader]
    errs = np.array([r.error for r in recs])
    prefix = np.cumsum(errs) / np.arange(1, len(errs) + 1)
    for rec, expect in zip(recs, prefix.tolist()):
        if not math.isclose(rec.avg_error_so_far, expect, rel_tol=rtol, abs_tol=1e-15):
            raise InvariantViolation(
                f"row t={rec.t}: avg_error_so_far {rec.avg_error_so_far!r} != prefix mean {expect!r}")
    return recs
