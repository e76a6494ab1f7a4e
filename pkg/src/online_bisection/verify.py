"""Brute-force and Monte Carlo checkers for the supporting lemmas.

Each checker returns a :class:`LemmaCheckReport`; ``verify-lemmas`` runs the
standard grid and prints one line per report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import noise as noise_mod
from .config import ExperimentConfig
from .errors import UsageError
from .harness import run_online
from .hypercube import Hypercube
from .learner import ALPHA, angle_threshold, max_phases

SLACK_SE = 3.0


@dataclass
class LemmaCheckReport:
    lemma: str
    trials: int
    worst: float
    bound: float
    passed: bool
    params: dict = field(default_factory=dict)
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        ps = " ".join(f"{k}={v:.6g}" if isinstance(v, float) else f"{k}={v}"
                      for k, v in self.params.items())
        extra = f" ({self.detail})" if self.detail else ""
        return (f"[{status}] {self.lemma} {ps} trials={self.trials} "
                f"worst={self.worst:.6g} bound={self.bound:.6g}{extra}")


def brute_force_support(hc: Hypercube, q) -> float:
    """Maximum of ``y . q`` over all 2^d corners of the hypercube."""
    if hc.d > 20:
        raise UsageError(f"corner enumeration limited to d <= 20, got d={hc.d}")
    q = np.asarray(q, dtype=np.float64)
    sums = np.zeros(1)
    for i, e in enumerate(hc.basis.vectors):
        p = float(np.dot(e, q))
        sums = np.concatenate([sums + hc.lower[i] * p, sums + hc.upper[i] * p])
    return float(np.max(sums))


def chernoff_bound(m: int, dp: float) -> float:
    return math.exp(-m * dp * dp / 10.0)


def check_chernoff(m: int, p1: float, dp: float, trials: int,
                   rng: np.random.Generator) -> LemmaCheckReport:
    """Empirical binomial tails against exp(-m dp^2 / 10).

    Z ~ Bin(m, p1) should rarely reach ``m p1 + m dp / 2``; W ~ Bin(m, p1 + dp)
    should rarely fall below it.
    """
    if m < 1 or p1 < 0 or dp < 0 or p1 + dp > 1:
        raise UsageError(f"need m >= 1, p1 >= 0, dp >= 0, p1 + dp <= 1; got {m}, {p1}, {dp}")
    # rounding keeps e.g. 1000*0.3 + 1000*0.1 from landing a hair above 400
    cut = round(m * p1 + m * dp / 2.0, 9)
    z = rng.binomial(m, p1, size=trials)
    w = rng.binomial(m, p1 + dp, size=trials)
    upper_tail = float(np.mean(z >= cut))
    lower_tail = float(np.mean(w < cut))
    bound = chernoff_bound(m, dp)
    se = math.sqrt(bound * (1.0 - bound) / trials)
    worst = max(upper_tail, lower_tail)
    return LemmaCheckReport(
        "chernoff", trials, worst, bound, worst <= bound + SLACK_SE * se,
        {"m": m, "p1": p1, "dp": dp},
        f"P(Z>=cut)={upper_tail:.3g} P(W<cut)={lower_tail:.3g} slack={SLACK_SE * se:.3g}",
    )


def cut_epsilon(theta: float, d: int) -> float:
    return 8.0 * math.sin(theta / 2.0) * math.sqrt(d)


def _random_orthogonal(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((d, d))
    qm, r = np.linalg.qr(g)
    return qm * np.sign(np.diag(r))


def cut_extents(V: np.ndarray, z: np.ndarray, e: np.ndarray, beta: float) -> tuple[float, float]:
    """Width of ``e . y`` over the two pieces of the box ``{f V : f in [0,1]^d}`` cut by ``z``.

    The cut is at ``z . y = m + beta (M - m)``. Extremes of a linear functional
    over a box intersected with a halfspace sit at box corners or at points
    where a box edge crosses the hyperplane, so both sets are enumerated.
    """
    d = V.shape[0]
    a = V @ z
    b = V @ e
    corners = ((np.arange(2 ** d)[:, None] >> np.arange(d)) & 1).astype(np.float64)
    za = corners @ a
    eb = corners @ b
    lo, hi = float(np.sum(np.minimum(a, 0.0))), float(np.sum(np.maximum(a, 0.0)))
    cut = lo + beta * (hi - lo)

    left = [eb[za <= cut]]
    right = [eb[za >= cut]]
    for i in range(d):
        if a[i] == 0.0:
            continue
        base = corners[:, i] == 0.0
        t = (cut - za[base]) / a[i]
        ok = (t >= 0.0) & (t <= 1.0)
        pts = eb[base][ok] + t[ok] * b[i]
        left.append(pts)
        right.append(pts)
    left = np.concatenate(left)
    right = np.concatenate(right)
    width = lambda v: float(v.max() - v.min()) if v.size else 0.0
    return width(left), width(right)


def check_cut_lemma(d: int, L: float, theta: float, beta: float, trials: int,
                    rng: np.random.Generator) -> LemmaCheckReport:
    """Random frames and cuts; the widths along ``e`` must stay within ``L (beta + eps)``
    and ``L (1 - beta + eps)`` with ``eps = 8 sin(theta/2) sqrt(d)``."""
    if d > 10:
        raise UsageError(f"corner enumeration limited to d <= 10, got d={d}")
    if not 0.0 < theta < math.pi / 2 or not 0.0 < beta < 1.0:
        raise UsageError(f"need 0 < theta < pi/2 and 0 < beta < 1, got {theta}, {beta}")
    eps = cut_epsilon(theta, d)
    worst = -math.inf
    violations = 0
    for _ in range(trials):
        R = _random_orthogonal(d, rng)
        V = L * R
        e = R[0]
        if d == 1:
            z = e.copy()
        else:
            g = rng.standard_normal(d)
            g -= np.dot(g, e) * e
            g /= np.linalg.norm(g)
            gamma = theta * rng.random()
            z = math.cos(gamma) * e + math.sin(gamma) * g
        w_left, w_right = cut_extents(V, z, e, beta)
        excess = max(w_left / L - beta, w_right / L - (1.0 - beta))
        worst = max(worst, excess)
        if excess > eps + 1e-9:
            violations += 1
    return LemmaCheckReport(
        "cut", trials, worst, eps, violations == 0,
        {"d": d, "L": L, "theta": theta, "beta": beta},
        f"violations={violations}; worst is max excess width / L over beta or 1-beta",
    )


def check_ncrit_schedule(cfg: ExperimentConfig) -> LemmaCheckReport:
    """Replay a run and audit the per-phase quota, delta_p and phase count."""
    per_phase: dict[int, dict] = {}

    def record(learner, outcome):
        rec = per_phase.setdefault(learner.phase, {"n_crit": set(), "delta_p": set(), "side": set()})
        rec["n_crit"].add(learner.n_crit())
        rec["delta_p"].add(learner.delta_p)
        rec["side"].add(learner.side)

    summary = run_online(cfg, on_step=record)
    model = cfg.noise_model()
    L = 2.0 * math.sqrt(cfg.D)
    problems = []
    worst_dp_err = 0.0
    sides = []
    for phase in sorted(per_phase):
        rec = per_phase[phase]
        if len(rec["n_crit"]) != 1:
            problems.append(f"phase {phase}: n_crit took {len(rec['n_crit'])} values")
        (side,) = rec["side"]
        sides.append(side)
        (dp,) = rec["delta_p"]
        expect = noise_mod.delta_p(model, L * ALPHA ** phase, cfg.D)
        worst_dp_err = max(worst_dp_err, abs(dp - expect))
    if worst_dp_err > 1e-9:
        problems.append(f"delta_p off schedule by {worst_dp_err:.3g}")
    for a, b in zip(sides, sides[1:]):
        if abs(b / a - ALPHA) > 1e-9:
            problems.append(f"side ratio {b / a!r}")
            break
    bound = max_phases(cfg.D, cfg.d, cfg.T)
    if summary.phases > bound:
        problems.append(f"{summary.phases} phases exceeds {bound}")
    return LemmaCheckReport(
        "ncrit_schedule", 1, float(summary.phases), float(bound), not problems,
        {"D": cfg.D, "d": cfg.d, "T": cfg.T, "seed": cfg.seed},
        "; ".join(problems) or f"delta_p error {worst_dp_err:.3g}",
    )


CHERNOFF_GRID = [(m, dp, p1) for m in (100, 1000, 10_000)
                 for dp in (0.05, 0.1, 0.2, 0.5) for p1 in (0.1, 0.3)]


def cut_grid():
    for d in (1, 2, 4, 8):
        phi = angle_threshold(d)
        for theta in (phi, 2 * phi, 0.3):
            yield d, theta


def run_lemma_suite(*, seed: int = 0, chernoff_trials: int = 100_000,
                    cut_trials: int = 10_000, ncrit_cfg: ExperimentConfig | None = None) -> list[LemmaCheckReport]:
    rng = np.random.default_rng(seed)
    reports = [check_chernoff(m, p1, dp, chernoff_trials, rng) for m, dp, p1 in CHERNOFF_GRID]
    reports += [check_cut_lemma(d, 1.0, theta, 0.5, cut_trials, rng) for d, theta in cut_grid()]
    if ncrit_cfg is None:
        ncrit_cfg = ExperimentConfig(D=4, d=1, T=100_000, seed=seed, noise_u=1e-9)
    reports.append(check_ncrit_schedule(ncrit_cfg))
    return reports
