import math

import numpy as np
import pytest

from online_bisection.config import ExperimentConfig
from online_bisection.errors import InvariantViolation, UsageError
from online_bisection.harness import (
    CSV_HEADER, RunningMean, batch_bound, load_records, loglog_slope, run_batch, run_online,
    run_scaling, write_run_csv,
)

SMALL = ExperimentConfig(D=4, d=2, T=3000, seed=5)


def collect(cfg, **kw):
    rows = []
    summary = run_online(cfg, sink=rows.append, **kw)
    return rows, summary


def test_short_run_bookkeeping():
    cfg = ExperimentConfig(D=3, d=1, T=10, seed=1, noise_u=1e-9)
    rows, summary = collect(cfg)
    assert [r.t for r in rows] == list(range(1, 11))
    errs = [r.error for r in rows]
    for k, r in enumerate(rows, start=1):
        assert r.avg_error_so_far == pytest.approx(math.fsum(errs[:k]) / k, rel=1e-15)
    assert summary.avg_error == rows[-1].avg_error_so_far


def test_oracle_calls_match_records():
    rows, summary = collect(SMALL)
    assert summary.oracle_calls == sum(r.oracle_called for r in rows)
    assert all((r.matched_dim >= 0) == bool(r.oracle_called) for r in rows)


def test_fast_tail_matches_full_stepping():
    cfg = ExperimentConfig(D=4, d=1, T=20_000, seed=2)
    fast_rows, fast = collect(cfg)
    slow_rows, slow = collect(cfg, fast_tail=False)
    assert fast.converged and fast.converged_at < cfg.T
    assert fast.oracle_calls == slow.oracle_calls
    assert fast.converged_at == slow.converged_at
    np.testing.assert_allclose([r.error for r in fast_rows], [r.error for r in slow_rows],
                               rtol=0, atol=1e-15)
    assert fast.avg_error == pytest.approx(slow.avg_error, rel=1e-12)
    np.testing.assert_array_equal(fast.final_center, slow.final_center)


def test_sink_and_bulk_modes_agree():
    cfg = ExperimentConfig(D=4, d=1, T=20_000, seed=2)
    _, with_rows = collect(cfg)
    bulk = run_online(cfg)
    assert bulk.avg_error == pytest.approx(with_rows.avg_error, rel=1e-12)
    assert bulk.phases == with_rows.phases and bulk.contained == with_rows.contained


def test_csv_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_run_csv(SMALL, a)
    write_run_csv(SMALL, b)
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.startswith(",".join(CSV_HEADER) + "\n")
    assert "\r" not in text


def test_csv_reload_checks_prefix_means(tmp_path):
    path = tmp_path / "run.csv"
    write_run_csv(SMALL, path)
    recs = load_records(path)
    assert len(recs) == SMALL.T
    lines = path.read_text().splitlines()
    fields = lines[5].split(",")
    fields[2] = repr(float(fields[2]) * 1.01)
    lines[5] = ",".join(fields)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(InvariantViolation):
        load_records(path)


def test_side_length_column_follows_schedule(tmp_path):
    rows, summary = collect(ExperimentConfig(D=4, d=2, T=60_000, seed=3))
    sides = sorted({(r.phase, r.side_length) for r in rows})
    assert len(sides) == summary.phases + 1
    for phase, side in sides:
        assert side == pytest.approx(4.0 * 0.75 ** phase, abs=1e-9)


def test_batch_zero_error_at_center():
    cfg = ExperimentConfig(D=4, d=2, T=2, w_star_mode="explicit", w_star_values=(0.0,) * 4,
                           noise_u=1e-9, eval_M=500)
    rep = run_batch(cfg)
    assert rep.mean_abs_error == 0.0
    assert rep.eval_oracle_calls == 0


def test_batch_converged_meets_bound():
    cfg = ExperimentConfig(D=4, d=2, T=200_000, seed=4, eval_M=10_000)
    rep = run_batch(cfg)
    assert rep.converged
    assert rep.bound == batch_bound(4, 200_000)
    assert rep.bound_satisfied
    assert rep.eval_oracle_calls == 0


def test_batch_unconverged_is_reported():
    rep = run_batch(ExperimentConfig(T=500, seed=1, eval_M=100))
    assert not rep.converged
    assert rep.final_side == 4.0
    assert rep.bound == pytest.approx(2 * math.log(500) / math.sqrt(500))
    assert rep.bound_satisfied == (rep.mean_abs_error <= rep.bound)


def test_scaling_ablation_is_flat_and_reproducible():
    cfg = ExperimentConfig(seed=8)
    a = run_scaling(cfg, [2000, 4000, 8000], shrink_enabled=False)
    b = run_scaling(cfg, [2000, 4000, 8000], shrink_enabled=False)
    assert a == b
    assert abs(a.slope) <= 0.1


def test_scaling_validates_horizons():
    with pytest.raises(UsageError):
        run_scaling(ExperimentConfig(), [100, 1000])
    with pytest.raises(UsageError):
        run_scaling(ExperimentConfig(), [100, 1000, 1000])


def test_loglog_slope():
    T = [10, 100, 1000]
    assert loglog_slope(T, [1 / math.sqrt(t) for t in T]) == pytest.approx(-0.5)


def test_running_mean_compensated():
    m = RunningMean()
    for _ in range(1_000_000):
        m.add(0.1)
    assert m.mean == pytest.approx(0.1, rel=1e-15)
