import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from online_bisection.errors import OneShotViolation, ProtocolError, UsageError
from online_bisection.noise import NoiseModel
from online_bisection.protocol import (
    Database, Mechanism, QueryTicket, ask, oracle, perturbed_answer, validate_query,
)


def test_oracle_is_strict():
    assert oracle(0.7, 0.5) == 1
    assert oracle(0.5, 0.5) == 0
    assert oracle(-1.0, 0.0) == 0
    assert oracle(0.5 + 1e-15, 0.5) == 1


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_oracle_monotone(a, b, theta):
    lo, hi = sorted((a, b))
    assert oracle(lo, theta) <= oracle(hi, theta)
    assert oracle(a, max(lo, hi)) <= oracle(a, min(lo, hi))


def test_database_range():
    with pytest.raises(UsageError):
        Database([0.5, 1.5])
    with pytest.raises(UsageError):
        Database([-0.1])


@pytest.mark.parametrize("q", [[0.0, 0.0], [0.5, -0.1], [0.5, 1.2], [np.nan, 0.5], [0.5]])
def test_invalid_queries(q):
    with pytest.raises(ProtocolError):
        validate_query(q, 2)


def test_perturbed_answer_tiny_noise(rng):
    db = Database([0.2, 0.9, 0.4])
    q = np.array([1.0, 0.5, 0.25])
    a = perturbed_answer(db, q, NoiseModel("uniform", 1e-12), rng)
    assert a == pytest.approx(0.2 + 0.45 + 0.1, abs=3e-12)


def test_perturbed_answer_support_bound(rng):
    db = Database(np.ones(4))
    m = NoiseModel("uniform", 1.0)
    for _ in range(1000):
        assert 0.0 <= perturbed_answer(db, np.ones(4), m, rng) <= 8.0


@pytest.mark.parametrize("kind", ["uniform", "triangular"])
def test_noise_offset_within_Du(kind, rng):
    db = Database([0.3, 0.6, 0.1, 0.9, 0.5])
    q = np.array([0.2, 0.4, 1.0, 0.0, 0.7])
    m = NoiseModel(kind, 0.2)
    exact = float(np.dot(db.w_star, q))
    for _ in range(500):
        assert abs(perturbed_answer(db, q, m, rng) - exact) <= 5 * 0.2 + 1e-12


def test_perturbed_answer_mean_clt(rng):
    D, u = 4, 1.0
    db = Database([0.1, 0.5, 0.7, 0.3])
    q = np.array([0.9, 0.2, 0.6, 1.0])
    m = NoiseModel("uniform", u)
    n = 100_000
    mean = np.mean([perturbed_answer(db, q, m, rng) for _ in range(n)])
    tol = 3 * (D * u) / math.sqrt(3 * n) * 3
    assert abs(mean - float(np.dot(db.w_star, q))) <= tol


def test_ask_consumes_ticket(rng):
    db = Database([0.5, 0.5])
    m = NoiseModel("uniform", 1e-3)
    t = QueryTicket(np.array([1.0, 1.0]))
    bit = ask(t, db, m, 0.0, rng)
    assert bit == 1 and t.consumed
    with pytest.raises(OneShotViolation):
        ask(t, db, m, 0.0, rng)


def test_ask_deterministic_replay():
    db = Database([0.5, 0.5])
    m = NoiseModel("uniform", 0.5)
    q = np.array([1.0, 1.0])
    bits = [[ask(QueryTicket(q), db, m, 1.0, rng) for _ in range(200)]
            for rng in (np.random.default_rng(9), np.random.default_rng(9))]
    assert bits[0] == bits[1]


def test_mechanism_counts_and_one_shot(rng):
    mech = Mechanism(Database([0.5, 0.5]), NoiseModel("uniform", 1e-3), rng)
    a = mech.ask_for([1.0, 0.0])
    assert a(0.0) == 1
    with pytest.raises(OneShotViolation):
        a(0.0)
    assert mech.calls == 1
    with pytest.raises(ProtocolError):
        mech.ask_for([0.0, 0.0])
