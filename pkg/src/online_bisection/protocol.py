"""Database mechanism and binary threshold oracle.

The learner only ever sees single bits. Each query gets a
:class:`QueryTicket`; spending a ticket twice raises :class:`OneShotViolation`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import OneShotViolation, ProtocolError, UsageError
from .geometry import as_vector
from .noise import NoiseModel


@dataclass(frozen=True, eq=False)
class Database:
    w_star: np.ndarray

    def __post_init__(self):
        w = np.array(as_vector(self.w_star, "w_star"), copy=True)
        if np.any(w < 0.0) or np.any(w > 1.0):
            raise UsageError("database entries must lie in [0, 1]")
        w.setflags(write=False)
        object.__setattr__(self, "w_star", w)

    @property
    def D(self) -> int:
        return self.w_star.size


@dataclass(eq=False)
class QueryTicket:
    query: np.ndarray
    consumed: bool = field(default=False)

    def consume(self):
        if self.consumed:
            raise OneShotViolation("oracle already consulted for this query")
        self.consumed = True


def validate_query(q, D: int) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (D,):
        raise ProtocolError(f"query has shape {q.shape}, database needs ({D},)")
    lo, hi = q.min(), q.max()
    # NaN fails every comparison, so non-finite entries are rejected here too
    if not (lo >= 0.0 and hi <= 1.0):
        raise ProtocolError("query entries must lie in [0, 1]")
    if not hi > 0.0:
        raise ProtocolError("query must be nonzero")
    return q


def perturbed_answer(db: Database, q, model: NoiseModel, rng: np.random.Generator) -> float:
    q = validate_query(q, db.D)
    return float(np.dot(db.w_star, q)) + db.D * model.sample(rng)


def oracle(a_tilde: float, theta: float) -> int:
    return 1 if a_tilde > theta else 0


def ask(ticket: QueryTicket, db: Database, model: NoiseModel, theta: float,
        rng: np.random.Generator) -> int:
    ticket.consume()
    return oracle(perturbed_answer(db, ticket.query, model, rng), theta)


class Mechanism:
    """Holds the database, noise model and noise stream; counts oracle calls.

    ``ask_for(q)`` returns a one-shot callable ``theta -> bit`` bound to a
    fresh ticket, which is the only capability handed to the learner.
    """

    def __init__(self, db: Database, model: NoiseModel, rng: np.random.Generator):
        self._db = db
        self._model = model
        self._rng = rng
        self.calls = 0

    def ask(self, ticket: QueryTicket, theta: float) -> int:
        # ticket queries were validated when the ticket was issued
        ticket.consume()
        self.calls += 1
        db = self._db
        a_tilde = float(np.dot(db.w_star, ticket.query)) + db.D * self._model.sample(self._rng)
        return oracle(a_tilde, theta)

    def ask_for(self, q):
        ticket = QueryTicket(validate_query(q, self._db.D))

        def _ask(theta: float) -> int:
            return self.ask(ticket, theta)

        _ask.ticket = ticket
        return _ask
