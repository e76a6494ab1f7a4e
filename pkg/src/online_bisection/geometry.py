"""Dense vector helpers: inner products, orthonormal bases, projections, angles.

Vectors are 1-d float64 numpy arrays. A :class:`Basis` stores its d vectors as
the rows of a read-only ``(d, D)`` array.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import DegenerateInputError, UsageError

ORTHO_TOL = 1e-10
RANK_TOL = 1e-8


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise UsageError(f"{name} must be a non-empty 1-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} has non-finite entries")
    return arr


def dot(a, b) -> float:
    a = as_vector(a, "a")
    b = as_vector(b, "b")
    if a.shape != b.shape:
        raise UsageError(f"dimension mismatch: {a.size} vs {b.size}")
    return float(np.dot(a, b))


class Basis:
    """Orthonormal system ``e^1..e^d`` in R^D.

    Construction validates orthonormality to ``ORTHO_TOL``; use
    :func:`gram_schmidt` to build one from arbitrary independent vectors.
    """

    __slots__ = ("vectors",)

    def __init__(self, vectors):
        vecs = np.array(vectors, dtype=np.float64, ndmin=2, copy=True)
        if vecs.ndim != 2:
            raise UsageError(f"basis must be a 2-d array of row vectors, got shape {vecs.shape}")
        d, D = vecs.shape
        if not 1 <= d <= D:
            raise UsageError(f"need 1 <= d <= D, got d={d}, D={D}")
        if not np.all(np.isfinite(vecs)):
            raise UsageError("basis has non-finite entries")
        gram = vecs @ vecs.T
        err = np.max(np.abs(gram - np.eye(d)))
        if err > ORTHO_TOL:
            raise DegenerateInputError(f"basis is not orthonormal (max Gram error {err:.3e})")
        vecs.setflags(write=False)
        self.vectors = vecs

    @property
    def d(self) -> int:
        return self.vectors.shape[0]

    @property
    def D(self) -> int:
        return self.vectors.shape[1]

    def __len__(self):
        return self.d

    def __getitem__(self, i) -> np.ndarray:
        return self.vectors[i]

    def __repr__(self):
        return f"Basis(d={self.d}, D={self.D})"


def gram_schmidt(raw: Sequence) -> Basis:
    """Orthonormalize ``raw`` with modified Gram-Schmidt, re-orthogonalizing once.

    Parameters
    ----------
    raw : sequence of vectors
        Linearly independent vectors of a common dimension D.

    Returns
    -------
    Basis
        Orthonormal vectors spanning the same subspace, in input order.

    Raises
    ------
    DegenerateInputError
        If vector ``k`` has residual norm <= 1e-8 after removing the span of
        vectors ``0..k-1``.
    """
    if len(raw) == 0:
        raise UsageError("gram_schmidt needs at least one vector")
    rows = [as_vector(v, f"raw[{k}]") for k, v in enumerate(raw)]
    D = rows[0].size
    for k, r in enumerate(rows):
        if r.size != D:
            raise UsageError(f"raw[{k}] has dimension {r.size}, expected {D}")
    out = []
    for k, v in enumerate(rows):
        w = v.copy()
        for _ in range(2):
            for e in out:
                w -= np.dot(e, w) * e
        norm = float(np.linalg.norm(w))
        if norm <= RANK_TOL:
            raise DegenerateInputError(
                f"raw[{k}] is linearly dependent on the preceding vectors "
                f"(residual norm {norm:.3e})"
            )
        out.append(w / norm)
    return Basis(np.vstack(out))


def project_coeffs(v, basis: Basis) -> np.ndarray:
    """Coefficients ``c_i = v . e^i`` of the orthogonal projection onto span(basis)."""
    v = as_vector(v, "v")
    if v.size != basis.D:
        raise UsageError(f"dimension mismatch: vector has {v.size}, basis lives in R^{basis.D}")
    return basis.vectors @ v


def reconstruct(coeffs, basis: Basis) -> np.ndarray:
    """Inverse of :func:`project_coeffs` on the span: ``sum_i c_i e^i``."""
    c = as_vector(coeffs, "coeffs")
    if c.size != basis.d:
        raise UsageError(f"expected {basis.d} coefficients, got {c.size}")
    return c @ basis.vectors


def cos_angle(q, e) -> float:
    q = as_vector(q, "q")
    e = as_vector(e, "e")
    if q.shape != e.shape:
        raise UsageError(f"dimension mismatch: {q.size} vs {e.size}")
    nq = math.sqrt(float(np.dot(q, q)))
    ne = math.sqrt(float(np.dot(e, e)))
    if nq == 0.0 or ne == 0.0:
        raise DegenerateInputError("cos_angle of a zero vector is undefined")
    c = float(np.dot(q, e)) / (nq * ne)
    return min(1.0, max(-1.0, c))
