"""Small dense linear-algebra helpers for orthonormal frames.

A *frame* is a ``(p, d)`` float array with orthonormal columns.  One
dimensional frames are always carried as ``(p, 1)`` arrays; :func:`as_frame`
accepts a flat vector and reshapes it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInputError,
    InvalidInputError,
    NumericalFailureError,
    SharedSubspaceError,
)

__all__ = [
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "as_frame",
    "is_orthonormal",
    "orthonormalize",
    "orthogonal_complement",
    "complete_basis",
    "svd_small",
    "principal_angles",
    "projector",
    "frame_distance",
    "plane_distance",
]

# residual norm (relative to the input column) below which a column is dependent
RANK_TOL = 1e-12
# residual ratio below which a second Gram-Schmidt pass is applied
REORTH_RATIO = 1e-6


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances threaded through every module.

    Parameters
    ----------
    orth_tol : float
        Max-norm tolerance on ``F.T @ F - I`` for a matrix to count as a frame.
    arrival_tol : float
        Max-norm tolerance for reaching an endpoint frame or plane.
    angle_tol : float
        Tolerance on angles, in radians.
    """

    orth_tol: float = 1e-9
    arrival_tol: float = 1e-8
    angle_tol: float = 1e-6

    def __post_init__(self):
        for name in ("orth_tol", "arrival_tol", "angle_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be strictly positive, got {value!r}")


DEFAULT_TOLERANCES = Tolerances()


def _as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    if M.ndim != 2 or M.size == 0:
        raise InvalidInputError(f"{name} must be a non-empty 2-D array, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InvalidInputError(f"{name} has non-finite entries")
    return M


def as_frame(F, tol=None, name="frame"):
    """Validate ``F`` as a frame and return it as a ``(p, d)`` float array.

    Raises
    ------
    InvalidInputError
        If ``F`` has non-finite entries, ``p < d``, or its columns are not
        orthonormal within ``tol`` (default ``DEFAULT_TOLERANCES.orth_tol``).
    """
    tol = DEFAULT_TOLERANCES.orth_tol if tol is None else tol
    F = _as_matrix(F, name)
    p, d = F.shape
    if p < d:
        raise InvalidInputError(f"{name} has more columns ({d}) than rows ({p})")
    if not is_orthonormal(F, tol):
        err = np.max(np.abs(F.T @ F - np.eye(d)))
        raise InvalidInputError(f"{name} is not orthonormal (max |F'F - I| = {err:.3g})")
    return F


def is_orthonormal(F, tol=None):
    """Return True iff ``max |F.T @ F - I|`` is at most ``tol``."""
    tol = DEFAULT_TOLERANCES.orth_tol if tol is None else tol
    F = _as_matrix(F, "frame")
    d = F.shape[1]
    return bool(np.max(np.abs(F.T @ F - np.eye(d))) <= tol)


def _gram_schmidt_column(v, Q):
    """Remove the span of the columns of ``Q`` from ``v`` (modified GS).

    A second pass is made when cancellation was severe.
    """
    norm0 = np.linalg.norm(v)
    for k in range(Q.shape[1]):
        v = v - (Q[:, k] @ v) * Q[:, k]
    if np.linalg.norm(v) < REORTH_RATIO * norm0:
        for k in range(Q.shape[1]):
            v = v - (Q[:, k] @ v) * Q[:, k]
    return v, norm0


def orthonormalize(M):
    """Orthonormalize the columns of ``M`` by modified Gram-Schmidt.

    The first column of the result is the first column of ``M`` normalized,
    and every leading block of columns spans the same space as in ``M``.

    Raises
    ------
    DegenerateInputError
        If a column's residual falls below ``1e-12`` of its original norm.
    """
    M = _as_matrix(M)
    p, d = M.shape
    if d > p:
        raise DegenerateInputError(f"cannot orthonormalize {d} columns in {p} dimensions")
    Q = np.zeros((p, 0))
    for k in range(d):
        v, norm0 = _gram_schmidt_column(M[:, k].copy(), Q)
        r = np.linalg.norm(v)
        if norm0 == 0 or r < RANK_TOL * norm0:
            raise DegenerateInputError(f"column {k} is linearly dependent on the previous ones")
        Q = np.column_stack([Q, v / r])
    return Q


def orthogonal_complement(Fz, Fa, tol=None):
    """Orthonormal basis for the part of ``Fz`` orthogonal to ``Fa``.

    Raises
    ------
    SharedSubspaceError
        If some direction of ``Fz`` has no component outside ``span(Fa)``, so
        that ``(Fa, Fz)`` has rank below ``2d``.
    """
    Fa = as_frame(Fa, tol, "Fa")
    Fz = as_frame(Fz, tol, "Fz")
    if Fa.shape != Fz.shape:
        raise InvalidInputError(f"frame shapes differ: {Fa.shape} vs {Fz.shape}")
    Q = Fa
    for k in range(Fz.shape[1]):
        v, norm0 = _gram_schmidt_column(Fz[:, k].copy(), Q)
        r = np.linalg.norm(v)
        if r < RANK_TOL * norm0:
            raise SharedSubspaceError(
                f"column {k} of Fz lies in the span of Fa and the earlier columns"
            )
        Q = np.column_stack([Q, v / r])
    return Q[:, Fa.shape[1]:]


def complete_basis(Fa, Fz, ncols):
    """Orthonormal ``(p, ncols)`` basis starting with ``Fa`` and containing ``Fz``.

    Residual directions of ``Fz`` are added first; when ``(Fa, Fz)`` has lower
    rank than ``ncols`` the basis is padded with the standard basis vectors
    that have the largest residuals (lowest index on ties), so the result is
    deterministic.
    """
    p, d = Fa.shape
    if not d <= ncols <= p:
        raise InvalidInputError(f"ncols={ncols} must lie in [{d}, {p}]")
    Q = Fa.copy()
    for k in range(Fz.shape[1]):
        if Q.shape[1] == ncols:
            break
        v, norm0 = _gram_schmidt_column(Fz[:, k].copy(), Q)
        r = np.linalg.norm(v)
        if r >= RANK_TOL * max(norm0, 1.0):
            Q = np.column_stack([Q, v / r])
    while Q.shape[1] < ncols:
        resid = np.eye(p) - Q @ Q.T
        norms = np.linalg.norm(resid, axis=0)
        k = int(np.argmax(norms))
        v, _ = _gram_schmidt_column(np.eye(p)[:, k], Q)
        Q = np.column_stack([Q, v / np.linalg.norm(v)])
    Q[:, :d] = Fa
    return Q


def svd_small(M):
    """Thin SVD ``M = U @ diag(s) @ V.T`` with ``s`` non-increasing.

    Returns ``(U, s, V)``; note ``V`` rather than ``V.T``.
    """
    M = _as_matrix(M)
    try:
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError(f"SVD did not converge: {exc}") from exc
    return U, s, Vt.T


def principal_angles(Fa, Fz):
    """Principal angles between ``span(Fa)`` and ``span(Fz)``, ascending.

    Computed as ``arccos`` of the singular values of ``Fa.T @ Fz`` clipped to
    ``[-1, 1]``; opposite-signed frames spanning one plane give zeros.
    """
    Fa = _as_matrix(Fa, "Fa")
    Fz = _as_matrix(Fz, "Fz")
    if Fa.shape != Fz.shape:
        raise InvalidInputError(f"frame shapes differ: {Fa.shape} vs {Fz.shape}")
    _, s, _ = svd_small(Fa.T @ Fz)
    return np.sort(np.arccos(np.clip(s, -1.0, 1.0)))


def projector(F):
    """Orthogonal projector ``F @ F.T`` onto the span of a frame."""
    F = _as_matrix(F)
    return F @ F.T


def frame_distance(F, G):
    """Max-norm difference between two frames."""
    return float(np.max(np.abs(_as_matrix(F) - _as_matrix(G))))


def plane_distance(F, G):
    """Max-norm difference between the projectors of two frames."""
    return float(np.max(np.abs(projector(F) - projector(G))))
