"""Projection-pursuit indexes on projected data.

The oriented splines index treats the first projected coordinate as the
predictor and the second as the response, so its value changes when the
projection is rotated within its plane.  The holes index depends only on the
radii of the projected points and is rotation invariant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import BSpline
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import DegenerateInputError, InvalidInputError, NumericalFailureError

__all__ = [
    "IndexFunction",
    "fit_cubic_spline",
    "splines_index",
    "splines_index_symmetric",
    "holes_index",
    "INDEXES",
    "get_index",
    "project",
]

N_KNOTS = 10
RIDGE = 1e-4
MIN_POINTS = 10
# response variance at or below this (relative to the squared scale) counts as constant
VAR_EPS = 1e-24


def _check_projected(P, d=None):
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = P.reshape(-1, 1)
    if P.ndim != 2:
        raise InvalidInputError(f"projected data must be 2-D, got shape {P.shape}")
    if d is not None and P.shape[1] != d:
        raise InvalidInputError(f"expected {d} projected columns, got {P.shape[1]}")
    if not np.all(np.isfinite(P)):
        raise InvalidInputError("projected data has non-finite entries")
    return P


def _knots(x, n_knots):
    lo, hi = x.min(), x.max()
    interior = np.quantile(x, np.arange(1, n_knots + 1) / (n_knots + 1))
    interior = np.unique(interior[(interior > lo) & (interior < hi)])
    return np.concatenate([[lo] * 4, interior, [hi] * 4])


def fit_cubic_spline(x, y, n_knots=N_KNOTS, ridge=RIDGE):
    """Fitted values of a ridge-penalized least-squares cubic B-spline.

    Interior knots sit at ``n_knots`` equally spaced quantiles of ``x``.  The
    response is centred before fitting so the ridge term never shrinks the
    mean; the fit therefore always beats the constant model.

    Parameters
    ----------
    x, y : array_like, shape (n,)
        Predictor and response, ``n >= 10``.
    n_knots : int
        Number of interior knots before removing duplicates.
    ridge : float
        Penalty added to the diagonal of the normal equations.

    Returns
    -------
    ndarray, shape (n,)
    """
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise InvalidInputError(f"x and y differ in length: {x.size} vs {y.size}")
    if x.size < MIN_POINTS:
        raise InvalidInputError(f"need at least {MIN_POINTS} points, got {x.size}")
    if np.unique(x).size < 4:
        raise DegenerateInputError("spline predictor needs at least 4 distinct values")
    t = _knots(x, n_knots)
    basis = BSpline.design_matrix(x, t, 3).toarray()
    ymean = y.mean()
    gram = basis.T @ basis
    gram[np.diag_indices_from(gram)] += ridge
    try:
        coef = cho_solve(cho_factor(gram), basis.T @ (y - ymean))
    except LinAlgError as exc:
        raise NumericalFailureError(f"spline normal equations are singular: {exc}") from exc
    return basis @ coef + ymean


def _oriented_splines(x, y):
    vy = np.var(y)
    scale = max(np.max(np.abs(y)), 1.0)
    if vy <= VAR_EPS * scale**2:
        return 0.0
    if np.unique(x).size < 4:
        return 0.0
    resid = y - fit_cubic_spline(x, y)
    return float(np.clip(1.0 - np.var(resid) / vy, 0.0, 1.0))


def splines_index(P):
    """Share of the vertical variance explained by a spline in the horizontal.

    ``1 - Var(residual) / Var(y)`` for a cubic spline fit of column 2 on
    column 1, clipped to ``[0, 1]``.  Constant responses score 0.
    """
    P = _check_projected(P, 2)
    if P.shape[0] < MIN_POINTS:
        raise InvalidInputError(f"need at least {MIN_POINTS} points, got {P.shape[0]}")
    return _oriented_splines(P[:, 0], P[:, 1])


def splines_index_symmetric(P):
    """Larger of the splines index and its value with the axes exchanged."""
    P = _check_projected(P, 2)
    return max(splines_index(P), splines_index(P[:, ::-1]))


def holes_index(P):
    """Holes index, high when the projected centre is empty.

    ``(1 - mean(exp(-|z|^2 / 2))) / (1 - exp(-d / 2))`` clipped to ``[0, 1]``;
    the caller is expected to have sphered the data.
    """
    P = _check_projected(P)
    d = P.shape[1]
    if d not in (1, 2):
        raise InvalidInputError(f"holes index supports d in {{1, 2}}, got {d}")
    if P.shape[0] == 0:
        raise InvalidInputError("no projected points")
    r2 = np.sum(P**2, axis=1)
    value = (1.0 - np.mean(np.exp(-0.5 * r2))) / (1.0 - np.exp(-0.5 * d))
    return float(np.clip(value, 0.0, 1.0))


@dataclass(frozen=True)
class IndexFunction:
    """Named projection-pursuit index; larger values are more interesting."""

    name: str
    evaluate: Callable[[np.ndarray], float]
    rotation_invariant: bool

    def __call__(self, P):
        return self.evaluate(P)


INDEXES = {
    "splines2d": IndexFunction("splines2d", splines_index, False),
    "splines2d_sym": IndexFunction("splines2d_sym", splines_index_symmetric, False),
    "holes": IndexFunction("holes", holes_index, True),
}


def get_index(name):
    """Look up an index by name."""
    try:
        return INDEXES[name]
    except KeyError:
        raise InvalidInputError(f"unknown index {name!r}; choose from {sorted(INDEXES)}") from None


def project(data, frame):
    """Project an ``(n, p)`` data matrix with a ``(p, d)`` frame."""
    return np.asarray(data, dtype=float) @ np.asarray(frame, dtype=float)
