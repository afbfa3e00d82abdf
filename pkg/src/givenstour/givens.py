"""Frame-to-frame interpolation through a sequence of Givens rotations.

Both endpoint frames are expressed in a small orthonormal basis ``B`` of
their joint span (the *preprojection*).  In that basis the start frame is the
canonical frame ``E_d`` and the target is some ``(q, d)`` orthonormal matrix
``Wz``.  A sequence of plane rotations maps ``Wz`` back to ``E_d``; running
that sequence backwards with scaled, negated angles gives frames that move
from the start to the target at a constant angular rate, and land exactly on
the target frame rather than merely on its plane.

Row indices in rotation records are zero-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, NumericalFailureError, SharedSubspaceError, SubspaceViolationError
from .linalg import DEFAULT_TOLERANCES, as_frame, complete_basis, frame_distance, is_orthonormal

__all__ = [
    "Rotation",
    "GivensSequence",
    "GivensInfo",
    "InterpolationPath",
    "DEFAULT_DELTA",
    "rotation_count",
    "canonical_frame",
    "preprojection",
    "construct_preframe",
    "row_rot",
    "calculate_angles",
    "interpolate_preframe",
    "construct_moving_frame",
    "givens_info",
    "givens_full_path",
    "steps_for_speed",
]

DEFAULT_DELTA = 0.05
# pairs shorter than this have no defined direction; their angle is 0
NULL_PAIR = 1e-12


@dataclass(frozen=True)
class Rotation:
    i: int
    j: int
    theta: float


@dataclass(frozen=True)
class GivensSequence:
    """Ordered rotations mapping a preprojected target frame onto ``E_d``.

    Applying ``row_rot(W, r.i, r.j, r.theta)`` for each ``r`` in order takes
    ``Wz`` to ``E_d``.
    """

    rotations: tuple[Rotation, ...]
    nrows: int
    ncols: int

    def __len__(self):
        return len(self.rotations)

    def __iter__(self):
        return iter(self.rotations)

    @property
    def angles(self):
        return np.array([r.theta for r in self.rotations], dtype=float)

    @property
    def total_angle(self):
        """Euclidean norm of the rotation angles."""
        return float(np.linalg.norm(self.angles)) if self.rotations else 0.0


def rotation_count(nrows, ncols):
    """Number of rotations needed to reduce a ``(nrows, ncols)`` frame."""
    return sum(nrows - k for k in range(1, ncols + 1))


def canonical_frame(nrows, ncols):
    """The standard frame ``E_d`` as a ``(nrows, ncols)`` array."""
    return np.eye(nrows, ncols)


def preprojection(Fa, Fz, tol=DEFAULT_TOLERANCES):
    """Orthonormal basis ``B = (Fa, F_star)`` of the joint span of two frames.

    ``B`` has ``min(2d, p)`` columns.  When ``Fz`` shares directions with
    ``span(Fa)`` (for instance an in-plane rotation or reflection of ``Fa``)
    the missing columns are filled with deterministic complement directions,
    which keeps the rotation count fixed and lets reflections be reached by
    rotating through the extra dimensions.

    Raises
    ------
    SharedSubspaceError
        If ``Fz`` equals ``Fa`` within ``tol.orth_tol``.
    InvalidInputError
        On shape mismatch, non-orthonormal input, or ``p == d``.
    """
    Fa = as_frame(Fa, tol.orth_tol, "Fa")
    Fz = as_frame(Fz, tol.orth_tol, "Fz")
    if Fa.shape != Fz.shape:
        raise InvalidInputError(f"frame shapes differ: {Fa.shape} vs {Fz.shape}")
    p, d = Fa.shape
    if frame_distance(Fa, Fz) <= tol.orth_tol:
        raise SharedSubspaceError("start and target frames coincide")
    if p == d:
        raise InvalidInputError("frames with p == d leave no room for rotation")
    return complete_basis(Fa, Fz, min(2 * d, p))


def construct_preframe(F, B, tol=DEFAULT_TOLERANCES):
    """Coordinates ``W = B.T @ F`` of a frame in the preprojection basis.

    Raises
    ------
    SubspaceViolationError
        If ``F`` is not in ``span(B)`` within ``tol.orth_tol``.
    """
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F.reshape(-1, 1)
    B = np.asarray(B, dtype=float)
    if F.shape[0] != B.shape[0]:
        raise InvalidInputError(f"frame has {F.shape[0]} rows but basis has {B.shape[0]}")
    W = B.T @ F
    err = np.max(np.abs(F - B @ W))
    if err > tol.orth_tol:
        raise SubspaceViolationError(f"frame lies outside the basis span (residual {err:.3g})")
    return W


def row_rot(M, i, j, theta):
    """Rotate rows ``i`` and ``j`` of ``M`` by ``theta`` radians.

    Row ``i`` becomes ``cos*r_i - sin*r_j`` and row ``j`` becomes
    ``sin*r_i + cos*r_j``; all other rows are copied unchanged.
    """
    M = np.array(M, dtype=float)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    n = M.shape[0]
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise InvalidInputError(f"invalid row pair ({i}, {j}) for {n} rows")
    c, s = math.cos(theta), math.sin(theta)
    ri, rj = M[i].copy(), M[j].copy()
    M[i] = c * ri - s * rj
    M[j] = s * ri + c * rj
    return M


def _zeroing_angle(a, b):
    # rotation that sends (a, b) to (hypot(a, b), 0); reduced to (-pi, pi]
    if math.hypot(a, b) < NULL_PAIR:
        return 0.0
    theta = -math.atan2(b, a)
    if theta <= -math.pi:
        theta += 2 * math.pi
    return theta


def calculate_angles(Wa, Wz, tol=DEFAULT_TOLERANCES):
    """Givens rotations taking ``Wz`` onto the canonical frame ``Wa = E_d``.

    Column ``k`` is reduced by rotating row ``k`` against each later row in
    turn, so for ``(4, 2)`` frames the pairs are (0,1), (0,2), (0,3), (1,2),
    (1,3).  Each angle sends the current pair of entries to ``(r, 0)`` with
    ``r >= 0``.
    """
    Wa = np.asarray(Wa, dtype=float)
    Wz = np.asarray(Wz, dtype=float)
    if Wz.ndim == 1:
        Wz = Wz.reshape(-1, 1)
    if Wa.ndim == 1:
        Wa = Wa.reshape(-1, 1)
    if Wa.shape != Wz.shape:
        raise InvalidInputError(f"preframe shapes differ: {Wa.shape} vs {Wz.shape}")
    q, d = Wz.shape
    if not np.all(np.isfinite(Wz)) or not is_orthonormal(Wz, tol.orth_tol):
        raise InvalidInputError("target preframe is not orthonormal")
    if np.max(np.abs(Wa - canonical_frame(q, d))) > tol.orth_tol:
        raise InvalidInputError("start preframe must be the canonical frame E_d")

    W = Wz.copy()
    rotations = []
    for k in range(d):
        for j in range(k + 1, q):
            theta = _zeroing_angle(W[k, k], W[j, k])
            W = row_rot(W, k, j, theta)
            rotations.append(Rotation(k, j, theta))
    err = np.max(np.abs(W - canonical_frame(q, d)))
    if err > tol.arrival_tol:
        raise NumericalFailureError(f"rotations do not reduce the target frame (error {err:.3g})")
    return GivensSequence(tuple(rotations), q, d)


def interpolate_preframe(seq, fraction):
    """Preframe a ``fraction`` of the way from ``E_d`` to the target.

    Every angle is scaled by ``fraction`` and the rotations are undone in
    reverse order, so ``fraction=0`` gives ``E_d`` and ``fraction=1`` the
    target preframe.
    """
    if not 0.0 <= fraction <= 1.0:
        raise InvalidInputError(f"fraction must lie in [0, 1], got {fraction}")
    W = canonical_frame(seq.nrows, seq.ncols)
    for r in reversed(seq.rotations):
        W = row_rot(W, r.i, r.j, -fraction * r.theta)
    return W


def construct_moving_frame(W, B):
    """Map a preframe back to data space: ``B @ W``."""
    return np.asarray(B, dtype=float) @ np.asarray(W, dtype=float)


@dataclass(frozen=True)
class GivensInfo:
    """Everything needed to evaluate frames along one Givens path."""

    start: np.ndarray
    target: np.ndarray
    basis: np.ndarray | None
    sequence: GivensSequence

    @property
    def total_angle(self):
        return self.sequence.total_angle

    def frame_at(self, fraction):
        """Frame a ``fraction`` in ``[0, 1]`` of the way along the path."""
        if self.basis is None:
            return self.start.copy()
        if fraction == 0:
            return self.start.copy()
        return construct_moving_frame(interpolate_preframe(self.sequence, fraction), self.basis)


def givens_info(Fa, Fz, tol=DEFAULT_TOLERANCES):
    """Preprojection basis and rotation sequence for the path ``Fa -> Fz``.

    Coincident frames give an empty sequence and no basis.
    """
    Fa = as_frame(Fa, tol.orth_tol, "Fa")
    Fz = as_frame(Fz, tol.orth_tol, "Fz")
    if Fa.shape != Fz.shape:
        raise InvalidInputError(f"frame shapes differ: {Fa.shape} vs {Fz.shape}")
    try:
        B = preprojection(Fa, Fz, tol)
    except SharedSubspaceError:
        return GivensInfo(Fa, Fz, None, GivensSequence((), Fa.shape[1], Fa.shape[1]))
    Wa = construct_preframe(Fa, B, tol)
    Wz = construct_preframe(Fz, B, tol)
    seq = calculate_angles(Wa, Wz, tol)
    return GivensInfo(Fa, Fz, B, seq)


@dataclass
class InterpolationPath:
    """Explicit list of frames from a start frame to a target frame.

    ``frames`` has shape ``(nsteps + 1, p, d)``.  ``fractions[k]`` is the
    share of every rotation angle applied at frame ``k``.
    """

    frames: np.ndarray
    fractions: np.ndarray
    total_angle: float
    sequence: GivensSequence | None = None
    basis: np.ndarray | None = None
    method: str = field(default="givens")

    @property
    def nsteps(self):
        return len(self.frames) - 1

    @property
    def step_angle(self):
        return self.total_angle / self.nsteps if self.nsteps else 0.0

    def step_angles(self):
        """Norm of the angle increment between consecutive frames."""
        return np.diff(self.fractions) * self.total_angle


def givens_full_path(Fa, Fz, nsteps, tol=DEFAULT_TOLERANCES):
    """All frames of the Givens path from ``Fa`` to ``Fz`` in ``nsteps`` steps.

    Frame ``k`` applies the fraction ``k / nsteps`` of every rotation angle,
    so the preframe moves by the same angle at each step.  When the two frames
    coincide the path holds the single frame ``Fa``.
    """
    if int(nsteps) != nsteps or nsteps < 1:
        raise InvalidInputError(f"nsteps must be a positive integer, got {nsteps!r}")
    nsteps = int(nsteps)
    info = givens_info(Fa, Fz, tol)
    if info.basis is None:
        return InterpolationPath(info.start[None].copy(), np.zeros(1), 0.0, info.sequence)
    fractions = np.arange(nsteps + 1) / nsteps
    frames = np.stack([info.frame_at(f) for f in fractions])
    frames[0] = info.start
    return InterpolationPath(frames, fractions, info.total_angle, info.sequence, info.basis)


def steps_for_speed(seq, delta=DEFAULT_DELTA):
    """Number of steps to cover ``seq.total_angle`` at ``delta`` radians per step."""
    if not delta > 0:
        raise InvalidInputError(f"delta must be positive, got {delta}")
    return max(1, math.ceil(seq.total_angle / delta))
