"""Plane-to-plane geodesic interpolation.

The path rotates the start plane into the target plane through the principal
angles between them and never spins within the plane.  It reaches the target
*plane*, but the frame it arrives at is generally a rotation or reflection of
the requested target frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .linalg import DEFAULT_TOLERANCES, as_frame, svd_small

__all__ = ["GeodesicInfo", "GeodesicPath", "geodesic_info", "geodesic_full_path"]

# principal directions closer than this are treated as already aligned
ALIGNED = 1e-12


@dataclass(frozen=True)
class GeodesicInfo:
    """Principal-vector decomposition of one plane-to-plane geodesic.

    ``aligned_start = start @ alignment``; ``tangent`` holds the unit
    directions (orthogonal to the start plane) each aligned column turns
    towards.
    """

    start: np.ndarray
    target: np.ndarray
    alignment: np.ndarray
    aligned_start: np.ndarray
    aligned_target: np.ndarray
    tangent: np.ndarray
    principal_angles: np.ndarray

    @property
    def total_angle(self):
        return float(np.linalg.norm(self.principal_angles))

    def frame_at(self, t):
        """Frame at time ``t`` (``0`` start, ``1`` target plane; any real allowed)."""
        phi = t * self.principal_angles
        G = self.aligned_start * np.cos(phi) + self.tangent * np.sin(phi)
        return G @ self.alignment.T

    def frame_at_angle(self, s):
        """Frame after turning ``s`` radians (Euclidean norm of principal rotation)."""
        total = self.total_angle
        if total == 0:
            return self.start.copy()
        return self.frame_at(s / total)


def geodesic_info(Fa, Fz, tol=DEFAULT_TOLERANCES):
    """Principal alignment of ``Fa`` and ``Fz``.

    With repeated principal angles the alignment bases are not unique; any
    choice returned by the SVD gives a geodesic of the same length.
    """
    Fa = as_frame(Fa, tol.orth_tol, "Fa")
    Fz = as_frame(Fz, tol.orth_tol, "Fz")
    if Fa.shape != Fz.shape:
        raise InvalidInputError(f"frame shapes differ: {Fa.shape} vs {Fz.shape}")
    U, s, V = svd_small(Fa.T @ Fz)
    cos = np.clip(s, -1.0, 1.0)
    angles = np.arccos(cos)
    Ga = Fa @ U
    Gz = Fz @ V
    H = Gz - Ga * cos
    norms = np.linalg.norm(H, axis=0)
    moving = norms > ALIGNED
    H[:, moving] /= norms[moving]
    H[:, ~moving] = 0.0
    angles = np.where(moving, angles, 0.0)
    return GeodesicInfo(Fa, Fz, U, Ga, Gz, H, angles)


@dataclass
class GeodesicPath:
    """Frames along a geodesic between planes; ``frames`` is ``(nsteps + 1, p, d)``."""

    frames: np.ndarray
    fractions: np.ndarray
    principal_angles: np.ndarray
    aligned_start: np.ndarray
    aligned_target: np.ndarray
    method: str = "geodesic"

    @property
    def nsteps(self):
        return len(self.frames) - 1

    @property
    def total_angle(self):
        return float(np.linalg.norm(self.principal_angles))

    @property
    def step_angle(self):
        return self.total_angle / self.nsteps if self.nsteps else 0.0

    def step_angles(self):
        return np.diff(self.fractions) * self.total_angle


def geodesic_full_path(Fa, Fz, nsteps, tol=DEFAULT_TOLERANCES):
    """Frames along the geodesic from ``span(Fa)`` to ``span(Fz)``.

    ``frames[0]`` is ``Fa``; the last frame spans the target plane.  Frames
    spanning the same plane (including ``Fz = -Fa``) give a constant path.
    """
    if int(nsteps) != nsteps or nsteps < 1:
        raise InvalidInputError(f"nsteps must be a positive integer, got {nsteps!r}")
    nsteps = int(nsteps)
    info = geodesic_info(Fa, Fz, tol)
    fractions = np.arange(nsteps + 1) / nsteps
    frames = np.stack([info.frame_at(f) for f in fractions])
    frames[0] = info.start
    return GeodesicPath(frames, fractions, info.principal_angles, info.aligned_start, info.aligned_target)
