"""Givens frame-to-frame interpolation for data tours."""

from .errors import (
    DataFormatError,
    DegenerateInputError,
    InvalidInputError,
    NumericalFailureError,
    SharedSubspaceError,
    SubspaceViolationError,
    TourError,
)
from .geodesic import GeodesicPath, geodesic_full_path
from .givens import (
    GivensSequence,
    InterpolationPath,
    calculate_angles,
    construct_moving_frame,
    construct_preframe,
    givens_full_path,
    interpolate_preframe,
    preprojection,
    row_rot,
    steps_for_speed,
)
from .indexes import get_index, holes_index, splines_index
from .linalg import DEFAULT_TOLERANCES, Tolerances, is_orthonormal, orthonormalize, principal_angles
from .tour import TourConfig, TourTrace, grand_tour, guided_tour, planned_tour, random_frame

__version__ = "0.1.0"
