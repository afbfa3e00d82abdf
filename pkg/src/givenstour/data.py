"""Datasets, preprocessing, synthetic generators and file formats.

File formats
------------
data CSV
    UTF-8, header row of unique column names, one numeric row per
    observation.  Cells that are empty or one of ``NA``, ``NaN``, ``null``
    count as missing and are rejected.
frame CSV
    A ``p`` by ``d`` numeric matrix, one row per line, no header.
path CSV
    Long format with header ``step,row,col,value``; zero-based indices,
    rows ordered by step, then row, then column.
path JSON
    An array of ``nsteps + 1`` matrices, each a list of ``p`` rows of
    ``d`` numbers.
geometry CSV
    Header ``label,kind,step,x,y,z``; ``kind`` is ``path`` or
    ``background``.

All numbers are written with 17 significant digits so that reading a file
back reproduces the in-memory doubles exactly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataFormatError, DegenerateInputError, InvalidInputError

__all__ = [
    "Dataset",
    "PcaResult",
    "load_csv",
    "write_csv",
    "standardize",
    "pca",
    "generate_sine",
    "generate_sine_in_noise",
    "generate_two_factor",
    "read_frame",
    "write_frame",
    "export_path",
    "read_path",
    "export_trace",
    "projection_geometry",
    "background_samples",
    "export_projection_geometry",
    "TORUS_MAJOR",
    "TORUS_MINOR",
]

MISSING = {"", "na", "nan", "null"}
PATH_HEADER = ["step", "row", "col", "value"]
GEOMETRY_HEADER = ["label", "kind", "step", "x", "y", "z"]
TRACE_HEADER = ["step_id", "target_id", "event", "index_value"]
TORUS_MAJOR = 2.0
TORUS_MINOR = 1.0

# bundled sine generator shape
SINE_PERIODS = 1.75
SINE_AMPLITUDE = 0.65


def fmt(value):
    """Format a float with 17 significant digits."""
    return format(float(value), ".17g")


@dataclass
class Dataset:
    values: np.ndarray
    column_names: list[str]

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.column_names = [str(c) for c in self.column_names]
        if self.values.ndim != 2:
            raise InvalidInputError(f"dataset values must be 2-D, got shape {self.values.shape}")
        if self.values.shape[1] != len(self.column_names):
            raise InvalidInputError(
                f"{self.values.shape[1]} columns but {len(self.column_names)} names"
            )
        if len(set(self.column_names)) != len(self.column_names):
            raise InvalidInputError("column names must be unique")
        if self.values.shape[0] < 2:
            raise InvalidInputError("a dataset needs at least 2 rows")
        bad = np.argwhere(~np.isfinite(self.values))
        if bad.size:
            r, c = bad[0]
            raise DataFormatError("non-finite value", row=int(r) + 1, column=self.column_names[c])

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]


@dataclass
class PcaResult:
    rotation: np.ndarray
    variances: np.ndarray
    scores: np.ndarray
    cumulative_proportion: np.ndarray
    column_names: list[str]


def load_csv(path, negate=()):
    """Read a numeric CSV with a header row.

    Parameters
    ----------
    path : str or Path
    negate : iterable of str
        Column names whose sign is flipped on ingestion.

    Raises
    ------
    DataFormatError
        Listing every missing cell, or locating the first non-numeric one.
        ``row`` counts data rows from 1.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise DataFormatError(f"cannot read file: {exc.strerror}", path=path) from exc
    rows = [r for r in rows if r]
    if not rows:
        raise DataFormatError("empty file", path=path)
    header = [h.strip() for h in rows[0]]
    if any(h == "" for h in header):
        raise DataFormatError("header has an empty column name", path=path, row=0)
    values = np.empty((len(rows) - 1, len(header)))
    missing = []
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != len(header):
            raise DataFormatError(
                f"expected {len(header)} fields, found {len(row)}", path=path, row=r
            )
        for c, cell in enumerate(row):
            text = cell.strip()
            if text.lower() in MISSING:
                missing.append((r, header[c]))
                continue
            try:
                values[r - 1, c] = float(text)
            except ValueError:
                raise DataFormatError(
                    f"non-numeric value {text!r}", path=path, row=r, column=header[c]
                ) from None
    if missing:
        cells = ", ".join(f"(row {r}, column {c!r})" for r, c in missing[:10])
        more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
        raise DataFormatError(f"missing values at {cells}{more}", path=path)
    unknown = set(negate) - set(header)
    if unknown:
        raise InvalidInputError(f"cannot negate unknown columns {sorted(unknown)}")
    for name in negate:
        values[:, header.index(name)] *= -1
    return Dataset(values, header)


def write_csv(dataset, path):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(dataset.column_names)
        for row in dataset.values:
            w.writerow([fmt(v) for v in row])


def standardize(dataset):
    """Centre every column and scale it to unit sample standard deviation."""
    X = dataset.values
    sd = X.std(axis=0, ddof=1)
    for name, s in zip(dataset.column_names, sd):
        if not s > 0:
            raise DegenerateInputError(f"column {name!r} has zero variance")
    Z = (X - X.mean(axis=0)) / sd
    # second pass removes the residual mean left by rounding
    Z = Z - Z.mean(axis=0)
    return Dataset(Z, list(dataset.column_names))


def pca(dataset):
    """Principal components from the SVD of the centred data.

    Each component's sign is fixed so its largest-magnitude loading is
    positive.  Variances use the ``n - 1`` denominator.
    """
    X = dataset.values - dataset.values.mean(axis=0)
    n, p = X.shape
    _, s, Vt = np.linalg.svd(X, full_matrices=True)
    rotation = Vt.T
    variances = np.zeros(p)
    variances[: s.size] = s**2 / (n - 1)
    for k in range(p):
        col = rotation[:, k]
        if col[np.argmax(np.abs(col))] < 0:
            rotation[:, k] = -col
    scores = X @ rotation
    total = variances.sum()
    cumulative = np.cumsum(variances) / total if total > 0 else np.ones(p)
    return PcaResult(rotation, variances, scores, cumulative, [f"PC{k + 1}" for k in range(p)])


def generate_sine(n=300, noise_sd=0.05, seed=0):
    """Noisy sine curve, centred.

    ``x`` is uniform on ``[-1, 1]`` and ``y = 0.65 * (sin(1.75 * pi * x) + e)``
    with ``e ~ N(0, noise_sd^2)``, so the curve covers 1.75 periods.
    """
    if n < 10:
        raise InvalidInputError(f"n must be at least 10, got {n}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, n)
    y = SINE_AMPLITUDE * (np.sin(SINE_PERIODS * np.pi * x) + rng.normal(0.0, noise_sd, n))
    X = np.column_stack([x, y])
    return Dataset(X - X.mean(axis=0), ["x", "y"])


def generate_sine_in_noise(n=300, noise_sd=0.05, seed=0):
    """Four columns: two independent standard normals, then a sine pair.

    The sine pair comes from :func:`generate_sine` and is standardized, so
    every column has unit variance and only columns 3 and 4 carry structure.
    """
    rng = np.random.default_rng(seed)
    noise = rng.normal(size=(n, 2))
    sine = standardize(generate_sine(n, noise_sd, int(rng.integers(2**32)))).values
    return Dataset(np.column_stack([noise, sine]), ["noise1", "noise2", "sine_x", "sine_y"])


def generate_two_factor(n=152, p=6, noise_sd=0.05, seed=0):
    """Stand-in for a panel of co-moving series driven by two latent factors.

    A time-like factor ``t`` and a curved second factor ``t^2 - mean`` are
    mixed through random loadings and small Gaussian noise is added, giving
    a strong non-linear relation between the first two principal components.
    """
    rng = np.random.default_rng(seed)
    t = np.linspace(-1.0, 1.0, n)
    f2 = t**2 - np.mean(t**2)
    factors = np.column_stack([t / t.std(), f2 / f2.std()])
    loadings = rng.normal(size=(p, 2))
    X = factors @ loadings.T + rng.normal(0.0, noise_sd, (n, p))
    return Dataset(X, [f"V{k + 1}" for k in range(p)])


def read_frame(path):
    """Read a headerless CSV matrix.

    The matrix is returned as read; orthonormality is checked by the caller.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read file: {exc.strerror}", path=path) from exc
    rows = [r for r in csv.reader(text.splitlines()) if r]
    if not rows:
        raise DataFormatError("empty frame file", path=path)
    try:
        M = np.array([[float(c) for c in r] for r in rows])
    except ValueError:
        raise DataFormatError("frame file must contain only numbers", path=path) from None
    if M.ndim != 2:
        raise DataFormatError("frame rows have unequal lengths", path=path)
    if not np.all(np.isfinite(M)):
        raise DataFormatError("frame has non-finite entries", path=path)
    return M


def write_frame(path, F):
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F.reshape(-1, 1)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in F:
            w.writerow([fmt(v) for v in row])


def _frames_of(path):
    frames = getattr(path, "frames", path)
    frames = np.asarray(frames, dtype=float)
    if frames.ndim != 3:
        raise InvalidInputError(f"path frames must be (nsteps+1, p, d), got shape {frames.shape}")
    return frames


def _infer_format(file, format):
    if format is not None:
        fmt_ = format.lower()
    else:
        fmt_ = Path(file).suffix.lstrip(".").lower() or "csv"
    if fmt_ not in ("csv", "json"):
        raise InvalidInputError(f"unsupported format {fmt_!r}; use csv or json")
    return fmt_


def export_path(path, file, format=None):
    """Write the frames of an interpolation path as long CSV or JSON."""
    frames = _frames_of(path)
    file = Path(file)
    kind = _infer_format(file, format)
    with file.open("w", newline="", encoding="utf-8") as fh:
        if kind == "csv":
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(PATH_HEADER)
            for step, F in enumerate(frames):
                for r, row in enumerate(F):
                    for c, v in enumerate(row):
                        w.writerow([step, r, c, fmt(v)])
        else:
            body = ",\n".join(
                "[" + ",".join("[" + ",".join(fmt(v) for v in row) + "]" for row in F) + "]"
                for F in frames
            )
            fh.write("[\n" + body + "\n]\n")
    return file


def read_path(file, format=None):
    """Read frames written by :func:`export_path`; returns ``(nsteps + 1, p, d)``."""
    file = Path(file)
    kind = _infer_format(file, format)
    try:
        text = file.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read file: {exc.strerror}", path=file) from exc
    if kind == "json":
        try:
            frames = np.array(json.loads(text), dtype=float)
        except (ValueError, TypeError) as exc:
            raise DataFormatError(f"invalid path JSON: {exc}", path=file) from None
        if frames.ndim != 3:
            raise DataFormatError("path JSON must be an array of equally sized matrices", path=file)
        return frames
    rows = list(csv.reader(text.splitlines()))
    if not rows or rows[0] != PATH_HEADER:
        raise DataFormatError(f"path CSV header must be {','.join(PATH_HEADER)}", path=file, row=0)
    records = []
    for r, row in enumerate(rows[1:], start=1):
        if len(row) != 4:
            raise DataFormatError("expected 4 fields", path=file, row=r)
        try:
            records.append((int(row[0]), int(row[1]), int(row[2]), float(row[3])))
        except ValueError:
            raise DataFormatError("malformed record", path=file, row=r) from None
    if not records:
        raise DataFormatError("path CSV has no records", path=file)
    idx = np.array([rec[:3] for rec in records])
    shape = tuple(idx.max(axis=0) + 1)
    if idx.min() < 0 or len(records) != math.prod(shape):
        raise DataFormatError("path CSV does not describe a complete array of frames", path=file)
    frames = np.full(shape, np.nan)
    for s, r, c, v in records:
        frames[s, r, c] = v
    if np.isnan(frames).any():
        raise DataFormatError("path CSV has duplicate or missing entries", path=file)
    return frames


def export_trace(trace, file):
    """Write a tour trace as CSV ``step_id,target_id,event,index_value``.

    A missing index value is written as an empty field.
    """
    with Path(file).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for rec in trace.records:
            value = "" if rec.index_value is None else fmt(rec.index_value)
            w.writerow([rec.step_id, rec.target_id, rec.event, value])
    return Path(file)


def _torus_point(F):
    a, b = F[:, 0], F[:, 1]
    u = math.atan2(a[1], a[0])
    ref = np.array([0.0, 0.0, 1.0]) - a[2] * a
    if np.linalg.norm(ref) < 1e-8:
        ref = np.array([1.0, 0.0, 0.0]) - a[0] * a
    ref /= np.linalg.norm(ref)
    other = np.cross(a, ref)
    v = math.atan2(b @ other, b @ ref)
    return _torus(u, v)


def _torus(u, v):
    ring = TORUS_MAJOR + TORUS_MINOR * np.cos(v)
    return np.column_stack(
        [ring * np.cos(u), ring * np.sin(u), TORUS_MINOR * np.sin(v) * np.ones_like(ring)]
    )


def projection_geometry(frames):
    """Points in 3-space representing 3-D frames.

    One-dimensional frames map to their unit vector on the sphere.  A 2-frame
    ``(a, b)`` maps to the torus with radii 2 and 1 at angles ``u`` (azimuth
    of ``a``) and ``v`` (angle of ``b`` inside the plane orthogonal to ``a``,
    measured from the projection of the z axis).
    """
    frames = _frames_of(frames)
    _, p, d = frames.shape
    if p != 3 or d not in (1, 2):
        raise InvalidInputError(f"geometry view needs p = 3 and d in {{1, 2}}, got p={p}, d={d}")
    if d == 1:
        return frames[:, :, 0].copy()
    return np.vstack([_torus_point(F) for F in frames])


def background_samples(d, m, seed=0):
    """``m`` random points on the unit sphere (``d = 1``) or the torus (``d = 2``)."""
    rng = np.random.default_rng(seed)
    if d == 1:
        g = rng.normal(size=(m, 3))
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    if d == 2:
        u = rng.uniform(-np.pi, np.pi, m)
        v = rng.uniform(-np.pi, np.pi, m)
        return _torus(u, v)
    raise InvalidInputError(f"geometry view needs d in {{1, 2}}, got {d}")


def export_projection_geometry(paths, file, n_background=500, seed=0):
    """Write path points and background surface samples as geometry CSV.

    ``paths`` is a single path (labelled ``path``) or a mapping from labels to
    paths; all must share ``p = 3`` and one ``d``.
    """
    if not isinstance(paths, dict):
        paths = {"path": paths}
    ds = {_frames_of(p).shape[2] for p in paths.values()}
    if len(ds) != 1:
        raise InvalidInputError("all paths must have the same projection dimension")
    (d,) = ds
    with Path(file).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(GEOMETRY_HEADER)
        for label, path in paths.items():
            for step, pt in enumerate(projection_geometry(path)):
                w.writerow([label, "path", step, *(fmt(v) for v in pt)])
        for k, pt in enumerate(background_samples(d, n_background, seed)):
            w.writerow(["background", "background", k, *(fmt(v) for v in pt)])
    return Path(file)
