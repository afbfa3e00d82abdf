"""Target selection and tour paths: grand, planned and guided tours.

A tour alternates between choosing a target frame and interpolating to it.
Every frame shown is logged in a :class:`TourTrace` together with the index
value (for guided tours) and the kind of event that produced it.

Guided search keeps the index value of the last accepted target.  New
targets must beat both that value and the index of the frame actually
reached; with geodesic interpolation the reached frame can be an in-plane
rotation of the target with a lower value, and the trace keeps both numbers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateInputError, InvalidInputError
from .geodesic import geodesic_full_path, geodesic_info
from .givens import DEFAULT_DELTA, givens_full_path, givens_info
from .indexes import project
from .linalg import DEFAULT_TOLERANCES, Tolerances, as_frame, orthonormalize

__all__ = [
    "TourConfig",
    "TraceRecord",
    "TourTrace",
    "Proposal",
    "random_frame",
    "interpolation_path",
    "grand_tour",
    "planned_tour",
    "search_better",
    "search_geodesic_dir",
    "guided_tour",
]

INTERPOLATORS = ("givens", "geodesic")
SEARCHES = ("grand", "geodesic_search", "better", "planned")


@dataclass
class TourConfig:
    """Settings for a tour.

    ``search`` picks targets: ``grand`` (random frames), ``planned`` (an
    explicit list), ``better`` (simulated annealing over a shrinking
    neighbourhood) or ``geodesic_search`` (best probe direction followed by a
    line search).
    """

    interpolator: str = "givens"
    search: str = "better"
    delta: float = DEFAULT_DELTA
    max_targets: int = 30
    seed: int = 0
    cooling: float = 0.9
    n_candidates: int = 100
    initial_radius: float = 1.0
    n_dirs: int = 10
    max_exhausted: int = 3
    workers: int = 1
    tol: Tolerances = field(default_factory=Tolerances)

    def __post_init__(self):
        if self.interpolator not in INTERPOLATORS:
            raise InvalidInputError(f"interpolator must be one of {INTERPOLATORS}")
        if self.search not in SEARCHES:
            raise InvalidInputError(f"search must be one of {SEARCHES}")
        if not self.delta > 0:
            raise InvalidInputError("delta must be positive")
        if not 0 < self.cooling < 1:
            raise InvalidInputError("cooling must lie in (0, 1)")
        if self.n_candidates < 1:
            raise InvalidInputError("n_candidates must be at least 1")
        if self.n_dirs < 2:
            raise InvalidInputError("n_dirs must be at least 2")
        if not self.initial_radius > 0:
            raise InvalidInputError("initial_radius must be positive")
        if self.max_targets < 0:
            raise InvalidInputError("max_targets must be non-negative")


@dataclass
class TraceRecord:
    step_id: int
    target_id: int
    frame: np.ndarray
    index_value: Optional[float]
    event: str
    step_angle: float = 0.0


@dataclass
class TourTrace:
    records: list[TraceRecord] = field(default_factory=list)
    n_exhausted: int = 0

    def add(self, *args, **kwargs):
        self.records.append(TraceRecord(*args, **kwargs))

    def events(self, event):
        return [r for r in self.records if r.event == event]

    @property
    def path_records(self):
        return self.events("interpolation")

    def frames(self):
        """Every displayed frame, in order, as ``(n, p, d)``."""
        return np.stack([r.frame for r in self.path_records])

    @property
    def final_frame(self):
        return self.path_records[-1].frame

    @property
    def final_index(self):
        return self.path_records[-1].index_value

    @property
    def n_targets(self):
        return len(self.events("target_accepted"))

    def accepted_values(self):
        return np.array([r.index_value for r in self.events("target_accepted")], dtype=float)

    def reached_values(self):
        """Index at the last frame of each target's interpolation, by target."""
        last = {}
        for r in self.path_records:
            if r.target_id > 0:
                last[r.target_id] = r.index_value
        return np.array([last[k] for k in sorted(last)], dtype=float)


@dataclass(frozen=True)
class Proposal:
    frame: np.ndarray
    index_value: float


def random_frame(p, d, rng):
    """Haar-distributed random ``(p, d)`` frame."""
    if not p >= d >= 1:
        raise InvalidInputError(f"need p >= d >= 1, got p={p}, d={d}")
    while True:
        try:
            return orthonormalize(rng.standard_normal((p, d)))
        except DegenerateInputError:
            continue


def interpolation_path(method, Fa, Fz, delta=DEFAULT_DELTA, tol=DEFAULT_TOLERANCES):
    """Path from ``Fa`` to ``Fz`` with about ``delta`` radians per step."""
    if method == "givens":
        info = givens_info(Fa, Fz, tol)
        total = info.total_angle
        if total == 0:
            return givens_full_path(Fa, Fa, 1, tol)
        return givens_full_path(Fa, Fz, max(1, math.ceil(total / delta)), tol)
    if method == "geodesic":
        total = geodesic_info(Fa, Fz, tol).total_angle
        return geodesic_full_path(Fa, Fz, max(1, math.ceil(total / delta)), tol)
    raise InvalidInputError(f"unknown interpolator {method!r}")


def _evaluate(index, data, frame):
    return float(index(project(data, frame)))


def _record_path(trace, path, target_id, step_id, index, data):
    angles = path.step_angles()
    for k in range(1, len(path.frames)):
        step_id += 1
        F = path.frames[k]
        value = None if index is None else _evaluate(index, data, F)
        trace.add(step_id, target_id, F, value, "interpolation", float(angles[k - 1]))
    return step_id


def _run_targets(config, start, targets, data=None, index=None):
    tol = config.tol
    trace = TourTrace()
    current = start
    value = None if index is None else _evaluate(index, data, current)
    trace.add(0, 0, current, value, "interpolation")
    step_id = 0
    for target_id, target in enumerate(targets, start=1):
        target = as_frame(target, tol.orth_tol, "target")
        tval = None if index is None else _evaluate(index, data, target)
        trace.add(step_id, target_id, target, tval, "target_proposed")
        trace.add(step_id, target_id, target, tval, "target_accepted")
        path = interpolation_path(config.interpolator, current, target, config.delta, tol)
        step_id = _record_path(trace, path, target_id, step_id, index, data)
        current = path.frames[-1]
    return trace


def grand_tour(config, p, d, data=None, index=None, start=None):
    """Tour through ``config.max_targets`` random target frames.

    When ``data`` and ``index`` are given, the index is logged at each frame.
    """
    rng = np.random.default_rng(config.seed)
    start = random_frame(p, d, rng) if start is None else as_frame(start, config.tol.orth_tol)
    targets = (random_frame(p, d, rng) for _ in range(config.max_targets))
    return _run_targets(config, start, targets, data, index)


def planned_tour(config, frames, data=None, index=None):
    """Tour visiting ``frames[1:]`` in order, starting at ``frames[0]``."""
    frames = [as_frame(F, config.tol.orth_tol) for F in frames]
    if not frames:
        raise InvalidInputError("a planned tour needs at least one frame")
    return _run_targets(config, frames[0], frames[1:], data, index)


def _neighbour(current, rng, radius, tol):
    p, d = current.shape
    target = random_frame(p, d, rng)
    info = givens_info(current, target, tol)
    if info.total_angle == 0:
        return current.copy()
    return info.frame_at(min(1.0, radius / info.total_angle))


def search_better(current, index, data, rng, radius, n_candidates, threshold=None,
                  tol=DEFAULT_TOLERANCES, workers=1):
    """Random search in a Givens neighbourhood of ``current``.

    Each candidate is a random frame pulled back along the Givens path from
    ``current`` so that its preframe rotation angle is ``radius`` (or the
    whole path, if shorter).  Candidates are arbitrary frames, so in-plane
    rotations of the current plane are proposed too.  The best candidate
    whose index beats ``threshold`` (default: the index of ``current``) is
    returned, ties going to the earliest draw; ``None`` means the
    neighbourhood is exhausted.

    Each candidate has its own child generator, so running the evaluations
    on ``workers`` threads never changes the outcome.
    """
    if not radius > 0:
        raise InvalidInputError("radius must be positive")
    current = as_frame(current, tol.orth_tol, "current")
    if threshold is None:
        threshold = _evaluate(index, data, current)
    children = rng.spawn(n_candidates)

    def candidate(child):
        F = _neighbour(current, child, radius, tol)
        return F, _evaluate(index, data, F)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(candidate, children))
    else:
        results = map(candidate, children)
    best = None
    for F, value in results:
        if value > threshold and (best is None or value > best.index_value):
            best = Proposal(F, value)
    return best


def search_geodesic_dir(current, index, data, rng, n_dirs, threshold=None, probe=0.01,
                        step=DEFAULT_DELTA, max_angle=math.pi / 2, tol=DEFAULT_TOLERANCES):
    """Probe random geodesic directions, then line-search the best one.

    ``n_dirs`` random directions are tried ``probe`` radians forwards and
    backwards.  The most improving direction is followed in steps of
    ``step`` radians until the index drops or ``max_angle`` is reached, and
    the best frame seen is proposed.  Returns ``None`` if no probe beats the
    threshold (default: the index of ``current``).
    """
    current = as_frame(current, tol.orth_tol, "current")
    p, d = current.shape
    base = _evaluate(index, data, current)
    if threshold is None:
        threshold = base
    best = None
    for child in rng.spawn(n_dirs):
        info = geodesic_info(current, random_frame(p, d, child), tol)
        if info.total_angle == 0:
            continue
        for sign in (1.0, -1.0):
            value = _evaluate(index, data, info.frame_at_angle(sign * probe))
            if value > base and (best is None or value > best[0]):
                best = (value, info, sign)
    if best is None:
        return None
    value, info, sign = best
    best_frame, best_value = info.frame_at_angle(sign * probe), value
    s = probe
    while s + step <= max_angle:
        s += step
        F = info.frame_at_angle(sign * s)
        v = _evaluate(index, data, F)
        if v < best_value:
            break
        best_frame, best_value = F, v
    if best_value <= threshold:
        return None
    return Proposal(best_frame, best_value)


def guided_tour(config, data, index, start=None):
    """Optimize ``index`` over frames, interpolating between accepted targets.

    Stops after ``config.max_targets`` accepted targets or
    ``config.max_exhausted`` consecutive failed searches.  The search radius
    of ``better`` shrinks by ``config.cooling`` after every search, whether
    or not it found a target.
    """
    data = np.asarray(data, dtype=float)
    tol = config.tol
    rng = np.random.default_rng(config.seed)
    p = data.shape[1]
    if start is None:
        current = random_frame(p, 2, rng)
    else:
        current = as_frame(start, tol.orth_tol, "start")
        if current.shape[0] != p:
            raise InvalidInputError(f"start frame has {current.shape[0]} rows, data has {p} columns")
    trace = TourTrace()
    cur_val = _evaluate(index, data, current)
    trace.add(0, 0, current, cur_val, "interpolation")
    accepted_val = cur_val
    radius = config.initial_radius
    step_id = target_id = exhausted = 0
    while target_id < config.max_targets and exhausted < config.max_exhausted:
        threshold = max(cur_val, accepted_val)
        if config.search == "better":
            proposal = search_better(current, index, data, rng, radius, config.n_candidates,
                                     threshold, tol, config.workers)
        elif config.search == "geodesic_search":
            proposal = search_geodesic_dir(current, index, data, rng, config.n_dirs, threshold,
                                           step=config.delta, tol=tol)
        elif config.search == "grand":
            F = random_frame(p, current.shape[1], rng)
            v = _evaluate(index, data, F)
            proposal = Proposal(F, v) if v > threshold else None
        else:
            raise InvalidInputError("planned tours take explicit targets; use planned_tour")
        if proposal is None:
            exhausted += 1
            trace.n_exhausted += 1
            trace.add(step_id, target_id + 1, current, cur_val, "target_rejected")
            radius *= config.cooling
            continue
        exhausted = 0
        target_id += 1
        trace.add(step_id, target_id, proposal.frame, proposal.index_value, "target_proposed")
        trace.add(step_id, target_id, proposal.frame, proposal.index_value, "target_accepted")
        path = interpolation_path(config.interpolator, current, proposal.frame, config.delta, tol)
        step_id = _record_path(trace, path, target_id, step_id, index, data)
        current = path.frames[-1]
        if len(path.frames) > 1:
            cur_val = trace.records[-1].index_value
        accepted_val = proposal.index_value
        radius *= config.cooling
    return trace
