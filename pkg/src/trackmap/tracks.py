"""GPS tracks: loading, kinematics and dataset statistics.

A track file holds one measurement per line, ``x y t`` with optional
``heading speed`` columns; files are named ``trip_<id>.txt``.
Coordinates must already be projected meters.
"""

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .errors import InvalidInputError, ParseError
from .geometry import PolyLine, bearings

KMH = 3.6  # m/s -> km/h


class TrackWarning(UserWarning):
    """A recoverable problem found while loading tracks."""


class Measurement(NamedTuple):
    x: float
    y: float
    t: float
    heading: Optional[float] = None
    speed: Optional[float] = None

    @property
    def point(self):
        return (self.x, self.y)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Track:
    """One trip.  ``heading`` and ``speed`` hold NaN where unknown."""

    id: str
    xy: np.ndarray
    t: np.ndarray
    heading: np.ndarray = None
    speed: np.ndarray = None

    def __post_init__(self):
        xy = np.asarray(self.xy, dtype=float).reshape(-1, 2)
        n = len(xy)
        t = np.asarray(self.t, dtype=float).reshape(-1)
        if len(t) != n:
            raise InvalidInputError(f"track {self.id}: {n} points but {len(t)} timestamps")
        if n < 2:
            raise InvalidInputError(f"track {self.id}: needs at least 2 measurements, got {n}")
        if not np.all(np.diff(t) > 0):
            raise InvalidInputError(f"track {self.id}: timestamps must strictly increase")
        heading = np.full(n, np.nan) if self.heading is None else np.asarray(self.heading, dtype=float)
        speed = np.full(n, np.nan) if self.speed is None else np.asarray(self.speed, dtype=float)
        if heading.shape != (n,) or speed.shape != (n,):
            raise InvalidInputError(f"track {self.id}: heading/speed length mismatch")
        object.__setattr__(self, "xy", _frozen(xy))
        object.__setattr__(self, "t", _frozen(t))
        object.__setattr__(self, "heading", _frozen(heading))
        object.__setattr__(self, "speed", _frozen(speed))

    def __len__(self):
        return len(self.xy)

    def __eq__(self, other):
        if not isinstance(other, Track):
            return NotImplemented
        return (
            self.id == other.id
            and np.array_equal(self.xy, other.xy)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.heading, other.heading, equal_nan=True)
            and np.array_equal(self.speed, other.speed, equal_nan=True)
        )

    __hash__ = None

    @property
    def measurements(self):
        out = []
        for (x, y), t, h, s in zip(self.xy, self.t, self.heading, self.speed):
            out.append(Measurement(x, y, t, None if np.isnan(h) else h, None if np.isnan(s) else s))
        return out

    @property
    def polyline(self):
        return PolyLine(self.xy)

    @property
    def length(self):
        return self.polyline.length

    def with_points(self, xy):
        return Track(self.id, xy, self.t, self.heading, self.speed)

    def translated(self, dx, dy):
        return self.with_points(self.xy + (dx, dy))

    @classmethod
    def from_measurements(cls, ident, measurements):
        ms = list(measurements)
        xy = [(m.x, m.y) for m in ms]
        t = [m.t for m in ms]
        h = [np.nan if m.heading is None else m.heading for m in ms]
        s = [np.nan if m.speed is None else m.speed for m in ms]
        return cls(ident, xy, t, h, s)


@dataclass(frozen=True)
class DatasetStats:
    tracks: int
    sampling_rate_s: float
    length_km: float
    speed_kmh: float

    def as_tuple(self):
        return (self.tracks, self.sampling_rate_s, self.length_km, self.speed_kmh)


@dataclass
class LoadReport:
    """Tracks that loaded plus a record of everything that was dropped."""

    tracks: list = field(default_factory=list)
    warnings: list = field(default_factory=list)


def track_id_from_path(path):
    stem = Path(path).stem
    return stem[len("trip_"):] if stem.startswith("trip_") else stem


def parse_track_file(path, policy="drop", report=None):
    """Read one track file.  Returns a Track, or None if too short.

    ``policy`` decides what happens to a measurement whose timestamp does
    not increase: ``"drop"`` skips it with a warning, ``"error"`` raises.
    """
    if policy not in ("drop", "error"):
        raise InvalidInputError(f"unknown timestamp policy {policy!r}")
    path = Path(path)
    notes = report.warnings if report is not None else []
    rows = []
    last_t = -math.inf
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            fields = raw.split()
            if not fields:
                continue
            if len(fields) not in (3, 4, 5):
                raise ParseError(f"expected 3 to 5 fields, got {len(fields)}", path, lineno)
            try:
                vals = [float(f) for f in fields]
            except ValueError:
                raise ParseError(f"non-numeric field in {raw.strip()!r}", path, lineno) from None
            if not all(math.isfinite(v) for v in vals):
                raise ParseError("non-finite value", path, lineno)
            x, y, t = vals[:3]
            h = vals[3] % 360.0 if len(vals) > 3 else math.nan
            s = vals[4] if len(vals) > 4 else math.nan
            if not math.isnan(s) and s < 0:
                raise ParseError(f"negative speed {s}", path, lineno)
            if t <= last_t:
                msg = f"{path}:{lineno}: timestamp {t} does not increase"
                if policy == "error":
                    raise ParseError(f"timestamp {t} does not increase", path, lineno)
                notes.append(msg)
                warnings.warn(msg, TrackWarning, stacklevel=2)
                continue
            last_t = t
            rows.append((x, y, t, h, s))
    if len(rows) < 2:
        msg = f"{path}: skipped, only {len(rows)} valid measurement(s)"
        notes.append(msg)
        warnings.warn(msg, TrackWarning, stacklevel=2)
        return None
    a = np.array(rows)
    return Track(track_id_from_path(path), a[:, :2], a[:, 2], a[:, 3], a[:, 4])


def load_tracks(directory, policy="drop", report=None):
    """Load every ``trip_*.txt`` file in ``directory``, in lexicographic name order."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"track directory not found: {directory}")
    report = report if report is not None else LoadReport()
    for path in sorted(directory.glob("trip_*.txt")):
        track = parse_track_file(path, policy=policy, report=report)
        if track is not None:
            report.tracks.append(track)
    _check_projection(report)
    return report.tracks


def _check_projection(report):
    if not report.tracks:
        return
    xy = np.vstack([tr.xy for tr in report.tracks])
    if np.all(np.abs(xy[:, 0]) <= 180) and np.all(np.abs(xy[:, 1]) <= 90):
        msg = "coordinates look like degrees; tracks must be in projected meters"
        report.warnings.append(msg)
        warnings.warn(msg, TrackWarning, stacklevel=3)


def _fmt(v):
    return repr(float(v))


def write_tracks(tracks, directory):
    """Write tracks as ``trip_<id>.txt`` files; the inverse of load_tracks."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for tr in tracks:
        has_extra = not (np.all(np.isnan(tr.heading)) and np.all(np.isnan(tr.speed)))
        lines = []
        for (x, y), t, h, s in zip(tr.xy, tr.t, tr.heading, tr.speed):
            row = [_fmt(x), _fmt(y), _fmt(t)]
            if has_extra:
                row += [_fmt(h), _fmt(s)]
            lines.append(" ".join(row))
        p = directory / f"trip_{tr.id}.txt"
        p.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(p)
    return paths


def derive_kinematics(track):
    """Fill missing heading (segment bearing) and speed (km/h) values.

    The last measurement copies the values derived for its predecessor.
    Values already present are kept, so the operation is idempotent.
    """
    if len(track) < 2:
        raise InvalidInputError(f"track {track.id} needs at least 2 measurements")
    dt = np.diff(track.t)
    if np.any(dt <= 0):
        raise InvalidInputError(f"track {track.id}: timestamps must strictly increase")
    seg = np.hypot(*np.diff(track.xy, axis=0).T)
    seg_speed = seg / dt * KMH
    seg_heading = bearings(track.xy)
    # a stationary segment has no direction; borrow the previous one
    for i in range(len(seg)):
        if seg[i] == 0.0:
            seg_heading[i] = seg_heading[i - 1] if i > 0 else np.nan
    if np.isnan(seg_heading[0]):
        moving = np.flatnonzero(seg > 0)
        seg_heading[0] = seg_heading[moving[0]] if len(moving) else 0.0
        for i in range(1, len(seg)):
            if np.isnan(seg_heading[i]):
                seg_heading[i] = seg_heading[i - 1]
    derived_speed = np.append(seg_speed, seg_speed[-1])
    derived_heading = np.append(seg_heading, seg_heading[-1])
    speed = np.where(np.isnan(track.speed), derived_speed, track.speed)
    heading = np.where(np.isnan(track.heading), derived_heading, track.heading)
    return Track(track.id, track.xy, track.t, heading, speed)


def dataset_stats(tracks):
    """Track count, mean sampling gap, total length and mean speed.

    The sampling rate averages every consecutive time gap in the dataset.
    Mean speed weights every consecutive segment equally.
    """
    tracks = list(tracks)
    if not tracks:
        raise InvalidInputError("dataset has no tracks")
    gaps = np.concatenate([np.diff(tr.t) for tr in tracks])
    seglen = np.concatenate([np.hypot(*np.diff(tr.xy, axis=0).T) for tr in tracks])
    length = sum(tr.polyline.length for tr in tracks)
    speed = float(np.mean(seglen / gaps)) * KMH if len(gaps) else 0.0
    return DatasetStats(len(tracks), float(np.mean(gaps)) if len(gaps) else 0.0, length / 1000.0, speed)
