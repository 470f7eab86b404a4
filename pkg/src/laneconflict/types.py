"""Core trajectory data model: kinematic states, tracks, site geometry."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from shapely.geometry import LineString, Point, Polygon
from shapely.prepared import prep

TRUCK_LENGTH_THRESHOLD_M = 6.0
#: speed below which the velocity direction is too noisy to define a heading
HEADING_SPEED_FLOOR = 0.1


class ValidationError(ValueError):
    """Raised when ingested data violates a model invariant."""


class VehicleClass(str, Enum):
    CAR = "Car"
    TRUCK = "Truck"


def classify_vehicle(length: float) -> VehicleClass:
    """Classify a vehicle by body length: trucks are strictly longer than 6 m."""
    if not (length > 0):
        raise ValidationError(f"vehicle length must be positive, got {length}")
    return VehicleClass.TRUCK if length > TRUCK_LENGTH_THRESHOLD_M else VehicleClass.CAR


@dataclass(frozen=True)
class KinematicState:
    frame: int
    x: float
    y: float
    vx: float
    vy: float
    heading: float = 0.0
    lane_id: Optional[int] = None

    def validate(self) -> None:
        if self.frame < 0:
            raise ValidationError(f"frame must be >= 0, got {self.frame}")
        for name in ("x", "y", "vx", "vy", "heading"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"non-finite {name} at frame {self.frame}")
        if not (-math.pi < self.heading <= math.pi):
            raise ValidationError(f"heading out of (-pi, pi] at frame {self.frame}")

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)


@dataclass
class VehicleTrack:
    id: int
    vclass: VehicleClass
    length: float
    width: float
    states: list[KinematicState]

    def validate(self) -> None:
        if not (self.length > 0 and self.width > 0 and self.length >= self.width):
            raise ValidationError(
                f"track {self.id}: bad dimensions {self.length} x {self.width}")
        if self.vclass is not classify_vehicle(self.length):
            raise ValidationError(
                f"track {self.id}: class {self.vclass.value} inconsistent with "
                f"length {self.length}")
        frames = [s.frame for s in self.states]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ValidationError(f"track {self.id}: frames not strictly increasing")
        for s in self.states:
            s.validate()

    def state_at(self, frame: int) -> Optional[KinematicState]:
        i = self._frame_index().get(frame)
        return self.states[i] if i is not None else None

    def _frame_index(self) -> dict[int, int]:
        idx = self.__dict__.get("_idx")
        if idx is None:
            idx = {s.frame: i for i, s in enumerate(self.states)}
            self.__dict__["_idx"] = idx
        return idx

    @property
    def first_frame(self) -> int:
        return self.states[0].frame

    @property
    def last_frame(self) -> int:
        return self.states[-1].frame


class LaneType(str, Enum):
    MAINLINE = "mainline"
    ON_RAMP = "on_ramp"
    ACCELERATION = "acceleration"


@dataclass
class Lane:
    lane_id: int
    lane_type: LaneType
    centerline: list[tuple[float, float]]
    left_boundary: list[tuple[float, float]]
    right_boundary: list[tuple[float, float]]
    _polygon: Optional[Polygon] = field(default=None, repr=False, compare=False)
    _prepared: object = field(default=None, repr=False, compare=False)
    _center_ls: Optional[LineString] = field(default=None, repr=False, compare=False)

    @property
    def polygon(self) -> Polygon:
        if self._polygon is None:
            ring = list(self.left_boundary) + list(reversed(self.right_boundary))
            self._polygon = Polygon(ring)
        return self._polygon

    @property
    def centerline_ls(self) -> LineString:
        if self._center_ls is None:
            self._center_ls = LineString(self.centerline)
        return self._center_ls

    def contains(self, x: float, y: float) -> bool:
        # boundary-inclusive containment
        if self._prepared is None:
            self._prepared = prep(self.polygon)
        return self._prepared.intersects(Point(x, y))

    def arc_length(self, x: float, y: float) -> float:
        return self.centerline_ls.project(Point(x, y))

    def tangent_heading(self, x: float, y: float) -> float:
        ls = self.centerline_ls
        s = ls.project(Point(x, y))
        ds = max(ls.length * 1e-6, 1e-3)
        p0 = ls.interpolate(max(0.0, s - ds))
        p1 = ls.interpolate(min(ls.length, s + ds))
        return math.atan2(p1.y - p0.y, p1.x - p0.x)


#: polygons may share edges; deeper interpenetration than this is an error
LANE_OVERLAP_TOLERANCE_M = 0.01


@dataclass
class SiteGeometry:
    lanes: list[Lane]
    segment_length: float = 215.0
    frame_rate: float = 25.0

    def validate(self) -> None:
        if not (self.frame_rate > 0):
            raise ValidationError(f"frame_rate must be > 0, got {self.frame_rate}")
        if not self.lanes:
            raise ValidationError("site has no lanes")
        ids = [ln.lane_id for ln in self.lanes]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate lane_id in site")
        shrunk = {}
        for ln in self.lanes:
            if not ln.polygon.is_valid:
                raise ValidationError(f"lane {ln.lane_id}: self-intersecting polygon")
            shrunk[ln.lane_id] = ln.polygon.buffer(-LANE_OVERLAP_TOLERANCE_M)
        for i, a in enumerate(self.lanes):
            for b in self.lanes[i + 1:]:
                if shrunk[a.lane_id].intersects(shrunk[b.lane_id]):
                    raise ValidationError(
                        f"lanes {a.lane_id} and {b.lane_id} overlap")

    def lane_by_id(self, lane_id: int) -> Optional[Lane]:
        for ln in self.lanes:
            if ln.lane_id == lane_id:
                return ln
        return None

    def bounding_box(self) -> tuple[float, float, float, float]:
        xs, ys = [], []
        for ln in self.lanes:
            for poly in (ln.left_boundary, ln.right_boundary):
                for x, y in poly:
                    xs.append(x)
                    ys.append(y)
        return min(xs), min(ys), max(xs), max(ys)


@dataclass
class Dataset:
    site: SiteGeometry
    tracks: list[VehicleTrack]
    #: whether the source tracks file carried an explicit lane_id column
    lane_column_present: bool = False

    def __post_init__(self) -> None:
        self._by_id = {t.id: t for t in self.tracks}

    def validate(self) -> None:
        self.site.validate()
        if len(self._by_id) != len(self.tracks):
            raise ValidationError("duplicate track ids")
        xmin, ymin, xmax, ymax = self.site.bounding_box()
        for t in self.tracks:
            t.validate()
            pad = t.length
            for s in self.states_of(t.id):
                if not (xmin - pad <= s.x <= xmax + pad
                        and ymin - pad <= s.y <= ymax + pad):
                    raise ValidationError(
                        f"track {t.id} frame {s.frame}: position "
                        f"({s.x}, {s.y}) outside site")

    def track(self, track_id: int) -> VehicleTrack:
        return self._by_id[track_id]

    def states_of(self, track_id: int) -> list[KinematicState]:
        return self._by_id[track_id].states

    @property
    def frame_span(self) -> tuple[int, int]:
        if not self.tracks:
            return (0, -1)
        return (min(t.first_frame for t in self.tracks),
                max(t.last_frame for t in self.tracks))


@dataclass(frozen=True)
class LaneChangeEpisode:
    vehicle_id: int
    start_frame: int
    end_frame: int
    from_lane: int
    to_lane: int

    def validate(self) -> None:
        if not (self.start_frame < self.end_frame):
            raise ValidationError("episode frames out of order")
        if self.from_lane == self.to_lane:
            raise ValidationError("episode with identical lanes")
