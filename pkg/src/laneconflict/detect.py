"""Pairwise conflict scan: per-frame TTC series, episode extraction,
lane-change vs rear-end classification."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .geometry import OrientedBox, PairState, TtcResult, Witness, ttc
from .lanes import detect_lane_changes
from .types import Dataset, KinematicState, ValidationError, VehicleClass, VehicleTrack


@dataclass(frozen=True)
class ConflictConfig:
    ttc_threshold: float = 3.0
    pruning_radius: float = 75.0
    merge_gap: float = 0.5
    min_duration: int = 1

    def validate(self) -> None:
        if not (0 < self.ttc_threshold <= 10):
            raise ValidationError(f"ttc_threshold out of (0, 10]: {self.ttc_threshold}")
        if self.pruning_radius <= 0 or self.merge_gap <= 0 or self.min_duration <= 0:
            raise ValidationError("conflict config values must be positive")


class TypePair(str, Enum):
    CAR_CAR = "car-car"
    CAR_TRUCK = "car-truck"
    TRUCK_CAR = "truck-car"
    TRUCK_TRUCK = "truck-truck"


def type_pair(lead: VehicleClass, lag: VehicleClass) -> TypePair:
    key = (lead, lag)
    return {
        (VehicleClass.CAR, VehicleClass.CAR): TypePair.CAR_CAR,
        (VehicleClass.CAR, VehicleClass.TRUCK): TypePair.CAR_TRUCK,
        (VehicleClass.TRUCK, VehicleClass.CAR): TypePair.TRUCK_CAR,
        (VehicleClass.TRUCK, VehicleClass.TRUCK): TypePair.TRUCK_TRUCK,
    }[key]


class ConflictClass(str, Enum):
    LANE_CHANGE = "lane_change"
    REAR_END = "rear_end"


@dataclass(frozen=True)
class TtcSample:
    frame: int
    pair: tuple[int, int]  # id_a < id_b
    ttc: Optional[float]
    collision_distance: Optional[float]
    witness_corner: Optional[Witness]


@dataclass
class ConflictEvent:
    pair: tuple[int, int]
    start_frame: int
    end_frame: int
    min_ttc: float
    min_ttc_frame: int
    location: tuple[float, float]
    lead_id: Optional[int] = None
    lag_id: Optional[int] = None
    type_pair: Optional[TypePair] = None
    conflict_class: Optional[ConflictClass] = None


def _box(track: VehicleTrack, state: KinematicState) -> OrientedBox:
    return OrientedBox(center=(state.x, state.y), heading=state.heading,
                       length=track.length, width=track.width)


def candidate_pairs(dataset: Dataset, frame: int,
                    config: ConflictConfig) -> list[tuple[int, int]]:
    """Vehicle-id pairs co-present at a frame within the pruning radius."""
    present = []
    for track in dataset.tracks:
        s = track.state_at(frame)
        if s is not None:
            present.append((track.id, s))
    pairs = []
    for i, (id_a, sa) in enumerate(present):
        for id_b, sb in present[i + 1:]:
            if math.hypot(sa.x - sb.x, sa.y - sb.y) <= config.pruning_radius:
                pairs.append((min(id_a, id_b), max(id_a, id_b)))
    return sorted(pairs)


def ttc_series(dataset: Dataset, pair: tuple[int, int],
               config: ConflictConfig) -> list[TtcSample]:
    """Per-frame TTC samples for one pair over its co-present, unpruned frames."""
    id_a, id_b = min(pair), max(pair)
    ta, tb = dataset.track(id_a), dataset.track(id_b)
    lo = max(ta.first_frame, tb.first_frame)
    hi = min(ta.last_frame, tb.last_frame)
    samples = []
    for frame in range(lo, hi + 1):
        sa, sb = ta.state_at(frame), tb.state_at(frame)
        if sa is None or sb is None:
            continue
        if math.hypot(sa.x - sb.x, sa.y - sb.y) > config.pruning_radius:
            continue
        res: TtcResult = ttc(PairState(
            box_a=_box(ta, sa), vel_a=(sa.vx, sa.vy),
            box_b=_box(tb, sb), vel_b=(sb.vx, sb.vy),
        ))
        samples.append(TtcSample(frame=frame, pair=(id_a, id_b), ttc=res.ttc,
                                 collision_distance=res.collision_distance,
                                 witness_corner=res.witness_corner))
    return samples


def _midpoint(dataset: Dataset, pair: tuple[int, int],
              frame: int) -> tuple[float, float]:
    sa = dataset.track(pair[0]).state_at(frame)
    sb = dataset.track(pair[1]).state_at(frame)
    return ((sa.x + sb.x) / 2.0, (sa.y + sb.y) / 2.0)


def extract_events(series: list[TtcSample], config: ConflictConfig,
                   dataset: Dataset) -> list[ConflictEvent]:
    """Maximal below-threshold runs, merged across short gaps."""
    below = [s for s in series if s.ttc is not None and s.ttc <= config.ttc_threshold]
    if not below:
        return []
    frame_rate = dataset.site.frame_rate
    runs: list[list[TtcSample]] = [[below[0]]]
    for s in below[1:]:
        gap_s = (s.frame - runs[-1][-1].frame) / frame_rate
        if gap_s <= config.merge_gap + 1e-12:
            runs[-1].append(s)
        else:
            runs.append([s])
    events = []
    for run in runs:
        if len(run) < config.min_duration:
            continue
        best = min(run, key=lambda s: (s.ttc, s.frame))
        events.append(ConflictEvent(
            pair=run[0].pair,
            start_frame=run[0].frame,
            end_frame=run[-1].frame,
            min_ttc=best.ttc,
            min_ttc_frame=best.frame,
            location=_midpoint(dataset, run[0].pair, best.frame),
        ))
    return events


def _reference_lane(dataset: Dataset, states):
    # arc lengths are only comparable along one curve, so order both
    # vehicles on a single centerline (the first assigned lane found)
    for s in states:
        if s is not None and s.lane_id is not None:
            lane = dataset.site.lane_by_id(s.lane_id)
            if lane is not None:
                return lane
    return None


def classify_event(event: ConflictEvent, dataset: Dataset,
                   episodes: Optional[dict[int, list]] = None) -> ConflictEvent:
    """Fill lead/lag, vehicle-type pair and lane-change/rear-end class."""
    id_a, id_b = event.pair
    ta, tb = dataset.track(id_a), dataset.track(id_b)
    if episodes is None:
        episodes = {t.id: detect_lane_changes(t, dataset.site) for t in (ta, tb)}

    changing = any(
        ep.start_frame <= event.end_frame and ep.end_frame >= event.start_frame
        for tid in event.pair for ep in episodes.get(tid, [])
    )
    sa = ta.state_at(event.min_ttc_frame)
    sb = tb.state_at(event.min_ttc_frame)
    different_lanes = (sa is not None and sb is not None
                       and sa.lane_id is not None and sb.lane_id is not None
                       and sa.lane_id != sb.lane_id)
    conflict_class = (ConflictClass.LANE_CHANGE if changing or different_lanes
                      else ConflictClass.REAR_END)

    sa0 = ta.state_at(event.start_frame)
    sb0 = tb.state_at(event.start_frame)
    ref = _reference_lane(dataset, (sa0, sb0))
    if ref is not None:
        pos_a = ref.arc_length(sa0.x, sa0.y)
        pos_b = ref.arc_length(sb0.x, sb0.y)
    else:
        pos_a, pos_b = sa0.x, sb0.x
    if pos_a > pos_b or (pos_a == pos_b and id_a < id_b):
        lead, lag = ta, tb
    else:
        lead, lag = tb, ta

    event.lead_id = lead.id
    event.lag_id = lag.id
    event.type_pair = type_pair(lead.vclass, lag.vclass)
    event.conflict_class = conflict_class
    return event


def _pairs_over_dataset(dataset: Dataset, config: ConflictConfig) -> list[tuple[int, int]]:
    seen: set[tuple[int, int]] = set()
    lo, hi = dataset.frame_span
    for frame in range(lo, hi + 1):
        for p in candidate_pairs(dataset, frame, config):
            seen.add(p)
    return sorted(seen)


def detect_conflicts(dataset: Dataset, config: ConflictConfig = ConflictConfig(),
                     threads: int = 1) -> list[ConflictEvent]:
    """Full scan; output order is canonical regardless of work partitioning."""
    config.validate()
    if not dataset.tracks:
        return []
    pairs = _pairs_over_dataset(dataset, config)
    episodes = {t.id: detect_lane_changes(t, dataset.site) for t in dataset.tracks}

    def work(pair: tuple[int, int]) -> list[ConflictEvent]:
        series = ttc_series(dataset, pair, config)
        return [classify_event(e, dataset, episodes)
                for e in extract_events(series, config, dataset)]

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(work, pairs))
    else:
        chunks = [work(p) for p in pairs]
    events = [e for chunk in chunks for e in chunk]
    events.sort(key=lambda e: (e.start_frame, e.pair[0], e.pair[1], e.end_frame))
    return events


CONFLICT_CSV_COLUMNS = [
    "pair_a", "pair_b", "start_frame", "end_frame", "min_ttc", "min_ttc_frame",
    "x", "y", "lead_id", "lag_id", "type_pair", "conflict_class",
]


def write_conflicts_csv(events: list[ConflictEvent], path: str) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CONFLICT_CSV_COLUMNS)
        for e in events:
            writer.writerow([
                e.pair[0], e.pair[1], e.start_frame, e.end_frame,
                repr(float(e.min_ttc)), e.min_ttc_frame,
                repr(float(e.location[0])), repr(float(e.location[1])),
                e.lead_id, e.lag_id, e.type_pair.value, e.conflict_class.value,
            ])


def read_conflicts_csv(path: str) -> list[ConflictEvent]:
    events = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CONFLICT_CSV_COLUMNS:
            raise ValidationError(f"{path}: bad conflict CSV header")
        for row in reader:
            events.append(ConflictEvent(
                pair=(int(row["pair_a"]), int(row["pair_b"])),
                start_frame=int(row["start_frame"]),
                end_frame=int(row["end_frame"]),
                min_ttc=float(row["min_ttc"]),
                min_ttc_frame=int(row["min_ttc_frame"]),
                location=(float(row["x"]), float(row["y"])),
                lead_id=int(row["lead_id"]),
                lag_id=int(row["lag_id"]),
                type_pair=TypePair(row["type_pair"]),
                conflict_class=ConflictClass(row["conflict_class"]),
            ))
    return events
