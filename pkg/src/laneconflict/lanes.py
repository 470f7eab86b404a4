"""Lane assignment and lane-change episode detection."""
from __future__ import annotations

import math
from typing import Optional

from shapely.geometry import Point

from .types import (
    HEADING_SPEED_FLOOR,
    KinematicState,
    LaneChangeEpisode,
    SiteGeometry,
    VehicleTrack,
)

#: half-width of the window marked around a lane-boundary crossing, seconds
DEFAULT_MARK_WINDOW_S = 1.0


def assign_lane(state: KinematicState, site: SiteGeometry) -> Optional[int]:
    """Lane whose polygon contains the vehicle center; ties go to the lowest id."""
    hit = None
    for lane in site.lanes:
        if lane.contains(state.x, state.y):
            if hit is None or lane.lane_id < hit:
                hit = lane.lane_id
    return hit


def derive_heading(state: KinematicState, site: SiteGeometry) -> float:
    """Heading from velocity direction, falling back to the nearest lane tangent
    when the vehicle is too slow for the velocity direction to be meaningful."""
    if state.speed >= HEADING_SPEED_FLOOR:
        return math.atan2(state.vy, state.vx)
    lane_id = state.lane_id if state.lane_id is not None else assign_lane(state, site)
    lane = site.lane_by_id(lane_id) if lane_id is not None else None
    if lane is None:
        p = Point(state.x, state.y)
        lane = min(site.lanes, key=lambda ln: ln.centerline_ls.distance(p))
    h = lane.tangent_heading(state.x, state.y)
    # normalize into (-pi, pi]
    if h <= -math.pi:
        h += 2 * math.pi
    return h


def lane_sequence(track: VehicleTrack, site: SiteGeometry) -> list[tuple[int, int]]:
    """(frame, lane_id) for every state with an assignment, in frame order."""
    out = []
    for s in track.states:
        lane = s.lane_id if s.lane_id is not None else assign_lane(s, site)
        if lane is not None:
            out.append((s.frame, lane))
    return out


def detect_lane_changes(
    track: VehicleTrack,
    site: SiteGeometry,
    window_frames: Optional[int] = None,
) -> list[LaneChangeEpisode]:
    """One episode per lane transition, spanning the crossing frame +/- the
    marking window; transitions with overlapping windows merge."""
    if window_frames is None:
        window_frames = int(round(DEFAULT_MARK_WINDOW_S * site.frame_rate))
    seq = lane_sequence(track, site)
    crossings = []  # (crossing_frame, from_lane, to_lane)
    for (f0, l0), (f1, l1) in zip(seq, seq[1:]):
        if l1 != l0:
            crossings.append((f1, l0, l1))
    episodes: list[LaneChangeEpisode] = []
    for frame, from_lane, to_lane in crossings:
        start, end = frame - window_frames, frame + window_frames
        if episodes and start <= episodes[-1].end_frame:
            prev = episodes[-1]
            episodes[-1] = LaneChangeEpisode(
                vehicle_id=track.id,
                start_frame=prev.start_frame,
                end_frame=end,
                from_lane=prev.from_lane,
                to_lane=to_lane,
            )
        else:
            episodes.append(LaneChangeEpisode(
                vehicle_id=track.id,
                start_frame=start,
                end_frame=end,
                from_lane=from_lane,
                to_lane=to_lane,
            ))
    return [e for e in episodes if e.from_lane != e.to_lane]
