"""Two-dimensional time-to-collision between oriented vehicle rectangles.

The 2D method casts a forward ray from each corner of the moving vehicle
along the relative velocity, intersects it with each side of the other
vehicle held stationary, and takes the shortest hit distance over both
role assignments.  TTC is that distance divided by the relative speed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

#: on-segment tolerance for ray/side intersection tests, meters
SEGMENT_TOL = 1e-9
#: relative speed below which TTC is undefined, m/s
REL_SPEED_FLOOR = 1e-6

Vec = tuple[float, float]


@dataclass(frozen=True)
class OrientedBox:
    center: Vec
    heading: float
    length: float
    width: float


@dataclass(frozen=True)
class PairState:
    box_a: OrientedBox
    vel_a: Vec
    box_b: OrientedBox
    vel_b: Vec


class Witness(str, Enum):
    A = "A"  # a corner of vehicle A hit a side of B
    B = "B"  # a corner of vehicle B hit a side of A


@dataclass(frozen=True)
class TtcResult:
    ttc: Optional[float]
    collision_distance: Optional[float]
    witness_corner: Optional[Witness]


def corners(box: OrientedBox) -> list[Vec]:
    """Corners in fixed order: front-left, front-right, rear-right, rear-left."""
    cx, cy = box.center
    c, s = math.cos(box.heading), math.sin(box.heading)
    hl, hw = box.length / 2.0, box.width / 2.0
    out = []
    for dx, dy in ((hl, hw), (hl, -hw), (-hl, -hw), (-hl, hw)):
        out.append((cx + dx * c - dy * s, cy + dx * s + dy * c))
    return out


def ray_segment_intersection(
    origin: Vec,
    direction: Vec,
    seg_start: Vec,
    seg_end: Vec,
) -> Optional[tuple[Vec, float]]:
    """Forward intersection of a ray with a segment.

    Returns (point, t) with origin + t*direction = point, or None when the
    lines are parallel, the hit falls outside the segment, or t < 0.
    """
    ox, oy = origin
    dx, dy = direction
    px, py = seg_start
    qx, qy = seg_end
    ex, ey = qx - px, qy - py
    denom = dx * ey - dy * ex
    seg_len = math.hypot(ex, ey)
    if abs(denom) <= 1e-12 * math.hypot(dx, dy) * seg_len:
        return None
    wx, wy = px - ox, py - oy
    t = (wx * ey - wy * ex) / denom
    u = (wx * dy - wy * dx) / denom  # position along the segment, in [0, 1]
    if t < 0.0:
        return None
    if u * seg_len < -SEGMENT_TOL or (u - 1.0) * seg_len > SEGMENT_TOL:
        return None
    return (ox + t * dx, oy + t * dy), t


def directional_collision_distance(
    moving: OrientedBox,
    stationary: OrientedBox,
    rel_vel: Vec,
) -> Optional[float]:
    """Shortest distance any corner of `moving` travels along rel_vel before
    touching a side of `stationary`; None when no forward ray hits."""
    mc = corners(moving)
    sc = corners(stationary)
    sides = [(sc[i], sc[(i + 1) % 4]) for i in range(4)]
    best = None
    for cx, cy in mc:
        for p, q in sides:
            hit = ray_segment_intersection((cx, cy), rel_vel, p, q)
            if hit is None:
                continue
            (ix, iy), _ = hit
            d = math.hypot(ix - cx, iy - cy)
            if best is None or d < best:
                best = d
    return best


def boxes_overlap(a: OrientedBox, b: OrientedBox) -> bool:
    """Separating-axis overlap test over the edge normals; touch counts."""
    ca, cb = corners(a), corners(b)
    axes = []
    for h in (a.heading, b.heading):
        c, s = math.cos(h), math.sin(h)
        axes.append((c, s))
        axes.append((-s, c))
    for ax, ay in axes:
        pa = [x * ax + y * ay for x, y in ca]
        pb = [x * ax + y * ay for x, y in cb]
        if max(pa) < min(pb) or max(pb) < min(pa):
            return False
    return True


def ttc(pair: PairState) -> TtcResult:
    """2D time-to-collision for a vehicle pair under constant velocities."""
    if boxes_overlap(pair.box_a, pair.box_b):
        return TtcResult(0.0, 0.0, None)
    rvx = pair.vel_a[0] - pair.vel_b[0]
    rvy = pair.vel_a[1] - pair.vel_b[1]
    rel_speed = math.hypot(rvx, rvy)
    if rel_speed <= REL_SPEED_FLOOR:
        return TtcResult(None, None, None)
    d_ab = directional_collision_distance(pair.box_a, pair.box_b, (rvx, rvy))
    d_ba = directional_collision_distance(pair.box_b, pair.box_a, (-rvx, -rvy))
    if d_ab is None and d_ba is None:
        return TtcResult(None, None, None)
    if d_ba is None or (d_ab is not None and d_ab <= d_ba):
        d, witness = d_ab, Witness.A
    else:
        d, witness = d_ba, Witness.B
    return TtcResult(d / rel_speed, d, witness)


def ttc_1d(
    lead_pos: float,
    lead_len: float,
    lead_speed: float,
    lag_pos: float,
    lag_speed: float,
) -> Optional[float]:
    """Classic one-dimensional closing-gap TTC; positions at vehicle fronts."""
    if not (lag_pos < lead_pos):
        raise ValueError("lag vehicle must be behind the lead vehicle")
    gap = lead_pos - lag_pos - lead_len
    if gap < 0:
        raise ValueError(f"negative bumper gap {gap}: vehicles overlap in 1D")
    if lag_speed <= lead_speed:
        return None
    return gap / (lag_speed - lead_speed)
