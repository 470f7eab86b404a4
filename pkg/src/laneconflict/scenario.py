"""Deterministic synthetic merging-section scenarios with ground-truth
conflict injection.

Background traffic is scripted lane-following at constant (or ramp-profiled)
speed, scheduled so that no two background vehicles ever close on each
other.  Each injected conflict is a kinematically scripted closing pair in
an exclusive time window; the longitudinal separation at the minimum-TTC
frame is calibrated against the analytic TTC, which is linear in the
separation, so the realized minimum equals the requested target to
machine precision.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .detect import ConflictClass
from .geometry import OrientedBox, PairState, ttc
from .lanes import assign_lane, derive_heading
from .types import (
    Dataset,
    KinematicState,
    Lane,
    LaneType,
    SiteGeometry,
    ValidationError,
    VehicleClass,
    VehicleTrack,
)

LANE_WIDTH = 3.5
SEGMENT_LENGTH = 215.0
RAMP_END_X = 60.0

CAR_DIMS = (4.5, 1.8)
TRUCK_DIMS = (12.0, 2.5)

#: injected encounter kinematics: lead cruises, lag closes then matches speed
INJ_LEAD_SPEED = 15.0
INJ_CLOSING_SPEED = 2.5
#: TTC at the start of an injection window, seconds (above the 3.0 s threshold)
INJ_START_TTC = 3.5
INJ_TAIL_S = 1.0
#: lateral drift speed of a scripted lane change, m/s
INJ_DRIFT_SPEED = 0.875
#: the drifting pair crosses the lane boundary this long after min TTC
INJ_CROSS_AFTER_S = 0.25


class ScenarioError(ValidationError):
    """Raised for infeasible scenario specifications."""


@dataclass
class FleetSpec:
    n_cars: int = 65
    n_trucks: int = 35
    car_speed_mean: float = 22.0
    car_speed_sd: float = 2.0
    truck_speed_mean: float = 18.0
    truck_speed_sd: float = 2.0


@dataclass
class ConflictInjection:
    lead_class: VehicleClass
    lag_class: VehicleClass
    target_min_ttc: float
    location: tuple[float, float]
    conflict_class_intent: ConflictClass

    def validate(self) -> None:
        if not (0 < self.target_min_ttc <= 3.0):
            raise ScenarioError(
                f"target_min_ttc out of (0, 3]: {self.target_min_ttc}")


@dataclass
class ScenarioSpec:
    seed: int = 0
    site: SiteGeometry = field(default_factory=lambda: default_site())
    fleet: FleetSpec = field(default_factory=FleetSpec)
    injections: list[ConflictInjection] = field(default_factory=list)


def default_site() -> SiteGeometry:
    """Straight-lane template: five mainline lanes, an on-ramp feeding an
    acceleration lane on the outer side, 215 m at 25 Hz."""
    def band(lane_id, lane_type, y0, y1, x0, x1):
        yc = (y0 + y1) / 2.0
        return Lane(
            lane_id=lane_id,
            lane_type=lane_type,
            centerline=[(x0, yc), (x1, yc)],
            left_boundary=[(x0, y1), (x1, y1)],
            right_boundary=[(x0, y0), (x1, y0)],
        )

    lanes = [
        band(k, LaneType.MAINLINE, (k - 1) * LANE_WIDTH, k * LANE_WIDTH,
             0.0, SEGMENT_LENGTH)
        for k in range(1, 6)
    ]
    outer_y0, outer_y1 = 5 * LANE_WIDTH, 6 * LANE_WIDTH
    lanes.append(band(6, LaneType.ACCELERATION, outer_y0, outer_y1,
                      RAMP_END_X, SEGMENT_LENGTH))
    lanes.append(band(7, LaneType.ON_RAMP, outer_y0, outer_y1, 0.0, RAMP_END_X))
    return SiteGeometry(lanes=lanes, segment_length=SEGMENT_LENGTH,
                        frame_rate=25.0)


def _dims(vclass: VehicleClass) -> tuple[float, float]:
    return CAR_DIMS if vclass is VehicleClass.CAR else TRUCK_DIMS


def _make_states(site: SiteGeometry, xs, ys, vxs, vys, start_frame: int):
    states = []
    for i, (x, y, vx, vy) in enumerate(zip(xs, ys, vxs, vys)):
        s = KinematicState(frame=start_frame + i, x=x, y=y, vx=vx, vy=vy)
        lane = assign_lane(s, site)
        s = KinematicState(frame=s.frame, x=x, y=y, vx=vx, vy=vy, lane_id=lane)
        states.append(KinematicState(
            frame=s.frame, x=x, y=y, vx=vx, vy=vy,
            heading=derive_heading(s, site), lane_id=lane))
    return states


def _background_track(track_id: int, vclass: VehicleClass, speed: float,
                      lane_center_y: float, ramp_profile: bool,
                      site: SiteGeometry, start_frame: int) -> VehicleTrack:
    dt = 1.0 / site.frame_rate
    length, width = _dims(vclass)
    xs, vxs = [], []
    x = 0.0
    while x <= site.segment_length:
        if ramp_profile:
            # decelerate to 60% of cruise by the ramp end, then recover
            if x < RAMP_END_X:
                v = speed * (1.0 - 0.4 * x / RAMP_END_X)
            else:
                v = speed * (0.6 + 0.4 * (x - RAMP_END_X)
                             / (site.segment_length - RAMP_END_X))
        else:
            v = speed
        xs.append(x)
        vxs.append(v)
        x += v * dt
    n = len(xs)
    states = _make_states(site, xs, [lane_center_y] * n, vxs, [0.0] * n,
                          start_frame)
    return VehicleTrack(id=track_id, vclass=vclass, length=length, width=width,
                        states=states)


def _calibrate_separation(lead_box_dims, lag_box_dims, lead_heading,
                          lag_heading, y_lead, y_lag, target: float) -> float:
    """Center separation at which the analytic TTC of the closing pair equals
    the target.  TTC is linear in the separation, so one probe fixes it."""
    l_lead, w_lead = lead_box_dims
    l_lag, w_lag = lag_box_dims
    probe = (l_lead + l_lag) / 2.0 + 2.0 * INJ_START_TTC * INJ_CLOSING_SPEED
    pair = PairState(
        box_a=OrientedBox((probe, y_lead), lead_heading, l_lead, w_lead),
        vel_a=(INJ_LEAD_SPEED, 0.0),
        box_b=OrientedBox((0.0, y_lag), lag_heading, l_lag, w_lag),
        vel_b=(INJ_LEAD_SPEED + INJ_CLOSING_SPEED, 0.0),
    )
    res = ttc(pair)
    if res.ttc is None:
        raise ScenarioError("probe pair has no collision course")
    return probe + (target - res.ttc) * INJ_CLOSING_SPEED


def _injection_tracks(idx: int, inj: ConflictInjection, site: SiteGeometry,
                      lead_id: int, lag_id: int,
                      start_frame: int) -> tuple[VehicleTrack, VehicleTrack, int]:
    """Build the two scripted tracks of one injection; returns the tracks and
    the first frame after the injection window."""
    inj.validate()
    fr = site.frame_rate
    dt = 1.0 / fr
    x_loc, y_loc = inj.location
    l_lead, w_lead = _dims(inj.lead_class)
    l_lag, w_lag = _dims(inj.lag_class)
    v_lag = INJ_LEAD_SPEED + INJ_CLOSING_SPEED

    closing_frames = int(round((INJ_START_TTC - inj.target_min_ttc) * fr))
    tail_frames = int(round(INJ_TAIL_S * fr))
    f_star = start_frame + closing_frames
    end_frame = f_star + tail_frames

    lane = None
    for ln in site.lanes:
        if ln.contains(x_loc, y_loc):
            lane = ln
            break
    if lane is None:
        raise ScenarioError(f"injection {idx}: location {inj.location} is on "
                            "no lane")

    if inj.conflict_class_intent is ConflictClass.LANE_CHANGE:
        miny, maxy = lane.polygon.bounds[1], lane.polygon.bounds[3]
        # drift toward the neighbouring lane, crossing just after min TTC so
        # the event location stays inside the starting lane
        probe_down = KinematicState(frame=0, x=x_loc, y=miny - 0.1, vx=1, vy=0)
        if assign_lane(probe_down, site) is not None:
            vy = -INJ_DRIFT_SPEED
            y_star = miny - vy * INJ_CROSS_AFTER_S
        else:
            vy = INJ_DRIFT_SPEED
            y_star = maxy - vy * INJ_CROSS_AFTER_S
    else:
        vy = 0.0
        y_star = (lane.polygon.bounds[1] + lane.polygon.bounds[3]) / 2.0

    lead_heading = math.atan2(vy, INJ_LEAD_SPEED)
    lag_heading = math.atan2(vy, v_lag)
    sep_star = _calibrate_separation((l_lead, w_lead), (l_lag, w_lag),
                                     lead_heading, lag_heading, 0.0, 0.0,
                                     inj.target_min_ttc)
    x_lead_star = x_loc + sep_star / 2.0
    x_lag_star = x_lead_star - sep_star

    frames = range(start_frame, end_frame + 1)
    lead_xs = [x_lead_star + INJ_LEAD_SPEED * (f - f_star) * dt for f in frames]
    lag_xs = [x_lag_star - v_lag * (f_star - f) * dt if f <= f_star
              else x_lag_star + INJ_LEAD_SPEED * (f - f_star) * dt
              for f in frames]
    lag_vxs = [v_lag if f <= f_star else INJ_LEAD_SPEED for f in frames]
    ys = [y_star + vy * (f - f_star) * dt for f in frames]

    pad = max(l_lead, l_lag)
    for x in (lead_xs[0], lead_xs[-1], lag_xs[0], lag_xs[-1]):
        if not (-pad <= x <= site.segment_length + pad):
            raise ScenarioError(
                f"injection {idx}: encounter leaves the site (x = {x:.1f}); "
                "move the location or shorten the target TTC")

    lead = VehicleTrack(
        id=lead_id, vclass=inj.lead_class, length=l_lead, width=w_lead,
        states=_make_states(site, lead_xs, ys, [INJ_LEAD_SPEED] * len(lead_xs),
                            [vy] * len(lead_xs), start_frame))
    lag = VehicleTrack(
        id=lag_id, vclass=inj.lag_class, length=l_lag, width=w_lag,
        states=_make_states(site, lag_xs, ys, lag_vxs, [vy] * len(lag_xs),
                            start_frame))
    return lead, lag, end_frame + int(round(fr))


def generate(spec: ScenarioSpec) -> Dataset:
    """Materialize a scenario: background streams plus injected encounters."""
    site = spec.site
    rng = np.random.default_rng(spec.seed)
    fr = site.frame_rate

    inj_cars = sum((inj.lead_class is VehicleClass.CAR)
                   + (inj.lag_class is VehicleClass.CAR)
                   for inj in spec.injections)
    inj_trucks = 2 * len(spec.injections) - inj_cars
    bg_cars = spec.fleet.n_cars - inj_cars
    bg_trucks = spec.fleet.n_trucks - inj_trucks
    if bg_cars < 0 or bg_trucks < 0:
        raise ScenarioError("fleet counts smaller than injection demand")

    classes = ([VehicleClass.CAR] * bg_cars + [VehicleClass.TRUCK] * bg_trucks)
    rng.shuffle(classes)

    # channels: the five mainline lanes plus the ramp/acceleration path;
    # one vehicle per channel at a time, so background streams never interact
    channel_y = [(k - 0.5) * LANE_WIDTH for k in range(1, 6)]
    channel_y.append(5.5 * LANE_WIDTH)
    channel_clock = [0] * len(channel_y)

    tracks: list[VehicleTrack] = []
    next_id = 1
    for i, vclass in enumerate(classes):
        ch = i % len(channel_y)
        if vclass is VehicleClass.CAR:
            speed = rng.normal(spec.fleet.car_speed_mean, spec.fleet.car_speed_sd)
        else:
            speed = rng.normal(spec.fleet.truck_speed_mean,
                               spec.fleet.truck_speed_sd)
        speed = float(min(max(speed, 8.0), 35.0))
        track = _background_track(next_id, vclass, speed, channel_y[ch],
                                  ramp_profile=(ch == len(channel_y) - 1),
                                  site=site, start_frame=channel_clock[ch])
        tracks.append(track)
        channel_clock[ch] = track.last_frame + 1 + int(round(fr))
        next_id += 1

    clock = (max(t.last_frame for t in tracks) + 1 + int(round(fr))
             if tracks else 0)
    for idx, inj in enumerate(spec.injections):
        lead, lag, clock = _injection_tracks(idx, inj, site, next_id,
                                             next_id + 1, clock)
        tracks.extend([lead, lag])
        next_id += 2

    dataset = Dataset(site=site, tracks=tracks)
    dataset.validate()
    return dataset


def reference_scenario(seed: int = 0) -> ScenarioSpec:
    """Desk-scale spec echoing the field site's shape: 65:35 car/truck mix,
    injected lane-change conflicts concentrated on the ramp/acceleration
    path with mean TTC increasing from car-car to truck-truck."""
    C, T = VehicleClass.CAR, VehicleClass.TRUCK
    LC, RE = ConflictClass.LANE_CHANGE, ConflictClass.REAR_END
    accel_y = 5.5 * LANE_WIDTH
    injections = [
        ConflictInjection(C, C, 1.0, (95.0, accel_y), LC),
        ConflictInjection(C, C, 1.2, (120.0, accel_y), LC),
        ConflictInjection(C, C, 1.4, (145.0, accel_y), LC),
        ConflictInjection(C, T, 1.6, (100.0, accel_y), LC),
        ConflictInjection(C, T, 1.7, (130.0, accel_y), LC),
        ConflictInjection(C, T, 1.8, (90.0, 2.5 * LANE_WIDTH), LC),
        ConflictInjection(T, C, 2.0, (110.0, accel_y), LC),
        ConflictInjection(T, C, 2.1, (150.0, accel_y), LC),
        ConflictInjection(T, C, 2.2, (100.0, 3.5 * LANE_WIDTH), LC),
        ConflictInjection(T, T, 2.4, (105.0, accel_y), LC),
        ConflictInjection(T, T, 2.5, (135.0, accel_y), LC),
        ConflictInjection(T, T, 2.6, (160.0, accel_y), LC),
        ConflictInjection(T, T, 2.7, (125.0, accel_y), LC),
        ConflictInjection(C, C, 2.0, (120.0, 1.5 * LANE_WIDTH), RE),
        ConflictInjection(T, T, 2.7, (140.0, 4.5 * LANE_WIDTH), RE),
    ]
    return ScenarioSpec(seed=seed, fleet=FleetSpec(), injections=injections)


def spec_to_json(spec: ScenarioSpec) -> dict:
    return {
        "seed": spec.seed,
        "fleet": {
            "n_cars": spec.fleet.n_cars,
            "n_trucks": spec.fleet.n_trucks,
            "car_speed_mean": spec.fleet.car_speed_mean,
            "car_speed_sd": spec.fleet.car_speed_sd,
            "truck_speed_mean": spec.fleet.truck_speed_mean,
            "truck_speed_sd": spec.fleet.truck_speed_sd,
        },
        "injections": [
            {
                "lead_class": inj.lead_class.value,
                "lag_class": inj.lag_class.value,
                "target_min_ttc": inj.target_min_ttc,
                "location": list(inj.location),
                "conflict_class_intent": inj.conflict_class_intent.value,
            }
            for inj in spec.injections
        ],
    }


def spec_from_json(raw: dict) -> ScenarioSpec:
    fleet_raw = raw.get("fleet", {})
    fleet = FleetSpec(**fleet_raw)
    injections = [
        ConflictInjection(
            lead_class=VehicleClass(j["lead_class"]),
            lag_class=VehicleClass(j["lag_class"]),
            target_min_ttc=float(j["target_min_ttc"]),
            location=tuple(j["location"]),
            conflict_class_intent=ConflictClass(j["conflict_class_intent"]),
        )
        for j in raw.get("injections", [])
    ]
    return ScenarioSpec(seed=int(raw.get("seed", 0)), fleet=fleet,
                        injections=injections)


def load_spec(path: str) -> ScenarioSpec:
    with open(path) as fh:
        return spec_from_json(json.load(fh))
