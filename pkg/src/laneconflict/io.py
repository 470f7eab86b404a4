"""Dataset ingestion and serialization.

Tracks CSV schema: frame,id,x,y,vx,vy,length,width[,lane_id]
Site JSON schema: {"frame_rate", "segment_length", "lanes": [...]}
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os

from .lanes import assign_lane, derive_heading
from .types import (
    Dataset,
    KinematicState,
    Lane,
    LaneType,
    SiteGeometry,
    ValidationError,
    VehicleTrack,
    classify_vehicle,
)

log = logging.getLogger(__name__)

TRACK_COLUMNS = ["frame", "id", "x", "y", "vx", "vy", "length", "width"]


class IngestError(ValidationError):
    """Malformed input file; message carries file, line and column."""


def load_site(path: str) -> SiteGeometry:
    if not os.path.exists(path):
        raise FileNotFoundError(f"site file not found: {path}")
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise IngestError(f"{path}: invalid JSON: {exc}") from exc
    if "lanes" not in raw or not raw["lanes"]:
        raise IngestError(f"{path}: missing lane geometry")
    lanes = []
    for i, ln in enumerate(raw["lanes"]):
        try:
            lanes.append(Lane(
                lane_id=int(ln["lane_id"]),
                lane_type=LaneType(ln["lane_type"]),
                centerline=[(float(x), float(y)) for x, y in ln["centerline"]],
                left_boundary=[(float(x), float(y)) for x, y in ln["left_boundary"]],
                right_boundary=[(float(x), float(y)) for x, y in ln["right_boundary"]],
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise IngestError(f"{path}: lane entry {i}: {exc}") from exc
    site = SiteGeometry(
        lanes=lanes,
        segment_length=float(raw.get("segment_length", 215.0)),
        frame_rate=float(raw.get("frame_rate", 25.0)),
    )
    site.validate()
    return site


def _parse_float(raw: str, line: int, column: str) -> float:
    try:
        v = float(raw)
    except ValueError as exc:
        raise IngestError(f"line {line}, column '{column}': not a number: {raw!r}") from exc
    if not math.isfinite(v):
        raise IngestError(f"line {line}, column '{column}': non-finite value {raw!r}")
    return v


def _parse_int(raw: str, line: int, column: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise IngestError(f"line {line}, column '{column}': not an integer: {raw!r}") from exc


def ingest_dataset(tracks_file: str, site_file: str) -> Dataset:
    """Read, validate and index a tracks CSV against its site geometry."""
    site = load_site(site_file)
    if not os.path.exists(tracks_file):
        raise FileNotFoundError(f"tracks file not found: {tracks_file}")

    rows_by_id: dict[int, list[dict]] = {}
    seen: set[tuple[int, int]] = set()
    with open(tracks_file, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise IngestError(f"{tracks_file}: empty file") from None
        has_lane = header == TRACK_COLUMNS + ["lane_id"]
        if not has_lane and header != TRACK_COLUMNS:
            raise IngestError(
                f"{tracks_file}: bad header {header}, expected {TRACK_COLUMNS}"
                " optionally followed by lane_id")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise IngestError(f"line {lineno}: expected {len(header)} fields, "
                                  f"got {len(row)}")
            rec = dict(zip(header, row))
            frame = _parse_int(rec["frame"], lineno, "frame")
            vid = _parse_int(rec["id"], lineno, "id")
            if frame < 0:
                raise IngestError(f"line {lineno}, column 'frame': negative frame")
            if (vid, frame) in seen:
                raise IngestError(f"line {lineno}: duplicate (id, frame) = "
                                  f"({vid}, {frame})")
            seen.add((vid, frame))
            parsed = {
                "frame": frame,
                "x": _parse_float(rec["x"], lineno, "x"),
                "y": _parse_float(rec["y"], lineno, "y"),
                "vx": _parse_float(rec["vx"], lineno, "vx"),
                "vy": _parse_float(rec["vy"], lineno, "vy"),
                "length": _parse_float(rec["length"], lineno, "length"),
                "width": _parse_float(rec["width"], lineno, "width"),
                "lane_id": (_parse_int(rec["lane_id"], lineno, "lane_id")
                            if has_lane and rec["lane_id"] != "" else None),
                "line": lineno,
            }
            rows_by_id.setdefault(vid, []).append(parsed)

    tracks = []
    for vid in sorted(rows_by_id):
        rows = sorted(rows_by_id[vid], key=lambda r: r["frame"])
        length = rows[0]["length"]
        width = rows[0]["width"]
        for r in rows:
            if r["length"] != length or r["width"] != width:
                raise IngestError(f"line {r['line']}: track {vid} changes dimensions")
        states = []
        for r in rows:
            state = KinematicState(frame=r["frame"], x=r["x"], y=r["y"],
                                   vx=r["vx"], vy=r["vy"], lane_id=r["lane_id"])
            lane_geom = assign_lane(state, site)
            if r["lane_id"] is not None:
                if lane_geom is not None and lane_geom != r["lane_id"]:
                    log.warning("track %d frame %d: file lane %s disagrees with "
                                "geometry lane %s", vid, r["frame"], r["lane_id"],
                                lane_geom)
                lane = r["lane_id"]
            else:
                lane = lane_geom
            state = KinematicState(frame=r["frame"], x=r["x"], y=r["y"],
                                   vx=r["vx"], vy=r["vy"], lane_id=lane)
            heading = derive_heading(state, site)
            states.append(KinematicState(frame=r["frame"], x=r["x"], y=r["y"],
                                         vx=r["vx"], vy=r["vy"], heading=heading,
                                         lane_id=lane))
        tracks.append(VehicleTrack(
            id=vid,
            vclass=classify_vehicle(length),
            length=length,
            width=width,
            states=states,
        ))

    dataset = Dataset(site=site, tracks=tracks, lane_column_present=has_lane)
    dataset.validate()
    return dataset


def _fmt(v: float) -> str:
    # repr round-trips doubles exactly
    return repr(float(v))


def write_tracks(dataset: Dataset, path: str) -> None:
    """Serialize tracks to the CSV schema (lane_id column iff it was ingested)."""
    header = TRACK_COLUMNS + (["lane_id"] if dataset.lane_column_present else [])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for track in dataset.tracks:
            for s in track.states:
                row = [s.frame, track.id, _fmt(s.x), _fmt(s.y), _fmt(s.vx),
                       _fmt(s.vy), _fmt(track.length), _fmt(track.width)]
                if dataset.lane_column_present:
                    row.append("" if s.lane_id is None else s.lane_id)
                writer.writerow(row)


def write_site(site: SiteGeometry, path: str) -> None:
    payload = {
        "frame_rate": site.frame_rate,
        "segment_length": site.segment_length,
        "lanes": [
            {
                "lane_id": ln.lane_id,
                "lane_type": ln.lane_type.value,
                "centerline": [list(p) for p in ln.centerline],
                "left_boundary": [list(p) for p in ln.left_boundary],
                "right_boundary": [list(p) for p in ln.right_boundary],
            }
            for ln in site.lanes
        ],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
