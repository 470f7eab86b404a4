"""Descriptive analytics and report serialization: speed distributions,
spatial speed maps, conflict summaries and position maps, with matplotlib
figures rendered next to the delimited output."""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass
from typing import Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .detect import ConflictClass, ConflictEvent, TypePair  # noqa: E402
from .types import Dataset, ValidationError, VehicleClass  # noqa: E402

MS_TO_KMH = 3.6


@dataclass
class Histogram:
    bin_width: float
    bin_edges: list[float]
    counts: list[int]
    total: int
    mean: Optional[float]
    std: Optional[float]


@dataclass
class SpatialGrid:
    cell_size: float
    origin: tuple[float, float]
    #: (col, row) -> aggregate; value cells carry {"sum", "count"},
    #: event cells carry {"count", "min_ttcs"}
    cells: dict[tuple[int, int], dict]

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (math.floor((x - self.origin[0]) / self.cell_size),
                math.floor((y - self.origin[1]) / self.cell_size))

    def cell_center(self, col: int, row: int) -> tuple[float, float]:
        return (self.origin[0] + (col + 0.5) * self.cell_size,
                self.origin[1] + (row + 0.5) * self.cell_size)


@dataclass
class ConflictSummary:
    per_pair: dict[TypePair, dict]  # {"event_count", "mean_ttc"}
    total_events: int
    counting_convention: str = "one event per below-threshold episode per pair"


def _speeds(dataset: Dataset, vclass: VehicleClass) -> list[float]:
    return [s.speed for t in dataset.tracks if t.vclass is vclass
            for s in t.states]


def speed_distribution(dataset: Dataset, vclass: VehicleClass,
                       bin_width: float = 1.0) -> Histogram:
    if bin_width <= 0:
        raise ValidationError("bin_width must be positive")
    speeds = _speeds(dataset, vclass)
    if not speeds:
        return Histogram(bin_width, [], [], 0, None, None)
    lo = math.floor(min(speeds) / bin_width)
    hi = math.floor(max(speeds) / bin_width) + 1
    edges = [i * bin_width for i in range(lo, hi + 1)]
    counts = [0] * (len(edges) - 1)
    for v in speeds:
        i = min(int(math.floor(v / bin_width)) - lo, len(counts) - 1)
        counts[i] += 1
    n = len(speeds)
    mean = sum(speeds) / n
    var = sum((v - mean) ** 2 for v in speeds) / n
    return Histogram(bin_width, edges, counts, n, mean, math.sqrt(var))


def spatial_speed_map(dataset: Dataset, vclass: VehicleClass,
                      cell_size: float = 2.0,
                      origin: tuple[float, float] = (0.0, 0.0)) -> SpatialGrid:
    if cell_size <= 0:
        raise ValidationError("cell_size must be positive")
    grid = SpatialGrid(cell_size, origin, {})
    for t in dataset.tracks:
        if t.vclass is not vclass:
            continue
        for s in t.states:
            key = grid.cell_of(s.x, s.y)
            cell = grid.cells.setdefault(key, {"sum": 0.0, "count": 0})
            cell["sum"] += s.speed
            cell["count"] += 1
    return grid


def conflict_summary(events: list[ConflictEvent]) -> ConflictSummary:
    lane_change = [e for e in events if e.conflict_class is ConflictClass.LANE_CHANGE]
    per_pair: dict[TypePair, dict] = {}
    for tp in TypePair:
        group = [e.min_ttc for e in lane_change if e.type_pair is tp]
        per_pair[tp] = {
            "event_count": len(group),
            "mean_ttc": sum(group) / len(group) if group else None,
        }
    return ConflictSummary(per_pair=per_pair, total_events=len(lane_change))


def conflict_position_map(events: list[ConflictEvent],
                          filter_type_pair: Optional[TypePair] = None,
                          cell_size: float = 2.0,
                          origin: tuple[float, float] = (0.0, 0.0)) -> SpatialGrid:
    if cell_size <= 0:
        raise ValidationError("cell_size must be positive")
    grid = SpatialGrid(cell_size, origin, {})
    for e in events:
        if filter_type_pair is not None and e.type_pair is not filter_type_pair:
            continue
        key = grid.cell_of(*e.location)
        cell = grid.cells.setdefault(key, {"count": 0, "min_ttcs": []})
        cell["count"] += 1
        cell["min_ttcs"].append(e.min_ttc)
    return grid


@dataclass
class ReportConfig:
    bin_width: float = 1.0
    cell_size: float = 2.0
    filter_type_pair: Optional[TypePair] = None
    svg: bool = False
    figures: bool = True
    ttc_threshold: float = 3.0


def _write_histogram_csv(hist: Histogram, path: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["bin_start", "bin_end", "count"])
        for i, c in enumerate(hist.counts):
            w.writerow([repr(hist.bin_edges[i]), repr(hist.bin_edges[i + 1]), c])


def _write_grid_csv(grid: SpatialGrid, path: str, value_key: str) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["col", "row", "x_center", "y_center", "value", "count"])
        for (col, row) in sorted(grid.cells):
            cell = grid.cells[(col, row)]
            cx, cy = grid.cell_center(col, row)
            if value_key == "mean_speed":
                value = cell["sum"] / cell["count"]
            else:
                value = min(cell["min_ttcs"])
            w.writerow([col, row, repr(cx), repr(cy), repr(float(value)),
                        cell["count"]])


def _savefig(fig, out_dir: str, stem: str, svg: bool) -> list[str]:
    names = []
    path = os.path.join(out_dir, f"{stem}.png")
    fig.savefig(path, dpi=120)
    names.append(path)
    if svg:
        plt.rcParams["svg.hashsalt"] = "laneconflict"
        spath = os.path.join(out_dir, f"{stem}.svg")
        fig.savefig(spath, metadata={"Date": None})
        names.append(spath)
    plt.close(fig)
    return names


def _fig_speed_distribution(hists: dict[str, Histogram]):
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=False)
    for ax, (label, h) in zip(axes, hists.items()):
        if h.counts:
            centers = [(h.bin_edges[i] + h.bin_edges[i + 1]) / 2
                       for i in range(len(h.counts))]
            ax.bar(centers, h.counts, width=h.bin_width * 0.9, color="#4477aa")
        ax.set_title(f"{label} speed distribution")
        ax.set_xlabel("speed [m/s]")
        ax.set_ylabel("frames")
    fig.tight_layout()
    return fig


def _fig_grid(grid: SpatialGrid, title: str, value_key: str, cbar_label: str):
    fig, ax = plt.subplots(figsize=(10, 3.5))
    if grid.cells:
        xs, ys, vs = [], [], []
        for (col, row), cell in sorted(grid.cells.items()):
            cx, cy = grid.cell_center(col, row)
            xs.append(cx)
            ys.append(cy)
            if value_key == "mean_speed":
                vs.append(cell["sum"] / cell["count"])
            elif value_key == "min_ttc":
                vs.append(min(cell["min_ttcs"]))
            else:
                vs.append(cell["count"])
        sc = ax.scatter(xs, ys, c=vs, s=18, marker="s", cmap="viridis")
        fig.colorbar(sc, ax=ax, label=cbar_label)
    ax.set_title(title)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    fig.tight_layout()
    return fig


def _fig_conflict_summary(summary: ConflictSummary):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    labels = [tp.value for tp in TypePair]
    counts = [summary.per_pair[tp]["event_count"] for tp in TypePair]
    means = [summary.per_pair[tp]["mean_ttc"] or 0.0 for tp in TypePair]
    ax1.bar(labels, counts, color="#4477aa")
    ax1.set_title("lane-change conflict count")
    ax1.tick_params(axis="x", rotation=30)
    ax2.bar(labels, means, color="#cc6677")
    ax2.set_title("mean minimum TTC [s]")
    ax2.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    return fig


def render_report(dataset: Dataset, events: list[ConflictEvent],
                  config: ReportConfig, out_dir: str) -> list[str]:
    """Write the full report bundle; returns the list of files written."""
    os.makedirs(out_dir, exist_ok=True)
    if not os.access(out_dir, os.W_OK):
        raise OSError(f"output directory not writable: {out_dir}")
    written: list[str] = []

    n_cars = sum(1 for t in dataset.tracks if t.vclass is VehicleClass.CAR)
    n_trucks = sum(1 for t in dataset.tracks if t.vclass is VehicleClass.TRUCK)
    total = n_cars + n_trucks
    truck_pct = round(100.0 * n_trucks / total, 1) if total else None

    hists = {
        "car": speed_distribution(dataset, VehicleClass.CAR, config.bin_width),
        "truck": speed_distribution(dataset, VehicleClass.TRUCK, config.bin_width),
    }
    speed_grids = {
        "car": spatial_speed_map(dataset, VehicleClass.CAR, config.cell_size),
        "truck": spatial_speed_map(dataset, VehicleClass.TRUCK, config.cell_size),
    }
    summary = conflict_summary(events)
    pos_map = conflict_position_map(events, config.filter_type_pair,
                                    config.cell_size)

    def speed_stats(h: Histogram) -> dict:
        return {
            "samples": h.total,
            "mean_ms": h.mean,
            "std_ms": h.std,
            "mean_kmh": h.mean * MS_TO_KMH if h.mean is not None else None,
        }

    payload = {
        "fleet": {
            "vehicles": total,
            "cars": n_cars,
            "trucks": n_trucks,
            "truck_percentage": truck_pct,
        },
        "speed": {label: speed_stats(h) for label, h in hists.items()},
        "conflicts": {
            "counting_convention": summary.counting_convention,
            "ttc_threshold_s": config.ttc_threshold,
            "total_lane_change_events": summary.total_events,
            "per_type_pair": {
                tp.value: summary.per_pair[tp] for tp in TypePair
            },
        },
        "config": {
            "bin_width_ms": config.bin_width,
            "cell_size_m": config.cell_size,
            "filter_type_pair": (config.filter_type_pair.value
                                 if config.filter_type_pair else None),
        },
    }
    summary_path = os.path.join(out_dir, "summary.json")
    with open(summary_path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(summary_path)

    for label, h in hists.items():
        p = os.path.join(out_dir, f"speed_hist_{label}.csv")
        _write_histogram_csv(h, p)
        written.append(p)
    for label, g in speed_grids.items():
        p = os.path.join(out_dir, f"speed_grid_{label}.csv")
        _write_grid_csv(g, p, "mean_speed")
        written.append(p)
    p = os.path.join(out_dir, "conflict_positions.csv")
    _write_grid_csv(pos_map, p, "min_ttc")
    written.append(p)

    if config.figures:
        written += _savefig(_fig_speed_distribution(hists), out_dir,
                            "speed_distribution", config.svg)
        for label, g in speed_grids.items():
            written += _savefig(
                _fig_grid(g, f"mean {label} speed", "mean_speed", "m/s"),
                out_dir, f"speed_map_{label}", config.svg)
        written += _savefig(_fig_conflict_summary(summary), out_dir,
                            "conflict_summary", config.svg)
        written += _savefig(
            _fig_grid(pos_map, "lane-change conflict positions", "min_ttc",
                      "min TTC [s]"),
            out_dir, "conflict_positions", config.svg)
    return written
