"""Lane-change conflict analytics for freeway merging sections.

Detects and classifies conflicts between cars and trucks from vehicle
trajectories using a two-dimensional time-to-collision between oriented
vehicle rectangles.
"""
from .detect import (
    ConflictClass,
    ConflictConfig,
    ConflictEvent,
    TtcSample,
    TypePair,
    detect_conflicts,
)
from .denoise import denoise_track
from .geometry import OrientedBox, PairState, TtcResult, ttc, ttc_1d
from .io import ingest_dataset
from .oracle import ttc_oracle
from .report import ReportConfig, render_report
from .scenario import ScenarioSpec, generate, reference_scenario
from .types import (
    Dataset,
    KinematicState,
    SiteGeometry,
    VehicleClass,
    VehicleTrack,
    classify_vehicle,
)

__version__ = "0.1.0"

__all__ = [
    "ConflictClass",
    "ConflictConfig",
    "ConflictEvent",
    "Dataset",
    "KinematicState",
    "OrientedBox",
    "PairState",
    "ReportConfig",
    "ScenarioSpec",
    "SiteGeometry",
    "TtcResult",
    "TtcSample",
    "TypePair",
    "VehicleClass",
    "VehicleTrack",
    "classify_vehicle",
    "denoise_track",
    "detect_conflicts",
    "generate",
    "ingest_dataset",
    "reference_scenario",
    "render_report",
    "ttc",
    "ttc_1d",
    "ttc_oracle",
]
