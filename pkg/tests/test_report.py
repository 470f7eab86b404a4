import filecmp
import json
import os
import random

import pytest

from laneconflict.detect import ConflictClass, ConflictEvent, TypePair
from laneconflict.report import (
    ReportConfig,
    conflict_position_map,
    conflict_summary,
    render_report,
    spatial_speed_map,
    speed_distribution,
)
from laneconflict.types import (
    Dataset,
    KinematicState,
    ValidationError,
    VehicleClass,
    VehicleTrack,
)


def _one_state_track(tid, vclass, speed, x=100.0, y=1.75):
    length, width = (4.5, 1.8) if vclass is VehicleClass.CAR else (12.0, 2.5)
    return VehicleTrack(
        id=tid, vclass=vclass, length=length, width=width,
        states=[KinematicState(frame=0, x=x, y=y, vx=speed, vy=0.0, lane_id=1)])


def _event(min_ttc, location, tp=TypePair.CAR_CAR,
           cls=ConflictClass.LANE_CHANGE, pair=(1, 2)):
    return ConflictEvent(pair=pair, start_frame=0, end_frame=10,
                         min_ttc=min_ttc, min_ttc_frame=5, location=location,
                         lead_id=pair[0], lag_id=pair[1], type_pair=tp,
                         conflict_class=cls)


class TestSpeedDistribution:
    def test_counts_and_moments(self, site):
        tracks = [_one_state_track(1, VehicleClass.CAR, 20.2),
                  _one_state_track(2, VehicleClass.CAR, 20.7),
                  _one_state_track(3, VehicleClass.CAR, 22.5)]
        h = speed_distribution(Dataset(site=site, tracks=tracks),
                               VehicleClass.CAR, bin_width=1.0)
        assert h.total == 3
        assert sum(h.counts) == 3
        assert h.counts[h.bin_edges.index(20.0)] == 2
        assert h.mean == pytest.approx((20.2 + 20.7 + 22.5) / 3)

    def test_no_vehicles_of_class(self, site):
        tracks = [_one_state_track(1, VehicleClass.CAR, 20.0)]
        h = speed_distribution(Dataset(site=site, tracks=tracks),
                               VehicleClass.TRUCK)
        assert h.total == 0 and h.counts == [] and h.mean is None

    def test_bad_bin_width(self, site):
        with pytest.raises(ValidationError):
            speed_distribution(Dataset(site=site, tracks=[]),
                               VehicleClass.CAR, bin_width=0.0)

    def test_permutation_invariance(self, reference_dataset):
        base = speed_distribution(reference_dataset, VehicleClass.CAR)
        shuffled_tracks = list(reference_dataset.tracks)
        random.Random(0).shuffle(shuffled_tracks)
        shuffled = speed_distribution(
            Dataset(site=reference_dataset.site, tracks=shuffled_tracks),
            VehicleClass.CAR)
        assert base.bin_edges == shuffled.bin_edges
        assert base.counts == shuffled.counts
        assert base.mean == pytest.approx(shuffled.mean)
        assert base.std == pytest.approx(shuffled.std)


class TestSpatialSpeedMap:
    def test_cell_aggregation(self, site):
        tracks = [_one_state_track(1, VehicleClass.CAR, 20.0, x=1.0, y=1.0),
                  _one_state_track(2, VehicleClass.CAR, 30.0, x=1.5, y=1.5),
                  _one_state_track(3, VehicleClass.CAR, 10.0, x=5.0, y=1.0)]
        g = spatial_speed_map(Dataset(site=site, tracks=tracks), VehicleClass.CAR,
                              cell_size=2.0)
        assert g.cells[(0, 0)] == {"sum": 50.0, "count": 2}
        assert g.cells[(2, 0)] == {"sum": 10.0, "count": 1}

    def test_mass_conserved_under_refinement(self, reference_dataset):
        coarse = spatial_speed_map(reference_dataset, VehicleClass.TRUCK, 4.0)
        fine = spatial_speed_map(reference_dataset, VehicleClass.TRUCK, 2.0)
        total = lambda g: (sum(c["count"] for c in g.cells.values()),
                           sum(c["sum"] for c in g.cells.values()))
        nc, sc = total(coarse)
        nf, sf = total(fine)
        assert nc == nf
        assert sc == pytest.approx(sf)

    def test_fine_cells_nest_in_coarse(self, reference_dataset):
        coarse = spatial_speed_map(reference_dataset, VehicleClass.CAR, 4.0)
        fine = spatial_speed_map(reference_dataset, VehicleClass.CAR, 2.0)
        regrouped = {}
        for (col, row), cell in fine.cells.items():
            key = (col // 2, row // 2)
            agg = regrouped.setdefault(key, {"sum": 0.0, "count": 0})
            agg["sum"] += cell["sum"]
            agg["count"] += cell["count"]
        assert set(regrouped) == set(coarse.cells)
        for key in coarse.cells:
            assert regrouped[key]["count"] == coarse.cells[key]["count"]


class TestConflictSummary:
    def test_lane_change_only(self):
        events = [_event(1.0, (10, 1)),
                  _event(2.0, (20, 1)),
                  _event(1.5, (30, 1), cls=ConflictClass.REAR_END)]
        s = conflict_summary(events)
        assert s.total_events == 2
        assert s.per_pair[TypePair.CAR_CAR]["event_count"] == 2
        assert s.per_pair[TypePair.CAR_CAR]["mean_ttc"] == pytest.approx(1.5)
        assert s.per_pair[TypePair.TRUCK_TRUCK]["mean_ttc"] is None

    def test_empty(self):
        s = conflict_summary([])
        assert s.total_events == 0


class TestConflictPositionMap:
    def test_counts_and_filter(self):
        events = [_event(1.0, (1.0, 1.0)),
                  _event(2.0, (1.5, 1.5)),
                  _event(2.5, (9.0, 1.0), tp=TypePair.TRUCK_TRUCK)]
        g = conflict_position_map(events, cell_size=2.0)
        assert g.cells[(0, 0)]["count"] == 2
        assert min(g.cells[(0, 0)]["min_ttcs"]) == 1.0
        only_tt = conflict_position_map(events, TypePair.TRUCK_TRUCK, 2.0)
        assert list(only_tt.cells) == [(4, 0)]


def _bundle_equal(dir_a, dir_b):
    names_a = sorted(os.listdir(dir_a))
    names_b = sorted(os.listdir(dir_b))
    assert names_a == names_b
    for name in names_a:
        assert filecmp.cmp(os.path.join(dir_a, name),
                           os.path.join(dir_b, name), shallow=False), name


class TestRenderReport:
    def test_truck_percentage_one_decimal(self, site, tmp_path):
        tracks = (
            [_one_state_track(i + 1, VehicleClass.CAR, 20.0) for i in range(2512)]
            + [_one_state_track(i + 3000, VehicleClass.TRUCK, 18.0)
               for i in range(1346)])
        ds = Dataset(site=site, tracks=tracks)
        render_report(ds, [], ReportConfig(figures=False), str(tmp_path))
        payload = json.loads((tmp_path / "summary.json").read_text())
        assert payload["fleet"]["truck_percentage"] == 34.9

    def test_bundle_contents(self, reference_dataset, reference_events, tmp_path):
        written = render_report(reference_dataset, reference_events,
                                ReportConfig(svg=True), str(tmp_path))
        names = {os.path.basename(p) for p in written}
        assert {"summary.json", "speed_hist_car.csv", "speed_hist_truck.csv",
                "speed_grid_car.csv", "speed_grid_truck.csv",
                "conflict_positions.csv", "speed_distribution.png",
                "conflict_summary.png", "conflict_positions.svg"} <= names

    def test_deterministic_bundles(self, reference_dataset, reference_events, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        render_report(reference_dataset, reference_events, ReportConfig(svg=True), str(a))
        render_report(reference_dataset, reference_events, ReportConfig(svg=True), str(b))
        _bundle_equal(str(a), str(b))

    def test_empty_dataset_bundle(self, site, tmp_path):
        ds = Dataset(site=site, tracks=[])
        written = render_report(ds, [], ReportConfig(), str(tmp_path))
        payload = json.loads((tmp_path / "summary.json").read_text())
        assert payload["fleet"]["vehicles"] == 0
        assert payload["fleet"]["truck_percentage"] is None
        assert all(os.path.exists(p) for p in written)

    def test_filter_type_pair_in_positions(self, reference_dataset, reference_events,
                                           tmp_path):
        render_report(reference_dataset, reference_events,
                      ReportConfig(filter_type_pair=TypePair.TRUCK_TRUCK,
                                   figures=False), str(tmp_path))
        lines = (tmp_path / "conflict_positions.csv").read_text().splitlines()
        tt = [e for e in reference_events
              if e.type_pair is TypePair.TRUCK_TRUCK]
        assert sum(int(row.rsplit(",", 1)[1]) for row in lines[1:]) == len(tt)
