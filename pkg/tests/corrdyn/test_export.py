import json

import numpy as np
import pytest

from corrdyn.schemas import CurveSample, CycleKind
from corrdyn.services.bundle import bundle_point_from_orbit, forward_orbit
from corrdyn.services.cycles import cycle_from_symbols
from corrdyn.services.export import (
    curve_header,
    cycle_to_dict,
    find_cached_cycle,
    read_cycles,
    read_points,
    write_bundle_points,
    write_c2,
    write_curve,
    write_cycles,
    write_points,
    write_torus,
)


@pytest.fixture
def fixed_cycle(circle_params):
    """Fixed point 1 of the circle case"""
    return cycle_from_symbols(circle_params, [0], 1)


def test_cycle_record_fields(circle_params, fixed_cycle):
    """Records carry the family, the word and the classification"""
    record = cycle_to_dict(fixed_cycle, circle_params)
    assert record["p"] == 6 and record["q"] == 2 and record["c"] == [0.0, 0.0]
    assert record["period"] == 1
    assert record["symbols"] == [0]
    assert record["kind"] == "repelling"


def test_cycles_file_is_filtered_by_family(tmp_path, circle_params, figure_params, fixed_cycle):
    """Reading with params keeps only matching records"""
    path = tmp_path / "cycles.jsonl"
    write_cycles(path, [fixed_cycle], circle_params)
    write_cycles(path, [fixed_cycle], figure_params, append=True)
    assert len(read_cycles(path)) == 2
    loaded = read_cycles(path, circle_params)
    assert len(loaded) == 1
    assert loaded[0].points == fixed_cycle.points
    assert loaded[0].kind == CycleKind.REPELLING
    lines = path.read_text(encoding="utf-8").splitlines()
    assert json.loads(lines[1])["c"] == [0.0, 0.2]


def test_find_cached_cycle(tmp_path, circle_params, fixed_cycle):
    """Lookup by family and word; a missing file is a miss"""
    path = tmp_path / "cache.jsonl"
    assert find_cached_cycle(path, circle_params, [0]) is None
    write_cycles(path, [fixed_cycle], circle_params)
    assert find_cached_cycle(path, circle_params, [0]).multiplier == fixed_cycle.multiplier
    assert find_cached_cycle(path, circle_params, [1]) is None
    assert find_cached_cycle(path, circle_params.with_c(0.1), [0]) is None


def test_points_csv(tmp_path):
    """Header z_re,z_im and 17 significant digits"""
    path = tmp_path / "points.csv"
    z = np.array([1 / 3 + 0.1j, -2.5 + 0j])
    write_points(path, z)
    lines = path.read_text().splitlines()
    assert lines[0] == "z_re,z_im"
    assert lines[1].split(",")[0] == "%.17g" % (1 / 3)
    assert np.array_equal(read_points(path), z)


def test_torus_and_c2_headers(tmp_path):
    """Solenoid clouds use t,disk_re,disk_im and z_re,z_im,w_re,w_im"""
    write_torus(tmp_path / "torus.csv", np.array([0.5]), np.array([0.1 + 0.2j]))
    write_c2(tmp_path / "c2.csv", [(1j, 0.5 + 0j)])
    assert (tmp_path / "torus.csv").read_text().splitlines()[0] == "t,disk_re,disk_im"
    c2 = (tmp_path / "c2.csv").read_text().splitlines()
    assert c2 == ["z_re,z_im,w_re,w_im", "0,1,0.5,0"]


def test_curve_file(tmp_path):
    """Metadata line, column header, one row per sample"""
    curve = CurveSample(
        tau=[0, 1],
        c=0.2j,
        samples=[(0.0, 1 + 0j), (0.5, 0.8 + 0.6j)],
        truncation=12,
        metadata={"eps": 0.3, "lambda": 0.5},
    )
    assert curve_header(curve) == "# tau=01, c=0+0.20000000000000001i, N=12, eps=0.29999999999999999, lambda=0.5"
    path = tmp_path / "curve.csv"
    write_curve(path, curve)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# tau=01")
    assert lines[1] == "t,z_re,z_im"
    assert len(lines) == 4


def test_bundle_points_jsonl(tmp_path, figure_params, small_bundle):
    """One JSON object per bundle point"""
    x = bundle_point_from_orbit(small_bundle, forward_orbit(figure_params, 1.0, [0, 1]))
    path = tmp_path / "bundle.jsonl"
    write_bundle_points(path, [x, x])
    records = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(records) == 2
    assert records[0]["base"] == [1.0, 0.0]
    assert records[0]["orbit"]["symbols"] == [0, 1]
    assert records[0]["direction"] == x.direction.value
