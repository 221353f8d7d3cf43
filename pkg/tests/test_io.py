import json
import os
from datetime import date

import numpy as np
import pytest

import config
from lib import io_
from lib import quaternions as qt
from lib import scanners as scan
from lib.errors import SliceRegError, SpecError


def test_config_is_read_as_a_dict():
    env = io_.get_config()
    assert env["DEFAULT_TOL"] == 1e-9
    assert env["CHUNK_SIZE"] == 8
    assert "os" not in env and "max_workers" not in env
    assert set(io_.get_config(config)) < set(env)


def test_polynomial_spec():
    f = io_.parse_function_spec('{"type": "polynomial", "coeffs": [[0, 0, 1, 0], [1, 0, 0, 0]]}')
    assert np.allclose(f(qt.I), qt.I + qt.J)


def test_twoslice_spec(rng, function_root):
    f = io_.load_function_spec(os.path.join(function_root, "slice_constant.json"))
    units = qt.random_units(rng, 10)
    x = qt.from_slice_coords(rng.uniform(-1, 1, 10), rng.uniform(0.1, 1, 10), units)
    assert np.allclose(f(x), qt.ONE - qt.quat_mul(units, qt.I))


def test_product_spec_matches_the_gallery(rng, function_root, h):
    f = io_.load_function_spec(os.path.join(function_root, "h.json"))
    x = h.domain.random_points(rng, 20)
    assert f.name == "h"
    assert np.allclose(f(x), h(x))


@pytest.mark.parametrize("name", ["injective", "square", "delta_i", "cubic_plus_xk"])
def test_shipped_specs_load(function_root, name):
    f = io_.load_function_spec(os.path.join(function_root, name + ".json"))
    assert f(qt.from_slice_coords(0.1, 0.5, qt.K)).shape == (4,)


def test_complexified_coefficients():
    spec = {"type": "polynomial", "coeffs": [{"real": [1, 0, 0, 0], "imag": [0, -1, 0, 0]}]}
    f = io_.function_from_dict(spec)
    assert np.allclose(f(qt.J), qt.ONE - qt.quat_mul(qt.J, qt.I))
    assert not f.domain.intersects_real


def test_bad_unit_names_its_field():
    spec = '{"type": "twoslice", "J": [0, 2, 0, 0], "K": [0, -1, 0, 0], "gJ": [1, 0, 0, 0], "gK": [0, 0, 0, 0]}'
    with pytest.raises(SpecError) as e:
        io_.parse_function_spec(spec)
    assert e.value.field == "J"


@pytest.mark.parametrize("text, field", [
    ('{"type": "polynomial", "coeffs": [[0, 1]', "json"),
    ('{"type": "rational"}', "type"),
    ('{"type": "polynomial", "coeffs": []}', "coeffs"),
    ('{"type": "polynomial", "coeffs": [[0, "a", 0, 0]]}', "coeffs[0]"),
    ('{"type": "twoslice", "J": [0, 1, 0, 0]}', "K"),
    ('{"type": "twoslice", "J": [0, 1, 0, 0], "K": [0, 1, 0, 0], "gJ": [1, 0, 0, 0], "gK": [0, 0, 0, 0]}', "K"),
    ('{"type": "constant", "value": [1, 0, 0, 0], "domain": {"alpha": [1, 0], "beta": [0, 1]}}', "domain"),
    ('[1, 2]', "spec"),
])
def test_malformed_specs(text, field):
    with pytest.raises(SpecError) as e:
        io_.parse_function_spec(text)
    assert e.value.field == field


def test_spec_round_trip(rng, injective):
    spec = io_.function_to_spec(injective)
    f = io_.function_from_dict(json.loads(json.dumps(spec)))
    x = injective.domain.random_points(rng, 10)
    assert np.allclose(f(x), injective(x))


def test_export_s_h_cloud(tmp_path, h, tiny_grid):
    cloud = scan.zeros_to_cloud(h, scan.scan_zeros(h, tiny_grid), tiny_grid)
    path = io_.export_cloud(cloud, str(tmp_path / "s_h.csv"))
    back = io_.read_cloud(path)
    row = back.frame[(back.frame.alpha == 0.0) & (back.frame.beta == 1.0)]
    assert np.allclose(row[["ux", "uy", "uz"]].to_numpy()[0], [0.0, -1.0, 0.0])
    assert back.metadata["function"] == "h"
    assert os.path.exists(path + ".meta.json")


def test_export_is_byte_stable(tmp_path, h, tiny_grid):
    paths = []
    for name in ("a", "b"):
        cloud = scan.zeros_to_cloud(h, scan.scan_zeros(h, tiny_grid), tiny_grid)
        paths.append(io_.export_cloud(cloud, str(tmp_path / f"{name}.csv")))
    with open(paths[0], "rb") as a, open(paths[1], "rb") as b:
        assert a.read() == b.read()


def test_empty_cloud_is_header_only(tmp_path):
    path = io_.export_cloud(scan.SurfaceCloud(), str(tmp_path / "empty.csv"))
    with open(path) as f:
        assert f.read() == "alpha,beta,ux,uy,uz,kind\n"


def test_json_export_round_trip(tmp_path, h, tiny_grid):
    cloud = scan.singular_scan(h, tiny_grid)
    path = io_.export_cloud(cloud, str(tmp_path / "degenerate.json"), "json")
    back = io_.read_cloud(path)
    assert back.frame.equals(cloud.frame)
    assert back.provenance == cloud.provenance
    assert back.metadata["function"] == "h"


def test_unknown_export_format(tmp_path):
    with pytest.raises(SliceRegError):
        io_.export_cloud(scan.SurfaceCloud(), str(tmp_path / "x.parquet"), "parquet")


def test_write_log_appends_to_the_days_file(tmp_path):
    day = date(2024, 6, 11)
    for n in range(2):
        record = io_.RunRecord("scan-zeros", "fn.json", 0, 0.1, io_.timestamp(), {"rows": n})
        path = io_.write_log(record, str(tmp_path), day)
    assert os.path.basename(path) == "slicereg_log_2024-06-11.json"
    with open(path) as f:
        logged = json.load(f)
    assert [r["outcome"] for r in logged] == [{"rows": 0}, {"rows": 1}]
    assert logged[0]["command"] == "scan-zeros" and logged[0]["exit_code"] == 0


def test_each_day_gets_its_own_log(tmp_path):
    record = io_.RunRecord("verify", None, 0, 1.0, io_.timestamp())
    first = io_.write_log(record, str(tmp_path), date(2024, 6, 11))
    second = io_.write_log(record, str(tmp_path), date(2024, 6, 12))
    assert first != second
    with open(second) as f:
        assert len(json.load(f)) == 1


def test_old_logs_are_pruned(tmp_path):
    record = io_.RunRecord("verify", None, 0, 1.0, io_.timestamp())
    old = io_.write_log(record, str(tmp_path), date(2024, 1, 1))
    (tmp_path / "notes.json").write_text("{}")
    recent = io_.write_log(record, str(tmp_path), date(2024, 6, 11))
    assert not os.path.exists(old)
    assert os.path.exists(recent)
    assert os.path.exists(tmp_path / "notes.json")


def test_unreadable_log_starts_over(tmp_path):
    day = date(2024, 6, 11)
    path = io_.log_path(day, str(tmp_path))
    with open(path, "w") as f:
        f.write("{not json")
    io_.write_log(io_.RunRecord("eval", "h.json", 2, 0.0, io_.timestamp()), str(tmp_path), day)
    with open(path) as f:
        assert [r["exit_code"] for r in json.load(f)] == [2]


def test_write_json_handles_numpy(tmp_path):
    path = io_.write_json({"value": np.array([1.0, 2.0]), "flag": np.bool_(True)}, str(tmp_path / "out.json"))
    with open(path) as f:
        assert json.load(f) == {"flag": True, "value": [1.0, 2.0]}
