"""Field serialization: binary roundtrip, header content, CSV export."""

import json
import struct

import numpy as np
import pytest

import defectgeom as dg
from defectgeom.forms import ANTISYM, FormField, GridSpec


@pytest.fixture
def sample_field():
    grid = GridSpec([(0, 1.0), (-1.0, 1.0), (0, 0.5)], [4, 6, 5])
    rng = np.random.default_rng(42)
    coeffs = rng.normal(size=(3, 3) + grid.resolution)
    return FormField(grid, 1, ANTISYM, coeffs)


def test_roundtrip_bit_exact(tmp_path, sample_field):
    path = tmp_path / "field.bin"
    dg.write_field(path, sample_field)
    back = dg.read_field(path)
    assert back.grid == sample_field.grid
    assert back.degree == sample_field.degree
    assert back.value_type == sample_field.value_type
    assert np.array_equal(back.coeffs, sample_field.coeffs)


def test_header_contents(tmp_path, sample_field):
    path = tmp_path / "field.bin"
    dg.write_field(path, sample_field)
    raw = path.read_bytes()
    assert raw[:8] == b"DGFF0001"
    (hlen,) = struct.unpack("<Q", raw[8:16])
    header = json.loads(raw[16:16 + hlen])
    assert header["dim"] == 3
    assert header["degree"] == 1
    assert header["valueType"] == "antisym"
    assert header["resolution"] == [4, 6, 5]
    assert header["componentOrder"] == [[0], [1], [2]]
    assert header["frameOrder"] == [[1, 0], [2, 0], [2, 1]]
    payload = raw[16 + hlen:]
    assert len(payload) == sample_field.coeffs.size * 8
    # little-endian float64, C-order, frame outermost
    first = struct.unpack("<d", payload[:8])[0]
    assert first == sample_field.coeffs.flat[0]


def test_write_determinism(tmp_path, sample_field):
    p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
    dg.write_field(p1, sample_field)
    dg.write_field(p2, sample_field)
    assert p1.read_bytes() == p2.read_bytes()


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "junk.bin"
    path.write_bytes(b"NOTAFILE" + b"\x00" * 64)
    with pytest.raises(ValueError, match="magic"):
        dg.read_field(path)


def test_truncated_payload_rejected(tmp_path, sample_field):
    path = tmp_path / "field.bin"
    dg.write_field(path, sample_field)
    raw = path.read_bytes()
    path.write_bytes(raw[:-16])
    with pytest.raises(ValueError, match="payload"):
        dg.read_field(path)


def test_csv_export(tmp_path):
    grid = GridSpec([(0, 1.0), (0, 2.0)], [4, 4])
    X, Y = grid.meshgrid()
    f = FormField(grid, 1, "scalar", np.stack([X, Y * 2]))
    path = tmp_path / "f.csv"
    dg.write_csv(path, f)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "x,y,dx,dy"
    assert len(lines) == 1 + 16
    row = [float(v) for v in lines[1].split(",")]
    assert row[0] == grid.axis_centers(0)[0]
    assert row[1] == grid.axis_centers(1)[0]
    assert row[2] == row[0] and row[3] == 2 * row[1]


def test_csv_determinism(tmp_path, sample_field):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    dg.write_csv(p1, sample_field)
    dg.write_csv(p2, sample_field)
    assert p1.read_bytes() == p2.read_bytes()
