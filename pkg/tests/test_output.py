"""Artifact writers: exact float round-trips, JSON-safe conversion, SVG."""

import csv
import json
import math
from dataclasses import dataclass

import numpy as np
import pytest

from channel_spectra.output import (
    format_value,
    jsonable,
    write_band_svg,
    write_csv,
    write_json,
)


def test_format_value_round_trips_floats():
    for v in (1.0 / 3.0, 0.1, 5e-324, 1e308, -0.0):
        assert float(format_value(v)) == v
    assert format_value(np.float64(0.25)) == "0.25"
    assert format_value(7) == "7"
    assert format_value(np.int64(-3)) == "-3"
    assert format_value("label") == "label"


def test_jsonable_scalars_and_specials():
    assert jsonable(True) is True
    assert jsonable(None) is None
    assert jsonable(math.inf) == "inf"
    assert jsonable(-math.inf) == "-inf"
    assert jsonable(math.nan) == "nan"
    assert jsonable(np.float64(1.5)) == 1.5
    assert jsonable(np.int32(4)) == 4
    assert jsonable(2.0 + 3.0j) == {"re": 2.0, "im": 3.0}


def test_jsonable_containers_and_dataclasses():
    @dataclass(frozen=True)
    class Inner:
        value: float
        flags: tuple

    @dataclass(frozen=True)
    class Outer:
        name: str
        inner: Inner
        arr: np.ndarray

    outer = Outer("run", Inner(math.inf, (1, 2)), np.array([0.5, 1.5]))
    got = jsonable(outer)
    assert got == {
        "name": "run",
        "inner": {"value": "inf", "flags": [1, 2]},
        "arr": [0.5, 1.5],
    }
    assert jsonable({3: "x"}) == {"3": "x"}
    # the result must always be JSON-encodable
    json.dumps(got)


def test_write_csv_round_trip(tmp_path):
    path = tmp_path / "table.csv"
    rows = [(0.1, 1, "a"), (2.0 / 3.0, -2, "b")]
    write_csv(path, ["x", "n", "tag"], rows)
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        back = list(reader)
    assert reader.fieldnames == ["x", "n", "tag"]
    assert float(back[0]["x"]) == 0.1
    assert float(back[1]["x"]) == 2.0 / 3.0
    assert back[1]["n"] == "-2"


def test_write_json_sorted_and_newline_terminated(tmp_path):
    path = tmp_path / "report.json"
    write_json(path, {"b": 1.0, "a": math.inf})
    text = path.read_text()
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": "inf", "b": 1.0}


def test_write_json_creates_parent_directories(tmp_path):
    path = tmp_path / "deep" / "nested" / "report.json"
    write_json(path, [1, 2])
    assert json.loads(path.read_text()) == [1, 2]


def test_write_band_svg(tmp_path):
    path = tmp_path / "bands.svg"
    theta = np.linspace(-0.5, 0.5, 9)
    bands = np.vstack([5.0 + theta**2, 7.0 + 0.5 * np.cos(2 * np.pi * theta)])
    write_band_svg(path, theta, bands, ceiling=9.0, gaps=[(6.0, 6.5)])
    text = path.read_text()
    assert text.startswith("<svg")
    assert text.count("<polyline") == 2
    assert "#fde2e2" in text  # shaded gap rectangle
    assert "theta" in text and "energy" in text


def test_write_band_svg_validates_shape(tmp_path):
    with pytest.raises(ValueError):
        write_band_svg(tmp_path / "bad.svg", np.linspace(0, 1, 5), np.zeros((2, 4)))
