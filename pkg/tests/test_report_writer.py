# tests/test_report_writer.py
"""
JSON and CSV artefacts.
"""

import json
import math

import numpy as np
import pytest

from src.utils.report_writer import ReportWriter, format_cell, json_safe


class Table:
    def csv_header(self):
        return ["j", "value", "ok"]

    def csv_rows(self):
        return [[0, 0.1, True], [1, math.inf, False]]


class TestJsonSafe:
    def test_numpy_values(self):
        data = json_safe({"a": np.arange(3), "b": np.float64(0.5), "c": np.bool_(True), 1: np.int64(4)})
        assert data == {"a": [0, 1, 2], "b": 0.5, "c": True, "1": 4}

    @pytest.mark.parametrize("value, text", [(math.inf, "inf"), (-math.inf, "-inf"), (math.nan, "nan")])
    def test_non_finite(self, value, text):
        assert json_safe([value]) == [text]


class TestFormatCell:
    def test_round_trip_precision(self):
        assert float(format_cell(0.1 + 0.2)) == 0.1 + 0.2

    def test_special_values(self):
        assert format_cell(True) == "true"
        assert format_cell(None) == ""
        assert format_cell(-math.inf) == "-inf"


class TestReportWriter:
    """Files below the output directory."""

    def test_json_layout(self, tmp_path):
        writer = ReportWriter(tmp_path / "out", command="quadratic")
        path = writer.write_json("result.json", {"z": 1.0, "a": [np.float64(2.0)]}, {"seed": 3})
        payload = json.loads(path.read_text(encoding="utf-8"))
        assert payload["result"] == {"a": [2.0], "z": 1.0}
        assert payload["metadata"]["command"] == "quadratic"
        assert payload["metadata"]["seed"] == 3
        assert "created" in payload["metadata"]
        assert writer.written == [path]

    def test_results_are_byte_identical(self, tmp_path):
        first = ReportWriter(tmp_path / "a").write_json("r.json", {"x": 0.1, "y": {"b": 1, "a": 2}})
        second = ReportWriter(tmp_path / "b").write_json("r.json", {"y": {"a": 2, "b": 1}, "x": 0.1})
        load = lambda p: json.loads(p.read_text(encoding="utf-8"))["result"]  # noqa: E731
        assert load(first) == load(second)
        text = first.read_text(encoding="utf-8")
        assert text.index('"a"') < text.index('"b"')

    def test_table(self, tmp_path):
        path = ReportWriter(tmp_path).write_table("table.csv", Table())
        assert path.read_text(encoding="utf-8").splitlines() == ["j,value,ok", "0,0.10000000000000001,true", "1,inf,false"]
        assert not list(tmp_path.glob("*.tmp"))
