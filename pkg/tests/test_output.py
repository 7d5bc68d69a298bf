import io
import json
import math

import pandas as pd

from annulus_restriction.logspace import LogReal
from annulus_restriction.output import OutputFormat, format_csv, logreal_columns, render


def test_logreal_columns():
    assert logreal_columns("lower", LogReal.one()) == {"lower_sign": 1, "lower_log": 0.0, "lower": 1.0}
    assert logreal_columns("T1", LogReal(-699.0))["T1"] > 0
    tiny = logreal_columns("cross", LogReal(-900.0, -1))
    assert tiny == {"cross_sign": -1, "cross_log": -900.0, "cross": None}


def test_csv_keeps_full_precision():
    value = 1 / 3
    text = render([{"a": -0.1, "value": value, "missing": None}], OutputFormat.csv)
    assert text.splitlines()[0] == "a,value,missing"
    frame = pd.read_csv(io.StringIO(text), float_precision="round_trip")
    assert frame["value"][0] == value
    assert format_csv(frame) == text


def test_json_nulls_for_non_finite():
    text = render([{"a": -0.1, "log": -math.inf, "missing": None, "name": "x"}], OutputFormat.json)
    assert json.loads(text) == [{"a": -0.1, "log": None, "missing": None, "name": "x"}]


def test_table_has_headers():
    text = render([{"b": 1.2, "verdict": "Conjectured"}], OutputFormat.table)
    assert "verdict" in text.splitlines()[0]
    assert "Conjectured" in text
