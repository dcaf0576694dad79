import json
import math

import numpy as np
import pytest

from dominter.results import ResultTable


@pytest.fixture
def table():
    t = ResultTable(
        ["scenario", "d_db", "p_exact", "within_ci", "count"],
        metadata={"command": "compare", "master_seed": {"k1": 20080901}, "truncated": False},
    )
    t.add_row(["k1", 40.0, 1 - np.exp(-1), True, np.int64(7)])
    t.add_row(["k1", 42.0, np.nan, np.bool_(False), 0])
    t.add_row(["k1", 1.0 / 3.0, None, True, 2])
    return t


def test_csv_round_trip(table):
    text = table.to_csv()
    assert text.startswith("# command: ")
    back = ResultTable.loads(text)
    assert back.columns == table.columns
    assert back.metadata == table.metadata
    assert back.column("d_db") == [40.0, 42.0, 1.0 / 3.0]
    assert back.column("p_exact")[0] == 1 - np.exp(-1)
    assert math.isnan(back.column("p_exact")[1])
    assert math.isnan(back.column("p_exact")[2])
    assert back.column("within_ci") == [True, False, True]
    assert back.column("count") == [7.0, 0.0, 2.0]


def test_records_round_trip(table, tmp_path):
    path = tmp_path / "table.json"
    table.write(path, "records")
    doc = json.loads(path.read_text())
    assert doc["records"][1]["p_exact"] is None
    assert doc["records"][0]["within_ci"] is True
    assert doc["metadata"]["master_seed"] == {"k1": 20080901}

    back = ResultTable.read(path)
    assert len(back) == 3
    assert back.records()[0]["p_exact"] == 1 - np.exp(-1)
    assert back.column("p_exact")[1:] == [None, None]


def test_probability_columns_are_checked():
    t = ResultTable(["d_db", "p_total"])
    t.add_row([1.0, 0.0])
    t.add_row([2.0, 1.0])
    with pytest.raises(ValueError, match="p_total"):
        t.add_row([3.0, 1.5])
    with pytest.raises(ValueError):
        t.add_row([3.0, -1e-9])
    # only p_ columns are probabilities
    ResultTable(["ratio"], [[1.5]])


def test_row_length():
    t = ResultTable(["a", "b"])
    with pytest.raises(AssertionError):
        t.add_row([1.0])


def test_unknown_format(table):
    with pytest.raises(ValueError, match="csv or records"):
        table.dumps("xml")


def test_metadata_arrays():
    t = ResultTable(["x"], metadata={"grid": np.array([1.0, np.nan])})
    assert json.loads(t.to_records())["metadata"]["grid"] == [1.0, None]


def test_numeric_looking_labels_stay_text():
    t = ResultTable(["scenario", "d_db"], [["1", 40.0], ["2e3", 42.0], ["true", 44.0]])
    back = ResultTable.loads(t.to_csv())
    assert back.column("scenario") == ["1", "2e3", "true"]
    assert back.column("d_db") == [40.0, 42.0, 44.0]
    assert "text_columns" not in back.metadata
