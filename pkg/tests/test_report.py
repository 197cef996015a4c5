import json

import pytest

from greens import audit_log
from greens.errors import SymbolError
from greens.report import Report, decay_per_level, level_minima, level_table, plot_levels, write_levels_csv

ROWS = [
    {"level": 1, "stream": "X", "class": "0", "min_valuation": 2, "nonzero_terms": 10},
    {"level": 1, "stream": "X", "class": "inf", "min_valuation": 3, "nonzero_terms": 8},
    {"level": 2, "stream": "X", "class": "1", "min_valuation": 4, "nonzero_terms": 7},
    {"level": 3, "stream": "X", "class": "2", "min_valuation": 6, "nonzero_terms": 5},
]


def make_report(**changes):
    values = dict(p=3, k=4, precision=30, working_precision=58, series_order=37, level_cutoff=18, branch="0",
                  divisor=[[9, [1, -1, -1], 0]])
    values.update(changes)
    return Report(**values)


def test_level_table_is_indexed_from_one():
    df = level_table(ROWS)
    assert list(df.index) == [1, 2, 3, 4]
    assert list(df.columns) == ["level", "stream", "class", "min_valuation", "nonzero_terms"]


def test_level_minima():
    minima = level_minima(level_table(ROWS))
    assert minima["min_valuation"].tolist() == [2, 4, 6]


def test_decay_per_level():
    assert decay_per_level(level_table(ROWS)) == 2.0
    assert decay_per_level(level_table(ROWS[:2])) is None
    assert decay_per_level(level_table([])) is None


def test_levels_csv_and_plot(tmp_path):
    df = level_table(ROWS)
    write_levels_csv(df, tmp_path / "levels.csv")
    assert (tmp_path / "levels.csv").read_text().splitlines()[1].startswith("1,1,X,0,2")
    plot_levels(df, str(tmp_path / "levels.html"))
    assert "plotly" in (tmp_path / "levels.html").read_text()


def test_text_report(tmp_path):
    report = make_report(target=[1, -4, -16], defect_residuals={"S:c1": 31}, agreement=25)
    text = report.to_text()
    assert "target: [1, -4, -16]\n" in text
    assert "defect_residuals.S:c1: 31\n" in text
    assert "degree_witness: -\n" in text
    assert "expected: \n" in text
    path = tmp_path / "run.txt"
    report.write(str(path))
    assert path.read_text() == text


def test_json_report(tmp_path):
    path = tmp_path / "run.json"
    make_report(agreement=25).write(str(path))
    data = json.loads(path.read_text())
    assert data["agreement"] == 25
    assert data["target"] is None
    assert list(tmp_path.iterdir()) == [path]


def test_stage_records():
    audit_log.reset()
    with audit_log.stage("degree") as fields:
        fields["passed"] = True
    with pytest.raises(SymbolError) as info:
        with audit_log.stage("assembly"):
            raise SymbolError("boom")
    assert info.value.stage == "assembly"
    assert str(info.value) == "[assembly] boom"
    frame = audit_log.records_frame()
    assert frame["stage"].tolist() == ["degree", "assembly"]
    assert frame["status"].tolist() == ["ok", "failed"]
    assert frame["detail"].tolist()[0] == "passed=True"
    audit_log.reset()
