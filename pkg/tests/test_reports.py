import numpy as np

from weakconv.reports import MODULI_COLUMNS, Report, format_cell


def test_cells_are_locale_free():
    assert format_cell(0.1) == "0.1"
    assert format_cell(True) == "true"
    assert format_cell(None) == ""
    assert format_cell(np.array([1.5, -2.0])) == "1.5 -2.0"


def test_csv_header_and_line_endings(tmp_path):
    rep = Report("r", [{"eps": 0.5, "value": 0.1, "bound_lower": None, "bound_upper": 0.2, "pass": True}])
    path = rep.write_csv(tmp_path / "sub" / "r.csv", MODULI_COLUMNS)
    data = path.read_bytes()
    assert data == b"eps,value,bound_lower,bound_upper,pass\n0.5,0.1,,0.2,true\n"


def test_floats_round_trip():
    x = 0.1 + 0.2
    assert float(format_cell(x)) == x
