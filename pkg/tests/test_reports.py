import csv
import io
import json
import math

import pytest

from lowrank_bounds.reports import (
    CSV_COLUMNS,
    BoundReport,
    is_finite_report,
    report_from_json,
    report_from_row,
    rows_to_csv,
    sub_check,
)


def make(lhs=1.0, lower=None, upper=2.0, tol=1e-12, checks=None):
    ctx = {"checks": checks} if checks else {}
    if lower is None:
        return BoundReport.one_sided("thm2", lhs, upper, tol, ctx, m=4, n=3, k=1, p="inf", seed=9)
    return BoundReport.two_sided("thm2", lhs, lower, upper, tol, ctx, m=4, n=3, k=1, p=2, seed=9)


@pytest.mark.parametrize(
    "lhs,lower,upper,tol,expected",
    [
        (1.0, None, 2.0, 0.0, True),
        (2.0 + 1e-13, None, 2.0, 1e-12, True),
        (2.0 + 1e-11, None, 2.0, 1e-12, False),
        (1.0, 0.5, 2.0, 0.0, True),
        (0.5 - 1e-11, 0.5, 2.0, 1e-12, False),
        (0.5 - 1e-13, 0.5, 2.0, 1e-12, True),
    ],
)
def test_holds_definition(lhs, lower, upper, tol, expected):
    assert make(lhs, lower, upper, tol).holds is expected


def test_slack_and_violation():
    r = make(3.0, 1.0, 2.0, 0.0)
    assert r.slack == -1.0 and r.slack_lower == 2.0 and r.min_slack == -1.0
    assert r.violation == 1.0


def test_gated_sub_check_controls_verdict():
    bad = sub_check(2.0, 1.0, 0.0)
    assert not make(checks={"x": bad}).holds
    assert make(checks={"x": sub_check(2.0, 1.0, 0.0, gate=False)}).holds
    assert make(checks={"x": bad}).violation == 1.0
    assert not sub_check(0.0, 1.0, 0.0, lower=0.5)["holds"]


def test_meta_validation():
    with pytest.raises(TypeError):
        BoundReport.one_sided("x", 0, 1, 0, bogus=1)
    r = make().with_meta(seed=5, c=3)
    assert r.seed == 5 and r.c == 3


def test_csv_round_trip():
    reports = [make(), make(0.7, 0.5, 2.0, checks={"w": sub_check(1, 2, 0)})]
    text = rows_to_csv(reports, ["generated now"])
    assert text.startswith("# generated now\n")
    lines = [ln for ln in text.splitlines(True) if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("".join(lines))))
    assert tuple(rows[0]) == CSV_COLUMNS
    for row, orig in zip(rows, reports):
        back, holds, slack = report_from_row(row)
        assert back == orig and holds == orig.holds and slack == orig.min_slack


def test_json_round_trip():
    r = make(0.7, 0.5, 2.0)
    back, holds, slack = report_from_json(json.loads(r.to_json()))
    assert back == r and holds and slack == pytest.approx(0.2)


def test_bad_holds_column():
    row = make().to_row()
    row = {k: ("" if v is None else str(v)) for k, v in row.items()}
    row["holds"] = "maybe"
    with pytest.raises(ValueError, match="holds"):
        report_from_row(row)


def test_str_and_finiteness():
    assert "holds" in str(make()) and "FAILS" in str(make(5.0))
    assert is_finite_report(make()) and not is_finite_report(make(math.inf))
