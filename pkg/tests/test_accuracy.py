import csv

import numpy as np
import pytest

import oracles
from esvc import accuracy
from esvc.ellipse import calibrate_compensation, make_arc


@pytest.fixture(scope="module")
def sweeps():
    return accuracy.reference_sweeps()


def test_grid_and_exact_column(sweeps):
    sw = sweeps[1]
    n = 1024
    assert len(sw.theta) == n - 1
    assert sw.theta[0] == pytest.approx(np.pi / 2 / n) and sw.theta[-1] < np.pi / 2
    r_a, r_b = accuracy.REFERENCE_AXES["EA2"]
    for i in (0, 300, 700, n - 2):
        assert sw.exact[i] == pytest.approx(oracles.ellipse_length(r_a, r_b, sw.lam[i]), abs=1e-12)


def test_circle_has_zero_formula_error():
    arc = make_arc(0.05, 0.05)
    sw = accuracy.sweep(arc, calibrate_compensation(arc), 256, "c")
    s = accuracy.summarize(sw)
    assert s["approx"] == (0.0, 0.0) or max(map(abs, s["approx"])) < 1e-10
    assert max(map(abs, s["comp"])) < 1e-10
    assert s["chord"][0] < 0.0


def test_minimum_grid():
    arc = make_arc(0.05, 0.04)
    with pytest.raises(ValueError):
        accuracy.sweep(arc, calibrate_compensation(arc), 64)


def test_signed_extremum():
    assert accuracy.signed_extremum([0.5, -2.0, 1.9]) == -2.0
    with pytest.raises(ValueError):
        accuracy.signed_extremum([])


def test_labels_follow_boundary_angle(sweeps):
    assert [accuracy.reference_label(sw.lambda_star) for sw in sweeps] == ["EA3", "EA2", "EA1"]
    notes = accuracy.swap_note(sweeps)
    assert len(notes) == 2 and "EA3" in notes[0]


def _bands():
    out = []
    for arc_id, label in (("EA1", "EA3"), ("EA2", "EA2"), ("EA3", "EA1")):
        for est in accuracy.ESTIMATORS:
            for j, stat in enumerate(("max", "mean")):
                tol = 0.15 if stat == "mean" else (0.5 if est == "chord" else 0.3)
                marks = ()
                if (arc_id, est, stat) == ("EA1", "comp", "mean"):
                    marks = pytest.mark.xfail(strict=True, reason="calibrated correction leaves +0.09% mean vs -0.07% quoted")
                out.append(pytest.param(arc_id, label, est, j, tol, marks=marks, id=f"{arc_id}-{est}-{stat}"))
    return out


@pytest.mark.parametrize("arc_id,label,est,j,tol", _bands())
def test_reference_bands(sweeps, arc_id, label, est, j, tol):
    sw = {s.arc_id: s for s in sweeps}[arc_id]
    got = accuracy.summarize(sw)[est][j]
    want = accuracy.REFERENCE_TABLE[label][est][j]
    assert abs(got - want) <= tol, (got, want)


def test_report_round_trip(tmp_path, sweeps):
    csv_path, summary = accuracy.report(sweeps, tmp_path / "sweep.csv", ["run a"])
    back = accuracy.read_sweeps(csv_path)
    assert back == sweeps
    for a, b in zip(back, sweeps):
        for est in accuracy.ESTIMATORS:
            np.testing.assert_array_equal(a.err(est), b.err(est))
    lines = summary.read_text().splitlines()
    assert lines[0] == "# run a"
    rows = list(csv.reader(l for l in lines if not l.startswith("#")))
    assert len(rows[0]) == 1 + 9
    assert [r[0] for r in rows[1:]] == ["lambda_star", "max_pct", "mean_pct"]
    assert float(rows[2][1]) == accuracy.summarize(sweeps[0])["chord"][0]


def test_report_is_byte_stable(tmp_path, sweeps):
    a, _ = accuracy.report(sweeps, tmp_path / "a.csv")
    b, _ = accuracy.report(accuracy.reference_sweeps(), tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()


def test_read_rejects_foreign_csv(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        accuracy.read_sweeps(p)
