import csv
import json

import numpy as np
import pytest

from fkdv.export import (
    BRANCH_CSV,
    BRANCH_METADATA,
    DIAGNOSTICS_JSON,
    load_branch_csv,
    write_branch_csv,
    write_branch_outputs,
    write_grid_csv,
    write_kernel_csv,
    write_report_json,
)
from fkdv.errors import ConfigError
from fkdv.kernel import build_kernel_table
from fkdv.models import BranchPoint, BranchRun, CosineSeries, MultiplierSymbol, PropertyCheck, SteadyState


def _read_rows(path):
    with path.open(newline="") as f:
        return list(csv.reader(f))


def _make_run(k: int = 1) -> BranchRun:
    points = [
        BranchPoint(SteadyState(CosineSeries(k, [-0.001, 0.05]), 0.499), 0.05, 1e-13, 0.4),
        BranchPoint(SteadyState(CosineSeries(k, [-0.004, 0.1, 0.008, 0.0004]), 0.497), 0.1, 1e-13, 0.35),
    ]
    return BranchRun(
        alpha=2.0, k=k, points=points, stopped_reason="max_points",
        modes=3, newton_tol=1e-11, stop_crest_gap=1e-3,
    )


def test_kernel_csv(tmp_path):
    table = build_kernel_table(MultiplierSymbol(2.0), 16, 128)
    rows = _read_rows(write_kernel_csv(tmp_path / "kernel.csv", table))
    assert rows[0] == ["x", "kp", "kp_prime"]
    assert len(rows) == 17
    # repr keeps every bit
    assert float(rows[5][1]) == table.values[4]


def test_report_json(tmp_path):
    checks = [PropertyCheck("positivity", True, 0.04), PropertyCheck("evenness", False, -1e-12)]
    path = write_report_json(tmp_path / "nested" / "report.json", checks, alpha=2.0)
    data = json.loads(path.read_text())
    assert data["passed"] is False
    assert data["alpha"] == 2.0
    assert [c["check"] for c in data["checks"]] == ["positivity", "evenness"]


def test_branch_csv_pads_to_largest_mode_count(tmp_path):
    rows = _read_rows(write_branch_csv(tmp_path / BRANCH_CSV, _make_run().points))
    assert rows[0] == ["s", "mu", "crest_gap", "a0", "a1", "a2", "a3"]
    assert rows[1][5:] == ["0.0", "0.0"]
    assert len(rows) == 3


def test_branch_outputs_reload(tmp_path):
    run = _make_run(k=2)
    write_branch_outputs(tmp_path, run)
    assert json.loads((tmp_path / BRANCH_METADATA).read_text())["k"] == 2
    assert len(json.loads((tmp_path / DIAGNOSTICS_JSON).read_text())) == 2

    points = load_branch_csv(tmp_path / BRANCH_CSV)
    assert [p.state.k for p in points] == [2, 2]
    assert points[1].mu == run.points[1].mu
    assert np.array_equal(points[1].state.phi.coeffs, run.points[1].state.phi.coeffs)
    assert np.isnan(points[0].newton_residual)


def test_load_rejects_other_csv(tmp_path):
    path = tmp_path / "other.csv"
    path.write_text("x,phi\n0.0,1.0\n")
    with pytest.raises(ConfigError, match="not a branch CSV"):
        load_branch_csv(path, k=1)


def test_load_rejects_empty_and_garbled_csv(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(ConfigError):
        load_branch_csv(empty, k=1)
    garbled = tmp_path / "garbled.csv"
    garbled.write_text("s,mu,crest_gap,a0\n0.1,0.49,oops,0.0\n")
    with pytest.raises(ConfigError, match="line 2"):
        load_branch_csv(garbled, k=1)


def test_grid_csv(tmp_path):
    phi = CosineSeries(1, [0.0, 1.0])
    rows = _read_rows(write_grid_csv(tmp_path / "grid.csv", phi, 8))
    assert rows[0] == ["x", "phi"]
    assert len(rows) == 10
    assert float(rows[1][1]) == 1.0
    assert float(rows[-1][0]) == pytest.approx(np.pi)
