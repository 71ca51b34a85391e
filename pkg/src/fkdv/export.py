"""Flat-file outputs: CSV tables and JSON reports.

Floats are written with repr, the shortest decimal that round-trips to the
same binary64 value, so identical runs produce byte-identical files.
"""
from __future__ import annotations

import csv
import json
import logging
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from fkdv.errors import ConfigError
from fkdv.models import BranchPoint, BranchRun, CosineSeries, KernelTable, SteadyState
from fkdv.spectral import half_period_grid, to_grid

logger = logging.getLogger("fkdv.export")

KERNEL_CSV = "kernel_table.csv"
KERNEL_REPORT = "kernel_report.json"
BRANCH_CSV = "branch.csv"
BRANCH_METADATA = "branch_metadata.json"
DIAGNOSTICS_JSON = "diagnostics.json"
ASYMPTOTICS_JSON = "asymptotics.json"
LIMIT_WAVE = "limit_wave.json"
LIMIT_REPORT = "limit_report.json"
LIMIT_GRID = "limit_grid.csv"


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_rows(path: Path, header: list[str], rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    logger.info("Wrote %s", path)
    return path


def write_json(path: Path, payload) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    logger.info("Wrote %s", path)
    return path


def write_kernel_csv(path: Path, table: KernelTable) -> Path:
    """One row per grid point: x, K_P(x), K_P'(x)."""
    rows = zip(table.grid, table.values, table.derivative_values)
    return _write_rows(path, ["x", "kp", "kp_prime"], rows)


def write_report_json(path: Path, checks, **extra) -> Path:
    payload = {"checks": [c.to_dict() for c in checks], "passed": all(c.passed for c in checks)}
    payload.update(extra)
    return write_json(path, payload)


def write_branch_csv(path: Path, points: Sequence[BranchPoint]) -> Path:
    """Header s,mu,crest_gap,a0..aN; shorter rows are zero-padded to the largest N."""
    modes = max((p.modes for p in points), default=0)
    header = ["s", "mu", "crest_gap"] + [f"a{j}" for j in range(modes + 1)]

    def rows():
        for p in points:
            coeffs = np.zeros(modes + 1)
            coeffs[: p.modes + 1] = p.state.phi.coeffs
            yield [p.s, p.mu, p.crest_gap, *coeffs]

    return _write_rows(path, header, rows())


def write_branch_outputs(directory: Path, run: BranchRun) -> None:
    """Branch CSV, run metadata and per-point diagnostics for one run."""
    write_branch_csv(directory / BRANCH_CSV, run.points)
    write_json(directory / BRANCH_METADATA, run.to_metadata())
    write_json(directory / DIAGNOSTICS_JSON, [
        {
            "index": i,
            "s": p.s,
            "mu": p.mu,
            "flagged": p.flagged,
            "report": p.diagnostics.to_dict() if p.diagnostics else None,
        }
        for i, p in enumerate(run.points)
    ])


def load_branch_csv(path: Path, k: int | None = None) -> list[BranchPoint]:
    """Read a branch CSV back into points.

    The base wavenumber comes from `k`, else from the metadata file next to
    the CSV. Newton residuals are not stored and come back as NaN.
    """
    path = Path(path)
    if k is None:
        metadata = path.parent / BRANCH_METADATA
        k = int(json.loads(metadata.read_text(encoding="utf-8"))["k"]) if metadata.exists() else 1
    with path.open("r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, [])
        if header[:3] != ["s", "mu", "crest_gap"]:
            raise ConfigError(f"{path} is not a branch CSV (header {header[:3]})")
        points = []
        for row in reader:
            try:
                values = [float(v) for v in row]
            except ValueError as e:
                raise ConfigError(f"{path} line {reader.line_num}: {e}") from e
            state = SteadyState(CosineSeries(k, values[3:]), values[1])
            points.append(BranchPoint(state=state, s=values[0], newton_residual=float("nan"), crest_gap=values[2]))
    return points


def write_grid_csv(path: Path, phi: CosineSeries, points: int) -> Path:
    """Plot-ready samples x, phi(x) on the half period [0, pi/k]."""
    x = half_period_grid(phi.base_wavenumber, points)
    return _write_rows(path, ["x", "phi"], zip(x, to_grid(phi, points)))
