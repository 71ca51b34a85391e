"""Numerical checks of the a-priori properties of traveling waves.

Every check is a pure function of its inputs and returns a PropertyCheck
whose margin is the signed distance to the inequality (positive means
satisfied). Pointwise checks run on 8N samples per period.
"""
from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from fkdv.config import DiagnosticsConfig
from fkdv.errors import InsufficientModesError, WindowTooNarrowError
from fkdv.models import BranchPoint, DiagnosticsReport, PropertyCheck, SteadyState
from fkdv.spectral import (
    derivative_on_grid,
    eval_series,
    holder_proxy,
    second_derivative_series,
    shift_half_period,
    to_grid,
)

logger = logging.getLogger("fkdv.diagnostics")

POINT_CHECKS = (
    "apriori_bounds",
    "linf_bound",
    "monotone_half_period",
    "speed_window",
    "trough_gap",
    "smoothness_proxy",
)


def inequality_slack(newton_tol: float, phi_norm: float, factor: float = 10.0) -> float:
    return factor * newton_tol * (1.0 + phi_norm)


def crest_position(state: SteadyState) -> float:
    """0 for waves with a_1 >= 0, otherwise the half-period point pi/k."""
    a1 = state.phi.coeffs[1] if state.modes >= 1 else 0.0
    return 0.0 if a1 >= 0 else np.pi / state.k


def crest_gap(state: SteadyState) -> float:
    return state.mu - eval_series(state.phi, crest_position(state))


def align_crest(state: SteadyState) -> SteadyState:
    """Translate by half a period when the crest sits at pi/k."""
    if crest_position(state) == 0.0:
        return state
    return SteadyState(shift_half_period(state.phi), state.mu)


def _points(state: SteadyState, per_period: int) -> int:
    return max(per_period * max(state.modes, 1) // 2, 8)


def _samples(state: SteadyState, per_period: int) -> np.ndarray:
    return to_grid(state.phi, _points(state, per_period))


def check_apriori_bounds(state: SteadyState, slack: float = 0.0, per_period: int = 8) -> PropertyCheck:
    """Min/max bounds against 2(mu - 1).

    The minimum must lie between 0 and 2(mu - 1); the maximum must lie
    outside the open interval between them, phi_M (phi_M/2 - (mu - 1)) >= 0.
    """
    values = _samples(state, per_period)
    phi_m, phi_big = float(values.min()), float(values.max())
    c = 2.0 * (state.mu - 1.0)
    lo, hi = (0.0, c) if state.mu > 1 else (c, 0.0)
    min_margin = min(phi_m - lo, hi - phi_m)
    max_margin = max(phi_big - hi, lo - phi_big)
    margin = min(min_margin, max_margin)
    return PropertyCheck(
        "apriori_bounds", margin >= -slack, margin,
        f"min={phi_m:.6e} max={phi_big:.6e} 2(mu-1)={c:.6e}",
    )


def check_linf_bound(state: SteadyState, slack: float = 0.0, per_period: int = 8) -> PropertyCheck:
    """sup |phi| <= 2(mu + ||K||_1) with ||K||_1 = m(0) = 1."""
    sup = float(np.max(np.abs(_samples(state, per_period))))
    bound = 2.0 * (state.mu + 1.0)
    margin = bound - sup
    return PropertyCheck("linf_bound", margin >= -slack, margin, f"sup|phi|={sup:.6e} bound={bound:.6e}")


def _resolution_floor(state: SteadyState, slope: float) -> float:
    return 4.0 * np.pi / (state.k * max(state.modes, 1)) * slope


def check_monotone_half_period(state: SteadyState, slack: float = 0.0, per_period: int = 8) -> PropertyCheck:
    """phi' < 0 and phi < mu inside (0, pi/k); phi''(0) < 0 when resolvable."""
    if state.phi.is_trivial():
        return PropertyCheck(
            "monotone_half_period", True, 0.0, "trivial state", applicable=False,
        )
    state = align_crest(state)
    points = _points(state, per_period)
    dphi = derivative_on_grid(state.phi, points)[1:-1]
    values = to_grid(state.phi, points)[1:-1]
    curvature = eval_series(second_derivative_series(state.phi), 0.0)
    gap = state.mu - eval_series(state.phi, 0.0)

    margin = min(-float(dphi.max()), float(np.min(state.mu - values)))
    detail = f"max phi'={dphi.max():.3e} phi''(0)={curvature:.6e}"
    if gap > _resolution_floor(state, float(np.max(np.abs(dphi)))):
        margin = min(margin, -curvature)
    else:
        detail += " (curvature below resolution floor, not checked)"
    return PropertyCheck("monotone_half_period", margin >= -slack, margin, detail)


def check_speed_window(branch: Sequence[BranchPoint | SteadyState]) -> PropertyCheck:
    """0 < mu < 1 at every point; the minimum speed is the empirical floor."""
    if not branch:
        raise ValueError("speed window needs a nonempty branch")
    mus = np.array([p.mu for p in branch])
    margin = float(min(mus.min(), 1.0 - mus.max()))
    return PropertyCheck(
        "speed_window", margin > 0, margin,
        f"min mu={mus.min():.6e} max mu={mus.max():.6e}",
    )


def check_trough_gap(state: SteadyState, lam: float, slack: float = 0.0) -> PropertyCheck:
    """mu - phi(trough) >= lambda*pi.

    For k > 1, `lam` must come from the kernel of the rescaled symbol m(k xi).
    """
    state = align_crest(state)
    trough = eval_series(state.phi, np.pi / state.k)
    margin = state.mu - trough - lam * np.pi
    return PropertyCheck(
        "trough_gap", margin >= -slack, margin,
        f"mu-phi(trough)={state.mu - trough:.6e} lambda*pi={lam * np.pi:.6e}",
    )


def smoothness_proxy(
    state: SteadyState,
    smooth_gap_ratio: float = 0.1,
    noise_floor: float = 1e-11,
) -> PropertyCheck:
    """Coefficient-decay fit on the upper third of the resolved spectrum."""
    if state.phi.is_trivial():
        return PropertyCheck("smoothness_proxy", True, 0.0, "trivial state", applicable=False)
    a = np.abs(state.phi.coeffs[1:])
    j = np.arange(1, a.size + 1)
    resolved = a > noise_floor * a.max()
    if resolved.sum() < 16:
        raise InsufficientModesError(
            f"only {int(resolved.sum())} coefficients above the noise floor"
        )
    j, a = j[resolved], a[resolved]
    tail = j >= 2 * j[-1] / 3
    if tail.sum() < 8:
        tail = np.zeros_like(tail)
        tail[-16:] = True
    proxy = holder_proxy(state.phi, 1.5)

    gap = crest_gap(state)
    if gap >= smooth_gap_ratio * state.mu:
        slope, _ = np.polyfit(j[tail], np.log(a[tail]), 1)
        return PropertyCheck(
            "smoothness_proxy", slope < 0, -float(slope),
            f"exponential decay rate {-slope:.4f} per mode; sum j^1.5|a_j|={proxy:.6e}",
        )
    slope, _ = np.polyfit(np.log(j[tail]), np.log(a[tail]), 1)
    rate = -float(slope)
    return PropertyCheck(
        "smoothness_proxy", rate > 1, rate - 1.0,
        f"algebraic decay rate {rate:.4f}; sum j^1.5|a_j|={proxy:.6e}",
    )


def crest_exponent(
    state: SteadyState,
    x_lo: float | None = None,
    x_hi: float | None = None,
    samples: int = 12,
) -> float:
    """Log-log slope of phi(crest) - phi(crest + x) over a geometric window.

    The default window is [4pi/(kN), pi/(8k)]; for the highest wave
    phi(crest) = mu and the expected slope is 1, for smooth waves 2.
    """
    state = align_crest(state)
    k, n = state.k, max(state.modes, 1)
    x_lo = 4 * np.pi / (k * n) if x_lo is None else x_lo
    x_hi = np.pi / (8 * k) if x_hi is None else x_hi
    if x_lo <= 0 or x_hi < 4 * x_lo:
        raise WindowTooNarrowError(f"fit window [{x_lo:.3e}, {x_hi:.3e}] spans less than a factor 4")
    x = np.geomspace(x_lo, x_hi, max(samples, 12))
    depth = eval_series(state.phi, 0.0) - eval_series(state.phi, x)
    if np.any(depth <= 0):
        raise WindowTooNarrowError("crest profile is not decreasing across the fit window")
    slope, _ = np.polyfit(np.log(x), np.log(depth), 1)
    return float(slope)


def global_lipschitz_estimate(state: SteadyState, per_period: int = 8) -> float:
    """Max grid |phi'| over the period."""
    return float(np.max(np.abs(derivative_on_grid(state.phi, _points(state, per_period)))))


def run_point_diagnostics(
    state: SteadyState,
    lam: float,
    newton_tol: float = 1e-11,
    config: DiagnosticsConfig | None = None,
) -> DiagnosticsReport:
    """Every per-point check, each exactly once."""
    config = config or DiagnosticsConfig()
    per_period = config.oversample
    phi_norm = float(np.max(np.abs(_samples(state, per_period))))
    slack = inequality_slack(newton_tol, phi_norm, config.tolerance_factor)

    try:
        smooth = smoothness_proxy(state, config.smooth_gap_ratio, config.noise_floor)
    except InsufficientModesError as e:
        smooth = PropertyCheck("smoothness_proxy", True, 0.0, str(e), applicable=False)

    report = DiagnosticsReport(checks=[
        check_apriori_bounds(state, slack, per_period),
        check_linf_bound(state, slack, per_period),
        check_monotone_half_period(state, slack, per_period),
        check_speed_window([state]),
        check_trough_gap(state, lam, slack),
        smooth,
    ])
    if not state.phi.is_trivial():
        aligned = align_crest(state)
        report.second_derivative_at_crest = eval_series(second_derivative_series(aligned.phi), 0.0)
        report.lipschitz_estimate = global_lipschitz_estimate(state, per_period)
        try:
            report.crest_exponent = crest_exponent(state, samples=config.exponent_samples)
        except WindowTooNarrowError:
            logger.debug("Crest exponent window unavailable for N=%d", state.modes)
    return report


def run_branch_diagnostics(points: Sequence[BranchPoint]) -> DiagnosticsReport:
    """Branch-level report: speed window plus the count of flagged points."""
    report = DiagnosticsReport(checks=[check_speed_window(points)])
    flagged = [i for i, p in enumerate(points) if p.diagnostics is not None and not p.diagnostics.passed]
    report.checks.append(PropertyCheck(
        "points_passed", not flagged, -float(len(flagged)),
        f"{len(points) - len(flagged)}/{len(points)} points pass"
        + (f"; flagged indices {flagged[:10]}" if flagged else ""),
    ))
    return report


def format_summary(points: Sequence[BranchPoint]) -> str:
    """Human-readable table of per-point diagnostics."""
    header = f"{'#':>4} {'s':>12} {'mu':>12} {'crest_gap':>12} {'exponent':>9}  status"
    lines = [header, "-" * len(header)]
    for i, p in enumerate(points):
        report = p.diagnostics
        exponent = "" if report is None or report.crest_exponent is None else f"{report.crest_exponent:9.4f}"
        if report is None:
            status = "not checked"
        elif report.passed:
            status = "ok"
        else:
            status = "FAIL " + ",".join(c.check for c in report.failures)
        lines.append(f"{i:>4} {p.s:>12.6e} {p.mu:>12.8f} {p.crest_gap:>12.4e} {exponent:>9}  {status}")
    return "\n".join(lines)
