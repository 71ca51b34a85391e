"""Amplitude-parameterized continuation of the k-th bifurcation branch."""
from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import replace

import numpy as np

from fkdv.branch.bifurcation import asymptotic_branch, bifurcation_point, mu2_coefficient
from fkdv.branch.newton import newton_correct, newton_correct_arclength, pack, unpack
from fkdv.config import ContinuationConfig, DiagnosticsConfig, with_overrides
from fkdv.diagnostics import run_point_diagnostics
from fkdv.errors import NewtonError
from fkdv.kernel import lambda_constant
from fkdv.models import (
    AsymptoticsReport,
    BranchPoint,
    BranchRun,
    MultiplierSymbol,
    Mu2Estimate,
    SteadyState,
)
from fkdv.spectral import residual_norm, resize

logger = logging.getLogger("fkdv.branch.continuation")

LAMBDA_GRID = 65


def _resized(state: SteadyState, modes: int) -> SteadyState:
    if state.modes == modes:
        return state
    return SteadyState(resize(state.phi, modes), state.mu)


def _secant_predictor(points: Sequence[BranchPoint], s: float, modes: int) -> SteadyState:
    """Linear extrapolation in s through the last two points (constant for one)."""
    z1 = pack(_resized(points[-1].state, modes))
    if len(points) < 2:
        return unpack(z1, points[-1].state.k)
    z0 = pack(_resized(points[-2].state, modes))
    theta = (s - points[-1].s) / (points[-1].s - points[-2].s)
    return unpack(z1 + theta * (z1 - z0), points[-1].state.k)


def _arclength_step(
    points: Sequence[BranchPoint],
    s: float,
    modes: int,
    symbol: MultiplierSymbol,
    config: ContinuationConfig,
) -> BranchPoint:
    z1 = pack(_resized(points[-1].state, modes))
    z0 = pack(_resized(points[-2].state, modes))
    predictor = _secant_predictor(points, s, modes)
    point = newton_correct_arclength(predictor, z1 - z0, symbol, config)
    if config.direction * (point.s - points[-1].s) <= 0:
        raise NewtonError("arclength step reversed the amplitude direction")
    return point


class _StepControl:
    """Adaptive amplitude increment with grow/shrink factors and a floor."""

    def __init__(self, config: ContinuationConfig, mk: float) -> None:
        self.step = config.s_step if config.s_step is not None else 0.05 * mk
        self.step_max = config.s_step_max if config.s_step_max is not None else 0.5 * mk
        self.floor = config.step_floor_ratio * mk
        self.grow = config.step_grow
        self.shrink = config.step_shrink
        self.fast_iterations = config.fast_iterations

    def accepted(self, iterations: int) -> None:
        if iterations <= self.fast_iterations:
            self.step = min(self.step * self.grow, self.step_max)

    def rejected(self) -> bool:
        """Shrink the step; False once it falls below the floor."""
        self.step *= self.shrink
        return self.step >= self.floor


def _with_diagnostics(
    point: BranchPoint,
    lam: float,
    config: ContinuationConfig,
    diagnostics_config: DiagnosticsConfig,
) -> BranchPoint:
    report = run_point_diagnostics(point.state, lam, config.newton_tol, diagnostics_config)
    if not report.passed:
        logger.warning(
            "Flagged point s=%.6e mu=%.8f: %s",
            point.s, point.mu, ", ".join(c.check for c in report.failures),
        )
    return replace(point, diagnostics=report, flagged=not report.passed)


def continue_branch(
    symbol: MultiplierSymbol,
    config: ContinuationConfig,
    lam: float | None = None,
    diagnostics_config: DiagnosticsConfig | None = None,
    with_diagnostics: bool = True,
) -> BranchRun:
    """Follow the k-th branch from the bifurcation point toward the highest wave.

    Never raises on numerical failure: a Newton failure at the minimum step
    ends the run with stopped_reason "stalled" and the partial branch.
    """
    config.validate()
    k, d = config.k, config.direction
    mk = bifurcation_point(symbol, k)
    diagnostics_config = diagnostics_config or DiagnosticsConfig()
    if with_diagnostics and lam is None:
        lam = lambda_constant(symbol, LAMBDA_GRID, k=k)

    control = _StepControl(config, mk)
    modes = config.modes
    escalations = 0
    points: list[BranchPoint] = []
    s_next = config.s_start if config.s_start is not None else 0.05 * mk
    reason = "max_points"

    logger.info(
        "Continuing branch alpha=%.3f k=%d from mu*=%.8f (N=%d, direction %+d)",
        symbol.alpha, k, mk, modes, d,
    )

    while len(points) < config.max_points:
        target = d * s_next
        try:
            if config.pseudo_arclength and len(points) >= 2:
                point = _arclength_step(points, target, modes, symbol, config)
            else:
                guess = (
                    _secant_predictor(points, target, modes)
                    if points
                    else asymptotic_branch(symbol, k, target, modes)
                )
                point = newton_correct(guess, target, symbol, config)
        except NewtonError as e:
            logger.debug("Step to s=%.6e failed: %s", target, e)
            if not control.rejected():
                reason = "stalled"
                logger.warning(
                    "Continuation stalled at s=%.6e (step below floor, N=%d of max %d)",
                    target, modes, config.max_modes,
                )
                break
            last = abs(points[-1].s) if points else 0.0
            s_next = last + control.step if points else s_next * config.step_shrink
            continue

        # Escalate resolution once per threshold; thresholds tighten by the escalation factor
        threshold = config.escalate_crest_gap * point.mu / config.escalate_factor ** escalations
        if point.crest_gap < threshold and modes < config.max_modes:
            new_modes = min(modes * config.escalate_factor, config.max_modes)
            try:
                point = newton_correct(_resized(point.state, new_modes), point.s, symbol, config)
                logger.info(
                    "Escalated modes %d -> %d at s=%.6e (crest_gap %.3e)",
                    modes, new_modes, point.s, point.crest_gap,
                )
                modes = new_modes
            except NewtonError as e:
                logger.warning("Mode escalation to %d failed at s=%.6e: %s", new_modes, point.s, e)
            escalations += 1

        if with_diagnostics:
            point = _with_diagnostics(point, lam, config, diagnostics_config)
        points.append(point)
        logger.debug(
            "Point %d: s=%.6e mu=%.10f crest_gap=%.3e iterations=%d",
            len(points) - 1, point.s, point.mu, point.crest_gap, point.iterations,
        )

        if point.crest_gap < config.stop_crest_gap * point.mu:
            reason = "crest_gap"
            break

        control.accepted(point.iterations)
        s_next = abs(point.s) + control.step

    run = BranchRun(
        alpha=symbol.alpha,
        k=k,
        points=points,
        stopped_reason=reason,
        modes=modes,
        newton_tol=config.newton_tol,
        stop_crest_gap=config.stop_crest_gap,
    )
    last = run.last
    logger.info(
        "Branch alpha=%.3f k=%d stopped (%s) after %d points%s",
        symbol.alpha, k, reason, len(points),
        f", final mu={last.mu:.10f} crest_gap={last.crest_gap:.3e}" if last else "",
    )
    return run


def _quotient(symbol: MultiplierSymbol, k: int, s: float, config: ContinuationConfig) -> float:
    guess = asymptotic_branch(symbol, k, s, config.modes)
    point = newton_correct(guess, s, symbol, config)
    return (point.mu - bifurcation_point(symbol, k)) / s ** 2


def estimate_mu2(
    symbol: MultiplierSymbol,
    k: int,
    config: ContinuationConfig | None = None,
    s_values: Sequence[float] | None = None,
) -> Mu2Estimate:
    """Richardson extrapolation of (mu(s) - m(k))/s^2 to s -> 0.

    mu is even in s, so q(s) = mu_2 + O(s^2) and (4 q(s/2) - q(s))/3 removes
    the leading error. `s_values` is (s, s/2); default s = 0.05 m(k).
    """
    config = config or ContinuationConfig(k=k, modes=max(32, 4 * k))
    config = with_overrides(config, k=k, newton_tol=min(config.newton_tol, 1e-13))
    mk = bifurcation_point(symbol, k)
    if s_values is None:
        s_values = (0.05 * mk, 0.025 * mk)
    s_big, s_small = s_values
    numeric = (4.0 * _quotient(symbol, k, s_small, config) - _quotient(symbol, k, s_big, config)) / 3.0
    estimate = Mu2Estimate(formula=mu2_coefficient(symbol, k), numeric=numeric, s_values=tuple(s_values))
    if estimate.discrepancy:
        logger.warning(
            "mu2 for alpha=%.3f k=%d is %s (formula %.6e, branch %.6e): "
            "the bifurcation is not supercritical here",
            symbol.alpha, k, "negative" if estimate.formula < 0 else "sign-inconsistent",
            estimate.formula, estimate.numeric,
        )
    return estimate


def _order(eps: np.ndarray, values: np.ndarray) -> float:
    slope, _ = np.polyfit(np.log(eps), np.log(values), 1)
    return float(slope)


def verify_asymptotics(
    symbol: MultiplierSymbol,
    k: int,
    eps_values: Sequence[float],
    config: ContinuationConfig | None = None,
) -> AsymptoticsReport:
    """Convergence orders of the second-order expansion against Newton.

    eps = 0 gives the exact trivial solution and is left out of the fit.
    """
    config = config or ContinuationConfig(k=k, modes=max(32, 4 * k))
    config = with_overrides(config, k=k, newton_tol=min(config.newton_tol, 1e-13))
    eps = np.array([e for e in eps_values if e != 0], dtype=float)
    if eps.size < 2:
        raise ValueError("need at least two nonzero eps values to fit an order")

    residuals, mu_errors = [], []
    for e in eps:
        approx = asymptotic_branch(symbol, k, e, config.modes)
        residuals.append(residual_norm(approx, symbol))
        corrected = newton_correct(approx, e, symbol, config)
        mu_errors.append(abs(corrected.mu - approx.mu))
        logger.info(
            "eps=%.4e |F(asym)|=%.3e |mu_newton - mu_asym|=%.3e",
            e, residuals[-1], mu_errors[-1],
        )

    mu2 = estimate_mu2(symbol, k, config)
    report = AsymptoticsReport(
        eps=[float(e) for e in eps],
        residual_norms=residuals,
        mu_errors=mu_errors,
        residual_order=_order(np.abs(eps), np.array(residuals)),
        mu_order=_order(np.abs(eps), np.array(mu_errors)),
        mu2_formula=mu2.formula,
        mu2_numeric=mu2.numeric,
        discrepancy=mu2.discrepancy,
    )
    logger.info(
        "Fitted orders: residual %.3f, mu %.3f", report.residual_order, report.mu_order,
    )
    return report
