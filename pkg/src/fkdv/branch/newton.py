"""Damped Newton corrector for the amplitude-constrained steady equation.

Unknowns are z = (a_0, ..., a_N, mu). The N+1 cosine coefficients of
F(phi, mu) are bordered by one scalar constraint: a_1 = s for the amplitude
chart, or t . (z - z_pred) = 0 for pseudo-arclength.
"""
from __future__ import annotations

import logging
from collections.abc import Callable

import numpy as np
from scipy import linalg

from fkdv.config import ContinuationConfig
from fkdv.diagnostics import crest_gap, inequality_slack
from fkdv.errors import InadmissibleStateError, LeftAdmissibleSetError, NoConvergenceError
from fkdv.models import BranchPoint, CosineSeries, MultiplierSymbol, SteadyState
from fkdv.spectral import grid_values, jacobian_matrix, residual, sup_norm

logger = logging.getLogger("fkdv.branch.newton")


def pack(state: SteadyState) -> np.ndarray:
    return np.append(state.phi.coeffs, state.mu)


def unpack(z: np.ndarray, k: int) -> SteadyState:
    return SteadyState(CosineSeries(k, z[:-1]), float(z[-1]))


def admissibility_gap(state: SteadyState) -> float:
    """mu - max phi on the 4N half-period grid."""
    return state.mu - float(grid_values(state.phi).max())


def amplitude_border(modes: int) -> np.ndarray:
    row = np.zeros(modes + 2)
    row[1] = 1.0
    return row


def newton_system(
    state: SteadyState,
    symbol: MultiplierSymbol,
    border: np.ndarray | None = None,
) -> np.ndarray:
    """Bordered (N+2) x (N+2) matrix [[D_phi F, D_mu F], [border]].

    D_mu F = phi. The default border is the amplitude constraint row e_1.
    """
    n = state.modes
    out = np.zeros((n + 2, n + 2))
    out[: n + 1, : n + 1] = jacobian_matrix(state, symbol)
    out[: n + 1, n + 1] = state.phi.coeffs
    out[n + 1] = amplitude_border(n) if border is None else border
    return out


def _evaluate(z: np.ndarray, k: int, symbol: MultiplierSymbol):
    state = unpack(z, k)
    f = residual(state, symbol)
    return state, f, sup_norm(f), admissibility_gap(state)


def _damped_newton(
    z: np.ndarray,
    k: int,
    symbol: MultiplierSymbol,
    config: ContinuationConfig,
    border: np.ndarray,
    constraint: Callable[[np.ndarray], float],
) -> tuple[SteadyState, float, int]:
    state, f, norm, gap = _evaluate(z, k, symbol)

    for iteration in range(config.newton_max_iter + 1):
        logger.debug("Newton it=%d |F|=%.3e gap=%.3e", iteration, norm, gap)
        if norm <= config.newton_tol:
            return state, norm, iteration
        if iteration == config.newton_max_iter:
            break

        rhs = np.append(-f.coeffs, -constraint(z))
        try:
            delta = linalg.solve(newton_system(state, symbol, border), rhs)
        except linalg.LinAlgError as e:
            raise NoConvergenceError(f"singular bordered system at iteration {iteration}") from e

        t = 1.0
        while True:
            candidate = z + t * delta
            trial = None
            if np.all(np.isfinite(candidate)):
                try:
                    trial = _evaluate(candidate, k, symbol)
                except ValueError:
                    trial = None
            if trial is not None:
                c_norm, c_gap = trial[2], trial[3]
                # Once admissible, never step out of phi <= mu
                if c_norm < norm and (c_gap >= 0 or gap < 0):
                    break
            if t <= config.damping_floor:
                if trial is None:
                    raise NoConvergenceError("non-finite iterate at the damping floor")
                if gap >= 0 and trial[3] < 0:
                    raise LeftAdmissibleSetError(
                        f"mu - max phi turned negative ({trial[3]:.3e}) at damping {t:.3e}"
                    )
                break
            t *= 0.5

        z = candidate
        state, f, norm, gap = trial

    raise NoConvergenceError(
        f"no convergence after {config.newton_max_iter} iterations, |F| = {norm:.3e}"
    )


def _finish(state: SteadyState, s: float, norm: float, iterations: int, config: ContinuationConfig) -> BranchPoint:
    slack = inequality_slack(config.newton_tol, sup_norm(state.phi))
    gap = admissibility_gap(state)
    if gap < -slack:
        raise InadmissibleStateError(f"converged state has max phi - mu = {-gap:.3e}")
    return BranchPoint(
        state=state,
        s=s,
        newton_residual=norm,
        crest_gap=max(crest_gap(state), 0.0),
        iterations=iterations,
    )


def newton_correct(
    guess: SteadyState,
    s: float,
    symbol: MultiplierSymbol,
    config: ContinuationConfig,
) -> BranchPoint:
    """Solve F(phi, mu) = 0 with a_1 = s, starting from `guess`."""
    if s == 0:
        raise ValueError("s must be nonzero; the trivial line is excluded")
    if guess.modes < 1:
        raise ValueError("guess needs at least one cosine mode")
    z = pack(guess)
    z[1] = s

    state, norm, iterations = _damped_newton(
        z, guess.k, symbol, config,
        amplitude_border(guess.modes),
        lambda v: v[1] - s,
    )
    return _finish(state, float(s), norm, iterations, config)


def newton_correct_arclength(
    predictor: SteadyState,
    tangent: np.ndarray,
    symbol: MultiplierSymbol,
    config: ContinuationConfig,
) -> BranchPoint:
    """Correct orthogonally to a unit secant `tangent` through `predictor`."""
    z_pred = pack(predictor)
    tangent = np.asarray(tangent, dtype=float)
    if tangent.shape != z_pred.shape:
        raise ValueError("tangent must match the packed state length")
    tangent = tangent / np.linalg.norm(tangent)

    state, norm, iterations = _damped_newton(
        z_pred.copy(), predictor.k, symbol, config,
        tangent,
        lambda v: float(tangent @ (v - z_pred)),
    )
    s = float(state.phi.coeffs[1])
    if s == 0:
        raise NoConvergenceError("arclength corrector fell back onto the trivial line")
    return _finish(state, s, norm, iterations, config)
