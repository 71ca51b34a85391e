"""Bessel symbol and the periodized convolution kernel K_P.

K_P(x) = (1/2pi) * (m(0) + 2 * sum_{n>=1} m(n) cos(n x)) is only ever
evaluated through truncated cosine sums; there is no closed form in
physical space. Every truncation carries the integral-comparison bound of
`kernel_series_tail_bound`.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy import fft

from fkdv.config import KernelConfig
from fkdv.errors import NearSingularityError, NonpositiveLambdaError
from fkdv.models import KernelTable, MultiplierSymbol, PropertyCheck

logger = logging.getLogger("fkdv.kernel")

KERNEL_MODE_CAP = 1 << 15
_CHUNK = 2048


def eval_symbol(symbol: MultiplierSymbol, xi):
    return symbol(xi)


def kernel_series_tail_bound(symbol: MultiplierSymbol, modes: int) -> float:
    """Upper bound on (1/2pi) * sum_{|n|>N} m(n).

    Uses (1 + (s n)^2)^(-a/2) <= (s n)^(-a) and sum_{n>N} n^(-a) <= N^(1-a)/(a-1).
    """
    if modes < 1:
        raise ValueError("modes must be at least 1")
    a = symbol.alpha
    return float(symbol.scale ** (-a) * modes ** (1.0 - a) / (math.pi * (a - 1.0)))


def kernel_tail_bound_at(symbol: MultiplierSymbol, modes: int, x) -> np.ndarray:
    """Pointwise bound on the K_P truncation error at x.

    m(n) decreases to 0 and |sum_{M..K} cos(n x)| <= 1/|sin(x/2)|, so summation
    by parts gives m(N+1)/(pi |sin(x/2)|); never larger than the uniform bound.
    """
    uniform = kernel_series_tail_bound(symbol, modes)
    half = np.abs(np.sin(0.5 * np.asarray(x, dtype=float)))
    with np.errstate(divide="ignore"):
        local = np.where(half > 0, float(symbol(modes + 1)) / (np.pi * half), np.inf)
    return np.minimum(local, uniform)


def truncation_target(symbol: MultiplierSymbol) -> float:
    return 1e-10 if symbol.alpha >= 2 else 1e-6


def default_kernel_modes(symbol: MultiplierSymbol, tol: float | None = None) -> int:
    """Smallest N whose tail bound meets `tol`, capped at KERNEL_MODE_CAP."""
    tol = truncation_target(symbol) if tol is None else tol
    a = symbol.alpha
    log_n = (
        -a * math.log(symbol.scale) - math.log(math.pi * (a - 1.0) * tol)
    ) / (a - 1.0)
    if log_n > math.log(KERNEL_MODE_CAP):
        logger.warning(
            "alpha=%.3f needs more than %d modes for tail %.1e; capped, achieved bound %.3e",
            a, KERNEL_MODE_CAP, tol, kernel_series_tail_bound(symbol, KERNEL_MODE_CAP),
        )
        return KERNEL_MODE_CAP
    return max(1, math.ceil(math.exp(log_n)))


def _kernel_weights(symbol: MultiplierSymbol, modes: int) -> np.ndarray:
    n = np.arange(modes + 1)
    w = symbol(n) / np.pi
    w[0] *= 0.5
    return w


def _sigma_factors(modes: int) -> np.ndarray:
    # Lanczos factors; suppress ringing of the termwise-differentiated series
    return np.sinc(np.arange(modes + 1) / (modes + 1))


def _derivative_weights(symbol: MultiplierSymbol, modes: int) -> np.ndarray:
    n = np.arange(modes + 1)
    w = -n * symbol(n) / np.pi
    if symbol.alpha <= 2:
        w = w * _sigma_factors(modes)
    return w


def trig_sum(weights: np.ndarray, x, func) -> np.ndarray:
    """sum_n weights[n] * func(n x), chunked over n to bound memory."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape, dtype=float)
    for start in range(0, weights.size, _CHUNK):
        n = np.arange(start, min(start + _CHUNK, weights.size))
        out += func(np.multiply.outer(x, n)) @ weights[n]
    return out


def _scalar_or_array(values: np.ndarray, x):
    return float(values[0]) if np.ndim(x) == 0 else values


def eval_kernel(symbol: MultiplierSymbol, x, modes: int):
    """Partial sum of K_P with `modes` cosine terms at x (scalar or array)."""
    if modes < 1:
        raise ValueError("modes must be at least 1")
    values = trig_sum(_kernel_weights(symbol, modes), x, np.cos)
    return _scalar_or_array(values, x)


def _periodic_distance(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.abs(np.mod(x + np.pi, 2 * np.pi) - np.pi)


def eval_kernel_derivative(
    symbol: MultiplierSymbol,
    x,
    modes: int,
    grid_resolution: int = KernelConfig.grid_resolution,
):
    """K_P'(x) = -(1/pi) sum n m(n) sin(n x), sigma-smoothed for alpha <= 2.

    Points closer to the origin than pi/grid_resolution are refused.
    """
    if modes < 1:
        raise ValueError("modes must be at least 1")
    if grid_resolution < 1:
        raise ValueError("grid_resolution must be positive")
    x_min = np.pi / grid_resolution
    if np.any(_periodic_distance(x) < x_min):
        raise NearSingularityError(
            f"kernel derivative requested within {x_min:.3e} of the origin"
        )
    values = trig_sum(_derivative_weights(symbol, modes), x, np.sin)
    return _scalar_or_array(values, x)


def _fold_cosine(weights: np.ndarray, half_points: int) -> np.ndarray:
    """Fold cosine weights onto residues r in [0, G] of n mod 2G."""
    n = np.arange(weights.size)
    r = np.mod(n, 2 * half_points)
    r = np.where(r > half_points, 2 * half_points - r, r)
    return np.bincount(r, weights=weights, minlength=half_points + 1)


def _fold_sine(weights: np.ndarray, half_points: int) -> np.ndarray:
    n = np.arange(weights.size)
    r = np.mod(n, 2 * half_points)
    sign = np.where(r > half_points, -1.0, 1.0)
    r = np.where(r > half_points, 2 * half_points - r, r)
    return np.bincount(r, weights=sign * weights, minlength=half_points + 1)


def kernel_on_uniform_grid(symbol: MultiplierSymbol, modes: int, half_points: int) -> np.ndarray:
    """K_P partial sum at x_j = j*pi/G for j = 0..G via a folded DCT-I."""
    g = half_points
    folded = _fold_cosine(_kernel_weights(symbol, modes), g)
    b = 0.5 * folded
    b[0] = folded[0]
    b[g] = folded[g]
    return fft.dct(b, type=1)


def kernel_derivative_on_uniform_grid(
    symbol: MultiplierSymbol, modes: int, half_points: int,
) -> np.ndarray:
    """K_P' partial sum at x_j = j*pi/G for j = 1..G via a folded DST-I."""
    g = half_points
    folded = _fold_sine(_derivative_weights(symbol, modes), g)
    out = np.zeros(g)
    if g > 1:
        out[:-1] = fft.dst(0.5 * folded[1:g], type=1)
    return out


def build_kernel_table(
    symbol: MultiplierSymbol,
    grid_resolution: int,
    modes: int | None = None,
) -> KernelTable:
    """Tabulate K_P and K_P' on x_j = j*pi/G, j = 1..G."""
    if grid_resolution < 1:
        raise ValueError("grid_resolution must be positive")
    modes = default_kernel_modes(symbol) if modes is None else modes
    if modes < 1:
        raise ValueError("modes must be at least 1")
    g = grid_resolution
    values = kernel_on_uniform_grid(symbol, modes, g)
    table = KernelTable(
        alpha=symbol.alpha,
        grid=np.pi * np.arange(1, g + 1) / g,
        values=values[1:],
        derivative_values=kernel_derivative_on_uniform_grid(symbol, modes, g),
        truncation_modes=modes,
        tail_bound=kernel_series_tail_bound(symbol, modes),
        origin_value=float(values[0]),
        scale=symbol.scale,
    )
    logger.debug(
        "Kernel table alpha=%.3f G=%d N=%d tail=%.3e",
        symbol.alpha, g, modes, table.tail_bound,
    )
    return table


def kernel_unit_integral(symbol: MultiplierSymbol, modes: int) -> float:
    """Trapezoidal period integral of the partial sum on more than 2N points.

    The rule is exact for every retained mode, so the result differs from 1
    by rounding only.
    """
    g = 1 << max(3, (modes + 1).bit_length())
    values = kernel_on_uniform_grid(symbol, modes, g)
    h = np.pi / g
    return float(h * (values[0] + values[-1] + 2.0 * values[1:-1].sum()))


def certify_kernel_properties(
    symbol: MultiplierSymbol,
    grid_resolution: int,
    modes: int | None = None,
) -> list[PropertyCheck]:
    """Grid certification of positivity, evenness, monotonicity and unit mass."""
    if grid_resolution < 8:
        raise ValueError("grid_resolution must be at least 8")
    table = build_kernel_table(symbol, grid_resolution, modes)
    checks: list[PropertyCheck] = []

    all_values = np.concatenate(([table.origin_value], table.values))
    positivity = float(all_values.min())
    checks.append(PropertyCheck(
        "positivity", positivity > 0, positivity,
        f"min K_P on grid = {positivity:.6e}",
    ))

    mirrored = eval_kernel(symbol, -table.grid, table.truncation_modes)
    direct = eval_kernel(symbol, table.grid, table.truncation_modes)
    asymmetry = float(np.max(np.abs(mirrored - direct)))
    checks.append(PropertyCheck(
        "evenness", asymmetry <= 1e-14 * float(np.max(np.abs(direct))), -asymmetry,
        f"max |K_P(x) - K_P(-x)| = {asymmetry:.3e}",
    ))

    # Each increment may move by the truncation error at both of its ends
    local_tail = kernel_tail_bound_at(symbol, table.truncation_modes, np.concatenate(([0.0], table.grid)))
    increments = np.diff(all_values)
    increment_slack = local_tail[:-1] + local_tail[1:]
    worst_increment = float(increments.max())
    derivative_max = float(table.derivative_values[:-1].max()) if table.resolution > 1 else 0.0
    checks.append(PropertyCheck(
        "monotone_decrease", bool(np.all(increments <= increment_slack)), -worst_increment,
        f"max increment {worst_increment:.3e}, max K_P' {derivative_max:.3e}, "
        f"largest away-from-origin slack {float(increment_slack[1:].max(initial=0.0)):.3e}",
    ))

    integral = kernel_unit_integral(symbol, table.truncation_modes)
    tol = 1e-8 if symbol.alpha >= 2 else 1e-6
    deviation = abs(integral - 1.0)
    checks.append(PropertyCheck(
        "unit_integral", deviation <= tol, tol - deviation,
        f"period integral = {integral:.15f}",
    ))

    for c in checks:
        level = logging.INFO if c.passed else logging.WARNING
        logger.log(level, "[alpha=%.3f] %s pass=%s margin=%.3e", symbol.alpha, c.check, c.passed, c.margin)
    return checks


def lambda_constant(
    symbol: MultiplierSymbol,
    grid_resolution: int,
    modes: int | None = None,
    k: int = 1,
) -> float:
    """Half the minimum of K_P(x - y) - K_P(x + y) over (pi/4, 3pi/4)^2.

    For k > 1 the kernel of the rescaled symbol m(k xi) is used, i.e. the
    wave is viewed on its fundamental period.
    """
    if grid_resolution < 8:
        raise ValueError("grid_resolution must be at least 8")
    sym = symbol.rescaled(k) if k > 1 else symbol
    modes = default_kernel_modes(sym) if modes is None else modes
    n = grid_resolution
    lo, hi = np.pi / 4, 3 * np.pi / 4
    h = (hi - lo) / (n + 1)
    x0 = lo + h
    # On a uniform grid x_i - x_j and x_i + x_j take only 2n - 1 distinct values
    diffs = eval_kernel(sym, h * np.arange(n), modes)
    sums = eval_kernel(sym, 2 * x0 + h * np.arange(2 * n - 1), modes)
    i, j = np.indices((n, n))
    gap = diffs[np.abs(i - j)] - sums[i + j]
    lam = 0.5 * float(gap.min())
    if lam <= 0:
        raise NonpositiveLambdaError(
            f"lambda = {lam:.3e} <= 0 for alpha={symbol.alpha}, k={k}; "
            "increase modes or grid resolution"
        )
    logger.debug("lambda(alpha=%.3f, k=%d) = %.6e", symbol.alpha, k, lam)
    return lam


def fit_holder_exponent(symbol: MultiplierSymbol, modes: int, samples: int = 16) -> float:
    """Empirical exponent of K_P(0) - K_P(x) near the origin (log-log slope)."""
    x = np.geomspace(8 * np.pi / modes, 0.5, samples)
    depth = eval_kernel(symbol, 0.0, modes) - eval_kernel(symbol, x, modes)
    slope, _ = np.polyfit(np.log(x), np.log(depth), 1)
    return float(slope)
