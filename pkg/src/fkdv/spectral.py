"""Cosine-series representation of even periodic waves.

Series follow the convention phi(x) = a_0/2 + sum_{j>=1} a_j cos(j k x), so
a_1 is literally the amplitude parameter s. Grid transforms use DCT-I on the
half-period grid x_i = i*pi/(k M), i = 0..M.
"""
from __future__ import annotations

import numpy as np
from scipy import fft

from fkdv.errors import BaseMismatchError, GridMismatchError
from fkdv.kernel import trig_sum
from fkdv.models import CosineSeries, KernelTable, MultiplierSymbol, SteadyState

DEALIAS_FACTOR = 4


def half_period_grid(k: int, points: int) -> np.ndarray:
    return np.pi * np.arange(points + 1) / (k * points)


def _series_weights(phi: CosineSeries) -> np.ndarray:
    w = np.array(phi.coeffs)
    w[0] *= 0.5
    return w


def eval_series(phi: CosineSeries, x):
    """phi(x) by direct summation (scalar or array x)."""
    values = trig_sum(_series_weights(phi), phi.base_wavenumber * np.asarray(x, dtype=float), np.cos)
    return float(values[0]) if np.ndim(x) == 0 else values


def eval_derivative(phi: CosineSeries, x, order: int = 1):
    """Spectral derivative of the given order at x."""
    omega = phi.wavenumbers.astype(float)
    w = _series_weights(phi) * omega ** order
    phase = 0.5 * np.pi * order

    # d^p/dx^p cos(w x) = w^p cos(w x + p pi/2)
    def shifted_cos(t):
        return np.cos(t + phase)

    values = trig_sum(w, phi.base_wavenumber * np.asarray(x, dtype=float), shifted_cos)
    return float(values[0]) if np.ndim(x) == 0 else values


def derivative_on_grid(phi: CosineSeries, points: int) -> np.ndarray:
    """phi' at the half-period points x_i = i*pi/(k M) via DST-I (zero at both ends)."""
    if points <= phi.modes:
        raise GridMismatchError(f"{points} grid intervals cannot resolve {phi.modes} modes")
    x = np.zeros(points - 1)
    j = np.arange(1, phi.modes + 1)
    x[: phi.modes] = -0.5 * phi.base_wavenumber * j * phi.coeffs[1:]
    out = np.zeros(points + 1)
    if points > 1:
        out[1:-1] = fft.dst(x, type=1)
    return out


def second_derivative_series(phi: CosineSeries) -> CosineSeries:
    return phi.with_coeffs(-(phi.wavenumbers.astype(float) ** 2) * phi.coeffs)


def to_grid(phi: CosineSeries, points: int) -> np.ndarray:
    """Values at the M + 1 half-period points x_i = i*pi/(k M); requires M >= N."""
    if points < max(phi.modes, 1):
        raise GridMismatchError(f"{points} grid intervals cannot resolve {phi.modes} modes")
    b = np.zeros(points + 1)
    b[: phi.modes + 1] = phi.coeffs
    b *= 0.5
    b[points] *= 2.0
    return fft.dct(b, type=1)


def from_grid(values, base_wavenumber: int, modes: int) -> CosineSeries:
    """Cosine coefficients a_0..a_modes from half-period samples (inverse of to_grid)."""
    values = np.asarray(values, dtype=float)
    points = values.size - 1
    if points < 1:
        raise GridMismatchError("need at least two half-period samples")
    b = fft.dct(values, type=1) / (2.0 * points)
    a = 2.0 * b
    a[points] = b[points]
    out = np.zeros(modes + 1)
    n = min(modes, points) + 1
    out[:n] = a[:n]
    return CosineSeries(base_wavenumber, out)


def grid_values(phi: CosineSeries, per_period: int = 8) -> np.ndarray:
    """Half-period samples at `per_period` points per mode and period."""
    points = max(per_period * max(phi.modes, 1) // 2, 8)
    return to_grid(phi, points)


def sup_norm(phi: CosineSeries, per_period: int = 8) -> float:
    return float(np.max(np.abs(grid_values(phi, per_period))))


def resize(phi: CosineSeries, modes: int) -> CosineSeries:
    """Pad with zeros or truncate to the given mode count."""
    out = np.zeros(modes + 1)
    n = min(modes, phi.modes) + 1
    out[:n] = phi.coeffs[:n]
    return phi.with_coeffs(out)


def shift_half_period(phi: CosineSeries) -> CosineSeries:
    """phi(x + pi/k): flips the sign of every odd coefficient."""
    signs = np.where(np.arange(phi.modes + 1) % 2 == 0, 1.0, -1.0)
    return phi.with_coeffs(signs * phi.coeffs)


def rebase(phi: CosineSeries, base_wavenumber: int) -> CosineSeries:
    """View a 2pi/k-periodic series on the coarser lattice of a divisor of k."""
    k = phi.base_wavenumber
    if k % base_wavenumber:
        raise BaseMismatchError(f"{base_wavenumber} does not divide {k}")
    factor = k // base_wavenumber
    out = np.zeros(factor * phi.modes + 1)
    out[::factor] = phi.coeffs
    return CosineSeries(base_wavenumber, out)


def holder_proxy(phi: CosineSeries, beta: float) -> float:
    """sum_j j^beta |a_j|: a coefficient-decay surrogate, not the C^beta norm."""
    j = np.arange(1, phi.modes + 1, dtype=float)
    return float(np.sum(j ** beta * np.abs(phi.coeffs[1:])))


def apply_L(phi: CosineSeries, symbol: MultiplierSymbol) -> CosineSeries:
    """Fourier multiplier L acting diagonally: a_j -> m(j k) a_j."""
    return phi.with_coeffs(phi.coeffs * symbol(phi.wavenumbers))


def multiply(phi: CosineSeries, psi: CosineSeries, modes: int | None = None) -> CosineSeries:
    """Pointwise product, dealiased on a 4N-interval half-period grid.

    The exact product has at most N_phi + N_psi modes, all resolved on the
    grid; the result is truncated to `modes` (default max(N_phi, N_psi)).
    """
    if phi.base_wavenumber != psi.base_wavenumber:
        raise BaseMismatchError(
            f"base wavenumbers differ: {phi.base_wavenumber} vs {psi.base_wavenumber}"
        )
    n = max(phi.modes, psi.modes)
    modes = n if modes is None else modes
    points = max(DEALIAS_FACTOR * n, 2 * (phi.modes + psi.modes), 8)
    product = to_grid(phi, points) * to_grid(psi, points)
    return from_grid(product, phi.base_wavenumber, modes)


def residual(state: SteadyState, symbol: MultiplierSymbol, modes: int | None = None) -> CosineSeries:
    """F(phi, mu) = mu phi - L phi - phi^2/2 as a cosine series."""
    phi = state.phi
    modes = phi.modes if modes is None else modes
    phi = resize(phi, modes)
    return state.mu * phi - apply_L(phi, symbol) - 0.5 * multiply(phi, phi, modes)


def residual_norm(state: SteadyState, symbol: MultiplierSymbol) -> float:
    return sup_norm(residual(state, symbol))


def rewritten_form_gap(state: SteadyState, symbol: MultiplierSymbol, points: int) -> np.ndarray:
    """(mu - phi)^2/2 - (mu^2/2 - L phi) on the half-period grid.

    For a solution this vanishes; in general it equals -F pointwise.
    """
    phi = to_grid(state.phi, points)
    l_phi = to_grid(apply_L(state.phi, symbol), points)
    return 0.5 * (state.mu - phi) ** 2 - (0.5 * state.mu ** 2 - l_phi)


def product_matrix(phi: CosineSeries, modes: int | None = None) -> np.ndarray:
    """Matrix of v -> P_N(phi v) on cosine coefficients.

    With c the coefficients of phi: entry (i, l) is (c_|i-l| + c_(i+l))/2 for
    l >= 1 and c_i/2 for l = 0.
    """
    n = phi.modes if modes is None else modes
    c = np.zeros(2 * n + 1)
    m = min(phi.modes, 2 * n) + 1
    c[:m] = phi.coeffs[:m]
    i, l = np.indices((n + 1, n + 1))
    out = 0.5 * (c[np.abs(i - l)] + c[i + l])
    out[:, 0] = 0.5 * c[: n + 1]
    return out


def jacobian_matrix(state: SteadyState, symbol: MultiplierSymbol) -> np.ndarray:
    """D_phi F = (mu - phi) Id - L in the cosine basis."""
    phi = state.phi
    diag = state.mu - symbol(phi.wavenumbers)
    return np.diag(diag) - product_matrix(phi)


def quadrature_grid(points: int) -> np.ndarray:
    """Uniform periodic grid x_i = -pi + 2 pi i / M, i = 0..M-1."""
    return -np.pi + 2 * np.pi * np.arange(points) / points


def apply_L_quadrature(samples, table: KernelTable) -> np.ndarray:
    """Trapezoidal periodic convolution with the tabulated kernel.

    `samples` live on `quadrature_grid(2 G)` for a table with G points.
    """
    f = np.asarray(samples, dtype=float)
    g = table.resolution
    m = f.size
    if m != 2 * g:
        raise GridMismatchError(f"{m} samples do not match a table with {g} half-period points")
    kvec = np.empty(m)
    kvec[0] = table.origin_value
    kvec[1 : g + 1] = table.values
    kvec[g + 1 :] = table.values[: g - 1][::-1]
    h = 2 * np.pi / m
    return h * np.real(fft.ifft(fft.fft(kvec) * fft.fft(f)))


def quadrature_error_bound(
    symbol: MultiplierSymbol,
    points: int,
    series_modes: int,
    coeff_l1: float,
    table_modes: int,
) -> float:
    """Bound on |apply_L_quadrature - L f| for a trigonometric polynomial f.

    Mode n' of f picks up aliases n' + qM (q != 0) of the truncated kernel,
    each weighted by at most m(|q| M - F). `coeff_l1` bounds sum |f_hat|.
    """
    if points <= series_modes:
        raise GridMismatchError("quadrature grid must exceed the series mode count")
    q_max = (table_modes + series_modes) // points
    q = np.arange(1, q_max + 1)
    alias = 2.0 * float(np.sum(symbol(q * points - series_modes))) if q_max else 0.0
    missing = float(symbol(table_modes + 1)) if series_modes > table_modes else 0.0
    return coeff_l1 * (alias + missing)
