"""Local bifurcation data at the trivial solution line.

Expanding phi = eps cos(kx) + eps^2 phi_2 + ..., mu = m(k) + eps^2 mu_2 + ...
in F(phi, mu) = 0 gives phi_2 at order eps^2 and mu_2 from the cos(kx)
component at order eps^3.
"""
from __future__ import annotations

import logging

import numpy as np

from fkdv.models import CosineSeries, LocalBifurcationData, MultiplierSymbol, SteadyState

logger = logging.getLogger("fkdv.branch.bifurcation")


def bifurcation_point(symbol: MultiplierSymbol, k: int) -> float:
    """mu_k* = m(k), where the trivial line meets the k-th branch."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return symbol(k)


def _gaps(symbol: MultiplierSymbol, k: int) -> tuple[float, float]:
    mk = symbol(k)
    return mk - symbol(0), mk - symbol(2 * k)


def mu2_coefficient(symbol: MultiplierSymbol, k: int) -> float:
    """1/(4(m(k) - m(0))) + 1/(8(m(k) - m(2k))); sign is not enforced."""
    if k < 1:
        raise ValueError("k must be at least 1")
    g0, g2 = _gaps(symbol, k)
    return 1.0 / (4.0 * g0) + 1.0 / (8.0 * g2)


def local_bifurcation_data(symbol: MultiplierSymbol, k: int, modes: int = 4) -> LocalBifurcationData:
    if modes < 2:
        raise ValueError("modes must be at least 2 to hold the cos(2kx) term")
    g0, g2 = _gaps(symbol, k)
    coeffs = np.zeros(modes + 1)
    coeffs[0] = 2.0 / (4.0 * g0)
    coeffs[2] = 1.0 / (4.0 * g2)
    return LocalBifurcationData(
        k=k,
        mu_star=bifurcation_point(symbol, k),
        phi2=CosineSeries(k, coeffs),
        mu2=mu2_coefficient(symbol, k),
    )


def asymptotic_branch(
    symbol: MultiplierSymbol,
    k: int,
    eps: float,
    modes: int = 8,
) -> SteadyState:
    """Second-order truncation of the branch: eps cos(kx) + eps^2 phi_2, m(k) + eps^2 mu_2."""
    data = local_bifurcation_data(symbol, k, modes)
    coeffs = eps ** 2 * np.array(data.phi2.coeffs)
    coeffs[1] += eps
    return SteadyState(CosineSeries(k, coeffs), data.mu_star + eps ** 2 * data.mu2)
