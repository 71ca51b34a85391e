"""Extrapolation of the branch tail to the highest (peaked) wave."""
from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from fkdv.diagnostics import crest_position
from fkdv.errors import InsufficientTailError
from fkdv.models import BranchPoint, CosineSeries, SteadyState
from fkdv.spectral import eval_series, resize

logger = logging.getLogger("fkdv.branch.limit")

MIN_TAIL = 3


def select_tail(points: Sequence[BranchPoint], count: int = 4) -> list[BranchPoint]:
    """Last `count` points, cut back to the run over which crest_gap strictly decreases."""
    tail = list(points[-count:])
    start = len(tail) - 1
    while start > 0 and tail[start - 1].crest_gap > tail[start].crest_gap:
        start -= 1
    return tail[start:]


def extrapolate_highest(tail: Sequence[BranchPoint], degree: int = 2) -> SteadyState:
    """Componentwise polynomial extrapolation of (a_0..a_N, mu) to crest_gap = 0.

    Coefficients are fitted against crest_gap; the crest value is then set
    equal to mu by adjusting the mean.
    """
    if len(tail) < MIN_TAIL:
        raise InsufficientTailError(f"need at least {MIN_TAIL} tail points, got {len(tail)}")
    gaps = np.array([p.crest_gap for p in tail])
    if np.any(np.diff(gaps) >= 0):
        raise InsufficientTailError("crest_gap must strictly decrease along the tail")

    k = tail[-1].state.k
    modes = max(p.modes for p in tail)
    rows = np.array([
        np.append(resize(p.state.phi, modes).coeffs, p.mu) for p in tail
    ])
    deg = min(degree, len(tail) - 1)
    fit = np.polyfit(gaps, rows, deg)
    z = fit[-1]

    mu = float(z[-1])
    phi = CosineSeries(k, z[:-1])
    crest = eval_series(phi, crest_position(SteadyState(phi, mu)))
    coeffs = np.array(phi.coeffs)
    coeffs[0] += 2.0 * (mu - crest)
    limit = SteadyState(phi.with_coeffs(coeffs), mu)

    mus = np.array([p.mu for p in tail])
    width = float(mus.max() - mus.min())
    lo, hi = mus.min() - width, mus.max() + width
    if not lo <= mu <= hi:
        logger.warning(
            "Extrapolated mu=%.10f outside the tail window [%.10f, %.10f]", mu, lo, hi,
        )
    logger.info(
        "Extrapolated highest wave from %d points: mu=%.10f (last crest_gap %.3e)",
        len(tail), mu, gaps[-1],
    )
    return limit
