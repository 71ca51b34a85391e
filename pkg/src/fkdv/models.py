from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np


@dataclass(frozen=True)
class MultiplierSymbol:
    """Bessel symbol m(xi) = (1 + (scale*xi)^2)^(-alpha/2).

    `scale` is 1 for the equation itself; `rescaled(k)` gives the symbol of
    the same problem viewed on its fundamental period after x -> kx.
    """

    alpha: float
    scale: int = 1

    def __post_init__(self) -> None:
        if not np.isfinite(self.alpha) or not self.alpha > 1:
            raise ValueError("alpha must exceed 1")
        if self.scale < 1:
            raise ValueError("scale must be a positive integer")

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=float)
        value = (1.0 + (self.scale * xi) ** 2) ** (-0.5 * self.alpha)
        return float(value) if value.ndim == 0 else value

    def rescaled(self, k: int) -> MultiplierSymbol:
        return MultiplierSymbol(alpha=self.alpha, scale=self.scale * int(k))


@dataclass(frozen=True, eq=False)
class CosineSeries:
    """Even, 2pi/k-periodic function a_0/2 + sum_j a_j cos(j k x)."""

    base_wavenumber: int
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        if int(self.base_wavenumber) != self.base_wavenumber or self.base_wavenumber < 1:
            raise ValueError("base_wavenumber must be a positive integer")
        coeffs = np.array(self.coeffs, dtype=float, copy=True).ravel()
        if coeffs.size < 1:
            raise ValueError("a cosine series needs at least the a_0 coefficient")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("cosine coefficients must be finite")
        coeffs.flags.writeable = False
        object.__setattr__(self, "base_wavenumber", int(self.base_wavenumber))
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def zeros(cls, base_wavenumber: int, modes: int) -> CosineSeries:
        return cls(base_wavenumber, np.zeros(modes + 1))

    @classmethod
    def constant(cls, value: float, base_wavenumber: int, modes: int) -> CosineSeries:
        coeffs = np.zeros(modes + 1)
        coeffs[0] = 2.0 * value
        return cls(base_wavenumber, coeffs)

    @property
    def modes(self) -> int:
        return self.coeffs.size - 1

    @property
    def wavenumbers(self) -> np.ndarray:
        return self.base_wavenumber * np.arange(self.modes + 1)

    @property
    def period(self) -> float:
        return 2 * np.pi / self.base_wavenumber

    @property
    def mean(self) -> float:
        return 0.5 * float(self.coeffs[0])

    def is_trivial(self, tol: float = 0.0) -> bool:
        """True when the nonconstant part vanishes (up to `tol`)."""
        return bool(np.all(np.abs(self.coeffs[1:]) <= tol))

    def with_coeffs(self, coeffs) -> CosineSeries:
        return CosineSeries(self.base_wavenumber, coeffs)

    def _check_base(self, other: CosineSeries) -> None:
        from fkdv.errors import BaseMismatchError

        if other.base_wavenumber != self.base_wavenumber:
            raise BaseMismatchError(
                f"base wavenumbers differ: {self.base_wavenumber} vs {other.base_wavenumber}"
            )

    def __add__(self, other: CosineSeries) -> CosineSeries:
        self._check_base(other)
        n = max(self.modes, other.modes) + 1
        out = np.zeros(n)
        out[: self.coeffs.size] += self.coeffs
        out[: other.coeffs.size] += other.coeffs
        return self.with_coeffs(out)

    def __sub__(self, other: CosineSeries) -> CosineSeries:
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> CosineSeries:
        return self.with_coeffs(float(scalar) * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> CosineSeries:
        return self * -1.0

    def to_dict(self) -> dict:
        return {"k": self.base_wavenumber, "coeffs": [float(c) for c in self.coeffs]}


@dataclass(frozen=True)
class SteadyState:
    """A candidate solution pair (phi, mu) of mu*phi - L phi - phi^2/2 = 0.

    The constant of integration is fixed to zero. Admissibility (phi <= mu) is
    not enforced here; the corrector and the diagnostics check it.
    """

    phi: CosineSeries
    mu: float

    def __post_init__(self) -> None:
        if not np.isfinite(self.mu):
            raise ValueError("wave speed must be finite")
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def k(self) -> int:
        return self.phi.base_wavenumber

    @property
    def modes(self) -> int:
        return self.phi.modes

    def to_dict(self, alpha: float) -> dict:
        return {
            "alpha": float(alpha),
            "k": self.k,
            "mu": self.mu,
            "coeffs": [float(c) for c in self.phi.coeffs],
        }

    def to_json(self, alpha: float) -> str:
        return json.dumps(self.to_dict(alpha))

    @classmethod
    def from_dict(cls, data: dict) -> SteadyState:
        return cls(CosineSeries(int(data["k"]), data["coeffs"]), float(data["mu"]))

    @classmethod
    def from_json(cls, data: str) -> SteadyState:
        return cls.from_dict(json.loads(data))


@dataclass(frozen=True, eq=False)
class KernelTable:
    """Samples of K_P and K_P' on the open half-period grid x_j = j*pi/G."""

    alpha: float
    grid: np.ndarray
    values: np.ndarray
    derivative_values: np.ndarray
    truncation_modes: int
    tail_bound: float
    origin_value: float  # K_P(0), not part of the half-period grid
    scale: int = 1

    def __post_init__(self) -> None:
        for name in ("grid", "values", "derivative_values"):
            arr = np.array(getattr(self, name), dtype=float, copy=True)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if not (self.grid.shape == self.values.shape == self.derivative_values.shape):
            raise ValueError("kernel table columns must have equal length")

    @property
    def resolution(self) -> int:
        return int(self.grid.size)


@dataclass
class PropertyCheck:
    """Outcome of one inequality check; margin > 0 means satisfied with room."""

    check: str
    passed: bool
    margin: float
    detail: str = ""
    applicable: bool = True

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "pass": bool(self.passed),
            "margin": float(self.margin),
            "detail": self.detail,
            "applicable": bool(self.applicable),
        }


@dataclass
class DiagnosticsReport:
    checks: list[PropertyCheck] = field(default_factory=list)
    crest_exponent: float | None = None
    second_derivative_at_crest: float | None = None
    lipschitz_estimate: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[PropertyCheck]:
        return [c for c in self.checks if not c.passed]

    def get(self, name: str) -> PropertyCheck | None:
        for c in self.checks:
            if c.check == name:
                return c
        return None

    def to_dict(self) -> dict:
        return {
            "checks": [c.to_dict() for c in self.checks],
            "crest_exponent": self.crest_exponent,
            "second_derivative_at_crest": self.second_derivative_at_crest,
            "lipschitz_estimate": self.lipschitz_estimate,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class LocalBifurcationData:
    k: int
    mu_star: float
    phi2: CosineSeries
    mu2: float


@dataclass(frozen=True)
class BranchPoint:
    state: SteadyState
    s: float  # amplitude parameter, the coefficient a_1
    newton_residual: float
    crest_gap: float
    iterations: int = 0
    diagnostics: DiagnosticsReport | None = None
    flagged: bool = False

    @property
    def mu(self) -> float:
        return self.state.mu

    @property
    def modes(self) -> int:
        return self.state.modes


@dataclass
class BranchRun:
    alpha: float
    k: int
    points: list[BranchPoint]
    stopped_reason: str
    modes: int
    newton_tol: float
    stop_crest_gap: float

    @property
    def last(self) -> BranchPoint | None:
        return self.points[-1] if self.points else None

    def to_metadata(self) -> dict:
        return {
            "alpha": self.alpha,
            "k": self.k,
            "modes": self.modes,
            "newton_tol": self.newton_tol,
            "stop_crest_gap": self.stop_crest_gap,
            "points": len(self.points),
            "stopped_reason": self.stopped_reason,
        }


def _sign(value: float) -> str:
    return "negative" if value < 0 else "positive"


@dataclass(frozen=True)
class Mu2Estimate:
    """Second-order speed coefficient from the closed formula and from the branch."""

    formula: float
    numeric: float
    s_values: tuple[float, ...] = ()

    @property
    def relative_error(self) -> float:
        return abs(self.numeric - self.formula) / abs(self.formula)

    @property
    def discrepancy(self) -> bool:
        # A negative formula value contradicts the supercritical positivity claim
        return self.formula < 0 or _sign(self.formula) != _sign(self.numeric)

    def to_dict(self) -> dict:
        return {
            "mu2_formula": self.formula,
            "mu2_numeric": self.numeric,
            "mu2_formula_sign": _sign(self.formula),
            "mu2_numeric_sign": _sign(self.numeric),
            "relative_error": self.relative_error,
            "discrepancy": self.discrepancy,
            "s_values": list(self.s_values),
        }


@dataclass
class AsymptoticsReport:
    eps: list[float]
    residual_norms: list[float]
    mu_errors: list[float]
    residual_order: float
    mu_order: float
    mu2_formula: float
    mu2_numeric: float
    discrepancy: bool

    @property
    def passed(self) -> bool:
        return self.residual_order >= 2.7 and self.mu_order >= 2.7

    def to_json(self) -> str:
        data = asdict(self)
        data["passed"] = self.passed
        data["mu2_formula_sign"] = _sign(self.mu2_formula)
        data["mu2_numeric_sign"] = _sign(self.mu2_numeric)
        return json.dumps(data, indent=2)
