"""
One-sided stable subordinator.

Density eta_t(s) of the delta-stable subordinator, characterized by
int_0^inf eta_t(s) e^{-s lam} ds = exp(-t lam^delta), its moments and the
Laplace identity check.

All evaluation goes through the standardized density g = eta_1 and the
self-similarity eta_t(s) = t^(-1/delta) g(s t^(-1/delta)).
"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Callable, Optional, Union

import numpy as np
from scipy.integrate import quad_vec
from scipy.special import gammaln

from app.domain.exceptions import ParameterDomainError, QuadratureAccuracyError, require
from app.domain.value_objects import DivergentMoment
from app.log.logging import logger

ArrayLike = Union[float, np.ndarray]

SWITCHOVER = 1.0        # series above, angular integral below (standardized argument)
TAIL_START = 100.0      # quadrature stops here; beyond it the series is integrated termwise
EXP_CUTOFF = 80.0       # exp(-80) is below every tolerance used here
TALBOT_NODES = 32
QUAD_EPSREL = 1e-10
QUAD_LIMIT = 2000


class DensityMethod(str, Enum):
    SERIES = "series"                       # series for x > 1, angular integral otherwise
    LAPLACE_INVERSION = "laplace_inversion"
    CLOSED_FORM_HALF = "closed_form_half"


@lru_cache(maxsize=64)
def _series_coefficients(delta: float) -> np.ndarray:
    """(1/pi) (-1)^(k+1) Gamma(k delta + 1)/k! sin(pi k delta), k = 1, 2, ..."""
    k = np.arange(1, 4001)
    log_magnitude = gammaln(k * delta + 1.0) - gammaln(k + 1.0)
    keep = max(8, int(np.argmax(log_magnitude < np.log(1e-20))) or k.size)
    k = k[:keep]
    coefficients = (-1.0) ** (k + 1) * np.exp(log_magnitude[:keep]) * np.sin(np.pi * k * delta) / np.pi
    coefficients.flags.writeable = False
    return coefficients


def integrate(
    f: Callable[[float], np.ndarray],
    a: float,
    b: float,
    tolerance: float,
    quantity: str,
    log_scale: bool = False,
) -> np.ndarray:
    """
    Adaptive Gauss-Kronrod integral of a vector-valued f over [a, b].

    With log_scale the variable is substituted as s = exp(u), which
    suits integrands spread over many decades.

    Raises:
        QuadratureAccuracyError: when quad_vec stops before the error
            estimate meets max(tolerance, QUAD_EPSREL * max|value|)
    """
    if log_scale:
        def integrand(u: float) -> np.ndarray:
            s = np.exp(u)
            return f(s) * s
        a, b = np.log(a), np.log(b)
    else:
        integrand = f
    value, error, info = quad_vec(
        integrand, a, b, epsabs=tolerance, epsrel=QUAD_EPSREL, norm="max", limit=QUAD_LIMIT, full_output=True
    )
    if not info.success:
        raise QuadratureAccuracyError(quantity, float(error), tolerance)
    return np.asarray(value, dtype=float)


def _validate_delta(delta: float) -> None:
    require(0.0 < delta < 1.0, "delta", delta, "(0, 1)")


@dataclass(frozen=True)
class StableDensityEvaluator:
    """
    Evaluator of the delta-stable subordinator density.

    The default method is the closed form for delta = 1/2 and the
    series / angular-integral pair otherwise. Laplace inversion (fixed
    Talbot contour) is available as an independent cross-check.
    """
    delta: float
    method: Optional[DensityMethod] = None
    abs_tol: float = 1e-12

    def __post_init__(self):
        _validate_delta(self.delta)
        require(self.abs_tol > 0, "abs_tol", self.abs_tol, "> 0")
        method = self.method
        if method is None:
            method = DensityMethod.CLOSED_FORM_HALF if self.delta == 0.5 else DensityMethod.SERIES
        method = DensityMethod(method)
        if method == DensityMethod.CLOSED_FORM_HALF and self.delta != 0.5:
            raise ParameterDomainError("delta", self.delta, "{0.5} for the closed form")
        object.__setattr__(self, "method", method)

    # Standardized density

    @property
    def lower_cutoff(self) -> float:
        """Standardized argument below which g < exp(-80) times polynomial factors."""
        d = self.delta
        a0 = d ** (d / (1 - d)) * (1 - d)
        return (a0 / EXP_CUTOFF) ** ((1 - d) / d)

    def standard(self, x: ArrayLike) -> np.ndarray:
        """g(x) = eta_1(x) for x > 0."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.method == DensityMethod.CLOSED_FORM_HALF:
            return self._closed_form_half(x)
        if self.method == DensityMethod.LAPLACE_INVERSION:
            return np.maximum(self._talbot(x), 0.0)
        out = np.empty_like(x)
        large = x > SWITCHOVER
        if np.any(large):
            out[large] = self._series(x[large])
        if np.any(~large):
            out[~large] = self._angular(x[~large])
        return np.maximum(out, 0.0)

    @staticmethod
    def _closed_form_half(x: np.ndarray) -> np.ndarray:
        return x ** -1.5 / (2.0 * np.sqrt(np.pi)) * np.exp(-0.25 / x)

    def _series(self, x: np.ndarray) -> np.ndarray:
        c = _series_coefficients(self.delta)
        k = np.arange(1, c.size + 1)
        powers = np.exp(-np.outer(np.log(x), k * self.delta + 1.0))
        return powers @ c

    def _angular(self, x: np.ndarray) -> np.ndarray:
        """
        Angular integral representation for x <= 1:
        g(x) = d/(1-d) x^(-1/(1-d)) (1/pi) int_0^pi A(phi) exp(-A(phi) x^(-d/(1-d))) dphi
        """
        d = self.delta
        scale = x ** (-d / (1 - d))
        log_prefactor = np.log(d / (1 - d) / np.pi) - np.log(x) / (1 - d)

        def integrand(phi: float) -> np.ndarray:
            log_a = (
                d / (1 - d) * np.log(np.sin(d * phi))
                + np.log(np.sin((1 - d) * phi))
                - np.log(np.sin(phi)) / (1 - d)
            )
            with np.errstate(over="ignore"):
                return np.exp(log_a - np.exp(log_a) * scale + log_prefactor)

        return integrate(integrand, 0.0, np.pi, self.abs_tol, "stable density (angular)")

    def _talbot(self, x: np.ndarray) -> np.ndarray:
        """Fixed Talbot inversion of exp(-z^delta)."""
        m = TALBOT_NODES
        theta = np.arange(1, m) * np.pi / m
        cot = 1.0 / np.tan(theta)
        sigma = theta + (theta * cot - 1.0) * cot
        r = 2.0 * m / (5.0 * x)
        nodes = r[:, None] * theta[None, :] * (cot[None, :] + 1j)
        terms = np.exp(x[:, None] * nodes - nodes ** self.delta) * (1.0 + 1j * sigma[None, :])
        head = 0.5 * np.exp(r * x - r ** self.delta)
        return r / m * (head + np.sum(terms.real, axis=1))

    # Scaled quantities

    def density(self, t: float, s: ArrayLike) -> np.ndarray:
        """eta_t(s) through self-similarity."""
        scale = t ** (-1.0 / self.delta)
        return scale * self.standard(np.asarray(s, dtype=float) * scale)

    def series_tail(self, upper: float, alpha: float) -> float:
        """int_upper^inf x^alpha g(x) dx for upper > 1 and alpha < delta."""
        c = _series_coefficients(self.delta)
        k = np.arange(1, c.size + 1)
        exponent = alpha - k * self.delta
        return float(np.sum(c * upper ** exponent / (-exponent)))

    def standardized_integral(self, alpha: float, lam: ArrayLike, tolerance: Optional[float] = None) -> np.ndarray:
        """
        I(alpha, Lam) = int_0^inf x^alpha g(x) exp(-Lam x) dx for each Lam >= 0.

        Zero entries of Lam require alpha < delta and receive the termwise
        series tail beyond TAIL_START.
        """
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        tolerance = tolerance or 100 * self.abs_tol
        positive = lam[lam > 0]
        upper = TAIL_START if positive.size == 0 else max(TAIL_START, EXP_CUTOFF / positive.min())
        lower = self.lower_cutoff

        def integrand(x: float) -> np.ndarray:
            return x ** alpha * self.standard(x)[0] * np.exp(-x * lam)

        value = integrate(integrand, lower, upper, tolerance, "subordinator integral", log_scale=True)
        zero = lam == 0
        if np.any(zero):
            value[zero] += self.series_tail(upper, alpha)
        return value

    def laplace_transform(self, t: float, lam: ArrayLike, tolerance: Optional[float] = None) -> np.ndarray:
        """int eta_t(s) exp(-s lam) ds for each lam >= 0."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        return self.standardized_integral(0.0, lam * t ** (1.0 / self.delta), tolerance)

    def moment(self, t: float, alpha: float, tolerance: Optional[float] = None) -> Union[float, DivergentMoment]:
        """int eta_t(s) s^alpha ds; DivergentMoment when alpha >= delta."""
        if alpha >= self.delta:
            return DivergentMoment(delta=self.delta, t=t, alpha=alpha)
        value = self.standardized_integral(alpha, 0.0, tolerance)[0]
        return float(t ** (alpha / self.delta) * value)


def _validate(delta: float, t: float) -> None:
    _validate_delta(delta)
    require(t > 0, "t", t, "t > 0")


def evaluator(delta: float, method: Optional[DensityMethod] = None) -> StableDensityEvaluator:
    return StableDensityEvaluator(delta=delta, method=method)


def density(delta: float, t: float, s: ArrayLike, method: Optional[DensityMethod] = None) -> np.ndarray:
    """eta_t^(delta)(s) for s > 0 (scalar or array)."""
    _validate(delta, t)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr <= 0):
        raise ParameterDomainError("s", float(s_arr.min()), "s > 0")
    values = evaluator(delta, method).density(t, s_arr)
    return float(values[0]) if s_arr.ndim == 0 else values


def moment(delta: float, t: float, alpha: float) -> Union[float, DivergentMoment]:
    """Moment of order alpha; equals Gamma(1 - alpha/delta)/Gamma(1 - alpha) t^(alpha/delta) when alpha < delta."""
    _validate(delta, t)
    result = evaluator(delta).moment(t, alpha)
    logger.debug(
        "Subordinator moment",
        event_type="SUBORDINATOR_MOMENT",
        delta=delta,
        t=t,
        alpha=alpha,
        divergent=isinstance(result, DivergentMoment),
    )
    return result


def moment_reference(delta: float, t: float, alpha: float) -> float:
    """Closed-form moment for alpha < delta."""
    return float(np.exp(gammaln(1 - alpha / delta) - gammaln(1 - alpha)) * t ** (alpha / delta))


@dataclass(frozen=True)
class LaplaceCheck:
    quadrature: float
    reference: float
    abs_error: float

    def to_dict(self) -> dict:
        return {"quadrature": self.quadrature, "reference": self.reference, "abs_error": self.abs_error}


def laplace_check(delta: float, t: float, lam: float, abs_tol: float = 1e-8) -> LaplaceCheck:
    """
    Compare int eta_t(s) e^{-s lam} ds against exp(-t lam^delta).

    Raises:
        QuadratureAccuracyError: when the difference exceeds abs_tol
    """
    _validate(delta, t)
    require(lam >= 0, "lambda", lam, "lambda >= 0")
    quadrature = float(evaluator(delta).laplace_transform(t, lam, tolerance=0.01 * abs_tol)[0])
    reference = float(np.exp(-t * lam ** delta))
    error = abs(quadrature - reference)
    if error > abs_tol:
        raise QuadratureAccuracyError(f"Laplace transform (delta={delta}, t={t}, lambda={lam})", error, abs_tol)
    return LaplaceCheck(quadrature=quadrature, reference=reference, abs_error=error)


def density_bound_constant(delta: float, t: float, s_grid: ArrayLike) -> float:
    """Smallest C with eta_t(s) <= C min(t^(-1/delta), t s^(-1-delta)) on the grid."""
    _validate(delta, t)
    s = np.asarray(s_grid, dtype=float)
    values = density(delta, t, s)
    envelope = np.minimum(t ** (-1.0 / delta), t * s ** (-1.0 - delta))
    return float(np.max(values / envelope))
