"""Standard normal density, CDF, quantile and the quantile's derivative.

All functions accept scalars or arrays and return the same kind.
"""

import math

import numpy as np
from scipy.special import erfc

from .errors import DomainError

SQRT_2PI = math.sqrt(2.0 * math.pi)
_SQRT_HALF = math.sqrt(0.5)

# Rational approximation coefficients (Acklam), relative error ~1.15e-9
# before refinement.
_A = (-3.969683028665376e01, 2.209460984245205e02, -2.759285104469687e02,
      1.383577518672690e02, -3.066479806614716e01, 2.506628277459239e00)
_B = (-5.447609879822406e01, 1.615858368580409e02, -1.556989798598866e02,
      6.680131188771972e01, -1.328068155288572e01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e00,
      -2.549671010233300e00, 4.374664141464968e00, 2.938163982698783e00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e00,
      3.754408661907416e00)
_P_LOW = 0.02425


def _unwrap(x, out):
    return float(out) if np.ndim(x) == 0 else out


def _finite(x, name):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} requires finite input")
    return arr


def _interior(p, name):
    arr = np.asarray(p, dtype=float)
    if not np.all((arr > 0.0) & (arr < 1.0)):
        raise DomainError(f"{name} requires 0 < p < 1")
    return arr


def std_normal_pdf(x):
    arr = _finite(x, "std_normal_pdf")
    return _unwrap(x, np.exp(-0.5 * arr * arr) / SQRT_2PI)


def std_normal_cdf(x):
    """Phi(x), evaluated through erfc so both tails keep full relative precision."""
    arr = _finite(x, "std_normal_cdf")
    return _unwrap(x, 0.5 * erfc(-arr * _SQRT_HALF))


def _lower_tail_quantile(q):
    """Quantile for 0 < q <= 0.5, refined with one Halley step."""
    # Both rational branches are evaluated everywhere; cheaper than masking
    # for the small batches seen in training.
    t = np.sqrt(-2.0 * np.log(q))
    num = ((((_C[0] * t + _C[1]) * t + _C[2]) * t + _C[3]) * t + _C[4]) * t + _C[5]
    den = (((_D[0] * t + _D[1]) * t + _D[2]) * t + _D[3]) * t + 1.0
    x_tail = num / den

    r = q - 0.5
    s = r * r
    num = (((((_A[0] * s + _A[1]) * s + _A[2]) * s + _A[3]) * s + _A[4]) * s + _A[5]) * r
    den = ((((_B[0] * s + _B[1]) * s + _B[2]) * s + _B[3]) * s + _B[4]) * s + 1.0
    x = np.where(q < _P_LOW, x_tail, num / den)

    # x <= 0 here, so the CDF is a small erfc value with no cancellation.
    err = 0.5 * erfc(-x * _SQRT_HALF) - q
    u = err * SQRT_2PI * np.exp(0.5 * x * x)
    return x - u / (1.0 + 0.5 * x * u)


def probit(p):
    """Inverse of the standard normal CDF.

    Raises DomainError unless every entry satisfies 0 < p < 1; values are
    never clamped.
    """
    arr = np.atleast_1d(_interior(p, "probit"))
    upper = arr > 0.5
    # 1 - p is exact for p >= 0.5, which keeps probit(1 - p) == -probit(p).
    q = np.where(upper, 1.0 - arr, arr)
    x = _lower_tail_quantile(q)
    x = np.where(upper, -x, x)
    x[arr == 0.5] = 0.0
    return float(x[0]) if np.ndim(p) == 0 else x.reshape(np.shape(p))


def probit_derivative(p):
    """d probit / dp = 1 / pdf(probit(p))."""
    x = np.asarray(probit(p), dtype=float)
    return _unwrap(p, SQRT_2PI * np.exp(0.5 * x * x))


def probit_with_derivative(p):
    """(probit(p), probit_derivative(p)) sharing one quantile evaluation."""
    x = np.asarray(probit(p), dtype=float)
    return _unwrap(p, x), _unwrap(p, SQRT_2PI * np.exp(0.5 * x * x))
