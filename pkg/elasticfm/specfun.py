"""
Cylindrical Bessel and Hankel functions of integer order.

Thin, vectorized wrappers around `scipy.special` that add the domain checks and the
order bound used throughout the pipeline. Every function accepts scalars or arrays and
broadcasts `n` against `x`. Results that overflow raise `NumericalError` instead of
returning inf or nan. Negative orders are evaluated through the reflection
C_{-n} = (-1)^n C_n so that the symmetry holds exactly.
"""
import numpy as np
from scipy import special

from elasticfm.errors import DomainError, NumericalError

MAX_ORDER = 128


def _check_order(n) -> np.ndarray:
    n = np.asarray(n)
    if not np.issubdtype(n.dtype, np.integer):
        if not np.all(np.equal(np.mod(n, 1), 0)):
            raise DomainError(f"Bessel orders must be integers, got {n!r}")
        n = n.astype(int)
    if np.any(np.abs(n) > MAX_ORDER):
        raise DomainError(
            f"Bessel order {int(np.max(np.abs(n)))} exceeds the supported maximum {MAX_ORDER}"
        )
    return n


def _check_argument(x, allow_zero: bool) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    bad = x < 0 if allow_zero else x <= 0
    if np.any(bad) or not np.all(np.isfinite(x)):
        bound = "x >= 0" if allow_zero else "x > 0"
        raise DomainError(f"Argument outside the domain {bound}: {x[bad]!r}")
    return x


def _finite(name: str, values, n: np.ndarray, x: np.ndarray):
    bad = ~np.isfinite(np.asarray(values))
    if np.any(bad):
        orders, args = np.broadcast_arrays(n, x)
        first = np.unravel_index(np.argmax(bad), bad.shape)
        raise NumericalError(
            f"{name} is not representable at order n={int(orders[first])}, x={float(args[first])!r}"
        )
    return values


def _reflected(func, n: np.ndarray, x: np.ndarray):
    # (-1)^n for negative orders, 1 otherwise
    sign = np.where((n < 0) & (np.abs(n) % 2 == 1), -1.0, 1.0)
    return sign * func(np.abs(n), x)


def bessel_j(n, x):
    """J_n(x) for integer n and real x >= 0."""
    n = _check_order(n)
    x = _check_argument(x, allow_zero=True)
    return _reflected(special.jv, n, x)


def bessel_y(n, x):
    """Y_n(x) for integer n and real x > 0."""
    n = _check_order(n)
    x = _check_argument(x, allow_zero=False)
    return _finite("Y_n", _reflected(special.yv, n, x), n, x)


def hankel1(n, x):
    """H^(1)_n(x) = J_n(x) + i Y_n(x) for integer n and real x > 0."""
    n = _check_order(n)
    x = _check_argument(x, allow_zero=False)
    return _finite("H_n", _reflected(special.hankel1, n, x), n, x)


def bessel_j_deriv(n, x):
    """J'_n(x) = J_{n-1}(x) - (n/x) J_n(x)."""
    n = _check_order(n)
    x = _check_argument(x, allow_zero=False)
    return _reflected(special.jv, n - 1, x) - n / x * _reflected(special.jv, n, x)


def bessel_y_deriv(n, x):
    """Y'_n(x) = Y_{n-1}(x) - (n/x) Y_n(x)."""
    n = _check_order(n)
    x = _check_argument(x, allow_zero=False)
    return _finite(
        "Y'_n", _reflected(special.yv, n - 1, x) - n / x * _reflected(special.yv, n, x), n, x
    )


def hankel1_deriv(n, x):
    """H^(1)'_n(x) = H^(1)_{n-1}(x) - (n/x) H^(1)_n(x)."""
    n = _check_order(n)
    x = _check_argument(x, allow_zero=False)
    derivative = _reflected(special.hankel1, n - 1, x) - n / x * _reflected(special.hankel1, n, x)
    return _finite("H'_n", derivative, n, x)
