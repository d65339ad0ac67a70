"""
Thin wrappers around scipy.integrate.quad used by the radial solvers.
"""
import warnings

import numpy as np
from scipy import integrate

from .errors import QuadratureError
from .logging_config import get_logger

logger = get_logger(__name__)

EPSABS = 1e-12
EPSREL = 1e-11
LIMIT = 400
SMALL_KR = 1e-4


def quad(func, a, b, epsabs=EPSABS, epsrel=EPSREL, limit=LIMIT, **kwargs):
    """
    Adaptive Gauss-Kronrod quadrature of func over [a, b].

    Args:
        func (callable): Scalar integrand.
        a (float): Lower limit.
        b (float): Upper limit.
        epsabs (float): Absolute tolerance.
        epsrel (float): Relative tolerance.
        limit (int): Maximum number of subintervals.
        **kwargs: Forwarded to scipy.integrate.quad (weight, wvar, points).

    Returns:
        tuple: (value, error estimate).
    """
    if a == b:
        return 0.0, 0.0
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        value, error = integrate.quad(
            func, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit, **kwargs
        )
    if not (np.isfinite(value) and np.isfinite(error)):
        raise QuadratureError("Non-finite quadrature result", (a, b))
    seen = set()
    for w in caught:
        if issubclass(w.category, integrate.IntegrationWarning):
            logger.debug("quad on [%.6g, %.6g]: %s (err=%.2e)", a, b, w.message, error)
        elif (w.category, str(w.message)) not in seen:
            seen.add((w.category, str(w.message)))
            warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)
    return value, error


def radial_transform(func, a, b, k, **kwargs):
    """
    Computes 4*pi * int_a^b r^2 func(r) sin(kr)/(kr) dr.

    The k -> 0 limit uses sin(kr)/(kr) ~ 1 - (kr)^2/6, otherwise the sine
    weight of QUADPACK is used.
    """
    k = abs(float(k))
    if k * b < SMALL_KR:
        value, error = quad(
            lambda r: r * r * func(r) * (1.0 - (k * r) ** 2 / 6.0), a, b, **kwargs
        )
    else:
        value, error = quad(lambda r: r * func(r), a, b, weight="sin", wvar=k, **kwargs)
        value, error = value / k, error / k
    return 4 * np.pi * value, 4 * np.pi * error


def piecewise_radial_transform(func, breaks, k, **kwargs):
    """Sums radial_transform over consecutive intervals of breaks."""
    total = 0.0
    for a, b in zip(breaks[:-1], breaks[1:]):
        total += radial_transform(func, a, b, k, **kwargs)[0]
    return total
