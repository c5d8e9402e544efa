"""Log-gamma, digamma and trigamma for positive real arguments.

All three shift the argument upward with the recurrence and finish with
the asymptotic (Stirling / de Moivre) series; the loops run in the
compiled kernel when it is available.
"""
import numpy as np

from ._backend import kernels
from .errors import DomainError


def _check(x, name):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(arr > 0.0):
        bad = arr[~(arr > 0.0)]
        raise DomainError(f"{name} requires x > 0, got {bad.ravel()[0]!r}")
    return arr


def _wrap(result, x):
    if np.ndim(x) == 0:
        return float(result)
    return result


def log_gamma(x):
    """ln Gamma(x) for x > 0 (scalar or array)."""
    arr = _check(x, "log_gamma")
    return _wrap(kernels.lgamma(arr), x)


def digamma(x):
    """psi(x) = d/dx ln Gamma(x) for x > 0."""
    arr = _check(x, "digamma")
    return _wrap(kernels.digamma(arr), x)


def trigamma(x):
    """psi'(x) for x > 0."""
    arr = _check(x, "trigamma")
    return _wrap(kernels.trigamma(arr), x)


def log_beta_fn(a, b):
    """ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = log_gamma(a) + log_gamma(b) - log_gamma(a + b)
    return out
