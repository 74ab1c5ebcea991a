"""Cylinder functions of complex argument.

Thin validated wrappers over the AMOS routines in :mod:`scipy.special`; the
test suite checks them against independent series, asymptotic and Wronskian
oracles.
"""
from __future__ import annotations

import numpy as np
from scipy import special

from .errors import DomainError, NumericalError

MAX_ORDER = 200
MAX_ABS_ARG = 1e4


def _check(m, z, allow_zero=True):
    if np.any(np.asarray(m) < 0) or np.any(np.asarray(m) > MAX_ORDER):
        raise DomainError(f"order must lie in [0, {MAX_ORDER}]")
    if np.any(np.abs(z) >= MAX_ABS_ARG):
        raise DomainError(f"|z| must be below {MAX_ABS_ARG:g}")
    if not allow_zero and np.any(np.asarray(z) == 0):
        raise DomainError("Hankel functions are singular at z = 0")


def _finite(val, name, m, z):
    if not np.all(np.isfinite(val)):
        raise NumericalError(f"{name}({m}, {z}) overflowed or underflowed: {val}")
    return val


def bessel_j(m, z):
    _check(m, z)
    return _finite(special.jv(m, np.asarray(z, dtype=complex)), "J", m, z)


def bessel_j_prime(m, z, n=1):
    _check(m, z)
    return _finite(special.jvp(m, np.asarray(z, dtype=complex), n), "J'", m, z)


def hankel1(m, z):
    _check(m, z, allow_zero=False)
    return _finite(special.hankel1(m, np.asarray(z, dtype=complex)), "H1", m, z)


def hankel1_prime(m, z, n=1):
    _check(m, z, allow_zero=False)
    return _finite(special.h1vp(m, np.asarray(z, dtype=complex), n), "H1'", m, z)


def bessel_zero(m: int, l: int) -> float:
    """``l``-th positive zero of ``J_m``."""
    if not (0 <= m <= 50) or not (1 <= l <= 20):
        raise DomainError("bessel_zero supports 0 <= m <= 50 and 1 <= l <= 20")
    z = special.jn_zeros(m, l)[-1]
    if not np.isfinite(z):
        raise NumericalError(f"no bracket for zero ({m}, {l})")
    return float(z)


def bessel_prime_zero(m: int, l: int) -> float:
    """``l``-th positive zero of ``J_m'`` (``J_0'`` zero at the origin excluded)."""
    if not (0 <= m <= 50) or not (1 <= l <= 20):
        raise DomainError("bessel_prime_zero supports 0 <= m <= 50 and 1 <= l <= 20")
    if m == 0:
        return float(special.jn_zeros(1, l)[-1])
    return float(special.jnp_zeros(m, l)[-1])
