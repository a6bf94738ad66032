# trawlkit/core/quadrature.py
#
# Numerical integration helpers shared by kernels, moments and asymptotics.
#
# Notes:
# - Finite pieces use QUADPACK adaptive Gauss-Kronrod (scipy.integrate.quad).
# - Tails [T, inf) are mapped onto [0, 1) with u = T + v/(1-v).
# - Long windows are cut into chunks and summed with math.fsum.

import math
import warnings
from functools import lru_cache
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate
from scipy.special import roots_legendre

ABS_TOL = 1e-10
REL_TOL = 1e-10
SUBINTERVAL_LIMIT = 200

ScalarFn = Callable[[float], float]


def finite_integral(
    f: ScalarFn,
    lo: float,
    hi: float,
    points: Optional[Sequence[float]] = None,
    epsabs: float = ABS_TOL,
    epsrel: float = REL_TOL,
) -> float:
    """Adaptive integral of ``f`` over [lo, hi]; ``points`` are known kinks."""
    if hi == lo:
        return 0.0
    inner = None
    if points:
        inner = sorted(p for p in points if lo < p < hi) or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(
            f,
            lo,
            hi,
            points=inner,
            epsabs=epsabs,
            epsrel=epsrel,
            limit=SUBINTERVAL_LIMIT,
        )
    return float(value)


def tail_integral(
    f: ScalarFn, lo: float, epsabs: float = ABS_TOL, epsrel: float = REL_TOL
) -> float:
    """Integral of ``f`` over [lo, inf) through the map u = lo + v/(1-v)."""

    def mapped(v: float) -> float:
        if v >= 1.0:
            return 0.0
        one_minus = 1.0 - v
        return f(lo + v / one_minus) / (one_minus * one_minus)

    return finite_integral(mapped, 0.0, 1.0, epsabs=epsabs, epsrel=epsrel)


def semi_infinite_integral(
    f: ScalarFn,
    lo: float,
    window: float = 0.0,
    chunk: Optional[float] = None,
    epsabs: float = ABS_TOL,
    epsrel: float = REL_TOL,
) -> float:
    """Integral of ``f`` over [lo, inf).

    The first ``window`` units are integrated directly in pieces of width
    ``chunk`` (one piece when chunk is None); the rest goes through
    :func:`tail_integral`.
    """
    if window <= 0.0:
        return tail_integral(f, lo, epsabs=epsabs, epsrel=epsrel)

    step = chunk if chunk and chunk > 0 else window
    pieces = []
    start = lo
    end = lo + window
    while start < end:
        stop = min(start + step, end)
        pieces.append(finite_integral(f, start, stop, epsabs=epsabs, epsrel=epsrel))
        start = stop
    pieces.append(tail_integral(f, end, epsabs=epsabs, epsrel=epsrel))
    return math.fsum(pieces)


@lru_cache(maxsize=16)
def _legendre(order: int) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(order)
    return nodes, weights


def gauss_legendre(lo: float, hi: float, order: int = 32) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of an ``order``-point Gauss-Legendre rule on [lo, hi]."""
    nodes, weights = _legendre(order)
    half = 0.5 * (hi - lo)
    return lo + half * (nodes + 1.0), half * weights
