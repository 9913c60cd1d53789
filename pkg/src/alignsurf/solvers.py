"""Deterministic scalar solvers: sign-change bisection and golden-section.

Every boundary in the model is one-dimensional along a stated path, so these
two routines (plus bracket expansion) are the only root/optimum machinery in
the package.  Midpoints are exact binary midpoints and there is no stochastic
restarting, so repeated solves are bit-identical.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import DomainError

#: Default absolute tolerance on the solver argument.
DEFAULT_XTOL = 1e-10
#: Hard iteration ceiling for all bisections.
DEFAULT_MAX_ITER = 200

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class RootResult:
    """Outcome of a bracketed scalar root solve.

    On success ``value`` lies inside ``bracket`` and ``abs(residual)`` is at
    most the requested function tolerance (when one was given).
    """

    value: float
    residual: float
    iterations: int
    bracket: tuple[float, float]
    converged: bool


def bisect(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = DEFAULT_XTOL,
    ftol: float | None = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> RootResult:
    """Find a sign change of ``fn`` on [lo, hi] by deterministic bisection.

    Requires fn(lo) and fn(hi) of opposite (weak) sign.  Stops once the
    bracket width falls below ``xtol`` and, if ``ftol`` is given, the midpoint
    residual is within ``ftol`` as well.
    """
    if not lo < hi:
        raise DomainError(f"bisect needs lo < hi, got [{lo}, {hi}]")
    f_lo = fn(lo)
    f_hi = fn(hi)
    if f_lo == 0.0:
        return RootResult(lo, 0.0, 0, (lo, hi), True)
    if f_hi == 0.0:
        return RootResult(hi, 0.0, 0, (lo, hi), True)
    if math.copysign(1.0, f_lo) == math.copysign(1.0, f_hi):
        raise DomainError(
            f"bisect bracket does not change sign: fn({lo})={f_lo}, fn({hi})={f_hi}"
        )
    a, b = lo, hi
    f_a = f_lo
    mid = 0.5 * (a + b)
    f_mid = fn(mid)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        mid = 0.5 * (a + b)
        f_mid = fn(mid)
        if f_mid == 0.0:
            break
        if math.copysign(1.0, f_a) == math.copysign(1.0, f_mid):
            a, f_a = mid, f_mid
        else:
            b = mid
        if (b - a) <= xtol and (ftol is None or abs(f_mid) <= ftol):
            break
    converged = (b - a) <= xtol or f_mid == 0.0
    if ftol is not None:
        converged = converged and abs(f_mid) <= ftol
    return RootResult(mid, f_mid, iterations, (lo, hi), converged)


def expand_upper(
    fn: Callable[[float], float],
    lo: float,
    hi0: float,
    *,
    max_doublings: int = 200,
) -> float:
    """Grow ``hi`` by doubling until fn(hi) >= 0 (fn increasing from fn(lo) < 0)."""
    hi = hi0
    for _ in range(max_doublings):
        if fn(hi) >= 0.0:
            return hi
        hi *= 2.0
    raise DomainError(f"could not bracket a sign change above {lo} within {hi}")


def golden_max(
    fn: Callable[[float], float],
    lo: float,
    hi: float,
    *,
    xtol: float = 1e-9,
    max_iter: int = 300,
) -> tuple[float, float]:
    """Maximize a unimodal scalar function on [lo, hi] by golden-section.

    Returns ``(x, fn(x))`` with ``x`` located to within ``xtol``.  On a
    non-unimodal function the result is a local maximum of the bracket; the
    callers guard against that with a grid scan first.
    """
    if not lo <= hi:
        raise DomainError(f"golden_max needs lo <= hi, got [{lo}, {hi}]")
    a, b = lo, hi
    if (b - a) <= xtol:
        x = 0.5 * (a + b)
        return x, fn(x)
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    f_c = fn(c)
    f_d = fn(d)
    for _ in range(max_iter):
        if (b - a) <= xtol:
            break
        if f_c >= f_d:
            b, d, f_d = d, c, f_c
            c = b - _INVPHI * (b - a)
            f_c = fn(c)
        else:
            a, c, f_c = c, d, f_d
            d = a + _INVPHI * (b - a)
            f_d = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)
