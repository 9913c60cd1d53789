"""Critical-boundary solvers.

Every politically meaningful boundary in the model is one-dimensional: an
intensity cutoff, a critical scale, a codification flip point, a pressure
crossing, or a standardization gap.  This module solves each of them, with a
closed form wherever the family admits one and a deterministic bisection as
the generic (and cross-checking) route.

Convention: a margin of exactly zero is reported as not exploitable, because
the concern condition is stated as a weak inequality on the safe side.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, TYPE_CHECKING

import numpy as np

from . import adoption
from .errors import (
    AssumptionViolationError,
    ConfigurationError,
    DomainError,
    NoCrossingError,
)
from .families import (
    EconConfig,
    IntensityParams,
    OvertConfig,
    Safeguards,
    feasibility_s,
    overt_base,
)
from .model_core import Architecture, codification_margin, poisson_intensity, pwf, pwf_k
from .solvers import DEFAULT_MAX_ITER, DEFAULT_XTOL, RootResult, bisect, expand_upper
from .families import VariantConfig

if TYPE_CHECKING:
    from .scenario import Scenario

__all__ = [
    "ThresholdTarget",
    "RootResult",
    "SurfaceCheck",
    "StdCritGap",
    "intensity_cutoff",
    "surface_check",
    "x_crit",
    "x_crit_binding",
    "s_flip",
    "lambda_crit",
    "s_std_crit_and_gap",
    "baseline_saturated",
]

_BENCHMARK_VARIANT = VariantConfig()


@dataclass(frozen=True)
class ThresholdTarget:
    """Concern level: the within-form success probability that matters."""

    p_bar: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p_bar) and 0.0 < self.p_bar < 1.0):
            raise ConfigurationError(f"p_bar must lie in (0,1), got {self.p_bar}")


class SurfaceCheck(NamedTuple):
    exploitable: bool
    margin: float


class StdCritGap(NamedTuple):
    s_std_crit: float
    g_H: float


def intensity_cutoff(target: ThresholdTarget, k: int = 1) -> float:
    """Intensity tau(p_bar) at which at-least-k-move success reaches p_bar.

    k = 1 has the closed form -log(1 - p_bar); k > 1 is solved by bisection
    on the Poisson tail with an auto-expanding upper bracket.
    """
    if not isinstance(k, int) or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k!r}")
    if k == 1:
        return -math.log1p(-target.p_bar)

    def gap(mu: float) -> float:
        return float(pwf_k(mu, k)) - target.p_bar

    hi = expand_upper(gap, 0.0, max(1.0, float(k)))
    root = bisect(gap, 0.0, hi, xtol=1e-12, ftol=1e-10, max_iter=DEFAULT_MAX_ITER)
    return root.value


def surface_check(
    a: Architecture,
    ip: IntensityParams,
    target: ThresholdTarget,
    variant: VariantConfig = _BENCHMARK_VARIANT,
) -> SurfaceCheck:
    """Is the design point above the within-form concern boundary?

    margin = mu(x, s) - tau(p_bar); exploitable iff margin > 0 (a zero margin
    sits on the boundary and is reported as not exploitable).  Equivalent to
    comparing pwf(mu) with p_bar.
    """
    mu = float(poisson_intensity(a, ip, variant))
    margin = mu - intensity_cutoff(target, variant.k)
    return SurfaceCheck(exploitable=margin > 0.0, margin=margin)


def x_crit(target: ThresholdTarget, ip: IntensityParams, s: float) -> float:
    """Critical scale at fixed codification s (benchmark intensity).

    max{0, (tau - mu0) / (eta * s)}; above it, within-form success meets
    p_bar.  With eta * s = 0 the standardized term cannot grow, so no finite
    crossing exists.
    """
    denom = ip.eta * s
    if denom <= 0.0:
        raise NoCrossingError(
            "eta * s = 0: within-form intensity cannot grow with scale"
        )
    tau = intensity_cutoff(target)
    return max(0.0, (tau - ip.mu0) / denom)


def x_crit_binding(
    target: ThresholdTarget,
    ip: IntensityParams,
    econ_cfg: EconConfig,
    variant: VariantConfig = _BENCHMARK_VARIANT,
    *,
    xtol: float = DEFAULT_XTOL,
) -> float | None:
    """Smallest scale on the binding path s = S(x) that reaches p_bar.

    Returns None (no-crossing sentinel) when even (x_bar, 1) stays below the
    concern level.  At a returned interior crossing, pwf matches p_bar to
    within 1e-8.
    """

    def excess(x: float) -> float:
        a = Architecture(x=x, s=float(feasibility_s(x, econ_cfg)))
        return float(pwf(poisson_intensity(a, ip, variant))) - target.p_bar

    if excess(0.0) >= 0.0:
        return 0.0
    if excess(econ_cfg.x_bar) < 0.0:
        return None
    root = bisect(excess, 0.0, econ_cfg.x_bar, xtol=xtol, ftol=1e-9)
    return root.value


def s_flip(
    x: float,
    ip: IntensityParams,
    safeguards: Safeguards,
    overt_cfg: OvertConfig,
    method: str = "closed_form",
) -> float | None:
    """Codification level where the net margin h switches sign.

    Below the flip, extra codification lowers total failure (overt deterrence
    dominates); above it, the within-form margin wins.  Returns None when h
    does not change sign on [0, 1]: either codification is protective
    throughout (within-form margin absent) or risk-increasing from the start
    (no overt channel left to deter).

    "closed_form" uses the exponential-family formula
    ln((eta*x + b) * Fbar / (eta*x)) / b; "bisect" solves h = 0 directly.
    Both land within 1e-8 of a sign change of h.
    """
    if method not in ("closed_form", "bisect"):
        raise DomainError(f"unknown s_flip method {method!r}")
    if x <= 0.0:
        return None

    def h_at(s: float) -> float:
        h, _ = codification_margin(x, s, ip, safeguards, overt_cfg)
        return float(h)

    h0 = h_at(0.0)
    h1 = h_at(1.0)
    if not (h0 < 0.0 < h1):
        return None
    if method == "bisect" or overt_cfg.b == 0.0:
        root = bisect(h_at, 0.0, 1.0, xtol=1e-12, ftol=1e-8)
        return root.value
    eta_x = ip.eta * x
    fbar = float(overt_base(x, safeguards, overt_cfg))
    value = math.log((eta_x + overt_cfg.b) * fbar / eta_x) / overt_cfg.b
    if abs(h_at(value)) > 1e-8:
        raise AssumptionViolationError(
            f"closed-form flip point {value} does not zero the margin; "
            "the overt family may have been clamped"
        )
    return value


def lambda_crit(
    target: ThresholdTarget,
    scenario: "Scenario",
    bracket: tuple[float, float] | None = None,
    *,
    grid_points: int = 64,
    xtol: float = 1e-9,
    zeta_tol: float = 1e-6,
) -> float | None:
    """Modernization pressure at which the adopted path crosses p_bar.

    zeta(lam) is the within-form success at the optimizer's binding-path
    choice x*(lam).  Monotonicity of zeta is verified on a grid before
    bisection; a violation raises AssumptionViolationError naming the
    offending pressure pair, because the crossing logic is only meaningful
    for monotone paths.  Returns None when the bracket does not straddle
    p_bar.
    """
    if bracket is None:
        bracket = scenario.adoption.lambda_bracket
    if bracket is None:
        raise ConfigurationError(
            "lambda_crit needs a pressure bracket: pass one or set "
            "adoption.lambda_bracket in the scenario"
        )
    lam_lo, lam_hi = float(bracket[0]), float(bracket[1])
    if not lam_lo < lam_hi:
        raise ConfigurationError(f"bracket must satisfy lo < hi, got {bracket}")

    def zeta(lam: float) -> float:
        result = adoption.optimize_scale(scenario, lam=lam)
        return adoption.binding_pwf(scenario, result.x_star)

    grid = np.linspace(lam_lo, lam_hi, grid_points)
    zetas = [zeta(float(g)) for g in grid]
    for i in range(len(grid) - 1):
        if zetas[i + 1] < zetas[i] - 1e-9:
            raise AssumptionViolationError(
                "zeta is not weakly increasing on the bracket: "
                f"zeta({grid[i]:.6g}) = {zetas[i]:.9g} > "
                f"zeta({grid[i + 1]:.6g}) = {zetas[i + 1]:.9g}"
            )
    if not (zetas[0] < target.p_bar <= zetas[-1]):
        return None

    root = bisect(
        lambda lam: zeta(lam) - target.p_bar, lam_lo, lam_hi, xtol=xtol
    )
    if abs(root.residual) > zeta_tol:
        raise AssumptionViolationError(
            f"crossing residual {root.residual} exceeds {zeta_tol}; "
            "zeta may be discontinuous on this scenario"
        )
    return root.value


def baseline_saturated(ip: IntensityParams, target: ThresholdTarget) -> bool:
    """True when mu0 alone meets the cutoff.

    In that regime no amount of unwinding insider-facing standardization can
    return the polity below the concern level.
    """
    return ip.mu0 >= intensity_cutoff(target)


def s_std_crit_and_gap(
    x: float,
    ip: IntensityParams,
    target: ThresholdTarget,
    s_std_H: float,
) -> StdCritGap:
    """Critical insider-facing standardization and the inherited excess.

    s_std_crit = clip((tau - mu0) / (eta * x), 0, 1); g_H is the positive
    part of s_std_H - s_std_crit.  When the baseline is saturated
    (mu0 >= tau, see baseline_saturated) the critical level truncates to 0
    and the whole inherited standardization is excess.
    """
    if x <= 0.0:
        raise DomainError(f"x must be > 0, got {x}")
    if ip.eta <= 0.0:
        raise DomainError(f"eta must be > 0, got {ip.eta}")
    if not 0.0 <= s_std_H <= 1.0:
        raise DomainError(f"s_std_H must lie in [0,1], got {s_std_H}")
    tau = intensity_cutoff(target)
    s_crit = min(1.0, max(0.0, (tau - ip.mu0) / (ip.eta * x)))
    return StdCritGap(s_std_crit=s_crit, g_H=max(0.0, s_std_H - s_crit))
