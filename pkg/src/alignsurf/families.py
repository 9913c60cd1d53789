"""Parametric functional families and the safeguard-to-intensity mapping.

The model only constrains its primitives through sign and curvature
assumptions.  This module fixes one concrete family per primitive -- the
smallest family satisfying every such assumption, each with closed-form
derivatives so the analytic results can be cross-checked numerically:

* throughput        M(r_m)   = m_floor + m_bar * exp(-a_m * r_m)      (> 0)
* coupling          k(r_k)   = kappa_floor + (1 - kappa_floor) * exp(-a_k * r_k)
* remedy hazard     q(r_q)   = min(q0 + q1 * r_q, q_cap)              (> 0)
* persistence       psi(q)   = exp(-theta * q),  psi0(q) = exp(-theta0 * q)
* overt channel     F0(x, s) = Fbar(x, r) * exp(-b * s)
* codification floor S(x)    = (x / x_bar) ** gamma_S
* ordinary value    G(x, s)  = g_x * x + g_s * s
* operating cost    C(x, s)  = (c_x * x**2 + c_s * s**2) / 2
* ambiguity weight  omega(s) = exp(-omega_rate * s)
* nonlinear index   phi(x,s) = x**alpha * s**beta

The explicit floors and caps (m_floor, kappa_floor, q_cap) make the
"speed limit" bounds structural: baseline and standardized intensities are
bounded away from zero for every admissible safeguard bundle, so no
safeguard investment can drive within-form vulnerability to zero.

All evaluation functions accept floats or numpy arrays and broadcast
elementwise; configs are immutable and validated on construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError

#: F0 is clamped into [0, 1 - EPS_CLAMP] so log/odds transforms stay finite.
EPS_CLAMP = 1e-9


def _require_finite(value: float, name: str) -> float:
    if not math.isfinite(value):
        raise ConfigurationError(f"{name} must be finite, got {value!r}")
    return float(value)


def _require_nonnegative(value: float, name: str) -> float:
    value = _require_finite(value, name)
    if value < 0.0:
        raise ConfigurationError(f"{name} must be >= 0, got {value}")
    return value


def _require_positive(value: float, name: str) -> float:
    value = _require_finite(value, name)
    if value <= 0.0:
        raise ConfigurationError(f"{name} must be > 0, got {value}")
    return value


@dataclass(frozen=True)
class Safeguards:
    """Slow-moving safeguard bundle: throughput, decoupling, remedy capacity."""

    r_m: float = 0.0
    r_kappa: float = 0.0
    r_q: float = 0.0

    def __post_init__(self) -> None:
        _require_nonnegative(self.r_m, "r_m")
        _require_nonnegative(self.r_kappa, "r_kappa")
        _require_nonnegative(self.r_q, "r_q")


@dataclass(frozen=True)
class IntensityParams:
    """Baseline (mu0) and standardized (eta) within-form intensities."""

    mu0: float
    eta: float

    def __post_init__(self) -> None:
        _require_nonnegative(self.mu0, "mu0")
        _require_nonnegative(self.eta, "eta")


@dataclass(frozen=True)
class SafeguardResponseConfig:
    """Parameters of the safeguard response curves M, kappa, q, psi, psi0.

    Floors and caps are structural: m_floor > 0 keeps some probing capacity,
    kappa_floor > 0 keeps evaluation predictive of deployment, and q_cap < inf
    bounds the remedy hazard, so persistence never reaches zero.

    theta0 defaults to theta; nothing in the model pins their ratio, so equal
    persistence exponents for baseline and standardized moves is a documented
    default, not a derived fact.
    """

    m_bar: float = 0.9
    a_m: float = 1.0
    m_floor: float = 0.1
    kappa_floor: float = 0.2
    a_k: float = 1.0
    q0: float = 0.5
    q1: float = 1.0
    q_cap: float = 2.0
    theta: float = 1.0
    theta0: float = 1.0

    def __post_init__(self) -> None:
        _require_positive(self.m_floor, "m_floor")
        _require_nonnegative(self.m_bar, "m_bar")
        _require_nonnegative(self.a_m, "a_m")
        kf = _require_positive(self.kappa_floor, "kappa_floor")
        if kf > 1.0:
            raise ConfigurationError(f"kappa_floor must lie in (0,1], got {kf}")
        _require_nonnegative(self.a_k, "a_k")
        _require_positive(self.q0, "q0")
        _require_nonnegative(self.q1, "q1")
        q_cap = _require_positive(self.q_cap, "q_cap")
        if q_cap < self.q0:
            raise ConfigurationError(
                f"q_cap must be >= q0, got q_cap={q_cap} < q0={self.q0}"
            )
        _require_positive(self.theta, "theta")
        _require_positive(self.theta0, "theta0")

    # Response curves.  Each is monotone in its safeguard and respects the
    # floor/cap bounds by construction.

    def throughput(self, r_m):
        """M(r_m): effective variants an insider can push per interface."""
        return self.m_floor + self.m_bar * np.exp(-self.a_m * np.asarray(r_m, float))

    def coupling(self, r_kappa):
        """kappa(r_kappa): how transferable review feedback is to deployment."""
        return self.kappa_floor + (1.0 - self.kappa_floor) * np.exp(
            -self.a_k * np.asarray(r_kappa, float)
        )

    def remedy_hazard(self, r_q):
        """q(r_q): reversal hazard for a passing erosive move, capped at q_cap."""
        return np.minimum(self.q0 + self.q1 * np.asarray(r_q, float), self.q_cap)

    def persistence(self, q):
        """psi(q): chance a standardized passing move outlives the remedy race."""
        return np.exp(-self.theta * np.asarray(q, float))

    def baseline_persistence(self, q):
        """psi0(q): persistence probability for baseline (non-standardized) moves."""
        return np.exp(-self.theta0 * np.asarray(q, float))


@dataclass(frozen=True)
class OvertConfig:
    """Exponentially deterred overt-abuse channel F0 = Fbar(x, r) * exp(-b*s).

    b >= 0; b = 0 switches codification deterrence off entirely, which some
    diagnostics rely on.  a_x may take either sign: scale is allowed to make
    overt abuse easier or harder.
    """

    f0: float = 0.8
    b: float = 2.0
    c_m: float = 0.0
    c_k: float = 0.0
    c_q: float = 0.0
    a_x: float = 0.0

    def __post_init__(self) -> None:
        f0 = _require_nonnegative(self.f0, "f0")
        if f0 >= 1.0:
            raise ConfigurationError(f"f0 must lie in [0,1), got {f0}")
        _require_nonnegative(self.b, "b")
        _require_nonnegative(self.c_m, "c_m")
        _require_nonnegative(self.c_k, "c_k")
        _require_nonnegative(self.c_q, "c_q")
        _require_finite(self.a_x, "a_x")


@dataclass(frozen=True)
class EconConfig:
    """Value, cost, and codification-floor shapes for the adoption stage.

    c_s = 0 (costless codification) is admitted: several closed-form
    benchmark configurations need it, and every result that relies on
    C_s > 0 checks the sign numerically instead of assuming it.
    """

    g_x: float = 1.0
    g_s: float = 0.0
    c_x: float = 1.0
    c_s: float = 0.1
    x_bar: float = 1.0
    gamma_S: float = 1.0

    def __post_init__(self) -> None:
        _require_positive(self.g_x, "g_x")
        _require_nonnegative(self.g_s, "g_s")
        _require_positive(self.c_x, "c_x")
        _require_nonnegative(self.c_s, "c_s")
        _require_positive(self.x_bar, "x_bar")
        _require_positive(self.gamma_S, "gamma_S")


_VARIANT_MODES = ("benchmark", "ambiguity", "nonlinear")


@dataclass(frozen=True)
class VariantConfig:
    """Selects and parameterizes the within-form intensity variant.

    mode "benchmark" uses the plain x*s interaction, "ambiguity" scales it by
    omega(s) = exp(-omega_rate*s), and "nonlinear" replaces it with
    phi(x, s) = x**alpha * s**beta.  k is the number of effective moves
    required for erosion (k = 1 recovers the at-least-one benchmark).
    """

    mode: str = "benchmark"
    omega_rate: float = 0.0
    alpha: float = 1.0
    beta: float = 1.0
    k: int = 1

    def __post_init__(self) -> None:
        if self.mode not in _VARIANT_MODES:
            raise ConfigurationError(
                f"variant mode must be one of {_VARIANT_MODES}, got {self.mode!r}"
            )
        _require_nonnegative(self.omega_rate, "omega_rate")
        _require_positive(self.alpha, "alpha")
        _require_positive(self.beta, "beta")
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigurationError(f"k must be an integer >= 1, got {self.k!r}")


def derive_intensity(
    safeguards: Safeguards, cfg: SafeguardResponseConfig
) -> IntensityParams:
    """Map a safeguard bundle to (mu0, eta).

    mu0 = M(r_m) * psi0(q(r_q)) is the baseline within-form intensity;
    eta = M(r_m) * kappa(r_kappa) * psi(q(r_q)) multiplies the standardized
    footprint.  Both are strictly positive (floors/caps) and weakly decreasing
    in every safeguard component.
    """
    big_m = float(cfg.throughput(safeguards.r_m))
    q = float(cfg.remedy_hazard(safeguards.r_q))
    mu0 = big_m * float(cfg.baseline_persistence(q))
    eta = big_m * float(cfg.coupling(safeguards.r_kappa)) * float(cfg.persistence(q))
    return IntensityParams(mu0=mu0, eta=eta)


def overt_base(x, safeguards: Safeguards, cfg: OvertConfig):
    """Fbar(x, r): overt-channel scale factor before codification deterrence.

    Clamped into [0, 1 - EPS_CLAMP]; the lower clamp matters only when
    a_x < 0 pushes the linear scale multiplier negative.
    """
    raw = (
        cfg.f0
        * math.exp(
            -cfg.c_m * safeguards.r_m
            - cfg.c_k * safeguards.r_kappa
            - cfg.c_q * safeguards.r_q
        )
        * (1.0 + cfg.a_x * np.asarray(x, float))
    )
    return np.clip(raw, 0.0, 1.0 - EPS_CLAMP)


def overt_vulnerability(x, s, safeguards: Safeguards, cfg: OvertConfig):
    """F0(x, s, r) = Fbar(x, r) * exp(-b * s).

    Nonincreasing in s and in each safeguard component; convex in s.
    """
    return overt_base(x, safeguards, cfg) * np.exp(-cfg.b * np.asarray(s, float))


def overt_vulnerability_ds(x, s, safeguards: Safeguards, cfg: OvertConfig):
    """Partial of F0 with respect to s: -b * F0 <= 0."""
    return -cfg.b * overt_vulnerability(x, s, safeguards, cfg)


def overt_vulnerability_dx(x, s, safeguards: Safeguards, cfg: OvertConfig):
    """Partial of F0 with respect to x.  Zero wherever the clamp binds."""
    x = np.asarray(x, float)
    scale = cfg.f0 * math.exp(
        -cfg.c_m * safeguards.r_m
        - cfg.c_k * safeguards.r_kappa
        - cfg.c_q * safeguards.r_q
    )
    raw = scale * (1.0 + cfg.a_x * x)
    interior = (raw > 0.0) & (raw < 1.0 - EPS_CLAMP)
    return np.where(interior, scale * cfg.a_x, 0.0) * np.exp(
        -cfg.b * np.asarray(s, float)
    )


def feasibility_s(x, cfg: EconConfig):
    """S(x) = (x / x_bar) ** gamma_S: minimum codification workable at scale x.

    S(0) = 0 and S(x_bar) = 1 hold exactly.
    """
    x = np.asarray(x, float)
    if np.any(x < 0.0) or np.any(x > cfg.x_bar):
        raise DomainError(f"x must lie in [0, {cfg.x_bar}], got {x}")
    return (x / cfg.x_bar) ** cfg.gamma_S


def feasibility_slope(x, cfg: EconConfig):
    """S'(x) for the power-law floor.  Unbounded at 0 when gamma_S < 1."""
    x = np.asarray(x, float)
    if np.any(x < 0.0) or np.any(x > cfg.x_bar):
        raise DomainError(f"x must lie in [0, {cfg.x_bar}], got {x}")
    g = cfg.gamma_S
    with np.errstate(divide="ignore"):
        return g * x ** (g - 1.0) / cfg.x_bar**g


def value_and_cost(x, s, cfg: EconConfig):
    """(G, C) at a design point: linear value, quadratic cost."""
    x = np.asarray(x, float)
    s = np.asarray(s, float)
    value = cfg.g_x * x + cfg.g_s * s
    cost = 0.5 * (cfg.c_x * x**2 + cfg.c_s * s**2)
    return value, cost


def ambiguity_weight(s, cfg: VariantConfig):
    """omega(s) = exp(-omega_rate * s): surviving mass of contested cases."""
    s = np.asarray(s, float)
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise DomainError(f"s must lie in [0,1], got {s}")
    return np.exp(-cfg.omega_rate * s)


def nonlinear_index(x, s, cfg: VariantConfig):
    """phi(x, s) = x**alpha * s**beta; equals x*s when alpha = beta = 1."""
    x = np.asarray(x, float)
    s = np.asarray(s, float)
    if np.any(x < 0.0) or np.any(s < 0.0):
        raise DomainError("nonlinear index requires x >= 0 and s >= 0")
    return x**cfg.alpha * s**cfg.beta
