"""Closed-form probability engine for the two failure channels.

Within-form success is a rare-event machine: a per-attempt pass-and-persist
probability compounds over attempts and interfaces into a success intensity,
and intensities from independent channels add.  Everything downstream
(thresholds, adoption, repair) consumes the maps defined here, and every
analytic derivative exported here is validated against central finite
differences in the test suite.

Numerical care: small probabilities are handled with expm1/log1p throughout,
since the interesting regimes sit exactly where naive 1-(1-p)^n would lose
precision.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, DomainError
from .families import (
    EconConfig,
    IntensityParams,
    OvertConfig,
    Safeguards,
    SafeguardResponseConfig,
    VariantConfig,
    ambiguity_weight,
    feasibility_s,
    feasibility_slope,
    nonlinear_index,
    overt_vulnerability,
    overt_vulnerability_ds,
    overt_vulnerability_dx,
)


@dataclass(frozen=True)
class Architecture:
    """A bundled design point: scale x >= 0, codification s in [0, 1]."""

    x: float
    s: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and self.x >= 0.0):
            raise ConfigurationError(f"x must be finite and >= 0, got {self.x}")
        if not (math.isfinite(self.s) and 0.0 <= self.s <= 1.0):
            raise ConfigurationError(f"s must lie in [0,1], got {self.s}")


@dataclass(frozen=True)
class SplitArchitecture:
    """Design point with codification unbundled into insider-facing
    standardization (s_std) and oversight-facing auditability (s_aud)."""

    x: float
    s_std: float
    s_aud: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and self.x >= 0.0):
            raise ConfigurationError(f"x must be finite and >= 0, got {self.x}")
        for name in ("s_std", "s_aud"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ConfigurationError(f"{name} must lie in [0,1], got {v}")


@dataclass(frozen=True)
class SearchParams:
    """Inputs of the interface-probing representation.

    N_x interfaces, M attempts per interface, per-attempt probability rho of
    a passing erosive variant, persistence probability psi.  N_x and M are
    reals here; the Monte Carlo module handles their conversion to counts.
    """

    N_x: float
    M: float
    rho: float
    psi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.N_x) and self.N_x >= 0.0):
            raise ConfigurationError(f"N_x must be >= 0, got {self.N_x}")
        if not (math.isfinite(self.M) and self.M >= 0.0):
            raise ConfigurationError(f"M must be >= 0, got {self.M}")
        for name in ("rho", "psi"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ConfigurationError(f"{name} must lie in [0,1], got {v}")


@dataclass(frozen=True)
class OperationalizationProtocol:
    """Score-to-action protocol: automatic Flag below tau_L, automatic Pass
    above tau_H, logging depth ell for the record trail."""

    tau_L: float
    tau_H: float
    ell: float

    def __post_init__(self) -> None:
        for name in ("tau_L", "tau_H"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ConfigurationError(f"{name} must lie in [0,1], got {v}")
        if self.tau_L > self.tau_H:
            raise ConfigurationError(
                f"tau_L must be <= tau_H, got {self.tau_L} > {self.tau_H}"
            )
        if not (math.isfinite(self.ell) and self.ell >= 0.0):
            raise ConfigurationError(f"ell must be >= 0, got {self.ell}")


def search_params_for(
    x: float,
    s: float,
    safeguards: Safeguards,
    cfg: SafeguardResponseConfig,
    n_scale: float,
) -> SearchParams:
    """Wire the default search microstructure to a design point.

    N(x) = n_scale * x, M = M(r_m), rho = s * kappa(r_kappa),
    psi = psi(q(r_q)).  The linear forms for N and rho are first-order
    defaults; replace the SearchParams fields directly for anything else.
    """
    if n_scale < 0.0:
        raise ConfigurationError(f"n_scale must be >= 0, got {n_scale}")
    q = float(cfg.remedy_hazard(safeguards.r_q))
    return SearchParams(
        N_x=n_scale * x,
        M=float(cfg.throughput(safeguards.r_m)),
        rho=s * float(cfg.coupling(safeguards.r_kappa)),
        psi=float(cfg.persistence(q)),
    )


def per_interface_pi(p: SearchParams) -> float:
    """Probability of at least one effective erosive move at one interface.

    pi = 1 - (1 - rho*psi)^M, evaluated in log space so tiny per-attempt
    probabilities survive.
    """
    pp = p.rho * p.psi
    if p.M == 0.0 or pp == 0.0:
        return 0.0
    if pp >= 1.0:
        raise DegenerateInputError(
            "per-attempt probability rho*psi = 1 with M > 0 makes pi = 1 "
            "and the per-interface intensity infinite"
        )
    return -math.expm1(p.M * math.log1p(-pp))


def search_pwf(p: SearchParams, mu0: float) -> float:
    """Within-form success under the search representation.

    nu = -log(1 - pi) converts the per-interface probability into an
    intensity; the total intensity mu0 + N_x * nu then maps to success the
    usual way.  Raises for pi = 1, where nu blows up.
    """
    if mu0 < 0.0:
        raise DomainError(f"mu0 must be >= 0, got {mu0}")
    pi = per_interface_pi(p)
    if pi >= 1.0:
        raise DegenerateInputError("pi = 1 gives an infinite interface intensity")
    nu = -math.log1p(-pi)
    return -math.expm1(-(mu0 + p.N_x * nu))


def poisson_intensity(a: Architecture, ip: IntensityParams, variant: VariantConfig):
    """Within-form intensity mu at a design point, per the selected variant.

    benchmark: mu0 + eta*x*s; ambiguity: mu0 + eta*x*s*omega(s);
    nonlinear: mu0 + eta*phi(x, s).  Always >= mu0.
    """
    if variant.mode == "benchmark":
        footprint = a.x * a.s
    elif variant.mode == "ambiguity":
        footprint = a.x * a.s * ambiguity_weight(a.s, variant)
    else:
        footprint = nonlinear_index(a.x, a.s, variant)
    return ip.mu0 + ip.eta * footprint


def pwf(mu):
    """Within-form success probability 1 - exp(-mu)."""
    mu = np.asarray(mu, float)
    if np.any(mu < 0.0):
        raise DomainError(f"mu must be >= 0, got {mu}")
    return -np.expm1(-mu)


def pwf_k(mu, k: int):
    """Probability of at least k effective moves: Poisson upper tail.

    1 - exp(-mu) * sum_{j<k} mu^j / j!.  Reduces to pwf at k = 1, increases
    in mu, decreases in k.
    """
    if not isinstance(k, int) or k < 1:
        raise DomainError(f"k must be an integer >= 1, got {k!r}")
    mu = np.asarray(mu, float)
    if np.any(mu < 0.0):
        raise DomainError(f"mu must be >= 0, got {mu}")
    term = np.exp(-mu)
    below = term.copy()
    for j in range(1, k):
        term = term * mu / j
        below = below + term
    return 1.0 - below


def total_failure(pwf_val, f0):
    """Benchmark aggregation of the two channels.

    F = pwf + (1 - pwf) * f0: failure if the within-form channel succeeds, or
    the overt channel succeeds given the within-form one did not.
    """
    pwf_val = np.asarray(pwf_val, float)
    f0 = np.asarray(f0, float)
    if np.any((pwf_val < 0.0) | (pwf_val > 1.0)) or np.any((f0 < 0.0) | (f0 > 1.0)):
        raise DomainError("total_failure needs channel probabilities in [0,1]")
    return pwf_val + (1.0 - pwf_val) * f0


def total_failure_max(pwf_val, f0):
    """Choice-based aggregation: effort concentrates on the better channel.

    Dominated by the benchmark aggregation everywhere.
    """
    pwf_val = np.asarray(pwf_val, float)
    f0 = np.asarray(f0, float)
    if np.any((pwf_val < 0.0) | (pwf_val > 1.0)) or np.any((f0 < 0.0) | (f0 > 1.0)):
        raise DomainError("total_failure_max needs channel probabilities in [0,1]")
    return np.maximum(pwf_val, f0)


def total_failure_max_partials(pwf_val: float, f0: float) -> tuple[float, float]:
    """Subgradient of the max aggregator: (dF/dpwf, dF/dF0).

    Nondifferentiable only on the knife edge pwf = f0; there the within-form
    branch is reported and a RuntimeWarning is emitted.
    """
    if pwf_val == f0:
        warnings.warn(
            "max aggregator queried on the knife edge pwf == F0; "
            "returning the within-form branch",
            RuntimeWarning,
            stacklevel=2,
        )
        return 1.0, 0.0
    if pwf_val > f0:
        return 1.0, 0.0
    return 0.0, 1.0


def split_failure(
    sa: SplitArchitecture,
    ip: IntensityParams,
    safeguards: Safeguards,
    overt_cfg: OvertConfig,
):
    """Total failure when codification is unbundled.

    The within-form channel sees only insider-facing standardization; the
    overt channel sees only oversight-facing auditability.
    """
    mu = ip.mu0 + ip.eta * sa.x * sa.s_std
    f0 = overt_vulnerability(sa.x, sa.s_aud, safeguards, overt_cfg)
    return total_failure(pwf(mu), f0)


def split_partials(
    sa: SplitArchitecture,
    ip: IntensityParams,
    safeguards: Safeguards,
    overt_cfg: OvertConfig,
) -> tuple[float, float]:
    """Signed marginal effects (dF/ds_aud <= 0, dF/ds_std >= 0).

    Auditability only tightens the overt channel; standardization only feeds
    the within-form channel.  No flip is possible in the split formulation.
    """
    mu = ip.mu0 + ip.eta * sa.x * sa.s_std
    p = float(pwf(mu))
    f0 = float(overt_vulnerability(sa.x, sa.s_aud, safeguards, overt_cfg))
    d_aud = (1.0 - p) * float(
        overt_vulnerability_ds(sa.x, sa.s_aud, safeguards, overt_cfg)
    )
    d_std = (1.0 - f0) * math.exp(-mu) * ip.eta * sa.x
    return d_aud, d_std


def codification_margin(
    x,
    s,
    ip: IntensityParams,
    safeguards: Safeguards,
    overt_cfg: OvertConfig,
):
    """Net codification margin h(s) and the full derivative dF/ds.

    h = F0_s + (1 - F0) * eta * x trades the remaining overt deterrence
    against the extra within-form exploitability; dF/ds = exp(-mu) * h shares
    its sign.  With the exponential overt family h is nondecreasing in s, so
    it changes sign at most once (protective, then risk-increasing).
    """
    x = np.asarray(x, float)
    f0 = overt_vulnerability(x, s, safeguards, overt_cfg)
    f0_s = overt_vulnerability_ds(x, s, safeguards, overt_cfg)
    h = f0_s + (1.0 - f0) * ip.eta * x
    mu = ip.mu0 + ip.eta * x * np.asarray(s, float)
    return h, np.exp(-mu) * h


def dF_dx(
    x: float,
    s: float,
    ip: IntensityParams,
    safeguards: Safeguards,
    overt_cfg: OvertConfig,
    binding: bool = False,
    econ_cfg: EconConfig | None = None,
) -> float:
    """Derivative of total failure with respect to scale.

    Non-binding: codification held fixed at s.  Binding: s follows the floor
    S(x) (the supplied s is ignored) and the chain-rule terms through S' are
    included.  The binding form needs econ_cfg for the floor shape.
    """
    if binding:
        if econ_cfg is None:
            raise ConfigurationError("binding dF_dx needs econ_cfg for S(x)")
        s_eff = float(feasibility_s(x, econ_cfg))
        sprime = float(feasibility_slope(x, econ_cfg))
        f0 = float(overt_vulnerability(x, s_eff, safeguards, overt_cfg))
        f0_x = float(overt_vulnerability_dx(x, s_eff, safeguards, overt_cfg))
        f0_s = float(overt_vulnerability_ds(x, s_eff, safeguards, overt_cfg))
        mu = ip.mu0 + ip.eta * x * s_eff
        return math.exp(-mu) * (
            f0_x + f0_s * sprime + (1.0 - f0) * ip.eta * (s_eff + x * sprime)
        )
    f0 = float(overt_vulnerability(x, s, safeguards, overt_cfg))
    f0_x = float(overt_vulnerability_dx(x, s, safeguards, overt_cfg))
    mu = ip.mu0 + ip.eta * x * s
    return math.exp(-mu) * f0_x + (1.0 - f0) * math.exp(-mu) * ip.eta * s


def aggregate_partials(f0, mu0, eta, x, s):
    """Leverage of (F0, mu0, eta) on total failure, holding (x, s) fixed.

    All three are nonnegative, which yields the dominance result: a bundle
    that weakly lowers all of (mu0, eta, F0) weakly lowers F everywhere.
    """
    f0 = np.asarray(f0, float)
    damp = np.exp(-(np.asarray(mu0, float) + np.asarray(eta, float) * x * s))
    return damp, (1.0 - f0) * damp, (1.0 - f0) * damp * x * s


def protocol_to_split(p: OperationalizationProtocol) -> tuple[float, float]:
    """Map a score-to-action protocol to (s_std, s_aud).

    A narrower uncertainty band means more of the score space gets automatic,
    reproducible treatment: s_std = 1 - (tau_H - tau_L).  Logging depth
    saturates into auditability: s_aud = 1 - exp(-ell).
    """
    s_std = 1.0 - (p.tau_H - p.tau_L)
    s_aud = -math.expm1(-p.ell)
    return s_std, s_aud
