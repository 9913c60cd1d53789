"""Post-crisis unwinding: how much inherited standardization gets rolled back.

After a temporary pressure episode, installed scale and auditability are
sunk; a successor government can only pay a quadratic refactoring cost to
lower insider-facing standardization.  The question the optimizer answers is
whether the chosen effort clears the gap g_H back to the safe region -- and
the central diagnosis is that it often will not: repair is positive but
incomplete, leaving within-form success above the concern level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, TYPE_CHECKING

import numpy as np

from .errors import ConfigurationError, DomainError
from .families import overt_vulnerability, value_and_cost
from .model_core import SplitArchitecture, pwf, split_failure
from .solvers import golden_max
from .thresholds import baseline_saturated, s_std_crit_and_gap

if TYPE_CHECKING:
    from .scenario import Scenario


@dataclass(frozen=True)
class InheritedState:
    """What the crisis episode leaves behind: scale, auditability,
    insider-facing standardization."""

    x_H: float
    s_aud_H: float
    s_std_H: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_H) and self.x_H >= 0.0):
            raise ConfigurationError(f"x_H must be >= 0, got {self.x_H}")
        for name in ("s_aud_H", "s_std_H"):
            v = getattr(self, name)
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise ConfigurationError(f"{name} must lie in [0,1], got {v}")


@dataclass(frozen=True)
class RepairConfig:
    """Refactoring cost K(u; x) = kappa_cost * (1 + phi_cost * x) * u**2 / 2,
    post-crisis pressure lambda_L, and the (default zero) sensitivity of
    ordinary value to insider-facing standardization."""

    kappa_cost: float = 5.0
    phi_cost: float = 1.0
    lambda_L: float = 0.3
    b_sstd_weight: float = 0.0

    def __post_init__(self) -> None:
        for name in ("kappa_cost", "phi_cost", "lambda_L"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ConfigurationError(f"{name} must be > 0, got {v}")
        if not (math.isfinite(self.b_sstd_weight) and self.b_sstd_weight >= 0.0):
            raise ConfigurationError(
                f"b_sstd_weight must be >= 0, got {self.b_sstd_weight}"
            )


class HypothesisFlags(NamedTuple):
    positive_marginal_at_zero: bool
    cost_dominates_below_threshold: bool
    above_threshold_inherited: bool


@dataclass(frozen=True)
class RepairReport:
    """Outcome of the unwinding problem, with the diagnosis spelled out."""

    u_star: float
    s_std_post: float
    g_H: float
    pwf_post: float
    hypothesis_flags: HypothesisFlags
    conclusion: str

    def __post_init__(self) -> None:
        if self.conclusion not in (
            "incomplete-unwinding",
            "full-unwinding",
            "no-repair",
            "saturated-baseline",
        ):
            raise ConfigurationError(f"unknown conclusion {self.conclusion!r}")


def refactoring_cost(u: float, x: float, cfg: RepairConfig) -> float:
    """K(u; x): quadratic in effort, steeper for larger installed systems."""
    return 0.5 * cfg.kappa_cost * (1.0 + cfg.phi_cost * x) * u * u


def refactoring_cost_du(u: float, x: float, cfg: RepairConfig) -> float:
    """Marginal cost K_u(u; x) = kappa_cost * (1 + phi_cost * x) * u."""
    return cfg.kappa_cost * (1.0 + cfg.phi_cost * x) * u


def ordinary_value(
    state: InheritedState, u: float, scenario: "Scenario", cfg: RepairConfig
) -> float:
    """Ordinary-governance value net of cost at post-repair standardization.

    Value and cost run on (x_H, s_aud_H); insider-facing standardization only
    enters through the linear b_sstd_weight knob (zero by default).
    """
    value, cost = value_and_cost(state.x_H, state.s_aud_H, scenario.econ)
    return (
        cfg.lambda_L * float(value)
        - float(cost)
        + cfg.b_sstd_weight * (state.s_std_H - u)
    )


def repair_objective(
    u: float, state: InheritedState, scenario: "Scenario", cfg: RepairConfig
) -> float:
    """W(u): ordinary value minus refactoring cost minus expected failure loss."""
    if not 0.0 <= u <= state.s_std_H:
        raise DomainError(f"u must lie in [0, {state.s_std_H}], got {u}")
    sa = SplitArchitecture(x=state.x_H, s_std=state.s_std_H - u, s_aud=state.s_aud_H)
    failure = float(
        split_failure(sa, scenario.intensity, scenario.safeguards, scenario.overt)
    )
    loss = scenario.adoption.delta * scenario.adoption.omega * failure
    return ordinary_value(state, u, scenario, cfg) - refactoring_cost(u, state.x_H, cfg) - loss


def marginal_benefit(
    u: float, state: InheritedState, scenario: "Scenario", cfg: RepairConfig
) -> float:
    """Marginal value of one more unit of unwinding (cost side excluded).

    delta*omega * (1 - F0) * exp(-mu) * eta * x_H evaluated at the post-repair
    standardization level, minus the ordinary-value sensitivity.  Grows with
    u along the path: the deeper the unwinding, the rarer within-form success
    already is, and the larger the marginal damping of the remaining margin.
    """
    ip = scenario.intensity
    s_std = state.s_std_H - u
    f0 = float(
        overt_vulnerability(state.x_H, state.s_aud_H, scenario.safeguards, scenario.overt)
    )
    mu = ip.mu0 + ip.eta * state.x_H * s_std
    d_omega = scenario.adoption.delta * scenario.adoption.omega
    return d_omega * (1.0 - f0) * math.exp(-mu) * ip.eta * state.x_H - cfg.b_sstd_weight


def _sup_marginal_below_threshold(
    state: InheritedState,
    scenario: "Scenario",
    cfg: RepairConfig,
    s_std_crit: float,
    n_grid: int = 10_000,
) -> float:
    """Grid supremum of the marginal benefit over the below-threshold range.

    The marginal benefit is monotone in s_std for this family, so the grid
    supremum is exact up to grid resolution.
    """
    ip = scenario.intensity
    f0 = float(
        overt_vulnerability(state.x_H, state.s_aud_H, scenario.safeguards, scenario.overt)
    )
    d_omega = scenario.adoption.delta * scenario.adoption.omega
    s_grid = np.linspace(0.0, s_std_crit, n_grid)
    mb = (
        d_omega
        * (1.0 - f0)
        * np.exp(-(ip.mu0 + ip.eta * state.x_H * s_grid))
        * ip.eta
        * state.x_H
        - cfg.b_sstd_weight
    )
    return float(np.max(mb))


def optimize_repair(
    state: InheritedState,
    scenario: "Scenario",
    cfg: RepairConfig,
    *,
    grid_points: int | None = None,
) -> RepairReport:
    """Solve the unwinding problem and diagnose the outcome.

    Grid scan plus golden-section refinement over effort in [0, s_std_H].
    The two sufficient conditions for positive-but-incomplete repair are
    evaluated numerically and reported: marginal benefit beats marginal cost
    at zero effort, and marginal cost at the gap g_H beats every marginal
    benefit available below the threshold.
    """
    if state.x_H <= 0.0:
        raise DomainError("repair analysis requires installed scale x_H > 0")
    tol = scenario.tolerances
    n = grid_points if grid_points is not None else tol.grid_points
    target = scenario.target
    ip = scenario.intensity

    saturated = baseline_saturated(ip, target)
    s_std_crit, g_H = s_std_crit_and_gap(state.x_H, ip, target, state.s_std_H)

    def w(u: float) -> float:
        return repair_objective(u, state, scenario, cfg)

    us = np.linspace(0.0, state.s_std_H, n)
    values = np.array([w(float(u)) for u in us])
    best = int(np.argmax(values))
    lo = float(us[max(best - 1, 0)])
    hi = float(us[min(best + 1, n - 1)])
    u_star, w_star = golden_max(w, lo, hi, xtol=tol.golden_xtol)
    if values[best] > w_star:
        u_star = float(us[best])

    s_std_post = state.s_std_H - u_star
    mu_post = ip.mu0 + ip.eta * state.x_H * s_std_post
    pwf_post = float(pwf(mu_post))

    flags = HypothesisFlags(
        positive_marginal_at_zero=(
            marginal_benefit(0.0, state, scenario, cfg)
            > refactoring_cost_du(0.0, state.x_H, cfg)
        ),
        cost_dominates_below_threshold=(
            refactoring_cost_du(g_H, state.x_H, cfg)
            > _sup_marginal_below_threshold(state, scenario, cfg, s_std_crit)
        ),
        above_threshold_inherited=g_H > 0.0,
    )

    u_eps = 10.0 * tol.golden_xtol
    if saturated:
        conclusion = "saturated-baseline"
    elif u_star <= u_eps:
        conclusion = "no-repair"
    elif u_star >= g_H - u_eps and pwf_post <= target.p_bar + 1e-9:
        conclusion = "full-unwinding"
    else:
        conclusion = "incomplete-unwinding"

    return RepairReport(
        u_star=float(u_star),
        s_std_post=float(s_std_post),
        g_H=float(g_H),
        pwf_post=pwf_post,
        hypothesis_flags=flags,
        conclusion=conclusion,
    )
