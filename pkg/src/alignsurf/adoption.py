"""Adoption stage: objective, binding-path optimizer, and diagnostics.

The adoption objective trades modernization value against expected failure
loss.  The optimizer works along the binding path s = S(x) -- the regime in
which codification is held at the feasibility floor -- and ``binding_check``
verifies numerically that restricting attention to that path is justified,
instead of assuming it.

Optimization strategy: a dense grid scan locates the global maximum up to
grid resolution and doubles as a unimodality check; golden-section then
refines the bracketing cell.  Boundary maximizers are legal outputs, flagged
in diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, TYPE_CHECKING

import numpy as np

from .errors import (
    AssumptionViolationError,
    ConfigurationError,
    InfeasibleArchitectureError,
)
from .families import feasibility_s, value_and_cost
from .model_core import Architecture, poisson_intensity, pwf, total_failure
from .families import overt_vulnerability
from .solvers import golden_max

if TYPE_CHECKING:
    from .scenario import Scenario


@dataclass(frozen=True)
class AdoptionParams:
    """Modernization pressure, turnover probability, and failure loss.

    omega = 0 is admitted so closed-form benchmark scenarios can switch the
    failure term off entirely (delta * omega = 0).
    """

    lam: float = 0.8
    delta: float = 0.2
    omega: float = 1.0
    lambda_bracket: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ConfigurationError(f"lambda must be > 0, got {self.lam}")
        if not (math.isfinite(self.delta) and 0.0 < self.delta < 1.0):
            raise ConfigurationError(f"delta must lie in (0,1), got {self.delta}")
        if not (math.isfinite(self.omega) and self.omega >= 0.0):
            raise ConfigurationError(f"omega must be >= 0, got {self.omega}")
        if self.lambda_bracket is not None:
            lo, hi = self.lambda_bracket
            if not (math.isfinite(lo) and math.isfinite(hi) and 0.0 < lo < hi):
                raise ConfigurationError(
                    f"lambda_bracket must satisfy 0 < lo < hi, got {self.lambda_bracket}"
                )


@dataclass(frozen=True)
class IllustrationConfig:
    """Scalar-safeguard joint-choice illustration parameters.

    Safeguards collapse to one index r with intensity eta_bar * exp(-rho * r)
    and institutional cost k_cost * r**2 / 2; chi is the capacity friction of
    safeguarding a larger system.
    """

    chi: float = 0.1
    alpha_loss: float = 0.5
    gamma_loss: float = 1.0
    eta_bar: float = 1.0
    rho_decay: float = 1.0
    k_cost: float = 1.0

    def __post_init__(self) -> None:
        if self.chi < 0.0:
            raise ConfigurationError(f"chi must be >= 0, got {self.chi}")
        for name in ("alpha_loss", "gamma_loss", "eta_bar", "rho_decay", "k_cost"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ConfigurationError(f"{name} must be > 0, got {v}")


class OptimizeResult(NamedTuple):
    x_star: float
    u_star: float
    diagnostics: dict


class ScanRow(NamedTuple):
    lam: float
    x_star: float
    zeta: float


class ScanResult(NamedTuple):
    rows: list[ScanRow]
    concave: bool
    x_monotone: bool
    zeta_monotone: bool


class BindingCheck(NamedTuple):
    binds: bool
    violations: list[tuple[float, str]]


def total_failure_at(scenario: "Scenario", x: float, s: float) -> float:
    """Total failure probability at a design point under the scenario."""
    a = Architecture(x=x, s=s)
    mu = poisson_intensity(a, scenario.intensity, scenario.variant)
    f0 = overt_vulnerability(x, s, scenario.safeguards, scenario.overt)
    return float(total_failure(pwf(mu), f0))


def adoption_objective(
    x: float, s: float, scenario: "Scenario", lam: float | None = None
) -> float:
    """lam * G(x, s) - C(x, s) - delta * omega * F(x, s, r).

    Rejects infeasible points (s below the codification floor S(x)), carrying
    the shortfall so callers can report how far the request missed.
    """
    if lam is None:
        lam = scenario.adoption.lam
    floor = float(feasibility_s(x, scenario.econ))
    # Tiny slack absorbs float round-off when callers pass s = S(x) exactly.
    if s < floor - 1e-12:
        raise InfeasibleArchitectureError(
            f"s = {s} is below the codification floor S({x}) = {floor}",
            shortfall=floor - s,
        )
    value, cost = value_and_cost(x, s, scenario.econ)
    failure = total_failure_at(scenario, x, s)
    return lam * float(value) - float(cost) - scenario.adoption.delta * scenario.adoption.omega * failure


def binding_objective(scenario: "Scenario", x: float, lam: float | None = None) -> float:
    """Adoption objective evaluated on the binding path s = S(x)."""
    return adoption_objective(x, float(feasibility_s(x, scenario.econ)), scenario, lam)


def binding_pwf(scenario: "Scenario", x: float) -> float:
    """Within-form success at the binding point (x, S(x))."""
    a = Architecture(x=x, s=float(feasibility_s(x, scenario.econ)))
    return float(pwf(poisson_intensity(a, scenario.intensity, scenario.variant)))


def binding_check(
    x: float, scenario: "Scenario", n_grid: int = 201, tol: float = 1e-12
) -> BindingCheck:
    """Verify the two conditions under which s = S(x) is the optimal choice.

    On a grid over [S(x), 1]: (value) lam * G_s - C_s <= 0, i.e. raising s
    above the floor never pays in ordinary value; (failure) F_s >= 0, i.e.
    extra codification never lowers failure there.  When both hold at every
    grid point the codification choice binds at the floor; any failing
    (s, condition) pairs are returned.
    """
    floor = float(feasibility_s(x, scenario.econ))
    grid = np.linspace(floor, 1.0, n_grid)
    lam = scenario.adoption.lam
    econ = scenario.econ
    violations: list[tuple[float, str]] = []
    _, df_ds = _margin_on_grid(scenario, x, grid)
    for s, f_s in zip(grid, df_ds):
        value_margin = lam * econ.g_s - econ.c_s * s
        if value_margin > tol:
            violations.append((float(s), "value"))
        if f_s < -tol:
            violations.append((float(s), "failure"))
    return BindingCheck(binds=not violations, violations=violations)


def _margin_on_grid(scenario: "Scenario", x: float, grid: np.ndarray):
    from .model_core import codification_margin

    return codification_margin(
        x, grid, scenario.intensity, scenario.safeguards, scenario.overt
    )


def optimize_scale(
    scenario: "Scenario",
    lam: float | None = None,
    *,
    grid_points: int | None = None,
    xtol: float | None = None,
) -> OptimizeResult:
    """Maximize the binding-path objective over scale.

    Grid scan first (global max up to resolution, unimodality diagnostic),
    golden-section refinement second.  Non-unimodal objectives are reported
    in diagnostics but still yield the grid-refined global maximum.
    """
    tol = scenario.tolerances
    n = grid_points if grid_points is not None else tol.grid_points
    gx = xtol if xtol is not None else tol.golden_xtol
    x_bar = scenario.econ.x_bar
    xs = np.linspace(0.0, x_bar, n)
    values = np.array([binding_objective(scenario, float(x), lam) for x in xs])

    best = int(np.argmax(values))
    diffs = np.diff(values)
    rising_after_fall = bool(
        np.any((diffs[:-1] < -1e-13) & (diffs[1:] > 1e-13))
    )
    lo = xs[max(best - 1, 0)]
    hi = xs[min(best + 1, n - 1)]
    x_star, u_star = golden_max(
        lambda x: binding_objective(scenario, x, lam), float(lo), float(hi), xtol=gx
    )
    # Golden refinement cannot do worse than the best grid point.
    if values[best] > u_star:
        x_star, u_star = float(xs[best]), float(values[best])
    diagnostics = {
        "unimodal": not rising_after_fall,
        "boundary": x_star <= gx or x_star >= x_bar - gx,
        "grid_points": n,
        "bracket": (float(lo), float(hi)),
    }
    return OptimizeResult(x_star=float(x_star), u_star=float(u_star), diagnostics=diagnostics)


def path_concave(scenario: "Scenario", lam: float | None = None, n_grid: int = 257) -> bool:
    """Numerical concavity pre-check of the binding-path objective.

    Second differences on a uniform grid must all be nonpositive (up to
    round-off).  Results that depend on strict concavity are only asserted
    for scenarios passing this check.
    """
    xs = np.linspace(0.0, scenario.econ.x_bar, n_grid)
    values = np.array([binding_objective(scenario, float(x), lam) for x in xs])
    second = np.diff(values, 2)
    return bool(np.all(second <= 1e-10))


def scale_monotonicity_scan(scenario: "Scenario", lambda_grid) -> ScanResult:
    """x*(lam) and the binding-path success zeta(lam) across a pressure grid.

    The grid must be ascending.  When every grid pressure passes the
    concavity pre-check, x* must be strictly increasing; a violation there is
    a solver defect and raises.  Monotonicity flags are reported either way.
    """
    lams = [float(v) for v in lambda_grid]
    if any(b <= a for a, b in zip(lams, lams[1:])):
        raise ConfigurationError("lambda_grid must be strictly ascending")
    rows: list[ScanRow] = []
    concave = True
    for lam in lams:
        concave = concave and path_concave(scenario, lam)
        res = optimize_scale(scenario, lam=lam)
        rows.append(
            ScanRow(lam=lam, x_star=res.x_star, zeta=binding_pwf(scenario, res.x_star))
        )
    x_monotone = all(
        b.x_star > a.x_star - 1e-9 for a, b in zip(rows, rows[1:])
    )
    zeta_monotone = all(b.zeta >= a.zeta - 1e-9 for a, b in zip(rows, rows[1:]))
    if concave and not x_monotone:
        pair = next(
            (a.lam, b.lam) for a, b in zip(rows, rows[1:]) if b.x_star <= a.x_star - 1e-9
        )
        raise AssumptionViolationError(
            f"x* not increasing between lambda = {pair[0]} and {pair[1]} "
            "despite a concave objective"
        )
    return ScanResult(
        rows=rows, concave=concave, x_monotone=x_monotone, zeta_monotone=zeta_monotone
    )


class InteriorScale(NamedTuple):
    x: float
    clipped: bool


def illustration_interior_scale(
    r: float, cfg: IllustrationConfig, lam: float, delta: float
) -> InteriorScale:
    """Interior scale choice in the scalar-safeguard illustration.

    x = lam - chi * r - delta * alpha - delta * eta(r), clipped at zero with
    a flag.  Pressure moves the interior choice one-for-one.
    """
    eta_r = cfg.eta_bar * math.exp(-cfg.rho_decay * r)
    x = lam - cfg.chi * r - delta * cfg.alpha_loss - delta * eta_r
    if x < 0.0:
        return InteriorScale(x=0.0, clipped=True)
    return InteriorScale(x=x, clipped=False)


def illustration_safeguard_foc(
    r: float, x: float, cfg: IllustrationConfig, delta: float
) -> float:
    """Residual of the safeguard first-order condition (cost minus benefit).

    k * r + chi * x - delta * gamma - delta * x * rho * eta_bar * exp(-rho*r);
    a root marks an interior safeguard optimum.
    """
    marginal_cost = cfg.k_cost * r + cfg.chi * x
    marginal_benefit = delta * cfg.gamma_loss + delta * x * cfg.rho_decay * (
        cfg.eta_bar * math.exp(-cfg.rho_decay * r)
    )
    return marginal_cost - marginal_benefit
