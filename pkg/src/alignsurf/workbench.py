"""Sweep runner, named-output registry, and deterministic CSV emission.

Tables are plain (meta, header, rows) bundles.  Every emitted CSV starts with
a comment line carrying the generating scenario's name and content hash, so a
table can always be traced to the configuration that produced it; numbers are
written with 17 significant digits and LF line endings, which makes re-runs
byte-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from . import adoption, microsim, repair, thresholds
from .errors import ConfigurationError, ScenarioError
from .families import feasibility_s, overt_vulnerability, value_and_cost
from .model_core import (
    Architecture,
    codification_margin,
    dF_dx,
    poisson_intensity,
    pwf,
    pwf_k,
    total_failure,
    total_failure_max,
)
from .scenario import Scenario, with_value


@dataclass(frozen=True)
class Table:
    """A CSV-ready result: traceability metadata, column names, rows."""

    meta: dict
    header: list[str]
    rows: list[tuple]


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep: dotted path, ascending grid, named outputs."""

    parameter_path: str
    grid: tuple[float, ...]
    outputs: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.grid:
            raise ConfigurationError("sweep grid must be nonempty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigurationError("sweep grid must be strictly ascending")
        if not self.outputs:
            raise ConfigurationError(
                f"sweep outputs must be nonempty; valid names: {sorted(OUTPUTS)}"
            )


def _at_point(scenario: Scenario) -> Architecture:
    return scenario.architecture


def _mu(sc: Scenario) -> float:
    return float(poisson_intensity(_at_point(sc), sc.intensity, sc.variant))


def _pwf(sc: Scenario) -> float:
    return float(pwf(_mu(sc)))


def _f0(sc: Scenario) -> float:
    a = _at_point(sc)
    return float(overt_vulnerability(a.x, a.s, sc.safeguards, sc.overt))


def _failure(sc: Scenario) -> float:
    return float(total_failure(_pwf(sc), _f0(sc)))


def _margin_pair(sc: Scenario) -> tuple[float, float]:
    a = _at_point(sc)
    h, df = codification_margin(a.x, a.s, sc.intensity, sc.safeguards, sc.overt)
    return float(h), float(df)


def _x_crit_binding(sc: Scenario) -> float:
    value = thresholds.x_crit_binding(sc.target, sc.intensity, sc.econ, sc.variant)
    return math.nan if value is None else value


def _s_flip(sc: Scenario) -> float:
    a = _at_point(sc)
    value = thresholds.s_flip(a.x, sc.intensity, sc.safeguards, sc.overt)
    return math.nan if value is None else value


def _require_inherited(sc: Scenario):
    if sc.inherited is None:
        raise ConfigurationError(
            "this output needs a [repair.inherited] section in the scenario"
        )
    return sc.inherited


def _std_crit(sc: Scenario) -> thresholds.StdCritGap:
    inh = _require_inherited(sc)
    return thresholds.s_std_crit_and_gap(
        inh.x_H, sc.intensity, sc.target, inh.s_std_H
    )


def _repair_report(sc: Scenario) -> repair.RepairReport:
    inh = _require_inherited(sc)
    if sc.repair is None:
        raise ConfigurationError("this output needs a [repair] section in the scenario")
    return repair.optimize_repair(inh, sc, sc.repair)


#: Registry of named scalar outputs: name -> (description, evaluator).
OUTPUTS: dict[str, tuple[str, Callable[[Scenario], float]]] = {
    "mu": ("within-form intensity at the architecture point", _mu),
    "mu0": ("baseline within-form intensity (derived)", lambda sc: sc.intensity.mu0),
    "eta": ("standardized intensity coefficient (derived)", lambda sc: sc.intensity.eta),
    "pwf": ("within-form success probability", _pwf),
    "pwf_k": (
        "probability of at least k effective moves",
        lambda sc: float(pwf_k(_mu(sc), sc.variant.k)),
    ),
    "F0": ("overt-channel success probability", _f0),
    "F": ("total failure, benchmark aggregation", _failure),
    "F_max": (
        "total failure, choice-based max aggregation",
        lambda sc: float(total_failure_max(_pwf(sc), _f0(sc))),
    ),
    "h": ("net codification margin", lambda sc: _margin_pair(sc)[0]),
    "dF_ds": ("derivative of total failure in s", lambda sc: _margin_pair(sc)[1]),
    "dF_dx": (
        "derivative of total failure in x at fixed s",
        lambda sc: dF_dx(
            _at_point(sc).x, _at_point(sc).s, sc.intensity, sc.safeguards, sc.overt
        ),
    ),
    "dF_dx_binding": (
        "total derivative of failure in x along s = S(x)",
        lambda sc: dF_dx(
            _at_point(sc).x, _at_point(sc).s, sc.intensity, sc.safeguards,
            sc.overt, binding=True, econ_cfg=sc.econ,
        ),
    ),
    "S": (
        "codification floor at x",
        lambda sc: float(feasibility_s(_at_point(sc).x, sc.econ)),
    ),
    "G": (
        "ordinary value at the architecture point",
        lambda sc: float(value_and_cost(_at_point(sc).x, _at_point(sc).s, sc.econ)[0]),
    ),
    "C": (
        "operating cost at the architecture point",
        lambda sc: float(value_and_cost(_at_point(sc).x, _at_point(sc).s, sc.econ)[1]),
    ),
    "objective": (
        "adoption objective at the architecture point (must be feasible)",
        lambda sc: adoption.adoption_objective(_at_point(sc).x, _at_point(sc).s, sc),
    ),
    "objective_binding": (
        "adoption objective on the binding path at x",
        lambda sc: adoption.binding_objective(sc, _at_point(sc).x),
    ),
    "tau": (
        "intensity cutoff for the concern level",
        lambda sc: thresholds.intensity_cutoff(sc.target, sc.variant.k),
    ),
    "margin": (
        "mu minus tau (positive = exploitable)",
        lambda sc: thresholds.surface_check(
            _at_point(sc), sc.intensity, sc.target, sc.variant
        ).margin,
    ),
    "exploitable": (
        "1 when the architecture point is above the concern boundary",
        lambda sc: float(
            thresholds.surface_check(
                _at_point(sc), sc.intensity, sc.target, sc.variant
            ).exploitable
        ),
    ),
    "x_crit": (
        "critical scale at the architecture codification",
        lambda sc: thresholds.x_crit(sc.target, sc.intensity, _at_point(sc).s),
    ),
    "x_crit_binding": (
        "critical scale on the binding path (nan = no crossing)",
        _x_crit_binding,
    ),
    "s_flip": (
        "codification flip point at the architecture scale (nan = none)",
        _s_flip,
    ),
    "s_std_crit": (
        "critical insider-facing standardization for the inherited state",
        lambda sc: _std_crit(sc).s_std_crit,
    ),
    "g_H": ("inherited standardization excess", lambda sc: _std_crit(sc).g_H),
    "x_star": (
        "optimal binding-path scale",
        lambda sc: adoption.optimize_scale(sc).x_star,
    ),
    "u_star": (
        "objective value at the optimal scale",
        lambda sc: adoption.optimize_scale(sc).u_star,
    ),
    "zeta": (
        "within-form success at the adopted binding point",
        lambda sc: adoption.binding_pwf(sc, adoption.optimize_scale(sc).x_star),
    ),
    "u_repair": ("optimal unwinding effort", lambda sc: _repair_report(sc).u_star),
    "pwf_post": (
        "within-form success after optimal repair",
        lambda sc: _repair_report(sc).pwf_post,
    ),
}


def run_sweep(scenario: Scenario, sweep: SweepSpec, jobs: int = 1) -> Table:
    """Evaluate the requested outputs across the parameter grid.

    One row per grid value; rows are computed independently (parallelizable)
    and emitted in grid order, so the result does not depend on jobs.
    """
    unknown = [name for name in sweep.outputs if name not in OUTPUTS]
    if unknown:
        raise ConfigurationError(
            f"unknown output names {unknown}; valid names: {sorted(OUTPUTS)}"
        )
    # Resolve the path eagerly so a bad path fails before any work runs.
    with_value(scenario, sweep.parameter_path, sweep.grid[0])

    def row(value: float) -> tuple:
        varied = with_value(scenario, sweep.parameter_path, value)
        return (value,) + tuple(OUTPUTS[name][1](varied) for name in sweep.outputs)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(row, sweep.grid))
    else:
        rows = [row(v) for v in sweep.grid]

    return Table(
        meta={
            "scenario": scenario.name,
            "hash": scenario.content_hash,
            "parameter": sweep.parameter_path,
        },
        header=[sweep.parameter_path] + list(sweep.outputs),
        rows=rows,
    )


def sim_inputs(scenario: Scenario) -> dict:
    """Resolve simulation inputs, deriving unset ones from the model.

    Defaults: interfaces n_scale * x, attempts M(r_m), per-attempt
    probability s * kappa * psi, baseline mu0 from the safeguard mapping, and
    the variant's k.
    """
    settings = scenario.sim
    arch = scenario.architecture
    cfg = scenario.response
    q = float(cfg.remedy_hazard(scenario.safeguards.r_q))
    n_x = (
        settings.n_interfaces
        if settings.n_interfaces is not None
        else scenario.search.n_scale * arch.x
    )
    attempts = (
        settings.attempts_per_interface
        if settings.attempts_per_interface is not None
        else float(cfg.throughput(scenario.safeguards.r_m))
    )
    p_attempt = (
        settings.p_attempt
        if settings.p_attempt is not None
        else arch.s
        * float(cfg.coupling(scenario.safeguards.r_kappa))
        * float(cfg.persistence(q))
    )
    mu0 = settings.mu0 if settings.mu0 is not None else scenario.intensity.mu0
    k = settings.k_required if settings.k_required is not None else scenario.variant.k
    return {
        "n_x": float(n_x),
        "attempts": float(attempts),
        "p_attempt": float(p_attempt),
        "mu0": float(mu0),
        "k_required": int(k),
        "replications": settings.replications,
        "seed": scenario.seed,
    }


def run_simulation(
    scenario: Scenario, jobs: int = 1, replications: int | None = None,
    seed: int | None = None,
) -> microsim.SimResult:
    """Run the within-form microsimulation configured by the scenario."""
    inputs = sim_inputs(scenario)
    if replications is not None:
        inputs["replications"] = replications
    if seed is not None:
        inputs["seed"] = seed
    return microsim.simulate_real_counts(jobs=jobs, **inputs)


def _format(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    return format(float(value), ".17g")


def render_csv(table: Table) -> str:
    """Render a table in the canonical dialect (meta comment, header, LF)."""
    meta = " ".join(f"{k}={v}" for k, v in table.meta.items())
    lines = [f"# {meta}", ",".join(table.header)]
    for row in table.rows:
        lines.append(",".join(_format(v) for v in row))
    return "\n".join(lines) + "\n"


def write_table(path: str | Path, table: Table) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_csv(table))
    return path


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse a grid argument: 'lo:hi:n' (inclusive linspace) or 'a,b,c'."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ScenarioError(f"grid must be lo:hi:n or comma list, got {text!r}")
        try:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ScenarioError(f"cannot parse grid {text!r}") from None
        if n < 2 or not lo < hi:
            raise ScenarioError(f"grid needs lo < hi and n >= 2, got {text!r}")
        step = (hi - lo) / (n - 1)
        return tuple(lo + i * step for i in range(n))
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ScenarioError(f"cannot parse grid {text!r}") from None
