"""Figure datasets: threshold geometry as reproducible CSV tables.

Three datasets are supported:

* fig1  -- the concern boundary pwf(x, s) = p_bar in design space, the
           binding adoption path (x, S(x)), and their crossing;
* fig2  -- the codification margin decomposition over s at the scenario's
           scale, with the flip point where the net margin changes sign;
* figB1 -- search-form concern boundaries at p_bar = 0.60 for a set of
           safeguard bundles, for comparing how safeguards move the surface.

Every emitted point carries the residual of its defining equation, so a
reader can audit the geometry without re-running the solvers.
"""

from __future__ import annotations

import math

import numpy as np

from . import thresholds
from .errors import ConfigurationError
from .families import Safeguards, feasibility_s
from .model_core import (
    Architecture,
    codification_margin,
    per_interface_pi,
    poisson_intensity,
    pwf,
    search_params_for,
)
from .scenario import Scenario
from .solvers import bisect
from .workbench import Table

#: The search-form comparison figure is pinned to this concern level.
FIGB1_P_BAR = 0.60

FIGURE_IDS = ("fig1", "fig2", "figB1")


def _meta(scenario: Scenario, **extra) -> dict:
    meta = {"scenario": scenario.name, "hash": scenario.content_hash}
    meta.update(extra)
    return meta


def _fig1(scenario: Scenario) -> dict[str, Table]:
    ip = scenario.intensity
    target = scenario.target
    variant = scenario.variant
    econ = scenario.econ
    n = scenario.figures.fig1_points
    xs = np.linspace(0.0, econ.x_bar, n)

    def success(x: float, s: float) -> float:
        return float(pwf(poisson_intensity(Architecture(x, s), ip, variant)))

    locus_rows = []
    for x in xs:
        x = float(x)
        lo = success(x, 0.0) - target.p_bar
        hi = success(x, 1.0) - target.p_bar
        if lo > 0.0 or hi < 0.0:
            continue  # boundary does not pass through this scale column
        root = bisect(lambda s: success(x, s) - target.p_bar, 0.0, 1.0, xtol=1e-12)
        locus_rows.append((x, root.value, abs(root.residual)))

    path_rows = []
    for x in xs:
        x = float(x)
        s_floor = float(feasibility_s(x, econ))
        path_rows.append((x, s_floor, success(x, s_floor)))

    crossing_rows = []
    note = "ok"
    x_cross = thresholds.x_crit_binding(target, ip, econ, variant)
    if x_cross is None:
        note = "no crossing of the binding path in range"
    else:
        lam_cross = math.nan
        if scenario.adoption.lambda_bracket is not None:
            lam = thresholds.lambda_crit(target, scenario)
            lam_cross = math.nan if lam is None else lam
        s_cross = float(feasibility_s(x_cross, econ))
        crossing_rows.append(
            (x_cross, s_cross, lam_cross, abs(success(x_cross, s_cross) - target.p_bar))
        )

    return {
        "fig1_threshold": Table(
            _meta(scenario, p_bar=target.p_bar),
            ["x", "s_threshold", "residual"],
            locus_rows,
        ),
        "fig1_path": Table(
            _meta(scenario), ["x", "s_floor", "pwf"], path_rows
        ),
        "fig1_crossing": Table(
            _meta(scenario, note=note),
            ["x_cross", "s_cross", "lambda_crit", "residual"],
            crossing_rows,
        ),
    }


def _fig2(scenario: Scenario) -> dict[str, Table]:
    ip = scenario.intensity
    x = scenario.architecture.x
    n = scenario.figures.fig2_points
    s_grid = np.linspace(0.0, 1.0, n)
    h, df_ds = codification_margin(x, s_grid, ip, scenario.safeguards, scenario.overt)
    mu = ip.mu0 + ip.eta * x * s_grid
    identity_residual = np.abs(df_ds - np.exp(-mu) * h)
    from .families import overt_vulnerability, overt_vulnerability_ds

    f0 = overt_vulnerability(x, s_grid, scenario.safeguards, scenario.overt)
    deterrence = -overt_vulnerability_ds(x, s_grid, scenario.safeguards, scenario.overt)
    within = (1.0 - f0) * ip.eta * x
    rows = [
        (float(s), float(d), float(w), float(hh), float(dd), float(rr))
        for s, d, w, hh, dd, rr in zip(
            s_grid, deterrence, within, h, df_ds, identity_residual
        )
    ]

    crossing_rows = []
    note = "ok"
    flip = thresholds.s_flip(x, ip, scenario.safeguards, scenario.overt)
    if flip is None:
        note = "net margin does not change sign on [0,1]"
    else:
        h_flip, _ = codification_margin(
            x, flip, ip, scenario.safeguards, scenario.overt
        )
        crossing_rows.append((flip, abs(float(h_flip))))

    return {
        "fig2_margins": Table(
            _meta(scenario, x=x),
            ["s", "overt_deterrence", "within_form_margin", "h", "dF_ds", "residual"],
            rows,
        ),
        "fig2_crossing": Table(
            _meta(scenario, x=x, note=note), ["s_flip", "residual"], crossing_rows
        ),
    }


def _figB1(scenario: Scenario) -> dict[str, Table]:
    bundles = scenario.figures.figB1_bundles
    if len(bundles) < 2:
        raise ConfigurationError(
            "figB1 needs at least two safeguard bundles; set figures.figB1_bundles"
        )
    tau = thresholds.intensity_cutoff(thresholds.ThresholdTarget(p_bar=FIGB1_P_BAR))
    n = scenario.figures.figB1_points
    xs = np.linspace(0.0, scenario.econ.x_bar, n)
    rows = []
    notes = []
    for idx, bundle in enumerate(bundles):
        from .families import derive_intensity

        mu0 = derive_intensity(bundle, scenario.response).mu0
        if mu0 >= tau:
            notes.append(f"bundle {idx}: baseline already above the cutoff")
            continue

        def excess(x: float, s: float, bundle: Safeguards = bundle, mu0: float = mu0) -> float:
            params = search_params_for(
                x, s, bundle, scenario.response, scenario.search.n_scale
            )
            nu = -math.log1p(-per_interface_pi(params))
            return mu0 + params.N_x * nu - tau

        found_any = False
        for x in xs:
            x = float(x)
            if x == 0.0 or excess(x, 1.0) < 0.0:
                continue  # even full codification stays below the cutoff here
            root = bisect(lambda s: excess(x, s), 0.0, 1.0, xtol=1e-12)
            rows.append(
                (idx, bundle.r_m, bundle.r_kappa, bundle.r_q, x, root.value,
                 abs(root.residual))
            )
            found_any = True
        if not found_any:
            notes.append(f"bundle {idx}: no boundary crossing in range")
    note = "; ".join(notes) if notes else "ok"
    return {
        "figB1_loci": Table(
            _meta(scenario, p_bar=FIGB1_P_BAR, note=note),
            ["bundle", "r_m", "r_kappa", "r_q", "x", "s_locus", "residual"],
            rows,
        ),
    }


def emit_figure_data(scenario: Scenario, figure_id: str) -> dict[str, Table]:
    """Compute the named figure dataset as a dict of tables keyed by stem."""
    if figure_id == "fig1":
        return _fig1(scenario)
    if figure_id == "fig2":
        return _fig2(scenario)
    if figure_id == "figB1":
        return _figB1(scenario)
    raise ConfigurationError(
        f"unknown figure id {figure_id!r}; valid ids: {FIGURE_IDS}"
    )
