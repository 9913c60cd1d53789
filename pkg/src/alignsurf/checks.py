"""Named verification suites tying every analytic claim to a runnable check.

Each suite evaluates a family of assertions against a scenario and reports
machine-readable pass/fail results with the measured value and tolerance.
Suites with randomized inputs draw them from a generator seeded by the
scenario seed, so re-runs are identical.

Suite vocabulary (also the CLI tokens):

* prop1       -- monotonicity of within-form success: increasing in scale and
                 codification, decreasing in every safeguard, for both the
                 search form and the intensity benchmark;
* prop2       -- one-crossing of the codification margin on the exponential
                 overt family, and closed-form vs bisection flip agreement;
* prop3       -- pressure comparative statics: x*(lambda) increasing, the
                 crossing pressure solves zeta = p_bar, and total failure at
                 the crossing equals F0 + (1 - F0) * p_bar;
* lemmaB1     -- the binding-codification conditions hold at the adopted
                 optimum, so restricting to s = S(x) is justified;
* propG1      -- repair diagnosis: the two sufficient conditions imply
                 positive-but-incomplete unwinding;
* derivatives -- every analytic derivative matches central finite
                 differences;
* microsim    -- Monte Carlo agreement with the exact law and shrinking
                 rare-event approximation error;
* all         -- everything above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import adoption, microsim, repair, thresholds, workbench
from .errors import ConfigurationError
from .families import (
    IntensityParams,
    OvertConfig,
    Safeguards,
    derive_intensity,
    feasibility_s,
    overt_vulnerability,
)
from .model_core import (
    Architecture,
    SearchParams,
    SplitArchitecture,
    aggregate_partials,
    codification_margin,
    dF_dx,
    poisson_intensity,
    pwf,
    search_params_for,
    search_pwf,
    split_failure,
    split_partials,
    total_failure,
)
from .scenario import Scenario

SUITES = ("prop1", "prop2", "prop3", "lemmaB1", "propG1", "derivatives", "microsim")


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class CheckReport:
    scenario: str
    suite: str
    results: list[CheckResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "suite": self.suite,
            "passed": self.passed,
            "results": [r.to_dict() for r in self.results],
        }


def _rng(scenario: Scenario, salt: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=scenario.seed, spawn_key=(0xC0DE, salt))
    return np.random.Generator(np.random.Philox(seq))


def _fd(fn, x: float, h: float = 1e-6) -> float:
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def _close(analytic: float, numeric: float) -> bool:
    scale = max(abs(analytic), abs(numeric))
    return abs(analytic - numeric) <= max(1e-6 * scale, 1e-9)


# ---------------------------------------------------------------------------
# prop1: monotone orderings of within-form success
# ---------------------------------------------------------------------------


def _check_prop1(scenario: Scenario, draws: int = 1000) -> list[CheckResult]:
    rng = _rng(scenario, 1)
    cfg = scenario.response
    n_scale = scenario.search.n_scale
    poisson_bad = 0
    search_bad = 0
    for _ in range(draws):
        x1, x2 = sorted(rng.uniform(0.0, 1.0, size=2))
        s1, s2 = sorted(rng.uniform(0.0, 1.0, size=2))
        r = rng.uniform(0.0, 2.0, size=3)
        j = int(rng.integers(0, 3))
        bump = float(rng.uniform(0.05, 1.0))
        r_hi = r.copy()
        r_hi[j] += bump
        guards = Safeguards(*map(float, r))
        guards_hi = Safeguards(*map(float, r_hi))
        ip = derive_intensity(guards, cfg)
        ip_hi = derive_intensity(guards_hi, cfg)

        def p(x, s, ip_=ip):
            return float(pwf(ip_.mu0 + ip_.eta * x * s))

        ok = (
            p(x2, s2) >= p(x1, s2) - 1e-12
            and p(x2, s2) >= p(x2, s1) - 1e-12
            and float(pwf(ip_hi.mu0 + ip_hi.eta * x2 * s2)) <= p(x2, s2) + 1e-12
        )
        poisson_bad += not ok

        def sp(x, s, guards_):
            params = search_params_for(x, s, guards_, cfg, n_scale)
            return search_pwf(params, derive_intensity(guards_, cfg).mu0)

        ok = (
            sp(x2, s2, guards) >= sp(x1, s2, guards) - 1e-12
            and sp(x2, s2, guards) >= sp(x2, s1, guards) - 1e-12
            and sp(x2, s2, guards_hi) <= sp(x2, s2, guards) + 1e-12
        )
        search_bad += not ok
    return [
        CheckResult(
            "prop1.poisson_monotone", poisson_bad == 0, float(poisson_bad), 0.0,
            f"ordering violations in {draws} draws (benchmark form)",
        ),
        CheckResult(
            "prop1.search_monotone", search_bad == 0, float(search_bad), 0.0,
            f"ordering violations in {draws} draws (search form)",
        ),
    ]


# ---------------------------------------------------------------------------
# prop2: one-crossing codification margin
# ---------------------------------------------------------------------------


def _sign_pattern_ok(h: np.ndarray, tol: float = 1e-12) -> bool:
    """True when the sign sequence of h is (-)* then (+)*: no fall after a rise."""
    pos = np.nonzero(h > tol)[0]
    neg = np.nonzero(h < -tol)[0]
    if pos.size == 0 or neg.size == 0:
        return True
    return int(neg.max()) < int(pos.min())


def _check_prop2(scenario: Scenario, draws: int = 1000, grid: int = 10_000) -> list[CheckResult]:
    rng = _rng(scenario, 2)
    s_grid = np.linspace(0.0, 1.0, grid)
    pattern_bad = 0
    flip_gap = 0.0
    flips = 0
    for _ in range(draws):
        x = float(rng.uniform(0.05, 1.0))
        eta = float(rng.uniform(0.1, 4.0))
        mu0 = float(rng.uniform(0.0, 1.0))
        guards = Safeguards(*map(float, rng.uniform(0.0, 2.0, size=3)))
        overt = OvertConfig(
            f0=float(rng.uniform(0.05, 0.6)),
            b=float(rng.uniform(0.2, 4.0)),
            c_m=float(rng.uniform(0.0, 1.0)),
            c_k=float(rng.uniform(0.0, 1.0)),
            c_q=float(rng.uniform(0.0, 1.0)),
            a_x=float(rng.uniform(-0.5, 0.5)),
        )
        ip = IntensityParams(mu0=mu0, eta=eta)
        h, _ = codification_margin(x, s_grid, ip, guards, overt)
        if not _sign_pattern_ok(np.asarray(h)):
            pattern_bad += 1
        closed = thresholds.s_flip(x, ip, guards, overt, method="closed_form")
        if closed is not None:
            solved = thresholds.s_flip(x, ip, guards, overt, method="bisect")
            flips += 1
            flip_gap = max(flip_gap, abs(closed - solved))
    results = [
        CheckResult(
            "prop2.one_crossing", pattern_bad == 0, float(pattern_bad), 0.0,
            f"sign-pattern violations over {draws} draws x {grid}-point grids",
        ),
        CheckResult(
            "prop2.flip_consistency", flip_gap <= 1e-8, flip_gap, 1e-8,
            f"max closed-form vs bisection gap over {flips} flips",
        ),
    ]
    a = scenario.architecture
    flip = thresholds.s_flip(a.x, scenario.intensity, scenario.safeguards, scenario.overt)
    if flip is None:
        results.append(
            CheckResult(
                "prop2.scenario_flip", True, math.nan, 1e-8,
                "scenario family has no interior flip at the architecture scale",
            )
        )
    else:
        solved = thresholds.s_flip(
            a.x, scenario.intensity, scenario.safeguards, scenario.overt, method="bisect"
        )
        gap = abs(flip - solved)
        results.append(
            CheckResult(
                "prop2.scenario_flip", gap <= 1e-8, gap, 1e-8,
                f"scenario flip at s = {flip:.9f}",
            )
        )
    return results


# ---------------------------------------------------------------------------
# prop3: pressure comparative statics and threshold crossing
# ---------------------------------------------------------------------------


def _check_prop3(scenario: Scenario) -> list[CheckResult]:
    if scenario.adoption.lambda_bracket is None:
        return [
            CheckResult(
                "prop3.bracket", True, math.nan, math.nan,
                "skipped: scenario sets no adoption.lambda_bracket",
            )
        ]
    lo, hi = scenario.adoption.lambda_bracket
    grid = np.linspace(lo, hi, 16)
    scan = adoption.scale_monotonicity_scan(scenario, grid)
    results = [
        CheckResult(
            "prop3.scan_monotone",
            bool((not scan.concave) or (scan.x_monotone and scan.zeta_monotone)),
            float(scan.x_monotone and scan.zeta_monotone),
            1.0,
            f"concave={scan.concave} x_monotone={scan.x_monotone} "
            f"zeta_monotone={scan.zeta_monotone}",
        )
    ]
    lam = thresholds.lambda_crit(scenario.target, scenario)
    if lam is None:
        results.append(
            CheckResult(
                "prop3.lambda_crit", True, math.nan, math.nan,
                "no crossing: zeta stays on one side of p_bar on the bracket",
            )
        )
        return results
    x_at = adoption.optimize_scale(scenario, lam=lam).x_star
    zeta_at = adoption.binding_pwf(scenario, x_at)
    residual = abs(zeta_at - scenario.target.p_bar)
    results.append(
        CheckResult(
            "prop3.lambda_crit", residual <= scenario.tolerances.zeta_tol,
            residual, scenario.tolerances.zeta_tol,
            f"zeta residual at lambda_crit = {lam:.9f}",
        )
    )
    above = np.linspace(lam, hi, 16)
    worst = 0.0
    for lam_i in above:
        x_i = adoption.optimize_scale(scenario, lam=float(lam_i)).x_star
        worst = min(worst, adoption.binding_pwf(scenario, x_i) - scenario.target.p_bar)
    # At the crossing itself zeta matches p_bar only as precisely as the
    # crossing was located, so the floor is the crossing tolerance.
    above_tol = scenario.tolerances.zeta_tol
    results.append(
        CheckResult(
            "prop3.above_crossing", worst >= -above_tol, worst, above_tol,
            "min of zeta - p_bar on a grid from the crossing up",
        )
    )
    s_at = float(feasibility_s(x_at, scenario.econ))
    f0_at = float(overt_vulnerability(x_at, s_at, scenario.safeguards, scenario.overt))
    failure_at = adoption.total_failure_at(scenario, x_at, s_at)
    identity = abs(failure_at - (f0_at + (1.0 - f0_at) * scenario.target.p_bar))
    # zeta is only within zeta_tol of p_bar, which bounds the identity gap.
    ident_tol = 2.0 * scenario.tolerances.zeta_tol
    results.append(
        CheckResult(
            "prop3.failure_identity", identity <= ident_tol, identity, ident_tol,
            "total failure at the crossing equals F0 + (1-F0)*p_bar",
        )
    )
    return results


# ---------------------------------------------------------------------------
# lemmaB1: binding codification at the adopted optimum
# ---------------------------------------------------------------------------


def _check_lemma_b1(scenario: Scenario) -> list[CheckResult]:
    x_star = adoption.optimize_scale(scenario).x_star
    probe = x_star if x_star > 1e-6 else scenario.econ.x_bar / 2.0
    outcome = adoption.binding_check(probe, scenario)
    return [
        CheckResult(
            "lemmaB1.binds_at_optimum", outcome.binds, float(len(outcome.violations)),
            0.0,
            f"condition violations on [S(x), 1] at x = {probe:.6f}"
            + ("" if outcome.binds else f"; first: {outcome.violations[0]}"),
        )
    ]


# ---------------------------------------------------------------------------
# propG1: incomplete post-crisis unwinding
# ---------------------------------------------------------------------------


def _check_prop_g1(scenario: Scenario) -> list[CheckResult]:
    if scenario.repair is None or scenario.inherited is None:
        return [
            CheckResult(
                "propG1.configured", True, math.nan, math.nan,
                "skipped: scenario has no repair/inherited sections",
            )
        ]
    report = repair.optimize_repair(scenario.inherited, scenario, scenario.repair)
    flags = report.hypothesis_flags
    results = []
    if all(flags):
        implied = (
            report.conclusion == "incomplete-unwinding"
            and 0.0 < report.u_star < report.g_H
        )
        results.append(
            CheckResult(
                "propG1.hypotheses_imply_incomplete", implied, report.u_star,
                report.g_H,
                f"u* = {report.u_star:.6f} must lie in (0, g_H = {report.g_H:.6f})",
            )
        )
    else:
        results.append(
            CheckResult(
                "propG1.hypotheses_imply_incomplete", True, math.nan, math.nan,
                f"hypotheses not all satisfied ({flags}); conclusion: "
                f"{report.conclusion}",
            )
        )
    if 0.0 < report.u_star < scenario.inherited.s_std_H:
        foc = abs(
            repair.marginal_benefit(
                report.u_star, scenario.inherited, scenario, scenario.repair
            )
            - repair.refactoring_cost_du(
                report.u_star, scenario.inherited.x_H, scenario.repair
            )
        )
        results.append(
            CheckResult(
                "propG1.foc_residual", foc <= 1e-6, foc, 1e-6,
                "interior optimum zeroes marginal benefit minus marginal cost",
            )
        )
    crit, _ = thresholds.s_std_crit_and_gap(
        scenario.inherited.x_H, scenario.intensity, scenario.target,
        scenario.inherited.s_std_H,
    )
    consistent = (report.s_std_post <= crit + 1e-12) or (
        report.pwf_post > scenario.target.p_bar
    )
    results.append(
        CheckResult(
            "propG1.threshold_consistency", consistent, report.pwf_post,
            scenario.target.p_bar,
            "post-repair standardization above s_std_crit implies pwf above p_bar",
        )
    )
    return results


# ---------------------------------------------------------------------------
# derivatives: analytic forms vs central finite differences
# ---------------------------------------------------------------------------


def _check_derivatives(scenario: Scenario, draws: int = 1000) -> list[CheckResult]:
    rng = _rng(scenario, 5)
    econ = scenario.econ
    worst: dict[str, float] = {
        "codification": 0.0, "scale_fixed": 0.0, "scale_binding": 0.0,
        "split": 0.0, "aggregate": 0.0,
    }
    bad: dict[str, int] = {k: 0 for k in worst}

    def record(key: str, analytic: float, numeric: float) -> None:
        scale = max(abs(analytic), abs(numeric), 1e-12)
        gap = abs(analytic - numeric)
        rel = gap / scale if gap > 1e-9 else 0.0
        worst[key] = max(worst[key], rel)
        if not _close(analytic, numeric):
            bad[key] += 1

    h_step = 1e-6
    for _ in range(draws):
        x = float(rng.uniform(0.05, econ.x_bar - 0.05))
        s = float(rng.uniform(0.05, 0.95))
        ip = IntensityParams(
            mu0=float(rng.uniform(0.0, 1.0)), eta=float(rng.uniform(0.1, 3.0))
        )
        guards = Safeguards(*map(float, rng.uniform(0.0, 2.0, size=3)))
        overt = OvertConfig(
            f0=float(rng.uniform(0.05, 0.6)),
            b=float(rng.uniform(0.0, 3.0)),
            c_m=float(rng.uniform(0.0, 1.0)),
            c_k=float(rng.uniform(0.0, 1.0)),
            c_q=float(rng.uniform(0.0, 1.0)),
            a_x=float(rng.uniform(-0.5, 0.5)),
        )

        def failure(x_, s_):
            mu = ip.mu0 + ip.eta * x_ * s_
            f0 = float(overt_vulnerability(x_, s_, guards, overt))
            return float(total_failure(float(pwf(mu)), f0))

        _, df_ds = codification_margin(x, s, ip, guards, overt)
        record("codification", float(df_ds), _fd(lambda v: failure(x, v), s, h_step))

        record(
            "scale_fixed",
            dF_dx(x, s, ip, guards, overt),
            _fd(lambda v: failure(v, s), x, h_step),
        )

        record(
            "scale_binding",
            dF_dx(x, s, ip, guards, overt, binding=True, econ_cfg=econ),
            _fd(lambda v: failure(v, float(feasibility_s(v, econ))), x, h_step),
        )

        sa = SplitArchitecture(x=x, s_std=s, s_aud=float(rng.uniform(0.05, 0.95)))
        d_aud, d_std = split_partials(sa, ip, guards, overt)

        def split(s_std_, s_aud_):
            return float(
                split_failure(
                    SplitArchitecture(x=x, s_std=s_std_, s_aud=s_aud_), ip, guards, overt
                )
            )

        record("split", d_aud, _fd(lambda v: split(sa.s_std, v), sa.s_aud, h_step))
        record("split", d_std, _fd(lambda v: split(v, sa.s_aud), sa.s_std, h_step))

        f0 = float(rng.uniform(0.0, 0.9))
        d_f0, d_mu0, d_eta = (float(v) for v in aggregate_partials(f0, ip.mu0, ip.eta, x, s))

        def agg(f0_, mu0_, eta_):
            return float(total_failure(float(pwf(mu0_ + eta_ * x * s)), f0_))

        record("aggregate", d_f0, _fd(lambda v: agg(v, ip.mu0, ip.eta), f0, h_step))
        record("aggregate", d_mu0, _fd(lambda v: agg(f0, v, ip.eta), ip.mu0, h_step))
        record("aggregate", d_eta, _fd(lambda v: agg(f0, ip.mu0, v), ip.eta, h_step))

    return [
        CheckResult(
            f"derivatives.{key}", bad[key] == 0, worst[key], 1e-6,
            f"worst relative gap vs central differences over {draws} draws",
        )
        for key in ("codification", "scale_fixed", "scale_binding", "split", "aggregate")
    ]


# ---------------------------------------------------------------------------
# microsim: Monte Carlo vs exact law
# ---------------------------------------------------------------------------


def _check_microsim(scenario: Scenario, jobs: int = 1) -> list[CheckResult]:
    result = workbench.run_simulation(scenario, jobs=jobs)
    z = 0.0 if result.z_score is None else abs(result.z_score)
    results = [
        CheckResult(
            "microsim.z_within_3", z <= 3.0, z, 3.0,
            f"estimate {result.estimate:.6f} vs exact {result.closed_form:.6f} "
            f"({result.replications} replications)",
        )
    ]
    inputs = workbench.sim_inputs(scenario)
    mean = inputs["n_x"] * inputs["attempts"] * inputs["p_attempt"]
    if mean > 0.0:
        base_p = min(inputs["p_attempt"], 0.2)
        grid = []
        for factor in (1.0, 0.5, 0.25, 0.125):
            p = base_p * factor
            grid.append((inputs["n_x"] / factor, inputs["attempts"], p))
        gaps = [row.abs_gap for row in microsim.poisson_approx_error(grid)]
        monotone = all(b < a for a, b in zip(gaps, gaps[1:]))
        results.append(
            CheckResult(
                "microsim.gap_monotone", monotone, gaps[-1], gaps[0],
                f"approximation gaps {['%.3g' % g for g in gaps]} as p falls",
            )
        )
    repeat = workbench.run_simulation(scenario, jobs=jobs)
    partitioned = workbench.run_simulation(scenario, jobs=max(2, jobs))
    identical = (
        repeat.estimate == result.estimate and partitioned.estimate == result.estimate
    )
    results.append(
        CheckResult(
            "microsim.determinism", identical,
            abs(repeat.estimate - result.estimate)
            + abs(partitioned.estimate - result.estimate),
            0.0,
            "same seed, repeated and re-partitioned runs are bit-identical",
        )
    )
    return results


_SUITE_RUNNERS = {
    "prop1": _check_prop1,
    "prop2": _check_prop2,
    "prop3": _check_prop3,
    "lemmaB1": _check_lemma_b1,
    "propG1": _check_prop_g1,
    "derivatives": _check_derivatives,
}


def run_checks(scenario: Scenario, suite: str = "all", jobs: int = 1) -> CheckReport:
    """Run one named suite (or all of them) against a scenario."""
    if suite != "all" and suite not in SUITES:
        raise ConfigurationError(
            f"unknown suite {suite!r}; valid suites: {SUITES + ('all',)}"
        )
    names = list(SUITES) if suite == "all" else [suite]
    results: list[CheckResult] = []
    for name in names:
        if name == "microsim":
            results.extend(_check_microsim(scenario, jobs=jobs))
        else:
            results.extend(_SUITE_RUNNERS[name](scenario))
    return CheckReport(scenario=scenario.name, suite=suite, results=results)
