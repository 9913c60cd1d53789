import dataclasses
import math

import numpy as np
import pytest

from alignsurf.errors import ConfigurationError, DomainError
from alignsurf.model_core import pwf
from alignsurf.repair import (
    InheritedState,
    RepairConfig,
    marginal_benefit,
    optimize_repair,
    refactoring_cost,
    refactoring_cost_du,
    repair_objective,
)
from alignsurf.thresholds import intensity_cutoff

STATE = InheritedState(x_H=1.0, s_aud_H=0.9, s_std_H=0.9)


def _with_response(scenario, **kwargs):
    return dataclasses.replace(
        scenario, response=dataclasses.replace(scenario.response, **kwargs)
    )


class TestObjectivePieces:
    def test_quadratic_cost_worked(self):
        cfg = RepairConfig(kappa_cost=5.0, phi_cost=1.0, lambda_L=0.3)
        assert refactoring_cost(0.1, 1.0, cfg) == pytest.approx(0.05, rel=1e-14)
        assert refactoring_cost_du(0.1, 1.0, cfg) == pytest.approx(1.0, rel=1e-14)

    def test_zero_effort_costs_nothing(self, repair_scenario):
        sc = repair_scenario
        w0 = repair_objective(0.0, STATE, sc, sc.repair)
        # W(0) = ordinary value - expected failure loss at the inherited state.
        mu = sc.intensity.mu0 + sc.intensity.eta * 1.0 * 0.9
        expected = (
            sc.repair.lambda_L * 1.0
            - 0.5 * 1.0
            - sc.adoption.delta * sc.adoption.omega * float(pwf(mu))
        )
        assert w0 == pytest.approx(expected, rel=1e-12)

    def test_full_unwinding_leaves_baseline_failure_only(self, repair_scenario):
        sc = repair_scenario
        w_full = repair_objective(0.9, STATE, sc, sc.repair)
        expected = (
            sc.repair.lambda_L * 1.0
            - 0.5
            - refactoring_cost(0.9, 1.0, sc.repair)
            - float(pwf(sc.intensity.mu0))
        )
        assert w_full == pytest.approx(expected, rel=1e-12)

    def test_effort_domain_enforced(self, repair_scenario):
        with pytest.raises(DomainError):
            repair_objective(1.0, STATE, repair_scenario, repair_scenario.repair)

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            RepairConfig(kappa_cost=0.0)
        with pytest.raises(ConfigurationError):
            InheritedState(x_H=1.0, s_aud_H=1.2, s_std_H=0.5)


class TestMarginalBenefit:
    def test_worked_value_at_zero_effort(self, repair_scenario):
        value = marginal_benefit(0.0, STATE, repair_scenario, repair_scenario.repair)
        assert value == pytest.approx(2.0 * math.exp(-1.9), rel=1e-10)

    def test_zero_scale_leaves_only_value_sensitivity(self, repair_scenario):
        cfg = dataclasses.replace(repair_scenario.repair, b_sstd_weight=0.25)
        state = InheritedState(x_H=0.0, s_aud_H=0.9, s_std_H=0.9)
        assert marginal_benefit(0.0, state, repair_scenario, cfg) == pytest.approx(
            -0.25
        )

    def test_increasing_along_the_path(self, repair_scenario):
        values = [
            marginal_benefit(u, STATE, repair_scenario, repair_scenario.repair)
            for u in np.linspace(0.0, 0.9, 20)
        ]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_matches_finite_difference_of_loss_part(self, repair_scenario):
        sc = repair_scenario
        h = 1e-6
        for u in (0.1, 0.4, 0.8):
            gain = -(
                repair_objective(u + h, STATE, sc, sc.repair)
                + refactoring_cost(u + h, 1.0, sc.repair)
                - repair_objective(u - h, STATE, sc, sc.repair)
                - refactoring_cost(u - h, 1.0, sc.repair)
            ) / (2.0 * h)
            # W without the cost term rises at rate Delta.
            assert marginal_benefit(u, STATE, sc, sc.repair) == pytest.approx(
                -gain, rel=1e-6, abs=1e-9
            )


class TestOptimizeRepair:
    def test_worked_scenario_incomplete_unwinding(self, repair_scenario):
        sc = repair_scenario
        report = optimize_repair(STATE, sc, sc.repair)
        assert report.u_star == pytest.approx(0.032, abs=1e-3)
        assert report.g_H == pytest.approx(0.4918546340629225, rel=1e-9)
        assert report.conclusion == "incomplete-unwinding"
        assert report.pwf_post > 0.6
        assert all(report.hypothesis_flags)
        assert 0.0 < report.u_star < report.g_H
        assert report.s_std_post == pytest.approx(0.9 - report.u_star, rel=1e-12)

    def test_matches_dense_grid_oracle(self, repair_scenario):
        sc = repair_scenario
        report = optimize_repair(STATE, sc, sc.repair)
        u = np.linspace(0.0, 0.9, 1_000_001)
        w = (
            sc.repair.lambda_L * 1.0
            - 0.5
            - 0.5 * 5.0 * 2.0 * u**2
            - (1.0 - np.exp(-(sc.intensity.mu0 + 2.0 * (0.9 - u))))
        )
        assert abs(report.u_star - float(u[np.argmax(w)])) <= 1e-6

    def test_free_repair_unwinds_fully(self, repair_scenario):
        sc = repair_scenario
        cheap = dataclasses.replace(sc.repair, kappa_cost=1e-6)
        report = optimize_repair(STATE, sc, cheap)
        assert report.u_star == pytest.approx(0.9, abs=1e-6)
        assert report.conclusion == "full-unwinding"
        assert not report.hypothesis_flags.cost_dominates_below_threshold

    def test_value_sensitivity_blocks_repair(self, repair_scenario):
        sc = repair_scenario
        sticky = dataclasses.replace(sc.repair, b_sstd_weight=1.0)
        report = optimize_repair(STATE, sc, sticky)
        assert report.u_star == pytest.approx(0.0, abs=1e-8)
        assert report.conclusion == "no-repair"
        assert not report.hypothesis_flags.positive_marginal_at_zero

    def test_saturated_baseline_reported(self, repair_scenario):
        # theta0 small keeps baseline persistence high: mu0 > tau(0.6).
        sc = _with_response(repair_scenario, theta0=0.1)
        assert sc.intensity.mu0 > intensity_cutoff(sc.target)
        report = optimize_repair(STATE, sc, sc.repair)
        assert report.conclusion == "saturated-baseline"

    def test_hypotheses_imply_interior_gap(self, repair_scenario):
        # When both displayed conditions hold and the inherited state is
        # above threshold, the optimum is interior to (0, g_H).
        sc = repair_scenario
        for kappa in (3.0, 5.0, 8.0):
            cfg = dataclasses.replace(sc.repair, kappa_cost=kappa)
            report = optimize_repair(STATE, sc, cfg)
            if all(report.hypothesis_flags) and report.g_H > 0:
                assert report.conclusion == "incomplete-unwinding"
                assert 0.0 < report.u_star < report.g_H

    def test_marginal_cost_rises_with_installed_scale(self, repair_scenario):
        cfg = repair_scenario.repair
        h = 1e-6
        for u in (0.1, 0.5):
            slope = (
                refactoring_cost_du(u, 1.0 + h, cfg)
                - refactoring_cost_du(u, 1.0 - h, cfg)
            ) / (2.0 * h)
            assert slope > 0.0

    def test_post_threshold_consistency(self, repair_scenario):
        from alignsurf.thresholds import s_std_crit_and_gap

        sc = repair_scenario
        report = optimize_repair(STATE, sc, sc.repair)
        crit, _ = s_std_crit_and_gap(1.0, sc.intensity, sc.target, 0.9)
        assert report.s_std_post > crit
        assert report.pwf_post > sc.target.p_bar
