import dataclasses
import math

import numpy as np
import pytest

from alignsurf.errors import (
    AssumptionViolationError,
    ConfigurationError,
    DomainError,
    NoCrossingError,
)
from alignsurf.families import (
    EconConfig,
    IntensityParams,
    OvertConfig,
    Safeguards,
    VariantConfig,
)
from alignsurf.model_core import Architecture, pwf, pwf_k
from alignsurf.solvers import bisect
from alignsurf.thresholds import (
    ThresholdTarget,
    baseline_saturated,
    intensity_cutoff,
    lambda_crit,
    s_flip,
    s_std_crit_and_gap,
    surface_check,
    x_crit,
    x_crit_binding,
)

P60 = ThresholdTarget(p_bar=0.6)
NO_GUARDS = Safeguards()


class TestIntensityCutoff:
    def test_closed_form(self):
        assert intensity_cutoff(ThresholdTarget(0.5)) == pytest.approx(
            math.log(2.0), rel=1e-15
        )

    def test_reference_level(self):
        assert intensity_cutoff(P60) == pytest.approx(0.916290731874155, rel=1e-12)

    def test_two_move_inverse_of_worked_example(self):
        target = ThresholdTarget(p_bar=float(pwf_k(0.9, 2)))
        assert intensity_cutoff(target, k=2) == pytest.approx(0.9, abs=1e-8)

    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_inverse_consistency(self, k):
        rng = np.random.default_rng(31)
        for p_bar in rng.uniform(0.01, 0.99, 100):
            tau = intensity_cutoff(ThresholdTarget(float(p_bar)), k=k)
            assert float(pwf_k(tau, k)) == pytest.approx(float(p_bar), abs=1e-9)

    def test_bounds_enforced(self):
        with pytest.raises(ConfigurationError):
            ThresholdTarget(p_bar=0.0)
        with pytest.raises(ConfigurationError):
            ThresholdTarget(p_bar=1.0)
        with pytest.raises(DomainError):
            intensity_cutoff(P60, k=0)


class TestSurfaceCheck:
    def test_worked_margin(self):
        a = Architecture(x=0.5, s=0.9)
        ip = IntensityParams(mu0=0.0, eta=2.0)  # mu = 0.9
        check = surface_check(a, ip, P60)
        assert check.margin == pytest.approx(-0.016290731874154973, rel=1e-10)
        assert not check.exploitable

    def test_boundary_not_exploitable(self):
        tau = intensity_cutoff(P60)
        a = Architecture(x=1.0, s=1.0)
        check = surface_check(a, IntensityParams(mu0=0.1, eta=tau - 0.1), P60)
        assert check.margin == pytest.approx(0.0, abs=1e-15)
        assert not check.exploitable

    def test_baseline_saturation_exploitable_at_zero_scale(self):
        a = Architecture(x=0.0, s=0.0)
        check = surface_check(a, IntensityParams(mu0=1.0, eta=2.0), P60)
        assert check.exploitable

    def test_equivalent_to_success_comparison(self):
        rng = np.random.default_rng(37)
        for _ in range(300):
            a = Architecture(x=float(rng.uniform(0, 1)), s=float(rng.uniform(0, 1)))
            ip = IntensityParams(
                mu0=float(rng.uniform(0, 1.5)), eta=float(rng.uniform(0.1, 4))
            )
            target = ThresholdTarget(float(rng.uniform(0.05, 0.95)))
            check = surface_check(a, ip, target)
            mu = ip.mu0 + ip.eta * a.x * a.s
            assert check.exploitable == (float(pwf(mu)) > target.p_bar)


class TestCriticalScale:
    def test_worked_value(self):
        ip = IntensityParams(mu0=0.1, eta=2.0)
        assert x_crit(P60, ip, 0.5) == pytest.approx(0.816290731874155, rel=1e-12)

    def test_truncation_branch(self):
        assert x_crit(P60, IntensityParams(mu0=1.5, eta=2.0), 0.5) == 0.0

    def test_homogeneity(self):
        ip = IntensityParams(mu0=0.1, eta=2.0)
        assert x_crit(P60, ip, 1.0) == pytest.approx(
            x_crit(P60, ip, 0.5) / 2.0, rel=1e-12
        )

    def test_flat_intensity_raises(self):
        with pytest.raises(NoCrossingError):
            x_crit(P60, IntensityParams(mu0=0.1, eta=0.0), 0.5)

    def test_success_meets_target_at_crossing(self):
        rng = np.random.default_rng(41)
        for _ in range(200):
            target = ThresholdTarget(float(rng.uniform(0.05, 0.95)))
            tau = intensity_cutoff(target)
            ip = IntensityParams(
                mu0=float(rng.uniform(0.0, 0.9 * tau)),
                eta=float(rng.uniform(0.5, 5.0)),
            )
            s = float(rng.uniform(0.1, 1.0))
            crossing = x_crit(target, ip, s)
            mu_at = ip.mu0 + ip.eta * s * crossing
            assert float(pwf(mu_at)) == pytest.approx(target.p_bar, abs=1e-9)


class TestCriticalScaleBinding:
    def test_closed_form_inverse(self):
        # S(x) = x, mu0 = 0, eta = 2: solve 2 x^2 = tau.
        econ = EconConfig(x_bar=1.0, gamma_S=1.0)
        value = x_crit_binding(P60, IntensityParams(mu0=0.0, eta=2.0), econ)
        assert value == pytest.approx(
            math.sqrt(intensity_cutoff(P60) / 2.0), abs=1e-8
        )
        a = Architecture(x=value, s=value)
        assert float(
            pwf(IntensityParams(0.0, 2.0).mu0 + 2.0 * value * value)
        ) == pytest.approx(0.6, abs=1e-8)

    def test_saturated_baseline_returns_zero(self):
        econ = EconConfig(x_bar=1.0)
        assert x_crit_binding(P60, IntensityParams(mu0=1.5, eta=2.0), econ) == 0.0

    def test_no_crossing_returns_none(self):
        econ = EconConfig(x_bar=1.0)
        assert x_crit_binding(P60, IntensityParams(mu0=0.1, eta=0.0), econ) is None

    def test_flag_flips_across_crossing(self):
        econ = EconConfig(x_bar=1.0, gamma_S=1.0)
        ip = IntensityParams(mu0=0.05, eta=2.5)
        crossing = x_crit_binding(P60, ip, econ)
        for offset, expected in ((-1e-6, False), (1e-6, True)):
            x = crossing + offset
            a = Architecture(x=x, s=x)
            assert surface_check(a, ip, P60).exploitable is expected


class TestFlipPoint:
    def test_worked_closed_form(self):
        ip = IntensityParams(mu0=0.1, eta=2.0)
        cfg = OvertConfig(f0=0.8, b=2.0)
        value = s_flip(0.5, ip, NO_GUARDS, cfg)
        assert value == pytest.approx(0.5 * math.log(2.4), rel=1e-12)

    def test_no_overt_channel_gives_none(self):
        ip = IntensityParams(mu0=0.1, eta=2.0)
        assert s_flip(0.5, ip, NO_GUARDS, OvertConfig(f0=0.0, b=2.0)) is None

    def test_vanishing_within_form_margin_gives_none(self):
        ip = IntensityParams(mu0=0.1, eta=1e-9)
        assert s_flip(0.5, ip, NO_GUARDS, OvertConfig(f0=0.8, b=2.0)) is None
        assert s_flip(0.0, ip, NO_GUARDS, OvertConfig(f0=0.8, b=2.0)) is None

    def test_closed_form_agrees_with_bisection(self):
        rng = np.random.default_rng(43)
        found = 0
        for _ in range(300):
            x = float(rng.uniform(0.05, 1.0))
            ip = IntensityParams(mu0=0.1, eta=float(rng.uniform(0.1, 4.0)))
            cfg = OvertConfig(
                f0=float(rng.uniform(0.05, 0.9)), b=float(rng.uniform(0.2, 4.0))
            )
            closed = s_flip(x, ip, NO_GUARDS, cfg)
            solved = s_flip(x, ip, NO_GUARDS, cfg, method="bisect")
            assert (closed is None) == (solved is None)
            if closed is not None:
                found += 1
                assert closed == pytest.approx(solved, abs=1e-8)
        assert found > 30  # the draw ranges must actually produce flips


class TestLambdaCrit:
    def test_degenerate_closed_form(self, degenerate_scenario):
        value = lambda_crit(degenerate_scenario.target, degenerate_scenario)
        assert value == pytest.approx(math.sqrt(intensity_cutoff(P60) / 2.0), abs=1e-6)

    def test_bracket_below_crossing_returns_none(self, degenerate_scenario):
        value = lambda_crit(
            degenerate_scenario.target, degenerate_scenario, bracket=(0.05, 0.2)
        )
        assert value is None

    def test_missing_bracket_rejected(self, degenerate_scenario):
        scenario = dataclasses.replace(
            degenerate_scenario,
            adoption=dataclasses.replace(
                degenerate_scenario.adoption, lambda_bracket=None
            ),
        )
        with pytest.raises(ConfigurationError):
            lambda_crit(scenario.target, scenario)

    def test_non_monotone_path_raises(self, degenerate_scenario):
        # With a fast ambiguity decay the weighted footprint x*S(x)*omega
        # falls beyond x = 0.5, so zeta decreases on the upper bracket.
        scenario = dataclasses.replace(
            degenerate_scenario,
            variant=VariantConfig(mode="ambiguity", omega_rate=4.0),
        )
        with pytest.raises(AssumptionViolationError):
            lambda_crit(scenario.target, scenario, bracket=(0.55, 0.95))


class TestStdCritAndGap:
    def test_worked_values(self):
        ip = IntensityParams(mu0=0.1, eta=2.0)
        crit, gap = s_std_crit_and_gap(1.0, ip, P60, s_std_H=0.9)
        assert crit == pytest.approx(0.4081453659370775, rel=1e-12)
        assert gap == pytest.approx(0.4918546340629225, rel=1e-12)

    def test_inherited_below_threshold(self):
        ip = IntensityParams(mu0=0.1, eta=2.0)
        _, gap = s_std_crit_and_gap(1.0, ip, P60, s_std_H=0.3)
        assert gap == 0.0

    def test_saturation_flag(self):
        assert baseline_saturated(IntensityParams(mu0=1.0, eta=2.0), P60)
        assert not baseline_saturated(IntensityParams(mu0=0.1, eta=2.0), P60)
        crit, gap = s_std_crit_and_gap(
            1.0, IntensityParams(mu0=1.0, eta=2.0), P60, s_std_H=0.9
        )
        assert crit == 0.0 and gap == pytest.approx(0.9)

    def test_domain_errors(self):
        ip = IntensityParams(mu0=0.1, eta=2.0)
        with pytest.raises(DomainError):
            s_std_crit_and_gap(0.0, ip, P60, 0.9)
        with pytest.raises(DomainError):
            s_std_crit_and_gap(1.0, ip, P60, 1.5)


class TestRootSolver:
    def test_root_result_invariants(self):
        result = bisect(lambda v: v * v - 2.0, 0.0, 2.0, xtol=1e-12, ftol=1e-10)
        assert result.converged
        assert result.bracket[0] <= result.value <= result.bracket[1]
        assert abs(result.residual) <= 1e-10
        assert result.value == pytest.approx(math.sqrt(2.0), abs=1e-11)

    def test_no_sign_change_rejected(self):
        with pytest.raises(DomainError):
            bisect(lambda v: v * v + 1.0, -1.0, 1.0)
