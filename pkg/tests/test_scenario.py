import dataclasses

import pytest

from alignsurf.errors import ScenarioError
from alignsurf.scenario import (
    Scenario,
    content_hash,
    load_scenario,
    sweepable_paths,
    with_value,
)


def _write(tmp_path, text, name="case.toml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


class TestLoading:
    def test_minimal_file_gets_documented_defaults(self, tmp_path):
        sc = load_scenario(_write(tmp_path, "", name="minimal.toml"))
        assert sc.name == "minimal"
        assert sc.seed == 0
        assert sc.target.p_bar == 0.6
        assert sc.tolerances.bisect_xtol == 1e-10
        assert sc.repair is None and sc.inherited is None

    def test_full_shipped_scenarios_load(self, scenario_dir):
        for name in ("default", "degenerate", "repair_case"):
            sc = load_scenario(scenario_dir / f"{name}.toml")
            assert sc.name == name
            assert len(sc.content_hash) == 16

    def test_delta_bound_cited(self, tmp_path):
        path = _write(tmp_path, "[adoption]\nlambda = 0.5\ndelta = 1.2\nomega = 1.0\n")
        with pytest.raises(ScenarioError, match=r"delta must lie in \(0,1\)"):
            load_scenario(path)

    def test_unknown_key_rejected_with_path(self, tmp_path):
        path = _write(tmp_path, "[families.overt]\nzz = 1.0\n")
        with pytest.raises(ScenarioError, match="families.overt.zz"):
            load_scenario(path)

    def test_unknown_section_rejected(self, tmp_path):
        with pytest.raises(ScenarioError, match="mystery"):
            load_scenario(_write(tmp_path, "[mystery]\na = 1\n"))

    def test_inverted_protocol_band_rejected(self, tmp_path):
        path = _write(tmp_path, "[protocol]\ntau_L = 0.7\ntau_H = 0.6\nell = 1.0\n")
        with pytest.raises(ScenarioError, match="protocol"):
            load_scenario(path)

    def test_valid_protocol_block(self, tmp_path):
        path = _write(tmp_path, "[protocol]\ntau_L = 0.3\ntau_H = 0.6\nell = 1.0\n")
        sc = load_scenario(path)
        assert sc.protocol is not None and sc.protocol.ell == 1.0

    def test_parse_error_reported(self, tmp_path):
        with pytest.raises(ScenarioError, match="parse error"):
            load_scenario(_write(tmp_path, "not toml ==="))

    def test_missing_file_reported(self, tmp_path):
        with pytest.raises(ScenarioError, match="not found"):
            load_scenario(tmp_path / "absent.toml")

    def test_architecture_beyond_x_bar_rejected(self, tmp_path):
        text = "[architecture]\nx = 2.0\ns = 0.5\n[families.econ]\nx_bar = 1.0\n"
        with pytest.raises(ScenarioError, match="x_bar"):
            load_scenario(_write(tmp_path, text))

    def test_bad_bracket_rejected(self, tmp_path):
        text = "[adoption]\nlambda = 0.5\nlambda_bracket = [2.0, 1.0]\n"
        with pytest.raises(ScenarioError, match="lambda_bracket"):
            load_scenario(_write(tmp_path, text))

    def test_type_mismatch_rejected(self, tmp_path):
        with pytest.raises(ScenarioError, match="seed"):
            load_scenario(_write(tmp_path, 'seed = "abc"\n'))
        with pytest.raises(ScenarioError, match="expected a number"):
            load_scenario(_write(tmp_path, '[target]\np_bar = "high"\n'))


class TestContentHash:
    def test_formatting_invariant(self, tmp_path):
        a = load_scenario(
            _write(tmp_path, "seed = 1\n[target]\np_bar = 0.6\n", name="a.toml")
        )
        b = load_scenario(
            _write(
                tmp_path,
                "# a comment\nseed = 1\n\n[target]\np_bar = 0.6  # same content\n",
                name="b.toml",
            )
        )
        assert a.content_hash == b.content_hash

    def test_content_sensitive(self, tmp_path):
        a = load_scenario(_write(tmp_path, "seed = 1\n", name="a.toml"))
        b = load_scenario(_write(tmp_path, "seed = 2\n", name="b.toml"))
        assert a.content_hash != b.content_hash

    def test_canonicalization(self):
        assert content_hash({"b": 1, "a": 2}) == content_hash({"a": 2, "b": 1})


class TestWithValue:
    def test_replace_lambda(self, default_scenario):
        varied = with_value(default_scenario, "adoption.lambda", 1.3)
        assert varied.adoption.lam == 1.3
        assert default_scenario.adoption.lam == 0.8  # original untouched

    def test_replace_family_parameter(self, default_scenario):
        varied = with_value(default_scenario, "families.overt.b", 3.0)
        assert varied.overt.b == 3.0

    def test_integer_coercion(self, default_scenario):
        varied = with_value(default_scenario, "sim.replications", 5000.0)
        assert varied.sim.replications == 5000
        varied = with_value(default_scenario, "families.variant.k", 2.0)
        assert varied.variant.k == 2

    def test_unknown_path_lists_sections(self, default_scenario):
        with pytest.raises(ScenarioError, match="unknown parameter path"):
            with_value(default_scenario, "nowhere.b", 1.0)
        with pytest.raises(ScenarioError, match="unknown key"):
            with_value(default_scenario, "families.overt.zz", 1.0)

    def test_invariants_still_enforced(self, default_scenario):
        with pytest.raises(ScenarioError):
            with_value(default_scenario, "adoption.delta", 1.5)

    def test_missing_section_reported(self, tmp_path):
        sc = load_scenario(_write(tmp_path, ""))
        with pytest.raises(ScenarioError, match="no \\[repair\\]"):
            with_value(sc, "repair.kappa_cost", 1.0)

    def test_sweepable_paths_resolve(self, default_scenario):
        paths = sweepable_paths()
        assert "adoption.lambda" in paths
        assert "families.overt.b" in paths
        assert "architecture.s" in paths

    def test_derived_intensity_tracks_safeguards(self, default_scenario):
        stronger = with_value(default_scenario, "safeguards.r_q", 2.0)
        assert stronger.intensity.eta < default_scenario.intensity.eta


class TestDirectConstruction:
    def test_frozen_and_replaceable(self, default_scenario):
        with pytest.raises(dataclasses.FrozenInstanceError):
            default_scenario.seed = 1
        clone = dataclasses.replace(default_scenario, seed=9)
        assert clone.seed == 9

    def test_default_instance_valid(self):
        sc = Scenario()
        assert sc.target.p_bar == 0.6
        assert sc.intensity.mu0 > 0.0
