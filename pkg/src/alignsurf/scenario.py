"""Scenario files: loading, strict validation, and dotted-path updates.

A scenario is a TOML file bundling every model choice needed to reproduce a
result: functional-family parameters, the safeguard bundle, adoption and
repair parameters, the concern level, solver tolerances, and the RNG seed.
Loading is strict -- unknown keys and invariant violations are rejected with
the dotted key path -- and each loaded scenario carries a content hash so
emitted tables can be traced back to the exact configuration that produced
them.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .adoption import AdoptionParams
from .errors import ScenarioError
from .families import (
    EconConfig,
    IntensityParams,
    OvertConfig,
    Safeguards,
    SafeguardResponseConfig,
    VariantConfig,
    derive_intensity,
)
from .model_core import Architecture, OperationalizationProtocol
from .repair import InheritedState, RepairConfig
from .thresholds import ThresholdTarget


@dataclass(frozen=True)
class Tolerances:
    """Solver tolerance overrides; defaults are the documented contract."""

    bisect_xtol: float = 1e-10
    bisect_max_iter: int = 200
    golden_xtol: float = 1e-9
    zeta_tol: float = 1e-6
    grid_points: int = 1025
    zeta_grid: int = 64

    def __post_init__(self) -> None:
        for name in ("bisect_xtol", "golden_xtol", "zeta_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ScenarioError(f"{name} must be > 0, got {v}")
        for name in ("bisect_max_iter", "grid_points", "zeta_grid"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 2:
                raise ScenarioError(f"{name} must be an integer >= 2, got {v!r}")


@dataclass(frozen=True)
class SearchConfig:
    """Search-form wiring: interfaces exposed per unit of scale."""

    n_scale: float = 10.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.n_scale) and self.n_scale >= 0.0):
            raise ScenarioError(f"n_scale must be >= 0, got {self.n_scale}")


@dataclass(frozen=True)
class SimSettings:
    """Simulation defaults; unset count/probability fields are derived from
    the model at the scenario's architecture point."""

    replications: int = 100_000
    n_interfaces: float | None = None
    attempts_per_interface: float | None = None
    p_attempt: float | None = None
    mu0: float | None = None
    k_required: int | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ScenarioError(
                f"replications must be an integer >= 1, got {self.replications!r}"
            )
        if self.k_required is not None and (
            not isinstance(self.k_required, int) or self.k_required < 1
        ):
            raise ScenarioError(
                f"k_required must be an integer >= 1, got {self.k_required!r}"
            )


@dataclass(frozen=True)
class FigureConfig:
    """Grid sizes for emitted figure data, plus the safeguard bundles that
    the search-form threshold figure compares."""

    fig1_points: int = 161
    fig2_points: int = 401
    figB1_points: int = 121
    figB1_bundles: tuple[Safeguards, ...] = ()

    def __post_init__(self) -> None:
        for name in ("fig1_points", "fig2_points", "figB1_points"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 2:
                raise ScenarioError(f"{name} must be an integer >= 2, got {v!r}")


@dataclass(frozen=True)
class Scenario:
    """A named, fully validated bundle of model and solver configuration."""

    name: str = "unnamed"
    seed: int = 0
    architecture: Architecture = Architecture(x=0.5, s=0.5)
    safeguards: Safeguards = Safeguards()
    response: SafeguardResponseConfig = SafeguardResponseConfig()
    overt: OvertConfig = OvertConfig()
    econ: EconConfig = EconConfig()
    variant: VariantConfig = VariantConfig()
    adoption: AdoptionParams = AdoptionParams(lam=0.8, delta=0.2, omega=1.0)
    target: ThresholdTarget = ThresholdTarget(p_bar=0.6)
    search: SearchConfig = SearchConfig()
    tolerances: Tolerances = Tolerances()
    sim: SimSettings = SimSettings()
    figures: FigureConfig = FigureConfig()
    repair: RepairConfig | None = None
    inherited: InheritedState | None = None
    protocol: OperationalizationProtocol | None = None
    content_hash: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ScenarioError(f"seed must be an integer in [0, 2**64), got {self.seed!r}")
        if self.architecture.x > self.econ.x_bar:
            raise ScenarioError(
                f"architecture.x = {self.architecture.x} exceeds x_bar = {self.econ.x_bar}"
            )

    @property
    def intensity(self) -> IntensityParams:
        """(mu0, eta) derived from the safeguard bundle."""
        return derive_intensity(self.safeguards, self.response)


def _as_float(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}: expected a number, got {value!r}")
    return float(value)


def _as_int(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ScenarioError(f"{path}: expected an integer, got {value!r}")
    return value


def _as_str(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise ScenarioError(f"{path}: expected a string, got {value!r}")
    return value


def _as_pair(value: Any, path: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(f"{path}: expected a pair [lo, hi], got {value!r}")
    return (_as_float(value[0], path), _as_float(value[1], path))


_FIELD_KINDS: dict[str, Any] = {"float": _as_float, "int": _as_int, "str": _as_str}


def _build_section(section: dict, path: str, cls, fields: dict[str, str], renames=None):
    """Construct a config dataclass from a TOML table with strict keys."""
    renames = renames or {}
    kwargs = {}
    for key, value in section.items():
        if key not in fields:
            raise ScenarioError(f"{path}.{key}: unknown key")
        attr = renames.get(key, key)
        kwargs[attr] = _FIELD_KINDS[fields[key]](value, f"{path}.{key}")
    try:
        return cls(**kwargs)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


_RESPONSE_FIELDS = {
    "m_bar": "float", "a_m": "float", "m_floor": "float",
    "kappa_floor": "float", "a_k": "float",
    "q0": "float", "q1": "float", "q_cap": "float",
    "theta": "float", "theta0": "float",
}
_OVERT_FIELDS = {
    "f0": "float", "b": "float",
    "c_m": "float", "c_k": "float", "c_q": "float", "a_x": "float",
}
_ECON_FIELDS = {
    "g_x": "float", "g_s": "float", "c_x": "float", "c_s": "float",
    "x_bar": "float", "gamma_S": "float",
}
_VARIANT_FIELDS = {
    "mode": "str", "omega_rate": "float", "alpha": "float", "beta": "float",
    "k": "int",
}
_SAFEGUARD_FIELDS = {"r_m": "float", "r_kappa": "float", "r_q": "float"}
_ARCH_FIELDS = {"x": "float", "s": "float"}
_TARGET_FIELDS = {"p_bar": "float"}
_SEARCH_FIELDS = {"n_scale": "float"}
_TOL_FIELDS = {
    "bisect_xtol": "float", "bisect_max_iter": "int", "golden_xtol": "float",
    "zeta_tol": "float", "grid_points": "int", "zeta_grid": "int",
}
_REPAIR_FIELDS = {
    "kappa_cost": "float", "phi_cost": "float", "lambda_L": "float",
    "b_sstd_weight": "float",
}
_INHERITED_FIELDS = {"x_H": "float", "s_aud_H": "float", "s_std_H": "float"}
_PROTOCOL_FIELDS = {"tau_L": "float", "tau_H": "float", "ell": "float"}
_SIM_FIELDS = {
    "replications": "int", "n_interfaces": "float",
    "attempts_per_interface": "float", "p_attempt": "float", "mu0": "float",
    "k_required": "int",
}
_FIGURE_INT_FIELDS = {"fig1_points", "fig2_points", "figB1_points"}


def _build_adoption(section: dict, path: str) -> AdoptionParams:
    kwargs: dict[str, Any] = {}
    for key, value in section.items():
        if key == "lambda":
            kwargs["lam"] = _as_float(value, f"{path}.lambda")
        elif key in ("delta", "omega"):
            kwargs[key] = _as_float(value, f"{path}.{key}")
        elif key == "lambda_bracket":
            kwargs["lambda_bracket"] = _as_pair(value, f"{path}.lambda_bracket")
        else:
            raise ScenarioError(f"{path}.{key}: unknown key")
    try:
        return AdoptionParams(**kwargs)
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def _build_figures(section: dict, path: str) -> FigureConfig:
    kwargs: dict[str, Any] = {}
    for key, value in section.items():
        if key in _FIGURE_INT_FIELDS:
            kwargs[key] = _as_int(value, f"{path}.{key}")
        elif key == "figB1_bundles":
            if not isinstance(value, list):
                raise ScenarioError(f"{path}.figB1_bundles: expected a list of triples")
            bundles = []
            for i, triple in enumerate(value):
                if not isinstance(triple, list) or len(triple) != 3:
                    raise ScenarioError(
                        f"{path}.figB1_bundles[{i}]: expected [r_m, r_kappa, r_q]"
                    )
                item_path = f"{path}.figB1_bundles[{i}]"
                try:
                    bundles.append(
                        Safeguards(
                            r_m=_as_float(triple[0], item_path),
                            r_kappa=_as_float(triple[1], item_path),
                            r_q=_as_float(triple[2], item_path),
                        )
                    )
                except ValueError as exc:
                    raise ScenarioError(f"{item_path}: {exc}") from exc
            kwargs["figB1_bundles"] = tuple(bundles)
        else:
            raise ScenarioError(f"{path}.{key}: unknown key")
    return FigureConfig(**kwargs)


def scenario_from_dict(raw: dict, default_name: str = "unnamed") -> Scenario:
    """Build and validate a Scenario from parsed TOML data."""
    kwargs: dict[str, Any] = {}
    for key, value in raw.items():
        if key == "name":
            kwargs["name"] = _as_str(value, "name")
        elif key == "seed":
            kwargs["seed"] = _as_int(value, "seed")
        elif key == "architecture":
            kwargs["architecture"] = _build_section(
                value, "architecture", Architecture, _ARCH_FIELDS
            )
        elif key == "safeguards":
            kwargs["safeguards"] = _build_section(
                value, "safeguards", Safeguards, _SAFEGUARD_FIELDS
            )
        elif key == "families":
            for fam_key, fam_value in value.items():
                if fam_key == "response":
                    kwargs["response"] = _build_section(
                        fam_value, "families.response",
                        SafeguardResponseConfig, _RESPONSE_FIELDS,
                    )
                elif fam_key == "overt":
                    kwargs["overt"] = _build_section(
                        fam_value, "families.overt", OvertConfig, _OVERT_FIELDS
                    )
                elif fam_key == "econ":
                    kwargs["econ"] = _build_section(
                        fam_value, "families.econ", EconConfig, _ECON_FIELDS
                    )
                elif fam_key == "variant":
                    kwargs["variant"] = _build_section(
                        fam_value, "families.variant", VariantConfig, _VARIANT_FIELDS
                    )
                else:
                    raise ScenarioError(f"families.{fam_key}: unknown key")
        elif key == "adoption":
            kwargs["adoption"] = _build_adoption(value, "adoption")
        elif key == "target":
            kwargs["target"] = _build_section(
                value, "target", ThresholdTarget, _TARGET_FIELDS
            )
        elif key == "search":
            kwargs["search"] = _build_section(
                value, "search", SearchConfig, _SEARCH_FIELDS
            )
        elif key == "tolerances":
            kwargs["tolerances"] = _build_section(
                value, "tolerances", Tolerances, _TOL_FIELDS
            )
        elif key == "repair":
            table = dict(value)
            inherited = table.pop("inherited", None)
            kwargs["repair"] = _build_section(
                table, "repair", RepairConfig, _REPAIR_FIELDS
            )
            if inherited is not None:
                kwargs["inherited"] = _build_section(
                    inherited, "repair.inherited", InheritedState, _INHERITED_FIELDS
                )
        elif key == "sim":
            kwargs["sim"] = _build_section(value, "sim", SimSettings, _SIM_FIELDS)
        elif key == "protocol":
            kwargs["protocol"] = _build_section(
                value, "protocol", OperationalizationProtocol, _PROTOCOL_FIELDS
            )
        elif key == "figures":
            kwargs["figures"] = _build_figures(value, "figures")
        else:
            raise ScenarioError(f"{key}: unknown key")
    kwargs.setdefault("name", default_name)
    kwargs["content_hash"] = content_hash(raw)
    try:
        return Scenario(**kwargs)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc


def content_hash(raw: dict) -> str:
    """Canonical hash of scenario content: stable under reformatting."""
    canonical = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def load_scenario(path: str | Path) -> Scenario:
    """Load and validate a scenario file.

    Raises ScenarioError with the offending dotted key path on parse errors,
    unknown keys, and invariant violations.
    """
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ScenarioError(f"scenario file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: parse error: {exc}") from exc
    return scenario_from_dict(raw, default_name=path.stem)


# Dotted-path updates (used by the sweep runner): section path -> Scenario
# attribute, then a plain dataclasses.replace at the leaf.
_PATH_SECTIONS = {
    "architecture": "architecture",
    "safeguards": "safeguards",
    "families.response": "response",
    "families.overt": "overt",
    "families.econ": "econ",
    "families.variant": "variant",
    "adoption": "adoption",
    "target": "target",
    "search": "search",
    "tolerances": "tolerances",
    "repair": "repair",
    "repair.inherited": "inherited",
    "sim": "sim",
    "protocol": "protocol",
}
_LEAF_RENAMES = {"adoption.lambda": "lam"}
_SECTION_CLASSES = {
    "architecture": Architecture, "safeguards": Safeguards,
    "response": SafeguardResponseConfig, "overt": OvertConfig,
    "econ": EconConfig, "variant": VariantConfig,
    "adoption": AdoptionParams, "target": ThresholdTarget,
    "search": SearchConfig, "tolerances": Tolerances,
    "repair": RepairConfig, "inherited": InheritedState,
    "sim": SimSettings, "protocol": OperationalizationProtocol,
}


def sweepable_paths() -> list[str]:
    """Dotted parameter paths accepted by with_value / the sweep runner."""
    paths = []
    for section, attr in _PATH_SECTIONS.items():
        for name in _SECTION_CLASSES[attr].__dataclass_fields__:
            if name == "lambda_bracket":
                continue
            public = "lambda" if (section, name) == ("adoption", "lam") else name
            paths.append(f"{section}.{public}")
    return sorted(paths)


def with_value(scenario: Scenario, path: str, value: float) -> Scenario:
    """Return a copy of the scenario with one dotted parameter replaced."""
    section, _, leaf = path.rpartition(".")
    if section not in _PATH_SECTIONS:
        raise ScenarioError(
            f"{path}: unknown parameter path; valid sections: "
            f"{sorted(_PATH_SECTIONS)}"
        )
    attr = _PATH_SECTIONS[section]
    target = getattr(scenario, attr)
    if target is None:
        raise ScenarioError(f"{path}: scenario has no [{section}] section")
    leaf_attr = _LEAF_RENAMES.get(f"{section}.{leaf}", leaf)
    if leaf_attr not in target.__dataclass_fields__:
        raise ScenarioError(f"{path}: unknown key in [{section}]")
    current = getattr(target, leaf_attr)
    if isinstance(current, int) and not isinstance(current, bool):
        value = int(round(value))
    try:
        new_target = dataclasses.replace(target, **{leaf_attr: value})
        return dataclasses.replace(scenario, **{attr: new_target})
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc
