"""Numerical toolkit for compliance-architecture fragility under turnover.

Core pieces: parametric functional families (``families``), the two-channel
failure-probability engine (``model_core``), critical-boundary solvers
(``thresholds``), adoption and post-crisis repair optimizers (``adoption``,
``repair``), a seeded Monte Carlo microfoundation (``microsim``), and a
scenario-driven workbench with CLI (``scenario``, ``workbench``, ``figures``,
``checks``, ``cli``).
"""

from .adoption import (
    AdoptionParams,
    IllustrationConfig,
    adoption_objective,
    binding_check,
    illustration_interior_scale,
    illustration_safeguard_foc,
    optimize_scale,
    scale_monotonicity_scan,
)
from .errors import (
    AlignsurfError,
    AssumptionViolationError,
    ConfigurationError,
    DegenerateInputError,
    DomainError,
    InfeasibleArchitectureError,
    NoCrossingError,
    ResourceLimitError,
    ScenarioError,
)
from .families import (
    EconConfig,
    IntensityParams,
    OvertConfig,
    Safeguards,
    SafeguardResponseConfig,
    VariantConfig,
    ambiguity_weight,
    derive_intensity,
    feasibility_s,
    nonlinear_index,
    overt_vulnerability,
    value_and_cost,
)
from .microsim import (
    SimResult,
    SimSpec,
    poisson_approx_error,
    simulate_real_counts,
    simulate_within_form,
)
from .model_core import (
    Architecture,
    OperationalizationProtocol,
    SearchParams,
    SplitArchitecture,
    aggregate_partials,
    codification_margin,
    dF_dx,
    per_interface_pi,
    poisson_intensity,
    protocol_to_split,
    pwf,
    pwf_k,
    search_pwf,
    split_failure,
    split_partials,
    total_failure,
    total_failure_max,
)
from .repair import (
    InheritedState,
    RepairConfig,
    RepairReport,
    marginal_benefit,
    optimize_repair,
    repair_objective,
)
from .scenario import Scenario, load_scenario
from .thresholds import (
    RootResult,
    ThresholdTarget,
    intensity_cutoff,
    lambda_crit,
    s_flip,
    s_std_crit_and_gap,
    surface_check,
    x_crit,
    x_crit_binding,
)

__version__ = "0.1.0"
