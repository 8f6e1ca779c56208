"""econcal: entropy calorimetry for stochastic exchange economies.

Simulates economies of agents that meet pairwise, pool their money and
goods, and redistribute them with probability density proportional to
the product of their utilities.  A small Cobb-Douglas "meter" economy
attached to the economy under study reads off the marginal-value
variables (beta, nu_1, nu_2); integrating those readings over a grid of
macro-states and least-squares fitting a potential yields the entropy
surface, whose path independence, concavity and agreement with closed
forms are checked by the calorimetry layer.
"""

from .economy import (
    CobbDouglas,
    Complements,
    Economy,
    EncounterContext,
    EncounterGraph,
    ExpComparison,
    Holdings,
    Interdependent,
    PriceBandAggregate,
    PriceBandSeparable,
    SamplerPolicy,
    Satiable,
    SigmoidComparison,
    Substitutes,
    build_encounter_graph,
    encounter,
    sample_cd_split,
    sample_outcome_general,
    sweep,
    utility,
)
from .meter import (
    CoupledSystem,
    MeasurementProtocol,
    MeterReading,
    MeterSpec,
    attach_meter,
    measure_values,
)
from .calorimetry import (
    EntropyField,
    MacroGrid,
    concavity_check,
    edge_increment,
    fit_entropy,
    goodness_of_agreement,
    grid_sweep,
    pure_money_check,
)
from .oracles import (
    FreeEnergy,
    band_conditional_utility,
    cd_entropy,
    free_energy,
    free_energy_comparison_surface,
    hetero_cd_entropy,
    interdependent_exp_entropy,
    legendre_entropy,
    oracle_surface_cd,
    power_weight,
    price_band_cd_equivalence_oracle,
    reversibility_check,
)
from .config import (
    ExperimentConfig,
    apply_override,
    load_config,
    validate_config,
)
from .presets import emit_preset, preset_names, resolve_preset
from .experiment import EconomyFactory, RunManifest, run_experiment
from .errors import (
    ConfigError,
    ConvergenceError,
    DomainBoundaryError,
    EconCalError,
    GraphConnectivityError,
    MeasurementProtocolError,
    MeterEconomyMismatchError,
    NotAdjacentError,
    SingularSystemError,
)

__version__ = "0.1.0"
