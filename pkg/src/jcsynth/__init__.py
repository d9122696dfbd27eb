"""Jaynes-Cummings inversion waveforms, coupling synthesis, and verification.

The package covers three stages that compose like a round trip:

1. evaluate a prescribed population inversion W(t) (``targets``),
2. synthesize the time-dependent coupling that produces it
   (``CouplingSynthesizer`` / ``ipa`` / ``gipa``),
3. verify by forward propagation of the sector amplitudes and
   distribution-weighted summation (``propagate_sector``,
   ``run_gipa_pipeline`` / ``InversionPipeline``).

Deformed observables live in ``deformation``; the CSV scenario runner is the
``jcsynth`` console command (``jcsynth.cli``).
"""

__version__ = "0.1.0"

from .core import (
    DEFAULT_TAIL_TOL,
    BoseEinsteinStatistics,
    FockStatistics,
    PhotonStatistics,
    PhysicalParams,
    PoissonStatistics,
    TimeGrid,
    rabi_frequency,
)
from .coupling import (
    ConstantCoupling,
    CosSquaredCoupling,
    CouplingProfile,
    CouplingSynthesizer,
    DeformedClosedFormCoupling,
    SqrtTimeCoupling,
    SynthesizedCoupling,
    deformed_gipa_closed_form,
    delta_lambda,
    gipa,
    ipa,
    regularized_window_mask,
)
from .deformation import DeformedScenario, deformed_scenario, expected_sz, s_n
from .exceptions import (
    ConfigError,
    DomainError,
    IntegrationError,
    TargetRangeError,
)
from .propagation import (
    InversionPipeline,
    ScenarioResult,
    SectorTrajectory,
    delta_w,
    phase_integral_oracle,
    propagate_sector,
    run_gipa_pipeline,
    single_sector_scenario,
)
from .targets import (
    CoherentSeriesTarget,
    ConstantCouplingTarget,
    CosineSeriesTarget,
    CosSquaredTarget,
    DeformedCoherentSeriesTarget,
    DeformedSectorSummandTarget,
    InversionTarget,
    SampledTarget,
    SqrtTimeTarget,
    ThermalCosSquaredTarget,
    constant_coupling_family,
    cos_squared_family,
    deformed_summand_family,
)

__all__ = [
    "__version__",
    "DEFAULT_TAIL_TOL",
    "BoseEinsteinStatistics",
    "FockStatistics",
    "PhotonStatistics",
    "PhysicalParams",
    "PoissonStatistics",
    "TimeGrid",
    "rabi_frequency",
    "ConstantCoupling",
    "CosSquaredCoupling",
    "CouplingProfile",
    "CouplingSynthesizer",
    "DeformedClosedFormCoupling",
    "SqrtTimeCoupling",
    "SynthesizedCoupling",
    "deformed_gipa_closed_form",
    "delta_lambda",
    "gipa",
    "ipa",
    "regularized_window_mask",
    "DeformedScenario",
    "deformed_scenario",
    "expected_sz",
    "s_n",
    "ConfigError",
    "DomainError",
    "IntegrationError",
    "TargetRangeError",
    "InversionPipeline",
    "ScenarioResult",
    "SectorTrajectory",
    "delta_w",
    "phase_integral_oracle",
    "propagate_sector",
    "run_gipa_pipeline",
    "single_sector_scenario",
    "CoherentSeriesTarget",
    "ConstantCouplingTarget",
    "CosineSeriesTarget",
    "CosSquaredTarget",
    "DeformedCoherentSeriesTarget",
    "DeformedSectorSummandTarget",
    "InversionTarget",
    "SampledTarget",
    "SqrtTimeTarget",
    "ThermalCosSquaredTarget",
    "constant_coupling_family",
    "cos_squared_family",
    "deformed_summand_family",
]
