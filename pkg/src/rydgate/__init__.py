"""Simulator of a photon-photon phase gate mediated by a van der Waals
interaction between two stored collective excitations.

Modules: :mod:`rydgate.core` (types, units, configuration),
:mod:`rydgate.analytic` (second-order expansion results),
:mod:`rydgate.numerics` (grid/quadrature evaluation),
:mod:`rydgate.loss` (retrieval-efficiency model) and
:mod:`rydgate.harness` (experiment sweeps and datasets).
"""

__version__ = "0.1.0"

from .core import (
    AccuracyWarning,
    ConfigError,
    Direct,
    ExcitationProfile,
    GateConfig,
    GateMetrics,
    GridSpec,
    LossModel,
    OverlapError,
    PhysicsError,
    SeparationWarning,
    Swap,
    UndefinedTimeError,
    calibrate_c6,
    load_config,
    time_for_pi,
    validate_config,
)
from .analytic import ExpansionCoefficients, expansion_coefficients
from .numerics import (
    entanglement_entropy,
    fidelity_from_zeta,
    gate_metrics,
    momentum_centroid,
    momentum_map,
    zeta,
    zeta_mc_oracle,
)
from .loss import EfficiencyBreakdown, pair_efficiency

__all__ = [
    "__version__",
    "AccuracyWarning",
    "ConfigError",
    "Direct",
    "EfficiencyBreakdown",
    "ExcitationProfile",
    "ExpansionCoefficients",
    "GateConfig",
    "GateMetrics",
    "GridSpec",
    "LossModel",
    "OverlapError",
    "PhysicsError",
    "SeparationWarning",
    "Swap",
    "UndefinedTimeError",
    "calibrate_c6",
    "entanglement_entropy",
    "expansion_coefficients",
    "fidelity_from_zeta",
    "gate_metrics",
    "load_config",
    "momentum_centroid",
    "momentum_map",
    "pair_efficiency",
    "time_for_pi",
    "validate_config",
    "zeta",
    "zeta_mc_oracle",
]
