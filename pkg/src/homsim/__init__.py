"""Simulate and analyse momentum-entangled photon pairs whose exchange symmetry
is set by a phase mask and read out by Hong-Ou-Mandel interference."""

__version__ = "0.1.0"

from .state import (
    BiphotonState,
    MomentumGrid,
    MomentumLabel,
    TwoModeState,
    build_grid,
    exchange,
    exchange_expectation,
    post_select,
    spdc_state,
)
from .elements import (
    CoherenceModel,
    PhaseMask,
    apply_mask,
    apply_mirror,
    coherence_from_filter,
    gamma,
    pixel_mask,
    relative_phase,
    set_delay,
    step_mask,
)
from .interferometer import (
    Circuit,
    CollectionMode,
    Delay,
    DetectionDistribution,
    Mirror,
    Phase,
    apply_beamsplitter,
    couple_collection,
    hom_circuit,
    reflection_parity,
    run,
)
from .coincidence import (
    ImperfectionModel,
    ScanResult,
    analytic_rate,
    delay_scan,
    multimode_map,
    phase_scan,
    sample_counts,
    synthetic_phase_scan,
)
from .analysis import (
    FitResult,
    VisibilityReport,
    fit_cosine,
    fit_gaussian,
    normalize_scan,
    retrieve_phase,
    visibility,
)

__all__ = [
    "BiphotonState",
    "MomentumGrid",
    "MomentumLabel",
    "TwoModeState",
    "build_grid",
    "exchange",
    "exchange_expectation",
    "post_select",
    "spdc_state",
    "CoherenceModel",
    "PhaseMask",
    "apply_mask",
    "apply_mirror",
    "coherence_from_filter",
    "gamma",
    "pixel_mask",
    "relative_phase",
    "set_delay",
    "step_mask",
    "Circuit",
    "CollectionMode",
    "Delay",
    "DetectionDistribution",
    "Mirror",
    "Phase",
    "apply_beamsplitter",
    "couple_collection",
    "hom_circuit",
    "reflection_parity",
    "run",
    "ImperfectionModel",
    "ScanResult",
    "analytic_rate",
    "delay_scan",
    "multimode_map",
    "phase_scan",
    "sample_counts",
    "synthetic_phase_scan",
    "FitResult",
    "VisibilityReport",
    "fit_cosine",
    "fit_gaussian",
    "normalize_scan",
    "retrieve_phase",
    "visibility",
]
