"""Ideal continuous-variable teleportation with photon-added/subtracted,
f-deformed displaced Fock states as two-mode resources."""
from .charfun import InputSpec, chi_input, chi_resource
from .correlations import CorrelationReport, correlation_report, entanglement_entropy, epr_variance
from .errors import (
    ConfigError,
    CVTeleportError,
    DeformationError,
    NonConvergent,
    NonRealResult,
    SeriesDivergence,
    TailMassExceeded,
    ZeroState,
)
from .fock import Cutoff, DeformationFn, deformed_displacement, displacement_matrix
from .states import (
    ResourceSpec,
    SingleModeState,
    TwoModeState,
    beam_split,
    default_cutoff,
    make_resource,
    make_single_mode,
)
from .teleport import (
    FidelityResult,
    fidelity,
    fidelity_quadrature,
    fidelity_series_coherent,
    fidelity_series_squeezed,
)

__version__ = "0.1.0"
