"""Information content of variational cost landscapes and gradient-norm bounds.

Random walks over a cost landscape are discretized into symbol sequences;
the information content of those sequences bounds the average gradient norm.
A statevector simulator of a layered RY/CZ circuit supplies quantum cost
landscapes for barren-plateau scaling studies.
"""

from .bounds import (
    GradientBounds,
    InapplicableBoundError,
    bound_from_sic,
    bounds_from_mic,
    gaussian_phi,
    gradient_bounds,
    phi_m,
    phi_m_inverse,
    solve_q,
)
from .ic import ICCurve, ICFeatures, extract_features, ic_curve, information_content, pair_probabilities, symbolize
from .landscape import (
    AnalyticLandscape,
    CostFunction,
    WalkConfig,
    WalkRecord,
    finite_difference_gradient,
    lhs_sample,
    random_walk,
)
from .quantum import AnsatzSpec, QuantumCost, parameter_shift_gradient, prepare_state, quantum_cost
from .scaling import FitResult, ScanPoint, fit_global_qubit_scaling, fit_local_scaling, ols_polyfit

__version__ = "0.1.0"

__all__ = [
    "AnalyticLandscape",
    "AnsatzSpec",
    "CostFunction",
    "FitResult",
    "GradientBounds",
    "ICCurve",
    "ICFeatures",
    "InapplicableBoundError",
    "QuantumCost",
    "ScanPoint",
    "WalkConfig",
    "WalkRecord",
    "bound_from_sic",
    "bounds_from_mic",
    "extract_features",
    "finite_difference_gradient",
    "fit_global_qubit_scaling",
    "fit_local_scaling",
    "gaussian_phi",
    "gradient_bounds",
    "ic_curve",
    "information_content",
    "lhs_sample",
    "ols_polyfit",
    "pair_probabilities",
    "parameter_shift_gradient",
    "phi_m",
    "phi_m_inverse",
    "prepare_state",
    "quantum_cost",
    "random_walk",
    "solve_q",
    "symbolize",
]
