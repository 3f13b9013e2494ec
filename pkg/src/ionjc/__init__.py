"""Detuned nonlinear Jaynes-Cummings dynamics of a trapped ion.

Exact closed-form block evolution, Magnus-expansion approximations of
orders 1..5, motional density matrices for coherent inputs, regularized
Glauber-Sudarshan P functions, and exact convergence bounds of the Magnus
series.
"""

from ._kernels import BACKEND as kernel_backend
from .convergence import (
    ConvergenceResult,
    RootSearchError,
    converges_at,
    min_root,
    r_lambda,
    sufficient_bound,
    t_max,
)
from .dynamics import (
    BlockCoefficients,
    BranchPointError,
    EvolutionMethod,
    exact_block,
    generating_exponent,
    magnus_block,
    magnus_f,
    magnus_term,
    no_time_ordering_block,
)
from .quasiprob import GridSpec, QuasiprobGrid, characteristic_oracle, p_omega_element, p_omega_grid
from .specfun import ModelParams, bessel_j, coupling_w, laguerre, spherical_bessel, w_max
from .states import (
    InitialState,
    MotionalDensityMatrix,
    TruncationError,
    rho_excited_input,
    rho_ground_input,
    sigma22,
    sigma22_trace,
)

__version__ = "0.1.0"

__all__ = [
    "BlockCoefficients",
    "BranchPointError",
    "ConvergenceResult",
    "EvolutionMethod",
    "GridSpec",
    "InitialState",
    "ModelParams",
    "MotionalDensityMatrix",
    "QuasiprobGrid",
    "RootSearchError",
    "TruncationError",
    "bessel_j",
    "characteristic_oracle",
    "converges_at",
    "coupling_w",
    "exact_block",
    "generating_exponent",
    "kernel_backend",
    "laguerre",
    "magnus_block",
    "magnus_f",
    "magnus_term",
    "min_root",
    "no_time_ordering_block",
    "p_omega_element",
    "p_omega_grid",
    "r_lambda",
    "rho_excited_input",
    "rho_ground_input",
    "sigma22",
    "sigma22_trace",
    "spherical_bessel",
    "sufficient_bound",
    "t_max",
    "w_max",
    "__version__",
]
