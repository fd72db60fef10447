"""Pseudo-spectral simulator and verification harness for two-component
Camassa-Holm systems with a fractional inertia operator.

The package evolves the pair (u, rho) of the b-parameterized family

    m_t = alpha u_x - b u_x m - u m_x - kappa rho rho_x,   m = (1 - d^2/dx^2)^r u,
    rho_t = -u rho_x - (b - 1) u_x rho,

on a periodic truncation of the line, and checks the identities the family
satisfies: conservation of the |rho|^(1/(b-1)) integral, transport and
momentum balances along characteristics, compact-support propagation,
continuous dependence in dyadic (Besov-type) norms, and weighted-norm
persistence and tail decay.
"""

from ._kernels import BACKEND as kernel_backend
from .besov import BesovIndex, besov_norm, lp_decompose, lp_norm, sobolev_norm
from .characteristics import (
    FlowDegeneracyError,
    FlowMap,
    SupportInterval,
    casimir,
    check_m_flow_identity,
    check_support_containment,
    check_transport_identity,
    evolve_flow,
    reconstruct_rho,
    track_support,
)
from .dynamics import (
    BlowUpError,
    FormulationError,
    Params,
    State,
    StepControl,
    Trajectory,
    friedrichs_iterate,
    integrate,
    rhs_m_form,
    rhs_nonlocal,
    stability_pair,
    step_rk4,
)
from .harness import PRESETS, Scenario, run_scenario, run_suite
from .offgrid import evaluate
from .spectral import (
    Grid,
    GridMismatchError,
    RealField,
    SpectralField,
    apply_inertia,
    dealias,
    derivative,
    helmholtz_convolve,
    inverse_transform,
    invert_inertia,
    transform,
)
from .weights import (
    StandardWeight,
    admissibility_check,
    decay_profile,
    persistence_monitor,
    weight_eval,
    weighted_norm,
)

__version__ = "0.1.0"
