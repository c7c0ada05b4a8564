"""Spectral analysis of a two-channel lattice operator family on the 3-torus.

The fibre operator at quasi-momentum k couples a one-dimensional channel with
energy w0(k) = eps(k) + gamma to a continuum with energy w1(k, t).  Its
discrete eigenvalues outside the band are the zeros of the Fredholm
determinant Delta_mu(k; z) = w0(k) - z - mu^2 I(k; z).
"""

from .determinant import (
    SpectralPoint,
    channel_range,
    determinant_estimate,
    determinant_z_derivative,
    fredholm_determinant,
    lattice_integral,
)
from .errors import AccuracyFailure, DomainError, InvalidArgument, NumericsBroken, SpectralError
from .kernels import BACKEND
from .lattice import (
    PI_POINT,
    ZERO,
    BandEdges,
    BranchFlags,
    SpectralParams,
    TorusPoint,
    band_edges,
    epsilon,
    w0,
    w1,
    w1_branch,
    wrap,
)
from .quadrature import (
    QuadratureResult,
    SingularityHint,
    integrate_ball,
    integrate_torus,
    integrate_with_singularity,
)
from .spectral import (
    CriticalCouplings,
    EigenReport,
    End,
    RegimeClass,
    Side,
    classify_regime,
    critical_couplings,
    find_eigenvalue,
    sweep_no_eigenvalues,
    threshold_integral,
    virtual_level_check,
)
from .asymptotics import ExpansionFit, ResonanceFunction, expansion_fit, quadratic_form_limit, resonance_norms

__version__ = "0.1.0"
