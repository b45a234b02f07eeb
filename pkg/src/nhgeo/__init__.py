"""Complex geometric phases and complex monopoles of non-Hermitian two-level systems."""

from . import dynamics, errors, geophase, monopole, spectral
from .dynamics import (
    CyclicState,
    DrivenAtomParams,
    TimeDependentHamiltonian,
    cyclic_states,
    evolve_pair,
    period_propagator,
    phases_decompose,
    rotating_field,
    rwa_hamiltonian,
)
from .errors import *  # noqa: F401,F403
from .geophase import (
    Approach,
    Band,
    GaugePatch,
    LoopSpec,
    PhaseResult,
    ThetaKind,
    circle_loop,
    constant_theta_loop,
    curvature_flux,
    drive_loop,
    gp_complex_dirac_loop,
    gp_constant_theta,
    gp_contour,
    gp_garrison_wright,
    gp_multipole,
    re_gamma_resonance,
)
from .monopole import MonopoleKind, MonopoleSpec, field, potential
from .spectral import (
    ComplexPoint3,
    Degeneracy,
    TwoLevelHamiltonian,
    biorthogonal_decompose,
    classify_degeneracy,
    complex_spherical_coords,
    solve_two_level,
)

__version__ = "0.1.0"
