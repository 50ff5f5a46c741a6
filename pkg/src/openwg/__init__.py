"""Open-system dynamics of two coupled dielectric slab waveguides.

A narrow single-mode guide (the "system") evanescently coupled to a wide
multimode guide (the "environment") realizes a star-model open quantum
system: exponential energy decay, memory-kernel non-Markovianity, energy
revivals from the environment's far boundary, and dynamical-decoupling
control via periodic phase kicks.  The package solves the slab mode
problem, builds and integrates the coupled-mode Hamiltonian, analyzes
decay/revival/kernel observables, and cross-checks everything against an
independent finite-difference beam-propagation oracle.
"""

__version__ = "1.0.0"

from .errors import (
    ConfigError,
    DomainError,
    GridTooCoarse,
    NegativeCouplingProduct,
    NoRevivalFound,
    NonDecayingTrace,
    OpenwgError,
    QuadratureFailure,
    RootBracketFailure,
    StepSizeUnderflow,
    SystemNotSingleMode,
)
from .slab import GuidedMode, SlabSpec, count_modes, field_profile, \
    solve_modes
from .star import Geometry, StarHamiltonian, build_hamiltonian, \
    coupling_spectrum
from .propagate import ModulationSchedule, StateTrace, StateVector, evolve, \
    initial_state
from .analysis import (
    decay_length_analytic,
    decay_length_markov,
    effective_index_shift,
    field_spectrum,
    fit_decay,
    kernel_dynamics,
    kernel_width,
    memory_kernel,
    mode_density,
    revival_analytic,
    revival_period,
    revival_scaling_fit,
    revival_slope,
    spectral_density,
)
from .ddcontrol import WgmModulator, dd_scan, make_schedule, wgm_phase, \
    wgm_scan, wgm_transmission
from . import oracle

__all__ = [name for name in dir() if not name.startswith("_")]
