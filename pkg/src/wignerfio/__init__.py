"""Wigner distributions and Wigner kernels of Fourier integral operators.

Submodules
----------
grid, wigner, tensorio
    Grids, sampled functions, discrete Fourier and Wigner transforms,
    the binary tensor format.
symbols, canonical, catalog, symplectic
    Symbol and phase certification, canonical maps, the reference catalog.
fio
    Type I / type II operators, Schwartz kernels, tensorized phases.
kernel, diagnostics, transport
    Four-index Wigner kernels, decay and localization reports, boundedness
    and off-graph mass checks, free-particle transport.
"""

from ._accel import BACKEND
from .canonical import CanonicalMap, SolverError, map_certify, solve_canonical_map, solve_inverse_map
from .catalog import DEFAULT_REGISTRY, Registry, catalog, linear_map
from .diagnostics import (
    DecayReport,
    decay_report,
    ghost_mass_scenario,
    l2_bound_check,
    off_graph_fraction,
    taylor_split,
)
from .fio import (
    OperatorSpec,
    SchwartzKernelMatrix,
    apply,
    apply_fio1,
    apply_fio2,
    block_hessian_check,
    kohn_nirenberg,
    schwartz_kernel,
    tensorize_type2,
)
from .grid import Grid1D, GridMismatchError, InvalidGridError, PhaseSpaceGrid, SampledFunction, fourier, inverse_fourier
from .kernel import (
    KernelMemoryError,
    WignerKernel4D,
    adjoint_kernel,
    compose_kernels,
    evolve_wigner,
    graph_kernel,
    identity_kernel,
    kernel_grid,
    kernel_type1_direct,
    kernel_type2_direct,
    kernel_via_schwartz,
)
from .symbols import Box, CertificationError, Symbol, TamePhase, hormander_certify, shubin_certify, tame_certify
from .symplectic import symplectic_builder
from .tensorio import read_tensor, write_tensor
from .wigner import WignerField, apply_A_half, apply_A_half_inverse, cross_wigner, permute_Tp, tau_wigner, tf_shift

__version__ = "0.1.0"
