"""Finite-difference space, exponential-integrator time solvers for the
stochastic heat equation on [0, 1] with Dirichlet boundary conditions."""

__version__ = "0.1.0"

from .grid_spectral import GridSpec, SpectralBasis, build_basis, apply_semigroup  # noqa: E402
from .noise import NoisePlan, IncrementBlock, sample_block, coarsen  # noqa: E402
from .problem import Problem, BuiltinProblem, get_problem  # noqa: E402
from .schemes import SchemeKind, NumericalAbort, SolverState, integrate  # noqa: E402

__all__ = [
    "GridSpec", "SpectralBasis", "build_basis", "apply_semigroup",
    "NoisePlan", "IncrementBlock", "sample_block", "coarsen",
    "Problem", "BuiltinProblem", "get_problem",
    "SchemeKind", "NumericalAbort", "SolverState", "integrate",
]
