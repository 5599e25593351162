"""Time integrators for the finite-difference semi-discretization

    dU = A U dt + F(U) dt + Sigma(U) dW,    A = M^2 D,  Sigma = sqrt(M) sigma(U).

* SEXP: ``U+ = exp(A dt) (U + dt F(U) + Sigma(U) dW)``; explicit, no step restriction.
* SEM:  ``(I - dt A) U+ = U + dt F(U) + Sigma(U) dW``.
* CNM:  ``(I - dt/2 A) U+ = (I + dt/2 A) U + dt F(U) + Sigma(U) dW``.

Noise and drift are always taken at the left endpoint. States may carry a
leading sample axis: ``U`` of shape ``(S, M - 1)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .grid_spectral import GridSpec, SpectralBasis, apply_semigroup, build_basis
from .noise import IncrementBlock
from .problem import Problem, eval_u0_on_grid


class SchemeKind(enum.Enum):
    SEXP = "sexp"
    SEM = "sem"
    CNM = "cnm"


class NumericalAbort(FloatingPointError):
    """A state became non-finite; carries the step and the offending samples."""

    def __init__(self, step: int, samples=None, msg: str | None = None):
        self.step = step
        self.samples = [] if samples is None else list(samples)
        super().__init__(msg or f"non-finite state at step {step} (samples {self.samples})")


@dataclass(frozen=True)
class SolverState:
    n: int
    U: np.ndarray
    t: float
    aborted: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class Tridiag:
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self):
        n = len(self.diag)
        if len(self.sub) != n - 1 or len(self.sup) != n - 1:
            raise ValueError("off-diagonals must have length n - 1")

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = x * self.diag
        y[..., 1:] += self.sub * x[..., :-1]
        y[..., :-1] += self.sup * x[..., 1:]
        return y

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.sub, -1) + np.diag(self.sup, 1)

    def is_diagonally_dominant(self) -> bool:
        off = np.zeros_like(self.diag)
        off[1:] += np.abs(self.sub)
        off[:-1] += np.abs(self.sup)
        return bool(np.all(np.abs(self.diag) > off))


class ThomasFactor:
    """Forward-elimination coefficients of a tridiagonal matrix, reusable across solves."""

    def __init__(self, A: Tridiag):
        n = len(A.diag)
        self.A = A
        self.c = np.zeros(n)
        self.inv = np.zeros(n)
        self.sub = np.asarray(A.sub, dtype=float)
        denom = A.diag[0]
        for i in range(n):
            if i > 0:
                denom = A.diag[i] - A.sub[i - 1] * self.c[i - 1]
            if denom == 0.0:
                raise ZeroDivisionError(f"zero pivot in row {i}")
            self.inv[i] = 1.0 / denom
            if i < n - 1:
                self.c[i] = A.sup[i] / denom

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        n = len(self.inv)
        # row-major over the grid index so each elimination step is one vector op
        d = np.moveaxis(rhs, -1, 0).copy()
        d[0] *= self.inv[0]
        for i in range(1, n):
            d[i] -= self.sub[i - 1] * d[i - 1]
            d[i] *= self.inv[i]
        for i in range(n - 2, -1, -1):
            d[i] -= self.c[i] * d[i + 1]
        return np.moveaxis(d, 0, -1)


def tridiag_solve(A: Tridiag, rhs) -> np.ndarray:
    """Solve ``A x = rhs`` by the Thomas algorithm (no pivoting)."""
    return ThomasFactor(A).solve(rhs)


def shifted_laplacian(M: int, a: float, b: float) -> Tridiag:
    """``a I + b M^2 D`` as a tridiagonal."""
    n = M - 1
    off = np.full(n - 1, b * M**2)
    return Tridiag(sub=off, diag=np.full(n, a - 2.0 * b * M**2), sup=off.copy())


@lru_cache(maxsize=64)
def _implicit_factor(M: int, dt: float, theta: float) -> ThomasFactor:
    return ThomasFactor(shifted_laplacian(M, 1.0, -theta * dt))


@lru_cache(maxsize=16)
def _cached_basis(M: int) -> SpectralBasis:
    return build_basis(M)


def drift_vector(problem: Problem, state: SolverState, x: np.ndarray) -> np.ndarray:
    return np.asarray(problem.f(state.t, x, state.U), dtype=float)


def diffusion_scaled(problem: Problem, state: SolverState, dW, M: int, x: np.ndarray) -> np.ndarray:
    """``sqrt(M) sigma(U) dW`` entrywise."""
    dW = dW.dW if isinstance(dW, IncrementBlock) else np.asarray(dW, dtype=float)
    if dW.shape[-1] != state.U.shape[-1]:
        raise ValueError("increment and state lengths differ")
    return np.sqrt(M) * np.asarray(problem.sigma(state.t, x, state.U), dtype=float) * dW


def _explicit_part(state, problem, dW, dt, M):
    x = np.arange(1, M) / M
    return state.U + dt * drift_vector(problem, state, x) + diffusion_scaled(problem, state, dW, M, x)


def _advance(state: SolverState, U: np.ndarray, dt: float) -> SolverState:
    if not np.all(np.isfinite(U)):
        bad = np.nonzero(~np.all(np.isfinite(np.atleast_2d(U)), axis=-1))[0]
        raise NumericalAbort(state.n + 1, bad)
    return SolverState(n=state.n + 1, U=U, t=(state.n + 1) * dt)


def step_sexp(state: SolverState, problem: Problem, dW, basis: SpectralBasis, dt: float) -> SolverState:
    v = _explicit_part(state, problem, dW, dt, basis.M)
    return _advance(state, apply_semigroup(v, dt, basis), dt)


def step_sem(state: SolverState, problem: Problem, dW, M: int, dt: float) -> SolverState:
    v = _explicit_part(state, problem, dW, dt, M)
    return _advance(state, _implicit_factor(M, dt, 1.0).solve(v), dt)


def step_cnm(state: SolverState, problem: Problem, dW, M: int, dt: float) -> SolverState:
    x = np.arange(1, M) / M
    v = (shifted_laplacian(M, 1.0, 0.5 * dt).matvec(state.U)
         + dt * drift_vector(problem, state, x)
         + diffusion_scaled(problem, state, dW, M, x))
    return _advance(state, _implicit_factor(M, dt, 0.5).solve(v), dt)


def step_explicit_euler(state: SolverState, problem: Problem, dW, M: int, dt: float) -> SolverState:
    """Fully explicit Euler-Maruyama; stable only for ``dt M^2 <= 1/2``. Control case."""
    x = np.arange(1, M) / M
    v = (shifted_laplacian(M, 1.0, dt).matvec(state.U)
         + dt * drift_vector(problem, state, x)
         + diffusion_scaled(problem, state, dW, M, x))
    return SolverState(n=state.n + 1, U=v, t=(state.n + 1) * dt)


class Stepper:
    """One scheme bound to a grid; ``__call__`` advances a state by one step."""

    def __init__(self, scheme: SchemeKind, problem: Problem, grid: GridSpec,
                 basis: SpectralBasis | None = None):
        self.scheme = SchemeKind(scheme)
        self.problem = problem
        self.grid = grid
        self.dt = grid.dt
        self.M = grid.M
        self.x = grid.x_interior
        self.sqrtM = np.sqrt(grid.M)
        if self.scheme is SchemeKind.SEXP:
            self.basis = basis if basis is not None else _cached_basis(grid.M)
            phi = self.basis.phi
            # exp(A dt) = phi^T diag(exp(lambda dt)) phi / M as one dense matrix
            self.propagator = (phi * self.basis.decay(self.dt)) @ phi / grid.M
        else:
            theta = 1.0 if self.scheme is SchemeKind.SEM else 0.5
            self.factor = _implicit_factor(grid.M, self.dt, theta)
            self.explicit = shifted_laplacian(grid.M, 1.0, (1.0 - theta) * self.dt)

    def __call__(self, U: np.ndarray, n: int, dW: np.ndarray) -> np.ndarray:
        t = n * self.dt
        p = self.problem
        v = self.dt * p.f(t, self.x, U) + self.sqrtM * p.sigma(t, self.x, U) * dW
        if self.scheme is SchemeKind.SEXP:
            return (U + v) @ self.propagator
        if self.scheme is SchemeKind.SEM:
            return self.factor.solve(U + v)
        return self.factor.solve(self.explicit.matvec(U) + v)


def integrate(scheme: SchemeKind, problem: Problem, grid: GridSpec,
              noise_stream: Iterable[IncrementBlock] | None,
              record: Sequence[int] | None = None, n_samples: int | None = None,
              on_nonfinite: str = "raise") -> list[SolverState]:
    """Run ``N`` steps from ``u0`` on the grid and return snapshots at ``record``.

    ``noise_stream`` yields ``N`` blocks at the scheme's level (``None`` means
    zero noise). With ``on_nonfinite="mask"`` diverged samples of a batch are
    zeroed from then on and flagged in each snapshot's ``aborted`` mask;
    ``NumericalAbort`` is raised only if every sample diverges.
    """
    record_set = set(range(grid.N + 1)) if record is None else set(record)
    U = eval_u0_on_grid(problem, grid)
    if n_samples is not None:
        U = np.tile(U, (n_samples, 1))
    stepper = Stepper(scheme, problem, grid)
    aborted = np.zeros(U.shape[:-1], dtype=bool)
    out = [SolverState(0, U.copy(), 0.0, aborted.copy())] if 0 in record_set else []
    stream = iter(noise_stream) if noise_stream is not None else None
    zero = np.zeros(U.shape)
    for n in range(grid.N):
        if stream is None:
            dW = zero
        else:
            try:
                dW = next(stream).dW
            except StopIteration:
                raise ValueError(f"noise stream exhausted after {n} of {grid.N} blocks") from None
        with np.errstate(over="ignore", invalid="ignore"):
            U = stepper(U, n, dW)
        finite = np.all(np.isfinite(U), axis=-1)
        if not np.all(finite):
            bad = ~finite
            if on_nonfinite == "raise" or U.ndim == 1:
                raise NumericalAbort(n + 1, np.nonzero(np.atleast_1d(bad))[0])
            aborted |= bad
            U[bad] = 0.0
            if np.all(aborted):
                raise NumericalAbort(n + 1, np.nonzero(aborted)[0], "every sample diverged")
        if n + 1 in record_set:
            out.append(SolverState(n + 1, U.copy(), (n + 1) * grid.dt, aborted.copy()))
    return out
