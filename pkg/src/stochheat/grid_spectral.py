"""Uniform grid on [0, 1], eigenstructure of the Dirichlet finite-difference
Laplacian ``A = M^2 D`` and the discrete heat semigroup ``exp(A * lag)``.

State vectors hold interior values only (length ``M - 1``); the boundary
zeros are implicit. All transforms accept a leading batch axis, so a stack of
Monte Carlo samples of shape ``(S, M - 1)`` goes through in one call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    M: int
    N: int
    T: float

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"M must be an integer >= 2, got {self.M}")
        if int(self.N) != self.N or self.N < 1:
            raise ValueError(f"N must be an integer >= 1, got {self.N}")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError(f"T must be positive and finite, got {self.T}")

    @property
    def dx(self) -> float:
        return 1.0 / self.M

    @property
    def dt(self) -> float:
        return self.T / self.N

    @property
    def x_interior(self) -> np.ndarray:
        return np.arange(1, self.M) / self.M

    @property
    def x_full(self) -> np.ndarray:
        return np.arange(0, self.M + 1) / self.M

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.dt


@dataclass(frozen=True, eq=False)
class SpectralBasis:
    """Closed-form eigenpairs of ``M^2 D``.

    ``phi[j - 1, m - 1] = sqrt(2) sin(j pi m / M)`` and
    ``lambdas[j - 1] = -4 M^2 sin^2(j pi / (2M))``. The table is symmetric,
    and ``phi / sqrt(M)`` is orthogonal.
    """

    M: int
    lambdas: np.ndarray
    phi: np.ndarray
    semigroup_cache: dict = field(default_factory=dict, repr=False)

    @property
    def size(self) -> int:
        return self.M - 1

    @property
    def c(self) -> np.ndarray:
        """Ratios ``-lambda_j / (j pi)^2``, bounded in ``[4/pi^2, 1]``."""
        j = np.arange(1, self.M)
        return -self.lambdas / (j * np.pi) ** 2

    def decay(self, lag: float) -> np.ndarray:
        """``exp(lambda_j * lag)``, cached on the exact float value of ``lag``."""
        lag = float(lag)
        if lag < 0:
            raise ValueError(f"lag must be nonnegative, got {lag}")
        key = lag.hex()
        out = self.semigroup_cache.get(key)
        if out is None:
            out = np.exp(self.lambdas * lag)
            out.setflags(write=False)
            self.semigroup_cache[key] = out
        return out


def build_basis(M: int) -> SpectralBasis:
    if int(M) != M or M < 2:
        raise ValueError(f"M must be an integer >= 2, got {M}")
    M = int(M)
    j = np.arange(1, M)
    lambdas = -4.0 * M**2 * np.sin(j * np.pi / (2 * M)) ** 2
    # sin(j m pi / M) with the product reduced mod 2M keeps the table exactly symmetric
    jm = np.mod(np.outer(j, j), 2 * M)
    phi = np.sqrt(2.0) * np.sin(jm * np.pi / M)
    lambdas.setflags(write=False)
    phi.setflags(write=False)
    return SpectralBasis(M=M, lambdas=lambdas, phi=phi)


def _check_len(v: np.ndarray, basis: SpectralBasis) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != basis.size:
        raise ValueError(f"expected trailing length {basis.size}, got {v.shape[-1]}")
    return v


def dst_forward(v, basis: SpectralBasis) -> np.ndarray:
    """Sine coefficients ``(1/M) sum_m phi[j, m] v[m]``."""
    v = _check_len(v, basis)
    return (v @ basis.phi) / basis.M


def dst_inverse(coeffs, basis: SpectralBasis) -> np.ndarray:
    coeffs = _check_len(coeffs, basis)
    return coeffs @ basis.phi


def apply_semigroup(v, lag: float, basis: SpectralBasis) -> np.ndarray:
    """``exp(A * lag) v`` through the sine basis."""
    if lag < 0:
        raise ValueError(f"lag must be nonnegative, got {lag}")
    v = _check_len(v, basis)
    if lag == 0:
        return v.copy()
    return dst_inverse(dst_forward(v, basis) * basis.decay(lag), basis)


def laplacian_matrix(M: int) -> np.ndarray:
    """Dense ``M^2 D``; used by tests and diagnostics only."""
    n = M - 1
    D = -2.0 * np.eye(n) + np.eye(n, k=1) + np.eye(n, k=-1)
    return M**2 * D


def kappa_M(y: float, M: int) -> float:
    """Round ``y`` down to the spatial grid: ``floor(M y) / M``."""
    if not 0.0 <= y <= 1.0:
        raise ValueError(f"y must lie in [0, 1], got {y}")
    l = math.floor(M * y)
    # M * y can land a hair below an integer for grid points such as 27/163
    if (l + 1) / M <= y:
        l += 1
    return l / M


def kappa_N_T(s: float, grid: GridSpec) -> float:
    """Largest discrete time ``t_n <= s``."""
    if not 0.0 <= s <= grid.T:
        raise ValueError(f"s must lie in [0, {grid.T}], got {s}")
    n = math.floor(s / grid.dt)
    # guard against s/dt landing a hair below an integer
    if (n + 1) * grid.dt <= s:
        n += 1
    return min(n, grid.N) * grid.dt


def pad_boundary(v: np.ndarray) -> np.ndarray:
    """Interior values -> values on all ``M + 1`` grid points."""
    v = np.asarray(v, dtype=float)
    pad = [(0, 0)] * (v.ndim - 1) + [(1, 1)]
    return np.pad(v, pad)


def interpolate_space(values, x: float) -> float:
    """Piecewise-linear interpolation of grid values (boundary included)."""
    values = np.asarray(values, dtype=float)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"x must lie in [0, 1], got {x}")
    M = values.shape[-1] - 1
    if M < 1:
        raise ValueError("need at least two grid values")
    m = min(int(math.floor(M * x)), M - 1)
    w = M * x - m
    return float(values[m] + w * (values[m + 1] - values[m]))
