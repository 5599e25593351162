"""Discrete Green kernel of the finite-difference heat semigroup.

    G^M(t, x, y) = sum_j exp(lambda_j t) phi_j^M(x) phi_j(kappa_M(y))

``phi_j^M`` interpolates linearly in ``x``; in ``y`` the kernel is constant on
each cell ``[x_l, x_{l+1})``, so every ``y``-integral here is an exact finite
sum over cells. This module deliberately does not use the sine transforms of
``grid_spectral``: it is the independent path that checks them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid_spectral import SpectralBasis, kappa_M
from .problem import Problem


@dataclass(frozen=True)
class KernelQuery:
    M: int
    t: float
    x: float
    y: float

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"t must be nonnegative, got {self.t}")
        for name in ("x", "y"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


def _phi(j: np.ndarray, x) -> np.ndarray:
    return np.sqrt(2.0) * np.sin(np.multiply.outer(j, np.asarray(x, dtype=float)) * np.pi)


def phi_interp(j: np.ndarray, x: float, M: int) -> np.ndarray:
    """``phi_j^M(x)``: linear interpolation of ``phi_j`` between grid nodes."""
    l = min(int(math.floor(M * x)), M - 1)
    w = M * x - l
    left = _phi(j, l / M)
    if w == 0.0:
        return left
    return left + w * (_phi(j, (l + 1) / M) - left)


def green_eval(q: KernelQuery, basis: SpectralBasis | None = None) -> float:
    M = q.M
    j = np.arange(1, M)
    lam = -4.0 * M**2 * np.sin(j * np.pi / (2 * M)) ** 2
    return float(np.sum(np.exp(lam * q.t) * phi_interp(j, q.x, M) * _phi(j, kappa_M(q.y, M))))


def green_cells(M: int, t: float, x: float) -> np.ndarray:
    """Kernel values on the ``M`` cells ``[l/M, (l+1)/M)``, ``l = 0..M-1``."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    j = np.arange(1, M)
    lam = -4.0 * M**2 * np.sin(j * np.pi / (2 * M)) ** 2
    a = np.exp(lam * t) * phi_interp(j, x, M)
    return a @ _phi(j, np.arange(M) / M)


def green_continuous(t: float, x, y, tol: float = 1e-12) -> np.ndarray:
    """Truncated series for the Dirichlet heat kernel on ``[0, 1]`` (reference only)."""
    if t <= 0:
        raise ValueError("the continuous kernel is evaluated for t > 0 only")
    # tail sum_{j>J} 2 exp(-j^2 pi^2 t) < 2 exp(-J^2 pi^2 t) / (1 - exp(-pi^2 t))
    J = 1
    while 2.0 * math.exp(-(J**2) * math.pi**2 * t) / (-math.expm1(-math.pi**2 * t)) > tol:
        J += 1
    j = np.arange(1, J + 1)
    w = np.exp(-(j**2) * np.pi**2 * t)
    xb, yb = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    return np.einsum("j,j...,j...->...", w, _phi(j, xb), _phi(j, yb))


def green_l2y(M: int, t: float, x: float, basis: SpectralBasis | None = None) -> float:
    """``int_0^1 G^M(t, x, y)^2 dy`` by exact cell quadrature."""
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    g = green_cells(M, t, x)
    return float(np.sum(g**2) / M)


def green_l2y_spectral(M: int, t: float, m: int) -> float:
    """Orthonormality shortcut ``sum_j exp(2 lambda_j t) phi_j(x_m)^2`` for grid ``x_m``."""
    j = np.arange(1, M)
    lam = -4.0 * M**2 * np.sin(j * np.pi / (2 * M)) ** 2
    return float(np.sum(np.exp(2 * lam * t) * _phi(j, m / M) ** 2))


def kernel_mass(M: int, t: float, x: float) -> float:
    """``int_0^1 G^M(t, x, y) dy``."""
    return float(np.sum(green_cells(M, t, x)) / M)


def mild_step_oracle(U, problem: Problem, dt: float, dW, basis: SpectralBasis | None = None,
                     t: float = 0.0) -> np.ndarray:
    """One step of the frozen-integrand mild form, by cell quadrature.

    ``U_m^+ = sum_l G(dt, x_m, x_l) [U_l / M + dt f(U_l) / M + sigma(U_l) dW_l / sqrt(M)]``

    where ``dW_l / sqrt(M)`` is the sheet increment over the rectangle
    ``[t, t + dt] x [x_l, x_{l+1}]``. Cell ``l = 0`` carries a zero kernel.
    """
    U = np.asarray(U, dtype=float)
    dW = np.asarray(dW, dtype=float)
    M = U.shape[-1] + 1
    x = np.arange(1, M) / M
    G = np.stack([green_cells(M, dt, xm) for xm in x])[:, 1:]
    per_cell = (U / M
                + dt * np.asarray(problem.f(t, x, U), dtype=float) / M
                + np.asarray(problem.sigma(t, x, U), dtype=float) * dW / np.sqrt(M))
    return per_cell @ G.T


# -- kernel estimates ---------------------------------------------------------

@dataclass
class BoundFit:
    bound_id: str
    fitted_C: float
    max_ratio_location: tuple
    passed: bool
    refined_C: float = float("nan")
    per_M: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)


def _gauss_panels(a: float, b: float, panels: int, order: int = 8):
    """Composite Gauss-Legendre nodes on ``[a, b]``, panels graded toward ``b``."""
    u = np.linspace(0.0, 1.0, panels + 1)
    edges = a + (b - a) * (1.0 - (1.0 - u) ** 4)
    xg, wg = np.polynomial.legendre.leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (hi - lo) * xg + 0.5 * (hi + lo)
    weights = 0.5 * (hi - lo) * wg
    return nodes.ravel(), weights.ravel()


def time_increment_energy(M: int, s: float, t: float, x: float, panels: int = 128) -> float:
    """``int_0^s int_0^1 |G(t-r, x, y) - G(s-r, x, y)|^2 dy dr`` (estimate (i)).

    ``y`` by exact cells, ``r`` by graded composite Gauss-Legendre.
    """
    if not 0 < s <= t:
        raise ValueError("need 0 < s <= t")
    if s == t:
        return 0.0
    nodes, weights = _gauss_panels(0.0, s, panels)
    j = np.arange(1, M)
    lam = -4.0 * M**2 * np.sin(j * np.pi / (2 * M)) ** 2
    ax = phi_interp(j, x, M)
    cells = _phi(j, np.arange(M) / M)
    a = (np.exp(np.outer(t - nodes, lam)) - np.exp(np.outer(s - nodes, lam))) * ax
    return float(weights @ np.sum((a @ cells) ** 2, axis=1) / M)


def time_increment_energy_closed(M: int, s: float, t: float, x: float) -> float:
    """Closed form of :func:`time_increment_energy` for grid points ``x``."""
    j = np.arange(1, M)
    lam = -4.0 * M**2 * np.sin(j * np.pi / (2 * M)) ** 2
    r_int = -np.expm1(2 * lam * s) / (-2 * lam)
    return float(np.sum(np.expm1(lam * (t - s)) ** 2 * r_int * _phi(j, x) ** 2))


def lag_energy(M: int, s: float, t: float, x: float) -> float:
    """``int_0^1 |G(t, x, y) - G(s, x, y)|^2 dy`` (estimate (iii))."""
    return float(np.sum((green_cells(M, t, x) - green_cells(M, s, x)) ** 2) / M)


def envelope(bound_id: str, s: float, t: float, alpha: float | None = None) -> float:
    if bound_id == "I":
        return math.sqrt(t - s)
    if bound_id == "II":
        return 1.0 / math.sqrt(t)
    if bound_id == "III":
        return s ** (-alpha) * (t - s) ** (alpha - 0.5)
    raise ValueError(f"unknown bound {bound_id!r}")


def default_probes(bound_id: str, level: int = 0, T: float = 1.0, alphas=(0.75, 1.0, 1.5, 2.0)):
    """Dyadic probe tuples ``(s, t, alpha)``; ``level`` doubles the density each increment."""
    step = 2.0 ** -level
    ks = np.arange(1.0, 10.0 + 1e-12, step)
    pts = sorted({T * 2.0**-k for k in ks})
    if bound_id == "II":
        return [(None, t, None) for t in pts]
    pairs = [(s, t) for t in pts for s in pts if s < t]
    if bound_id == "I":
        return [(s, t, None) for s, t in pairs]
    return [(s, t, a) for s, t in pairs for a in alphas]


def _measure(bound_id: str, M: int, s, t, x, alpha, panels: int) -> float:
    if bound_id == "I":
        return time_increment_energy(M, s, t, x, panels)
    if bound_id == "II":
        return green_l2y(M, t, x)
    return lag_energy(M, s, t, x)


def _fit(bound_id: str, M_set, probes, x_points, panels: int):
    best, where, per_M, rows = 0.0, (), {}, []
    for M in M_set:
        # the kernel is symmetric about x = 1/2
        xs = x_points if x_points is not None else np.arange(1, M // 2 + 1) / M
        best_M = 0.0
        for s, t, alpha in probes:
            env = envelope(bound_id, s, t, alpha)
            for x in xs:
                ratio = _measure(bound_id, M, s, t, x, alpha, panels) / env
                rows.append((bound_id, M, s, t, float(x), alpha, ratio))
                if ratio > best_M:
                    best_M = ratio
                if ratio > best:
                    best, where = ratio, (M, s, t, float(x), alpha)
        per_M[M] = best_M
    return best, where, per_M, rows


def check_bound(bound_id: str, M_set=(8, 16, 32, 64), probe_grid=None, x_points=None,
                panels: int = 128, refine: bool = True, alphas=(0.75, 1.0, 1.5, 2.0)) -> BoundFit:
    """Fit the constant of one kernel estimate and test its stability.

    ``fitted_C`` is the largest measured/envelope ratio over all probes. The
    fit passes if it is finite, it changes by less than a factor 2 when the
    dyadic probe grid is doubled, and the per-``M`` constants agree within a
    factor 2.
    """
    if bound_id not in ("I", "II", "III"):
        raise ValueError(f"unknown bound {bound_id!r}")
    probes = default_probes(bound_id, alphas=alphas) if probe_grid is None else list(probe_grid)
    if not probes:
        raise ValueError("empty probe set")
    C, where, per_M, rows = _fit(bound_id, M_set, probes, x_points, panels)
    refined = float("nan")
    ok = math.isfinite(C)
    if refine and probe_grid is None:
        refined, _, _, _ = _fit(bound_id, M_set, default_probes(bound_id, level=1, alphas=alphas), x_points, panels)
        ok = ok and math.isfinite(refined) and max(C, refined) < 2.0 * min(C, refined)
    vals = [v for v in per_M.values() if v > 0]
    if vals:
        ok = ok and max(vals) < 2.0 * min(vals)
    return BoundFit(bound_id, C, where, bool(ok), refined, per_M, rows)
