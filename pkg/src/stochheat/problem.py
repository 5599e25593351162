"""Drift, diffusion and initial datum of the stochastic heat equation.

Coefficients take ``(t, x, u)`` and must accept numpy arrays for ``x`` and
``u`` (they are applied to whole state vectors at once).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.fft import dst

from .grid_spectral import GridSpec

Coefficient = Callable[[float, np.ndarray, np.ndarray], np.ndarray]


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Problem:
    f: Coefficient
    sigma: Coefficient
    u0: Callable[[np.ndarray], np.ndarray]
    lipschitz: bool = True
    label: str = "custom"

    def __post_init__(self):
        ends = np.asarray(self.u0(np.array([0.0, 1.0])), dtype=float)
        if np.max(np.abs(ends)) > 1e-12:
            raise ValueError(f"u0 must vanish at x=0 and x=1, got {ends.tolist()}")

    def with_u0(self, u0) -> "Problem":
        return Problem(self.f, self.sigma, u0, self.lipschitz, self.label)


def _cos_bump(x):
    return np.cos(np.pi * (np.asarray(x, dtype=float) - 0.5))


def _const(value):
    return lambda t, x, u: np.full(np.shape(u), value, dtype=float)


class BuiltinProblem(enum.Enum):
    STRONG_TEST = "strong_test"
    AS_TEST = "as_test"
    NONLIP_DEMO = "nonlip_demo"

    def build(self) -> Problem:
        if self is BuiltinProblem.STRONG_TEST:
            return Problem(f=lambda t, x, u: 0.5 * u, sigma=lambda t, x, u: 1.0 - u,
                           u0=_cos_bump, lipschitz=True, label=self.value)
        if self is BuiltinProblem.AS_TEST:
            return Problem(f=lambda t, x, u: 1.0 - u, sigma=lambda t, x, u: np.sin(u),
                           u0=_cos_bump, lipschitz=True, label=self.value)
        # cubic drift: one-sided Lipschitz only
        return Problem(f=lambda t, x, u: u - u**3, sigma=lambda t, x, u: 1.0 - u,
                       u0=_cos_bump, lipschitz=False, label=self.value)


def get_problem(label: str) -> Problem:
    try:
        return BuiltinProblem(label.lower().replace("-", "_")).build()
    except ValueError:
        names = ", ".join(p.value for p in BuiltinProblem)
        raise ValueError(f"unknown problem {label!r}; choose one of {names}") from None


def heat_only(u0=_cos_bump, label: str = "heat_only") -> Problem:
    """Deterministic heat equation: ``f = sigma = 0``."""
    return Problem(f=_const(0.0), sigma=_const(0.0), u0=u0, lipschitz=True, label=label)


def eval_u0_on_grid(problem: Problem, grid: GridSpec) -> np.ndarray:
    return np.asarray(problem.u0(grid.x_interior), dtype=float).copy()


def lipschitz_probe(problem: Problem, n_pairs: int = 1000, bound: float = 10.0,
                    seed: int = 0) -> tuple[float, float]:
    """Largest observed difference quotients of ``f`` and ``sigma`` in ``u``.

    A smoke test on ``[-bound, bound]`` at ``t = 0``, ``x = 1/2``; it proves nothing.
    """
    rng = np.random.default_rng(seed)
    u = rng.uniform(-bound, bound, n_pairs)
    v = rng.uniform(-bound, bound, n_pairs)
    keep = u != v
    u, v = u[keep], v[keep]
    x = np.full_like(u, 0.5)
    df = np.abs(problem.f(0.0, x, u) - problem.f(0.0, x, v)) / np.abs(u - v)
    ds = np.abs(problem.sigma(0.0, x, u) - problem.sigma(0.0, x, v)) / np.abs(u - v)
    return float(df.max()), float(ds.max())


def sine_coefficients(u0, J: int, panels: int | None = None) -> np.ndarray:
    """``<u0, phi_j>`` for ``j = 1..J`` by the composite trapezoid rule.

    With ``u0(0) = u0(1) = 0`` the trapezoid sums are a type-I DST of the
    interior samples.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    P = 64 * J if panels is None else int(panels)
    if P < 64 * J:
        raise ValueError("need at least 64 panels per coefficient")
    x = np.arange(1, P) / P
    vals = np.asarray(u0(x), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError("u0 is not finite on the quadrature grid")
    # dst type 1: y_k = 2 sum_n v_n sin(pi (k+1)(n+1) / P)
    y = dst(vals, type=1)[:J]
    return y * (np.sqrt(2.0) / (2.0 * P))


def sobolev_norm(u0, beta: float, J: int, rtol: float = 1e-4) -> float:
    """Truncated ``H^beta`` norm ``(sum_j (1 + j^2)^beta <u0, phi_j>^2)^(1/2)``.

    The coefficients are recomputed on twice the panels; disagreement beyond
    ``rtol`` raises ``QuadratureError``.
    """
    j = np.arange(1, J + 1)
    weights = (1.0 + j.astype(float) ** 2) ** beta
    c1 = sine_coefficients(u0, J)
    c2 = sine_coefficients(u0, J, panels=128 * J)
    n1 = float(np.sqrt(np.sum(weights * c1**2)))
    n2 = float(np.sqrt(np.sum(weights * c2**2)))
    if not np.isfinite(n2):
        raise QuadratureError("H^beta sum overflowed")
    if abs(n1 - n2) > rtol * max(n2, 1e-300):
        raise QuadratureError(f"sine coefficients did not converge: {n1!r} vs {n2!r}")
    return n2
