"""Reproducible Brownian-sheet increments with exact coarsening.

Every finest-level increment is a pure function of
``(seed, sample_index, n, m)``: a Philox-4x64 block keyed on
``(seed, sample_index)`` whose counter is addressed by the step index ``n``.
Uniforms are mapped to Gaussians by the inverse normal CDF.

Increments are stored as integer ``ticks`` of size
``sqrt(dt_ref) * 2**-TICK_BITS``. Coarsening sums ticks in int64, so any
grouping of the sums gives bit-identical coarse increments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.special import ndtri

TICK_BITS = 30
_WORDS_PER_COUNTER = 4
_CHUNK_STEPS = 256


@dataclass(frozen=True)
class NoisePlan:
    seed: int
    M: int
    N_ref: int
    T: float
    sample_index: int = 0

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0 <= self.sample_index < 2**64:
            raise ValueError("sample_index must be a 64-bit unsigned integer")
        if self.M < 2 or self.N_ref < 1 or not self.T > 0:
            raise ValueError(f"invalid plan dimensions M={self.M}, N_ref={self.N_ref}, T={self.T}")

    @property
    def dt_ref(self) -> float:
        return self.T / self.N_ref

    @property
    def tick(self) -> float:
        return math.sqrt(self.dt_ref) * 2.0**-TICK_BITS

    def with_sample(self, sample_index: int) -> "NoisePlan":
        return NoisePlan(self.seed, self.M, self.N_ref, self.T, sample_index)


@dataclass(frozen=True, eq=False)
class IncrementBlock:
    """Increments ``Delta W^n_m`` over ``r`` fine steps (coarse step ``n``).

    ``n`` is the step index at the block's own level. ``ticks`` may carry a
    leading sample axis.
    """

    n: int
    ticks: np.ndarray
    tick: float
    r: int = 1

    @property
    def dW(self) -> np.ndarray:
        return self.ticks * self.tick


def _counters_per_step(M: int) -> int:
    return -(-(M - 1) // _WORDS_PER_COUNTER)


def _gaussian_ticks(plan: NoisePlan, n_start: int, n_steps: int) -> np.ndarray:
    """Tick arrays of shape ``(n_steps, M - 1)`` for fine steps ``n_start...``."""
    cps = _counters_per_step(plan.M)
    key = np.array([plan.seed, plan.sample_index], dtype=np.uint64)  # a plain list loses seeds >= 2**63
    bg = np.random.Philox(key=key, counter=np.array([n_start * cps, 0, 0, 0], dtype=np.uint64))
    raw = bg.random_raw(n_steps * cps * _WORDS_PER_COUNTER)
    raw = raw.reshape(n_steps, cps * _WORDS_PER_COUNTER)[:, : plan.M - 1]
    # 53-bit uniforms strictly inside (0, 1)
    u = ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return np.rint(ndtri(u) * 2.0**TICK_BITS).astype(np.int64)


def sample_block(plan: NoisePlan, n: int) -> IncrementBlock:
    """Finest-level increments for step ``n``; variance ``dt_ref`` per entry."""
    if not 0 <= n < plan.N_ref:
        raise IndexError(f"step {n} outside [0, {plan.N_ref})")
    return IncrementBlock(n=n, ticks=_gaussian_ticks(plan, n, 1)[0], tick=plan.tick)


def coarsen(blocks: Sequence[IncrementBlock]) -> IncrementBlock:
    """Sum ``r`` consecutive blocks of one level into one block of the next."""
    if not blocks:
        raise ValueError("coarsen needs at least one block")
    r_in = blocks[0].r
    first = blocks[0].n
    for k, b in enumerate(blocks):
        if b.r != r_in or b.n != first + k:
            raise ValueError("blocks must be consecutive at a single level")
        if b.tick != blocks[0].tick:
            raise ValueError("blocks come from different plans")
    r = len(blocks)
    if first % r:
        raise ValueError(f"block {first} is not aligned to a coarsening factor of {r}")
    total = blocks[0].ticks.copy()
    for b in blocks[1:]:
        total += b.ticks
    return IncrementBlock(n=first // r, ticks=total, tick=blocks[0].tick, r=r_in * r)


def coarse_ticks(plans: Sequence[NoisePlan], N_coarse: int, start: int = 0,
                 stop: int | None = None) -> np.ndarray:
    """Coarse ticks for coarse steps ``start..stop`` of every plan.

    Returns an int64 array of shape ``(stop - start, len(plans), M - 1)``.
    """
    plan0 = plans[0]
    if plan0.N_ref % N_coarse:
        raise ValueError(f"N_coarse={N_coarse} does not divide N_ref={plan0.N_ref}")
    stop = N_coarse if stop is None else stop
    r = plan0.N_ref // N_coarse
    out = np.empty((stop - start, len(plans), plan0.M - 1), dtype=np.int64)
    for s, plan in enumerate(plans):
        if (plan.seed, plan.M, plan.N_ref, plan.T) != (plan0.seed, plan0.M, plan0.N_ref, plan0.T):
            raise ValueError("batched plans must differ only in sample_index")
        fine = _gaussian_ticks(plan, start * r, (stop - start) * r)
        out[:, s, :] = fine.reshape(stop - start, r, plan0.M - 1).sum(axis=1)
    return out


def coupled_stream(plan: NoisePlan, N_coarse: int) -> Iterator[IncrementBlock]:
    """Coarse blocks for a single sample, regenerated chunk by chunk."""
    for block in coupled_batch_stream([plan], N_coarse):
        yield IncrementBlock(n=block.n, ticks=block.ticks[0], tick=block.tick, r=block.r)


def coupled_batch_stream(plans: Sequence[NoisePlan], N_coarse: int,
                         chunk_steps: int = _CHUNK_STEPS) -> Iterator[IncrementBlock]:
    """Coarse blocks with a leading sample axis, one per coarse step.

    Memory stays at ``O(chunk * r * S * M)`` fine ticks per chunk.
    """
    if not plans:
        raise ValueError("need at least one plan")
    plan0 = plans[0]
    if N_coarse < 1 or plan0.N_ref % N_coarse:
        raise ValueError(f"N_coarse={N_coarse} does not divide N_ref={plan0.N_ref}")
    r = plan0.N_ref // N_coarse
    per_chunk = max(1, chunk_steps // r) if r < chunk_steps else 1
    for start in range(0, N_coarse, per_chunk):
        stop = min(N_coarse, start + per_chunk)
        ticks = coarse_ticks(plans, N_coarse, start, stop)
        for k in range(stop - start):
            yield IncrementBlock(n=start + k, ticks=ticks[k], tick=plan0.tick, r=r)
