"""Per-agent movement policy.

Each iteration an agent ranks its candidate cells (its own plus in-bounds
neighbors) by local light intensities, then walks the ranked queue asking
the coordinator for a non-blocking lock on each cell until one is granted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

import numpy as np

from .core import GridPos, TargetShape, neighbors8
from .lightfield import LightParams, intensity_at, source_array

LEAVE_MODES = ("pseudocode", "prose")


@dataclass(frozen=True)
class PolicyParams:
    """Threshold for the in-shape policy switch, exploration rate, and light settings.

    leave_mode resolves an ambiguity in how in-shape agents treat
    out-of-shape neighbor cells: under "pseudocode" (default) an agent that
    has entered the shape only ever considers in-shape cells again; under
    "prose" it may also queue out-of-shape neighbors.
    """

    w_threshold: float = 0.15
    gamma: float = 0.2
    leave_mode: str = "pseudocode"
    light: LightParams = field(default_factory=LightParams)

    def __post_init__(self):
        if not 0.0 <= self.w_threshold <= 1.0:
            raise ValueError(f"w_threshold must be in [0, 1], got {self.w_threshold}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.leave_mode not in LEAVE_MODES:
            raise ValueError(f"leave_mode must be one of {LEAVE_MODES}, got {self.leave_mode!r}")


@dataclass(frozen=True)
class StepContext:
    """Snapshot-derived quantities shared by every agent within one iteration."""

    shape: TargetShape
    occupied: frozenset[GridPos]
    blue_sources: np.ndarray  # (k, 2) row-major
    red_sources: np.ndarray   # (k, 2) row-major
    outside_ratio: float      # |occupied \ shape| / |shape|

    @classmethod
    def from_snapshot(cls, shape: TargetShape, occupied: frozenset[GridPos]) -> "StepContext":
        outside = occupied - shape.cells
        return cls(
            shape=shape,
            occupied=occupied,
            blue_sources=source_array(shape.cells - occupied),
            red_sources=source_array(outside),
            outside_ratio=len(outside) / shape.size,
        )


def _row_major_rank(cell: GridPos, center: GridPos) -> int:
    # index of the cell within the 3x3 block around the agent, scanned row-major
    return (cell[0] - center[0] + 1) * 3 + (cell[1] - center[1] + 1)


def build_queue_from_context(pos: GridPos, ctx: StepContext, params: PolicyParams) -> list[GridPos]:
    shape = ctx.shape
    in_shape = pos in shape.cells

    cands = [pos]
    for n in neighbors8(pos, shape.dims):
        if not in_shape:
            cands.append(n)
        elif n in shape.cells or params.leave_mode == "prose":
            cands.append(n)

    cand_arr = np.asarray(cands, dtype=np.float64)
    blue = intensity_at(cand_arr, ctx.blue_sources, params.light)
    if in_shape:
        red = intensity_at(cand_arr, ctx.red_sources, params.light)

    if not in_shape:
        def key(i):
            return (-blue[i],)
    elif ctx.outside_ratio > params.w_threshold:
        def key(i):
            return (-blue[i], red[i])
    else:
        def key(i):
            return (red[i],)

    # ties: prefer movement over staying put, then the fixed scan order
    order = sorted(
        range(len(cands)),
        key=lambda i: key(i) + (cands[i] == pos, _row_major_rank(cands[i], pos)),
    )
    return [cands[i] for i in order]


def build_queue(pos: GridPos, shape: TargetShape, occupied: frozenset[GridPos],
                params: PolicyParams) -> list[GridPos]:
    """Priority queue of next positions for the agent at ``pos``.

    Out-of-shape agents rank all candidates by blue intensity, descending.
    In-shape agents rank by (blue desc, red asc) while the fraction of
    agents still outside exceeds w_threshold, and by red ascending once it
    drops to or below the threshold. The queue always contains the current
    position and never contains duplicates or out-of-bounds cells.
    """
    if pos not in occupied:
        raise ValueError(f"agent position {pos} is not among the occupied cells")
    return build_queue_from_context(pos, StepContext.from_snapshot(shape, occupied), params)


class LockHandle(Protocol):
    """Agent-bound view of the lock service."""

    def try_lock(self, pos: GridPos) -> bool: ...


def decide(queue: list[GridPos], current: GridPos, gamma: float,
           locks: LockHandle, rng: np.random.Generator) -> tuple[GridPos, bool]:
    """Walk the queue head-first and return the first lockable position.

    Reaching the current position ends the walk with probability 1 - gamma
    (the agent keeps its own lock and stays); with probability gamma the
    agent skips it and keeps probing worse candidates. An exhausted queue
    means staying put. Never releases the lock on ``current``.
    """
    for cand in queue:
        if cand == current:
            if rng.random() < gamma:
                continue
            return current, False
        if locks.try_lock(cand):
            return cand, True
    return current, False
