"""Grid geometry, target shapes, and system state.

Coordinates are 1-based ``(row, col)`` tuples: row 1 is the top of the
grid, row ``height`` the bottom. Every other module builds on the types
and partitions defined here.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

GridPos = tuple[int, int]

#: Moore-neighborhood offsets in row-major scan order: NW, N, NE, W, E, SW, S, SE.
NEIGHBOR_OFFSETS: tuple[tuple[int, int], ...] = (
    (-1, -1), (-1, 0), (-1, 1),
    (0, -1), (0, 1),
    (1, -1), (1, 0), (1, 1),
)

METRICS = ("manhattan", "euclidean", "chebyshev")


class GridDims(NamedTuple):
    height: int
    width: int

    def validate(self) -> "GridDims":
        if self.height < 1 or self.width < 1:
            raise ValueError(f"grid dims must be >= 1x1, got {self.height}x{self.width}")
        return self

    def contains(self, pos: GridPos) -> bool:
        r, c = pos
        return 1 <= r <= self.height and 1 <= c <= self.width

    @property
    def n_cells(self) -> int:
        return self.height * self.width

    def all_cells(self) -> list[GridPos]:
        """All grid cells in row-major order."""
        return [(r, c) for r in range(1, self.height + 1) for c in range(1, self.width + 1)]


def neighbors8(pos: GridPos, dims: GridDims) -> list[GridPos]:
    """In-bounds Moore neighbors of ``pos`` in row-major scan order."""
    r, c = pos
    if not dims.contains(pos):
        raise ValueError(f"position {pos} out of bounds for {dims.height}x{dims.width}")
    out = []
    for dr, dc in NEIGHBOR_OFFSETS:
        n = (r + dr, c + dc)
        if dims.contains(n):
            out.append(n)
    return out


def distance(metric: str, a: GridPos, b: GridPos) -> float:
    """Grid distance between two cells under the named metric."""
    dr = abs(a[0] - b[0])
    dc = abs(a[1] - b[1])
    if metric == "manhattan":
        return float(dr + dc)
    if metric == "euclidean":
        return math.sqrt(dr * dr + dc * dc)
    if metric == "chebyshev":
        return float(max(dr, dc))
    raise ValueError(f"unknown metric {metric!r}, expected one of {METRICS}")


def chebyshev(a: GridPos, b: GridPos) -> int:
    """Chebyshev distance; equals the minimum number of 8-connected moves."""
    return max(abs(a[0] - b[0]), abs(a[1] - b[1]))


def _connected_component(cells: frozenset[GridPos], start: GridPos) -> set[GridPos]:
    seen = {start}
    queue = deque([start])
    while queue:
        r, c = queue.popleft()
        for dr, dc in NEIGHBOR_OFFSETS:
            n = (r + dr, c + dc)
            if n in cells and n not in seen:
                seen.add(n)
                queue.append(n)
    return seen


@dataclass(frozen=True)
class TargetShape:
    """A non-empty, 8-connected set of target cells inside a grid."""

    cells: frozenset[GridPos]
    dims: GridDims

    def __post_init__(self):
        object.__setattr__(self, "cells", frozenset(self.cells))
        self.dims.validate()
        if not self.cells:
            raise ValueError("target shape is empty")
        for pos in self.cells:
            if not self.dims.contains(pos):
                raise ValueError(f"shape cell {pos} out of bounds for {self.dims}")
        component = _connected_component(self.cells, next(iter(self.cells)))
        if len(component) != len(self.cells):
            raise ValueError(
                f"shape is not 8-connected: component of size {len(component)} "
                f"out of {len(self.cells)} cells"
            )

    @property
    def size(self) -> int:
        return len(self.cells)

    def sorted_cells(self) -> list[GridPos]:
        """Shape cells in row-major order (the fixed source enumeration order)."""
        return sorted(self.cells)


@dataclass
class SystemState:
    """Injective placement of agents on grid cells at a discrete time.

    Treated as immutable by convention; the engine copies before mutating.
    """

    positions: dict[int, GridPos]
    time: int = 0

    def __post_init__(self):
        if len(set(self.positions.values())) != len(self.positions):
            raise ValueError("agent positions are not injective")

    def validate(self, dims: GridDims) -> None:
        if len(set(self.positions.values())) != len(self.positions):
            raise ValueError("agent positions are not injective")
        for agent, pos in self.positions.items():
            if not dims.contains(pos):
                raise ValueError(f"agent {agent} at {pos} is out of bounds for {dims}")

    def occupied(self) -> frozenset[GridPos]:
        return frozenset(self.positions.values())


@dataclass(frozen=True)
class Partition:
    """Agents split by membership in the shape, and shape cells by occupancy."""

    inside: frozenset[int]
    outside: frozenset[int]
    occupied_targets: frozenset[GridPos]
    unoccupied_targets: frozenset[GridPos]


def partition(state: SystemState, shape: TargetShape) -> Partition:
    inside = frozenset(a for a, p in state.positions.items() if p in shape.cells)
    outside = frozenset(state.positions) - inside
    occupied_targets = frozenset(state.positions[a] for a in inside)
    return Partition(
        inside=inside,
        outside=outside,
        occupied_targets=occupied_targets,
        unoccupied_targets=shape.cells - occupied_targets,
    )


def is_target_state(state: SystemState, shape: TargetShape) -> bool:
    """True iff every target cell is occupied (agent identity irrelevant)."""
    return state.occupied() >= shape.cells


def completion_quality(occupied: Iterable[GridPos], shape: TargetShape) -> float:
    """Fraction of target cells occupied."""
    return len(shape.cells & frozenset(occupied)) / shape.size


def make_state(positions: Mapping[int, GridPos], time: int = 0) -> SystemState:
    return SystemState(positions=dict(positions), time=time)
