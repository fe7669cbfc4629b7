"""Blue/red light intensities over the grid.

Every unoccupied target cell emits blue light, every agent parked outside
the shape emits red light, and intensity decays with grid distance under
one of nine discount variants (three decay forms x three metrics). Field
values are sums over sources; sources are always iterated in row-major
order and reduced with numpy's deterministic summation over that axis, so
single-worker runs are reproducible and the additivity tests can compare
bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .core import GridDims, GridPos, TargetShape, neighbors8

#: metric used by each discount type: 1,4,7 Manhattan; 2,5,8 Euclidean; 3,6,9 Chebyshev.
_TYPE_METRIC = {1: "manhattan", 2: "euclidean", 3: "chebyshev",
                4: "manhattan", 5: "euclidean", 6: "chebyshev",
                7: "manhattan", 8: "euclidean", 9: "chebyshev"}


@dataclass(frozen=True)
class LightParams:
    """Source intensity L, decay coefficient beta, and discount variant."""

    L: float = 1000.0
    beta: float = 1.0
    f_type: int = 6

    def __post_init__(self):
        if self.L <= 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.f_type not in range(1, 10):
            raise ValueError(f"f_type must be in 1..9, got {self.f_type}")

    @property
    def metric(self) -> str:
        return _TYPE_METRIC[self.f_type]


def discount(params: LightParams, g: GridPos, g2: GridPos) -> float:
    """Intensity received at ``g`` from a source at ``g2``.

    Linear forms (types 1-3) may go negative and are returned unclamped;
    only the ordering of intensities matters to the policies.
    """
    dr = abs(g[0] - g2[0])
    dc = abs(g[1] - g2[1])
    t = params.f_type
    if t in (1, 4, 7):
        d = float(dr + dc)
    elif t in (2, 5, 8):
        d = float(dr * dr + dc * dc) ** 0.5
    else:
        d = float(max(dr, dc))
    if t <= 3:
        return params.L - params.beta * d
    if t <= 6:
        return params.L / (1.0 + params.beta * d)
    # squared-inverse; type 8 squares the Euclidean distance exactly (dr^2 + dc^2)
    if t == 8:
        d2 = float(dr * dr + dc * dc)
    else:
        d2 = d * d
    return params.L / (1.0 + params.beta * d2)


def source_array(cells: Iterable[GridPos]) -> np.ndarray:
    """Sources as an (k, 2) float array in row-major cell order."""
    ordered = sorted(cells)
    if not ordered:
        return np.empty((0, 2), dtype=np.float64)
    return np.asarray(ordered, dtype=np.float64)


def intensity_at(cand_arr: np.ndarray, src_arr: np.ndarray, params: LightParams) -> np.ndarray:
    """Summed intensities at each candidate cell from all sources.

    ``cand_arr`` is (m, 2), ``src_arr`` (k, 2) in row-major source order.
    Returns shape (m,). The reduction runs over the contiguous source axis
    of the (m, k) contribution matrix, which fixes the summation order.
    """
    m = cand_arr.shape[0]
    if src_arr.shape[0] == 0:
        return np.zeros(m, dtype=np.float64)
    dr = np.abs(cand_arr[:, 0:1] - src_arr[None, :, 0])
    dc = np.abs(cand_arr[:, 1:2] - src_arr[None, :, 1])
    t = params.f_type
    if t in (1, 4, 7):
        d = dr + dc
    elif t in (2, 5, 8):
        d = np.sqrt(dr * dr + dc * dc)
    else:
        d = np.maximum(dr, dc)
    if t <= 3:
        contrib = params.L - params.beta * d
    elif t <= 6:
        contrib = params.L / (1.0 + params.beta * d)
    elif t == 8:
        contrib = params.L / (1.0 + params.beta * (dr * dr + dc * dc))
    else:
        contrib = params.L / (1.0 + params.beta * d * d)
    return np.ascontiguousarray(contrib).sum(axis=1)


@dataclass(frozen=True)
class LocalField:
    """Blue (and, for in-shape agents, red) intensities at an agent's candidate cells."""

    entries: dict[GridPos, tuple[float, Optional[float]]]

    def blue(self, pos: GridPos) -> float:
        return self.entries[pos][0]

    def red(self, pos: GridPos) -> float:
        r = self.entries[pos][1]
        if r is None:
            raise KeyError(f"red intensity was not computed at {pos}")
        return r

    def cells(self) -> list[GridPos]:
        return list(self.entries)


def candidate_cells(pos: GridPos, dims: GridDims) -> list[GridPos]:
    """The agent's own cell followed by its in-bounds neighbors in scan order."""
    return [pos] + neighbors8(pos, dims)


def local_field(pos: GridPos, shape: TargetShape, occupied: frozenset[GridPos],
                params: LightParams) -> LocalField:
    """Field restricted to an agent's candidate cells.

    Blue sources are the unoccupied target cells; red sources (computed
    only when the agent itself stands on a target cell) are the occupied
    non-target cells.
    """
    cands = candidate_cells(pos, shape.dims)
    cand_arr = np.asarray(cands, dtype=np.float64)
    blue_src = source_array(shape.cells - occupied)
    blue = intensity_at(cand_arr, blue_src, params)
    if pos in shape.cells:
        red_src = source_array(occupied - shape.cells)
        red = intensity_at(cand_arr, red_src, params)
        entries = {c: (float(b), float(r)) for c, b, r in zip(cands, blue, red)}
    else:
        entries = {c: (float(b), None) for c, b in zip(cands, blue)}
    return LocalField(entries=entries)


def full_field(shape: TargetShape, occupied: frozenset[GridPos],
               params: LightParams) -> dict[GridPos, tuple[float, float]]:
    """Blue and red intensities at every grid cell.

    Used for frame dumps and as the oracle that local_field restricts.
    """
    blue, red = full_field_grids(shape, occupied, params)
    h, w = shape.dims
    return {(r, c): (float(blue[r - 1, c - 1]), float(red[r - 1, c - 1]))
            for r in range(1, h + 1) for c in range(1, w + 1)}


def full_field_grids(shape: TargetShape, occupied: frozenset[GridPos],
                     params: LightParams) -> tuple[np.ndarray, np.ndarray]:
    """Whole-grid blue and red intensities as (H, W) matrices."""
    h, w = shape.dims
    cells = np.asarray(shape.dims.all_cells(), dtype=np.float64)
    blue = intensity_at(cells, source_array(shape.cells - occupied), params)
    red = intensity_at(cells, source_array(occupied - shape.cells), params)
    return blue.reshape(h, w), red.reshape(h, w)
