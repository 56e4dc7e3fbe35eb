"""Dimension-agnostic image container and grid-graph neighborhoods.

A Grid wraps a dense float64 array in planar (channel-first) layout:
``data.shape == (channels, *spatial)`` with spatial rank 2 (y, x) or
3 (z, y, x), row-major. All operations treat the spatial axes as an
undirected grid graph under one of two connectivities:

* ``"faces"`` -- 4-neighborhood in 2D, 6 in 3D (the default everywhere)
* ``"full"``  -- 8-neighborhood in 2D, 26 in 3D
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ValidationError

Coord = tuple[int, ...]

CONNECTIVITIES = ("faces", "full")


@dataclass(frozen=True)
class Grid:
    """Immutable multi-channel 2D image or 3D volume.

    ``data`` must be ``(channels, *spatial)`` float-convertible with finite
    values; it is copied to a read-only C-contiguous float64 array.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.data, dtype=np.float64)
        if arr.ndim not in (3, 4):
            raise ValidationError(
                f"grid data must be (channels, *spatial) with spatial rank 2 or 3, "
                f"got ndim={arr.ndim}"
            )
        if any(n <= 0 for n in arr.shape):
            raise ValidationError(f"grid extents must be positive, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValidationError("grid values must be finite (no NaN/Inf)")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    @classmethod
    def from_array(cls, arr) -> "Grid":
        """Wrap a single-channel scalar field: 2D (y, x) or 3D (z, y, x)."""
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim not in (2, 3):
            raise ValidationError(
                f"from_array expects a 2D or 3D scalar field, got ndim={arr.ndim}"
            )
        return cls(arr[None])

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        """Spatial extents, channel axis excluded."""
        return self.data.shape[1:]

    @property
    def rank(self) -> int:
        return self.data.ndim - 1

    @property
    def n_pixels(self) -> int:
        return int(np.prod(self.shape))


def neighbor_offsets(rank: int, connectivity: str = "faces") -> np.ndarray:
    """Offset vectors of the neighborhood, lexicographically ordered.

    Returns an ``(n_offsets, rank)`` int64 array; the zero offset is excluded.
    """
    if connectivity not in CONNECTIVITIES:
        raise ValidationError(
            f"unknown connectivity {connectivity!r}, expected one of {CONNECTIVITIES}"
        )
    if connectivity == "faces":
        offs = []
        for axis in range(rank):
            for step in (-1, 1):
                o = [0] * rank
                o[axis] = step
                offs.append(tuple(o))
    else:
        offs = [o for o in product((-1, 0, 1), repeat=rank) if any(o)]
    return np.array(sorted(offs), dtype=np.int64)


def neighbors(c: Coord, g: Grid, connectivity: str = "faces") -> list[Coord]:
    """In-bounds grid neighbors of ``c``, in fixed lexicographic offset order."""
    shape = g.shape
    out = []
    for off in neighbor_offsets(len(shape), connectivity):
        q = tuple(int(ci + oi) for ci, oi in zip(c, off))
        if all(0 <= qi < si for qi, si in zip(q, shape)):
            out.append(q)
    return out


def normalize_intensity(g: Grid) -> Grid:
    """Min-max rescale to [0, 1], jointly over all channels.

    A constant image maps to all zeros so downstream geodesic distances
    stay well defined.
    """
    lo = g.data.min()
    hi = g.data.max()
    if hi == lo:
        return Grid(np.zeros_like(g.data))
    return Grid((g.data - lo) / (hi - lo))
