"""Box domains with a staggered (MAC) layout.

Scalars live at cell centers, velocity component ``a`` lives on the faces
normal to axis ``a``. Face arrays include the boundary faces, so along its own
axis a velocity component has ``cells[a] + 1`` entries; the two outermost
entries carry the no-slip normal value and are always zero.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
import operator

import numpy as np


@dataclass(frozen=True)
class Grid:
    dim: int
    cells: tuple[int, ...]
    lengths: tuple[float, ...]
    spacing: tuple[float, ...] = field(init=False)
    volume_element: float = field(init=False)

    def __post_init__(self):
        spacing = tuple(L / N for L, N in zip(self.lengths, self.cells))
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "volume_element", reduce(operator.mul, spacing, 1.0))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def n_cells(self) -> int:
        return reduce(operator.mul, self.cells, 1)

    @property
    def volume(self) -> float:
        return reduce(operator.mul, self.lengths, 1.0)

    def face_shape(self, axis: int) -> tuple[int, ...]:
        shape = list(self.cells)
        shape[axis] += 1
        return tuple(shape)

    def centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def nodes(self, axis: int) -> np.ndarray:
        return np.arange(self.cells[axis] + 1) * self.spacing[axis]

    def cell_coords(self) -> tuple[np.ndarray, ...]:
        """Cell-center coordinates, one broadcastable array per axis."""
        return tuple(np.meshgrid(*[self.centers(a) for a in range(self.dim)], indexing="ij"))

    def face_coords(self, axis: int) -> tuple[np.ndarray, ...]:
        """Coordinates of the faces normal to ``axis``."""
        axes = [self.nodes(b) if b == axis else self.centers(b) for b in range(self.dim)]
        return tuple(np.meshgrid(*axes, indexing="ij"))

    def to_dict(self) -> dict:
        return {"dim": self.dim, "cells": list(self.cells), "lengths": list(self.lengths)}

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return make_grid(d["dim"], d["cells"], d["lengths"])


def make_grid(dim, cells, lengths) -> Grid:
    """Build a validated :class:`Grid`.

    Raises ``ValueError`` for a dimension other than 2 or 3, fewer than four
    cells along any axis, or a nonpositive extent.
    """
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    cells = tuple(int(c) for c in cells)
    lengths = tuple(float(L) for L in lengths)
    if len(cells) != dim or len(lengths) != dim:
        raise ValueError(f"expected {dim} cell counts and lengths, got {len(cells)} and {len(lengths)}")
    if any(c < 4 for c in cells):
        raise ValueError(f"every axis needs at least 4 cells, got {list(cells)}")
    if any(not np.isfinite(L) or L <= 0 for L in lengths):
        raise ValueError(f"lengths must be positive, got {list(lengths)}")
    return Grid(dim, cells, lengths)
