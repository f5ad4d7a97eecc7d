"""Resolution maps beta(x): region masks and piecewise-constant level fields.

The reconstruction filter dilates the mollifier by ``alpha * beta(x)``; a
small beta means fine local resolution at the price of local instability.
Beta must stay within positive bounds (``0 < c <= beta <= C``), and the
scalable reconstruction path needs beta piecewise constant over L levels,
so general fields enter only through :func:`quantize_beta`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grids import Grid

__all__ = [
    "RegionMask",
    "BetaField",
    "disk_mask",
    "rectangle_mask",
    "bitmap_mask",
    "full_mask",
    "constant_beta",
    "two_region_beta",
    "quantize_beta",
]


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Boolean node membership over a grid plus a serializable shape descriptor.

    Disk and rectangle masks use center-of-node membership (a node belongs
    iff its center does), which keeps rasterization deterministic.
    """

    grid: Grid
    membership: np.ndarray
    descriptor: dict

    def __post_init__(self):
        mask = np.asarray(self.membership, dtype=bool)
        if mask.shape != self.grid.shape:
            raise ValueError(f"mask shape {mask.shape} does not match grid {self.grid.shape}")
        mask = mask.copy()
        mask.flags.writeable = False
        object.__setattr__(self, "membership", mask)

    @property
    def count(self) -> int:
        return int(self.membership.sum())

    @property
    def is_empty(self) -> bool:
        return self.count == 0

    @property
    def is_full(self) -> bool:
        return self.count == self.grid.n_nodes

    def complement(self) -> "RegionMask":
        return RegionMask(self.grid, ~self.membership, {"shape": "complement", "of": self.descriptor})


def disk_mask(grid: Grid, center, radius: float) -> RegionMask:
    """Nodes whose centers lie within ``radius`` of ``center`` (grid coordinates)."""
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    center = [float(c) for c in (np.atleast_1d(center))]
    if len(center) != grid.dims:
        raise ValueError(f"center needs {grid.dims} coordinates")
    coords = grid.coordinate_arrays()
    r2 = sum((x - c) ** 2 for x, c in zip(coords, center)) + np.zeros(grid.shape)
    return RegionMask(
        grid, r2 <= radius**2, {"shape": "disk", "center": center, "radius": float(radius)}
    )


def rectangle_mask(grid: Grid, corner, extents) -> RegionMask:
    """Axis-aligned half-open box ``corner <= x < corner + extent`` per axis."""
    corner = [float(c) for c in np.atleast_1d(corner)]
    extents = [float(e) for e in np.atleast_1d(extents)]
    if len(corner) != grid.dims or len(extents) != grid.dims:
        raise ValueError(f"corner and extents need {grid.dims} coordinates")
    if any(e <= 0 for e in extents):
        raise ValueError(f"extents must be positive, got {extents}")
    coords = grid.coordinate_arrays()
    inside = np.ones(grid.shape, dtype=bool)
    for x, c, e in zip(coords, corner, extents):
        inside &= (x >= c) & (x < c + e)
    return RegionMask(grid, inside, {"shape": "rect", "corner": corner, "extents": extents})


def bitmap_mask(grid: Grid, membership: np.ndarray) -> RegionMask:
    return RegionMask(grid, membership, {"shape": "bitmap"})


def full_mask(grid: Grid) -> RegionMask:
    return RegionMask(grid, np.ones(grid.shape, dtype=bool), {"shape": "full"})


@dataclass(frozen=True, eq=False)
class BetaField:
    """Piecewise-constant beta(x) over a labeled partition of the grid.

    ``levels`` pairs each region mask with its beta value; ``level_map``
    holds the per-node level index.  The masks partition the grid and every
    level value lies in the recorded bounds ``[c_bound, C_bound]``.
    """

    grid: Grid
    levels: tuple[tuple[RegionMask, float], ...]
    level_map: np.ndarray

    def __post_init__(self):
        if not self.levels:
            raise ValueError("need at least one level")
        values = [v for _, v in self.levels]
        if any((not np.isfinite(v)) or v <= 0 for v in values):
            raise ValueError(f"beta values must be positive and finite, got {values}")
        lm = np.asarray(self.level_map, dtype=np.intp)
        if lm.shape != self.grid.shape:
            raise ValueError("level_map shape does not match grid")
        counts = np.bincount(lm.ravel(), minlength=len(self.levels))
        if len(counts) > len(self.levels):
            raise ValueError("level_map references undefined levels")
        for idx, (mask, _) in enumerate(self.levels):
            if mask.grid is not self.grid and mask.grid != self.grid:
                raise ValueError("mask grid mismatch")
            if not np.array_equal(mask.membership, lm == idx):
                raise ValueError(f"level {idx} mask does not match the level map")
        if int(counts.sum()) != self.grid.n_nodes:
            raise ValueError("levels do not partition the grid")
        lm = lm.copy()
        lm.flags.writeable = False
        object.__setattr__(self, "level_map", lm)
        object.__setattr__(self, "levels", tuple((m, float(v)) for m, v in self.levels))

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def c_bound(self) -> float:
        """inf beta over the grid."""
        return min(v for _, v in self.levels)

    @property
    def C_bound(self) -> float:
        """sup beta over the grid."""
        return max(v for _, v in self.levels)

    def values(self) -> np.ndarray:
        """Per-node beta values."""
        table = np.array([v for _, v in self.levels])
        return table[self.level_map]

    def descriptor(self) -> dict:
        return {
            "levels": [
                {"beta": v, "region": m.descriptor, "count": m.count} for m, v in self.levels
            ]
        }


def _field_from_level_map(grid: Grid, level_map: np.ndarray, values) -> BetaField:
    levels = []
    for idx, v in enumerate(values):
        levels.append((bitmap_mask(grid, level_map == idx), float(v)))
    return BetaField(grid, tuple(levels), level_map)


def constant_beta(grid: Grid, value: float) -> BetaField:
    """Uniform resolution across the entire domain (single level)."""
    if value <= 0:
        raise ValueError(f"beta must be positive, got {value}")
    return BetaField(
        grid,
        ((full_mask(grid), float(value)),),
        np.zeros(grid.shape, dtype=np.intp),
    )


def two_region_beta(grid: Grid, roi: RegionMask, beta_in: float, beta_out: float) -> BetaField:
    """Two-level field: ``beta_in`` on the region of interest, ``beta_out`` outside."""
    if beta_in <= 0 or beta_out <= 0:
        raise ValueError("beta values must be positive")
    if roi.grid != grid:
        raise ValueError("roi grid does not match")
    if roi.is_empty or roi.is_full:
        raise ValueError("roi must be nonempty and not cover the whole grid; use constant_beta")
    level_map = np.where(roi.membership, 0, 1).astype(np.intp)
    levels = ((roi, float(beta_in)), (roi.complement(), float(beta_out)))
    return BetaField(grid, levels, level_map)


def quantize_beta(grid: Grid, continuous: np.ndarray, n_levels: int) -> tuple[BetaField, float]:
    """Round a per-node beta map to quantile-based levels.

    Levels sit at the ``(l + 0.5) / L`` quantiles of the input values and each
    node snaps to its nearest level; duplicate levels collapse.  Returns the
    field and the max pointwise relative quantization error.
    """
    vals = np.asarray(continuous, dtype=float)
    if vals.shape != grid.shape:
        raise ValueError(f"beta map shape {vals.shape} does not match grid {grid.shape}")
    if not np.all(np.isfinite(vals)):
        raise ValueError("beta map must be finite")
    if np.any(vals <= 0):
        raise ValueError("beta map must be positive")
    if n_levels < 1:
        raise ValueError("need at least one level")
    qs = (np.arange(n_levels) + 0.5) / n_levels
    table = np.unique(np.quantile(vals, qs))
    idx = np.abs(vals[..., None] - table).argmin(axis=-1)
    # collapse levels left unused by the nearest-value assignment
    used = np.unique(idx)
    table = table[used]
    idx = np.searchsorted(used, idx)
    field = _field_from_level_map(grid, idx.astype(np.intp), table)
    max_rel_err = float(np.max(np.abs(field.values() - vals) / vals))
    return field, max_rel_err
