"""Uniform periodic grids and sampled fields in real and Fourier space.

The continuum problem lives on R^n; numerically we work on a periodic torus
of extent ``N * dx`` per axis.  Frequencies follow the unitary convention
``u_hat(xi) = integral exp(-2*pi*i*x*xi) u(x) dx`` with xi in cycles per
unit length, so the conjugate lattice is ``xi_k = k / (N * dx)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np

__all__ = ["Grid", "SpectralGrid", "SampledField", "SpectralField"]


def _per_axis(value, dims: int, name: str) -> tuple[float, ...]:
    if np.isscalar(value):
        return (float(value),) * dims
    vals = tuple(float(v) for v in value)
    if len(vals) != dims:
        raise ValueError(f"{name} needs {dims} entries, got {len(vals)}")
    return vals


@dataclass(frozen=True)
class Grid:
    """Uniformly sampled periodic domain in one or two dimensions.

    Attributes
    ----------
    shape : tuple of int
        Samples per axis, each >= 2.
    spacing : tuple of float
        Sample spacing per axis, each > 0.  Axis extent is ``N * dx``.
    origin : tuple of float
        Coordinate of the first sample per axis.

    Index arithmetic wraps modulo the sample count: the domain is periodic.
    """

    shape: tuple[int, ...]
    spacing: tuple[float, ...]
    origin: tuple[float, ...] = ()

    def __post_init__(self):
        shape = tuple(int(n) for n in np.atleast_1d(np.asarray(self.shape, dtype=object)))
        dims = len(shape)
        if dims not in (1, 2):
            raise ValueError(f"only 1D and 2D grids are supported, got dims={dims}")
        if any(n < 2 for n in shape):
            raise ValueError(f"need at least 2 samples per axis, got {shape}")
        spacing = _per_axis(self.spacing, dims, "spacing")
        if any(d <= 0 for d in spacing):
            raise ValueError(f"spacing must be positive, got {spacing}")
        origin = _per_axis(self.origin if self.origin != () else 0.0, dims, "origin")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "origin", origin)

    @property
    def dims(self) -> int:
        return len(self.shape)

    @property
    def n_nodes(self) -> int:
        return prod(self.shape)

    @property
    def extent(self) -> tuple[float, ...]:
        return tuple(n * d for n, d in zip(self.shape, self.spacing))

    @property
    def cell_volume(self) -> float:
        """Riemann weight dx^n of one grid cell."""
        return prod(self.spacing)

    def axis_coordinates(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        return self.origin[axis] + self.spacing[axis] * np.arange(n)

    def coordinate_arrays(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays (``indexing='ij'``, sparse)."""
        axes = [self.axis_coordinates(i) for i in range(self.dims)]
        return tuple(np.meshgrid(*axes, indexing="ij", sparse=True))

    def spectral(self) -> "SpectralGrid":
        return SpectralGrid(self)


@dataclass(frozen=True)
class SpectralGrid:
    """Centered conjugate frequency lattice of a :class:`Grid`.

    Per axis the frequencies are ``xi_k = k / (N * dx)`` for
    ``k in {-floor(N/2), ..., ceil(N/2) - 1}``, so ``dxi * dx * N = 1``
    exactly and the lattice always brackets zero.
    """

    grid: Grid

    @property
    def shape(self) -> tuple[int, ...]:
        return self.grid.shape

    @property
    def dims(self) -> int:
        return self.grid.dims

    @property
    def spacing(self) -> tuple[float, ...]:
        """Frequency spacing dxi per axis."""
        return tuple(1.0 / (n * d) for n, d in zip(self.grid.shape, self.grid.spacing))

    @property
    def cell_volume(self) -> float:
        """Riemann weight dxi^n of one frequency cell."""
        return prod(self.spacing)

    def axis_frequencies(self, axis: int) -> np.ndarray:
        n = self.shape[axis]
        k = np.arange(n) - n // 2
        return k * self.spacing[axis]

    def frequency_arrays(self) -> tuple[np.ndarray, ...]:
        """Broadcastable centered frequency arrays (``indexing='ij'``, sparse)."""
        axes = [self.axis_frequencies(i) for i in range(self.dims)]
        return tuple(np.meshgrid(*axes, indexing="ij", sparse=True))


def _frozen_complex(values, shape, what: str) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, order="C")
    if arr.shape != shape:
        raise ValueError(f"{what} values shape {arr.shape} does not match grid shape {shape}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class SampledField:
    """Complex samples attached to a :class:`Grid` (real data has zero imag).

    Values are copied and frozen at construction; fields are safe to share
    across threads.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen_complex(self.values, self.grid.shape, "field"))

    @property
    def is_real(self) -> bool:
        return not np.any(self.values.imag)

    def real(self) -> np.ndarray:
        return self.values.real


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex samples attached to a :class:`SpectralGrid`."""

    sgrid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", _frozen_complex(self.values, self.sgrid.shape, "spectral field")
        )
