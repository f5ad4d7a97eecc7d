"""Discrete Fourier transforms scaled to approximate the continuum transforms.

``forward_transform`` realizes ``u_hat(xi) = integral exp(-2*pi*i*x*xi) u(x) dx``
as ``dx^n`` times a centered DFT; ``inverse_transform`` is the Riemann sum of
the inverse integral with weight ``dxi^n`` and inverts the forward map to
machine precision.  Both are pure functions of their inputs.
"""

from __future__ import annotations

import numpy as np

from .grids import Grid, SampledField, SpectralField, SpectralGrid

__all__ = ["forward_transform", "inverse_transform"]


def _origin_phase(sgrid: SpectralGrid, sign: float) -> np.ndarray | None:
    """exp(sign * 2*pi*i * origin . xi) on the centered lattice, or None if origin is 0."""
    origin = sgrid.grid.origin
    if all(o == 0.0 for o in origin):
        return None
    dot = sum(o * xi for o, xi in zip(origin, sgrid.frequency_arrays()))
    return np.exp(sign * 2j * np.pi * dot)


def forward_transform(u: SampledField) -> SpectralField:
    """Approximate the continuum Fourier transform of a sampled field.

    Returns ``dx^n * DFT(u)`` on the centered frequency lattice, including
    the phase contributed by a nonzero grid origin.
    """
    grid = u.grid
    spec = np.fft.fftshift(np.fft.fftn(u.values))
    spec *= grid.cell_volume
    sgrid = grid.spectral()
    phase = _origin_phase(sgrid, -1.0)
    if phase is not None:
        spec *= phase
    return SpectralField(sgrid, spec)


def inverse_transform(U: SpectralField) -> SampledField:
    """Riemann sum of the inverse Fourier integral; exact inverse of forward_transform."""
    sgrid = U.sgrid
    grid: Grid = sgrid.grid
    vals = U.values
    phase = _origin_phase(sgrid, +1.0)
    if phase is not None:
        vals = vals * phase
    u = np.fft.ifftn(np.fft.ifftshift(vals)) / grid.cell_volume
    return SampledField(grid, u)
