"""Ground-truth generators and noise models for the experiment pipelines.

Everything here is deterministic given its parameters and seed.
"""

from __future__ import annotations

import numpy as np

from .grids import Grid, SampledField

__all__ = [
    "pulses_phantom_1d",
    "shepp_logan",
    "SHEPP_LOGAN_ELLIPSES",
    "DEFAULT_BLOBS",
    "phantom_to_pixel",
    "add_noise",
    "spectral_noise",
]

PULSE_WIDTH = 1.0 / 64.0
PULSE_GAP = 1.0 / 32.0


def pulses_phantom_1d(grid: Grid, count: int = 11) -> SampledField:
    """Centered train of unit-height pulses, width 1/64 and gaps 1/32 edge-to-edge.

    The default count of 11 fills just under half of a unit domain.  Values
    are exactly 0 or 1; pulses own the half-open interval
    ``[start, start + width)`` so the sample count per pulse is exact on
    commensurate grids.
    """
    if grid.dims != 1:
        raise ValueError("pulse phantom is one-dimensional")
    if count < 1:
        raise ValueError("need at least one pulse")
    dx = grid.spacing[0]
    if PULSE_WIDTH / dx < 4:
        raise ValueError(
            f"grid too coarse: {PULSE_WIDTH / dx:.2f} samples per pulse, need at least 4"
        )
    extent = grid.extent[0]
    train = count * PULSE_WIDTH + (count - 1) * PULSE_GAP
    if train > extent:
        raise ValueError(f"pulse train of extent {train} exceeds the domain extent {extent}")
    x = grid.axis_coordinates(0)
    start0 = grid.origin[0] + (extent - train) / 2.0
    values = np.zeros(grid.shape, dtype=float)
    for k in range(count):
        a = start0 + k * (PULSE_WIDTH + PULSE_GAP)
        values[(x >= a) & (x < a + PULSE_WIDTH)] = 1.0
    return SampledField(grid, values)


# Canonical Shepp-Logan ellipse table: (intensity, semi_x, semi_y, x0, y0, angle_deg),
# coordinates in [-1, 1]^2 with y up, angle = CCW rotation of the x semi-axis.
SHEPP_LOGAN_ELLIPSES: tuple[tuple[float, float, float, float, float, float], ...] = (
    (2.00, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.98, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.02, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.02, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.01, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.01, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.01, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.01, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.01, 0.023, 0.023, 0.0, -0.605, 0.0),
    (0.01, 0.023, 0.046, 0.06, -0.605, 0.0),
)

# Modification hook: two small high-intensity blobs, (x0, y0, radius, added intensity)
# in the same [-1, 1]^2 coordinates.  Positions are a recorded default, not canonical.
DEFAULT_BLOBS: tuple[tuple[float, float, float, float], ...] = (
    (0.30, -0.18, 0.035, 0.45),
    (0.38, -0.04, 0.028, 0.45),
)


def _pixel_centers(n_pixels: int) -> tuple[np.ndarray, np.ndarray]:
    """Pixel-center coordinates in [-1, 1]^2; row 0 is the top of the image."""
    c = (np.arange(n_pixels) + 0.5) * (2.0 / n_pixels) - 1.0
    x = c[None, :]
    y = -c[:, None]
    return x, y


def _ellipse_membership(x, y, semi_x, semi_y, x0, y0, angle_deg):
    th = np.deg2rad(angle_deg)
    u = (x - x0) * np.cos(th) + (y - y0) * np.sin(th)
    v = -(x - x0) * np.sin(th) + (y - y0) * np.cos(th)
    return (u / semi_x) ** 2 + (v / semi_y) ** 2 <= 1.0


def shepp_logan(
    n_pixels: int,
    blobs: tuple[tuple[float, float, float, float], ...] = DEFAULT_BLOBS,
) -> SampledField:
    """Shepp-Logan head phantom on an ``n_pixels`` square grid, values in [0, 1].

    The canonical ten-ellipse intensities are summed and divided by two, so the
    background is exactly 0 and the skull rim exactly 1.  ``blobs`` adds small
    high-intensity disks (the region-of-interest targets); pass ``()`` for the
    classical phantom.  The grid uses the pixel convention: spacing 1, origin 0.
    """
    if n_pixels < 64:
        raise ValueError(f"need at least 64 pixels, got {n_pixels}")
    x, y = _pixel_centers(n_pixels)
    img = np.zeros((n_pixels, n_pixels), dtype=float)
    for intensity, sa, sb, x0, y0, ang in SHEPP_LOGAN_ELLIPSES:
        img[_ellipse_membership(x, y, sa, sb, x0, y0, ang)] += intensity
    img *= 0.5
    for x0, y0, radius, intensity in blobs:
        img[_ellipse_membership(x, y, radius, radius, x0, y0, 0.0)] += intensity
    np.clip(img, 0.0, 1.0, out=img)
    grid = Grid(shape=(n_pixels, n_pixels), spacing=1.0)
    return SampledField(grid, img)


def phantom_to_pixel(n_pixels: int, x0: float, y0: float) -> tuple[float, float]:
    """Map phantom coordinates ([-1,1]^2, y up) to (row, col) pixel coordinates."""
    col = (x0 + 1.0) * n_pixels / 2.0 - 0.5
    row = (1.0 - y0) * n_pixels / 2.0 - 0.5
    return row, col


def add_noise(g: SampledField, sigma: float, seed: int) -> SampledField:
    """Add i.i.d. Gaussian noise with standard deviation ``sigma`` per node."""
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if sigma == 0:
        return g
    rng = np.random.default_rng(seed)
    eps = sigma * rng.standard_normal(g.grid.shape)
    return SampledField(g.grid, g.values + eps)


def spectral_noise(grid: Grid, amplitude: float, sigma_exp: float, seed: int) -> SampledField:
    """Real noise with ``|delta_hat(xi)| = amplitude * (1 + |xi|)**sigma_exp`` exactly.

    Random phases are antisymmetrized (``psi(-xi) = -psi(xi)``) so the field
    is real; self-conjugate bins get phase zero.  Realizes the spectrally
    bounded noise class used by the convergence-rate studies.
    """
    if sigma_exp >= 0:
        raise ValueError(f"sigma_exp must be negative, got {sigma_exp}")
    if amplitude < 0:
        raise ValueError(f"amplitude must be nonnegative, got {amplitude}")
    if amplitude == 0:
        return SampledField(grid, np.zeros(grid.shape))
    # work in unshifted DFT index space
    freq_axes = np.meshgrid(
        *(np.fft.fftfreq(n, d) for n, d in zip(grid.shape, grid.spacing)),
        indexing="ij",
        sparse=True,
    )
    radius = np.sqrt(sum(a**2 for a in freq_axes)) + np.zeros(grid.shape)
    magnitude = amplitude * (1.0 + radius) ** sigma_exp
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, grid.shape)
    rev = np.ix_(*((-np.arange(n)) % n for n in grid.shape))
    psi = 0.5 * (theta - theta[rev])
    spectrum = magnitude * np.exp(1j * psi)
    # Riemann-scaled inverse: ifftn carries 1/N^n, the weight dxi^n * N^n = 1/dx^n
    delta = np.fft.ifftn(spectrum) / grid.cell_volume
    resid = float(np.max(np.abs(delta.imag)))
    scale = float(np.max(np.abs(delta.real))) or 1.0
    if resid > 1e-12 * scale:
        raise AssertionError(f"spectral noise lost Hermitian symmetry: residue {resid:.3e}")
    return SampledField(grid, delta.real)
