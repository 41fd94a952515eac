"""Excitation modes of the effective box: 1D slab and 2D cylinder.

The box approximation replaces the flattened trap by hard walls at the
cloud radius R.  Along one slab axis the eigenfunctions are shifted
sines; in the radial plane they are Bessel modes

    phi_{n,l}(r, gamma) = J_l(beta_{n,l} r / R) e^(i l gamma)
                          / (sqrt(pi) R J_{l+1}(beta_{n,l}))

with beta_{n,l} the n-th zero of J_l, so each mode vanishes on the
wall and carries energy hbar^2 beta^2 / (2 m R^2).

Negative angular index uses the standard continuation
J_{-l} = (-1)^l J_l, keeping the same radial profile and normalisation
magnitude while flipping the sign for odd l.  That sign is what makes
an equal superposition of +l and -l interfere as
1 + (-1)^|l| cos(dphi + 2 |l| gamma).
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bessel import bessel_j, bessel_zero
from .constants import CONSTANTS

__all__ = [
    "ModeIndex",
    "Grid2D",
    "DensityImage",
    "mode_1d",
    "energy_1d",
    "mode_2d",
    "energy_2d",
    "mode_amplitude_grid",
    "mode_density_grid",
]


@dataclass(frozen=True, order=True)
class ModeIndex:
    """Radial index n >= 1 and signed angular index l."""

    n: int
    l: int

    def __post_init__(self):
        if not isinstance(self.n, int) or isinstance(self.n, bool) or self.n < 1:
            raise ValueError("radial index n must be an integer >= 1")
        if not isinstance(self.l, int) or isinstance(self.l, bool) or abs(self.l) > 50:
            raise ValueError("angular index l must be an integer with |l| <= 50")

    @property
    def label(self) -> str:
        return f"n{self.n}_l{self.l}"


@dataclass(frozen=True)
class Grid2D:
    """Square pixel-centred sampling grid.

    Pixel (iy, ix) is centred at
    ((ix + 0.5 - samples/2) * pixel, (iy + 0.5 - samples/2) * pixel),
    so no sample ever sits exactly on the origin or the boundary for
    even sample counts.
    """

    half_extent_m: float
    samples: int

    def __post_init__(self):
        if not (self.half_extent_m > 0.0 and math.isfinite(self.half_extent_m)):
            raise ValueError("half extent must be positive and finite")
        if not isinstance(self.samples, int) or isinstance(self.samples, bool) or self.samples < 8:
            raise ValueError("grid needs at least 8 samples per axis")

    @property
    def pixel_size_m(self) -> float:
        return 2.0 * self.half_extent_m / self.samples

    @property
    def pixel_area_m2(self) -> float:
        return self.pixel_size_m ** 2

    def axis(self) -> np.ndarray:
        p = self.pixel_size_m
        return (np.arange(self.samples) + 0.5 - 0.5 * self.samples) * p

    def mesh(self):
        """(x, y) coordinate arrays, shape (samples, samples); row = y."""
        ax = self.axis()
        return np.meshgrid(ax, ax)

    def polar_mesh(self):
        x, y = self.mesh()
        return np.hypot(x, y), np.arctan2(y, x)


@dataclass(frozen=True, eq=False)
class DensityImage:
    """A scalar field sampled on a Grid2D (row index = y, column = x).

    Values are nonnegative for physical densities; noise or image
    differencing may push pixels negative, which consumers tolerate.
    """

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        expected = (self.grid.samples, self.grid.samples)
        if v.shape != expected:
            raise ValueError(f"values shape {v.shape} does not match grid {expected}")
        if not np.all(np.isfinite(v)):
            raise ValueError("image contains non-finite pixels")
        object.__setattr__(self, "values", v)

    @property
    def total(self) -> float:
        return float(self.values.sum())


def mode_1d(n, positions_m, box_radius_m) -> np.ndarray:
    """Slab eigenfunction sin(k_n x + n pi / 2) / sqrt(R) on [-R, R].

    k_n = n pi / (2 R); odd n gives even (cosine-like) modes, even n
    odd ones, and the amplitude is exactly zero outside the box.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError("mode number n must be an integer >= 1")
    if not (box_radius_m > 0.0):
        raise ValueError("box radius must be positive")
    x = np.asarray(positions_m, dtype=float)
    k = n * math.pi / (2.0 * box_radius_m)
    vals = np.sin(k * x + 0.5 * n * math.pi) / math.sqrt(box_radius_m)
    return np.where(np.abs(x) <= box_radius_m, vals, 0.0)


def energy_1d(n, box_radius_m, mass_kg, constants=CONSTANTS) -> float:
    """Kinetic energy hbar^2 k_n^2 / (2 m) of the n-th slab mode, J."""
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValueError("mode number n must be an integer >= 1")
    if not (box_radius_m > 0.0 and mass_kg > 0.0):
        raise ValueError("box radius and mass must be positive")
    k = n * math.pi / (2.0 * box_radius_m)
    return (constants.hbar * k) ** 2 / (2.0 * mass_kg)


def _bessel_j_array(order, values):
    flat = np.asarray(values, dtype=float).ravel()
    out = np.empty(flat.shape)
    for i, v in enumerate(flat):
        out[i] = bessel_j(order, float(v))
    return out.reshape(np.shape(values))


def mode_2d(mode: ModeIndex, radius_m, azimuth_rad, box_radius_m) -> np.ndarray:
    """Cylinder-box eigenfunction, complex, zero outside the wall."""
    if not (box_radius_m > 0.0):
        raise ValueError("box radius must be positive")
    la = abs(mode.l)
    beta = bessel_zero(la, mode.n)
    norm = 1.0 / (math.sqrt(math.pi) * box_radius_m * bessel_j(la + 1, beta))
    r = np.asarray(radius_m, dtype=float)
    if np.any(r < 0.0):
        raise ValueError("radius must be nonnegative")
    g = np.asarray(azimuth_rad, dtype=float)
    inside = r <= box_radius_m
    scaled = np.where(inside, beta * r / box_radius_m, 0.0)
    radial = _bessel_j_array(la, scaled) * inside
    sign = 1.0 if mode.l >= 0 else (-1.0) ** la
    return sign * norm * radial * np.exp(1j * mode.l * g)


def energy_2d(mode: ModeIndex, box_radius_m, mass_kg, constants=CONSTANTS) -> float:
    """Mode energy hbar^2 beta_{n,l}^2 / (2 m R^2), J."""
    if not (box_radius_m > 0.0 and mass_kg > 0.0):
        raise ValueError("box radius and mass must be positive")
    beta = bessel_zero(abs(mode.l), mode.n)
    return (constants.hbar * beta) ** 2 / (2.0 * mass_kg * box_radius_m ** 2)


@lru_cache(maxsize=128)
def _amplitude_grid_cached(mode: ModeIndex, box_radius_m: float, grid: Grid2D):
    r, g = grid.polar_mesh()
    amp = mode_2d(mode, r, g, box_radius_m)
    amp.setflags(write=False)
    return amp


def mode_amplitude_grid(mode: ModeIndex, box_radius_m, grid: Grid2D) -> np.ndarray:
    """Complex mode amplitude sampled on the grid (cached, read-only)."""
    return _amplitude_grid_cached(mode, float(box_radius_m), grid)


def mode_density_grid(mode: ModeIndex, box_radius_m, grid: Grid2D) -> DensityImage:
    """|phi_{n,l}|^2 on the grid; sums to ~1/pixel_area for R-covering grids."""
    amp = mode_amplitude_grid(mode, box_radius_m, grid)
    return DensityImage(grid=grid, values=np.abs(amp) ** 2)
