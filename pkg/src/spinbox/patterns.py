"""Synthesis of symmetry-broken density patterns.

A single unstable mode with angular index +-l gets populated as a
vortex/antivortex superposition with random phases.  Its density

    |e^(i phi_v) phi_{n,l} + e^(i phi_a) phi_{n,-l}|^2
        proportional to 1 + (-1)^|l| cos(phi_v - phi_a + 2 |l| gamma)

shows 2|l| azimuthal lobes whose orientation is set by the phase
difference: each realization breaks the rotational symmetry, the
ensemble average restores it.  Images here are in atoms per pixel once
scaled by the pair count; raw interference patterns carry the mode's
physical density normalisation (1/m^2).
"""

import math
from dataclasses import dataclass

import numpy as np

from .modes import DensityImage, Grid2D, ModeIndex, mode_amplitude_grid
from .phases import PairPhaseDraw, sample_pair_phases

__all__ = [
    "NoiseSpec",
    "RealizationRecord",
    "interference_density",
    "pattern_angle",
    "realization",
    "ensemble_average",
    "admix_neighbor",
    "spin_pattern",
    "add_noise",
]

_NOISE_KINDS = ("none", "gaussian", "poisson")


@dataclass(frozen=True)
class NoiseSpec:
    """Detection noise model applied per pixel.

    gaussian: additive, sigma = scale, may push pixels negative.
    poisson: pixel value v becomes Poisson(v * scale) / scale, so scale
    plays the role of counts per image unit and the relative
    fluctuation of a bright pixel is 1 / sqrt(v * scale).
    """

    kind: str
    scale: float = 0.0

    def __post_init__(self):
        if self.kind not in _NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {_NOISE_KINDS}")
        if self.kind == "none":
            return
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise ValueError(f"{self.kind} noise needs a positive scale")


def interference_density(mode: ModeIndex, phi_vortex, phi_antivortex,
                         box_radius_m, grid: Grid2D) -> DensityImage:
    """Density of the equal-amplitude vortex/antivortex superposition.

    Requires l != 0; a rotationally symmetric l = 0 mode has no partner
    to interfere with (see admix_neighbor for mixing one in).
    """
    la = abs(mode.l)
    if la == 0:
        raise ValueError("interference pattern needs l != 0")
    amp_v = mode_amplitude_grid(ModeIndex(mode.n, la), box_radius_m, grid)
    amp_a = mode_amplitude_grid(ModeIndex(mode.n, -la), box_radius_m, grid)
    field = np.exp(1j * phi_vortex) * amp_v + np.exp(1j * phi_antivortex) * amp_a
    return DensityImage(grid=grid, values=np.abs(field) ** 2)


def pattern_angle(mode: ModeIndex, phi_vortex, phi_antivortex) -> float:
    """Lobe orientation implied by the phases, in [0, pi/|l|).

    The density peaks where (-1)^|l| cos(dphi + 2 |l| gamma) = +1, i.e.
    at gamma = -dphi / (2 l) for even |l| and (pi - dphi) / (2 l) for
    odd |l|, modulo the pattern period pi / |l|.
    """
    la = abs(mode.l)
    if la == 0:
        raise ValueError("an l = 0 pattern has no orientation")
    dphi = float(phi_vortex) - float(phi_antivortex)
    offset = math.pi if la % 2 else 0.0
    period = math.pi / la
    return ((offset - dphi) / (2.0 * la)) % period


@dataclass(frozen=True)
class RealizationRecord:
    """One synthetic experimental shot: both spin clouds plus ground truth."""

    mode: ModeIndex
    squeeze: float
    box_radius_m: float
    noise: NoiseSpec
    draw: PairPhaseDraw
    image_plus: DensityImage
    image_minus: DensityImage
    truth_angle_plus: float
    truth_angle_minus: float


def realization(mode: ModeIndex, squeeze, box_radius_m, grid: Grid2D,
                noise: NoiseSpec, rng: np.random.Generator) -> RealizationRecord:
    """Sample phases and pair count, then image both spin clouds.

    Images are in atoms per pixel: the interference pattern (unit norm
    over the plane) times pixel area times the shared pair count, plus
    detection noise.  Both clouds inherit the same pair count, so their
    populations are exactly equal shot by shot.
    """
    draw = sample_pair_phases(squeeze, rng)
    # the two-mode pattern has total mass 2 / pixel_area on the grid, so
    # this scale gives each cloud a total of ~pair_count atoms
    scale = 0.5 * draw.pair_count * grid.pixel_area_m2
    base_plus = interference_density(mode, draw.phi_vortex_up,
                                     draw.phi_antivortex_up, box_radius_m, grid)
    base_minus = interference_density(mode, draw.phi_vortex_down,
                                      draw.phi_antivortex_down, box_radius_m, grid)
    plus = add_noise(DensityImage(grid, base_plus.values * scale), noise, rng)
    minus = add_noise(DensityImage(grid, base_minus.values * scale), noise, rng)
    return RealizationRecord(
        mode=mode,
        squeeze=float(squeeze),
        box_radius_m=float(box_radius_m),
        noise=noise,
        draw=draw,
        image_plus=plus,
        image_minus=minus,
        truth_angle_plus=pattern_angle(mode, draw.phi_vortex_up, draw.phi_antivortex_up),
        truth_angle_minus=pattern_angle(mode, draw.phi_vortex_down, draw.phi_antivortex_down),
    )


def ensemble_average(records) -> tuple:
    """Pixelwise mean images (plus, minus) over a list of records."""
    records = list(records)
    if not records:
        raise ValueError("cannot average an empty ensemble")
    grid = records[0].image_plus.grid
    for rec in records:
        if rec.image_plus.grid != grid or rec.image_minus.grid != grid:
            raise ValueError("all records must share one grid")
    mean_plus = np.mean([rec.image_plus.values for rec in records], axis=0)
    mean_minus = np.mean([rec.image_minus.values for rec in records], axis=0)
    return DensityImage(grid, mean_plus), DensityImage(grid, mean_minus)


def admix_neighbor(mode_a: ModeIndex, weight_a, phases_a,
                   mode_b: ModeIndex, weight_b, phases_b,
                   box_radius_m, grid: Grid2D) -> DensityImage:
    """Coherent two-mode admixture |sqrt(wa) A_a + sqrt(wb) A_b|^2.

    phases_a / phases_b are (vortex, antivortex) phase pairs; for an
    l = 0 mode the two entries are redundant.  A weight of zero reduces
    exactly to the other mode's interference density, and swapping the
    (mode, weight, phases) triples leaves the image unchanged.
    """
    for w in (weight_a, weight_b):
        if not (0.0 <= float(w) and math.isfinite(float(w))):
            raise ValueError("weights must be nonnegative and finite")

    def _field(mode, phases):
        la = abs(mode.l)
        pv, pa = (float(phases[0]), float(phases[1]))
        if la == 0:
            # a symmetric mode carries a single phase; the second entry
            # of the pair is ignored
            return np.exp(1j * pv) * mode_amplitude_grid(mode, box_radius_m, grid)
        amp_v = mode_amplitude_grid(ModeIndex(mode.n, la), box_radius_m, grid)
        amp_a = mode_amplitude_grid(ModeIndex(mode.n, -la), box_radius_m, grid)
        return np.exp(1j * pv) * amp_v + np.exp(1j * pa) * amp_a

    field = (math.sqrt(float(weight_a)) * _field(mode_a, phases_a)
             + math.sqrt(float(weight_b)) * _field(mode_b, phases_b))
    return DensityImage(grid=grid, values=np.abs(field) ** 2)


def spin_pattern(image_plus: DensityImage, image_minus: DensityImage) -> DensityImage:
    """Normalised population difference, plus/total - minus/total.

    Both inputs are scaled to unit total first, so shared structure
    cancels and only the (possibly negative) asymmetry remains.
    """
    if image_plus.grid != image_minus.grid:
        raise ValueError("images must share one grid")
    tp, tm = image_plus.total, image_minus.total
    if tp == 0.0 or tm == 0.0:
        raise ValueError("spin pattern undefined for zero total mass")
    return DensityImage(image_plus.grid,
                        image_plus.values / tp - image_minus.values / tm)


def add_noise(image: DensityImage, noise: NoiseSpec,
              rng: np.random.Generator) -> DensityImage:
    """Apply the configured noise model; 'none' returns the image as is."""
    if noise.kind == "none":
        return image
    if noise.kind == "gaussian":
        values = image.values + rng.normal(0.0, noise.scale, image.values.shape)
        return DensityImage(image.grid, values)
    counts = rng.poisson(np.clip(image.values, 0.0, None) * noise.scale)
    return DensityImage(image.grid, counts / noise.scale)
