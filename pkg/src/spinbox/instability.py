"""Pairwise spin dynamics of one box mode: eigenvalues, growth, squeezing.

For each mode the m_F = +-1 pair amplitudes obey a two-component linear
equation of motion with matrix

    [[eps + q,  coupling], [-coupling, -(eps + q)]]

whose eigenvalues are +-xi with xi^2 = (eps + q)^2 - coupling^2.  When
|eps + q| < |coupling| the eigenvalue pair turns imaginary and vacuum
fluctuations of the mode are amplified exponentially: the instability.
The closed-form time evolution is expressed through a complex mixing
angle; the branch is fixed so that it reproduces the matrix exponential
of the equation of motion (checked against that oracle in the tests).
"""

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .constants import CONSTANTS
from .errors import TruncationError
from .modes import ModeIndex, energy_2d
from .physics import SystemParams

__all__ = [
    "SpectrumRow",
    "BogoliubovCoefficients",
    "xi",
    "instability_rate",
    "resonance_positions",
    "spectrum_scan",
    "mixing_theta",
    "bogoliubov_coeffs",
    "squeezed_coeffs",
    "mean_pairs",
]


def xi(mode_energy_j, zeeman_j, coupling_j) -> complex:
    """Eigenvalue xi = sqrt((eps + q)^2 - coupling^2), Im(xi) >= 0 branch.

    Purely real for stable modes, purely imaginary for unstable ones;
    xi = i |coupling| exactly on resonance (eps + q = 0).
    """
    gap = mode_energy_j + zeeman_j
    disc = gap * gap - coupling_j * coupling_j
    if disc >= 0.0:
        return complex(math.sqrt(disc), 0.0)
    return complex(0.0, math.sqrt(-disc))


def instability_rate(mode_energy_j, zeeman_j, coupling_j, constants=CONSTANTS) -> float:
    """Growth rate Im(xi)/h in Hz; zero for stable modes."""
    return xi(mode_energy_j, zeeman_j, coupling_j).imag / constants.planck


@dataclass(frozen=True)
class SpectrumRow:
    """Instability rates (Hz) of several modes at one Zeeman energy."""

    zeeman_j: float
    rates_hz: tuple


def resonance_positions(params: SystemParams, mode_list: Sequence[ModeIndex]) -> dict:
    """Zeeman energy q = -eps_{n,l} (J) where each mode peaks."""
    return {
        mode: -energy_2d(mode, params.box_radius_m, params.mass_kg)
        for mode in mode_list
    }


def spectrum_scan(params: SystemParams, mode_list: Sequence[ModeIndex],
                  zeeman_values_j) -> list:
    """Rates for every (q, mode) combination; one SpectrumRow per q.

    Modes with opposite angular index have identical energies, so their
    columns would coincide; callers normally pass l >= 0 only.
    """
    if len(mode_list) == 0:
        raise ValueError("need at least one mode")
    energies = [energy_2d(m, params.box_radius_m, params.mass_kg) for m in mode_list]
    rows = []
    for q in np.asarray(zeeman_values_j, dtype=float):
        rates = tuple(
            instability_rate(e, float(q), params.spin_coupling_j) for e in energies
        )
        rows.append(SpectrumRow(zeeman_j=float(q), rates_hz=rates))
    return rows


def mixing_theta(mode_energy_j, zeeman_j, coupling_j) -> complex:
    """Mixing angle theta with cos(2 theta) = (eps + q)/coupling.

    Principal arccos: real in the unstable window, pi/4 on resonance,
    complex where the mode is stable.
    """
    if coupling_j == 0.0:
        raise ValueError("mixing angle undefined for zero coupling")
    return 0.5 * cmath.acos((mode_energy_j + zeeman_j) / coupling_j)


@dataclass(frozen=True)
class BogoliubovCoefficients:
    """Mode-operator evolution a(t) = u a(0) + u_tilde a_dagger(0)."""

    u: complex
    u_tilde: complex

    @property
    def unitarity_defect(self) -> float:
        return abs(abs(self.u) ** 2 - abs(self.u_tilde) ** 2 - 1.0)


def _sinc(z: complex) -> complex:
    if z == 0:
        return 1.0 + 0.0j
    if abs(z) < 1e-4:
        z2 = z * z
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0
    return cmath.sin(z) / z


def bogoliubov_coeffs(mode_energy_j, zeeman_j, coupling_j, time_s,
                      constants=CONSTANTS) -> BogoliubovCoefficients:
    """Closed-form evolution coefficients after time t.

    u = (-i / sin 2theta) sinh(sigma + 2 i theta) and
    u_tilde = (-i / sin 2theta) sinh(sigma), where sigma = -i xi t/hbar
    grows as |coupling| t / hbar on resonance.  The sin(2 theta) branch
    is tied to xi (sin 2theta = -i xi / coupling) so the pair exactly
    matches the matrix exponential of the equation of motion; near the
    marginal points sin 2theta -> 0 is a removable singularity and the
    entire (sinc-form) expression takes over.

    On resonance |u| = cosh(|coupling| t / hbar) and
    |u_tilde| = sinh(|coupling| t / hbar); always |u|^2 - |u_tilde|^2 = 1.
    """
    if coupling_j == 0.0:
        raise ValueError("evolution coefficients undefined for zero coupling")
    if not (time_s >= 0.0 and math.isfinite(time_s)):
        raise ValueError("time must be nonnegative and finite")
    tau = time_s / constants.hbar
    gap = mode_energy_j + zeeman_j
    ev = xi(mode_energy_j, zeeman_j, coupling_j)
    sin_two_theta = -1j * ev / coupling_j
    if abs(sin_two_theta) < 1e-6:
        z = ev * tau
        s = _sinc(z)
        u = cmath.cos(z) - 1j * gap * tau * s
        u_tilde = -1j * coupling_j * tau * s
    else:
        sigma = -1j * ev * tau
        cos_two_theta = gap / coupling_j
        two_i_theta = cmath.log(cos_two_theta + 1j * sin_two_theta)
        u = (-1j / sin_two_theta) * cmath.sinh(sigma + two_i_theta)
        u_tilde = (-1j / sin_two_theta) * cmath.sinh(sigma)
    return BogoliubovCoefficients(u=u, u_tilde=u_tilde)


def squeezed_coeffs(squeeze, k_max) -> np.ndarray:
    """Pair-number amplitudes of the two-mode squeezed vacuum.

    c_k = (-i)^k tanh^k(s) / cosh(s) on the twin occupation states
    |k, k>; the populations of the two modes are locked to each other,
    only pairs are ever produced.  k_max must be large enough that the
    discarded tail sum(|c_k|^2, k > k_max) = tanh(s)^(2 (k_max + 1))
    stays below 1e-14.
    """
    s = float(squeeze)
    if not (s >= 0.0 and math.isfinite(s)):
        raise ValueError("squeeze parameter must be nonnegative and finite")
    if not isinstance(k_max, int) or isinstance(k_max, bool) or k_max < 0:
        raise ValueError("k_max must be a nonnegative integer")
    t = math.tanh(s)
    tail = t ** (2 * (k_max + 1))
    if tail >= 1e-14:
        raise TruncationError(
            f"k_max={k_max} keeps only 1 - {tail:.3e} of the norm at squeeze={s}"
        )
    k = np.arange(k_max + 1)
    return (-1j) ** k * t ** k / math.cosh(s)


def mean_pairs(squeeze) -> float:
    """Mean transferred pair number sinh^2(s) of the squeezed vacuum."""
    s = float(squeeze)
    if not (s >= 0.0 and math.isfinite(s)):
        raise ValueError("squeeze parameter must be nonnegative and finite")
    return math.sinh(s) ** 2
