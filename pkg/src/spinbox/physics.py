"""Mean-field groundwork: couplings, Thomas-Fermi profile, effective box.

A spin-2 condensate held in a cylindrical harmonic trap acts, for the
weakly populated m_F = +-1 excitations, like a particle in a box: the
density channel flattens the trap bottom inside the cloud and leaves a
small repulsive bump proportional to the spin channel coupling.  The
routines here build that picture from scattering data and trap
frequencies.

All quantities are SI.  Conversions to the Hz / micrometre / Gauss
units used by files and the command line live at the edges.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS, PhysicalConstants

__all__ = [
    "TrapConfig",
    "CouplingConstants",
    "ZeemanConversion",
    "ThomasFermi",
    "SystemParams",
    "coupling_constants",
    "thomas_fermi",
    "effective_potential_profile",
    "q_from_field",
]


@dataclass(frozen=True)
class TrapConfig:
    """Harmonic trap frequencies in Hz (not angular)."""

    freq_x_hz: float
    freq_y_hz: float
    freq_z_hz: float

    def __post_init__(self):
        for f in (self.freq_x_hz, self.freq_y_hz, self.freq_z_hz):
            if not (f > 0.0 and math.isfinite(f)):
                raise ValueError("trap frequencies must be positive and finite")

    @property
    def omega_geometric(self) -> float:
        """Geometric mean angular frequency, rad/s."""
        return 2.0 * math.pi * (self.freq_x_hz * self.freq_y_hz * self.freq_z_hz) ** (1.0 / 3.0)

    @property
    def omega_radial(self) -> float:
        """Mean of the two strongest angular frequencies, rad/s.

        For a cylindrical trap the two nearly equal strong axes confine
        the plane in which the box modes live; the remaining weak axis
        is the long axis of the cigar.
        """
        strong = sorted((self.freq_x_hz, self.freq_y_hz, self.freq_z_hz))[1:]
        return 2.0 * math.pi * 0.5 * (strong[0] + strong[1])

    @property
    def omega_axial(self) -> float:
        """Weakest angular frequency, rad/s."""
        return 2.0 * math.pi * min(self.freq_x_hz, self.freq_y_hz, self.freq_z_hz)


@dataclass(frozen=True)
class CouplingConstants:
    """Density channel (u0) and spin channel (u1) couplings, J m^3."""

    density_j_m3: float
    spin_j_m3: float

    def __post_init__(self):
        if not (self.density_j_m3 > 0.0):
            raise ValueError("density coupling must be positive (repulsive cloud)")
        if not math.isfinite(self.spin_j_m3):
            raise ValueError("spin coupling must be finite")

    @property
    def ratio(self) -> float:
        """spin / density coupling ratio, dimensionless and small."""
        return self.spin_j_m3 / self.density_j_m3


@dataclass(frozen=True)
class ZeemanConversion:
    """Quadratic field-to-energy conversion q/h = sign * coeff * B^2."""

    coeff_hz_per_gauss2: float
    sign: int

    def __post_init__(self):
        if not (self.coeff_hz_per_gauss2 > 0.0):
            raise ValueError("conversion coefficient must be positive")
        if self.sign not in (-1, 1):
            raise ValueError("sign must be -1 or +1")


@dataclass(frozen=True)
class ThomasFermi:
    chemical_potential_j: float
    radius_radial_m: float
    radius_axial_m: float


@dataclass(frozen=True)
class SystemParams:
    """Everything the mode and instability calculations need."""

    mass_kg: float
    trap: TrapConfig
    couplings: CouplingConstants
    box_radius_m: float
    spin_coupling_j: float  # pair-producing coupling energy, h * 30 Hz scale
    zeeman: ZeemanConversion | None = None

    def __post_init__(self):
        if not (self.mass_kg > 0.0):
            raise ValueError("mass must be positive")
        if not (self.box_radius_m > 0.0):
            raise ValueError("box radius must be positive")
        if not (self.spin_coupling_j != 0.0 and math.isfinite(self.spin_coupling_j)):
            raise ValueError("spin coupling must be nonzero and finite")


def coupling_constants(a0_bohr, a2_bohr, a4_bohr, mass_kg,
                       constants: PhysicalConstants = CONSTANTS) -> CouplingConstants:
    """Collision-channel couplings for a spin-2 gas.

    Parameters
    ----------
    a0_bohr, a2_bohr, a4_bohr : float
        s-wave scattering lengths of the total-spin F = 0, 2, 4
        channels, in Bohr radii.
    mass_kg : float
        Atomic mass in kg.

    Returns
    -------
    CouplingConstants
        u0 = (7 g0 + 10 g2 + 18 g4) / 35 and
        u1 = (-7 g0 - 5 g2 + 12 g4) / 35 with g_F = 4 pi hbar^2 a_F / m.

    Notes
    -----
    With equal scattering lengths the spin channel closes exactly
    (u1 = 0) and u0 reduces to the single-channel coupling.
    """
    if not (mass_kg > 0.0):
        raise ValueError("mass must be positive")
    hbar = constants.hbar
    g0, g2, g4 = (
        4.0 * math.pi * hbar * hbar * (a * constants.bohr_radius) / mass_kg
        for a in (a0_bohr, a2_bohr, a4_bohr)
    )
    u0 = (7.0 * g0 + 10.0 * g2 + 18.0 * g4) / 35.0
    u1 = (-7.0 * g0 - 5.0 * g2 + 12.0 * g4) / 35.0
    return CouplingConstants(density_j_m3=u0, spin_j_m3=u1)


def thomas_fermi(atom_count, scattering_length_m, mass_kg, trap: TrapConfig,
                 constants: PhysicalConstants = CONSTANTS) -> ThomasFermi:
    """Thomas-Fermi chemical potential and cloud radii.

    Parameters
    ----------
    atom_count : int
        Number of condensed atoms.
    scattering_length_m : float
        Effective (density channel) scattering length in metres.
    mass_kg : float
        Atomic mass in kg.
    trap : TrapConfig
        Harmonic trap frequencies.

    Returns
    -------
    ThomasFermi
        mu = (hbar wbar / 2) (15 N a / a_ho)^(2/5) with the geometric
        mean frequency wbar and oscillator length a_ho, plus the radii
        where the parabola reaches mu along the radial (strong) and
        axial (weak) directions.
    """
    if atom_count <= 0:
        raise ValueError("atom count must be positive")
    if not (scattering_length_m > 0.0):
        raise ValueError("scattering length must be positive for a stable cloud")
    if not (mass_kg > 0.0):
        raise ValueError("mass must be positive")
    hbar = constants.hbar
    wbar = trap.omega_geometric
    a_ho = math.sqrt(hbar / (mass_kg * wbar))
    mu = 0.5 * hbar * wbar * (15.0 * atom_count * scattering_length_m / a_ho) ** 0.4
    r_radial = math.sqrt(2.0 * mu / (mass_kg * trap.omega_radial ** 2))
    r_axial = math.sqrt(2.0 * mu / (mass_kg * trap.omega_axial ** 2))
    return ThomasFermi(chemical_potential_j=mu,
                       radius_radial_m=r_radial,
                       radius_axial_m=r_axial)


def effective_potential_profile(params: SystemParams, positions_m) -> np.ndarray:
    """Effective potential seen by m_F = +-1 excitations along a radius.

    The condensate in the m_F = 0 state cancels the trap inside the
    cloud; what is left is V(x) + (u0 + u1) n0(x) - mu, which inside the
    Thomas-Fermi radius equals (u1 / u0)(mu - V(x)): a small parabolic
    bump of height (u1/u0) mu at the centre, dropping to zero at the
    edge.  Outside the cloud the bare trap wall takes over.  The walls
    plus the shallow bump make the box picture: hard edges at the
    cloud radius, nearly flat interior.

    positions_m may be a scalar or array; entries must lie within twice
    the box radius for the local-density picture to make sense.
    """
    x = np.asarray(positions_m, dtype=float)
    if np.any(np.abs(x) > 2.0 * params.box_radius_m):
        raise ValueError("profile positions must lie within twice the box radius")
    m = params.mass_kg
    w = params.trap.omega_radial
    u0 = params.couplings.density_j_m3
    u1 = params.couplings.spin_j_m3
    # the chemical potential consistent with the cloud filling the box
    mu = 0.5 * m * w * w * params.box_radius_m ** 2
    v = 0.5 * m * w * w * x * x
    n0 = np.clip((mu - v) / u0, 0.0, None)
    return v + (u0 + u1) * n0 - mu


def q_from_field(field_gauss, conversion: ZeemanConversion,
                 constants: PhysicalConstants = CONSTANTS) -> float:
    """Quadratic Zeeman energy (J) for a magnetic field given in Gauss."""
    b = float(field_gauss)
    if not (b >= 0.0 and math.isfinite(b)):
        raise ValueError("field must be nonnegative and finite")
    return conversion.sign * conversion.coeff_hz_per_gauss2 * b * b * constants.planck
