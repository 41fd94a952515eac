"""Phase statistics of the amplified pair modes.

Two independent squeezing channels populate the vortex/antivortex pair
of one box mode.  Within each channel the two phases are individually
uniform, but their sum is pinned: mean -pi/2, variance

    pi^2 / 3 + 4 dilog(1 + tanh s)

which starts at the uniform value pi^2/3 for s = 0 and collapses to
zero deep in the squeezed regime.  Sampling uses the exact geometric
pair-number law together with a wrapped normal surrogate for the
phase-sum fluctuation, which reproduces the mean and variance of the
exact distribution without its unwieldy tails.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "wrap_angle",
    "dilog",
    "phase_sum_mean",
    "phase_sum_variance",
    "PairPhaseDraw",
    "sample_pair_phases",
]

_MAX_SQUEEZE = 12.0  # tanh(s)^2 rounds to 1.0 in doubles not far beyond


def wrap_angle(value):
    """Wrap an angle (scalar or array) into [-pi, pi)."""
    return (np.asarray(value, dtype=float) + math.pi) % (2.0 * math.pi) - math.pi


def _li2(y):
    # Li_2 on [-1, 1] via the power series, pulled into fast convergence
    # by the Euler reflection (y > 1/2) and Landen transform (y < -1/2).
    if y == 1.0:
        return math.pi ** 2 / 6.0
    if y > 0.5:
        return math.pi ** 2 / 6.0 - math.log(y) * math.log1p(-y) - _li2(1.0 - y)
    if y < -0.5:
        return -_li2(y / (y - 1.0)) - 0.5 * math.log1p(-y) ** 2
    total = 0.0
    term = 1.0
    for k in range(1, 80):
        term *= y
        if term == 0.0:
            break
        total += term / (k * k)
        if abs(term) < 1e-18 * k * k:
            break
    return total


def dilog(x) -> float:
    """dilog(x) = Li_2(1 - x) for x in [0, 2].

    dilog(1) = 0 and dilog(2) = -pi^2/12; accurate to about 1e-15.
    """
    x = float(x)
    if not (0.0 <= x <= 2.0):
        raise ValueError("dilog argument must lie in [0, 2]")
    return _li2(1.0 - x)


def phase_sum_mean() -> float:
    """Mean of the pinned pair-phase sum: always -pi/2."""
    return -0.5 * math.pi


def phase_sum_variance(squeeze) -> float:
    """Variance of the pair-phase sum, pi^2/3 + 4 dilog(1 + tanh s)."""
    s = float(squeeze)
    if not (s >= 0.0 and math.isfinite(s)):
        raise ValueError("squeeze parameter must be nonnegative and finite")
    return math.pi ** 2 / 3.0 + 4.0 * dilog(1.0 + math.tanh(s))


@dataclass(frozen=True)
class PairPhaseDraw:
    """One sampled set of mode phases plus the transferred pair count.

    vortex / antivortex name the +|l| and -|l| mode components, up /
    down the m_F = +1 and m_F = -1 spin clouds.  The squeezing channels
    pin (vortex, up) + (antivortex, down) and (antivortex, up) +
    (vortex, down); all four phases are individually uniform.
    """

    phi_vortex_up: float
    phi_antivortex_up: float
    phi_vortex_down: float
    phi_antivortex_down: float
    pair_count: int


def sample_pair_phases(squeeze, rng: np.random.Generator) -> PairPhaseDraw:
    """Draw one phase realization at squeeze parameter s.

    Draw order is fixed (two uniforms, two normals, one geometric) so a
    given stream always yields the same record.  The pair count follows
    the exact geometric law |c_k|^2 = (1 - tanh^2 s) tanh^(2k) s of the
    squeezed vacuum; both spin clouds share it (twin occupation).
    """
    s = float(squeeze)
    if not (0.0 <= s <= _MAX_SQUEEZE):
        raise ValueError(f"squeeze parameter must lie in [0, {_MAX_SQUEEZE}]")
    phi_vortex_up = float(rng.uniform(-math.pi, math.pi))
    phi_antivortex_up = float(rng.uniform(-math.pi, math.pi))
    sigma = math.sqrt(phase_sum_variance(s))
    delta = rng.normal(0.0, sigma, size=2)
    mean_sum = phase_sum_mean()
    phi_antivortex_down = float(wrap_angle(mean_sum - phi_vortex_up + delta[0]))
    phi_vortex_down = float(wrap_angle(mean_sum - phi_antivortex_up + delta[1]))
    p_zero = 1.0 - math.tanh(s) ** 2
    pair_count = int(rng.geometric(p_zero)) - 1
    return PairPhaseDraw(
        phi_vortex_up=phi_vortex_up,
        phi_antivortex_up=phi_antivortex_up,
        phi_vortex_down=phi_vortex_down,
        phi_antivortex_down=phi_antivortex_down,
        pair_count=pair_count,
    )
