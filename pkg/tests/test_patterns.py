import math

import numpy as np
import pytest
import scipy.special

from spinbox import (
    Grid2D,
    ModeIndex,
    NoiseSpec,
    add_noise,
    admix_neighbor,
    ensemble_average,
    interference_density,
    mode_2d,
    mode_density_grid,
    pattern_angle,
    realization,
    spin_pattern,
    stream,
)
from spinbox.modes import DensityImage

from conftest import BOX_RADIUS_M

GRID = Grid2D(half_extent_m=BOX_RADIUS_M, samples=64)


def polar_oracle_density(mode, phi_vortex, phi_antivortex, grid):
    """Pixelwise |e^{i phi_v} phi_{n,l} + e^{i phi_a} phi_{n,-l}|^2 built
    directly from scipy Bessel functions, bypassing the package's grids."""
    la = abs(mode.l)
    beta = scipy.special.jn_zeros(la, mode.n)[-1]
    pixel = 2 * BOX_RADIUS_M / grid.samples
    axis = (np.arange(grid.samples) + 0.5 - grid.samples / 2) * pixel
    x, y = np.meshgrid(axis, axis)
    r = np.hypot(x, y)
    gamma = np.arctan2(y, x)
    radial = scipy.special.jv(la, beta * np.clip(r, 0, BOX_RADIUS_M) / BOX_RADIUS_M)
    radial = np.where(r <= BOX_RADIUS_M, radial, 0.0)
    norm = math.sqrt(math.pi) * BOX_RADIUS_M * scipy.special.jv(la + 1, beta)
    plus = radial / norm * np.exp(1j * la * gamma)
    minus = (-1.0) ** la * radial / norm * np.exp(-1j * la * gamma)
    field = np.exp(1j * phi_vortex) * plus + np.exp(1j * phi_antivortex) * minus
    return np.abs(field) ** 2


def test_interference_matches_independent_oracle():
    for nl, pv, pa in (((2, 1), 0.7, -1.9), ((1, 1), 2.4, 0.2), ((1, 2), -0.6, 2.9)):
        mode = ModeIndex(*nl)
        image = interference_density(mode, pv, pa, BOX_RADIUS_M, GRID)
        oracle = polar_oracle_density(mode, pv, pa, GRID)
        scale = oracle.max()
        np.testing.assert_allclose(image.values, oracle, rtol=0, atol=1e-10 * scale)


def test_interference_rejects_l0():
    with pytest.raises(ValueError):
        interference_density(ModeIndex(1, 0), 0.0, 0.0, BOX_RADIUS_M, GRID)


def test_interference_phase_wrap_invariance():
    mode = ModeIndex(2, 1)
    a = interference_density(mode, 0.3, -0.8, BOX_RADIUS_M, GRID)
    b = interference_density(mode, 0.3 + 2 * math.pi, -0.8, BOX_RADIUS_M, GRID)
    np.testing.assert_allclose(a.values, b.values, rtol=0, atol=1e-12 * a.values.max())
    # only the phase difference matters
    c = interference_density(mode, 0.3 + 1.1, -0.8 + 1.1, BOX_RADIUS_M, GRID)
    np.testing.assert_allclose(a.values, c.values, rtol=0, atol=1e-12 * a.values.max())


def test_interference_sign_rule_even_vs_odd():
    # at dphi = 0 an even-|l| pattern peaks along gamma = 0 while an
    # odd-|l| pattern has a node there (pixel centres sit half a pixel
    # off the axis, so the node is only quadratically suppressed)
    fine = Grid2D(half_extent_m=BOX_RADIUS_M, samples=256)
    odd = interference_density(ModeIndex(1, 1), 0.0, 0.0, BOX_RADIUS_M, fine)
    even = interference_density(ModeIndex(1, 2), 0.0, 0.0, BOX_RADIUS_M, fine)
    iy = fine.samples // 2
    ix = int(fine.samples * 0.75)
    assert odd.values[iy, ix] < 1e-3 * odd.values.max()
    assert even.values[iy, ix] > 0.5 * even.values.max()


def test_interference_two_lobes_and_quarter_turn():
    # |l| = 1 makes exactly two azimuthal lobes, and shifting dphi by pi
    # turns the pattern by a quarter turn; the pixel-centred grid maps
    # onto itself under 90 degree rotation, so the turned image matches
    # a rotated copy exactly
    mode = ModeIndex(1, 1)
    base = interference_density(mode, 1.3, 0.0, BOX_RADIUS_M, GRID)
    radius, azimuth = GRID.polar_mesh()
    band = (radius > 0.4 * BOX_RADIUS_M) & (radius < 0.6 * BOX_RADIUS_M)
    profile = np.array([
        base.values[band][(((azimuth[band] + math.pi) / (2 * math.pi) * 72).astype(int) % 72) == b].mean()
        for b in range(72)
    ])
    # two lobes: the azimuthal profile crosses its mean exactly 4 times
    signs = np.sign(profile - profile.mean())
    crossings = int(np.sum(signs != np.roll(signs, 1)))
    assert crossings == 4
    turned = interference_density(mode, 1.3 + math.pi, 0.0, BOX_RADIUS_M, GRID)
    rotations = [np.rot90(base.values, k) for k in (1, 3)]
    assert any(
        np.allclose(turned.values, rot, rtol=0, atol=1e-12 * base.values.max())
        for rot in rotations
    )


def test_pattern_angle_domain_and_formula():
    for la in (1, 2, 3):
        mode = ModeIndex(1, la)
        period = math.pi / la
        for pv, pa in ((0.0, 0.0), (2.5, -3.0), (-1.2, 0.4), (3.1, 3.0)):
            angle = pattern_angle(mode, pv, pa)
            assert 0.0 <= angle < period
            offset = math.pi if la % 2 else 0.0
            expected = ((offset - (pv - pa)) / (2 * la)) % period
            assert angle == pytest.approx(expected, abs=1e-12)
    with pytest.raises(ValueError):
        pattern_angle(ModeIndex(1, 0), 0.0, 0.0)


def test_pattern_peaks_at_truth_angle():
    # the azimuthal argmax of the synthesized image, read on a circle
    # through the first radial antinode, sits at the claimed orientation
    # to within one pixel's angular resolution
    fine = Grid2D(half_extent_m=BOX_RADIUS_M, samples=256)
    mode = ModeIndex(2, 1)
    beta = scipy.special.jn_zeros(1, 2)[-1]
    r0 = 1.8411837813406593 / beta * BOX_RADIUS_M  # first maximum of J_1
    pixel_angle = fine.pixel_size_m / r0
    thetas = np.linspace(-math.pi, math.pi, 1441, endpoint=False)
    pixel = fine.pixel_size_m
    ix = np.clip(((r0 * np.cos(thetas) + BOX_RADIUS_M) / pixel).astype(int), 0, fine.samples - 1)
    iy = np.clip(((r0 * np.sin(thetas) + BOX_RADIUS_M) / pixel).astype(int), 0, fine.samples - 1)
    for pv, pa in ((0.9, -2.2), (-0.4, 1.3), (2.8, 2.8)):
        image = interference_density(mode, pv, pa, BOX_RADIUS_M, fine)
        truth = pattern_angle(mode, pv, pa)
        ring = image.values[iy, ix]
        gamma_peak = float(thetas[np.argmax(ring)]) % math.pi
        delta = abs(gamma_peak - truth) % math.pi
        delta = min(delta, math.pi - delta)
        assert delta < pixel_angle


def test_realization_fixed_pair_count_equal_integrals():
    # without noise every realization at the same squeeze has total mass
    # set by its pair count; conditioned on the count the integrals agree
    mode = ModeIndex(2, 1)
    noise = NoiseSpec("none")
    totals = {}
    for i in range(60):
        rec = realization(mode, 2.0, BOX_RADIUS_M, GRID, noise, stream(5, i))
        totals.setdefault(rec.draw.pair_count, []).append(rec.image_plus.total)
    checked = 0
    for count, values in totals.items():
        if len(values) < 2 or count == 0:
            continue
        first = values[0]
        for v in values[1:]:
            assert v == pytest.approx(first, rel=1e-12)
        checked += 1
    assert checked >= 2
    # and the total is the pair count itself up to grid quadrature error
    rec = realization(mode, 2.5, BOX_RADIUS_M, GRID, noise, stream(6, 3))
    if rec.draw.pair_count > 0:
        assert rec.image_plus.total == pytest.approx(rec.draw.pair_count, rel=5e-3)
        assert rec.image_minus.total == pytest.approx(rec.draw.pair_count, rel=5e-3)


def test_realization_truth_angles_match_draw():
    mode = ModeIndex(2, 1)
    rec = realization(mode, 2.0, BOX_RADIUS_M, GRID, NoiseSpec("none"), stream(11, 0))
    assert rec.truth_angle_plus == pytest.approx(
        pattern_angle(mode, rec.draw.phi_vortex_up, rec.draw.phi_antivortex_up)
    )
    assert rec.truth_angle_minus == pytest.approx(
        pattern_angle(mode, rec.draw.phi_vortex_down, rec.draw.phi_antivortex_down)
    )
    period = math.pi / abs(mode.l)
    assert 0.0 <= rec.truth_angle_plus < period
    assert 0.0 <= rec.truth_angle_minus < period


def test_realization_strong_squeeze_locks_orientations():
    # phase-sum variance vanishes at large s, so both clouds break the
    # symmetry in the same direction
    mode = ModeIndex(2, 1)
    for i in range(10):
        rec = realization(mode, 12.0, BOX_RADIUS_M, GRID, NoiseSpec("none"), stream(21, i))
        delta = abs(rec.truth_angle_plus - rec.truth_angle_minus)
        delta = min(delta, math.pi - delta)
        assert delta < 1e-4


def test_ensemble_average_identity_cases():
    mode = ModeIndex(2, 1)
    rec = realization(mode, 2.0, BOX_RADIUS_M, GRID, NoiseSpec("none"), stream(31, 0))
    avg_plus, avg_minus = ensemble_average([rec])
    np.testing.assert_array_equal(avg_plus.values, rec.image_plus.values)
    np.testing.assert_array_equal(avg_minus.values, rec.image_minus.values)
    avg_plus, avg_minus = ensemble_average([rec] * 5)
    np.testing.assert_allclose(avg_plus.values, rec.image_plus.values, rtol=1e-15)
    with pytest.raises(ValueError):
        ensemble_average([])


def test_ensemble_average_restores_symmetry():
    # averaging many broken-symmetry shots washes the lobes out: the
    # radial-band azimuthal profile of the mean image flattens to below
    # 5% max/min variation over 10^3 realizations
    mode = ModeIndex(2, 1)
    records = [
        realization(mode, 2.0, BOX_RADIUS_M, GRID, NoiseSpec("none"), stream(1, i))
        for i in range(1000)
    ]
    avg_plus, _ = ensemble_average(records)
    radius, azimuth = GRID.polar_mesh()
    band = (radius > 0.4 * BOX_RADIUS_M) & (radius < 0.6 * BOX_RADIUS_M)
    bins = ((azimuth[band] + math.pi) / (2 * math.pi) * 12).astype(int) % 12
    means = np.array([avg_plus.values[band][bins == b].mean() for b in range(12)])
    assert means.max() / means.min() < 1.05


def test_realization_truth_angles_uniform():
    from spinbox import kuiper_uniformity

    mode = ModeIndex(2, 1)
    small = Grid2D(half_extent_m=BOX_RADIUS_M, samples=16)
    angles = np.array([
        realization(mode, 1.5, BOX_RADIUS_M, small, NoiseSpec("none"), stream(55, i)).truth_angle_plus
        for i in range(1000)
    ])
    _, p = kuiper_uniformity(angles, math.pi)
    assert p > 0.01


def test_admix_weight_zero_reduces_to_interference():
    mode_a = ModeIndex(1, 0)
    mode_b = ModeIndex(1, 1)
    phases_b = (0.8, -0.5)
    image = admix_neighbor(mode_a, 0.0, (0.0, 0.0), mode_b, 1.0, phases_b, BOX_RADIUS_M, GRID)
    reference = interference_density(mode_b, *phases_b, BOX_RADIUS_M, GRID)
    np.testing.assert_allclose(image.values, reference.values, rtol=0,
                               atol=1e-14 * reference.values.max())


def test_admix_swap_symmetry():
    a = (ModeIndex(1, 0), 0.6, (0.3, 0.0))
    b = (ModeIndex(1, 1), 0.4, (-1.1, 0.9))
    img_ab = admix_neighbor(*a, *b, BOX_RADIUS_M, GRID)
    img_ba = admix_neighbor(*b, *a, BOX_RADIUS_M, GRID)
    np.testing.assert_allclose(img_ab.values, img_ba.values, rtol=0,
                               atol=1e-14 * img_ab.values.max())


def test_admix_pure_symmetric_mode():
    mode = ModeIndex(2, 0)
    image = admix_neighbor(mode, 1.0, (0.4, 0.4), mode, 0.0, (0.0, 0.0), BOX_RADIUS_M, GRID)
    reference = mode_density_grid(mode, BOX_RADIUS_M, GRID)
    np.testing.assert_allclose(image.values, reference.values, rtol=0,
                               atol=1e-14 * reference.values.max())


def test_admix_rejects_negative_weights():
    with pytest.raises(ValueError):
        admix_neighbor(ModeIndex(1, 0), -0.2, (0.0, 0.0),
                       ModeIndex(1, 1), 1.0, (0.0, 0.0), BOX_RADIUS_M, GRID)


def test_spin_pattern_identities():
    mode = ModeIndex(2, 1)
    image_a = interference_density(mode, 0.5, -0.5, BOX_RADIUS_M, GRID)
    image_b = interference_density(mode, 2.0, 0.3, BOX_RADIUS_M, GRID)
    same = spin_pattern(image_a, image_a)
    np.testing.assert_allclose(same.values, 0.0, atol=1e-18)
    anti = spin_pattern(image_a, image_b)
    swapped = spin_pattern(image_b, image_a)
    np.testing.assert_allclose(anti.values, -swapped.values, atol=1e-18)
    assert abs(anti.total) < 1e-12
    # scale invariance of each input
    scaled = spin_pattern(DensityImage(GRID, 7.0 * image_a.values), image_b)
    np.testing.assert_allclose(scaled.values, anti.values, atol=1e-15)
    with pytest.raises(ValueError):
        spin_pattern(image_a, DensityImage(GRID, np.zeros_like(image_a.values)))


def test_add_noise_none_is_identity():
    image = interference_density(ModeIndex(1, 1), 0.1, 0.7, BOX_RADIUS_M, GRID)
    out = add_noise(image, NoiseSpec("none"), stream(1, 1))
    assert out is image


def test_add_noise_gaussian_statistics_and_determinism():
    image = DensityImage(GRID, np.zeros((GRID.samples, GRID.samples)))
    noisy_a = add_noise(image, NoiseSpec("gaussian", 0.01), stream(9, 4))
    noisy_b = add_noise(image, NoiseSpec("gaussian", 0.01), stream(9, 4))
    np.testing.assert_array_equal(noisy_a.values, noisy_b.values)
    assert float(noisy_a.values.std()) == pytest.approx(0.01, rel=0.05)
    assert float(noisy_a.values.mean()) == pytest.approx(0.0, abs=0.001)


def test_add_noise_poisson_quantizes():
    image = DensityImage(GRID, np.full((GRID.samples, GRID.samples), 0.5))
    noisy = add_noise(image, NoiseSpec("poisson", 40.0), stream(2, 2))
    counts = noisy.values * 40.0
    np.testing.assert_allclose(counts, np.round(counts), atol=1e-9)
    assert float(noisy.values.mean()) == pytest.approx(0.5, rel=0.05)


def test_noise_spec_validation():
    with pytest.raises(ValueError):
        NoiseSpec("salt", 0.1)
    with pytest.raises(ValueError):
        NoiseSpec("gaussian", -0.1)
