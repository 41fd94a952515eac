import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinbox import (
    Grid2D,
    ModeIndex,
    NoiseSpec,
    agreement_filter,
    analyze_record,
    circular_mean_std,
    interference_density,
    kuiper_uniformity,
    mode_density_grid,
    mode_weight_fit,
    pattern_angle,
    principal_angle,
    quadrupole_tensor,
    realization,
    relative_angle_stats,
    stream,
    template_fit_angle,
    wrap_difference,
)
from spinbox.analysis import AngleEstimate
from spinbox.errors import (
    DegenerateFitError,
    DegenerateOrientationError,
    ZeroMassError,
)
from spinbox.modes import DensityImage

from conftest import BOX_RADIUS_M

GRID = Grid2D(half_extent_m=BOX_RADIUS_M, samples=128)
MODE = ModeIndex(2, 1)
PERIOD = math.pi


def synth(angle, mode=MODE, grid=GRID):
    """Noise-free pattern whose truth orientation is the given angle."""
    la = abs(mode.l)
    offset = math.pi if la % 2 else 0.0
    dphi = offset - 2 * la * angle
    image = interference_density(mode, dphi, 0.0, BOX_RADIUS_M, grid)
    truth = pattern_angle(mode, dphi, 0.0)
    assert truth == pytest.approx(angle % (math.pi / la), abs=1e-12)
    return image


def angle_error_deg(estimate, truth, period=PERIOD):
    return abs(math.degrees(wrap_difference(estimate - truth, period)))


def test_quadrupole_symmetric_image_degenerate():
    image = mode_density_grid(ModeIndex(1, 0), BOX_RADIUS_M, GRID)
    tensor = quadrupole_tensor(image)
    scale = max(abs(tensor.qxx), abs(tensor.qyy))
    assert abs(tensor.qxx - tensor.qyy) < 1e-9 * scale
    assert abs(tensor.qxy) < 1e-9 * scale
    with pytest.raises(DegenerateOrientationError):
        principal_angle(tensor, PERIOD)


def test_quadrupole_rejects_empty_image():
    with pytest.raises(ZeroMassError):
        quadrupole_tensor(DensityImage(GRID, np.zeros((GRID.samples, GRID.samples))))


def test_quadrupole_ignores_negative_pixels():
    image = synth(0.4)
    tensor = quadrupole_tensor(image)
    dirty = image.values.copy()
    dirty[0, 0] = -1e6 * image.values.max()  # a far-corner negative spike
    tensor_dirty = quadrupole_tensor(DensityImage(GRID, dirty))
    assert tensor_dirty.qxx == pytest.approx(tensor.qxx, rel=1e-12)
    assert tensor_dirty.qxy == pytest.approx(tensor.qxy, rel=1e-12)


def test_quadrupole_translation_invariance():
    # centring on the centre of mass makes the tensor shift-independent
    image = synth(1.1)
    rolled = DensityImage(GRID, np.roll(image.values, (3, -2), axis=(0, 1)))
    a = quadrupole_tensor(image)
    b = quadrupole_tensor(rolled)
    angle_a = principal_angle(a, PERIOD).angle_rad
    angle_b = principal_angle(b, PERIOD).angle_rad
    # rolling wraps a sliver of the pattern to the other side; the
    # orientation must still agree closely
    assert angle_error_deg(angle_b, angle_a) < 0.5


def test_principal_angle_recovers_truth():
    rng = np.random.default_rng(171)
    worst = 0.0
    for _ in range(100):
        angle = float(rng.uniform(0.0, PERIOD))
        estimate = principal_angle(quadrupole_tensor(synth(angle)), PERIOD)
        assert not estimate.low_confidence
        assert 0.0 <= estimate.angle_rad < PERIOD
        worst = max(worst, angle_error_deg(estimate.angle_rad, angle))
    assert worst < 1.0


def test_template_fit_recovers_truth():
    rng = np.random.default_rng(172)
    worst = 0.0
    for _ in range(100):
        angle = float(rng.uniform(0.0, PERIOD))
        estimate = template_fit_angle(synth(angle), MODE, BOX_RADIUS_M)
        assert not estimate.low_confidence
        assert estimate.period_rad == pytest.approx(PERIOD)
        worst = max(worst, angle_error_deg(estimate.angle_rad, angle))
    assert worst < 0.5


def test_estimators_rotation_equivariant():
    # rotating the pattern rotates both estimates by the same amount
    base = 0.37
    shift = 0.6
    quad_a = principal_angle(quadrupole_tensor(synth(base)), PERIOD).angle_rad
    quad_b = principal_angle(quadrupole_tensor(synth(base + shift)), PERIOD).angle_rad
    fit_a = template_fit_angle(synth(base), MODE, BOX_RADIUS_M).angle_rad
    fit_b = template_fit_angle(synth(base + shift), MODE, BOX_RADIUS_M).angle_rad
    assert wrap_difference(quad_b - quad_a, PERIOD) == pytest.approx(shift, abs=math.radians(1.0))
    assert wrap_difference(fit_b - fit_a, PERIOD) == pytest.approx(shift, abs=math.radians(0.5))


def test_template_fit_flags_symmetric_input():
    image = mode_density_grid(ModeIndex(2, 0), BOX_RADIUS_M, GRID)
    estimate = template_fit_angle(image, MODE, BOX_RADIUS_M)
    assert estimate.low_confidence


def test_template_fit_flags_wrong_mode():
    # fitting a (1,1) pattern with (2,1) templates leaves a residual
    # well above the confidence threshold
    image = interference_density(ModeIndex(1, 1), 0.7, 0.0, BOX_RADIUS_M, GRID)
    estimate = template_fit_angle(image, MODE, BOX_RADIUS_M, residual_threshold=0.25)
    assert estimate.low_confidence


def test_template_fit_validates_inputs():
    image = synth(0.2)
    with pytest.raises(ValueError):
        template_fit_angle(image, ModeIndex(1, 0), BOX_RADIUS_M)
    other_grid = Grid2D(half_extent_m=BOX_RADIUS_M, samples=96)
    with pytest.raises(ValueError):
        template_fit_angle(image, MODE, BOX_RADIUS_M, grid=other_grid)
    with pytest.raises(ValueError):
        template_fit_angle(image, MODE, -1.0)


def test_agreement_filter_wraparound():
    def estimate(deg):
        return AngleEstimate(
            angle_rad=math.radians(deg), period_rad=PERIOD, method="test", quality=0.0
        )

    threshold = math.radians(40.0)
    # 1 and 179 degrees are only 2 degrees apart on a 180-degree circle
    result = agreement_filter(estimate(1.0), estimate(179.0), threshold)
    assert result.accepted
    assert abs(math.degrees(result.difference_rad)) == pytest.approx(2.0, abs=1e-9)
    assert agreement_filter(estimate(10.0), estimate(51.0), threshold).accepted is False
    assert agreement_filter(estimate(10.0), estimate(49.9), threshold).accepted is True
    mismatched = AngleEstimate(angle_rad=0.1, period_rad=math.pi / 2, method="x", quality=0.0)
    with pytest.raises(ValueError):
        agreement_filter(estimate(0.0), mismatched, threshold)


def test_wrap_difference_examples():
    assert wrap_difference(math.radians(178.0), PERIOD) == pytest.approx(math.radians(-2.0))
    assert wrap_difference(0.0, PERIOD) == 0.0
    assert wrap_difference(-PERIOD / 2, PERIOD) == pytest.approx(-PERIOD / 2)
    assert wrap_difference(PERIOD / 2, PERIOD) == pytest.approx(-PERIOD / 2)


@given(
    delta=st.floats(min_value=-20.0, max_value=20.0),
    period=st.floats(min_value=0.1, max_value=math.tau),
)
@settings(max_examples=300, deadline=None)
def test_wrap_difference_properties(delta, period):
    wrapped = wrap_difference(delta, period)
    assert -period / 2 <= wrapped < period / 2
    # wrapping changes the value by an integer number of periods
    cycles = (delta - wrapped) / period
    assert cycles == pytest.approx(round(cycles), abs=1e-6)


def test_mode_weight_fit_recovers_density_mixture():
    basis = [ModeIndex(1, 0), ModeIndex(1, 1), ModeIndex(2, 1)]
    t10 = mode_density_grid(ModeIndex(1, 0), BOX_RADIUS_M, GRID).values
    t11 = (
        mode_density_grid(ModeIndex(1, 1), BOX_RADIUS_M, GRID).values
        + mode_density_grid(ModeIndex(1, -1), BOX_RADIUS_M, GRID).values
    ) / 2.0
    image = DensityImage(GRID, 0.6 * t10 + 0.4 * t11)
    result = mode_weight_fit(image, basis, BOX_RADIUS_M)
    weights = dict(zip(result.modes, result.weights))
    assert weights[ModeIndex(1, 0)] == pytest.approx(0.6, abs=0.05)
    assert weights[ModeIndex(1, 1)] == pytest.approx(0.4, abs=0.05)
    assert weights[ModeIndex(2, 1)] == pytest.approx(0.0, abs=0.01)
    assert sum(result.weights) == pytest.approx(1.0, rel=1e-9)
    # exact mixture: residual at rounding level relative to the image norm
    assert result.residual < 1e-10 * np.linalg.norm(image.values)


def test_mode_weight_fit_kkt_conditions():
    # at the NNLS optimum every active weight has zero gradient and
    # every zero weight has nonnegative gradient (up to tolerance)
    image = interference_density(MODE, 1.2, -0.3, BOX_RADIUS_M, GRID)
    basis = [ModeIndex(1, 0), ModeIndex(1, 1), ModeIndex(2, 0), ModeIndex(2, 1), ModeIndex(3, 0)]
    result = mode_weight_fit(image, basis, BOX_RADIUS_M)
    columns = []
    for mode in basis:
        la = abs(mode.l)
        template = mode_density_grid(ModeIndex(mode.n, la), BOX_RADIUS_M, GRID).values
        if la:
            template = (
                template + mode_density_grid(ModeIndex(mode.n, -la), BOX_RADIUS_M, GRID).values
            ) / 2.0
        columns.append(template.ravel())
    design = np.column_stack(columns)
    target = image.values.ravel()
    gradient = design.T @ (design @ np.array(result.raw_weights) - target)
    scale = float(np.abs(design.T @ target).max())
    for weight, grad in zip(result.raw_weights, gradient):
        assert weight >= 0.0
        if weight > 1e-12:
            assert abs(grad) <= 1e-8 * scale
        else:
            assert grad >= -1e-8 * scale


def test_mode_weight_fit_dominant_mode_on_pattern():
    image = interference_density(MODE, 0.4, 2.2, BOX_RADIUS_M, GRID)
    basis = [ModeIndex(1, 0), ModeIndex(1, 1), ModeIndex(2, 0), ModeIndex(2, 1), ModeIndex(3, 0)]
    result = mode_weight_fit(image, basis, BOX_RADIUS_M)
    weights = dict(zip(result.modes, result.weights))
    assert max(weights, key=weights.get) == ModeIndex(2, 1)
    assert weights[ModeIndex(2, 1)] > 0.9


def test_mode_weight_fit_residual_shrinks_with_generating_mode():
    image = interference_density(ModeIndex(3, 1), -0.7, 0.9, BOX_RADIUS_M, GRID)
    without = mode_weight_fit(image, [ModeIndex(1, 0), ModeIndex(1, 1)], BOX_RADIUS_M)
    with_mode = mode_weight_fit(
        image, [ModeIndex(1, 0), ModeIndex(1, 1), ModeIndex(3, 1)], BOX_RADIUS_M
    )
    assert with_mode.residual <= without.residual + 1e-12


def test_mode_weight_fit_validation():
    image = synth(0.5)
    with pytest.raises(ValueError):
        mode_weight_fit(image, [], BOX_RADIUS_M)
    with pytest.raises(ValueError):
        # (1, 1) and (1, -1) collapse onto the same template
        mode_weight_fit(image, [ModeIndex(1, 1), ModeIndex(1, -1)], BOX_RADIUS_M)
    with pytest.raises(ZeroMassError):
        empty = DensityImage(GRID, np.zeros((GRID.samples, GRID.samples)))
        mode_weight_fit(empty, [ModeIndex(1, 0)], BOX_RADIUS_M)


def test_circular_mean_std_concentrated_and_uniform():
    concentrated = np.array([0.1, 0.12, 0.09, 0.11])
    mean, std = circular_mean_std(concentrated, PERIOD)
    assert mean == pytest.approx(0.105, abs=1e-3)
    assert std < math.radians(1.0)
    # evenly spread angles have no meaningful mean and huge std
    spread = np.linspace(0.0, PERIOD, 8, endpoint=False)
    _, std_spread = circular_mean_std(spread, PERIOD)
    assert std_spread > PERIOD


def test_circular_mean_std_wraps_cluster_across_zero():
    cluster = np.array([PERIOD - 0.05, 0.05, PERIOD - 0.02, 0.02])
    mean, std = circular_mean_std(cluster, PERIOD)
    distance = abs(wrap_difference(mean - 0.0, PERIOD))
    assert distance < 0.03
    assert std < 0.1


def test_relative_angle_stats_bins_and_counts():
    def estimate(rad):
        return AngleEstimate(angle_rad=rad, period_rad=PERIOD, method="t", quality=0.0)

    pairs = [
        (estimate(0.0), estimate(0.02)),
        (estimate(1.0), estimate(1.01)),
        (estimate(2.0), estimate(2.2)),
        (estimate(0.5), estimate(PERIOD - 0.05)),
    ]
    stats = relative_angle_stats(pairs)
    assert stats.count == 4
    assert stats.period_rad == pytest.approx(PERIOD)
    assert stats.bin_edges_rad[0] == pytest.approx(-PERIOD / 2)
    assert stats.bin_edges_rad[-1] == pytest.approx(PERIOD / 2)
    assert len(stats.bin_counts) == len(stats.bin_edges_rad) - 1
    assert int(np.sum(stats.bin_counts)) == 4
    assert len(stats.bin_counts) == 18  # 10 degree bins on a 180 degree domain


def test_kuiper_uniformity_calibration():
    rng = np.random.default_rng(99)
    uniform = rng.uniform(0.0, PERIOD, 400)
    _, p_uniform = kuiper_uniformity(uniform, PERIOD)
    assert p_uniform > 0.05
    clustered = rng.normal(0.7, 0.05, 400) % PERIOD
    _, p_clustered = kuiper_uniformity(clustered, PERIOD)
    assert p_clustered < 1e-6
    # rotation invariance of the statistic
    v1, _ = kuiper_uniformity(uniform, PERIOD)
    v2, _ = kuiper_uniformity((uniform + 0.9) % PERIOD, PERIOD)
    assert v1 == pytest.approx(v2, abs=0.02)
    with pytest.raises(ValueError):
        kuiper_uniformity(np.array([0.1, 0.2]), PERIOD)


def test_analyze_record_noise_free_acceptance():
    record = realization(MODE, 2.5, BOX_RADIUS_M, GRID, NoiseSpec("none"), stream(61, 2))
    assert record.draw.pair_count > 0
    basis = [ModeIndex(1, 0), ModeIndex(1, 1), ModeIndex(2, 1)]
    result = analyze_record(record, basis, math.radians(40.0))
    assert result.accepted
    assert result.plus.accepted and result.minus.accepted
    assert angle_error_deg(result.plus.angle_fit.angle_rad, record.truth_angle_plus) < 0.5
    assert angle_error_deg(result.minus.angle_fit.angle_rad, record.truth_angle_minus) < 0.5
    truth_rel = wrap_difference(record.truth_angle_plus - record.truth_angle_minus, PERIOD)
    assert abs(math.degrees(result.relative_angle_rad - truth_rel)) < 1.0
    weights = dict(zip(result.plus.weights.modes, result.plus.weights.weights))
    assert max(weights, key=weights.get) == MODE


def test_analyze_record_empty_cloud_rejected():
    # pair_count 0 gives blank images: rejected, not an exception
    found = None
    for i in range(200):
        record = realization(MODE, 0.3, BOX_RADIUS_M, GRID, NoiseSpec("none"), stream(62, i))
        if record.draw.pair_count == 0:
            found = record
            break
    assert found is not None
    result = analyze_record(found, [MODE], math.radians(40.0))
    assert not result.accepted
    assert result.relative_angle_rad is None
