"""Orientation estimators, agreement filtering, and ensemble statistics.

Two independent routes recover the orientation of a lobed density
pattern: the principal axis of the density-weighted quadrupole tensor,
and a template fit of the expected vortex/antivortex interference
pattern.  Realizations where the two disagree beyond a threshold are
rejected; the survivors feed circular statistics (histograms, circular
standard deviation, uniformity tests) and a nonnegative least-squares
decomposition into single-mode density templates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import nnls

from .errors import (
    DegenerateFitError,
    DegenerateOrientationError,
    NumericsError,
    ZeroMassError,
)
from .modes import DensityImage, Grid2D, ModeIndex, mode_amplitude_grid
from .patterns import RealizationRecord, pattern_angle

_DEGENERACY_THRESHOLD = 1e-9
# fraction of total image variance the azimuthal modulation must explain
# before a template fit is trusted
_MODULATION_GAIN_FLOOR = 1e-4


@dataclass(frozen=True)
class QuadrupoleTensor:
    """Density-weighted second moments in pixel coordinates."""

    qxx: float
    qxy: float
    qyy: float

    def eigenvalues(self) -> tuple[float, float]:
        """Eigenvalues sorted descending."""
        mean = 0.5 * (self.qxx + self.qyy)
        dev = math.hypot(0.5 * (self.qxx - self.qyy), self.qxy)
        return (mean + dev, mean - dev)


@dataclass(frozen=True)
class AngleEstimate:
    """An orientation in a fundamental domain, with a quality figure.

    ``quality`` is the relative eigenvalue gap for the quadrupole
    method and the relative residual norm for the template method.
    """

    angle_rad: float
    period_rad: float
    method: str
    quality: float
    low_confidence: bool = False


@dataclass(frozen=True)
class AgreementResult:
    accepted: bool
    difference_rad: float


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative mode weights, reported normalized to unit sum."""

    modes: tuple[ModeIndex, ...]
    weights: tuple[float, ...]
    raw_weights: tuple[float, ...]
    residual: float


@dataclass(frozen=True)
class AngleStats:
    """Histogram and circular moments of relative angles."""

    count: int
    mean_rad: float
    circular_std_rad: float
    period_rad: float
    bin_edges_rad: tuple[float, ...]
    bin_counts: tuple[int, ...]


def wrap_difference(delta_rad: float, period_rad: float) -> float:
    """Wrap an angle difference into [-period/2, period/2)."""
    if period_rad <= 0.0:
        raise ValueError("period must be positive")
    return (delta_rad + 0.5 * period_rad) % period_rad - 0.5 * period_rad


def quadrupole_tensor(image: DensityImage) -> QuadrupoleTensor:
    """Second-moment tensor of an image about its center of mass.

    Negative pixel values (possible after noise is applied) are clamped
    to zero for the mass weighting only; callers keep the raw image.
    Positions are measured in pixels so the tensor scale is independent
    of the physical grid extent.
    """
    weights = np.clip(image.values, 0.0, None)
    total = float(weights.sum())
    if total <= 0.0:
        raise ZeroMassError("image has no positive density")
    xg, yg = image.grid.mesh()
    pixel = image.grid.pixel_size_m
    xp = xg / pixel
    yp = yg / pixel
    cx = float((weights * xp).sum()) / total
    cy = float((weights * yp).sum()) / total
    dx = xp - cx
    dy = yp - cy
    rsq = dx * dx + dy * dy
    qxx = float((weights * (3.0 * dx * dx - rsq)).sum())
    qyy = float((weights * (3.0 * dy * dy - rsq)).sum())
    qxy = float((weights * (3.0 * dx * dy)).sum())
    return QuadrupoleTensor(qxx=qxx, qxy=qxy, qyy=qyy)


def principal_angle(tensor: QuadrupoleTensor, fundamental_period_rad: float) -> AngleEstimate:
    """Orientation of the eigenvector with the larger eigenvalue.

    The angle is reduced into [0, period).  A tensor whose relative
    eigenvalue gap falls below 1e-9 carries no orientation and raises.
    """
    if fundamental_period_rad <= 0.0:
        raise ValueError("fundamental period must be positive")
    hi, lo = tensor.eigenvalues()
    scale = max(abs(hi), abs(lo))
    gap = hi - lo
    if scale == 0.0 or gap < _DEGENERACY_THRESHOLD * scale:
        raise DegenerateOrientationError(
            f"eigenvalue gap {gap:.3e} below threshold at scale {scale:.3e}"
        )
    angle = 0.5 * math.atan2(2.0 * tensor.qxy, tensor.qxx - tensor.qyy)
    return AngleEstimate(
        angle_rad=angle % fundamental_period_rad,
        period_rad=fundamental_period_rad,
        method="quadrupole",
        quality=gap / scale,
    )


class _TemplateProducts:
    """Precomputed template arrays and Gram entries for one mode/grid."""

    __slots__ = (
        "base",
        "cos_part",
        "sin_part",
        "sum_base",
        "sum_cos",
        "sum_sin",
        "gram_bb",
        "gram_cc",
        "gram_ss",
        "gram_bc",
        "gram_bs",
        "gram_cs",
        "pixels",
    )

    def __init__(self, mode: ModeIndex, box_radius_m: float, grid: Grid2D) -> None:
        plus = mode_amplitude_grid(ModeIndex(mode.n, abs(mode.l)), box_radius_m, grid)
        minus = mode_amplitude_grid(ModeIndex(mode.n, -abs(mode.l)), box_radius_m, grid)
        cross = 2.0 * plus * np.conj(minus)
        self.base = np.abs(plus) ** 2 + np.abs(minus) ** 2
        self.cos_part = np.ascontiguousarray(cross.real)
        self.sin_part = np.ascontiguousarray(cross.imag)
        self.sum_base = float(self.base.sum())
        self.sum_cos = float(self.cos_part.sum())
        self.sum_sin = float(self.sin_part.sum())
        self.gram_bb = float((self.base * self.base).sum())
        self.gram_cc = float((self.cos_part * self.cos_part).sum())
        self.gram_ss = float((self.sin_part * self.sin_part).sum())
        self.gram_bc = float((self.base * self.cos_part).sum())
        self.gram_bs = float((self.base * self.sin_part).sum())
        self.gram_cs = float((self.cos_part * self.sin_part).sum())
        self.pixels = self.base.size


@lru_cache(maxsize=64)
def _template_products(mode: ModeIndex, box_radius_m: float, grid: Grid2D) -> _TemplateProducts:
    return _TemplateProducts(mode, box_radius_m, grid)


def _golden_section(fun, lo: float, hi: float, iterations: int = 60) -> float:
    """Minimize a unimodal scalar function on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iterations):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = fun(d)
    return 0.5 * (a + b)


def template_fit_angle(
    image: DensityImage,
    mode: ModeIndex,
    box_radius_m: float,
    grid: Grid2D | None = None,
    residual_threshold: float = 0.5,
) -> AngleEstimate:
    """Fit ``amplitude * pattern(dphi) + offset`` and report the angle.

    The phase difference between the vortex and antivortex components
    is scanned on a fine grid and polished by golden-section search;
    amplitude and offset are solved linearly at each candidate phase.
    The estimate is flagged low-confidence when the fitted amplitude is
    not positive, the relative residual exceeds ``residual_threshold``,
    or the azimuthal modulation explains almost none of the image
    variance (an azimuthally symmetric input).
    """
    if abs(mode.l) < 1:
        raise ValueError("template fit needs a mode with |l| >= 1")
    if grid is None:
        grid = image.grid
    elif grid != image.grid:
        raise ValueError("grid does not match the image grid")
    if box_radius_m <= 0.0:
        raise ValueError("box radius must be positive")

    tmpl = _template_products(mode, box_radius_m, grid)
    y = image.values
    n = float(tmpl.pixels)
    sum_y = float(y.sum())
    sum_yy = float((y * y).sum())
    dot_base = float((y * tmpl.base).sum())
    dot_cos = float((y * tmpl.cos_part).sum())
    dot_sin = float((y * tmpl.sin_part).sum())
    ss_total = max(sum_yy - sum_y * sum_y / n, 0.0)

    def solve(t_dot_y: float, t_sum: float, t_dot_t: float) -> tuple[float, float, float]:
        det = t_dot_t * n - t_sum * t_sum
        if det <= 1e-300:
            return max(sum_yy - sum_y * sum_y / n, 0.0), 0.0, sum_y / n
        amp = (n * t_dot_y - t_sum * sum_y) / det
        off = (t_dot_t * sum_y - t_sum * t_dot_y) / det
        return max(sum_yy - amp * t_dot_y - off * sum_y, 0.0), amp, off

    def residual_at(dphi: float) -> tuple[float, float, float]:
        c = math.cos(dphi)
        s = math.sin(dphi)
        t_dot_y = dot_base + c * dot_cos - s * dot_sin
        t_sum = tmpl.sum_base + c * tmpl.sum_cos - s * tmpl.sum_sin
        t_dot_t = (
            tmpl.gram_bb
            + c * c * tmpl.gram_cc
            + s * s * tmpl.gram_ss
            + 2.0 * c * tmpl.gram_bc
            - 2.0 * s * tmpl.gram_bs
            - 2.0 * c * s * tmpl.gram_cs
        )
        return solve(t_dot_y, t_sum, t_dot_t)

    coarse = np.linspace(-math.pi, math.pi, 721)
    losses = [residual_at(float(p))[0] for p in coarse]
    best = int(np.argmin(losses))
    step = coarse[1] - coarse[0]
    dphi = _golden_section(
        lambda p: residual_at(p)[0], coarse[best] - step, coarse[best] + step
    )
    ss_res, amplitude, _ = residual_at(dphi)
    ss_plain, _, _ = solve(dot_base, tmpl.sum_base, tmpl.gram_bb)

    if ss_total <= 0.0:
        quality = 1.0
        flagged = True
    else:
        quality = math.sqrt(ss_res / ss_total)
        modulation_gain = (ss_plain - ss_res) / ss_total
        flagged = (
            amplitude <= 0.0
            or quality > residual_threshold
            or modulation_gain <= _MODULATION_GAIN_FLOOR
        )
    period = math.pi / abs(mode.l)
    angle = pattern_angle(mode, dphi, 0.0)
    return AngleEstimate(
        angle_rad=angle % period,
        period_rad=period,
        method="template",
        quality=quality,
        low_confidence=flagged,
    )


def agreement_filter(
    first: AngleEstimate, second: AngleEstimate, threshold_rad: float
) -> AgreementResult:
    """Accept a pair iff the circular angle difference is within threshold."""
    if not math.isclose(first.period_rad, second.period_rad, rel_tol=1e-12):
        raise ValueError(
            f"angle domains differ: {first.period_rad} vs {second.period_rad}"
        )
    if threshold_rad < 0.0:
        raise ValueError("threshold must be nonnegative")
    diff = wrap_difference(first.angle_rad - second.angle_rad, first.period_rad)
    return AgreementResult(accepted=abs(diff) <= threshold_rad, difference_rad=diff)


def mode_weight_fit(
    image: DensityImage,
    basis: list[ModeIndex] | tuple[ModeIndex, ...],
    box_radius_m: float,
    grid: Grid2D | None = None,
) -> WeightVector:
    """Nonnegative decomposition into single-mode density templates.

    Templates are the azimuthally symmetric single-mode densities; the
    sign of l is irrelevant because |phi(n, +l)|^2 = |phi(n, -l)|^2, so
    a basis listing both signs of the same mode is rejected.  Weights
    come from a deterministic active-set NNLS solve and are normalized
    to unit sum; the raw weights are kept alongside for diagnostics.
    """
    if not basis:
        raise ValueError("basis must not be empty")
    if grid is None:
        grid = image.grid
    elif grid != image.grid:
        raise ValueError("grid does not match the image grid")
    seen: set[tuple[int, int]] = set()
    for mode in basis:
        key = (mode.n, abs(mode.l))
        if key in seen:
            raise ValueError(f"duplicate basis mode n={mode.n} |l|={abs(mode.l)}")
        seen.add(key)
    if float(image.values.sum()) <= 0.0:
        raise ZeroMassError("image has no mass to decompose")

    columns = [
        np.abs(mode_amplitude_grid(ModeIndex(m.n, abs(m.l)), box_radius_m, grid)).ravel() ** 2
        for m in basis
    ]
    design = np.column_stack(columns)
    target = image.values.ravel().astype(float)
    raw, residual = nnls(design, target)
    total = float(raw.sum())
    if total <= 0.0:
        raise DegenerateFitError("all mode weights vanished in the fit")
    return WeightVector(
        modes=tuple(basis),
        weights=tuple(float(w) / total for w in raw),
        raw_weights=tuple(float(w) for w in raw),
        residual=float(residual),
    )


def _check_pair_domains(pairs) -> float:
    period = pairs[0][0].period_rad
    for a, b in pairs:
        if not (
            math.isclose(a.period_rad, period, rel_tol=1e-12)
            and math.isclose(b.period_rad, period, rel_tol=1e-12)
        ):
            raise ValueError("all estimates must share one fundamental domain")
    return period


def circular_mean_std(values_rad, period_rad: float) -> tuple[float, float]:
    """Circular mean and standard deviation on a domain of given period.

    Angles are mapped onto the unit circle, averaged, and mapped back;
    the standard deviation is sqrt(-2 ln R) rescaled to the domain.
    """
    values = np.asarray(values_rad, dtype=float)
    if values.size == 0:
        raise ValueError("need at least one angle")
    scale = 2.0 * math.pi / period_rad
    z = np.exp(1j * scale * values)
    mean_z = complex(z.mean())
    length = min(abs(mean_z), 1.0)
    mean = math.atan2(mean_z.imag, mean_z.real) / scale
    if length <= 1e-300:
        return mean, math.inf
    std = math.sqrt(-2.0 * math.log(length)) / scale
    return mean, std


def relative_angle_stats(
    pairs: list[tuple[AngleEstimate, AngleEstimate]],
    bin_width_rad: float = math.radians(10.0),
) -> AngleStats:
    """Histogram and circular moments of pairwise angle differences.

    The bin width is rounded so that an integer number of bins tiles
    the domain [-period/2, period/2).
    """
    if not pairs:
        raise ValueError("no angle pairs to analyze")
    if bin_width_rad <= 0.0:
        raise ValueError("bin width must be positive")
    period = _check_pair_domains(pairs)
    diffs = np.array(
        [wrap_difference(a.angle_rad - b.angle_rad, period) for a, b in pairs]
    )
    mean, std = circular_mean_std(diffs, period)
    bins = max(1, round(period / bin_width_rad))
    edges = np.linspace(-0.5 * period, 0.5 * period, bins + 1)
    counts, _ = np.histogram(diffs, bins=edges)
    return AngleStats(
        count=len(pairs),
        mean_rad=mean,
        circular_std_rad=std,
        period_rad=period,
        bin_edges_rad=tuple(float(e) for e in edges),
        bin_counts=tuple(int(c) for c in counts),
    )


@dataclass(frozen=True)
class CloudAnalysis:
    """Both estimators, the filter verdict, and weights for one cloud."""

    angle_fit: AngleEstimate
    angle_quad: AngleEstimate | None
    quad_error: str | None
    agreement: AgreementResult | None
    accepted: bool
    weights: WeightVector | None
    weight_error: str | None


@dataclass(frozen=True)
class RecordAnalysis:
    plus: CloudAnalysis
    minus: CloudAnalysis
    accepted: bool
    relative_angle_rad: float | None


def analyze_cloud(
    image: DensityImage,
    mode: ModeIndex,
    box_radius_m: float,
    basis,
    agreement_threshold_rad: float,
    residual_threshold: float = 0.5,
) -> CloudAnalysis:
    """Run both estimators and the filter on a single cloud image.

    A degenerate quadrupole tensor (empty or symmetric image) is not an
    error at this level; it simply rejects the cloud and the message is
    kept for the report.  The cloud is accepted iff both estimators
    exist, agree within the threshold, and the template fit is not
    flagged low-confidence.
    """
    fit = template_fit_angle(
        image, mode, box_radius_m, residual_threshold=residual_threshold
    )
    try:
        quad = principal_angle(quadrupole_tensor(image), fit.period_rad)
        quad_error = None
    except NumericsError as exc:
        quad = None
        quad_error = str(exc)
    agreement = (
        agreement_filter(quad, fit, agreement_threshold_rad) if quad is not None else None
    )
    accepted = bool(
        agreement is not None and agreement.accepted and not fit.low_confidence
    )
    try:
        weights = mode_weight_fit(image, tuple(basis), box_radius_m)
        weight_error = None
    except NumericsError as exc:
        weights = None
        weight_error = str(exc)
    return CloudAnalysis(
        angle_fit=fit,
        angle_quad=quad,
        quad_error=quad_error,
        agreement=agreement,
        accepted=accepted,
        weights=weights,
        weight_error=weight_error,
    )


def analyze_record(
    record: RealizationRecord,
    basis,
    agreement_threshold_rad: float,
    residual_threshold: float = 0.5,
) -> RecordAnalysis:
    """Analyze both clouds of a realization and their relative angle.

    The relative angle uses the template estimates and exists only when
    both clouds individually pass the agreement filter.
    """
    plus = analyze_cloud(
        record.image_plus,
        record.mode,
        record.box_radius_m,
        basis,
        agreement_threshold_rad,
        residual_threshold,
    )
    minus = analyze_cloud(
        record.image_minus,
        record.mode,
        record.box_radius_m,
        basis,
        agreement_threshold_rad,
        residual_threshold,
    )
    accepted = plus.accepted and minus.accepted
    relative = None
    if accepted:
        relative = wrap_difference(
            plus.angle_fit.angle_rad - minus.angle_fit.angle_rad,
            plus.angle_fit.period_rad,
        )
    return RecordAnalysis(
        plus=plus, minus=minus, accepted=accepted, relative_angle_rad=relative
    )


def kuiper_uniformity(values_rad, period_rad: float) -> tuple[float, float]:
    """Kuiper test of uniformity on a periodic domain.

    Returns the statistic V and an approximate p-value; the test is
    invariant under rotations of the domain, which makes it the right
    uniformity check for angles.
    """
    values = np.asarray(values_rad, dtype=float)
    if values.size < 5:
        raise ValueError("need at least five angles for the uniformity test")
    if period_rad <= 0.0:
        raise ValueError("period must be positive")
    u = np.sort((values % period_rad) / period_rad)
    n = u.size
    grid_hi = np.arange(1, n + 1) / n
    grid_lo = np.arange(0, n) / n
    v = float((grid_hi - u).max() + (u - grid_lo).max())
    lam = (math.sqrt(n) + 0.155 + 0.24 / math.sqrt(n)) * v
    if lam < 0.4:
        return v, 1.0
    total = 0.0
    for j in range(1, 101):
        term = (4.0 * j * j * lam * lam - 1.0) * math.exp(-2.0 * j * j * lam * lam)
        total += term
        if abs(term) < 1e-16:
            break
    return v, min(max(2.0 * total, 0.0), 1.0)
