"""Command-line front end: spectrum, modes, simulate, analyze.

All four subcommands consume one INI configuration (built-in defaults
when --config is omitted), write delimited outputs plus rendered PNG
figures under --out, and finish with a manifest.csv of content hashes.
Given one config and seed the manifest is byte-identical across reruns
and across --threads settings.

Exit codes: 0 success, 2 configuration/usage, 3 data or I/O, 4 numerics.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .analysis import (
    CloudAnalysis,
    analyze_record,
    kuiper_uniformity,
    relative_angle_stats,
    wrap_difference,
)
from .config import RunConfig, default_config_text, parse_config
from .constants import PLANCK
from .errors import ConfigError, DataFormatError, NumericsError
from .gridio import (
    fmt,
    load_realization_dir,
    write_manifest,
    write_matrix_csv,
    write_pgm,
    write_realization_dir,
    write_table_csv,
    write_text,
)
from .instability import instability_rate, resonance_positions, spectrum_scan
from .modes import ModeIndex, energy_2d, mode_density_grid
from .patterns import realization
from .rngstream import stream

_NAN = float("nan")
_RENDER_MODES = (
    ModeIndex(1, 0),
    ModeIndex(1, 1),
    ModeIndex(2, 0),
    ModeIndex(2, 1),
    ModeIndex(3, 0),
)


def _seed_value(text: str) -> int:
    try:
        seed = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer: {text!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return seed


def _thread_count(text: str) -> int:
    try:
        count = int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"thread count must be an integer: {text!r}") from None
    if count < 1:
        raise argparse.ArgumentTypeError("thread count must be at least 1")
    return count


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", metavar="PATH", help="INI run configuration (defaults when omitted)"
    )
    common.add_argument(
        "--out", metavar="DIR", default="spinbox_out", help="output directory"
    )
    common.add_argument(
        "--seed", metavar="U64", type=_seed_value, help="override the [mc] seed"
    )
    common.add_argument(
        "--threads", metavar="N", type=_thread_count, default=1,
        help="worker threads for realization generation and analysis",
    )
    common.add_argument(
        "--format", choices=("csv", "pgm", "both"), default="csv",
        help="image file format for stored density grids",
    )
    common.add_argument(
        "--no-figures", action="store_true", help="skip PNG figure rendering"
    )
    parser = argparse.ArgumentParser(
        prog="spinbox",
        description="Spin-2 condensate box-mode instability and pattern toolkit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser(
        "spectrum", parents=[common],
        help="instability-rate table over the q grid plus resonance positions",
    )
    sub.add_parser(
        "modes", parents=[common], help="box eigenmode density profiles and energies"
    )
    sub.add_parser(
        "simulate", parents=[common],
        help="synthesize realizations per field and run the analysis pipeline",
    )
    analyze = sub.add_parser(
        "analyze", parents=[common], help="re-analyze stored realization directories"
    )
    analyze.add_argument("input_dir", metavar="INPUT_DIR")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


def _dispatch(args) -> int:
    if args.config is not None:
        try:
            with open(args.config, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as exc:
            raise ConfigError(
                f"cannot read config file {args.config}: {exc.strerror or exc}"
            ) from None
        cfg = parse_config(text, source=args.config)
    else:
        text = default_config_text()
        cfg = parse_config(text, source="<defaults>")
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    os.makedirs(args.out, exist_ok=True)
    if args.command == "spectrum":
        return cmd_spectrum(cfg, args, text)
    if args.command == "modes":
        return cmd_modes(cfg, args, text)
    if args.command == "simulate":
        return cmd_simulate(cfg, args, text)
    return cmd_analyze(cfg, args, text)


def _finish(out_dir: str, files: list, config_text: str) -> None:
    write_text(os.path.join(out_dir, "config_used.ini"), config_text)
    files.append("config_used.ini")
    write_manifest(out_dir, files)
    print(f"wrote {len(files)} files + manifest under {out_dir}")


def cmd_spectrum(cfg: RunConfig, args, config_text: str) -> int:
    params = cfg.system_params()
    modes = cfg.basis
    q_hz = cfg.scan_q_values_hz()
    rows = spectrum_scan(params, modes, q_hz * PLANCK)
    files = []

    header = ["q_hz"] + [f"rate_{mode.label}_hz" for mode in modes]
    table = [(q, *row.rates_hz) for q, row in zip(q_hz, rows)]
    write_table_csv(os.path.join(args.out, "spectrum.csv"), header, table)
    files.append("spectrum.csv")

    positions = resonance_positions(params, modes)
    ordered = sorted(positions.items(), key=lambda item: -item[1])
    print("resonances (q/h where each mode is parametrically resonant):")
    res_rows = []
    for mode, q_j in ordered:
        print(f"  n={mode.n} l={mode.l}: {q_j / PLANCK:+.3f} Hz")
        res_rows.append((mode.n, mode.l, q_j / PLANCK))
    write_table_csv(
        os.path.join(args.out, "resonances.csv"),
        ["mode_n", "mode_l", "q_hz"],
        res_rows,
    )
    files.append("resonances.csv")

    if not args.no_figures:
        from . import figures

        rates = np.array([row.rates_hz for row in rows])
        series = [
            (f"n={mode.n} l={mode.l}", rates[:, i]) for i, mode in enumerate(modes)
        ]
        marks = [(f"({mode.n},{mode.l})", q_j / PLANCK) for mode, q_j in ordered]
        figures.spectrum_figure(os.path.join(args.out, "spectrum.png"), q_hz, series, marks)
        files.append("spectrum.png")
    _finish(args.out, files, config_text)
    return 0


def cmd_modes(cfg: RunConfig, args, config_text: str) -> int:
    grid = cfg.grid()
    files = []
    energy_rows = []
    panels = []
    for mode in _RENDER_MODES:
        energy_j = energy_2d(mode, cfg.box_radius_m, cfg.mass_kg)
        energy_hz = energy_j / PLANCK
        image = mode_density_grid(mode, cfg.box_radius_m, grid)
        print(f"  n={mode.n} |l|={mode.l}: {energy_hz:.3f} Hz")
        energy_rows.append((mode.n, mode.l, energy_hz, -energy_hz))
        if args.format in ("csv", "both"):
            name = f"density_{mode.label}.csv"
            write_matrix_csv(os.path.join(args.out, name), image.values)
            files.append(name)
        if args.format in ("pgm", "both"):
            name = f"density_{mode.label}.pgm"
            write_pgm(os.path.join(args.out, name), image)
            files.append(name)
        panels.append((f"n={mode.n} |l|={mode.l}", image, energy_hz))
    write_table_csv(
        os.path.join(args.out, "energies.csv"),
        ["mode_n", "mode_l", "energy_hz", "resonance_q_hz"],
        energy_rows,
    )
    files.append("energies.csv")
    if not args.no_figures:
        from . import figures

        figures.modes_figure(os.path.join(args.out, "modes.png"), panels)
        files.append("modes.png")
    _finish(args.out, files, config_text)
    return 0


@dataclass
class _GroupSummary:
    label: str
    total: int
    accepted: int
    squeeze_mean: float
    mean_deg: float
    std_deg: float
    kuiper_p_up: float
    kuiper_p_down: float
    centers_deg: tuple
    counts: tuple


def _cloud_row(ident: str, cloud: CloudAnalysis, weight_count: int) -> tuple:
    quad_deg = (
        math.degrees(cloud.angle_quad.angle_rad) if cloud.angle_quad is not None else _NAN
    )
    diff_deg = (
        math.degrees(cloud.agreement.difference_rad)
        if cloud.agreement is not None
        else _NAN
    )
    if cloud.weights is not None:
        weights = cloud.weights.weights
    else:
        weights = (_NAN,) * weight_count
    return (
        ident,
        quad_deg,
        math.degrees(cloud.angle_fit.angle_rad),
        diff_deg,
        cloud.accepted,
        *weights,
    )


def _write_group_analysis(out_root: str, label: str, results, cfg: RunConfig):
    """Write per-realization analysis files for one field/group.

    results is a list of (index, record, RecordAnalysis) tuples; the
    same writer serves simulate and analyze so re-analysis reproduces
    the embedded results byte for byte.
    """
    periods = {math.pi / abs(record.mode.l) for _, record, _ in results}
    if len(periods) != 1:
        raise DataFormatError(f"{label}: records mix different pattern periods")
    period = periods.pop()
    group_dir = os.path.join(out_root, *label.split("/"))
    os.makedirs(group_dir, exist_ok=True)
    files = []

    weight_header = [f"weight_{mode.label}" for mode in cfg.basis]
    analysis_rows = []
    relative_rows = []
    for index, record, res in results:
        analysis_rows.append(_cloud_row(f"{index:05d}_plus", res.plus, len(cfg.basis)))
        analysis_rows.append(_cloud_row(f"{index:05d}_minus", res.minus, len(cfg.basis)))
        truth_rel = wrap_difference(
            record.truth_angle_plus - record.truth_angle_minus, period
        )
        relative_rows.append(
            (
                f"{index:05d}",
                math.degrees(record.truth_angle_plus),
                math.degrees(record.truth_angle_minus),
                math.degrees(truth_rel),
                math.degrees(res.plus.angle_fit.angle_rad),
                math.degrees(res.minus.angle_fit.angle_rad),
                math.degrees(res.relative_angle_rad) if res.accepted else _NAN,
                res.accepted,
            )
        )
    write_table_csv(
        os.path.join(group_dir, "analysis.csv"),
        ["id", "angle_quad_deg", "angle_fit_deg", "diff_deg", "accepted"] + weight_header,
        analysis_rows,
    )
    files.append(f"{label}/analysis.csv")
    write_table_csv(
        os.path.join(group_dir, "relative.csv"),
        [
            "id",
            "truth_up_deg",
            "truth_down_deg",
            "truth_relative_deg",
            "angle_up_deg",
            "angle_down_deg",
            "relative_deg",
            "accepted",
        ],
        relative_rows,
    )
    files.append(f"{label}/relative.csv")

    bins = max(1, round(period / cfg.histogram_bin_rad))
    edges = np.linspace(-0.5 * period, 0.5 * period, bins + 1)
    accepted = [res for _, _, res in results if res.accepted]
    if accepted:
        pairs = [(res.plus.angle_fit, res.minus.angle_fit) for res in accepted]
        stats = relative_angle_stats(pairs, cfg.histogram_bin_rad)
        counts = stats.bin_counts
        edges = np.array(stats.bin_edges_rad)
        mean_deg = math.degrees(stats.mean_rad)
        std_deg = math.degrees(stats.circular_std_rad)
    else:
        counts = (0,) * bins
        mean_deg = _NAN
        std_deg = _NAN
    centers_deg = tuple(
        math.degrees(0.5 * (lo + hi)) for lo, hi in zip(edges[:-1], edges[1:])
    )
    write_table_csv(
        os.path.join(group_dir, "histogram.csv"),
        ["bin_center_deg", "count"],
        list(zip(centers_deg, counts)),
    )
    files.append(f"{label}/histogram.csv")

    up_angles = [res.plus.angle_fit.angle_rad for res in accepted]
    down_angles = [res.minus.angle_fit.angle_rad for res in accepted]
    orient_edges = np.linspace(0.0, period, bins + 1)
    count_up, _ = np.histogram(up_angles, bins=orient_edges)
    count_down, _ = np.histogram(down_angles, bins=orient_edges)
    orient_centers = [
        math.degrees(0.5 * (lo + hi))
        for lo, hi in zip(orient_edges[:-1], orient_edges[1:])
    ]
    write_table_csv(
        os.path.join(group_dir, "orientation_histogram.csv"),
        ["bin_center_deg", "count_up", "count_down"],
        list(zip(orient_centers, count_up, count_down)),
    )
    files.append(f"{label}/orientation_histogram.csv")

    p_up = kuiper_uniformity(up_angles, period)[1] if len(up_angles) >= 5 else _NAN
    p_down = kuiper_uniformity(down_angles, period)[1] if len(down_angles) >= 5 else _NAN
    squeezes = [record.squeeze for _, record, _ in results]
    summary = _GroupSummary(
        label=label,
        total=len(results),
        accepted=len(accepted),
        squeeze_mean=float(np.mean(squeezes)) if squeezes else _NAN,
        mean_deg=mean_deg,
        std_deg=std_deg,
        kuiper_p_up=p_up,
        kuiper_p_down=p_down,
        centers_deg=centers_deg,
        counts=tuple(int(c) for c in counts),
    )
    return files, summary


def _render_group_figures(out_dir: str, summaries, trend_rows, files) -> None:
    from . import figures

    entries = [
        (s.label, list(s.centers_deg), list(s.counts), s.std_deg) for s in summaries
    ]
    figures.histograms_figure(os.path.join(out_dir, "histograms.png"), entries)
    files.append("histograms.png")
    figures.trend_figure(os.path.join(out_dir, "trend.png"), trend_rows)
    files.append("trend.png")


def cmd_simulate(cfg: RunConfig, args, config_text: str) -> int:
    grid = cfg.grid()
    energy_j = energy_2d(cfg.pump_mode, cfg.box_radius_m, cfg.mass_kg)
    omega_j = cfg.omega_hz * PLANCK
    points = cfg.simulate_points()
    labels = [point.label for point in points]
    if len(set(labels)) != len(labels):
        raise ConfigError(f"{cfg.source}: simulate fields must be distinct")

    squeezes = []
    for point in points:
        if cfg.squeeze is not None:
            s = cfg.squeeze
        else:
            rate_hz = instability_rate(energy_j, point.zeeman_j, omega_j)
            s = 2.0 * math.pi * rate_hz * cfg.hold_time_s
        if s > 12.0:
            raise ConfigError(
                f"{cfg.source}: squeeze {s:.2f} at {point.label} exceeds the supported"
                " maximum of 12; reduce hold_time_ms or omega_hz"
            )
        squeezes.append(s)

    tasks = [
        (pi, ri) for pi in range(len(points)) for ri in range(cfg.realizations)
    ]

    def run_one(task):
        pi, ri = task
        rng = stream(cfg.seed, pi * cfg.realizations + ri)
        record = realization(
            cfg.pump_mode, squeezes[pi], cfg.box_radius_m, grid, cfg.noise, rng
        )
        result = analyze_record(
            record, cfg.basis, cfg.agreement_threshold_rad, cfg.residual_threshold
        )
        return pi, ri, record, result

    outputs = {}
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            for pi, ri, record, result in pool.map(run_one, tasks):
                outputs[(pi, ri)] = (record, result)
    else:
        for task in tasks:
            pi, ri, record, result = run_one(task)
            outputs[(pi, ri)] = (record, result)

    files = []
    summaries = []
    trend_rows = []
    trend_table = []
    for pi, point in enumerate(points):
        results = []
        for ri in range(cfg.realizations):
            record, result = outputs[(pi, ri)]
            rel_dir = f"{point.label}/real_{ri:05d}"
            names = write_realization_dir(
                os.path.join(args.out, point.label, f"real_{ri:05d}"),
                ri,
                record,
                image_format=args.format,
                store_images=cfg.store_images,
            )
            files.extend(f"{rel_dir}/{name}" for name in names)
            results.append((ri, record, result))
        group_files, summary = _write_group_analysis(args.out, point.label, results, cfg)
        files.extend(group_files)
        summaries.append(summary)
        q_hz = point.zeeman_j / PLANCK
        field = point.field_gauss if point.field_gauss is not None else _NAN
        trend_table.append(
            (
                point.label,
                field,
                q_hz,
                squeezes[pi],
                summary.total,
                summary.accepted,
                summary.mean_deg,
                summary.std_deg,
                summary.kuiper_p_up,
                summary.kuiper_p_down,
            )
        )
        trend_rows.append(
            (point.label, q_hz, squeezes[pi], summary.std_deg,
             summary.accepted / summary.total if summary.total else _NAN)
        )
        std_text = (
            f"{summary.std_deg:.1f} deg" if math.isfinite(summary.std_deg) else "n/a"
        )
        print(
            f"{point.label}: s={squeezes[pi]:.3f}, accepted"
            f" {summary.accepted}/{summary.total}, rel-angle std {std_text}"
        )
    write_table_csv(
        os.path.join(args.out, "trend.csv"),
        [
            "label",
            "field_gauss",
            "q_hz",
            "squeeze",
            "realizations",
            "accepted",
            "mean_deg",
            "circular_std_deg",
            "kuiper_p_up",
            "kuiper_p_down",
        ],
        trend_table,
    )
    files.append("trend.csv")
    if not args.no_figures:
        _render_group_figures(args.out, summaries, trend_rows, files)
    _finish(args.out, files, config_text)
    return 0


def cmd_analyze(cfg: RunConfig, args, config_text: str) -> int:
    input_dir = args.input_dir
    if not os.path.isdir(input_dir):
        raise DataFormatError(f"{input_dir}: not a directory")
    record_dirs = []
    for root, dirs, names in os.walk(input_dir):
        dirs.sort()
        if "params.cfg" in names:
            record_dirs.append(root)
            dirs[:] = []
    record_dirs.sort()
    if not record_dirs:
        raise DataFormatError(
            f"{input_dir}: no realization directories (params.cfg) found"
        )

    errors = []
    loaded = []
    for record_dir in record_dirs:
        try:
            index, record = load_realization_dir(record_dir)
        except DataFormatError as exc:
            errors.append(str(exc))
            continue
        parent = os.path.relpath(os.path.dirname(record_dir), input_dir)
        label = "root" if parent == os.curdir else parent.replace(os.sep, "/")
        loaded.append((label, index, record))

    def run_one(item):
        label, index, record = item
        result = analyze_record(
            record, cfg.basis, cfg.agreement_threshold_rad, cfg.residual_threshold
        )
        return label, index, record, result

    analyzed = []
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            analyzed = list(pool.map(run_one, loaded))
    else:
        analyzed = [run_one(item) for item in loaded]

    groups = {}
    for label, index, record, result in analyzed:
        groups.setdefault(label, []).append((index, record, result))

    files = []
    summaries = []
    group_rows = []
    trend_rows = []
    for label in sorted(groups):
        results = sorted(groups[label], key=lambda item: item[0])
        try:
            group_files, summary = _write_group_analysis(args.out, label, results, cfg)
        except DataFormatError as exc:
            errors.append(str(exc))
            continue
        files.extend(group_files)
        summaries.append(summary)
        group_rows.append(
            (
                label,
                summary.total,
                summary.accepted,
                summary.squeeze_mean,
                summary.mean_deg,
                summary.std_deg,
                summary.kuiper_p_up,
                summary.kuiper_p_down,
            )
        )
        trend_rows.append(
            (label, _NAN, summary.squeeze_mean, summary.std_deg,
             summary.accepted / summary.total if summary.total else _NAN)
        )
        print(f"{label}: {summary.total} records, accepted {summary.accepted}")
    write_table_csv(
        os.path.join(args.out, "groups.csv"),
        [
            "label",
            "records",
            "accepted",
            "squeeze_mean",
            "mean_deg",
            "circular_std_deg",
            "kuiper_p_up",
            "kuiper_p_down",
        ],
        group_rows,
    )
    files.append("groups.csv")
    if not args.no_figures and summaries:
        _render_group_figures(args.out, summaries, trend_rows, files)
    _finish(args.out, files, config_text)
    for message in errors:
        print(f"error: {message}", file=sys.stderr)
    if errors:
        print(f"{len(errors)} input error(s)", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
