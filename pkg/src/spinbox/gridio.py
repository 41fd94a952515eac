"""File formats: round-trip CSV tables, ASCII graymaps, record layout.

All writers emit LF line endings and shortest round-trip float text
(``repr``), so rewriting identical data gives identical bytes; the
output manifest relies on that.  Readers raise DataFormatError naming
the file and, where meaningful, the line.
"""

from __future__ import annotations

import hashlib
import math
import os
from configparser import ConfigParser, Error as ParserError

import numpy as np

from .errors import DataFormatError
from .modes import DensityImage, Grid2D, ModeIndex
from .patterns import NoiseSpec, RealizationRecord
from .phases import PairPhaseDraw

PGM_MAXVAL = 65535
_PGM_VALUES_PER_LINE = 11  # keeps every line comfortably under 70 chars


def fmt(value) -> str:
    """Shortest text that round-trips the value exactly."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)


def read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise DataFormatError(f"{path}: cannot read: {exc.strerror or exc}") from None


def write_table_csv(path: str, header, rows) -> None:
    """Write a CSV table; cells are formatted with fmt() unless str."""
    lines = [",".join(header)]
    width = len(header)
    for row in rows:
        if len(row) != width:
            raise ValueError(f"row width {len(row)} does not match header {width}")
        lines.append(",".join(cell if isinstance(cell, str) else fmt(cell) for cell in row))
    write_text(path, "\n".join(lines) + "\n")


def read_table_csv(path: str) -> tuple:
    """Read a CSV table back as (header, list of string rows)."""
    text = read_text(path)
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DataFormatError(f"{path}:1: missing header row")
    header = lines[0].split(",")
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise DataFormatError(
                f"{path}:{number}: expected {len(header)} fields, found {len(cells)}"
            )
        rows.append(cells)
    return header, rows


def write_matrix_csv(path: str, values: np.ndarray) -> None:
    """Write a 2D float array with generated c-column headers."""
    matrix = np.asarray(values, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("matrix CSV needs a 2D array")
    header = ",".join(f"c{j:03d}" for j in range(matrix.shape[1]))
    lines = [header]
    for row in matrix:
        lines.append(",".join(repr(float(v)) for v in row))
    write_text(path, "\n".join(lines) + "\n")


def read_matrix_csv(path: str) -> np.ndarray:
    text = read_text(path)
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DataFormatError(f"{path}:1: missing header row")
    width = len(lines[0].split(","))
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != width:
            raise DataFormatError(
                f"{path}:{number}: expected {width} fields, found {len(cells)}"
            )
        try:
            rows.append([float(cell) for cell in cells])
        except ValueError:
            raise DataFormatError(f"{path}:{number}: non-numeric value") from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return np.array(rows, dtype=float)


def write_pgm(path: str, image: DensityImage) -> None:
    """ASCII P2 graymap with a linear min-max rescale to 0..65535.

    The rescale parameters and pixel pitch ride along in a comment so
    the density values can be reconstructed (up to quantization).
    """
    values = image.values
    lo = float(values.min())
    hi = float(values.max())
    if hi > lo:
        levels = np.rint((values - lo) / (hi - lo) * PGM_MAXVAL).astype(np.int64)
    else:
        levels = np.zeros(values.shape, dtype=np.int64)
    pixel_um = image.grid.pixel_size_m * 1e6
    lines = [
        "P2",
        f"# density min={fmt(lo)} max={fmt(hi)} pixel_um={fmt(pixel_um)}",
        f"{values.shape[1]} {values.shape[0]}",
        str(PGM_MAXVAL),
    ]
    flat = levels.ravel()
    for start in range(0, flat.size, _PGM_VALUES_PER_LINE):
        lines.append(" ".join(str(v) for v in flat[start : start + _PGM_VALUES_PER_LINE]))
    write_text(path, "\n".join(lines) + "\n")


def read_pgm(path: str) -> tuple:
    """Read a P2 graymap written by write_pgm.

    Returns (density array, metadata dict with min/max/pixel_um).
    """
    text = read_text(path)
    meta = {}
    tokens = []
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("#"):
            for part in stripped[1:].split():
                if "=" in part:
                    key, _, raw = part.partition("=")
                    try:
                        meta[key] = float(raw)
                    except ValueError:
                        raise DataFormatError(
                            f"{path}:{number}: bad metadata value {part!r}"
                        ) from None
            continue
        for token in stripped.split():
            tokens.append((token, number))
    if not tokens or tokens[0][0] != "P2":
        raise DataFormatError(f"{path}:1: not an ASCII P2 graymap")
    if len(tokens) < 4:
        raise DataFormatError(f"{path}: truncated graymap header")
    try:
        width = int(tokens[1][0])
        height = int(tokens[2][0])
        maxval = int(tokens[3][0])
    except ValueError:
        raise DataFormatError(f"{path}:{tokens[1][1]}: bad graymap dimensions") from None
    if width <= 0 or height <= 0:
        raise DataFormatError(f"{path}:{tokens[1][1]}: bad graymap dimensions")
    if maxval != PGM_MAXVAL:
        raise DataFormatError(f"{path}:{tokens[3][1]}: expected maxval {PGM_MAXVAL}")
    body = tokens[4:]
    if len(body) != width * height:
        raise DataFormatError(
            f"{path}: expected {width * height} pixels, found {len(body)}"
        )
    levels = np.empty(width * height, dtype=float)
    for i, (token, number) in enumerate(body):
        try:
            value = int(token)
        except ValueError:
            raise DataFormatError(f"{path}:{number}: non-integer pixel {token!r}") from None
        if not 0 <= value <= maxval:
            raise DataFormatError(f"{path}:{number}: pixel {value} out of range")
        levels[i] = value
    levels = levels.reshape(height, width)
    if "min" in meta and "max" in meta:
        density = meta["min"] + levels / PGM_MAXVAL * (meta["max"] - meta["min"])
    else:
        density = levels
    return density, meta


_PARAM_KEYS = (
    "index",
    "mode",
    "squeeze",
    "box_radius_um",
    "grid_extent_um",
    "grid_samples",
    "noise",
    "noise_scale",
)

_TRUTH_COLUMNS = (
    "phi_vortex_up",
    "phi_antivortex_up",
    "phi_vortex_down",
    "phi_antivortex_down",
    "pair_count",
    "truth_angle_up_rad",
    "truth_angle_down_rad",
)


def write_realization_dir(
    dir_path: str,
    index: int,
    record: RealizationRecord,
    image_format: str = "csv",
    store_images: bool = True,
) -> list:
    """Write one realization directory: params.cfg, truth.csv, images.

    Returns the file names created inside dir_path, in write order.
    """
    os.makedirs(dir_path, exist_ok=True)
    grid = record.image_plus.grid
    param_lines = [
        "[realization]",
        f"index = {index}",
        f"mode = {record.mode.n},{record.mode.l}",
        f"squeeze = {fmt(record.squeeze)}",
        f"box_radius_um = {fmt(record.box_radius_m * 1e6)}",
        f"grid_extent_um = {fmt(grid.half_extent_m * 1e6)}",
        f"grid_samples = {grid.samples}",
        f"noise = {record.noise.kind}",
        f"noise_scale = {fmt(record.noise.scale)}",
    ]
    write_text(os.path.join(dir_path, "params.cfg"), "\n".join(param_lines) + "\n")
    draw = record.draw
    truth_row = (
        draw.phi_vortex_up,
        draw.phi_antivortex_up,
        draw.phi_vortex_down,
        draw.phi_antivortex_down,
        draw.pair_count,
        record.truth_angle_plus,
        record.truth_angle_minus,
    )
    write_table_csv(os.path.join(dir_path, "truth.csv"), _TRUTH_COLUMNS, [truth_row])
    files = ["params.cfg", "truth.csv"]
    if not store_images:
        return files
    for name, image in (("plus", record.image_plus), ("minus", record.image_minus)):
        if image_format in ("csv", "both"):
            write_matrix_csv(os.path.join(dir_path, f"{name}.csv"), image.values)
            files.append(f"{name}.csv")
        if image_format in ("pgm", "both"):
            write_pgm(os.path.join(dir_path, f"{name}.pgm"), image)
            files.append(f"{name}.pgm")
    return files


def _field_error(path: str, key: str, reason: str):
    raise DataFormatError(f"{path}: {key}: {reason}")


def _parse_float(path: str, key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        _field_error(path, key, f"not a number: {raw!r}")
    if not math.isfinite(value):
        _field_error(path, key, "must be finite")
    return value


def _parse_int(path: str, key: str, raw: str) -> int:
    try:
        return int(raw, 10)
    except ValueError:
        _field_error(path, key, f"not an integer: {raw!r}")


def _load_truth(dir_path: str):
    path = os.path.join(dir_path, "truth.csv")
    header, rows = read_table_csv(path)
    if tuple(header) != _TRUTH_COLUMNS:
        raise DataFormatError(f"{path}:1: expected columns {','.join(_TRUTH_COLUMNS)}")
    if len(rows) != 1:
        raise DataFormatError(f"{path}: expected exactly one data row, found {len(rows)}")
    cells = dict(zip(_TRUTH_COLUMNS, rows[0]))

    def cell_float(key):
        return _parse_float(path, key, cells[key])

    draw = PairPhaseDraw(
        phi_vortex_up=cell_float("phi_vortex_up"),
        phi_antivortex_up=cell_float("phi_antivortex_up"),
        phi_vortex_down=cell_float("phi_vortex_down"),
        phi_antivortex_down=cell_float("phi_antivortex_down"),
        pair_count=_parse_int(path, "pair_count", cells["pair_count"]),
    )
    return draw, (cell_float("truth_angle_up_rad"), cell_float("truth_angle_down_rad"))


def load_realization_dir(dir_path: str) -> tuple:
    """Load (index, RealizationRecord) back from a realization directory.

    Prefers the lossless CSV images; falls back to the quantized
    graymaps when only those were stored.
    """
    params_path = os.path.join(dir_path, "params.cfg")
    parser = ConfigParser(interpolation=None, strict=True)
    try:
        parser.read_string(read_text(params_path), source=params_path)
    except ParserError as exc:
        raise DataFormatError(f"{params_path}: {exc}") from None
    if not parser.has_section("realization"):
        raise DataFormatError(f"{params_path}: missing [realization] section")
    section = dict(parser.items("realization"))
    for key in _PARAM_KEYS:
        if key not in section:
            _field_error(params_path, key, "missing")
    for key in section:
        if key not in _PARAM_KEYS:
            _field_error(params_path, key, "unknown key")

    def meta_int(key):
        return _parse_int(params_path, key, section[key])

    def meta_float(key):
        return _parse_float(params_path, key, section[key])

    mode_parts = section["mode"].split(",")
    if len(mode_parts) != 2:
        _field_error(params_path, "mode", f"expected 'n,l', got {section['mode']!r}")
    try:
        mode = ModeIndex(int(mode_parts[0], 10), int(mode_parts[1], 10))
    except ValueError as exc:
        _field_error(params_path, "mode", str(exc))
    try:
        noise = NoiseSpec(kind=section["noise"], scale=meta_float("noise_scale"))
    except ValueError as exc:
        _field_error(params_path, "noise", str(exc))
    try:
        grid = Grid2D(
            half_extent_m=meta_float("grid_extent_um") * 1e-6,
            samples=meta_int("grid_samples"),
        )
    except ValueError as exc:
        _field_error(params_path, "grid_samples", str(exc))

    draw, truth_angles = _load_truth(dir_path)

    images = {}
    for name in ("plus", "minus"):
        csv_path = os.path.join(dir_path, f"{name}.csv")
        pgm_path = os.path.join(dir_path, f"{name}.pgm")
        if os.path.exists(csv_path):
            values = read_matrix_csv(csv_path)
            source = csv_path
        elif os.path.exists(pgm_path):
            values, _ = read_pgm(pgm_path)
            source = pgm_path
        else:
            raise DataFormatError(
                f"{dir_path}: no {name}.csv or {name}.pgm image (images not stored?)"
            )
        if values.shape != (grid.samples, grid.samples):
            raise DataFormatError(
                f"{source}: shape {values.shape} does not match grid_samples {grid.samples}"
            )
        images[name] = DensityImage(grid, values)

    record = RealizationRecord(
        mode=mode,
        squeeze=meta_float("squeeze"),
        box_radius_m=meta_float("box_radius_um") * 1e-6,
        noise=noise,
        draw=draw,
        image_plus=images["plus"],
        image_minus=images["minus"],
        truth_angle_plus=truth_angles[0],
        truth_angle_minus=truth_angles[1],
    )
    return meta_int("index"), record


def file_sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def write_manifest(out_dir: str, relative_paths) -> str:
    """Hash the given files (POSIX relative paths) into manifest.csv."""
    rows = []
    for rel in sorted(set(relative_paths)):
        digest = file_sha256(os.path.join(out_dir, *rel.split("/")))
        rows.append(f"{rel},{digest}")
    path = os.path.join(out_dir, "manifest.csv")
    write_text(path, "path,sha256\n" + "\n".join(rows) + ("\n" if rows else ""))
    return path
