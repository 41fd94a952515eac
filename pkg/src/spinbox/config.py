"""Run configuration: INI parsing, strict validation, parameter assembly.

The configuration file is plain ``key = value`` INI text in UTF-8.
Every key is validated; unknown sections or keys are rejected with
their location so typos cannot silently fall back to defaults.  A few
keys come in mutually exclusive pairs (box radius vs. derived radius,
hold time vs. fixed squeeze, field list vs. q list); writing both in
one file is an error rather than a precedence puzzle.
"""

from __future__ import annotations

import math
from configparser import ConfigParser, Error as ParserError
from dataclasses import dataclass

import numpy as np

from .constants import CONSTANTS, PLANCK
from .errors import ConfigError
from .modes import Grid2D, ModeIndex
from .patterns import NoiseSpec
from .physics import (
    CouplingConstants,
    SystemParams,
    TrapConfig,
    ZeemanConversion,
    coupling_constants,
    q_from_field,
    thomas_fermi,
)

DEFAULT_CONFIG = """\
# spinbox run configuration (all keys shown with their defaults)

[physics]
# rubidium-87 lower hyperfine manifold
mass_u = 86.909180531
a0_bohr = 87.7
a2_bohr = 95.0
a4_bohr = 99.0
# pair-production coupling Omega/h; instead of scattering lengths you
# may give the couplings directly via u0_jm3 and u1_jm3
omega_hz = 30.0

[trap]
freq_x_hz = 187.0
freq_y_hz = 67.0
freq_z_hz = 183.0

[box]
# effective box radius; set derive_from_tf = true to compute it as the
# Thomas-Fermi radius of atom_count atoms with scattering_bohr instead
radius_um = 3.9
derive_from_tf = false
atom_count = 50000
scattering_bohr = 95.0

[zeeman]
coeff_hz_per_gauss2 = 59.3
sign = -1
# q/h grid for the spectrum table
scan_min_hz = -320.0
scan_max_hz = 0.0
scan_step_hz = 0.5
# fields simulated by the simulate command; alternatively give
# q_list_hz directly
fields_gauss = 1.65, 1.72, 1.78, 1.84, 1.90, 1.96

[grid]
# half-width of the square imaging window
extent_um = 3.9
samples = 128

[mc]
seed = 12345
realizations = 30
mode = 2,1
# squeeze grows as 2 pi * instability_rate * hold_time; alternatively
# fix it per shot with squeeze = <s>
hold_time_ms = 17.0
noise = gaussian
# atoms per pixel; calibrated so the consistency filter keeps roughly
# three quarters of near-resonance realizations
noise_scale = 0.0025
store_images = true

[analysis]
threshold_deg = 40.0
histogram_bin_deg = 10.0
residual_threshold = 0.5
basis = 1,0; 1,1; 2,0; 2,1; 3,0; 3,1
"""

_KNOWN_KEYS = {
    "physics": ("mass_u", "a0_bohr", "a2_bohr", "a4_bohr", "u0_jm3", "u1_jm3", "omega_hz"),
    "trap": ("freq_x_hz", "freq_y_hz", "freq_z_hz"),
    "box": ("radius_um", "derive_from_tf", "atom_count", "scattering_bohr"),
    "zeeman": (
        "coeff_hz_per_gauss2",
        "sign",
        "scan_min_hz",
        "scan_max_hz",
        "scan_step_hz",
        "fields_gauss",
        "q_list_hz",
    ),
    "grid": ("extent_um", "samples"),
    "mc": (
        "seed",
        "realizations",
        "mode",
        "hold_time_ms",
        "squeeze",
        "noise",
        "noise_scale",
        "store_images",
    ),
    "analysis": ("threshold_deg", "histogram_bin_deg", "residual_threshold", "basis"),
}

_DEFAULTS = {
    ("physics", "mass_u"): "86.909180531",
    ("physics", "a0_bohr"): "87.7",
    ("physics", "a2_bohr"): "95.0",
    ("physics", "a4_bohr"): "99.0",
    ("physics", "omega_hz"): "30.0",
    ("trap", "freq_x_hz"): "187.0",
    ("trap", "freq_y_hz"): "67.0",
    ("trap", "freq_z_hz"): "183.0",
    ("box", "radius_um"): "3.9",
    ("box", "derive_from_tf"): "false",
    ("box", "atom_count"): "50000",
    ("box", "scattering_bohr"): "95.0",
    ("zeeman", "coeff_hz_per_gauss2"): "59.3",
    ("zeeman", "sign"): "-1",
    ("zeeman", "scan_min_hz"): "-320.0",
    ("zeeman", "scan_max_hz"): "0.0",
    ("zeeman", "scan_step_hz"): "0.5",
    ("zeeman", "fields_gauss"): "1.65, 1.72, 1.78, 1.84, 1.90, 1.96",
    ("grid", "extent_um"): "3.9",
    ("grid", "samples"): "128",
    ("mc", "seed"): "12345",
    ("mc", "realizations"): "30",
    ("mc", "mode"): "2,1",
    ("mc", "hold_time_ms"): "17.0",
    ("mc", "noise"): "gaussian",
    ("mc", "noise_scale"): "0.0025",
    ("mc", "store_images"): "true",
    ("analysis", "threshold_deg"): "40.0",
    ("analysis", "histogram_bin_deg"): "10.0",
    ("analysis", "residual_threshold"): "0.5",
    ("analysis", "basis"): "1,0; 1,1; 2,0; 2,1; 3,0; 3,1",
}

_BOOL_WORDS = {
    "true": True,
    "yes": True,
    "on": True,
    "1": True,
    "false": False,
    "no": False,
    "off": False,
    "0": False,
}

_MAX_SQUEEZE = 12.0
_MAX_SAMPLES = 4096


@dataclass(frozen=True)
class SimulatePoint:
    """One magnetic-field (or direct q) setting of the simulate run."""

    label: str
    field_gauss: float | None
    zeeman_j: float


class _Reader:
    """Typed access to explicit keys with defaults and located errors."""

    def __init__(self, explicit: dict, source: str) -> None:
        self.explicit = explicit
        self.source = source

    def has(self, section: str, key: str) -> bool:
        return (section, key) in self.explicit

    def _raw(self, section: str, key: str) -> str:
        if (section, key) in self.explicit:
            return self.explicit[(section, key)]
        if (section, key) in _DEFAULTS:
            return _DEFAULTS[(section, key)]
        self.fail(section, key, "required key is missing")

    def fail(self, section: str, key: str, reason: str):
        raise ConfigError(f"{self.source}: [{section}] {key}: {reason}")

    def float(self, section, key, positive=False, nonnegative=False) -> float:
        raw = self._raw(section, key)
        try:
            value = float(raw)
        except ValueError:
            self.fail(section, key, f"not a number: {raw!r}")
        if not math.isfinite(value):
            self.fail(section, key, "must be finite")
        if positive and not value > 0.0:
            self.fail(section, key, "must be positive")
        if nonnegative and value < 0.0:
            self.fail(section, key, "must not be negative")
        return value

    def int(self, section, key, minimum=None, maximum=None) -> int:
        raw = self._raw(section, key)
        try:
            value = int(raw, 10)
        except ValueError:
            self.fail(section, key, f"not an integer: {raw!r}")
        if minimum is not None and value < minimum:
            self.fail(section, key, f"must be at least {minimum}")
        if maximum is not None and value > maximum:
            self.fail(section, key, f"must be at most {maximum}")
        return value

    def bool(self, section, key) -> bool:
        raw = self._raw(section, key).lower()
        if raw not in _BOOL_WORDS:
            self.fail(section, key, f"not a boolean: {raw!r}")
        return _BOOL_WORDS[raw]

    def word(self, section, key, choices) -> str:
        raw = self._raw(section, key)
        if raw not in choices:
            self.fail(section, key, f"must be one of {', '.join(choices)}")
        return raw

    def float_list(self, section, key) -> tuple:
        raw = self._raw(section, key)
        items = [part.strip() for part in raw.split(",") if part.strip()]
        if not items:
            self.fail(section, key, "empty list")
        values = []
        for item in items:
            try:
                value = float(item)
            except ValueError:
                self.fail(section, key, f"not a number: {item!r}")
            if not math.isfinite(value):
                self.fail(section, key, "entries must be finite")
            values.append(value)
        return tuple(values)

    def mode(self, section, key) -> ModeIndex:
        raw = self._raw(section, key)
        return self._parse_mode(section, key, raw)

    def _parse_mode(self, section, key, raw) -> ModeIndex:
        parts = [part.strip() for part in raw.split(",")]
        if len(parts) != 2:
            self.fail(section, key, f"mode must be 'n,l', got {raw!r}")
        try:
            n, l = int(parts[0], 10), int(parts[1], 10)
        except ValueError:
            self.fail(section, key, f"mode indices must be integers: {raw!r}")
        try:
            return ModeIndex(n, l)
        except ValueError as exc:
            self.fail(section, key, str(exc))

    def mode_list(self, section, key) -> tuple:
        raw = self._raw(section, key)
        items = [part.strip() for part in raw.split(";") if part.strip()]
        if not items:
            self.fail(section, key, "empty mode list")
        modes = tuple(self._parse_mode(section, key, item) for item in items)
        seen = set()
        for mode in modes:
            label = (mode.n, abs(mode.l))
            if label in seen:
                self.fail(section, key, f"duplicate mode n={mode.n} |l|={abs(mode.l)}")
            seen.add(label)
        return modes


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters in SI units."""

    source: str
    mass_kg: float
    couplings: CouplingConstants
    omega_hz: float
    trap: TrapConfig
    box_radius_m: float
    box_derived: bool
    atom_count: int
    tf_scattering_m: float
    zeeman: ZeemanConversion
    scan_min_hz: float
    scan_max_hz: float
    scan_step_hz: float
    fields_gauss: tuple
    q_list_hz: tuple
    grid_extent_m: float
    grid_samples: int
    seed: int
    realizations: int
    pump_mode: ModeIndex
    hold_time_s: float | None
    squeeze: float | None
    noise: NoiseSpec
    store_images: bool
    agreement_threshold_rad: float
    histogram_bin_rad: float
    residual_threshold: float
    basis: tuple

    def system_params(self) -> SystemParams:
        return SystemParams(
            mass_kg=self.mass_kg,
            trap=self.trap,
            couplings=self.couplings,
            box_radius_m=self.box_radius_m,
            spin_coupling_j=self.omega_hz * PLANCK,
            zeeman=self.zeeman,
        )

    def grid(self) -> Grid2D:
        return Grid2D(half_extent_m=self.grid_extent_m, samples=self.grid_samples)

    def scan_q_values_hz(self) -> np.ndarray:
        count = int(math.floor((self.scan_max_hz - self.scan_min_hz) / self.scan_step_hz + 1e-9)) + 1
        return self.scan_min_hz + self.scan_step_hz * np.arange(count)

    def simulate_points(self) -> tuple:
        if self.fields_gauss:
            return tuple(
                SimulatePoint(
                    label=f"field_{field:.4f}",
                    field_gauss=field,
                    zeeman_j=q_from_field(field, self.zeeman),
                )
                for field in self.fields_gauss
            )
        return tuple(
            SimulatePoint(label=f"q_{q_hz:+.4f}", field_gauss=None, zeeman_j=q_hz * PLANCK)
            for q_hz in self.q_list_hz
        )


def default_config_text() -> str:
    return DEFAULT_CONFIG


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse and validate configuration text against the full key set."""
    parser = ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#",))
    try:
        parser.read_string(text, source=source)
    except ParserError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    if parser.defaults():
        keys = ", ".join(sorted(parser.defaults()))
        raise ConfigError(f"{source}: keys outside any section: {keys}")
    explicit = {}
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"{source}: unknown section [{section}]")
        for key, value in parser.items(section):
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"{source}: [{section}] {key}: unknown key")
            explicit[(section, key)] = value.strip()
    return _build(_Reader(explicit, source))


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            text = handle.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror or exc}") from None
    return parse_config(text, source=path)


def _build(reader: _Reader) -> RunConfig:
    mass_kg = reader.float("physics", "mass_u", positive=True) * CONSTANTS.atomic_mass_unit
    direct = reader.has("physics", "u0_jm3") or reader.has("physics", "u1_jm3")
    if direct:
        for key in ("a0_bohr", "a2_bohr", "a4_bohr"):
            if reader.has("physics", key):
                reader.fail(
                    "physics", key, "give scattering lengths or direct couplings, not both"
                )
        if not (reader.has("physics", "u0_jm3") and reader.has("physics", "u1_jm3")):
            reader.fail("physics", "u0_jm3", "u0_jm3 and u1_jm3 must be given together")
        try:
            couplings = CouplingConstants(
                density_j_m3=reader.float("physics", "u0_jm3"),
                spin_j_m3=reader.float("physics", "u1_jm3"),
            )
        except ValueError as exc:
            reader.fail("physics", "u0_jm3", str(exc))
    else:
        couplings = coupling_constants(
            a0_bohr=reader.float("physics", "a0_bohr", positive=True),
            a2_bohr=reader.float("physics", "a2_bohr", positive=True),
            a4_bohr=reader.float("physics", "a4_bohr", positive=True),
            mass_kg=mass_kg,
        )
    omega_hz = reader.float("physics", "omega_hz", positive=True)

    trap = TrapConfig(
        freq_x_hz=reader.float("trap", "freq_x_hz", positive=True),
        freq_y_hz=reader.float("trap", "freq_y_hz", positive=True),
        freq_z_hz=reader.float("trap", "freq_z_hz", positive=True),
    )

    derived = reader.bool("box", "derive_from_tf")
    atom_count = reader.int("box", "atom_count", minimum=1)
    tf_scattering_m = reader.float("box", "scattering_bohr", positive=True) * CONSTANTS.bohr_radius
    if derived:
        if reader.has("box", "radius_um"):
            reader.fail("box", "radius_um", "remove radius_um when derive_from_tf is true")
        box_radius_m = thomas_fermi(atom_count, tf_scattering_m, mass_kg, trap).radius_radial_m
    else:
        box_radius_m = reader.float("box", "radius_um", positive=True) * 1e-6

    try:
        zeeman = ZeemanConversion(
            coeff_hz_per_gauss2=reader.float("zeeman", "coeff_hz_per_gauss2", positive=True),
            sign=reader.int("zeeman", "sign"),
        )
    except ValueError as exc:
        reader.fail("zeeman", "sign", str(exc))
    scan_min_hz = reader.float("zeeman", "scan_min_hz")
    scan_max_hz = reader.float("zeeman", "scan_max_hz")
    scan_step_hz = reader.float("zeeman", "scan_step_hz", positive=True)
    if scan_min_hz > scan_max_hz:
        reader.fail("zeeman", "scan_min_hz", "scan_min_hz must not exceed scan_max_hz")
    if reader.has("zeeman", "q_list_hz"):
        if reader.has("zeeman", "fields_gauss"):
            reader.fail("zeeman", "fields_gauss", "give fields_gauss or q_list_hz, not both")
        q_list_hz = reader.float_list("zeeman", "q_list_hz")
        fields_gauss = ()
    else:
        fields_gauss = reader.float_list("zeeman", "fields_gauss")
        for field in fields_gauss:
            if field < 0.0:
                reader.fail("zeeman", "fields_gauss", "fields must not be negative")
        q_list_hz = ()

    grid_extent_m = reader.float("grid", "extent_um", positive=True) * 1e-6
    grid_samples = reader.int("grid", "samples", minimum=8, maximum=_MAX_SAMPLES)

    seed = reader.int("mc", "seed", minimum=0, maximum=2**64 - 1)
    realizations = reader.int("mc", "realizations", minimum=1)
    pump_mode = reader.mode("mc", "mode")
    if pump_mode.l == 0:
        reader.fail("mc", "mode", "the pumped mode needs |l| >= 1 to break symmetry")
    if reader.has("mc", "squeeze"):
        if reader.has("mc", "hold_time_ms"):
            reader.fail("mc", "hold_time_ms", "give hold_time_ms or squeeze, not both")
        squeeze = reader.float("mc", "squeeze", nonnegative=True)
        if squeeze > _MAX_SQUEEZE:
            reader.fail("mc", "squeeze", f"must be at most {_MAX_SQUEEZE}")
        hold_time_s = None
    else:
        squeeze = None
        hold_time_s = reader.float("mc", "hold_time_ms", nonnegative=True) * 1e-3
    noise_kind = reader.word("mc", "noise", ("none", "gaussian", "poisson"))
    if noise_kind == "none":
        noise = NoiseSpec(kind="none")
    else:
        try:
            noise = NoiseSpec(kind=noise_kind, scale=reader.float("mc", "noise_scale"))
        except ValueError as exc:
            reader.fail("mc", "noise_scale", str(exc))
    store_images = reader.bool("mc", "store_images")

    agreement_threshold_rad = math.radians(
        reader.float("analysis", "threshold_deg", nonnegative=True)
    )
    histogram_bin_rad = math.radians(
        reader.float("analysis", "histogram_bin_deg", positive=True)
    )
    residual_threshold = reader.float("analysis", "residual_threshold", positive=True)
    basis = reader.mode_list("analysis", "basis")

    return RunConfig(
        source=reader.source,
        mass_kg=mass_kg,
        couplings=couplings,
        omega_hz=omega_hz,
        trap=trap,
        box_radius_m=box_radius_m,
        box_derived=derived,
        atom_count=atom_count,
        tf_scattering_m=tf_scattering_m,
        zeeman=zeeman,
        scan_min_hz=scan_min_hz,
        scan_max_hz=scan_max_hz,
        scan_step_hz=scan_step_hz,
        fields_gauss=fields_gauss,
        q_list_hz=q_list_hz,
        grid_extent_m=grid_extent_m,
        grid_samples=grid_samples,
        seed=seed,
        realizations=realizations,
        pump_mode=pump_mode,
        hold_time_s=hold_time_s,
        squeeze=squeeze,
        noise=noise,
        store_images=store_images,
        agreement_threshold_rad=agreement_threshold_rad,
        histogram_bin_rad=histogram_bin_rad,
        residual_threshold=residual_threshold,
        basis=basis,
    )
