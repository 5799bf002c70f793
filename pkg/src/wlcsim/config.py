"""Plain-text scenario configuration.

The format is INI-like: [section] headers, key = value pairs, # comments.
Parsing tracks line numbers so validation errors point at the offending
line.  Values are left as strings until a typed accessor asks for them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .atoms import FieldAmplitudes, LevelScheme
from .errors import ConfigError
from .propagation import Grid, MediumSpec, ProbeWaveform
from .cavity import CavitySpec


@dataclass
class ScenarioConfig:
    """Parsed key-value config with provenance for error messages."""

    path: str
    values: dict[tuple[str, str], str] = field(default_factory=dict)
    lines: dict[tuple[str, str], int] = field(default_factory=dict)

    def _fail(self, section: str, key: str, message: str):
        line = self.lines.get((section, key))
        location = f"{self.path}:{line}: " if line else f"{self.path}: "
        raise ConfigError(f"{location}[{section}] {key}: {message}")

    def has(self, section: str, key: str) -> bool:
        return (section, key) in self.values

    def raw(self, section: str, key: str, default=None):
        return self.values.get((section, key), default)

    def get_float(self, section: str, key: str, default: float | None = None) -> float:
        if not self.has(section, key):
            if default is None:
                self._fail(section, key, "required value missing")
            return default
        text = self.values[(section, key)]
        try:
            return float(text)
        except ValueError:
            self._fail(section, key, f"expected a number, got {text!r}")

    def get_int(self, section: str, key: str, default: int | None = None) -> int:
        value = self.get_float(section, key, default if default is None else float(default))
        if value != int(value):
            self._fail(section, key, f"expected an integer, got {value}")
        return int(value)

    def get_bool(self, section: str, key: str, default: bool | None = None) -> bool:
        if not self.has(section, key):
            if default is None:
                self._fail(section, key, "required value missing")
            return default
        text = self.values[(section, key)].lower()
        if text in ("true", "yes", "on", "1"):
            return True
        if text in ("false", "no", "off", "0"):
            return False
        self._fail(section, key, f"expected a boolean, got {text!r}")

    def get_str(self, section: str, key: str, default: str | None = None) -> str:
        if not self.has(section, key):
            if default is None:
                self._fail(section, key, "required value missing")
            return default
        return self.values[(section, key)]

    def get_floats(self, section: str, key: str, default: list[float] | None = None) -> list[float]:
        if not self.has(section, key):
            if default is None:
                self._fail(section, key, "required value missing")
            return default
        text = self.values[(section, key)]
        try:
            return [float(v) for v in text.split(",") if v.strip()]
        except ValueError:
            self._fail(section, key, f"expected comma-separated numbers, got {text!r}")

    def set_override(self, dotted: str, value: str):
        """Apply a key override of the form section.key=value."""
        if "." not in dotted:
            raise ConfigError(f"override {dotted!r} must look like section.key")
        section, _, key = dotted.partition(".")
        self.values[(section.strip(), key.strip())] = value.strip()

    def items(self):
        return sorted(self.values.items())


def parse_config(path) -> ScenarioConfig:
    """Parse a config file, failing with file:line anchored messages."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    cfg = ScenarioConfig(path=str(path))
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if not section:
                raise ConfigError(f"{path}:{lineno}: empty section name")
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if section is None:
            raise ConfigError(f"{path}:{lineno}: key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if (section, key) in cfg.values:
            raise ConfigError(f"{path}:{lineno}: duplicate key [{section}] {key}")
        cfg.values[(section, key)] = value
        cfg.lines[(section, key)] = lineno
    return cfg


def build_scheme(cfg: ScenarioConfig) -> LevelScheme:
    try:
        return LevelScheme(
            gamma31=cfg.get_float("scheme", "gamma31", 0.5),
            gamma32=cfg.get_float("scheme", "gamma32", 0.5),
            gamma41=cfg.get_float("scheme", "gamma41", 0.5),
            gamma42=cfg.get_float("scheme", "gamma42", 0.5),
            delta31=cfg.get_float("scheme", "delta31", 0.0),
            delta42=cfg.get_float("scheme", "delta42", 0.0),
            delta41=cfg.get_float("scheme", "delta41", 0.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: [scheme]: {exc}")


def build_medium(cfg: ScenarioConfig) -> MediumSpec:
    try:
        return MediumSpec(
            length=cfg.get_float("medium", "length_m"),
            density=cfg.get_float("medium", "density_per_m3"),
            scheme=build_scheme(cfg),
            wavelength=cfg.get_float("medium", "wavelength_m", 780e-9),
            gamma_ref=cfg.get_float("medium", "gamma_ref_rad_s", 2 * np.pi * 6e6),
            coupling_scale=cfg.get_float("medium", "coupling_scale", 1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: [medium]: {exc}")


def build_grid(cfg: ScenarioConfig, medium: MediumSpec) -> Grid:
    try:
        return Grid.for_medium(
            medium,
            nz=cfg.get_int("grid", "nz", 512),
            duration=cfg.get_float("grid", "duration", 400.0),
            courant=cfg.get_float("grid", "courant", 1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: [grid]: {exc}")


def build_controls(cfg: ScenarioConfig) -> FieldAmplitudes:
    try:
        return FieldAmplitudes(
            omega31=cfg.get_float("controls", "omega31"),
            omega42=cfg.get_float("controls", "omega42"),
        )
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: [controls]: {exc}")


def build_probe(cfg: ScenarioConfig) -> ProbeWaveform:
    kind = cfg.get_str("probe", "kind", "cw")
    amplitude = cfg.get_float("probe", "amplitude", 0.1)
    detuning = cfg.get_float("probe", "detuning", 0.0)
    try:
        if kind == "gaussian":
            probe = ProbeWaveform.gaussian(
                amplitude=amplitude,
                bandwidth=cfg.get_float("probe", "bandwidth", 0.5),
                detuning=detuning,
            )
            if cfg.has("probe", "center"):
                from dataclasses import replace

                probe = replace(probe, center=cfg.get_float("probe", "center"))
            return probe
        if kind == "cw":
            return ProbeWaveform.cw(
                amplitude=amplitude,
                detuning=detuning,
                ramp=cfg.get_float("probe", "ramp", 20.0),
            )
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: [probe]: {exc}")
    raise ConfigError(f"{cfg.path}: [probe] kind: must be 'cw' or 'gaussian', got {kind!r}")


def build_cavity(cfg: ScenarioConfig, medium: MediumSpec) -> CavitySpec:
    omega0 = cfg.get_float("cavity", "omega0_rad_s", medium.omega0)
    length = cfg.get_float("cavity", "length_m")
    try:
        if cfg.has("cavity", "finesse"):
            return CavitySpec.from_finesse(length, cfg.get_float("cavity", "finesse"), omega0)
        return CavitySpec(
            length=length,
            mirror_amplitude=cfg.get_float("cavity", "mirror_amplitude"),
            omega0=omega0,
        )
    except ValueError as exc:
        raise ConfigError(f"{cfg.path}: [cavity]: {exc}")


def sweep_deltas(cfg: ScenarioConfig) -> np.ndarray:
    lo = cfg.get_float("sweep", "delta_min", -2.0)
    hi = cfg.get_float("sweep", "delta_max", 2.0)
    n = cfg.get_int("sweep", "points", 81)
    if hi <= lo:
        raise ConfigError(f"{cfg.path}: [sweep]: delta_max must exceed delta_min")
    if n < 2:
        raise ConfigError(f"{cfg.path}: [sweep]: need at least 2 points")
    return np.linspace(lo, hi, n)


def echo_lines(cfg: ScenarioConfig) -> list[str]:
    """Resolved config as commented key=value lines for CSV headers."""
    return [f"# config {section}.{key} = {value}" for (section, key), value in cfg.items()]
