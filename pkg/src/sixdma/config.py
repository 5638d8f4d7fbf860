"""Experiment configuration: a sectioned key-value file with full defaults.

The defaults mirror the standard simulation setup (2.4 GHz carrier,
60 mW per user, 2x2 panels, 16 surfaces, mean 40 users with 1:2:3
hotspots); every run resolves its configuration to a canonical text form
whose SHA-256 hash is embedded in all outputs.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field, fields

import numpy as np

from .channel import AntennaPattern, SystemConfig
from .scenario import Hotspot, ScenarioConfig

SWEEP_AXES = ("power", "mu", "xi", "n_positions", "n_rotations")
_AXIS_ALIASES = {"p": "power", "m": "n_positions", "l": "n_rotations"}
SCHEMES = ("offline", "online", "fpa", "circular", "rotations")


class ConfigError(ValueError):
    """Malformed or inconsistent configuration input."""


@dataclass(frozen=True)
class SystemSection:
    wavelength: float = 0.125
    power: float = 0.06
    noise_power: float = 1e-12
    n_antennas: int = 4
    n_surfaces: int = 16
    g_max: float = 8.0
    g_s: float = 25.0
    g_v: float = 25.0
    theta_3db: float = 65.0
    phi_3db: float = 65.0


@dataclass(frozen=True)
class CodebookConfig:
    kind: str = "sphere"  # sphere | grid | file
    n_positions: int = 100
    n_rotations: int = 2
    angle_steps: int = 3
    radius: float = 0.5
    cube_side: float = 1.0
    enforce_spacing: bool = True
    file: str = ""


@dataclass(frozen=True)
class ScenarioSection:
    mu: float = 40.0
    xi: float = 0.2
    r_inner: float = 30.0
    r_outer: float = 200.0
    hotspot_distances: tuple[float, ...] = (40.0, 60.0, 100.0)
    hotspot_radii: tuple[float, ...] = (5.0, 10.0, 15.0)
    hotspot_weights: tuple[float, ...] = (1.0, 2.0, 3.0)
    hotspot_azimuths_deg: tuple[float, ...] = (25.0, 155.0, 275.0)


@dataclass(frozen=True)
class OfflineSection:
    omega: int = 100
    max_iters: int = 20
    fd_step: float = 1e-4
    step_size: float | None = None
    restarts: int = 1
    central_differences: bool = False


@dataclass(frozen=True)
class OnlineSection:
    n_samples: int | None = None  # None = M^2 L^2
    frozen_population: bool = False


@dataclass(frozen=True)
class BenchmarkSection:
    kind: str = "fpa"
    position_steps: int = 16
    rotation_steps: int = 16
    ring_radius: float = 0.5


@dataclass(frozen=True)
class EvaluationSection:
    n_realizations: int = 20


@dataclass(frozen=True)
class SweepSection:
    axis: str = "power"
    values: tuple[float, ...] = (0.01, 0.02, 0.04, 0.06, 0.08, 0.1)
    schemes: tuple[str, ...] = ("offline", "fpa")
    n_seeds: int = 5


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemSection = field(default_factory=SystemSection)
    codebook: CodebookConfig = field(default_factory=CodebookConfig)
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    offline: OfflineSection = field(default_factory=OfflineSection)
    online: OnlineSection = field(default_factory=OnlineSection)
    benchmark: BenchmarkSection = field(default_factory=BenchmarkSection)
    evaluation: EvaluationSection = field(default_factory=EvaluationSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def system_config(self) -> SystemConfig:
        return SystemConfig(
            wavelength=self.system.wavelength,
            power=self.system.power,
            noise_power=self.system.noise_power,
            n_antennas=self.system.n_antennas,
            n_surfaces=self.system.n_surfaces,
        )

    def pattern_config(self) -> AntennaPattern:
        return AntennaPattern(
            g_max=self.system.g_max,
            g_s=self.system.g_s,
            g_v=self.system.g_v,
            theta_3db=self.system.theta_3db,
            phi_3db=self.system.phi_3db,
        )

    def scenario_config(self) -> ScenarioConfig:
        s = self.scenario
        if not (
            len(s.hotspot_distances)
            == len(s.hotspot_radii)
            == len(s.hotspot_weights)
            == len(s.hotspot_azimuths_deg)
        ):
            raise ConfigError("hotspot lists must have equal lengths")
        hotspots = tuple(
            Hotspot(
                center=np.array(
                    [d * np.cos(np.deg2rad(a)), d * np.sin(np.deg2rad(a)), 0.0]
                ),
                radius=r,
                weight=w,
            )
            for d, r, w, a in zip(
                s.hotspot_distances,
                s.hotspot_radii,
                s.hotspot_weights,
                s.hotspot_azimuths_deg,
            )
        )
        try:
            return ScenarioConfig(
                mu=s.mu,
                r_inner=s.r_inner,
                r_outer=s.r_outer,
                hotspots=hotspots,
                xi=s.xi,
            )
        except ValueError as exc:
            raise ConfigError(f"[scenario] {exc}") from exc

    def to_text(self) -> str:
        """Canonical resolved key-value text (also the hashing input)."""
        out = io.StringIO()
        for section_name in (
            "system",
            "codebook",
            "scenario",
            "offline",
            "online",
            "benchmark",
            "evaluation",
            "sweep",
        ):
            section = getattr(self, section_name)
            out.write(f"[{section_name}]\n")
            for f in fields(section):
                out.write(f"{f.name} = {_format_value(getattr(section, f.name))}\n")
            out.write("\n")
        return out.getvalue()

    def config_hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


def _format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return " ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def default_config() -> ExperimentConfig:
    return ExperimentConfig()


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_field(f, raw: str):
    raw = raw.strip()
    ftype = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "")
    if ftype in ("float | None", "int | None"):
        if raw == "":
            return None
        return float(raw) if "float" in ftype else int(raw)
    if ftype == "bool":
        return _parse_bool(raw)
    if ftype.startswith("tuple[float"):
        return tuple(float(x) for x in raw.split())
    if ftype.startswith("tuple[str"):
        return tuple(raw.split())
    if ftype == "float":
        return float(raw)
    if ftype == "int":
        return int(raw)
    return raw


def load_config(path) -> ExperimentConfig:
    """Parse a sectioned key-value file, overlaying the defaults.

    Unknown sections or keys and unparsable values raise
    :class:`ConfigError` with the offending location in the message.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        with open(path) as fh:
            parser.read_file(fh, source=str(path))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    base = default_config()
    updates: dict[str, object] = {}
    for section_name in parser.sections():
        if not hasattr(base, section_name):
            raise ConfigError(f"[{section_name}]: unknown section")
        section = getattr(base, section_name)
        by_name = {f.name: f for f in fields(section)}
        kwargs = {}
        for key, raw in parser.items(section_name):
            if key not in by_name:
                raise ConfigError(f"[{section_name}] {key}: unknown key")
            try:
                kwargs[key] = _parse_field(by_name[key], raw)
            except ValueError as exc:
                raise ConfigError(f"[{section_name}] {key} = {raw!r}: {exc}") from exc
        updates[section_name] = type(section)(
            **{f.name: kwargs.get(f.name, getattr(section, f.name)) for f in fields(section)}
        )
    cfg = ExperimentConfig(**{**{f.name: getattr(base, f.name) for f in fields(base)}, **updates})
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.codebook.kind not in ("sphere", "grid", "file"):
        raise ConfigError(f"[codebook] kind = {cfg.codebook.kind!r}: unknown kind")
    if cfg.codebook.kind == "file" and not cfg.codebook.file:
        raise ConfigError("[codebook] file: required when kind = file")
    axis = normalize_axis(cfg.sweep.axis)
    if axis not in SWEEP_AXES:
        raise ConfigError(f"[sweep] axis = {cfg.sweep.axis!r}: unknown axis")
    for scheme in cfg.sweep.schemes:
        if scheme not in SCHEMES:
            raise ConfigError(f"[sweep] schemes: unknown scheme {scheme!r}")
    if cfg.benchmark.kind not in ("fpa", "circular", "rotations"):
        raise ConfigError(f"[benchmark] kind = {cfg.benchmark.kind!r}: unknown kind")
    if cfg.sweep.n_seeds < 1 or cfg.evaluation.n_realizations < 1:
        raise ConfigError("[sweep]/[evaluation]: counts must be >= 1")
    try:
        cfg.system_config()
    except ValueError as exc:
        raise ConfigError(f"[system] {exc}") from exc
    cfg.scenario_config()


def normalize_axis(axis: str) -> str:
    return _AXIS_ALIASES.get(axis.lower(), axis.lower())
