"""Flat ``section.key = value`` configuration files.

Blank lines and ``#`` comments are ignored. Every key must be known; unknown
keys and malformed values raise :class:`ConfigError` naming the dotted key.
"""

from __future__ import annotations

import dataclasses
import hashlib
from dataclasses import dataclass, field, fields
from pathlib import Path

from scipy import constants as sc

from .errors import ConfigError
from .materials import ALPHA_CS_1064, ATOMIC_MASS_CS, C3_CS_SILICA, CS_D2_WAVELENGTH, AtomSpec, FiberSpec


@dataclass
class FiberConfig:
    radius_m: float = 200e-9
    trap_wavelength_m: float = 1064e-9
    trap_power_W: float = 0.02


@dataclass
class AtomConfig:
    mass_kg: float = ATOMIC_MASS_CS * sc.atomic_mass
    alpha_si_1064: float = ALPHA_CS_1064
    c3_J_m3: float = C3_CS_SILICA
    probe_wavelength_m: float = CS_D2_WAVELENGTH


@dataclass
class PacketConfig:
    m0: int = 468
    delta_m: float = 6.0
    m_min: int = 446
    m_max: int = 510


@dataclass
class NumericsConfig:
    n_points: int = 16000
    r_span_m: float = 2e-6
    m_scan_min: int = 380
    m_scan_max: int = 600
    polar_n_r: int = 400
    polar_n_phi: int = 720
    probe_dt_s: float = 5e-8
    probe_t_max_s: float = 1e-3
    peak_threshold: float = 0.5


@dataclass
class OutputConfig:
    directory: str = "out"
    format: str = "csv"


SECTIONS = ("fiber", "atom", "packet", "numerics", "output")


@dataclass
class Config:
    fiber: FiberConfig = field(default_factory=FiberConfig)
    atom: AtomConfig = field(default_factory=AtomConfig)
    packet: PacketConfig = field(default_factory=PacketConfig)
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def __post_init__(self):
        self.validate()

    # -- construction -------------------------------------------------
    @classmethod
    def from_text(cls, text: str) -> "Config":
        values: dict[str, dict[str, object]] = {s: {} for s in SECTIONS}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected 'section.key = value'")
            key, value = (p.strip() for p in line.split("=", 1))
            section, _, name = key.partition(".")
            if section not in values:
                raise ConfigError("unknown section", key)
            types = {f.name: f.type for f in fields(_section_class(section))}
            if name not in types:
                raise ConfigError("unknown key", key)
            values[section][name] = _convert(value, types[name], key)
        return cls(**{s: _section_class(s)(**v) for s, v in values.items()})

    @classmethod
    def from_file(cls, path: str | Path) -> "Config":
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        return cls.from_text(text)

    def with_overrides(self, **dotted) -> "Config":
        """Copy with ``{'section.key': value}`` style overrides (dots given as '__')."""
        text = self.to_text() + "".join(f"{k.replace('__', '.')} = {v}\n" for k, v in dotted.items())
        return Config.from_text(text)

    # -- serialization ------------------------------------------------
    def to_text(self, sections=SECTIONS) -> str:
        lines = []
        for s in sections:
            for f in fields(_section_class(s)):
                v = getattr(getattr(self, s), f.name)
                lines.append(f"{s}.{f.name} = {v!r}" if not isinstance(v, str) else f"{s}.{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def hash(self, sections=SECTIONS) -> str:
        return hashlib.sha256(self.to_text(sections).encode()).hexdigest()[:16]

    def dispersion_key(self) -> str:
        """Hash of everything the dispersion table depends on."""
        n = self.numerics
        extra = f"{n.n_points!r}|{n.r_span_m!r}|{n.m_scan_min!r}|{n.m_scan_max!r}"
        base = self.to_text(("fiber", "atom")) + extra
        return hashlib.sha256(base.encode()).hexdigest()[:16]

    # -- physics objects ----------------------------------------------
    def atom_spec(self) -> AtomSpec:
        a = self.atom
        return AtomSpec(mass=a.mass_kg, alpha_1064=a.alpha_si_1064, vdw_C3=a.c3_J_m3,
                        probe_wavelength=a.probe_wavelength_m)

    def fiber_spec(self) -> FiberSpec:
        return FiberSpec(radius=self.fiber.radius_m)

    # -- validation ---------------------------------------------------
    def validate(self) -> None:
        for s in ("fiber", "atom"):
            for f in fields(_section_class(s)):
                if not getattr(getattr(self, s), f.name) > 0:
                    raise ConfigError("must be positive", f"{s}.{f.name}")
        p = self.packet
        if not p.delta_m > 0:
            raise ConfigError("must be positive", "packet.delta_m")
        if not p.m_min < p.m0 < p.m_max:
            raise ConfigError("need m_min < m0 < m_max", "packet.m0")
        n = self.numerics
        if n.n_points < 2000:
            raise ConfigError("must be >= 2000", "numerics.n_points")
        for name in ("r_span_m", "probe_dt_s", "probe_t_max_s"):
            if not getattr(n, name) > 0:
                raise ConfigError("must be positive", f"numerics.{name}")
        if not 1 <= n.m_scan_min < n.m_scan_max <= 2000:
            raise ConfigError("need 1 <= m_scan_min < m_scan_max <= 2000", "numerics.m_scan_min")
        if not (n.m_scan_min < p.m_min and p.m_max < n.m_scan_max):
            raise ConfigError("packet window must lie inside the m scan", "numerics.m_scan_min")
        if n.polar_n_r < 2 or n.polar_n_phi < 8:
            raise ConfigError("polar grid too small", "numerics.polar_n_r")
        if not 0 < n.peak_threshold < 1:
            raise ConfigError("must lie in (0, 1)", "numerics.peak_threshold")
        if self.output.format not in ("csv", "json"):
            raise ConfigError("must be 'csv' or 'json'", "output.format")


def _section_class(section: str):
    return {f.name: f.default_factory for f in dataclasses.fields(Config)}[section]


def _convert(value: str, typ, key: str):
    typ = {"int": int, "float": float, "str": str}.get(typ, typ) if isinstance(typ, str) else typ
    try:
        if typ is int:
            return int(value)
        if typ is float:
            return float(value)
        return value.strip().strip("'\"")
    except ValueError:
        raise ConfigError(f"cannot parse {value!r} as {typ.__name__}", key) from None
