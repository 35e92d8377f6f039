"""Plain-text run configuration.

One setting per line, ``section.key = value``. ``#`` starts a comment. Tuples
are comma separated. Example::

    channel.distance_km = 50
    decoy.intensities = 0.425, 0.0435, 0.0022
    analysis.n_pulses = 6.3e8

Analysis mode is fixed-length when ``analysis.n_pulses`` is given and a
minimal-length search when ``analysis.target_level`` is given; exactly one of
the two must be present.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .analysis import AnalysisOptions
from .channel import ChannelParams, DecoySettings
from .errors import ConfigurationError
from .security import SecurityParams


class ConfigParseError(ConfigurationError):
    """Malformed or invalid configuration, tagged with its source line when known."""

    def __init__(self, message: str, source: str | None = None, line: int | None = None):
        self.source, self.line = source, line
        where = ""
        if source is not None and line is not None:
            where = f"{source}:{line}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


def _bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError(f"not a finite number: {text!r}")
    return value


def _count(text: str) -> int:
    value = _float(text)
    if value != int(value):
        raise ValueError(f"not a whole number: {text!r}")
    return int(value)


def _floats(text: str) -> tuple[float, ...]:
    return tuple(_float(part) for part in text.split(","))


def _text(text: str) -> str:
    value = text.strip()
    if not value:
        raise ValueError("empty value")
    return value


SCHEMA: dict[str, dict[str, Callable[[str], Any]]] = {
    "channel": {f.name: _float for f in dataclasses.fields(ChannelParams)},
    "decoy": {"intensities": _floats, "intensity_probs": _floats, "basis_prob_x": _float},
    "security": {
        "eps_pe": _float,
        "eps_smooth": _float,
        "markov_a": _float,
        "alpha1": _float,
        "pessimism_offset": _float,
    },
    "analysis": {
        "n_pulses": _count,
        "target_level": _float,
        "sifting_convention": _text,
        "estimation_convention": _text,
        "f_ec": _float,
        "k_ratio": _float,
        "clamp_gamma": _bool,
    },
    "sim": {
        "L": _count,
        "s_a": _float,
        "s_v": _float,
        "e_b": _float,
        "e_c": _float,
        "forger_error_rate": _float,
        "mismatch_rate": _float,
        "n_pulses": _count,
        "trials": _count,
        "workers": _count,
    },
}


@dataclass(frozen=True)
class SimSettings:
    L: int | None = None
    s_a: float | None = None
    s_v: float | None = None
    e_b: float = 0.0
    e_c: float = 0.0
    forger_error_rate: float = 0.0
    mismatch_rate: float | None = None
    n_pulses: int | None = None
    trials: int = 1000
    workers: int = 1


@dataclass(frozen=True)
class RunConfig:
    channel: ChannelParams = ChannelParams()
    decoy: DecoySettings = DecoySettings()
    security: SecurityParams = SecurityParams()
    options: AnalysisOptions = AnalysisOptions()
    n_pulses: int | None = None
    target_level: float | None = None
    sim: SimSettings = SimSettings()
    values: Mapping[str, Mapping[str, Any]] = field(default_factory=dict, compare=False)

    @property
    def mode(self) -> str:
        return "fixed" if self.n_pulses is not None else "search"

    def to_dict(self) -> dict[str, dict[str, Any]]:
        """Every resolved setting, in a form :func:`from_mapping` accepts."""
        sim = {k: v for k, v in dataclasses.asdict(self.sim).items() if v is not None}
        analysis = {
            "sifting_convention": self.options.sifting_convention,
            "estimation_convention": self.options.estimation_convention,
            "f_ec": self.options.f_ec,
            "k_ratio": self.options.k_ratio,
            "clamp_gamma": self.options.clamp_gamma,
        }
        if self.n_pulses is not None:
            analysis["n_pulses"] = self.n_pulses
        else:
            analysis["target_level"] = self.target_level
        security = dataclasses.asdict(self.security)
        security.pop("target_level")
        return {
            "channel": dataclasses.asdict(self.channel),
            "decoy": {k: list(v) if isinstance(v, tuple) else v for k, v in dataclasses.asdict(self.decoy).items()},
            "security": security,
            "analysis": analysis,
            "sim": sim,
        }

    def replace(self, section: str, key: str, value: Any) -> "RunConfig":
        """A copy with one setting changed, re-validated."""
        values = {s: dict(v) for s, v in self.to_dict().items()}
        values.setdefault(section, {})[key] = value
        if section == "analysis" and key == "n_pulses":
            values["analysis"].pop("target_level", None)
        return from_mapping(values)


def _coerce(section: str, key: str, value: Any, source: str | None, line: int | None) -> Any:
    if section not in SCHEMA:
        raise ConfigParseError(f"unknown section {section!r}", source, line)
    if key not in SCHEMA[section]:
        raise ConfigParseError(f"unknown key '{section}.{key}'", source, line)
    if isinstance(value, (list, tuple)):
        value = ", ".join(repr(float(v)) for v in value)
    elif isinstance(value, bool):
        value = "true" if value else "false"
    elif not isinstance(value, str):
        value = repr(value)
    try:
        return SCHEMA[section][key](value)
    except ValueError as exc:
        raise ConfigParseError(f"bad value for '{section}.{key}': {exc}", source, line) from None


def _build(entries: Iterable[tuple[str, str, Any, int | None]], source: str | None) -> RunConfig:
    values: dict[str, dict[str, Any]] = {s: {} for s in SCHEMA}
    lines: dict[tuple[str, str], int | None] = {}
    for section, key, raw, line in entries:
        if (section, key) in lines:
            raise ConfigParseError(f"duplicate key '{section}.{key}'", source, line)
        values[section][key] = _coerce(section, key, raw, source, line)
        lines[(section, key)] = line

    def make(section: str, cls, **extra):
        try:
            return cls(**values[section], **extra)
        except ConfigurationError as exc:
            line = min((ln for (s, _), ln in lines.items() if s == section and ln is not None), default=None)
            raise ConfigParseError(f"invalid [{section}] settings: {exc}", source, line) from None
        except TypeError as exc:
            raise ConfigParseError(f"invalid [{section}] settings: {exc}", source) from None

    analysis = dict(values["analysis"])
    n_pulses = analysis.pop("n_pulses", None)
    target = analysis.pop("target_level", None)
    if (n_pulses is None) == (target is None):
        raise ConfigParseError("give exactly one of analysis.n_pulses and analysis.target_level", source)
    if n_pulses is not None and n_pulses < 1:
        raise ConfigParseError("analysis.n_pulses must be positive", source, lines[("analysis", "n_pulses")])
    values["analysis"] = analysis
    security_extra = {"target_level": target} if target is not None else {}
    return RunConfig(
        channel=make("channel", ChannelParams),
        decoy=make("decoy", DecoySettings),
        security=make("security", SecurityParams, **security_extra),
        options=make("analysis", AnalysisOptions),
        n_pulses=n_pulses,
        target_level=target,
        sim=make("sim", SimSettings),
        values=values,
    )


def parse_config(text: str, source: str | None = None) -> RunConfig:
    entries = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"expected 'section.key = value', got {raw.strip()!r}", source, number)
        name, value = (part.strip() for part in line.split("=", 1))
        if name.count(".") != 1:
            raise ConfigParseError(f"setting name must look like 'section.key', got {name!r}", source, number)
        section, key = name.split(".")
        if not value:
            raise ConfigParseError(f"missing value for {name!r}", source, number)
        entries.append((section, key, value, number))
    return _build(entries, source)


def from_mapping(values: Mapping[str, Mapping[str, Any]], source: str | None = None) -> RunConfig:
    """Build a config from nested ``{section: {key: value}}`` data, e.g. a report's echo."""
    if not isinstance(values, Mapping):
        raise ConfigParseError("configuration must be a mapping of sections", source)
    entries = []
    for section, settings in values.items():
        if not isinstance(settings, Mapping):
            raise ConfigParseError(f"section {section!r} must be a mapping", source)
        for key, value in settings.items():
            entries.append((section, key, value, None))
    return _build(entries, source)


def load_config(path: str | Path) -> RunConfig:
    """Read a text config, or the ``config`` block of a JSON report written by ``qds analyze``."""
    import json

    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read config: {exc}", str(path)) from None
    if text.lstrip().startswith("{"):
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigParseError(f"invalid JSON: {exc.msg}", str(path), exc.lineno) from None
        if not isinstance(document, dict) or "config" not in document:
            raise ConfigParseError("JSON input must be a report with a 'config' block", str(path))
        return from_mapping(document["config"], str(path))
    return parse_config(text, str(path))


def bundled_config_path(name: str = "reference_link.cfg") -> Path:
    return Path(__file__).with_name("data") / name
