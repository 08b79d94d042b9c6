"""Configuration files: UTF-8 ``key = value`` lines, ``#`` comments.

Two profiles share the format: instrument files describe one MIDI
transformer (ports, switch mode, range window, listen transport) and
conductor files describe the control surface (broadcast targets, UI
endpoint, pad layout overrides, optional MIDI control mapping).

Validation is strict: unknown keys, bad values and violated preconditions
raise ConfigError instead of falling back to defaults silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .conductor import DEFAULT_LAYOUT, DEGREE_ROLES, MODIFIER_ROLES
from .engine import EngineConfig, SwitchMode
from .pitch import RangeBounds, Temperament

__all__ = [
    "ConductorConfig",
    "ConfigError",
    "InprocAddress",
    "InstrumentConfig",
    "Transport",
    "UdpAddress",
    "parse_config_text",
    "parse_host_port",
    "parse_transport",
]

DEFAULT_BROADCAST_PORT = 41952
DEFAULT_UI_PORT = 8765


class ConfigError(ValueError):
    """A configuration file failed validation."""


@dataclass(frozen=True)
class UdpAddress:
    host: str
    port: int


@dataclass(frozen=True)
class InprocAddress:
    name: str


Transport = Union[UdpAddress, InprocAddress]


def parse_transport(text: str) -> Transport:
    """Parse ``udp:<host>:<port>`` or ``inproc:<name>``."""
    scheme, _, rest = text.partition(":")
    if scheme == "udp":
        host, sep, port_text = rest.rpartition(":")
        if not sep or not host:
            raise ConfigError(f"udp address needs host:port, got {text!r}")
        try:
            port = int(port_text)
        except ValueError:
            raise ConfigError(f"bad port in {text!r}") from None
        if not 1 <= port <= 65535:
            raise ConfigError(f"port out of range in {text!r}")
        return UdpAddress(host, port)
    if scheme == "inproc":
        if not rest:
            raise ConfigError(f"inproc address needs a name, got {text!r}")
        return InprocAddress(rest)
    raise ConfigError(f"unknown transport scheme {scheme!r} (use udp: or inproc:)")


def parse_config_text(text: str) -> dict[str, str]:
    """Split a config file into a key/value dict.

    Lines are ``key = value``; blank lines and lines starting with ``#``
    are skipped.  Duplicate keys are an error (a typo magnet otherwise).
    """
    out: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not sep or not key:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {raw!r}")
        if key in out:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        out[key] = value
    return out


@dataclass(frozen=True)
class InstrumentConfig:
    """One MIDI transformer: ports, engine parameters, listen transport."""

    input_port: str = ""
    output_port: str = ""
    mode: SwitchMode = SwitchMode.LEGATO
    retrigger_delay_us: int = 10_000
    bounds: RangeBounds = RangeBounds(6, 6)
    anchor_midi: int = 60
    base: int = 12
    listen: Transport = UdpAddress("127.0.0.1", DEFAULT_BROADCAST_PORT)
    channels: frozenset[int] | None = None

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            self.mode,
            self.bounds,
            Temperament(self.anchor_midi, self.base),
            self.retrigger_delay_us,
        )

    @classmethod
    def from_text(cls, text: str) -> "InstrumentConfig":
        pairs = parse_config_text(text)
        kwargs: dict = {}
        delta_minus = _take_int(pairs, "delta_minus", 6, minimum=0)
        delta_plus = _take_int(pairs, "delta_plus", 6, minimum=0)
        kwargs["bounds"] = RangeBounds(delta_minus, delta_plus)
        kwargs["anchor_midi"] = _take_int(pairs, "anchor_midi", 60, 0, 127)
        kwargs["base"] = _take_int(pairs, "base", 12, minimum=1)
        kwargs["retrigger_delay_us"] = _take_int(
            pairs, "retrigger_delay_us", 10_000, minimum=1
        )
        kwargs["input_port"] = pairs.pop("input_port", "")
        kwargs["output_port"] = pairs.pop("output_port", "")
        if "mode" in pairs:
            raw = pairs.pop("mode")
            try:
                kwargs["mode"] = SwitchMode(raw)
            except ValueError:
                names = ", ".join(m.value for m in SwitchMode)
                raise ConfigError(f"mode must be one of {names}, got {raw!r}") from None
        if "listen" in pairs:
            kwargs["listen"] = parse_transport(pairs.pop("listen"))
        if "channels" in pairs:
            kwargs["channels"] = _parse_channels(pairs.pop("channels"))
        _reject_unknown(pairs)
        cfg = cls(**kwargs)
        try:
            cfg.engine_config()  # surfaces the window/base precondition now
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return cfg

    @classmethod
    def from_file(cls, path: str) -> "InstrumentConfig":
        with open(path, encoding="utf-8") as handle:
            return cls.from_text(handle.read())


@dataclass(frozen=True)
class ConductorConfig:
    """The control surface: broadcasts, UI endpoint, layout, control input."""

    anchor_midi: int = 60
    base: int = 12
    broadcast: tuple[Transport, ...] = (
        UdpAddress("127.0.0.1", DEFAULT_BROADCAST_PORT),
    )
    ui_listen: tuple[str, int] = ("127.0.0.1", DEFAULT_UI_PORT)
    layout: dict[tuple[int, int], str] = field(
        default_factory=lambda: dict(DEFAULT_LAYOUT)
    )
    control_input_port: str | None = None
    control_notes: dict[int, tuple[int, int]] = field(default_factory=dict)

    @classmethod
    def from_text(cls, text: str) -> "ConductorConfig":
        pairs = parse_config_text(text)
        kwargs: dict = {}
        kwargs["anchor_midi"] = _take_int(pairs, "anchor_midi", 60, 0, 127)
        kwargs["base"] = _take_int(pairs, "base", 12, minimum=1)
        if "broadcast" in pairs:
            targets = pairs.pop("broadcast").split()
            if not targets:
                raise ConfigError("broadcast must list at least one target")
            kwargs["broadcast"] = tuple(parse_transport(t) for t in targets)
        if "ui_listen" in pairs:
            kwargs["ui_listen"] = parse_host_port(pairs.pop("ui_listen"))
        if "control_input_port" in pairs:
            kwargs["control_input_port"] = pairs.pop("control_input_port")
        layout = dict(DEFAULT_LAYOUT)
        control_notes: dict[int, tuple[int, int]] = {}
        for key in list(pairs):
            if key.startswith("pad_"):
                layout[_parse_pad_key(key)] = _parse_role(pairs.pop(key))
            elif key.startswith("control_note_"):
                note = _parse_note_key(key)
                control_notes[note] = _parse_pad_value(pairs.pop(key))
        kwargs["layout"] = layout
        kwargs["control_notes"] = control_notes
        _reject_unknown(pairs)
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str) -> "ConductorConfig":
        with open(path, encoding="utf-8") as handle:
            return cls.from_text(handle.read())


# ---------------------------------------------------------------------------
# field parsers


def _take_int(pairs: dict[str, str], key: str, default: int,
              minimum: int | None = None, maximum: int | None = None) -> int:
    if key not in pairs:
        return default
    raw = pairs.pop(key)
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None
    if minimum is not None and value < minimum:
        raise ConfigError(f"{key} must be >= {minimum}, got {value}")
    if maximum is not None and value > maximum:
        raise ConfigError(f"{key} must be <= {maximum}, got {value}")
    return value


def _parse_channels(raw: str) -> frozenset[int]:
    channels = set()
    for part in raw.split(","):
        part = part.strip()
        try:
            channel = int(part)
        except ValueError:
            raise ConfigError(
                f"channels must be comma-separated integers, got {part!r}"
            ) from None
        if not 0 <= channel <= 15:
            raise ConfigError(f"channel out of range 0..15: {channel}")
        channels.add(channel)
    if not channels:
        raise ConfigError("channels listed but empty")
    return frozenset(channels)


def parse_host_port(raw: str, allow_ephemeral: bool = False) -> tuple[str, int]:
    """Parse ``host:port``.  ``allow_ephemeral`` admits port 0 (bind any
    free port), which makes sense for listen addresses but never for
    targets."""
    host, sep, port_text = raw.rpartition(":")
    if not sep or not host:
        raise ConfigError(f"expected host:port, got {raw!r}")
    try:
        port = int(port_text)
    except ValueError:
        raise ConfigError(f"bad port in {raw!r}") from None
    if not (0 if allow_ephemeral else 1) <= port <= 65535:
        raise ConfigError(f"port out of range in {raw!r}")
    return host, port


def _parse_pad_key(key: str) -> tuple[int, int]:
    parts = key.split("_")
    if len(parts) == 3:
        try:
            row, col = int(parts[1]), int(parts[2])
        except ValueError:
            row = col = -1
        if 0 <= row <= 3 and 0 <= col <= 3:
            return row, col
    raise ConfigError(f"pad keys look like pad_<row>_<col> with 0..3, got {key!r}")


def _parse_role(raw: str) -> str:
    if raw in DEGREE_ROLES or raw in MODIFIER_ROLES:
        return raw
    known = ", ".join(list(MODIFIER_ROLES) + list(DEGREE_ROLES))
    raise ConfigError(f"unknown pad role {raw!r} (known: {known})")


def _parse_note_key(key: str) -> int:
    tail = key[len("control_note_"):]
    try:
        note = int(tail)
    except ValueError:
        raise ConfigError(f"control note keys look like control_note_<0..127>, "
                          f"got {key!r}") from None
    if not 0 <= note <= 127:
        raise ConfigError(f"control note out of range 0..127: {note}")
    return note


def _parse_pad_value(raw: str) -> tuple[int, int]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) == 2:
        try:
            row, col = int(parts[0]), int(parts[1])
        except ValueError:
            row = col = -1
        if 0 <= row <= 3 and 0 <= col <= 3:
            return row, col
    raise ConfigError(f"pad coordinates look like 'row,col' with 0..3, got {raw!r}")


def _reject_unknown(pairs: dict[str, str]) -> None:
    if pairs:
        names = ", ".join(sorted(pairs))
        raise ConfigError(f"unknown config keys: {names}")
