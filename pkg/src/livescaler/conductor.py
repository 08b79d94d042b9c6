"""Control-surface state machine and the broadcast wire protocol.

A 4x4 pad grid drives the performance: the two middle columns fire degree
transforms immediately, the outer columns hold modifiers that reshape the
next degree press (quality toggle, interval multipliers, semitone shifts,
modulation) or recall recent transforms from history.

Broadcast messages carry the full set of global parameters, so instruments
stay stateless with respect to modulation history: kind + mu/tau (or
interval/image), key_offset, anchor and base, plus a strictly increasing
sequence number receivers use to drop stale or duplicate datagrams.
"""

from __future__ import annotations

import json
import logging
from collections import deque
from dataclasses import dataclass
from typing import Optional

from .pitch import (
    AffineTransform,
    PeriodicMap,
    ScaleTransform,
    degree_transform,
    multiply_mode,
    shift_transposition,
    toggle_quality,
)

__all__ = [
    "DEFAULT_LAYOUT",
    "ConductorSurface",
    "GlobalTransformMsg",
    "MessageDecodeError",
    "PadEvent",
    "ROLE_LABELS",
    "decode_msg",
    "encode_msg",
    "scale_transform_from_json",
    "scale_transform_to_json",
]

log = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
HISTORY_DEPTH = 8

# Roles a pad can carry. Degrees fire on press; the rest are modifiers.
DEGREE_ROLES = ("I", "ii", "iii", "IV", "V", "vi", "vii", "II")
MODIFIER_ROLES = ("hist", "plus", "minus", "mod", "quality", "x2", "x3", "x4")

ROLE_LABELS = {
    "hist": "Hist",
    "plus": "++",
    "minus": "--",
    "mod": "Mod",
    "quality": "M↔m",
    "x2": "2",
    "x3": "3",
    "x4": "4",
    **{d: d for d in DEGREE_ROLES},
}

# Column 0: history and key management; columns 1-2: degrees paired with
# their relative minor/major; column 3: quality and interval multipliers.
DEFAULT_LAYOUT: dict[tuple[int, int], str] = {
    (0, 0): "hist", (1, 0): "plus", (2, 0): "minus", (3, 0): "mod",
    (0, 1): "I", (0, 2): "vi",
    (1, 1): "IV", (1, 2): "ii",
    (2, 1): "V", (2, 2): "iii",
    (3, 1): "II", (3, 2): "vii",
    (0, 3): "quality", (1, 3): "x2", (2, 3): "x3", (3, 3): "x4",
}


@dataclass(frozen=True)
class PadEvent:
    row: int
    col: int
    state: str  # "down" | "up"
    time_us: int = 0

    def __post_init__(self) -> None:
        if not (0 <= self.row <= 3 and 0 <= self.col <= 3):
            raise ValueError(f"pad ({self.row},{self.col}) outside the 4x4 grid")
        if self.state not in ("down", "up"):
            raise ValueError(f"pad state must be 'down' or 'up', got {self.state!r}")


@dataclass(frozen=True)
class GlobalTransformMsg:
    seq: int
    transform: ScaleTransform
    anchor_midi: int
    base: int
    version: int = PROTOCOL_VERSION


class MessageDecodeError(ValueError):
    """A wire record failed validation and must be dropped whole."""


def _degree_base_transform(role: str) -> AffineTransform:
    if role == "II":
        return AffineTransform(1, 2)
    return degree_transform(role)


class ConductorSurface:
    """Serialized pad-gesture state machine.

    Feed every pad transition (from the UI endpoint or a mapped control
    port) through ``pad_transition`` in one total order; each call returns
    at most one broadcast message.

    Modifier order on a degree press is fixed: quality toggle, then mode
    multipliers in ascending order (holding several composes them), then
    one semitone shift per held ++/-- pad. With Mod held the composed
    transform's tau rebases the key instead, and a bare identity at the new
    key offset is broadcast.
    """

    def __init__(
        self,
        layout: Optional[dict[tuple[int, int], str]] = None,
        anchor_midi: int = 60,
        base: int = 12,
    ):
        self.layout = dict(DEFAULT_LAYOUT) if layout is None else dict(layout)
        for pad, role in self.layout.items():
            if role not in DEGREE_ROLES and role not in MODIFIER_ROLES:
                raise ValueError(f"pad {pad} mapped to unknown role {role!r}")
        self.anchor_midi = anchor_midi
        self.base = base
        self.key_offset = 0
        self.current = ScaleTransform.identity()
        self.history: deque[ScaleTransform] = deque(maxlen=HISTORY_DEPTH)
        self.seq = 0
        self.warnings = 0
        self._held: dict[tuple[int, int], str] = {}

    def held_roles(self) -> set[str]:
        return set(self._held.values())

    def pad_transition(self, ev: PadEvent) -> Optional[GlobalTransformMsg]:
        pad = (ev.row, ev.col)
        role = self.layout.get(pad)
        if role is None:
            return None  # unmapped pad in a custom layout
        if ev.state == "up":
            self._held.pop(pad, None)
            return None
        if role in DEGREE_ROLES:
            return self._degree_down(role)
        self._held[pad] = role
        if role == "hist":
            return self._hist_down()
        return None

    # -- gestures -----------------------------------------------------------

    def _degree_down(self, role: str) -> Optional[GlobalTransformMsg]:
        held = self.held_roles()
        t = _degree_base_transform(role)
        if "quality" in held:
            t = toggle_quality(t)
        for k, multiplier in ((2, "x2"), (3, "x3"), (4, "x4")):
            if multiplier in held:
                t = multiply_mode(t, k)
        if "plus" in held:
            t = shift_transposition(t, 1)
        if "minus" in held:
            t = shift_transposition(t, -1)
        if "mod" in held:
            # modulation: fold the transposition into the key, reset the map
            self.key_offset += t.tau
            st = ScaleTransform(AffineTransform(1, 0), self.key_offset)
            self.current = st
            return self._broadcast(st, push=False)
        st = ScaleTransform(t, self.key_offset)
        self.current = st
        return self._broadcast(st, push=True)

    def _hist_down(self) -> Optional[GlobalTransformMsg]:
        held = self.held_roles()
        if "quality" in held:
            entry = self._history_entry(1)
            if entry is None:
                return None
            if not isinstance(entry.kind, AffineTransform):
                self.warnings += 1
                log.warning("cannot toggle quality of a periodic transform")
                return None
            st = ScaleTransform(toggle_quality(entry.kind), entry.key_offset)
            self.current = st
            return self._broadcast(st, push=False)
        depth = 1
        for k, multiplier in ((2, "x2"), (3, "x3"), (4, "x4")):
            if multiplier in held:
                depth = k
                break
        entry = self._history_entry(depth)
        if entry is None:
            return None
        self.current = entry
        return self._broadcast(entry, push=False)

    def _history_entry(self, depth: int) -> Optional[ScaleTransform]:
        if depth >= len(self.history):
            self.warnings += 1
            log.warning("history recall %d deeper than %d entries",
                        depth, len(self.history))
            return None
        return self.history[depth]

    def _broadcast(self, st: ScaleTransform, push: bool) -> GlobalTransformMsg:
        self.seq += 1
        if push:
            self.history.appendleft(st)
        return GlobalTransformMsg(
            seq=self.seq,
            transform=st,
            anchor_midi=self.anchor_midi,
            base=self.base,
        )

    # -- UI state -------------------------------------------------------------

    def snapshot(self) -> dict:
        """State frame pushed to UI clients after every pad transition."""
        return {
            "type": "state",
            "key_offset": self.key_offset,
            "current": scale_transform_to_json(self.current),
            "history": [scale_transform_to_json(t) for t in self.history],
            "seq": self.seq,
        }

    def layout_message(self) -> dict:
        """Layout frame sent once to each UI client at connect time."""
        grid = [
            [
                {
                    "role": self.layout.get((row, col)),
                    "label": ROLE_LABELS.get(self.layout.get((row, col)), ""),
                }
                for col in range(4)
            ]
            for row in range(4)
        ]
        return {
            "type": "layout",
            "grid": grid,
            "anchor_midi": self.anchor_midi,
            "base": self.base,
        }


# ---------------------------------------------------------------------------
# wire encoding


def encode_msg(msg: GlobalTransformMsg) -> bytes:
    """Encode one broadcast record: a single JSON text line."""
    record: dict = {"v": msg.version, "seq": msg.seq}
    kind = msg.transform.kind
    if isinstance(kind, AffineTransform):
        record.update(kind="affine", mu=kind.mu, tau=kind.tau)
    else:
        record.update(kind="periodic", interval=kind.interval, image=list(kind.image))
    record.update(
        key_offset=msg.transform.key_offset,
        anchor_midi=msg.anchor_midi,
        base=msg.base,
    )
    return (json.dumps(record, separators=(",", ":")) + "\n").encode("utf-8")


def decode_msg(data: bytes | str) -> GlobalTransformMsg:
    """Decode and validate one wire record.

    Unknown fields are ignored for forward compatibility; anything else
    wrong (syntax, version, types, inconsistent periodic image) raises
    MessageDecodeError and the record must be dropped whole.
    """
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as err:
            raise MessageDecodeError(f"not UTF-8: {err}") from None
    try:
        record = json.loads(data)
    except json.JSONDecodeError as err:
        raise MessageDecodeError(f"bad JSON: {err}") from None
    if not isinstance(record, dict):
        raise MessageDecodeError("record is not a JSON object")
    version = _field_int(record, "v")
    if version != PROTOCOL_VERSION:
        raise MessageDecodeError(f"unknown protocol version {version}")
    seq = _field_int(record, "seq")
    kind = record.get("kind")
    if kind == "affine":
        transform_kind = AffineTransform(
            _field_int(record, "mu"), _field_int(record, "tau")
        )
    elif kind == "periodic":
        interval = _field_int(record, "interval")
        image = record.get("image")
        if not isinstance(image, list) or not all(_is_int(x) for x in image):
            raise MessageDecodeError("'image' must be an array of integers")
        try:
            transform_kind = PeriodicMap(interval, image)
        except ValueError as err:
            raise MessageDecodeError(str(err)) from None
    else:
        raise MessageDecodeError(f"unknown kind {kind!r}")
    base = _field_int(record, "base")
    if base < 1:
        raise MessageDecodeError(f"base must be >= 1, got {base}")
    return GlobalTransformMsg(
        seq=seq,
        transform=ScaleTransform(transform_kind, _field_int(record, "key_offset")),
        anchor_midi=_field_int(record, "anchor_midi"),
        base=base,
        version=version,
    )


# ---------------------------------------------------------------------------
# UI-facing transform JSON (nested form used in state snapshots)


def scale_transform_to_json(st: ScaleTransform) -> dict:
    if isinstance(st.kind, AffineTransform):
        return {
            "kind": "affine",
            "mu": st.kind.mu,
            "tau": st.kind.tau,
            "key_offset": st.key_offset,
        }
    return {
        "kind": "periodic",
        "interval": st.kind.interval,
        "image": list(st.kind.image),
        "key_offset": st.key_offset,
    }


def scale_transform_from_json(obj: dict) -> ScaleTransform:
    if not isinstance(obj, dict):
        raise MessageDecodeError("transform must be a JSON object")
    kind = obj.get("kind")
    if kind == "affine":
        inner = AffineTransform(_field_int(obj, "mu"), _field_int(obj, "tau"))
    elif kind == "periodic":
        interval = _field_int(obj, "interval")
        image = obj.get("image")
        if not isinstance(image, list) or not all(_is_int(x) for x in image):
            raise MessageDecodeError("'image' must be an array of integers")
        inner = PeriodicMap(interval, image)
    else:
        raise MessageDecodeError(f"unknown kind {kind!r}")
    return ScaleTransform(inner, _field_int(obj, "key_offset"))


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _field_int(record: dict, name: str) -> int:
    if name not in record:
        raise MessageDecodeError(f"missing field {name!r}")
    value = record[name]
    if not _is_int(value):
        raise MessageDecodeError(f"field {name!r} must be an integer, got {value!r}")
    return value
