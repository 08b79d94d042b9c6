"""Stateful per-instrument MIDI stream transformer.

The engine applies the current scale transform to incoming note events and
owns the bookkeeping that keeps the output stream well formed: a binding
table from each sounding original note to the note actually emitted for it,
and reference counts on emitted notes so non-injective transforms (several
sources landing on one pitch) produce exactly one note_on and one note_off.

Four policies govern what happens to notes already sounding when a new
transform arrives:

  Stop      cut every sounding note immediately.
  Legato    replace each sounding note by its new image with no gap.
  ReTrigger like Legato, but the replacement attack is delayed so it reads
            as a new strike rather than a slur.
  Wait      let sounding notes ring unchanged; they are cut when the next
            note_on arrives on their channel.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Union

from .pitch import (
    RangeBounds,
    ScaleTransform,
    Temperament,
    UnmappableNoteError,
    transform_midi_note,
)

__all__ = [
    "EngineConfig",
    "Flush",
    "InputEvent",
    "NoteEngine",
    "NoteOff",
    "NoteOn",
    "OutNoteOff",
    "OutNoteOn",
    "OutputEvent",
    "SwitchMode",
    "Tick",
    "TransformChange",
    "note_event",
]

log = logging.getLogger(__name__)


class SwitchMode(Enum):
    """Policy for notes sounding at a transform change."""

    STOP = "stop"
    LEGATO = "legato"
    RETRIGGER = "retrigger"
    WAIT = "wait"


@dataclass(frozen=True)
class NoteOn:
    note: int
    velocity: int
    channel: int = 0

    def __post_init__(self) -> None:
        _check_note_fields(self.note, self.channel)
        if not 1 <= self.velocity <= 127:
            raise ValueError(f"note_on velocity must be in 1..127, got {self.velocity}")


@dataclass(frozen=True)
class NoteOff:
    note: int
    channel: int = 0

    def __post_init__(self) -> None:
        _check_note_fields(self.note, self.channel)


@dataclass(frozen=True)
class TransformChange:
    transform: ScaleTransform


@dataclass(frozen=True)
class Flush:
    """Release everything; the stream is over or the engine is detaching."""


@dataclass(frozen=True)
class Tick:
    """Monotonic time marker, reserved for scheduling bookkeeping."""

    time_us: int


InputEvent = Union[NoteOn, NoteOff, TransformChange, Flush, Tick]


def note_event(note: int, velocity: int, channel: int = 0) -> Union[NoteOn, NoteOff]:
    """Build a note event from raw MIDI fields; velocity 0 means note_off."""
    if velocity == 0:
        return NoteOff(note, channel)
    return NoteOn(note, velocity, channel)


@dataclass(frozen=True)
class OutNoteOn:
    note: int
    velocity: int
    channel: int
    delay_us: int = 0


@dataclass(frozen=True)
class OutNoteOff:
    note: int
    channel: int
    delay_us: int = 0


OutputEvent = Union[OutNoteOn, OutNoteOff]


@dataclass(frozen=True)
class EngineConfig:
    """Local (per-instrument) parameters.

    The transform itself arrives over the wire and is global; mode, bounds
    and the retrigger delay are chosen to fit each instrument.
    """

    mode: SwitchMode
    bounds: RangeBounds
    temperament: Temperament
    retrigger_delay_us: int = 10_000

    def __post_init__(self) -> None:
        if self.retrigger_delay_us <= 0:
            raise ValueError(
                f"retrigger_delay_us must be positive, got {self.retrigger_delay_us}"
            )
        if self.bounds.delta_minus + self.bounds.delta_plus + 1 < self.temperament.base:
            raise ValueError(
                f"restriction window ({self.bounds.delta_minus}+"
                f"{self.bounds.delta_plus}+1) is narrower than one period of "
                f"{self.temperament.base}"
            )


@dataclass
class _Binding:
    emitted: int
    velocity: int
    stale: bool = False


class NoteEngine:
    """Single-consumer note transformer; not thread-safe by design.

    Exactly one owner feeds it a totally ordered stream of InputEvents; that
    ordering is the semantics. Every mutation goes through process_event /
    apply_transform_change, which return the MIDI events to emit.
    """

    def __init__(self, config: EngineConfig, initial: ScaleTransform | None = None):
        self.config = config
        self.current = initial if initial is not None else ScaleTransform.identity()
        # (channel, original note) -> binding; insertion-ordered, which fixes
        # the emission order of batch releases deterministically
        self._bindings: dict[tuple[int, int], _Binding] = {}
        # (channel, emitted note) -> active reference count
        self._counts: dict[tuple[int, int], int] = {}
        self.dropped_notes = 0

    # -- introspection helpers (tests, services) ---------------------------

    def sounding(self) -> dict[tuple[int, int], int]:
        """Copy of the (channel, emitted note) -> count table."""
        return dict(self._counts)

    def bindings(self) -> dict[tuple[int, int], int]:
        """Copy of the (channel, original) -> emitted mapping."""
        return {key: b.emitted for key, b in self._bindings.items()}

    # -- event processing ---------------------------------------------------

    def process_event(self, ev: InputEvent) -> list[OutputEvent]:
        if isinstance(ev, NoteOn):
            return self._note_on(ev)
        if isinstance(ev, NoteOff):
            return self._note_off(ev)
        if isinstance(ev, TransformChange):
            return self.apply_transform_change(ev.transform)
        if isinstance(ev, Flush):
            return self._flush()
        if isinstance(ev, Tick):
            return []
        raise TypeError(f"not an input event: {ev!r}")

    def apply_transform_change(self, new: ScaleTransform) -> list[OutputEvent]:
        """Install a new transform, handling sounding notes per the mode."""
        self.current = new
        mode = self.config.mode
        if mode is SwitchMode.STOP:
            out = [OutNoteOff(note, ch) for ch, note in sorted(self._counts)]
            self._bindings.clear()
            self._counts.clear()
            return out
        if mode is SwitchMode.WAIT:
            for binding in self._bindings.values():
                binding.stale = True
            return []
        # Legato / ReTrigger: migrate every binding to its new image
        delay = self.config.retrigger_delay_us if mode is SwitchMode.RETRIGGER else 0
        out: list[OutputEvent] = []
        for (channel, original), binding in list(self._bindings.items()):
            try:
                target = transform_midi_note(
                    original, new, self.config.temperament, self.config.bounds
                )
            except UnmappableNoteError:
                # no playable image under the new transform: release the note
                self.dropped_notes += 1
                log.warning("note %d has no image in MIDI range; releasing", original)
                if self._release(channel, binding.emitted):
                    out.append(OutNoteOff(binding.emitted, channel))
                del self._bindings[(channel, original)]
                continue
            if target == binding.emitted:
                continue
            if self._release(channel, binding.emitted):
                out.append(OutNoteOff(binding.emitted, channel))
            binding.emitted = target
            binding.stale = False
            if self._acquire(channel, target):
                out.append(OutNoteOn(target, binding.velocity, channel, delay))
        return out

    # -- internals ----------------------------------------------------------

    def _note_on(self, ev: NoteOn) -> list[OutputEvent]:
        out = self._release_stale(ev.channel)
        key = (ev.channel, ev.note)
        existing = self._bindings.pop(key, None)
        if existing is not None:
            # re-strike: the old binding goes away before the new one lands
            if self._release(ev.channel, existing.emitted):
                out.append(OutNoteOff(existing.emitted, ev.channel))
        try:
            target = transform_midi_note(
                ev.note, self.current, self.config.temperament, self.config.bounds
            )
        except UnmappableNoteError:
            self.dropped_notes += 1
            log.warning("dropping note %d: no image in MIDI range", ev.note)
            return out
        self._bindings[key] = _Binding(target, ev.velocity)
        if self._acquire(ev.channel, target):
            out.append(OutNoteOn(target, ev.velocity, ev.channel))
        return out

    def _note_off(self, ev: NoteOff) -> list[OutputEvent]:
        binding = self._bindings.pop((ev.channel, ev.note), None)
        if binding is None:
            return []  # orphan off: engine attached mid-performance
        if self._release(ev.channel, binding.emitted):
            return [OutNoteOff(binding.emitted, ev.channel)]
        return []

    def _flush(self) -> list[OutputEvent]:
        out = [OutNoteOff(note, ch) for ch, note in sorted(self._counts)]
        self._bindings.clear()
        self._counts.clear()
        return out

    def _release_stale(self, channel: int) -> list[OutputEvent]:
        """Cut Wait-mode leftovers on a channel; next keystroke triggers this."""
        out: list[OutputEvent] = []
        for key in [k for k, b in self._bindings.items() if k[0] == channel and b.stale]:
            binding = self._bindings.pop(key)
            if self._release(channel, binding.emitted):
                out.append(OutNoteOff(binding.emitted, channel))
        return out

    def _acquire(self, channel: int, note: int) -> bool:
        """Bump the emitted-note count; True if it just became audible."""
        key = (channel, note)
        count = self._counts.get(key, 0)
        self._counts[key] = count + 1
        return count == 0

    def _release(self, channel: int, note: int) -> bool:
        """Drop the emitted-note count; True if the note just went silent."""
        key = (channel, note)
        count = self._counts[key]
        if count == 1:
            del self._counts[key]
            return True
        self._counts[key] = count - 1
        return False


def _check_note_fields(note: int, channel: int) -> None:
    if not 0 <= note <= 127:
        raise ValueError(f"note must be in 0..127, got {note}")
    if not 0 <= channel <= 15:
        raise ValueError(f"channel must be in 0..15, got {channel}")
