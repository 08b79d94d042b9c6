"""Offline rendering: play a MIDI file through the live note engine.

A command script pairs ticks with the same wire records the conductor
broadcasts live.  Rendering feeds each track through its own engine,
applying due script entries before the events they precede, and writes the
result back out.  Events the engine passes through unchanged keep their
original bytes, so rendering with an empty script is the identity on any
well-formed file.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from .conductor import GlobalTransformMsg, MessageDecodeError, decode_msg
from .engine import EngineConfig, NoteEngine, NoteOff, NoteOn, OutNoteOn, SwitchMode
from .pitch import RangeBounds, Temperament
from .smf import (
    DEFAULT_TEMPO_US,
    ForeignChunk,
    MidiFile,
    MidiTrack,
    TrackEvent,
    normalize_running_status,
)

__all__ = [
    "RenderError",
    "ScriptEntry",
    "ScriptError",
    "TempoMap",
    "parse_command_script",
    "render_offline",
]


class ScriptError(ValueError):
    """A command script line failed to parse; carries the line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class RenderError(ValueError):
    """The file and script are individually valid but cannot be combined."""


@dataclass(frozen=True)
class ScriptEntry:
    tick: int
    msg: GlobalTransformMsg


def parse_command_script(text: str) -> list[ScriptEntry]:
    """Parse ``at <tick> <wire record>`` lines into scheduled messages.

    Blank lines and ``#`` comments are skipped.  Ticks must be
    non-negative and non-decreasing; each record must decode like a live
    broadcast.
    """
    entries: list[ScriptEntry] = []
    last_tick: int | None = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(None, 2)
        if len(parts) != 3 or parts[0] != "at":
            raise ScriptError(line_no, "expected 'at <tick> <json record>'")
        try:
            tick = int(parts[1])
        except ValueError:
            raise ScriptError(line_no, f"tick is not an integer: {parts[1]!r}") from None
        if tick < 0:
            raise ScriptError(line_no, f"tick must be non-negative, got {tick}")
        if last_tick is not None and tick < last_tick:
            raise ScriptError(
                line_no, f"ticks must be non-decreasing ({tick} after {last_tick})"
            )
        try:
            msg = decode_msg(parts[2])
        except MessageDecodeError as exc:
            raise ScriptError(line_no, str(exc)) from None
        entries.append(ScriptEntry(tick, msg))
        last_tick = tick
    return entries


class TempoMap:
    """Tick/microsecond conversion from a file's tempo events.

    PPQN files start at 120 bpm until the first tempo change; SMPTE files
    have a fixed tick rate and ignore tempo events, matching playback.
    """

    def __init__(self, mf: MidiFile):
        if mf.is_smpte():
            self._ticks_per_second: int | None = mf.ticks_per_second()
            self._tpq = 0
            self._changes: list[tuple[int, int]] = []
        else:
            self._ticks_per_second = None
            self._tpq = mf.ticks_per_quarter()
            changes = [(0, DEFAULT_TEMPO_US)]
            for track in mf.tracks:
                changes.extend(
                    (ev.tick, ev.tempo_us()) for ev in track.events if ev.is_tempo()
                )
            changes.sort(key=lambda c: c[0])  # stable: later event wins a tie
            self._changes = changes

    def tempo_at(self, tick: int) -> int:
        tempo = DEFAULT_TEMPO_US
        for change_tick, us in self._changes:
            if change_tick > tick:
                break
            tempo = us
        return tempo

    def us_to_ticks(self, us: int, at_tick: int) -> int:
        if self._ticks_per_second is not None:
            return round(us * self._ticks_per_second / 1_000_000)
        return round(us * self._tpq / self.tempo_at(at_tick))


@dataclass
class _Timed:
    """An output event waiting for the final time sort."""

    tick: int
    is_end: bool
    event: TrackEvent = field(compare=False)


def render_offline(
    mf: MidiFile,
    script: Sequence[ScriptEntry],
    *,
    mode: SwitchMode = SwitchMode.LEGATO,
    bounds: RangeBounds | None = None,
    anchor_midi: int = 60,
    base: int = 12,
    retrigger_delay_us: int = 10_000,
    channels: Iterable[int] | None = None,
) -> MidiFile:
    """Render a file through the note engine under a command script.

    Each track runs its own engine over the shared script, mirroring a
    band of instruments hearing the same broadcasts.  ``channels`` limits
    which MIDI channels are transformed (None means all); everything else,
    note or not, passes through byte for byte.
    """
    if bounds is None:
        bounds = RangeBounds(6, 6)
    channel_set = None if channels is None else frozenset(channels)
    tempo = TempoMap(mf)
    try:
        config = EngineConfig(
            mode, bounds, Temperament(anchor_midi, base), retrigger_delay_us
        )
    except ValueError as exc:
        raise RenderError(str(exc)) from None
    out_chunks: list[MidiTrack | ForeignChunk] = []
    for chunk in mf.chunks:
        if isinstance(chunk, ForeignChunk):
            out_chunks.append(chunk)
        else:
            out_chunks.append(_render_track(chunk, script, tempo, config, channel_set))
    return MidiFile(
        mf.format, mf.ntrks, mf.division, mf.division_raw, out_chunks, mf.header_extra
    )


def _render_track(
    track: MidiTrack,
    script: Sequence[ScriptEntry],
    tempo: TempoMap,
    config: EngineConfig,
    channels: frozenset[int] | None,
) -> MidiTrack:
    engine = NoteEngine(config)
    pending = deque(script)
    timed: list[_Timed] = []
    end_tick: int | None = None
    for ev in track.events:
        if ev.is_end_of_track():
            # a change after the last note still belongs in the render:
            # apply the tail of the script, clamped to the track's end
            end_tick = ev.tick
            while pending:
                entry = pending.popleft()
                at = min(entry.tick, end_tick)
                _emit(timed, _apply_entry(engine, entry), at, tempo)
            timed.append(_Timed(ev.tick, True, replace(ev)))
            continue
        while pending and pending[0].tick <= ev.tick:
            entry = pending.popleft()
            _emit(timed, _apply_entry(engine, entry), entry.tick, tempo)
        if ev.is_note_event() and (channels is None or ev.channel in channels):
            if ev.is_note_on():
                outs = engine.process_event(NoteOn(ev.note, ev.velocity, ev.channel))
                reuse = _last_matching(outs, want_on=True, channel=ev.channel)
            else:
                outs = engine.process_event(NoteOff(ev.note, ev.channel))
                reuse = _last_matching(outs, want_on=False, channel=ev.channel)
            for i, out in enumerate(outs):
                if i == reuse:
                    # the input event's own image keeps its original bytes
                    timed.append(_Timed(ev.tick, False, ev.with_note(out.note)))
                else:
                    _emit(timed, [out], ev.tick, tempo)
        else:
            # copy: deltas are recomputed in place and the input file is
            # the caller's to keep
            timed.append(_Timed(ev.tick, False, replace(ev)))
    while pending:  # no end-of-track marker: apply the tail at its own ticks
        entry = pending.popleft()
        _emit(timed, _apply_entry(engine, entry), entry.tick, tempo)
    if end_tick is not None:
        for item in timed:
            if item.tick > end_tick:
                item.tick = end_tick
    timed.sort(key=lambda item: (item.tick, item.is_end))
    events: list[TrackEvent] = []
    prev = 0
    for item in timed:
        ev = item.event
        ev.tick = item.tick
        ev.delta = item.tick - prev
        prev = item.tick
        events.append(ev)
    normalize_running_status(events)
    return MidiTrack(events)


def _apply_entry(engine: NoteEngine, entry: ScriptEntry):
    cfg = engine.config
    temp = cfg.temperament
    if (temp.anchor_midi, temp.base) != (entry.msg.anchor_midi, entry.msg.base):
        new_temp = Temperament(entry.msg.anchor_midi, entry.msg.base, temp.anchor_freq)
        try:
            engine.config = replace(cfg, temperament=new_temp)
        except ValueError as exc:
            raise RenderError(f"script entry at tick {entry.tick}: {exc}") from None
    return engine.apply_transform_change(entry.msg.transform)


def _emit(timed: list[_Timed], outs, at_tick: int, tempo: TempoMap) -> None:
    for out in outs:
        tick = at_tick
        if out.delay_us:
            tick += tempo.us_to_ticks(out.delay_us, at_tick)
        if isinstance(out, OutNoteOn):
            status = 0x90 | out.channel
            data = bytes([out.note, out.velocity])
        else:
            status = 0x80 | out.channel
            data = bytes([out.note, 0])
        timed.append(_Timed(tick, False, TrackEvent(0, status, data, tick=tick)))


def _last_matching(outs, *, want_on: bool, channel: int) -> int | None:
    for i in range(len(outs) - 1, -1, -1):
        out = outs[i]
        if isinstance(out, OutNoteOn) == want_on and out.channel == channel:
            return i
    return None
