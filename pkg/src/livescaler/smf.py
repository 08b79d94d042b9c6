"""Standard MIDI file codec with byte-exact round-trips.

Every event keeps its original encoding alongside the decoded view: the raw
variable-length delta bytes and whether the status byte was written out or
carried by running status.  Writing an unmodified file therefore reproduces
it bit for bit, including redundant delta encodings and running-status
layouts, which is what lets the offline renderer prove an identity pass
changes nothing.

Only the fields the renderer needs are interpreted (notes, tempo, end of
track); all other events ride through as opaque bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from typing import Union

__all__ = [
    "ForeignChunk",
    "MidiFile",
    "MidiTrack",
    "SMFError",
    "TrackEvent",
    "encode_varlen",
    "end_of_track_event",
    "meta_event",
    "new_single_track_file",
    "normalize_running_status",
    "note_off_event",
    "note_on_event",
    "read_smf",
    "read_varlen",
    "tempo_event",
    "write_smf",
]

META = 0xFF
SYSEX = 0xF0
SYSEX_CONT = 0xF7
META_END_OF_TRACK = 0x2F
META_TEMPO = 0x51
DEFAULT_TEMPO_US = 500_000


class SMFError(ValueError):
    """Malformed MIDI file; ``offset`` is the absolute byte position."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


def encode_varlen(value: int) -> bytes:
    if value < 0 or value >= 1 << 28:
        raise ValueError(f"variable-length value out of range: {value}")
    out = bytearray([value & 0x7F])
    value >>= 7
    while value:
        out.append(0x80 | (value & 0x7F))
        value >>= 7
    return bytes(reversed(out))


def read_varlen(data: bytes, pos: int, end: int) -> tuple[int, bytes, int]:
    """Decode one variable-length quantity; returns (value, raw bytes, new pos)."""
    start = pos
    value = 0
    while True:
        if pos >= end:
            raise SMFError("truncated variable-length quantity", offset=start)
        byte = data[pos]
        pos += 1
        value = (value << 7) | (byte & 0x7F)
        if not byte & 0x80:
            return value, bytes(data[start:pos]), pos
        if pos - start >= 4:
            raise SMFError("variable-length quantity longer than 4 bytes", offset=start)


@dataclass
class TrackEvent:
    """One track event: decoded view plus the bytes it came from.

    ``data`` holds everything after the status byte (for meta events: the
    type byte, the raw length quantity and the payload).  ``delta_raw`` is
    the original delta encoding, or None for synthesized events.  ``tick``
    is the absolute time, maintained by the parser and the renderer.
    """

    delta: int
    status: int
    data: bytes
    has_status: bool = True
    delta_raw: bytes | None = None
    tick: int = 0

    # -- channel-voice views ------------------------------------------------

    @property
    def channel(self) -> int:
        return self.status & 0x0F

    def is_channel_event(self) -> bool:
        return self.status < 0xF0

    def is_note_on(self) -> bool:
        return (self.status & 0xF0) == 0x90 and self.data[1] != 0

    def is_note_off(self) -> bool:
        kind = self.status & 0xF0
        return kind == 0x80 or (kind == 0x90 and self.data[1] == 0)

    def is_note_event(self) -> bool:
        return (self.status & 0xF0) in (0x80, 0x90)

    @property
    def note(self) -> int:
        return self.data[0]

    @property
    def velocity(self) -> int:
        return self.data[1]

    def is_end_of_track(self) -> bool:
        return self.status == META and self.data[:1] == bytes([META_END_OF_TRACK])

    def is_tempo(self) -> bool:
        return self.status == META and self.data[:1] == bytes([META_TEMPO])

    def tempo_us(self) -> int:
        payload = self.data[2:5]  # type byte + 1-byte length 3 + payload
        return int.from_bytes(payload, "big")

    def with_note(self, note: int) -> "TrackEvent":
        """Copy of a note event with the note number byte replaced."""
        if not 0 <= note <= 127:
            raise ValueError(f"note must fit in 7 bits, got {note}")
        data = bytes([note]) + self.data[1:]
        return TrackEvent(self.delta, self.status, data, self.has_status,
                          self.delta_raw, self.tick)


@dataclass
class MidiTrack:
    events: list[TrackEvent] = field(default_factory=list)

    def end_tick(self) -> int:
        return self.events[-1].tick if self.events else 0


@dataclass
class ForeignChunk:
    """Non-MTrk chunk carried through verbatim."""

    fourcc: bytes
    payload: bytes


@dataclass
class MidiFile:
    format: int
    ntrks: int
    division: int
    division_raw: bytes
    chunks: list[Union[MidiTrack, ForeignChunk]] = field(default_factory=list)
    header_extra: bytes = b""

    @property
    def tracks(self) -> list[MidiTrack]:
        return [c for c in self.chunks if isinstance(c, MidiTrack)]

    def is_smpte(self) -> bool:
        return bool(self.division & 0x8000)

    def ticks_per_quarter(self) -> int:
        if self.is_smpte():
            raise ValueError("SMPTE division has no ticks-per-quarter")
        return self.division

    def ticks_per_second(self) -> int:
        if not self.is_smpte():
            raise ValueError("PPQN division has no fixed ticks-per-second")
        fps = 256 - (self.division >> 8)  # high byte is negative frame rate
        return fps * (self.division & 0xFF)


# ---------------------------------------------------------------------------
# reading


def read_smf(data: bytes) -> MidiFile:
    if len(data) < 14 or data[:4] != b"MThd":
        raise SMFError("not a standard MIDI file (missing MThd)", offset=0)
    (header_len,) = struct.unpack_from(">I", data, 4)
    if header_len < 6 or 8 + header_len > len(data):
        raise SMFError(f"bad header length {header_len}", offset=4)
    fmt, ntrks = struct.unpack_from(">HH", data, 8)
    division_raw = bytes(data[12:14])
    (division,) = struct.unpack(">H", division_raw)
    header_extra = bytes(data[14:8 + header_len])
    if fmt not in (0, 1):
        raise SMFError(f"unsupported SMF format {fmt}", offset=8)
    chunks: list[Union[MidiTrack, ForeignChunk]] = []
    pos = 8 + header_len
    while pos < len(data):
        if pos + 8 > len(data):
            raise SMFError("truncated chunk header", offset=pos)
        fourcc = bytes(data[pos:pos + 4])
        (length,) = struct.unpack_from(">I", data, pos + 4)
        body_start = pos + 8
        body_end = body_start + length
        if body_end > len(data):
            raise SMFError(f"chunk {fourcc!r} overruns the file", offset=pos)
        if fourcc == b"MTrk":
            chunks.append(_read_track(data, body_start, body_end))
        else:
            chunks.append(ForeignChunk(fourcc, bytes(data[body_start:body_end])))
        pos = body_end
    if len([c for c in chunks if isinstance(c, MidiTrack)]) != ntrks:
        raise SMFError(
            f"header promises {ntrks} tracks, file has "
            f"{len([c for c in chunks if isinstance(c, MidiTrack)])}"
        )
    return MidiFile(fmt, ntrks, division, division_raw, chunks, header_extra)


_DATA_BYTES = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}


def _read_track(data: bytes, start: int, end: int) -> MidiTrack:
    events: list[TrackEvent] = []
    pos = start
    running: int | None = None
    tick = 0
    while pos < end:
        delta, delta_raw, pos = read_varlen(data, pos, end)
        tick += delta
        if pos >= end:
            raise SMFError("event truncated after delta time", offset=pos)
        first = data[pos]
        if first & 0x80:
            status = first
            has_status = True
            pos += 1
        else:
            if running is None:
                raise SMFError("running status with no preceding status byte",
                               offset=pos)
            status = running
            has_status = False
        if status < 0xF0:
            running = status
            n = _DATA_BYTES[status & 0xF0]
            if pos + n > end:
                raise SMFError("channel event truncated", offset=pos)
            payload = bytes(data[pos:pos + n])
            if any(b & 0x80 for b in payload):
                raise SMFError("data byte with high bit set", offset=pos)
            pos += n
        elif status == META:
            running = None
            if pos >= end:
                raise SMFError("meta event truncated", offset=pos)
            type_pos = pos
            pos += 1
            length, _raw, pos = read_varlen(data, pos, end)
            if pos + length > end:
                raise SMFError("meta payload truncated", offset=pos)
            pos += length
            payload = bytes(data[type_pos:pos])
        elif status in (SYSEX, SYSEX_CONT):
            running = None
            len_pos = pos
            length, _raw, pos = read_varlen(data, pos, end)
            if pos + length > end:
                raise SMFError("sysex payload truncated", offset=len_pos)
            pos += length
            payload = bytes(data[len_pos:pos])
        else:
            raise SMFError(f"illegal status byte 0x{status:02X} in file",
                           offset=pos - 1)
        events.append(TrackEvent(delta, status, payload, has_status,
                                 delta_raw, tick))
    return MidiTrack(events)


# ---------------------------------------------------------------------------
# writing


def write_smf(mf: MidiFile) -> bytes:
    header_body = struct.pack(">HH", mf.format, mf.ntrks) + mf.division_raw
    header_body += mf.header_extra
    out = bytearray(b"MThd" + struct.pack(">I", len(header_body)) + header_body)
    for chunk in mf.chunks:
        if isinstance(chunk, ForeignChunk):
            out += chunk.fourcc + struct.pack(">I", len(chunk.payload))
            out += chunk.payload
            continue
        body = bytearray()
        for ev in chunk.events:
            if ev.delta_raw is not None and _varlen_value(ev.delta_raw) == ev.delta:
                body += ev.delta_raw
            else:
                body += encode_varlen(ev.delta)
            if ev.has_status:
                body.append(ev.status)
            body += ev.data
        out += b"MTrk" + struct.pack(">I", len(body)) + bytes(body)
    return bytes(out)


def _varlen_value(raw: bytes) -> int:
    value = 0
    for byte in raw:
        value = (value << 7) | (byte & 0x7F)
    return value


def normalize_running_status(events: list[TrackEvent]) -> None:
    """Force explicit status bytes wherever the running chain was broken.

    After the renderer drops or inserts events, an event parsed without a
    status byte may no longer follow a matching one; this walks the final
    stream and repairs ``has_status`` in place.  Events that already carry
    their status are left untouched, so unmodified streams keep their exact
    original bytes.
    """
    running: int | None = None
    for ev in events:
        if ev.is_channel_event():
            if not ev.has_status and running != ev.status:
                ev.has_status = True
            running = ev.status
        else:
            running = None  # meta and sysex cancel running status


# ---------------------------------------------------------------------------
# event builders (fixtures, renderer output)


def note_on_event(delta: int, note: int, velocity: int, channel: int = 0,
                  tick: int = 0) -> TrackEvent:
    _check_7bit(note=note, velocity=velocity)
    return TrackEvent(delta, 0x90 | channel, bytes([note, velocity]), tick=tick)


def note_off_event(delta: int, note: int, velocity: int = 0, channel: int = 0,
                   tick: int = 0) -> TrackEvent:
    _check_7bit(note=note, velocity=velocity)
    return TrackEvent(delta, 0x80 | channel, bytes([note, velocity]), tick=tick)


def meta_event(delta: int, meta_type: int, payload: bytes = b"",
               tick: int = 0) -> TrackEvent:
    data = bytes([meta_type]) + encode_varlen(len(payload)) + payload
    return TrackEvent(delta, META, data, tick=tick)


def end_of_track_event(delta: int = 0, tick: int = 0) -> TrackEvent:
    return meta_event(delta, META_END_OF_TRACK, b"", tick=tick)


def tempo_event(delta: int, us_per_quarter: int, tick: int = 0) -> TrackEvent:
    return meta_event(delta, META_TEMPO, us_per_quarter.to_bytes(3, "big"),
                      tick=tick)


def new_single_track_file(events: list[TrackEvent], division: int = 480) -> MidiFile:
    return MidiFile(
        format=0,
        ntrks=1,
        division=division,
        division_raw=struct.pack(">H", division),
        chunks=[MidiTrack(list(events))],
    )


def _check_7bit(**fields: int) -> None:
    for name, value in fields.items():
        if not 0 <= value <= 127:
            raise ValueError(f"{name} must be in 0..127, got {value}")
