"""Tests for the byte-preserving MIDI file codec."""

import struct

import pytest
from hypothesis import given
from hypothesis import strategies as st

from livescaler.smf import (
    ForeignChunk,
    MidiFile,
    MidiTrack,
    SMFError,
    encode_varlen,
    end_of_track_event,
    meta_event,
    new_single_track_file,
    normalize_running_status,
    note_off_event,
    note_on_event,
    read_smf,
    read_varlen,
    tempo_event,
    write_smf,
)


def header(fmt=0, ntrks=1, division=480):
    return b"MThd" + struct.pack(">IHHH", 6, fmt, ntrks, division)


def track(body: bytes) -> bytes:
    return b"MTrk" + struct.pack(">I", len(body)) + body


# ---------------------------------------------------------------------------
# variable-length quantities


@pytest.mark.parametrize(
    "value, encoded",
    [
        (0x00, b"\x00"),
        (0x40, b"\x40"),
        (0x7F, b"\x7f"),
        (0x80, b"\x81\x00"),
        (0x2000, b"\xc0\x00"),
        (0x3FFF, b"\xff\x7f"),
        (0x4000, b"\x81\x80\x00"),
        (0x1FFFFF, b"\xff\xff\x7f"),
        (0x200000, b"\x81\x80\x80\x00"),
        (0x0FFFFFFF, b"\xff\xff\xff\x7f"),
    ],
)
def test_varlen_canonical_pairs(value, encoded):
    assert encode_varlen(value) == encoded
    decoded, raw, pos = read_varlen(encoded, 0, len(encoded))
    assert (decoded, raw, pos) == (value, encoded, len(encoded))


@given(st.integers(min_value=0, max_value=0x0FFFFFFF))
def test_varlen_round_trip(value):
    raw = encode_varlen(value)
    decoded, seen, _ = read_varlen(raw, 0, len(raw))
    assert decoded == value
    assert seen == raw


def test_varlen_rejects_out_of_range():
    with pytest.raises(ValueError):
        encode_varlen(-1)
    with pytest.raises(ValueError):
        encode_varlen(1 << 28)


def test_varlen_redundant_encoding_decodes_but_is_not_canonical():
    decoded, raw, _ = read_varlen(b"\x80\x00", 0, 2)
    assert decoded == 0
    assert raw == b"\x80\x00"
    assert encode_varlen(0) == b"\x00"


def test_varlen_longer_than_four_bytes_is_an_error():
    with pytest.raises(SMFError):
        read_varlen(b"\x80\x80\x80\x80\x00", 0, 5)


def test_varlen_truncated_is_an_error():
    with pytest.raises(SMFError):
        read_varlen(b"\x81", 0, 1)


# ---------------------------------------------------------------------------
# byte-exact round trips


RUNNING_STATUS_FILE = header() + track(
    bytes.fromhex(
        "00 90 3c 64"  # note on C4, explicit status
        "00 40 64"     # note on E4 via running status
        "8148 3c 00"   # delta 200: C4 off as velocity-0 on, running status
        "00 80 40 40"  # E4 off, explicit status with release velocity
        "00 ff 2f 00"  # end of track
        .replace(" ", "")
    )
)

REDUNDANT_DELTA_FILE = header() + track(
    bytes.fromhex("8000 90 3c 64" "00 ff 2f 00".replace(" ", ""))
)

META_AND_SYSEX_FILE = header() + track(
    bytes.fromhex(
        "00 ff 51 03 07 a1 20"        # tempo 500000
        "00 f0 03 43 12 f7"           # sysex
        "00 90 3c 64"                 # explicit status required after sysex
        "10 3c 00"                    # running status off
        "00 ff 2f 00".replace(" ", "")
    )
)

TWO_TRACK_FILE = (
    header(fmt=1, ntrks=2)
    + track(bytes.fromhex("00 ff 51 03 06 1a 80" "00 ff 2f 00".replace(" ", "")))
    + b"Xtra" + struct.pack(">I", 3) + b"\x01\x02\x03"
    + track(bytes.fromhex("00 91 45 50" "30 81 45 00" "00 ff 2f 00".replace(" ", "")))
)


@pytest.mark.parametrize(
    "blob",
    [RUNNING_STATUS_FILE, REDUNDANT_DELTA_FILE, META_AND_SYSEX_FILE, TWO_TRACK_FILE],
    ids=["running-status", "redundant-delta", "meta-and-sysex", "two-track-foreign"],
)
def test_write_read_is_byte_identity(blob):
    assert write_smf(read_smf(blob)) == blob


def test_running_status_events_decode_correctly():
    mf = read_smf(RUNNING_STATUS_FILE)
    events = mf.tracks[0].events
    assert [e.has_status for e in events] == [True, False, False, True, True]
    assert [e.tick for e in events] == [0, 0, 200, 200, 200]
    assert events[0].is_note_on() and events[0].note == 0x3C
    assert events[2].is_note_off() and events[2].velocity == 0
    assert events[3].is_note_off() and events[3].velocity == 0x40
    assert events[4].is_end_of_track()


def test_redundant_delta_raw_is_preserved():
    mf = read_smf(REDUNDANT_DELTA_FILE)
    ev = mf.tracks[0].events[0]
    assert ev.delta == 0
    assert ev.delta_raw == b"\x80\x00"


def test_meta_and_sysex_parse():
    mf = read_smf(META_AND_SYSEX_FILE)
    tempo, sysex, on, off, eot = mf.tracks[0].events
    assert tempo.is_tempo() and tempo.tempo_us() == 500_000
    assert sysex.status == 0xF0 and sysex.data == b"\x03\x43\x12\xf7"
    assert on.is_note_on() and off.is_note_off()
    assert off.tick == 0x10
    assert eot.is_end_of_track()


def test_foreign_chunk_rides_through():
    mf = read_smf(TWO_TRACK_FILE)
    assert mf.format == 1
    assert len(mf.tracks) == 2
    foreign = [c for c in mf.chunks if isinstance(c, ForeignChunk)]
    assert foreign == [ForeignChunk(b"Xtra", b"\x01\x02\x03")]
    second = mf.tracks[1].events
    assert second[0].channel == 1
    assert second[1].tick == 0x30


def test_builders_round_trip_through_bytes():
    events = [
        tempo_event(0, 480_000),
        note_on_event(0, 60, 100),
        note_on_event(0, 64, 100, channel=2),
        note_off_event(240, 60),
        note_off_event(0, 64, channel=2),
        end_of_track_event(),
    ]
    mf = new_single_track_file(events)
    parsed = read_smf(write_smf(mf))
    got = parsed.tracks[0].events
    assert [(e.status, e.data, e.delta) for e in got] == [
        (e.status, e.data, e.delta) for e in events
    ]
    assert [e.tick for e in got] == [0, 0, 0, 240, 240, 240]


def test_with_note_substitutes_only_the_note_byte():
    ev = read_smf(RUNNING_STATUS_FILE).tracks[0].events[2]
    moved = ev.with_note(67)
    assert moved.note == 67
    assert moved.velocity == ev.velocity
    assert moved.has_status is False
    assert moved.delta_raw == ev.delta_raw
    assert ev.note == 0x3C
    with pytest.raises(ValueError):
        ev.with_note(128)


# ---------------------------------------------------------------------------
# division variants


def test_ppqn_division():
    mf = read_smf(header(division=960) + track(b"\x00\xff\x2f\x00"))
    assert not mf.is_smpte()
    assert mf.ticks_per_quarter() == 960
    with pytest.raises(ValueError):
        mf.ticks_per_second()


def test_smpte_division():
    mf = read_smf(header(division=0xE728) + track(b"\x00\xff\x2f\x00"))
    assert mf.is_smpte()
    assert mf.ticks_per_second() == 25 * 40
    with pytest.raises(ValueError):
        mf.ticks_per_quarter()


# ---------------------------------------------------------------------------
# malformed input


@pytest.mark.parametrize(
    "blob, message",
    [
        (b"RIFF" + bytes(20), "missing MThd"),
        (b"MThd" + struct.pack(">I", 2) + bytes(10), "bad header length"),
        (header() + b"MTr", "truncated chunk header"),
        (header() + b"MTrk" + struct.pack(">I", 99) + b"\x00", "overruns"),
        (header(ntrks=2) + track(b"\x00\xff\x2f\x00"), "promises 2 tracks"),
        (header(fmt=2) + track(b"\x00\xff\x2f\x00"), "unsupported SMF format"),
        (header() + track(b"\x00\x3c\x64"), "running status with no preceding"),
        (header() + track(b"\x00\xf5\x00"), "illegal status byte 0xF5"),
        (header() + track(b"\x00\x90\x3c"), "channel event truncated"),
        (header() + track(b"\x00\x90\x3c\x80"), "data byte with high bit"),
        (header() + track(b"\x00\xff\x51\x03\x07"), "meta payload truncated"),
        (header() + track(b"\x00\xf0\x05\x43"), "sysex payload truncated"),
        (header() + track(b"\x81"), "truncated variable-length"),
        (header() + track(b"\x00\xff"), "meta event truncated"),
        (header() + track(b"\x00"), "event truncated after delta"),
    ],
)
def test_malformed_files_raise_with_context(blob, message):
    with pytest.raises(SMFError, match=message):
        read_smf(blob)


def test_error_carries_byte_offset():
    blob = header() + track(b"\x00\x3c\x64")
    with pytest.raises(SMFError) as exc_info:
        read_smf(blob)
    assert exc_info.value.offset == len(header()) + 8 + 1


# ---------------------------------------------------------------------------
# running-status repair


def test_normalize_marks_orphaned_running_status():
    mf = read_smf(RUNNING_STATUS_FILE)
    events = mf.tracks[0].events
    del events[0]  # the explicit note-on the others leaned on
    normalize_running_status(events)
    assert events[0].has_status is True
    assert events[1].has_status is False  # still follows a matching status
    roundtrip = read_smf(write_smf(mf))
    assert [(e.status, e.data) for e in roundtrip.tracks[0].events] == [
        (e.status, e.data) for e in events
    ]


def test_normalize_leaves_untouched_stream_alone():
    mf = read_smf(RUNNING_STATUS_FILE)
    events = mf.tracks[0].events
    before = [e.has_status for e in events]
    normalize_running_status(events)
    assert [e.has_status for e in events] == before
    assert write_smf(mf) == RUNNING_STATUS_FILE


def test_normalize_forces_status_after_interleaved_meta():
    events = [
        note_on_event(0, 60, 100),
        meta_event(0, 0x01, b"hi"),
        note_on_event(0, 64, 100),
    ]
    events[2].has_status = False  # pretend it relied on running status
    normalize_running_status(events)
    assert events[2].has_status is True
