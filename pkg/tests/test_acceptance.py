"""The shipping checklist: one test per acceptance criterion.

Every test here restates its oracle from first principles (no imports
from the other test modules except the shared fuzz harness), so the suite
stands alone as the go/no-go gate.  conftest prints one PASS/FAIL line
per criterion at the end of the run.
"""

import json
import math
import random
import struct
import time

from conftest import ACCEPTANCE_NOTES
from fuzz_util import run_hygiene_fuzz

from livescaler.bench import run_latency_benchmark
from livescaler.conductor import (
    ConductorSurface,
    GlobalTransformMsg,
    MessageDecodeError,
    PadEvent,
    decode_msg,
    encode_msg,
)
from livescaler.engine import SwitchMode
from livescaler.pitch import (
    AffineTransform,
    PeriodicMap,
    RangeBounds,
    ScaleTransform,
    Temperament,
    affine_apply,
    degree_transform,
    pitch_class_image_set,
    restrict_interval,
    toggle_quality,
    transform_midi_note,
)
from livescaler.render import parse_command_script, render_offline
from livescaler.smf import (
    end_of_track_event,
    new_single_track_file,
    note_off_event,
    note_on_event,
    read_smf,
    write_smf,
)

# triads as pitch-class sets, by root name
CMA, CMI = {0, 4, 7}, {0, 3, 7}
DMI, DMA = {2, 5, 9}, {2, 6, 9}
EMI, FMA = {4, 7, 11}, {5, 9, 0}
GMA, AMI = {7, 11, 2}, {9, 0, 4}
AMA, BMI = {9, 1, 4}, {11, 2, 6}
BO, FSO = {11, 2, 5}, {6, 9, 0}


def pc_image(mu, tau, anchor_pc, pcs):
    return {(anchor_pc + mu * (p - anchor_pc) + tau) % 12 for p in pcs}


def test_relative_key_chord_table_both_anchors():
    """All 14 triad mappings under <-1,4>: 7 anchored at C, 7 at G."""
    at_c = [
        (CMA, AMI), (DMI, GMA), (EMI, FMA), (FMA, EMI),
        (GMA, DMI), (AMI, CMA), (BO, BO),
    ]
    at_g = [
        (GMA, EMI), (AMI, DMA), (BMI, CMA), (CMA, BMI),
        (DMA, AMI), (EMI, GMA), (FSO, FSO),
    ]
    for source, target in at_c:
        assert pc_image(-1, 4, 0, source) == target
    for source, target in at_g:
        assert pc_image(-1, 4, 7, source) == target
    # the full pipeline agrees with the pitch-class arithmetic
    transform = ScaleTransform(AffineTransform(-1, 4))
    temput = Temperament(60, 12)
    image = {
        transform_midi_note(m, transform, temput, RangeBounds(6, 6)) % 12
        for m in (60, 64, 67)
    }
    assert image == AMI


def test_degree_transforms_yield_the_diatonic_triads():
    targets = {
        "I": CMA, "ii": DMI, "iii": EMI, "IV": FMA,
        "V": GMA, "vi": AMI, "vii": BMI,
    }
    for degree, target in targets.items():
        a = degree_transform(degree)
        assert pc_image(a.mu, a.tau, 0, CMA) == target, degree


def test_doubling_map_images_of_both_scales():
    """A<2,0> on the C-major and C-natural-minor scale degrees."""
    a = AffineTransform(2, 0)
    major = [0, 2, 4, 5, 7, 9, 11]
    minor = [0, 2, 3, 5, 7, 8, 10]
    assert [affine_apply(a, n) % 12 for n in major] == [0, 4, 8, 10, 2, 6, 10]
    assert [affine_apply(a, n) % 12 for n in minor] == [0, 4, 6, 10, 2, 4, 8]


def test_image_cardinality_law_exhaustive():
    """|image| = base/gcd(mu, base) for every mu in [-12,12], base in [1,24]."""
    checked = 0
    for mu in range(-12, 13):
        for base in range(1, 25):
            for tau in (0, 5):
                size = len(pitch_class_image_set(AffineTransform(mu, tau), base))
                assert size == base // math.gcd(mu, base), (mu, tau, base)
                checked += 1
    ACCEPTANCE_NOTES["test_image_cardinality_law_exhaustive"] = f"{checked} combos"


def test_pitch_class_preservation_random():
    """Congruent inputs mod base keep congruent images: 10^4 random draws."""
    rng = random.Random(20260819)
    for _ in range(10_000):
        base = rng.randint(1, 24)
        mu = rng.randint(-24, 24)
        tau = rng.randint(-24, 24)
        n1 = rng.randint(-200, 200)
        n2 = n1 + rng.randint(-8, 8) * base
        a = AffineTransform(mu, tau)
        assert (affine_apply(a, n1) - affine_apply(a, n2)) % base == 0


def test_range_restriction_random_against_oracle():
    """10^4 random restrictions: window membership, congruence, idempotence,
    and agreement with a brute-force scan of all congruent candidates."""
    rng = random.Random(0xD1A7)
    for _ in range(10_000):
        base = rng.randint(1, 24)
        delta_minus = rng.randint(0, 30)
        delta_plus = rng.randint(max(base - 1 - delta_minus, 0), 30)
        n_orig = rng.randint(-50, 177)
        n_raw = rng.randint(-300, 300)
        bounds = RangeBounds(delta_minus, delta_plus)
        got = restrict_interval(n_orig, n_raw, bounds, base)
        lo, hi = n_orig - delta_minus, n_orig + delta_plus
        assert lo <= got <= hi
        assert (got - n_raw) % base == 0
        if lo <= n_raw <= hi:
            assert got == n_raw
        candidates = [x for x in range(lo, hi + 1) if (x - n_raw) % base == 0]
        assert got == min(candidates, key=lambda x: (abs(x - n_raw), x))


def test_quality_toggle_involution_and_relative_chords():
    for mu in (-4, -3, -2, -1, 1, 2, 3, 4):
        for tau in range(-12, 13):
            a = AffineTransform(mu, tau)
            assert toggle_quality(toggle_quality(a)) == a
    # I toggles to the parallel minor, ii toggles to the major supertonic
    to_minor = toggle_quality(degree_transform("I"))
    assert pc_image(to_minor.mu, to_minor.tau, 0, CMA) == CMI
    to_major_ii = toggle_quality(degree_transform("ii"))
    assert to_major_ii == AffineTransform(1, 2)
    assert pc_image(to_major_ii.mu, to_major_ii.tau, 0, CMA) == DMA


def test_note_stream_hygiene_fuzz_all_modes():
    """10^4 random event/transform interleavings per switch mode, each
    ending in a flush: no stuck notes, no double-ons, no negative counts."""
    started = time.time()
    emitted = 0
    for seed, mode in enumerate(SwitchMode):
        emitted += run_hygiene_fuzz(mode, 10_000, seed=seed)
    elapsed = time.time() - started
    assert elapsed < 30
    ACCEPTANCE_NOTES["test_note_stream_hygiene_fuzz_all_modes"] = (
        f"4x10000 scenarios, {emitted} notes, {elapsed:.1f}s"
    )


def _summer_nights_script():
    """Drive the surface through the scripted progression, one chord per
    broadcast, and return the command script text."""
    surface = ConductorSurface()

    def press(role):
        pad = next(p for p, r in surface.layout.items() if r == role)
        msg = surface.pad_transition(PadEvent(pad[0], pad[1], "down"))
        surface.pad_transition(PadEvent(pad[0], pad[1], "up"))
        return msg

    pad_mod = next(p for p, r in surface.layout.items() if r == "mod")
    surface.pad_transition(PadEvent(pad_mod[0], pad_mod[1], "down"))
    press("II")  # modulate: the new key is two semitones up
    surface.pad_transition(PadEvent(pad_mod[0], pad_mod[1], "up"))
    lines = []
    for i, degree in enumerate(("I", "IV", "V", "IV", "I", "IV", "V")):
        record = encode_msg(press(degree)).decode("utf-8").strip()
        lines.append(f"at {480 * i} {record}")
    return "\n".join(lines) + "\n"


def test_offline_render_fixtures():
    """Identity byte-equality, the inversion triad fixture, and the
    scripted progression prefix."""
    started = time.time()
    # 1. identity: running status and velocity-0 offs survive untouched
    body = bytes.fromhex(
        "00 c0 05 00 90 3c 64 00 40 64 8148 3c 00 00 40 00 00 ff 2f 00"
        .replace(" ", "")
    )
    blob = (
        b"MThd" + struct.pack(">IHHH", 6, 0, 1, 480)
        + b"MTrk" + struct.pack(">I", len(body)) + body
    )
    identity = 'at 0 {"v":1,"seq":1,"kind":"affine","mu":1,"tau":0,' \
               '"key_offset":0,"anchor_midi":60,"base":12}'
    for script_text in ("", identity):
        script = parse_command_script(script_text)
        assert write_smf(render_offline(read_smf(blob), script)) == blob

    # 2. a looping C-major triad under <-1,4> comes out all A-minor
    events = []
    for k in range(4):
        at = 960 * k
        events += [
            note_on_event(0 if k == 0 else 480, 60, 100, tick=at),
            note_on_event(0, 64, 100, tick=at),
            note_on_event(0, 67, 100, tick=at),
            note_off_event(480, 60, tick=at + 480),
            note_off_event(0, 64, tick=at + 480),
            note_off_event(0, 67, tick=at + 480),
        ]
    events.append(end_of_track_event(delta=480, tick=4 * 960))
    looping = new_single_track_file(events)
    inversion = parse_command_script(
        'at 0 {"v":1,"seq":1,"kind":"affine","mu":-1,"tau":4,'
        '"key_offset":0,"anchor_midi":60,"base":12}'
    )
    rendered = render_offline(looping, inversion)
    chords = {}
    for ev in rendered.tracks[0].events:
        if ev.is_note_on():
            chords.setdefault(ev.tick, set()).add(ev.note % 12)
    assert len(chords) == 4
    assert all(pcs == AMI for pcs in chords.values())

    # 3. the scripted progression over repeated C-major triads
    events = []
    for k in range(7):
        at = 480 * k
        events += [
            note_on_event(0 if k == 0 else 80, 60, 100, tick=at),
            note_on_event(0, 64, 100, tick=at),
            note_on_event(0, 67, 100, tick=at),
            note_off_event(400, 60, tick=at + 400),
            note_off_event(0, 64, tick=at + 400),
            note_off_event(0, 67, tick=at + 400),
        ]
    events.append(end_of_track_event(delta=80, tick=7 * 480))
    progression = new_single_track_file(events)
    script = parse_command_script(_summer_nights_script())
    rendered = render_offline(progression, script)
    chords = {}
    for ev in rendered.tracks[0].events:
        if ev.is_note_on():
            chords.setdefault(ev.tick, set()).add(ev.note % 12)
    got = [chords[480 * k] for k in range(7)]
    assert got == [DMA, GMA, AMA, GMA, DMA, GMA, AMA]
    elapsed = time.time() - started
    assert elapsed < 5
    ACCEPTANCE_NOTES["test_offline_render_fixtures"] = f"{elapsed * 1000:.0f}ms"


def test_gesture_dispatch_latency_p99_under_1ms():
    report = run_latency_benchmark(gestures=10_000, instruments=4)
    note = (
        f"p50={report.p50_us:.0f}us p90={report.p90_us:.0f}us "
        f"p99={report.p99_us:.0f}us max={report.max_us:.0f}us"
    )
    ACCEPTANCE_NOTES["test_gesture_dispatch_latency_p99_under_1ms"] = note
    print(report.format())
    assert report.p99_us < 1000


def test_wire_protocol_round_trip_and_rejection():
    rng = random.Random(0xACCE55)
    for i in range(10_000):
        key_offset = rng.randint(-24, 24)
        anchor = rng.randint(0, 127)
        base = rng.randint(1, 64)
        if rng.random() < 0.5:
            kind = AffineTransform(rng.randint(-12, 12), rng.randint(-48, 48))
        else:
            interval = rng.randint(1, 16)
            kind = PeriodicMap(
                interval,
                [rng.randint(-24, 24) for _ in range(interval)],
            )
        msg = GlobalTransformMsg(
            seq=rng.randint(0, 10**6),
            transform=ScaleTransform(kind, key_offset),
            anchor_midi=anchor,
            base=base,
        )
        assert decode_msg(encode_msg(msg)) == msg

    good = json.loads(
        '{"v":1,"seq":1,"kind":"affine","mu":1,"tau":0,'
        '"key_offset":0,"anchor_midi":60,"base":12}'
    )

    def damaged(**changes):
        record = dict(good)
        for key, value in changes.items():
            if value is ...:
                record.pop(key, None)
            else:
                record[key] = value
        return json.dumps(record).encode()

    malformed = [
        b"",
        b"\n",
        b"{",
        b"[1,2]",
        b'"record"',
        b"\xff\xfe not utf8",
        damaged(v=...),
        damaged(v=2),
        damaged(v="1"),
        damaged(seq=...),
        damaged(seq=True),
        damaged(seq=1.5),
        damaged(kind=...),
        damaged(kind="spiral"),
        damaged(mu=...),
        damaged(mu="1"),
        damaged(tau=None),
        damaged(key_offset=...),
        damaged(anchor_midi=...),
        damaged(base=0),
    ]
    assert len(malformed) == 20
    rejected = 0
    for record in malformed:
        try:
            decode_msg(record)
        except MessageDecodeError:
            rejected += 1
    assert rejected == 20
    ACCEPTANCE_NOTES["test_wire_protocol_round_trip_and_rejection"] = (
        "10000 round-trips, 20/20 rejected"
    )
