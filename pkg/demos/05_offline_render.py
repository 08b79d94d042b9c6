"""Offline rendering: the same transforms, applied to a MIDI file.

Builds a four-bar loop of C-major triads, writes a command script that
switches transforms bar by bar, renders the file through the same note
engine the live path uses, and prints both note timelines.  An empty
script leaves the file byte-for-byte untouched.
"""

import tempfile
from pathlib import Path

from livescaler.render import parse_command_script, render_offline
from livescaler.smf import (
    end_of_track_event,
    new_single_track_file,
    note_off_event,
    note_on_event,
    read_smf,
    write_smf,
)

NOTE_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]

SCRIPT = """\
# bar 2: relative minor, bar 3: fifth up, bar 4: back to identity
at 960  {"v":1,"seq":1,"kind":"affine","mu":-1,"tau":4,"key_offset":0,"anchor_midi":60,"base":12}
at 1920 {"v":1,"seq":2,"kind":"affine","mu":1,"tau":7,"key_offset":0,"anchor_midi":60,"base":12}
at 2880 {"v":1,"seq":3,"kind":"affine","mu":1,"tau":0,"key_offset":0,"anchor_midi":60,"base":12}
"""


def triad_loop(bars, ticks_per_bar=960):
    events = []
    for k in range(bars):
        at = k * ticks_per_bar
        gap = 0 if k == 0 else ticks_per_bar // 2
        events += [
            note_on_event(gap, 60, 100, tick=at),
            note_on_event(0, 64, 100, tick=at),
            note_on_event(0, 67, 100, tick=at),
            note_off_event(ticks_per_bar // 2, 60, tick=at + ticks_per_bar // 2),
            note_off_event(0, 64, tick=at + ticks_per_bar // 2),
            note_off_event(0, 67, tick=at + ticks_per_bar // 2),
        ]
    events.append(end_of_track_event(delta=ticks_per_bar // 2,
                                     tick=bars * ticks_per_bar))
    return new_single_track_file(events)


def timeline(mf):
    lines = []
    for ev in mf.tracks[0].events:
        if ev.is_note_on():
            lines.append(f"  tick {ev.tick:>5}: on  {ev.note:>3}"
                         f" ({NOTE_NAMES[ev.note % 12]})")
        elif ev.is_note_off():
            lines.append(f"  tick {ev.tick:>5}: off {ev.note:>3}")
    return "\n".join(lines)


def main():
    source = triad_loop(4)
    print("source:")
    print(timeline(source))

    rendered = render_offline(source, parse_command_script(SCRIPT))
    print()
    print("rendered (script switches transform at each bar line):")
    print(timeline(rendered))

    untouched = render_offline(source, [])
    assert write_smf(untouched) == write_smf(source)
    print()
    print("empty script: output is byte-for-byte the input")

    out_dir = Path(tempfile.mkdtemp(prefix="livescaler-demo-"))
    (out_dir / "source.mid").write_bytes(write_smf(source))
    (out_dir / "rendered.mid").write_bytes(write_smf(rendered))
    reread = read_smf((out_dir / "rendered.mid").read_bytes())
    assert write_smf(reread) == write_smf(rendered)
    print(f"files written under {out_dir}")


if __name__ == "__main__":
    main()
