"""Periodic maps as scale quantizers.

A periodic map lists one image per step of its interval, so a 12-step map
that snaps every chromatic note onto the nearest C-major degree is twelve
lines of text.  This demo parses that map from its text form, pushes a
chromatic run through it, and shows how unison collisions fall out.
"""

from livescaler.pitch import (
    PeriodicMap,
    RangeBounds,
    ScaleTransform,
    Temperament,
    format_periodic_map,
    parse_periodic_map,
    transform_midi_note,
)

NOTE_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]

MAJOR_SNAP = """\
# chromatic -> C major, ties rounded down
interval 12
0 0
1 0
2 2
3 2
4 4
5 5
6 5
7 7
8 7
9 9
10 9
11 11
"""


def main():
    quantizer = parse_periodic_map(MAJOR_SNAP)
    print("parsed map, round-tripped through its text form:")
    print(format_periodic_map(quantizer))

    transform = ScaleTransform(quantizer)
    temperament = Temperament(60)
    bounds = RangeBounds(6, 6)
    print("chromatic run, quantized:")
    for m in range(60, 73):
        out = transform_midi_note(m, transform, temperament, bounds)
        marker = "" if out == m else f"  (was {NOTE_NAMES[m % 12]})"
        print(f"  {m} -> {out}  {NOTE_NAMES[out % 12]}{marker}")

    # a map may push a step past its own period: this one lifts the
    # leading tone up into the next octave's tonic
    lifted = PeriodicMap(12, [0, 0, 2, 2, 4, 5, 5, 7, 7, 9, 9, 12])
    print()
    print("leading tone lifted across the period boundary:")
    for m in (71, 83):
        out = transform_midi_note(
            m, ScaleTransform(lifted), temperament, bounds
        )
        print(f"  {m} ({NOTE_NAMES[m % 12]}) -> {out} ({NOTE_NAMES[out % 12]})")


if __name__ == "__main__":
    main()
