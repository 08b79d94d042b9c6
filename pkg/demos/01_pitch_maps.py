"""Affine pitch maps on diatonic triads.

Walks the seven triads of C major through the relative-key map <-1, 4>
(the one that swaps each major chord with its relative minor), first
anchored at middle C and then at G, and closes with the image-size law
that predicts how many pitch classes a map can reach.
"""

import math

from livescaler.pitch import (
    AffineTransform,
    RangeBounds,
    ScaleTransform,
    Temperament,
    pitch_class_image_set,
    transform_midi_note,
)

NOTE_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]

TRIADS = [
    ("C", (60, 64, 67)),
    ("Dm", (62, 65, 69)),
    ("Em", (64, 67, 71)),
    ("F", (65, 69, 72)),
    ("G", (67, 71, 74)),
    ("Am", (69, 72, 76)),
    ("Bdim", (71, 74, 77)),
]


def name(note):
    return f"{NOTE_NAMES[note % 12]}{note // 12 - 1}"


def show_table(anchor_midi):
    transform = ScaleTransform(AffineTransform(-1, 4))
    temperament = Temperament(anchor_midi)
    bounds = RangeBounds(6, 6)
    print(f"map <-1,4> anchored at {name(anchor_midi)}:")
    for label, notes in TRIADS:
        mapped = [transform_midi_note(m, transform, temperament, bounds)
                  for m in notes]
        src = " ".join(name(m) for m in notes)
        dst = " ".join(name(m) for m in mapped)
        print(f"  {label:<5} {src:<12} ->  {dst}")
    print()


def main():
    show_table(60)
    show_table(67)

    print("image sizes: |image| = base / gcd(mu, base)")
    for mu in (1, 2, 3, 4, 6, 12):
        size = len(pitch_class_image_set(AffineTransform(mu, 0), 12))
        print(f"  mu={mu:>2}: reaches {size:>2} of 12 pitch classes"
              f" (12 / gcd = {12 // math.gcd(mu, 12)})")


if __name__ == "__main__":
    main()
