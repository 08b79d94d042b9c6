"""What each switch mode does to notes held across a transform change.

The same scene plays four times: a C-major triad is sounding, the
conductor switches from identity to the relative-minor map <-1, 4>, the
keys stay down, then everything is released.  Each mode resolves the
held notes differently: Stop cuts them, Legato slides them, ReTrigger
re-strikes them after the configured delay, Wait leaves them alone until
the next keystroke on that channel.
"""

from livescaler.engine import (
    EngineConfig,
    Flush,
    NoteEngine,
    NoteOff,
    NoteOn,
    OutNoteOn,
    SwitchMode,
    TransformChange,
)
from livescaler.pitch import (
    AffineTransform,
    RangeBounds,
    ScaleTransform,
    Temperament,
)

CHORD = (60, 64, 67)
RELATIVE_MINOR = ScaleTransform(AffineTransform(-1, 4))


def describe(out):
    if isinstance(out, OutNoteOn):
        delay = f" after {out.delay_us}us" if out.delay_us else ""
        return f"on  {out.note}{delay}"
    return f"off {out.note}"


def play_scene(mode):
    config = EngineConfig(
        mode=mode,
        bounds=RangeBounds(6, 6),
        temperament=Temperament(60),
        retrigger_delay_us=10_000,
    )
    engine = NoteEngine(config)
    print(f"{mode.value}:")
    for note in CHORD:
        outs = engine.process_event(NoteOn(note, 96))
        print(f"  press {note:<3} -> {', '.join(describe(o) for o in outs)}")
    outs = engine.apply_transform_change(RELATIVE_MINOR)
    print(f"  switch to <-1,4> -> {', '.join(describe(o) for o in outs) or '(nothing)'}")
    for note in CHORD:
        outs = engine.process_event(NoteOff(note))
        shown = ", ".join(describe(o) for o in outs) or "(swallowed)"
        print(f"  release {note:<3} -> {shown}")
    leftovers = engine.process_event(Flush())
    if leftovers:
        print(f"  flush -> {', '.join(describe(o) for o in leftovers)}")
    print()


def main():
    for mode in SwitchMode:
        play_scene(mode)


if __name__ == "__main__":
    main()
