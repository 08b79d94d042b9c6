"""A scripted session on the conductor pad grid.

Drives the surface through a short performance: plain degree presses,
a quality toggle, a history recall, and a modulation two semitones up,
printing the wire record each gesture broadcasts plus the key the UI
would display.
"""

from livescaler.conductor import ConductorSurface, PadEvent, encode_msg

NOTE_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]


def pad_for(surface, role):
    return next(p for p, r in surface.layout.items() if r == role)


def tap(surface, role):
    """Press and release one pad, returning the broadcast (if any)."""
    row, col = pad_for(surface, role)
    msg = surface.pad_transition(PadEvent(row, col, "down"))
    surface.pad_transition(PadEvent(row, col, "up"))
    return msg


def hold(surface, role):
    row, col = pad_for(surface, role)
    surface.pad_transition(PadEvent(row, col, "down"))
    return (row, col)


def release(surface, pad):
    surface.pad_transition(PadEvent(pad[0], pad[1], "up"))


def show(surface, gesture, msg):
    key = NOTE_NAMES[(surface.anchor_midi + surface.key_offset) % 12]
    wire = encode_msg(msg).decode().strip() if msg else "(no broadcast)"
    print(f"{gesture:<18} key={key:<2} {wire}")


def main():
    surface = ConductorSurface()

    show(surface, "press I", tap(surface, "I"))
    show(surface, "press vi", tap(surface, "vi"))

    quality = hold(surface, "quality")
    show(surface, "quality + IV", tap(surface, "IV"))
    release(surface, quality)

    # history pad recalls the transform before the current one
    show(surface, "press hist", tap(surface, "hist"))

    mod = hold(surface, "mod")
    show(surface, "mod + II", tap(surface, "II"))
    release(surface, mod)

    show(surface, "press I", tap(surface, "I"))
    show(surface, "press V", tap(surface, "V"))


if __name__ == "__main__":
    main()
