"""The full live path, wired together in one process.

A conductor and two instruments share an in-process bus; the instruments
read from virtual keyboard ports and write to virtual synth ports, so the
whole system runs without MIDI hardware.  Keystrokes arrive while the
conductor changes transforms, and the synth side prints what actually
sounds.
"""

import asyncio

from livescaler.config import InprocAddress, InstrumentConfig
from livescaler.conductor import ConductorSurface, PadEvent, encode_msg
from livescaler.engine import SwitchMode
from livescaler.midiio import open_input, open_output
from livescaler.service import InstrumentService
from livescaler.transport import get_bus

NOTE_NAMES = ["C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B"]


def describe(data):
    status, note, velocity = data[0] & 0xF0, data[1], data[2]
    kind = "on " if status == 0x90 and velocity else "off"
    return f"{kind} {note} ({NOTE_NAMES[note % 12]})"


def instrument(name, mode):
    return InstrumentConfig(
        input_port=f"virtual:{name}-keys",
        output_port=f"virtual:{name}-synth",
        mode=mode,
        listen=InprocAddress("demo-bus"),
    )


async def main():
    surface = ConductorSurface()
    bus = get_bus("demo-bus")

    def press(role):
        pad = next(p for p, r in surface.layout.items() if r == role)
        msg = surface.pad_transition(PadEvent(pad[0], pad[1], "down"))
        surface.pad_transition(PadEvent(pad[0], pad[1], "up"))
        bus.publish(encode_msg(msg))
        print(f"-- conductor presses {role}")

    async with InstrumentService(instrument("piano", SwitchMode.LEGATO)) as piano, \
               InstrumentService(instrument("bass", SwitchMode.STOP)) as bass:
        keys = {
            "piano": open_output("virtual:piano-keys"),
            "bass": open_output("virtual:bass-keys"),
        }
        for name in ("piano", "bass"):
            synth = open_input(f"virtual:{name}-synth")
            synth.set_callback(
                lambda data, name=name: print(f"   {name}: {describe(data)}")
            )

        async def played(note, *, on, who):
            status = 0x90 if on else 0x80
            keys[who].send(bytes([status, note, 90 if on else 0]))
            await piano.drain()
            await bass.drain()

        print("both instruments hold a C-major triad:")
        for note in (60, 64, 67):
            await played(note, on=True, who="piano")
        await played(48, on=True, who="bass")

        press("vi")
        await piano.drain()
        await bass.drain()

        print("new keystroke lands in the new chord:")
        await played(72, on=True, who="piano")

        print("release everything:")
        for note in (60, 64, 67, 72):
            await played(note, on=False, who="piano")
        await played(48, on=False, who="bass")


if __name__ == "__main__":
    asyncio.run(main())
