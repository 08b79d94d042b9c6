"""MIDI port abstraction: null ports, in-memory virtual ports, real devices.

Port specs are strings:

* ``null``: an input that never speaks / an output that discards.
* ``virtual:<name>``: an in-memory hub; every output sent to a name is
  delivered synchronously to all inputs opened on that name.  This is what
  the tests and the latency benchmark use.
* anything else: a real device port via mido, which is an optional
  dependency (install the ``midi`` extra).

Messages are raw MIDI bytes; only note events are ever interpreted.
"""

from __future__ import annotations

from typing import Callable, Optional, Protocol, Union

from .engine import NoteOff, NoteOn, OutNoteOff, OutNoteOn

__all__ = [
    "MidiInput",
    "MidiOutput",
    "MidiPortError",
    "bytes_from_out",
    "note_from_bytes",
    "open_input",
    "open_output",
    "reset_virtual_ports",
]


class MidiPortError(Exception):
    """A port spec could not be opened."""


class MidiInput(Protocol):
    def set_callback(self, callback: Callable[[bytes], None]) -> None: ...
    def close(self) -> None: ...


class MidiOutput(Protocol):
    def send(self, data: bytes) -> None: ...
    def close(self) -> None: ...


# ---------------------------------------------------------------------------
# null ports


class _NullInput:
    def set_callback(self, callback: Callable[[bytes], None]) -> None:
        pass

    def close(self) -> None:
        pass


class _NullOutput:
    def send(self, data: bytes) -> None:
        pass

    def close(self) -> None:
        pass


# ---------------------------------------------------------------------------
# virtual hub


_VIRTUAL_INPUTS: dict[str, list["_VirtualInput"]] = {}


class _VirtualInput:
    def __init__(self, name: str):
        self._name = name
        self._callback: Optional[Callable[[bytes], None]] = None
        _VIRTUAL_INPUTS.setdefault(name, []).append(self)

    def set_callback(self, callback: Callable[[bytes], None]) -> None:
        self._callback = callback

    def deliver(self, data: bytes) -> None:
        if self._callback is not None:
            self._callback(data)

    def close(self) -> None:
        inputs = _VIRTUAL_INPUTS.get(self._name, [])
        if self in inputs:
            inputs.remove(self)


class _VirtualOutput:
    def __init__(self, name: str):
        self._name = name

    def send(self, data: bytes) -> None:
        for port in list(_VIRTUAL_INPUTS.get(self._name, [])):
            port.deliver(data)

    def close(self) -> None:
        pass


def reset_virtual_ports() -> None:
    """Disconnect every virtual port (test isolation)."""
    _VIRTUAL_INPUTS.clear()


# ---------------------------------------------------------------------------
# opening ports


def open_input(spec: str) -> MidiInput:
    if spec in ("", "null"):
        return _NullInput()
    if spec.startswith("virtual:"):
        return _VirtualInput(spec[len("virtual:"):])
    return _open_mido(spec, output=False)


def open_output(spec: str) -> MidiOutput:
    if spec in ("", "null"):
        return _NullOutput()
    if spec.startswith("virtual:"):
        return _VirtualOutput(spec[len("virtual:"):])
    return _open_mido(spec, output=True)


def _open_mido(spec: str, output: bool):
    try:
        import mido
    except ImportError:
        raise MidiPortError(
            f"port {spec!r} needs the optional mido backend; install the "
            f"'midi' extra, or use 'null' / 'virtual:<name>' ports"
        ) from None

    if output:
        try:
            port = mido.open_output(spec)
        except OSError as exc:
            raise MidiPortError(f"cannot open output {spec!r}: {exc}") from None

        class _MidoOutput:
            def send(self, data: bytes) -> None:
                port.send(mido.Message.from_bytes(data))

            def close(self) -> None:
                port.close()

        return _MidoOutput()

    class _MidoInput:
        def __init__(self):
            self._callback: Optional[Callable[[bytes], None]] = None
            try:
                self._port = mido.open_input(spec, callback=self._on_message)
            except OSError as exc:
                raise MidiPortError(f"cannot open input {spec!r}: {exc}") from None

        def _on_message(self, message) -> None:
            if self._callback is not None:
                self._callback(bytes(message.bytes()))

        def set_callback(self, callback: Callable[[bytes], None]) -> None:
            self._callback = callback

        def close(self) -> None:
            self._port.close()

    return _MidoInput()


# ---------------------------------------------------------------------------
# note bytes


def note_from_bytes(data: bytes) -> Union[NoteOn, NoteOff, None]:
    """Decode a note message, or None for anything that passes through."""
    if len(data) != 3:
        return None
    status, note, velocity = data
    kind = status & 0xF0
    if kind == 0x90 and velocity > 0:
        return NoteOn(note, velocity, status & 0x0F)
    if kind == 0x80 or (kind == 0x90 and velocity == 0):
        return NoteOff(note, status & 0x0F)
    return None


def bytes_from_out(out: Union[OutNoteOn, OutNoteOff]) -> bytes:
    if isinstance(out, OutNoteOn):
        return bytes([0x90 | out.channel, out.note, out.velocity])
    return bytes([0x80 | out.channel, out.note, 0])
