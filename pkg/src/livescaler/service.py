"""Long-running endpoints: the per-instrument bridge and the conductor host.

Both are asynchronous context managers around one asyncio loop.  The
instrument serializes MIDI input and decoded broadcasts into a single
inbox consumed by its note engine; the conductor hosts the WebSocket UI
endpoint, optionally maps a MIDI control port to pads, and fans encoded
records out to every configured transport.
"""

from __future__ import annotations

import asyncio
import json
import logging
import time
from dataclasses import replace
from typing import Callable, Optional

from websockets.asyncio.server import serve

from .conductor import (
    ConductorSurface,
    MessageDecodeError,
    PadEvent,
    decode_msg,
    encode_msg,
)
from .config import ConductorConfig, InprocAddress, InstrumentConfig, UdpAddress
from .engine import Flush, NoteEngine, NoteOn, OutputEvent
from .midiio import bytes_from_out, note_from_bytes, open_input, open_output
from .pitch import Temperament
from .transport import UdpSender, get_bus, open_udp_receiver

__all__ = ["ConductorService", "InstrumentService", "run_conductor", "run_instrument"]

log = logging.getLogger(__name__)


class InstrumentService:
    """Bridge: MIDI in → note engine → MIDI out, steered by broadcasts.

    Port callbacks and transport readers run off-loop; everything funnels
    through one queue so the engine sees a total order.  Exiting the
    context flushes the engine (no stuck notes) before closing ports.
    """

    def __init__(self, cfg: InstrumentConfig):
        self.cfg = cfg
        self.engine = NoteEngine(cfg.engine_config())
        self.records_applied = 0
        self.records_dropped = 0
        self.decode_errors = 0
        self._last_seq: Optional[int] = None
        self._inbox: asyncio.Queue = asyncio.Queue()
        self._timers: set[asyncio.TimerHandle] = set()
        self._udp_transport = None
        self._unsubscribe = None

    async def __aenter__(self) -> "InstrumentService":
        loop = asyncio.get_running_loop()
        self._loop = loop
        self._input = open_input(self.cfg.input_port)
        self._output = open_output(self.cfg.output_port)

        def from_port(data: bytes) -> None:
            loop.call_soon_threadsafe(self._inbox.put_nowait, ("midi", data))

        def from_wire(data: bytes) -> None:
            loop.call_soon_threadsafe(self._inbox.put_nowait, ("record", data))

        self._input.set_callback(from_port)
        listen = self.cfg.listen
        self.udp_port: Optional[int] = None
        if isinstance(listen, UdpAddress):
            self._udp_transport = await open_udp_receiver(
                listen.host, listen.port, from_wire
            )
            sock = self._udp_transport.get_extra_info("socket")
            self.udp_port = sock.getsockname()[1]
        else:
            self._unsubscribe = get_bus(listen.name).subscribe(from_wire)
        self._consumer = asyncio.create_task(self._consume())
        return self

    async def __aexit__(self, *exc_info) -> None:
        self._inbox.put_nowait(("stop", b""))
        await self._consumer
        for timer in self._timers:
            timer.cancel()
        self._timers.clear()
        for out in self.engine.process_event(Flush()):
            self._output.send(bytes_from_out(out))
        if self._udp_transport is not None:
            self._udp_transport.close()
        if self._unsubscribe is not None:
            self._unsubscribe()
        self._input.close()
        self._output.close()

    async def drain(self) -> None:
        """Wait until everything already published has been consumed.

        Covers producers on this loop's thread: one yield lets their
        scheduled enqueues land, then the queue is joined.
        """
        await asyncio.sleep(0)
        await self._inbox.join()

    async def _consume(self) -> None:
        while True:
            kind, data = await self._inbox.get()
            try:
                if kind == "stop":
                    return
                if kind == "midi":
                    self._on_midi(data)
                else:
                    self._on_record(data)
            finally:
                self._inbox.task_done()

    def _on_midi(self, data: bytes) -> None:
        ev = note_from_bytes(data)
        if ev is None or (
            self.cfg.channels is not None and ev.channel not in self.cfg.channels
        ):
            self._output.send(data)
            return
        for out in self.engine.process_event(ev):
            self._send(out)

    def _on_record(self, data: bytes) -> None:
        try:
            msg = decode_msg(data)
        except MessageDecodeError as exc:
            self.decode_errors += 1
            log.warning("dropping undecodable record: %s", exc)
            return
        if self._last_seq is not None and msg.seq <= self._last_seq:
            self.records_dropped += 1
            return
        self._last_seq = msg.seq
        cfg = self.engine.config
        temp = cfg.temperament
        if (temp.anchor_midi, temp.base) != (msg.anchor_midi, msg.base):
            new_temp = Temperament(msg.anchor_midi, msg.base, temp.anchor_freq)
            try:
                self.engine.config = replace(cfg, temperament=new_temp)
            except ValueError as exc:
                self.records_dropped += 1
                log.error("cannot follow temperament change: %s", exc)
                return
        for out in self.engine.apply_transform_change(msg.transform):
            self._send(out)
        self.records_applied += 1

    def _send(self, out: OutputEvent) -> None:
        data = bytes_from_out(out)
        delay = getattr(out, "delay_us", 0)
        if delay:
            timer: asyncio.TimerHandle | None = None

            def fire() -> None:
                self._timers.discard(timer)
                self._output.send(data)

            timer = self._loop.call_later(delay / 1e6, fire)
            self._timers.add(timer)
        else:
            self._output.send(data)


class ConductorService:
    """The conductor host: UI endpoint, control port, broadcast fan-out.

    Pad gestures (UI frames and mapped control notes) are applied to the
    surface on the event loop, so they form one total order; each applied
    gesture broadcasts at most one record and then pushes a fresh state
    snapshot to every connected UI.
    """

    def __init__(self, cfg: ConductorConfig, ui_listen: tuple[str, int] | None = None):
        self.cfg = cfg
        self.surface = ConductorSurface(cfg.layout, cfg.anchor_midi, cfg.base)
        self.ui_host, self.ui_port = ui_listen or cfg.ui_listen
        self.latency_us: list[float] = []
        self.bad_frames = 0
        self._clients: set = set()
        self._udp: Optional[UdpSender] = None

    async def __aenter__(self) -> "ConductorService":
        self._loop = asyncio.get_running_loop()
        udp_targets = [t for t in self.cfg.broadcast if isinstance(t, UdpAddress)]
        self._senders = []
        if udp_targets:
            self._udp = UdpSender(udp_targets)
            self._senders.append(self._udp.send)
        for target in self.cfg.broadcast:
            if isinstance(target, InprocAddress):
                self._senders.append(get_bus(target.name).publish)
        self._control = None
        if self.cfg.control_input_port:
            self._control = open_input(self.cfg.control_input_port)
            self._control.set_callback(self._control_bytes)
        self._server = await serve(self._handle_ui, self.ui_host, self.ui_port)
        self.ui_port = self._server.sockets[0].getsockname()[1]
        return self

    async def __aexit__(self, *exc_info) -> None:
        self._server.close()
        await self._server.wait_closed()
        if self._control is not None:
            self._control.close()
        if self._udp is not None:
            self._udp.close()

    # -- gesture path --------------------------------------------------------

    def apply_pad(self, ev: PadEvent) -> None:
        """Apply one gesture and broadcast; callable from loop context."""
        started = time.perf_counter()
        msg = self.surface.pad_transition(ev)
        if msg is not None:
            data = encode_msg(msg)
            for send in self._senders:
                send(data)
            self.latency_us.append((time.perf_counter() - started) * 1e6)

    async def _after_change(self) -> None:
        snapshot = json.dumps(self.surface.snapshot())
        for client in list(self._clients):
            try:
                await client.send(snapshot)
            except Exception:
                self._clients.discard(client)

    # -- UI endpoint -----------------------------------------------------------

    async def _handle_ui(self, websocket) -> None:
        await websocket.send(json.dumps(self.surface.layout_message()))
        await websocket.send(json.dumps(self.surface.snapshot()))
        self._clients.add(websocket)
        try:
            async for raw in websocket:
                ev = self._parse_frame(raw)
                if ev is None:
                    self.bad_frames += 1
                    continue
                self.apply_pad(ev)
                await self._after_change()
        finally:
            self._clients.discard(websocket)

    def _parse_frame(self, raw) -> Optional[PadEvent]:
        try:
            frame = json.loads(raw)
        except (ValueError, TypeError):
            return None
        if not isinstance(frame, dict) or frame.get("type") != "pad":
            return None
        row, col, state = frame.get("row"), frame.get("col"), frame.get("state")
        if isinstance(row, bool) or isinstance(col, bool):
            return None
        if not (isinstance(row, int) and isinstance(col, int)):
            return None
        try:
            return PadEvent(row, col, state)
        except (ValueError, TypeError):
            return None

    # -- control port ----------------------------------------------------------

    def _control_bytes(self, data: bytes) -> None:
        self._loop.call_soon_threadsafe(self._control_note, data)

    def _control_note(self, data: bytes) -> None:
        ev = note_from_bytes(data)
        if ev is None:
            return
        pad = self.cfg.control_notes.get(ev.note)
        if pad is None:
            return
        state = "down" if isinstance(ev, NoteOn) else "up"
        self.apply_pad(PadEvent(pad[0], pad[1], state))
        asyncio.ensure_future(self._after_change())


# ---------------------------------------------------------------------------
# blocking wrappers for the CLI


async def _run_until_interrupt(service, started=None) -> None:
    async with service:
        if started is not None:
            started(service)
        stopper = asyncio.Event()
        try:
            await stopper.wait()
        except asyncio.CancelledError:
            pass


def run_instrument(cfg: InstrumentConfig) -> None:
    """Run an instrument bridge until interrupted."""
    try:
        asyncio.run(_run_until_interrupt(InstrumentService(cfg)))
    except KeyboardInterrupt:
        pass


def run_conductor(
    cfg: ConductorConfig,
    ui_listen: tuple[str, int] | None = None,
    started: Optional[Callable[["ConductorService"], None]] = None,
) -> None:
    """Run the conductor host until interrupted.

    ``started`` fires once the UI endpoint is bound and accepting
    connections; with an ephemeral port it is the only way to learn the
    actual address.
    """
    try:
        asyncio.run(_run_until_interrupt(ConductorService(cfg, ui_listen), started))
    except KeyboardInterrupt:
        pass
