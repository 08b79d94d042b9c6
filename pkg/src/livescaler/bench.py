"""Gesture-to-application latency benchmark on the in-process path.

Measures the full hop the performer feels: pad transition applied to the
surface, record encoded, fan-out on an in-process bus, decode and sequence
check at each instrument, transform applied to engines holding sounding
notes.  The in-process transport is the latency reference; network hops
add on top of it.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass

from .conductor import (
    DEFAULT_LAYOUT,
    DEGREE_ROLES,
    ConductorSurface,
    PadEvent,
    decode_msg,
    encode_msg,
)
from .engine import EngineConfig, NoteEngine, NoteOn, SwitchMode
from .pitch import RangeBounds, Temperament
from .transport import InProcessBus

__all__ = ["LatencyReport", "run_latency_benchmark"]

_HELD_CHORD = ((48, 0), (52, 0), (55, 0), (60, 0), (64, 1), (67, 1), (72, 2))


@dataclass(frozen=True)
class LatencyReport:
    count: int
    p50_us: float
    p90_us: float
    p99_us: float
    max_us: float

    def format(self) -> str:
        return "\n".join(
            [
                f"gestures measured: {self.count}",
                f"p50: {self.p50_us:8.1f} us",
                f"p90: {self.p90_us:8.1f} us",
                f"p99: {self.p99_us:8.1f} us",
                f"max: {self.max_us:8.1f} us",
            ]
        )


def _percentile(sorted_us: list[float], q: float) -> float:
    """Nearest-rank percentile on an already sorted sample."""
    rank = max(1, math.ceil(q * len(sorted_us)))
    return sorted_us[rank - 1]


class _BenchInstrument:
    """A seq-guarded engine holding a chord, fed straight from the bus."""

    def __init__(self):
        self.engine = NoteEngine(
            EngineConfig(SwitchMode.LEGATO, RangeBounds(6, 6), Temperament(60, 12))
        )
        for note, channel in _HELD_CHORD:
            self.engine.process_event(NoteOn(note, 80, channel))
        self._last_seq = -1

    def receive(self, data: bytes) -> None:
        msg = decode_msg(data)
        if msg.seq <= self._last_seq:
            return
        self._last_seq = msg.seq
        self.engine.apply_transform_change(msg.transform)


def run_latency_benchmark(
    gestures: int = 10_000, instruments: int = 4, seed: int = 0xC0FFEE
) -> LatencyReport:
    """Time pad-gesture to engine-application over an in-process bus."""
    surface = ConductorSurface()
    bus = InProcessBus("bench")
    for _ in range(instruments):
        bus.subscribe(_BenchInstrument().receive)
    degree_pads = [pad for pad, role in DEFAULT_LAYOUT.items() if role in DEGREE_ROLES]
    modifier_pads = [
        pad for pad, role in DEFAULT_LAYOUT.items()
        if role in ("quality", "x2", "x3", "x4", "plus", "minus")
    ]
    rng = random.Random(seed)
    samples: list[float] = []
    while len(samples) < gestures:
        held = [p for p in modifier_pads if rng.random() < 0.08]
        for pad in held:
            surface.pad_transition(PadEvent(pad[0], pad[1], "down"))
        degree = rng.choice(degree_pads)
        started = time.perf_counter_ns()
        msg = surface.pad_transition(PadEvent(degree[0], degree[1], "down"))
        bus.publish(encode_msg(msg))
        elapsed_ns = time.perf_counter_ns() - started
        samples.append(elapsed_ns / 1000)
        surface.pad_transition(PadEvent(degree[0], degree[1], "up"))
        for pad in held:
            surface.pad_transition(PadEvent(pad[0], pad[1], "up"))
    samples.sort()
    return LatencyReport(
        count=len(samples),
        p50_us=_percentile(samples, 0.50),
        p90_us=_percentile(samples, 0.90),
        p99_us=_percentile(samples, 0.99),
        max_us=samples[-1],
    )
