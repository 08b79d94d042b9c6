"""Broadcast transports: named in-process buses and UDP datagrams.

The conductor publishes encoded wire records; instruments subscribe.  The
in-process bus is the latency reference (a synchronous fan-out of bytes);
UDP carries one record per datagram and tolerates loss, which the
receivers' sequence guard absorbs.
"""

from __future__ import annotations

import asyncio
import socket
from typing import Callable

from .config import UdpAddress

__all__ = [
    "InProcessBus",
    "UdpSender",
    "get_bus",
    "open_udp_receiver",
    "reset_buses",
]

Subscriber = Callable[[bytes], None]


class InProcessBus:
    """A named synchronous channel: publish calls every subscriber in turn."""

    def __init__(self, name: str):
        self.name = name
        self._subscribers: list[Subscriber] = []

    def subscribe(self, callback: Subscriber) -> Callable[[], None]:
        """Register a callback; returns a function that unregisters it."""
        self._subscribers.append(callback)

        def unsubscribe() -> None:
            try:
                self._subscribers.remove(callback)
            except ValueError:
                pass

        return unsubscribe

    def publish(self, data: bytes) -> None:
        for callback in list(self._subscribers):
            callback(data)


_BUSES: dict[str, InProcessBus] = {}


def get_bus(name: str) -> InProcessBus:
    """The process-wide bus registry; same name, same bus."""
    bus = _BUSES.get(name)
    if bus is None:
        bus = _BUSES[name] = InProcessBus(name)
    return bus


def reset_buses() -> None:
    """Drop all buses (test isolation)."""
    _BUSES.clear()


class UdpSender:
    """One socket fanning datagrams out to a fixed target list."""

    def __init__(self, targets: list[UdpAddress]):
        if not targets:
            raise ValueError("UdpSender needs at least one target")
        self.targets = [(t.host, t.port) for t in targets]
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_BROADCAST, 1)

    def send(self, data: bytes) -> None:
        for target in self.targets:
            self._sock.sendto(data, target)

    def close(self) -> None:
        self._sock.close()


class _DatagramRelay(asyncio.DatagramProtocol):
    def __init__(self, callback: Subscriber):
        self._callback = callback

    def datagram_received(self, data: bytes, addr) -> None:
        self._callback(data)


async def open_udp_receiver(
    host: str, port: int, callback: Subscriber
) -> asyncio.DatagramTransport:
    """Bind a datagram socket and deliver every payload to ``callback``.

    The port is shared (SO_REUSEPORT) so several instruments on one host
    can listen to the same broadcast address.
    """
    sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
    if hasattr(socket, "SO_REUSEPORT"):
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEPORT, 1)
    sock.bind((host, port))
    loop = asyncio.get_running_loop()
    transport, _protocol = await loop.create_datagram_endpoint(
        lambda: _DatagramRelay(callback), sock=sock
    )
    return transport
