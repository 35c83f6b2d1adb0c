"""Broadcast layer: two interchangeable realizations.

The oracle transport enforces the broadcast contract directly inside the
simulator: per-sender FIFO delivery to every server, with the completion
signal scheduled one tick after the (n-2t)-th correct server delivered,
so at least n-2t correct deliveries always land strictly inside the
invocation window.  Remaining deliveries happen at later finite times.

The data-link transport implements the contract over bounded-capacity
links whose initial content may be arbitrary.  Per destination, a sender
pushes the pending message through a two-phase handshake: it floods
packets tagged 0 until it has received cap+1 packets back, then floods
packets tagged 1 until another cap+1 arrive.  The receiver acknowledges
every message packet with the packet's tag and delivers exactly when a
tag-1 packet immediately follows a tag-0 packet.  `cap` bounds the total
number of packets in transit between the two parties (both directions
combined); sends onto a full link are lost, which is what forces the
flooding.  The cap+1 counting then guarantees at least one response per
phase was generated during that phase, so a completed handshake implies
the destination delivered, and stale packets left by earlier handshakes
or arbitrary initial content are outnumbered rather than interpreted.

Broadcast completion is signalled once the handshakes with n-2t correct
servers have finished.  Per-destination handshakes run one message at a
time in broadcast order, which yields per-sender ordered delivery.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Optional


class OracleTransport:
    def __init__(self, eng):
        self.eng = eng
        self._fifo_last: dict = {}
        self._next_handle = 0
        self._pending_done: dict = {}

    def broadcast(self, sender, msg, now: int) -> int:
        eng = self.eng
        self._next_handle += 1
        handle = self._next_handle
        correct_arrivals = []
        for idx in range(1, eng.n + 1):
            delay = eng.draw_delay(kind="bcast", server=idx)
            t = max(now + delay, self._fifo_last.get((sender, idx), 0))
            self._fifo_last[(sender, idx)] = t
            eng.schedule(t, "deliver", (idx, sender, msg, handle, False))
            if idx not in eng.byzantine:
                correct_arrivals.append(t)
        correct_arrivals.sort()
        done_at = correct_arrivals[eng.n - 2 * eng.t - 1] + 1
        eng.schedule(done_at, "bcast_done", (sender, handle))
        return handle


@dataclass
class _SenderSide:
    queue: deque = field(default_factory=deque)
    handle: Optional[int] = None
    msg: Any = None
    bit: int = 0
    count: int = 0

    @property
    def active(self) -> bool:
        return self.handle is not None


@dataclass
class _Pair:
    sender: Any                  # client pid
    server: int
    inflight: int = 0
    fifo_last: dict = field(default_factory=dict)   # direction -> last arrival
    ep: _SenderSide = field(default_factory=_SenderSide)
    prev_bit: int = 1            # receiver side: tag of the last packet seen

    def key(self):
        return (self.sender, self.server)


# Packet layout: (bit, tag, content); tag "msg" carries (handle, message)
# where a None handle marks injected garbage, tag "ack" carries None.

class DatalinkTransport:
    def __init__(self, eng, cap: int):
        self.eng = eng
        self.cap = cap
        self.pairs: dict = {}
        self._next_handle = 0
        self._done_count: dict = {}     # handle -> correct handshakes finished
        self._signalled: set = set()

    def _pair(self, sender, server: int) -> _Pair:
        key = (sender, server)
        if key not in self.pairs:
            self.pairs[key] = _Pair(sender, server)
        return self.pairs[key]

    def broadcast(self, sender, msg, now: int) -> int:
        self._next_handle += 1
        handle = self._next_handle
        self._done_count[handle] = 0
        for idx in range(1, self.eng.n + 1):
            pair = self._pair(sender, idx)
            pair.ep.queue.append((handle, msg))
            if not pair.ep.active:
                self._start_handshake(pair, now)
        return handle

    def _start_handshake(self, pair: _Pair, now: int) -> None:
        ep = pair.ep
        if not ep.queue:
            return
        ep.handle, ep.msg = ep.queue.popleft()
        ep.bit = 0
        ep.count = 0
        for _ in range(self.cap):
            self._pump(pair, now)

    def _pump(self, pair: _Pair, now: int) -> None:
        ep = pair.ep
        if ep.active:
            self._send(pair, "fwd", (ep.bit, "msg", (ep.handle, ep.msg)), now)

    def _send(self, pair: _Pair, direction: str, packet, now: int) -> bool:
        if pair.inflight >= self.cap:
            return False        # full link: the packet is lost
        pair.inflight += 1
        delay = self.eng.draw_delay(kind="packet", server=pair.server)
        t = max(now + delay, pair.fifo_last.get(direction, 0))
        pair.fifo_last[direction] = t
        self.eng.schedule(t, "packet", (pair.key(), direction, packet))
        return True

    def preload(self, pair_key, direction: str, packet, arrival: int) -> bool:
        """Injector hook: place arbitrary initial content on a link.

        Respects the capacity bound: at most cap packets can sit on the
        round trip, injected garbage included."""
        pair = self._pair(*pair_key)
        if pair.inflight >= self.cap:
            return False
        pair.inflight += 1
        t = max(arrival, pair.fifo_last.get(direction, 0))
        pair.fifo_last[direction] = t
        self.eng.schedule(t, "packet", (pair_key, direction, packet))
        return True

    def corrupt_endpoints(self, rng) -> None:
        for pair in self.pairs.values():
            pair.prev_bit = rng.randrange(2)

    def on_packet(self, pair_key, direction: str, packet, now: int) -> None:
        pair = self._pair(*pair_key)
        pair.inflight -= 1
        bit, tag, content = packet
        if direction == "fwd":
            self._receiver_step(pair, bit, tag, content, now)
        else:
            self._sender_step(pair, now)

    def _receiver_step(self, pair: _Pair, bit, tag, content, now: int) -> None:
        if tag != "msg":
            return              # stray reverse-format garbage on the forward link
        prev, pair.prev_bit = pair.prev_bit, bit
        if prev == 0 and bit == 1:
            handle, msg = content
            self.eng.deliver_now(pair.server, pair.sender, msg, handle,
                                 spurious=handle is None, now=now)
        self._send(pair, "rev", (bit, "ack", None), now)

    def _sender_step(self, pair: _Pair, now: int) -> None:
        ep = pair.ep
        if not ep.active:
            return
        ep.count += 1
        if ep.count >= self.cap + 1:
            if ep.bit == 0:
                ep.bit = 1
                ep.count = 0
            else:
                self._handshake_done(pair, now)
                return
        self._pump(pair, now)

    def _handshake_done(self, pair: _Pair, now: int) -> None:
        eng = self.eng
        ep = pair.ep
        handle = ep.handle
        ep.handle = ep.msg = None
        if pair.server not in eng.byzantine and handle in self._done_count:
            self._done_count[handle] += 1
            if (self._done_count[handle] >= eng.n - 2 * eng.t
                    and handle not in self._signalled):
                self._signalled.add(handle)
                eng.schedule(now, "bcast_done", (pair.sender, handle))
        self._start_handshake(pair, now)
