"""Practically stabilizing SWSR atomic register.

Extends the regular protocol with a bounded write sequence number.  Every
payload becomes a (wsn, value) pair; the writer increments wsn on the
ring once per write.  The reader remembers the highest sequence number it
has vouched for, as the pair (pwsn, pv), and refuses to return a value
whose sequence number sits behind pwsn on the ring, returning pv instead.
That blocks new/old inversions as long as fewer than (M-1)//2 writes
separate the compared points; past that horizon the ring wraps and the
comparison can mislead, which is the "practical" qualifier.

A read begins with a sanity pass over the servers' helping values: a
helping pair attested by a read quorum is adopted whenever pwsn sits
ahead of it on the ring, pulling a corrupted (pwsn, pv) back toward
server-attested state.  The condition is implemented exactly as the
protocol states it, adopting when pwsn strictly precedes the attested
number in ring order, and behavior at the wrap boundary is pinned by
tests rather than second-guessed.

The `no_inversion_guard` mutation (checker-validation builds only)
disables the pwsn comparison so the read always adopts the agreed
last-written pair, reintroducing inversions.
"""

from __future__ import annotations

from .core import BOTTOM, AckReadMsg, cd_greater, next_seq
from .swsr_regular import (
    COLLECT,
    IDLE,
    NO_QUORUM,
    Broadcast,
    ReadMsg,
    RegularReader,
    RegularWriter,
    Ret,
    StartTimer,
    Thresholds,
    first_quorum_value,
)

SANITY = "sanity"


def as_pair(payload, modulus: int):
    """Normalize a payload to a (wsn, value) pair.

    Transient corruption is supposed to stay inside the pair domain, but
    any out-of-domain content met on access is folded back in rather than
    crashing a correct process: bare values get sequence number 0 and
    sequence numbers reduce modulo the ring size.
    """
    if isinstance(payload, tuple) and len(payload) == 2:
        wsn, value = payload
        if isinstance(wsn, int):
            return (wsn % modulus, value)
    return (0, payload)


class SeqWriter(RegularWriter):
    """Writer with a persistent ring sequence number."""

    def __init__(self, cfg: Thresholds, modulus: int, reg: int = 0, slots: int = 1):
        super().__init__(cfg, reg=reg, slots=slots)
        self.modulus = modulus
        self.wsn = 0

    def make_payload(self, value):
        self.wsn = next_seq(self.wsn % self.modulus, self.modulus)
        return (self.wsn, value)

    def corrupt(self, rng) -> None:
        super().corrupt(rng)
        self.wsn = rng.randrange(self.modulus)


class SeqReader(RegularReader):
    """Reader tracking (pwsn, pv) with the sanity prologue."""

    def __init__(self, cfg: Thresholds, modulus: int, reg: int = 0, slot: int = 1,
                 mutations: tuple = ()):
        super().__init__(cfg, reg=reg, slot=slot)
        self.modulus = modulus
        self.pwsn = 0
        self.pv = BOTTOM
        self.no_inversion_guard = "no_inversion_guard" in mutations

    def begin_read(self) -> list:
        self.phase = SANITY
        self.loop_count = 0
        return self._start_sanity_round()

    def _start_sanity_round(self) -> list:
        self.round_no += 1
        self._round = type(self._round)()
        actions = [Broadcast(ReadMsg(self.reg, self.slot, False))]
        if self.cfg.sync:
            actions.append(StartTimer(self.cfg.timeout, self.round_no))
        return actions

    def on_bcast_done(self) -> list:
        if self.phase == SANITY:
            self._round.bcast_ok = True
            return self._maybe_finish_sanity()
        return super().on_bcast_done()

    def on_ack(self, server_index: int, msg) -> list:
        if self.phase == SANITY:
            if not isinstance(msg, AckReadMsg) or msg.reg != self.reg \
                    or msg.slot != self.slot:
                return []
            self._round.add(server_index, (msg.last_val, msg.helping_val))
            return self._maybe_finish_sanity()
        return super().on_ack(server_index, msg)

    def on_timer(self, token: int) -> list:
        if self.phase == SANITY and token == self.round_no:
            self._round.timed_out = True
            return self._maybe_finish_sanity()
        return super().on_timer(token)

    def _maybe_finish_sanity(self) -> list:
        if not self._round.complete(self.cfg):
            return []
        helps = [hv for _, hv in self._round.order]
        attested = first_quorum_value(helps, self.cfg.read_quorum, skip_bottom=True)
        if attested is not NO_QUORUM:
            wsn, value = as_pair(attested, self.modulus)
            if cd_greater(self.pwsn % self.modulus, wsn, self.modulus):
                self.pwsn, self.pv = wsn, value
        # Enter the regular read loop; the first round resets helping.
        self.phase = COLLECT
        self._new_read = True
        return self._start_round()

    def _decide_last_val(self, payload) -> list:
        wsn, value = as_pair(payload, self.modulus)
        if self.no_inversion_guard or cd_greater(wsn, self.pwsn % self.modulus, self.modulus):
            self.pwsn, self.pv = wsn, value
            return self._finish(value, branch="last_val", wsn=wsn, pwsn=self.pwsn)
        return self._finish(self.pv, branch="kept_prev", wsn=wsn, pwsn=self.pwsn)

    def _decide_helping(self, payload) -> list:
        wsn, value = as_pair(payload, self.modulus)
        self.pwsn, self.pv = wsn, value
        return self._finish(value, branch="helping", wsn=wsn, pwsn=self.pwsn)

    def corrupt(self, rng, value_maker=None, ahead: bool = False) -> None:
        super().corrupt(rng)
        if ahead:
            # Plant pwsn in the half ring "after" a freshly reset writer,
            # the recovery scenario where reads echo a corrupted pv.
            self.pwsn = rng.randrange(2, (self.modulus - 1) // 2 + 1)
        else:
            self.pwsn = rng.randrange(self.modulus)
        if value_maker is not None:
            self.pv = value_maker(rng)
