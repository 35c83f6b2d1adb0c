"""Single-writer single-reader regular register: client state machines
and the server handlers.

The protocol runs in rounds.  A writer round broadcasts the new value,
collects write-acks, and refreshes the servers' helping values when no
single non-bottom helping value reaches the helping quorum.  A reader
round broadcasts a read request (resetting the helping values on the
first round of an operation), collects read-acks, and returns as soon as
enough acks agree on a last-written or helping value; otherwise it starts
another round.

Machines are resumable: every "wait" becomes a guard re-evaluated as
messages, broadcast completions, and timers arrive.  They never block and
hold no reference to the engine; each input returns a list of actions for
the engine to perform.  Acks are counted at most once per server per
round and the collection state resets at round start, which discards
stray acks left over from link corruption or earlier rounds.

Thresholds depend on the timing model.  Asynchronous runs (n >= 8t+1)
wait for n-t acks and use quorums 4t+1 (writer helping predicate) and
2t+1 (reader agreement).  Synchronous runs (n >= 3t+1) wait for all n
acks or a round-trip timeout, with both quorums at t+1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .core import (
    BOTTOM,
    AckReadMsg,
    AckWriteMsg,
    ConfigError,
    NewHelpValMsg,
    ReadMsg,
    WriteMsg,
)


# ---------------------------------------------------------------------------
# Actions returned by machines to the engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Broadcast:
    msg: Any


@dataclass(frozen=True)
class StartTimer:
    delay: int
    token: int


@dataclass(frozen=True)
class Ret:
    value: Any
    meta: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Thresholds:
    """Round parameters derived from (n, t, timing model)."""

    n: int
    t: int
    sync: bool
    delta: int = 0          # one-way bound in ticks, sync only
    help_quorum_override: Optional[int] = None   # protocol-mutation hook

    def __post_init__(self):
        if self.t < 0 or self.n <= 0:
            raise ConfigError(f"bad process counts n={self.n}, t={self.t}")
        if self.sync:
            if self.n < 3 * self.t + 1:
                raise ConfigError(
                    f"synchronous mode requires n >= 3t+1, got n={self.n}, t={self.t}"
                )
        else:
            if self.n < 8 * self.t + 1:
                raise ConfigError(
                    f"asynchronous mode requires n >= 8t+1, got n={self.n}, t={self.t}"
                )

    @property
    def wait_acks(self) -> int:
        return self.n if self.sync else self.n - self.t

    @property
    def help_quorum(self) -> int:
        if self.help_quorum_override is not None:
            return self.help_quorum_override
        return self.t + 1 if self.sync else 4 * self.t + 1

    @property
    def read_quorum(self) -> int:
        return self.t + 1 if self.sync else 2 * self.t + 1

    @property
    def timeout(self) -> int:
        # Round trip plus one tick of slack; processing is free.
        return 2 * self.delta + 1


class _NoQuorum:
    def __repr__(self):
        return "NO_QUORUM"


NO_QUORUM = _NoQuorum()


def first_quorum_value(arrivals, quorum, skip_bottom=False):
    """First value whose quorum-th supporting ack arrived earliest.

    `arrivals` is the round's ack values in arrival order, at most one per
    server.  Scanning in arrival order makes the choice deterministic and
    schedule-sensitive, which is what lets adversarial schedules exhibit
    the new/old inversion the register permits.  Returns NO_QUORUM when no
    value reaches the quorum (BOTTOM itself can be the agreed value).
    """
    counts: dict = {}
    for val in arrivals:
        if skip_bottom and val is BOTTOM:
            continue
        c = counts.get(val, 0) + 1
        counts[val] = c
        if c >= quorum:
            return val
    return NO_QUORUM


class _QuorumRound:
    """Per-round ack collection shared by writer and reader machines."""

    def __init__(self):
        self.acked: set = set()
        self.order: list = []
        self.bcast_ok = False
        self.timed_out = False

    def add(self, server_index: int, value) -> bool:
        if server_index in self.acked:
            return False
        self.acked.add(server_index)
        self.order.append(value)
        return True

    def complete(self, cfg: Thresholds) -> bool:
        if not self.bcast_ok:
            return False
        return len(self.acked) >= cfg.wait_acks or self.timed_out


# ---------------------------------------------------------------------------
# Writer
# ---------------------------------------------------------------------------

IDLE = "idle"
COLLECT = "collect"
HELP_BCAST = "help_bcast"


class RegularWriter:
    """Writer machine for one register.

    `slots` is the number of reader lanes the writer is responsible for;
    the single-reader register uses one.  Multi-reader compositions reuse
    this machine with one helping lane per reader: the helping predicate
    is evaluated per lane and a single refresh broadcast lists every lane
    that failed it.
    """

    def __init__(self, cfg: Thresholds, reg: int = 0, slots: int = 1):
        self.cfg = cfg
        self.reg = reg
        self.slots = slots
        self.phase = IDLE
        self.round_no = 0
        self._round = _QuorumRound()
        self._payload = None

    # -- payload construction hook (overridden by the sequenced variant) --

    def make_payload(self, value):
        return value

    def begin_write(self, value) -> list:
        self.round_no += 1
        self.phase = COLLECT
        self._round = _QuorumRound()
        self._payload = self.make_payload(value)
        actions = [Broadcast(WriteMsg(self.reg, self._payload))]
        if self.cfg.sync:
            actions.append(StartTimer(self.cfg.timeout, self.round_no))
        return actions

    def on_ack(self, server_index: int, msg) -> list:
        if self.phase != COLLECT or not isinstance(msg, AckWriteMsg):
            return []
        if msg.reg != self.reg or len(msg.helping_by_slot) != self.slots:
            return []
        self._round.add(server_index, msg.helping_by_slot)
        return self._maybe_decide()

    def on_bcast_done(self) -> list:
        if self.phase == COLLECT:
            self._round.bcast_ok = True
            return self._maybe_decide()
        if self.phase == HELP_BCAST:
            return self._finish()
        return []

    def on_timer(self, token: int) -> list:
        if self.phase == COLLECT and token == self.round_no:
            self._round.timed_out = True
            return self._maybe_decide()
        return []

    def _maybe_decide(self) -> list:
        if not self._round.complete(self.cfg):
            return []
        failing = []
        for slot in range(self.slots):
            lane = [h[slot] for h in self._round.order]
            if first_quorum_value(lane, self.cfg.help_quorum, skip_bottom=True) is NO_QUORUM:
                failing.append(slot + 1)
        if failing:
            self.phase = HELP_BCAST
            return [Broadcast(NewHelpValMsg(self.reg, tuple(failing), self._payload))]
        return self._finish()

    def _finish(self) -> list:
        self.phase = IDLE
        payload, self._payload = self._payload, None
        return [Ret(None, meta={"payload": payload})]

    def corrupt(self, rng) -> None:
        # Transient failure model: data fields take arbitrary domain
        # values; a machine not mid-operation stays idle.
        self.phase = IDLE
        self._round = _QuorumRound()
        self._payload = None


# ---------------------------------------------------------------------------
# Reader
# ---------------------------------------------------------------------------

class RegularReader:
    """Reader machine for one register lane (reader slot `slot`)."""

    def __init__(self, cfg: Thresholds, reg: int = 0, slot: int = 1):
        self.cfg = cfg
        self.reg = reg
        self.slot = slot
        self.phase = IDLE
        self.round_no = 0
        self.loop_count = 0     # diagnostics only
        self._round = _QuorumRound()
        self._new_read = False

    def begin_read(self) -> list:
        self.phase = COLLECT
        self.loop_count = 0
        self._new_read = True
        return self._start_round()

    def _start_round(self) -> list:
        self.round_no += 1
        self.loop_count += 1
        self._round = _QuorumRound()
        actions = [Broadcast(ReadMsg(self.reg, self.slot, self._new_read))]
        self._new_read = False
        if self.cfg.sync:
            actions.append(StartTimer(self.cfg.timeout, self.round_no))
        return actions

    def on_ack(self, server_index: int, msg) -> list:
        if self.phase != COLLECT or not isinstance(msg, AckReadMsg):
            return []
        if msg.reg != self.reg or msg.slot != self.slot:
            return []
        self._round.add(server_index, (msg.last_val, msg.helping_val))
        return self._maybe_decide()

    def on_bcast_done(self) -> list:
        if self.phase == COLLECT:
            self._round.bcast_ok = True
            return self._maybe_decide()
        return []

    def on_timer(self, token: int) -> list:
        if self.phase == COLLECT and token == self.round_no:
            self._round.timed_out = True
            return self._maybe_decide()
        return []

    def _maybe_decide(self) -> list:
        if not self._round.complete(self.cfg):
            return []
        last_vals = [lv for lv, _ in self._round.order]
        agreed = first_quorum_value(last_vals, self.cfg.read_quorum)
        if agreed is not NO_QUORUM:
            return self._decide_last_val(agreed)
        helps = [hv for _, hv in self._round.order]
        helped = first_quorum_value(helps, self.cfg.read_quorum, skip_bottom=True)
        if helped is not NO_QUORUM:
            return self._decide_helping(helped)
        return self._start_round()

    # -- decision hooks (overridden by the sequence-numbered variant) --

    def _decide_last_val(self, payload) -> list:
        return self._finish(payload, branch="last_val")

    def _decide_helping(self, payload) -> list:
        return self._finish(payload, branch="helping")

    def _finish(self, value, **meta) -> list:
        self.phase = IDLE
        meta["loops"] = self.loop_count
        return [Ret(value, meta=meta)]

    def corrupt(self, rng) -> None:
        self.phase = IDLE
        self._round = _QuorumRound()
        self._new_read = False


# ---------------------------------------------------------------------------
# Server
# ---------------------------------------------------------------------------

class RegisterServer:
    """Protocol-correct server state for one or more registers.

    Each register holds one last-written payload plus one helping payload
    per reader slot.  Handlers run on ss-delivery, take zero simulated
    time, and reply over the plain FIFO link back to the requesting
    client.  The `no_help_reset` mutation (checker-validation builds only)
    skips the helping reset that a fresh read requests.
    """

    def __init__(self, index: int, regs, slots: int, initial_last=BOTTOM,
                 mutations: tuple = ()):
        self.index = index
        self.slots = slots
        self.no_help_reset = "no_help_reset" in mutations
        self.state = {
            reg: {"last": initial_last, "help": {s: BOTTOM for s in range(1, slots + 1)}}
            for reg in regs
        }

    def on_deliver(self, sender_pid, msg) -> list:
        """Returns [(destination pid, reply message)] for the engine."""
        st = self.state.get(msg.reg)
        if st is None:
            return []
        if isinstance(msg, WriteMsg):
            st["last"] = msg.payload
            helping = tuple(st["help"][s] for s in range(1, self.slots + 1))
            return [(sender_pid, AckWriteMsg(msg.reg, helping))]
        if isinstance(msg, NewHelpValMsg):
            for s in msg.slots:
                if s in st["help"]:
                    st["help"][s] = msg.payload
            return []
        if isinstance(msg, ReadMsg):
            if msg.new_read and not self.no_help_reset:
                st["help"][msg.slot] = BOTTOM
            reply = AckReadMsg(msg.reg, msg.slot, st["last"], st["help"].get(msg.slot))
            return [(sender_pid, reply)]
        return []

    def snapshot(self) -> dict:
        return {
            reg: {
                "last": st["last"],
                "help": {s: st["help"][s] for s in sorted(st["help"])},
            }
            for reg, st in self.state.items()
        }

    def corrupt(self, rng, payload_maker) -> None:
        """Overwrite register state with random domain-valid content."""
        for st in self.state.values():
            st["last"] = payload_maker(rng)
            for s in st["help"]:
                st["help"][s] = BOTTOM if rng.random() < 0.4 else payload_maker(rng)
