"""Shared domain types: process identities, register values, bounded
sequence numbers on an odd ring, and the protocol message vocabulary.

The bounded sequence number space is the ring [0, M-1] for an odd modulus
M.  Ordering on the ring uses clockwise distance: x is "greater" than y
when x sits at most (M-1)/2 steps clockwise from y.  With M odd the two
half-distances can never tie, so the strict relation is total on distinct
pairs.  It is deliberately not transitive: after more than (M-1)/2
increments the ring wraps and older numbers start to look newer again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional


class ConfigError(ValueError):
    """Raised for invalid configuration (bad modulus, thresholds, ...)."""


# The distinguished "unwritten" register value.  None is reserved for it;
# every real payload must compare unequal to BOTTOM.
BOTTOM = None

# Values fabricated by the fault injector and by Byzantine reply strategies
# are drawn at or above this base so they can never collide with workload
# payloads (workloads use small integers).
GARBAGE_BASE = 1_000_000
GARBAGE_SPAN = 1_000_000


def garbage_value(rng) -> int:
    """A random domain-valid payload distinct from any workload value."""
    return GARBAGE_BASE + rng.randrange(GARBAGE_SPAN)


class Role(Enum):
    WRITER = "writer"
    READER = "reader"
    SERVER = "server"
    CLIENT = "client"


@dataclass(frozen=True, order=True)
class ProcessId:
    role: Role
    index: int

    def __str__(self) -> str:
        return f"{self.role.value}:{self.index}"

    @staticmethod
    def parse(text: str) -> "ProcessId":
        role_s, _, idx_s = text.partition(":")
        return ProcessId(Role(role_s), int(idx_s) if idx_s else 1)


def writer_pid(index: int = 1) -> ProcessId:
    return ProcessId(Role.WRITER, index)


def reader_pid(index: int = 1) -> ProcessId:
    return ProcessId(Role.READER, index)


def server_pid(index: int) -> ProcessId:
    return ProcessId(Role.SERVER, index)


def client_pid(index: int) -> ProcessId:
    return ProcessId(Role.CLIENT, index)


# ---------------------------------------------------------------------------
# Bounded sequence numbers
# ---------------------------------------------------------------------------

def check_modulus(m: int) -> None:
    if m < 3 or m % 2 == 0:
        raise ConfigError(f"sequence modulus must be an odd integer >= 3, got {m}")


def _check_in_ring(x: int, m: int) -> None:
    if not 0 <= x < m:
        raise ConfigError(f"sequence number {x} outside ring [0, {m - 1}]")


def cd_greater(x: int, y: int, m: int) -> bool:
    """Strict clockwise-distance order: x follows y within half the ring.

    True iff 0 < (x - y) mod m <= (m-1)//2.  Requires m odd so that the
    halfway point cannot be reached and no tie rule is needed.
    """
    check_modulus(m)
    _check_in_ring(x, m)
    _check_in_ring(y, m)
    d = (x - y) % m
    return 0 < d <= (m - 1) // 2


def cd_geq(x: int, y: int, m: int) -> bool:
    """Reflexive closure of cd_greater."""
    return x == y or cd_greater(x, y, m)


def next_seq(x: int, m: int) -> int:
    """Successor on the ring: (x + 1) mod m."""
    check_modulus(m)
    _check_in_ring(x, m)
    return (x + 1) % m


def lifespan(m: int) -> int:
    """Safety horizon of the bounded counter: (m-1)//2 increments.

    Two sequence numbers separated by more than this many writes may
    compare in the wrong order because the ring has wrapped.
    """
    check_modulus(m)
    return (m - 1) // 2


# ---------------------------------------------------------------------------
# Messages
# ---------------------------------------------------------------------------

class MsgKind(Enum):
    WRITE = "write"
    ACK_WRITE = "ack_write"
    READ = "read"
    ACK_READ = "ack_read"
    NEW_HELP_VAL = "new_help_val"


# Message payloads are opaque to servers.  Depending on the register kind,
# `payload` is a bare value (regular), a (wsn, value) pair (atomic), or a
# (wsn, (value, epoch, seq)) pair (multi-writer compositions).

@dataclass(frozen=True)
class WriteMsg:
    reg: int
    payload: Any
    kind = MsgKind.WRITE


@dataclass(frozen=True)
class AckWriteMsg:
    reg: int
    # One helping value per reader slot; single-reader registers send a
    # 1-tuple.  Values live in the same domain as payloads, or BOTTOM.
    helping_by_slot: tuple
    kind = MsgKind.ACK_WRITE


@dataclass(frozen=True)
class ReadMsg:
    reg: int
    slot: int
    new_read: bool
    kind = MsgKind.READ


@dataclass(frozen=True)
class AckReadMsg:
    reg: int
    slot: int
    last_val: Any
    helping_val: Any
    kind = MsgKind.ACK_READ


@dataclass(frozen=True)
class NewHelpValMsg:
    reg: int
    slots: tuple
    payload: Any
    kind = MsgKind.NEW_HELP_VAL


Message = Any  # union of the five dataclasses above

CLIENT_TO_SERVER = (MsgKind.WRITE, MsgKind.READ, MsgKind.NEW_HELP_VAL)
SERVER_TO_CLIENT = (MsgKind.ACK_WRITE, MsgKind.ACK_READ)
