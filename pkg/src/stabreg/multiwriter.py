"""Multi-writer multi-reader register composed from per-process registers.

Each of the m processes owns one single-writer register that every
process can read; an owner write pushes the same (value, epoch, seq)
triple to all reader lanes.  A multi-writer operation reads all m
registers into a view, repairs the epoch structure if the view lacks a
maximal epoch or its sequence counter overflowed, and then writes (or
selects) the entry with the maximal epoch and highest sequence number,
breaking ties toward the smallest owner index.

The flows below are generators so the engine can run the underlying
register operations one at a time, in owner-index order, exactly as the
operation is specified; each `yield` is one sub-operation and the sent
value is its result.  They are pure protocol logic and can equally be
driven by hand in tests with constructed views.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Generator, Sequence

from .core import ConfigError
from .epochs import Epoch, epoch_geq, max_epoch, next_epoch


@dataclass(frozen=True)
class ReadSub:
    """Run a full read of the register owned by process `owner`."""
    owner: int


@dataclass(frozen=True)
class WriteSub:
    """Run a full write of (value, epoch, seq) to the caller's register."""
    triple: tuple


def view_epochs(view: Sequence[tuple]) -> list:
    return [entry[1] for entry in view]


def needs_new_epoch(view: Sequence[tuple], seq_bound: int) -> bool:
    """True when the view lacks a maximal epoch or the maximal entry's
    sequence counter reached the overflow sentinel."""
    epochs = view_epochs(view)
    mi = max_epoch(epochs)
    if mi is None:
        return True
    top = epochs[mi]
    return any(e == top and s >= seq_bound for _, e, s in view)


def _max_entries(view: Sequence[tuple]) -> tuple:
    """(top epoch, indices holding it, their max seq) for a repaired view."""
    epochs = view_epochs(view)
    mi = max_epoch(epochs)
    if mi is None:
        raise ConfigError("view has no maximal epoch after repair")
    top = epochs[mi]
    holders = [j for j, e in enumerate(epochs) if e == top]
    seq_max = max(view[j][2] for j in holders)
    return top, holders, seq_max


def mwmr_write_flow(me: int, m: int, value, seq_bound: int) -> Generator:
    """Write `value` on behalf of process `me` (1-based).

    Yields ReadSub for every owner, then one WriteSub; returns the
    (epoch, seq) timestamp the write was published under.
    """
    view = []
    for owner in range(1, m + 1):
        view.append((yield ReadSub(owner)))
    if needs_new_epoch(view, seq_bound):
        # Local repair only: the fresh epoch reaches the other processes
        # through the write below, published under the (now maximal)
        # repaired entry.
        view[me - 1] = (value, next_epoch(view_epochs(view)), 0)
    top, _, seq_max = _max_entries(view)
    yield WriteSub((value, top, seq_max + 1))
    return (top, seq_max + 1)


def mwmr_read_flow(me: int, m: int, seq_bound: int) -> Generator:
    """Read on behalf of process `me` (1-based).

    Yields ReadSub for every owner and, on the repair path, one WriteSub
    republishing the caller's own value under a fresh epoch.  Returns
    (value, epoch, seq) of the selected entry.
    """
    view = []
    for owner in range(1, m + 1):
        view.append((yield ReadSub(owner)))
    if needs_new_epoch(view, seq_bound):
        fresh = next_epoch(view_epochs(view))
        view[me - 1] = (view[me - 1][0], fresh, 0)
        yield WriteSub((view[me - 1][0], view[me - 1][1], 0))
    top, holders, seq_max = _max_entries(view)
    chosen = min(j for j in holders if view[j][2] == seq_max)
    value = view[chosen][0]
    return (value, view[chosen][1], view[chosen][2])


def run_flow_with_views(flow, sub_results):
    """Drive a flow by hand: `sub_results` maps each yielded sub-op (in
    order) to its result.  Returns (subops, final result).  Test helper,
    also used by the engine's composite client in spirit."""
    subs = []
    it = iter(sub_results)
    try:
        req = next(flow)
        while True:
            subs.append(req)
            req = flow.send(next(it))
    except StopIteration as stop:
        return subs, stop.value
