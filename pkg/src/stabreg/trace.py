"""Run traces: in-memory event log plus the line-delimited file format.

A trace is a meta header (scenario hash, seed, process counts, the
transient-failure horizon, the corrupted-server set) followed by events
ordered by (time, sequence).  Payload values survive a file round trip
exactly: tuples and epoch labels are tagged so reloading a trace yields
the identical operation history.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable

from .epochs import Epoch


@dataclass(frozen=True)
class TraceEvent:
    time: int
    seq: int
    pid: str
    kind: str
    data: dict


@dataclass
class Trace:
    meta: dict
    events: list = field(default_factory=list)

    def emit(self, time: int, seq: int, pid: str, kind: str, **data) -> None:
        self.events.append(TraceEvent(time, seq, pid, kind, data))

    def by_kind(self, *kinds) -> list:
        want = set(kinds)
        return [e for e in self.events if e.kind in want]


def encode_value(v: Any):
    if isinstance(v, tuple):
        return {"__t__": [encode_value(x) for x in v]}
    if isinstance(v, Epoch):
        return {"__e__": [v.tag, sorted(v.seen)]}
    if isinstance(v, dict):
        return {str(k): encode_value(x) for k, x in v.items()}
    if isinstance(v, list):
        return [encode_value(x) for x in v]
    return v


def decode_value(v: Any):
    if isinstance(v, dict):
        if "__t__" in v and len(v) == 1:
            return tuple(decode_value(x) for x in v["__t__"])
        if "__e__" in v and len(v) == 1:
            tag, seen = v["__e__"]
            return Epoch(tag, frozenset(seen))
        return {k: decode_value(x) for k, x in v.items()}
    if isinstance(v, list):
        return [decode_value(x) for x in v]
    return v


def dump_trace(trace: Trace, path) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps({"kind": "meta", **encode_value(trace.meta)},
                            sort_keys=True) + "\n")
        for ev in trace.events:
            rec = {"time": ev.time, "pid": ev.pid, "kind": ev.kind,
                   "data": encode_value(ev.data)}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_trace(path) -> Trace:
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"empty trace file: {path}")
    head = json.loads(lines[0])
    if head.get("kind") != "meta":
        raise ValueError(f"trace file missing meta header: {path}")
    head.pop("kind")
    trace = Trace(meta=decode_value(head))
    for seq, ln in enumerate(lines[1:]):
        rec = json.loads(ln)
        trace.events.append(TraceEvent(rec["time"], seq, rec["pid"], rec["kind"],
                                       decode_value(rec["data"])))
    return trace
