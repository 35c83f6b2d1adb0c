"""Deterministic discrete-event engine.

Virtual time is an integer tick counter.  Every pending action lives in
one priority queue keyed by (time, insertion sequence), so identical
scenario-and-seed pairs replay to bit-identical traces.  Message handlers
take zero simulated time: everything a handler emits carries the
timestamp of the event that triggered it, and only message transfer
advances the clock.

The engine owns the processes (client runtimes wrapping the protocol
machines, protocol-correct servers, the Byzantine strategy standing in
for corrupted servers), one of the two broadcast transports, the
transient-fault injector, and the workload schedule.  Clients are
sequential: an operation submitted while the previous one is still in
flight waits for its return.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass, field, asdict
from typing import Any, Optional

from .adversary import STRATEGIES, Adversary, PayloadFactory
from .core import (
    BOTTOM,
    AckReadMsg,
    AckWriteMsg,
    ConfigError,
    NewHelpValMsg,
    ProcessId,
    ReadMsg,
    Role,
    WriteMsg,
    garbage_value,
    check_modulus,
    client_pid,
    reader_pid,
    server_pid,
    writer_pid,
)
from .epochs import initial_epoch
from .multiwriter import ReadSub, WriteSub, mwmr_read_flow, mwmr_write_flow
from .swsr_regular import (
    Broadcast,
    RegisterServer,
    RegularReader,
    RegularWriter,
    Ret,
    StartTimer,
    Thresholds,
)
from .swsr_atomic import SeqReader, SeqWriter
from .trace import Trace
from .transport import DatalinkTransport, OracleTransport

REGISTERS = ("swsr_regular", "swsr_atomic", "swmr", "mwmr")
TIMINGS = ("async", "sync")
TRANSPORTS = ("oracle", "datalink")
DELAY_MODELS = ("uniform", "split")
MUTATIONS = ("no_help_reset", "no_inversion_guard", "weak_help_quorum")
FAULT_TARGETS = ("servers", "writer", "reader", "clients", "links", "all")

DEFAULT_MAX_EVENTS = 1_000_000


@dataclass
class Scenario:
    n: int
    t: int
    m: int = 1
    timing: str = "async"
    delta: int = 4                  # sync one-way delay bound, in ticks
    d_max: int = 8                  # async delay cap, in ticks
    delay_model: str = "uniform"
    transport: str = "oracle"
    cap: int = 3
    register: str = "swsr_regular"
    modulus: int = 2**64 + 1
    seq_bound: int = 2**64
    epoch_k: int = 2
    adversary: str = "silent"
    adversary_params: dict = field(default_factory=dict)
    byzantine: tuple = ()           # corrupted server indices; () means 1..t
    faults: tuple = ()              # fault specs: {"time", "target", ...params}
    tau_no_tr: int = 1
    workload: tuple = ()            # {"time", "client", "op", "value"}
    seed: int = 0
    max_events: int = DEFAULT_MAX_EVENTS
    mutations: tuple = ()           # protocol mutations for checker validation

    def __post_init__(self):
        self.byzantine = tuple(self.byzantine)
        self.faults = tuple(dict(f) for f in self.faults)
        self.workload = tuple(dict(w) for w in self.workload)
        self.mutations = tuple(self.mutations)
        self.validate()

    def validate(self) -> None:
        if self.timing not in TIMINGS:
            raise ConfigError(f"unknown timing model: {self.timing}")
        if self.register not in REGISTERS:
            raise ConfigError(f"unknown register kind: {self.register}")
        if self.transport not in TRANSPORTS:
            raise ConfigError(f"unknown transport: {self.transport}")
        if self.delay_model not in DELAY_MODELS:
            raise ConfigError(f"unknown delay model: {self.delay_model}")
        if self.adversary not in STRATEGIES:
            raise ConfigError(f"unknown adversary strategy: {self.adversary}")
        for mu in self.mutations:
            if mu not in MUTATIONS:
                raise ConfigError(f"unknown mutation: {mu}")
        if self.timing == "async" and self.n < 8 * self.t + 1:
            raise ConfigError(
                f"asynchronous mode requires n >= 8t+1 servers, got n={self.n}, t={self.t}")
        if self.timing == "sync" and self.n < 3 * self.t + 1:
            raise ConfigError(
                f"synchronous mode requires n >= 3t+1 servers, got n={self.n}, t={self.t}")
        check_modulus(self.modulus)
        if self.seq_bound < 1:
            raise ConfigError("seq_bound must be positive")
        if self.register in ("swmr", "mwmr") and self.m < 1:
            raise ConfigError("multi-reader registers need m >= 1")
        if self.register == "mwmr" and self.epoch_k != self.m:
            raise ConfigError(
                f"the epoch generator arity must equal m, got k={self.epoch_k}, m={self.m}")
        if self.register == "mwmr" and self.epoch_k <= 1:
            raise ConfigError("epoch parameter k must exceed 1")
        if self.register in ("swsr_regular", "swsr_atomic") and self.m != 1:
            raise ConfigError("single-reader registers fix m = 1")
        if self.byzantine:
            if len(self.byzantine) > self.t:
                raise ConfigError(
                    f"{len(self.byzantine)} corrupted servers exceed the budget t={self.t}")
            if not all(1 <= i <= self.n for i in self.byzantine):
                raise ConfigError("corrupted server index out of range")
        if self.delta < 1 or self.d_max < 1 or self.cap < 1:
            raise ConfigError("delta, d_max and cap must be >= 1 tick")
        for f in self.faults:
            if f.get("target") not in FAULT_TARGETS:
                raise ConfigError(f"unknown fault target: {f.get('target')}")
            if not 0 <= int(f.get("time", -1)) < self.tau_no_tr:
                raise ConfigError(
                    f"fault at time {f.get('time')} not before the transient-failure "
                    f"horizon {self.tau_no_tr}")
        for w in self.workload:
            if w.get("op") not in ("read", "write"):
                raise ConfigError(f"unknown workload op: {w.get('op')}")
            self._client_pid(w.get("client", ""))

    def _client_pid(self, token: str) -> ProcessId:
        pid = ProcessId.parse(token)
        ok = {
            "swsr_regular": pid in (writer_pid(), reader_pid()),
            "swsr_atomic": pid in (writer_pid(), reader_pid()),
            "swmr": pid == writer_pid() or (pid.role is Role.READER
                                            and 1 <= pid.index <= self.m),
            "mwmr": pid.role is Role.CLIENT and 1 <= pid.index <= self.m,
        }[self.register]
        if not ok:
            raise ConfigError(f"workload client {token!r} not valid for {self.register}")
        return pid

    @property
    def corrupted(self) -> tuple:
        if self.byzantine:
            return self.byzantine
        return tuple(range(1, self.t + 1))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["byzantine"] = list(self.byzantine)
        d["faults"] = [dict(f) for f in self.faults]
        d["workload"] = [dict(w) for w in self.workload]
        d["mutations"] = list(self.mutations)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        return cls(**data)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# Client runtimes: adapters between workload ops, machines, and the engine
# ---------------------------------------------------------------------------

class _OpRuntime:
    def __init__(self, eng: "Engine", pid: ProcessId):
        self.eng = eng
        self.pid = pid
        self.queue: list = []
        self.busy = False
        self.op_id: Optional[str] = None
        self.op_kind: Optional[str] = None
        self.op_value = None
        self.await_handle: Optional[int] = None

    # -- workload entry points --

    def submit(self, op: str, value, now: int) -> None:
        if self.busy:
            self.queue.append((op, value))
        else:
            self._begin(op, value, now)

    def _begin(self, op: str, value, now: int) -> None:
        self.busy = True
        self.op_id = self.eng.new_op_id()
        self.op_kind = op
        self.op_value = value
        self.eng.trace_event(now, self.pid, "invoke",
                             op=op, value=value, op_id=self.op_id)
        self.run(self.start_actions(op, value), now)

    def _returned(self, ret: Ret, now: int) -> None:
        meta = dict(ret.meta)
        self.eng.op_returned(self, ret.value, meta, now)
        self.busy = False
        self.op_id = None
        if self.queue:
            op, value = self.queue.pop(0)
            self._begin(op, value, now)

    # -- machine plumbing --

    def start_actions(self, op: str, value) -> list:
        raise NotImplementedError

    def machine(self):
        raise NotImplementedError

    def run(self, actions: list, now: int) -> None:
        for act in actions:
            if isinstance(act, Broadcast):
                self.await_handle = self.eng.do_broadcast(self.pid, act.msg, now)
            elif isinstance(act, StartTimer):
                self.eng.schedule(now + act.delay, "timer", (self.pid, act.token))
            elif isinstance(act, Ret):
                self._returned(act, now)
            else:
                raise TypeError(f"unknown machine action: {act!r}")

    def on_ack(self, server_index: int, msg, now: int) -> None:
        self.run(self.machine().on_ack(server_index, msg), now)

    def on_bcast_done(self, handle: int, now: int) -> None:
        if handle != self.await_handle:
            return
        self.run(self.machine().on_bcast_done(), now)

    def on_timer(self, token: int, now: int) -> None:
        self.run(self.machine().on_timer(token), now)


class WriterRuntime(_OpRuntime):
    def __init__(self, eng, pid, machine: RegularWriter, wrap_value=None):
        super().__init__(eng, pid)
        self._machine = machine
        self._wrap = wrap_value
        self._write_count = 0

    def machine(self):
        return self._machine

    def start_actions(self, op, value):
        if op != "write":
            raise ConfigError(f"{self.pid} only writes")
        self._write_count += 1
        if self._wrap is not None:
            value = self._wrap(value, self._write_count)
        return self._machine.begin_write(value)


class ReaderRuntime(_OpRuntime):
    def __init__(self, eng, pid, machine: RegularReader):
        super().__init__(eng, pid)
        self._machine = machine

    def machine(self):
        return self._machine

    def start_actions(self, op, value):
        if op != "read":
            raise ConfigError(f"{self.pid} only reads")
        return self._machine.begin_read()


class CompositeRuntime(_OpRuntime):
    """One multi-writer client: reader machines for every owner's register
    plus a writer machine for its own, sequenced by the operation flows."""

    def __init__(self, eng, pid, writer: SeqWriter, readers: dict):
        super().__init__(eng, pid)
        self.writer = writer
        self.readers = readers          # owner index -> SeqReader
        self.flow = None
        self.active = None              # machine currently running a sub-op
        self.sub_kind = None

    def machine(self):
        return self.active

    def start_actions(self, op, value):
        me, m = self.pid.index, self.eng.scenario.m
        bound = self.eng.scenario.seq_bound
        if op == "write":
            self.flow = mwmr_write_flow(me, m, value, bound)
        else:
            self.flow = mwmr_read_flow(me, m, bound)
        return self._advance(None, first=True)

    def _advance(self, sub_result, first: bool = False):
        try:
            sub = next(self.flow) if first else self.flow.send(sub_result)
        except StopIteration as stop:
            self.active = None
            self.sub_kind = None
            result = stop.value
            if self.op_kind == "write":
                epoch, seq = result
                return [Ret(None, meta={"epoch": epoch, "seq": seq})]
            value, epoch, seq = result
            return [Ret(value, meta={"epoch": epoch, "seq": seq})]
        return self._start_sub(sub)

    def _start_sub(self, sub):
        now = self.eng.now
        if isinstance(sub, ReadSub):
            self.active = self.readers[sub.owner]
            self.sub_kind = ("swmr_read", sub.owner)
            self.eng.trace_event(now, self.pid, "sub_invoke", op="swmr_read",
                                 reg=sub.owner, parent=self.op_id)
            return self.active.begin_read()
        if isinstance(sub, WriteSub):
            self.active = self.writer
            self.sub_kind = ("swmr_write", self.pid.index)
            self.eng.trace_event(now, self.pid, "sub_invoke", op="swmr_write",
                                 reg=self.pid.index, parent=self.op_id)
            return self.writer.begin_write(sub.triple)
        raise TypeError(f"unknown sub-operation: {sub!r}")

    def run(self, actions: list, now: int) -> None:
        # Sub-operation returns feed the flow instead of ending the op.
        out = []
        for act in actions:
            if isinstance(act, Ret) and self.flow is not None and self.active is not None:
                kind, reg = self.sub_kind
                self.eng.trace_event(now, self.pid, "sub_ret", op=kind, reg=reg,
                                     parent=self.op_id, value=act.value,
                                     meta=act.meta)
                if kind == "swmr_write":
                    self.eng.record_write_snapshot(self, act, now, reg=reg)
                    out.extend(self._advance(_WRITE_DONE))
                else:
                    out.extend(self._advance(self._normalize(act.value)))
            else:
                out.append(act)
        super().run(out, now)

    def _normalize(self, value):
        if isinstance(value, tuple) and len(value) == 3:
            return value
        # Out-of-domain content met on access folds back into the triple
        # domain with a floor timestamp.
        return (value, initial_epoch(self.eng.scenario.epoch_k), 0)

    # Stray events between sub-operations have no machine to run.

    def on_ack(self, server_index: int, msg, now: int) -> None:
        if self.active is not None:
            super().on_ack(server_index, msg, now)

    def on_bcast_done(self, handle: int, now: int) -> None:
        if self.active is not None:
            super().on_bcast_done(handle, now)

    def on_timer(self, token: int, now: int) -> None:
        if self.active is not None:
            super().on_timer(token, now)


class _WriteDone:
    pass


_WRITE_DONE = _WriteDone()


# ---------------------------------------------------------------------------
# Engine
# ---------------------------------------------------------------------------

class Engine:
    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self.rng = random.Random(scenario.seed)
        self.n = scenario.n
        self.t = scenario.t
        self.byzantine = frozenset(scenario.corrupted)
        self.now = 0
        self._heap: list = []
        self._seq = 0
        self._op_seq = 0
        self.processed = 0
        self.delay_model = scenario.delay_model

        self.trace = Trace(meta={
            "scenario_hash": scenario.hash(),
            "seed": scenario.seed,
            "n": scenario.n, "t": scenario.t, "m": scenario.m,
            "register": scenario.register,
            "timing": scenario.timing,
            "transport": scenario.transport,
            "modulus": scenario.modulus,
            "seq_bound": scenario.seq_bound,
            "epoch_k": scenario.epoch_k,
            "tau_no_tr": scenario.tau_no_tr,
            "adversary": scenario.adversary,
            "byzantine": sorted(self.byzantine),
            "max_events_hit": False,
        })

        self.factory = PayloadFactory(scenario.register, scenario.modulus,
                                      scenario.seq_bound, scenario.epoch_k,
                                      _random_epoch)
        cfg_kwargs = {}
        if "weak_help_quorum" in scenario.mutations:
            cfg_kwargs["help_quorum_override"] = 2 * scenario.t + 1
        self.cfg = Thresholds(scenario.n, scenario.t, scenario.timing == "sync",
                              scenario.delta, **cfg_kwargs)

        self.servers = {
            idx: RegisterServer(idx, self._regs(), self._slots(),
                                initial_last=self._initial_last(),
                                mutations=scenario.mutations)
            for idx in range(1, scenario.n + 1)
        }
        self.adversary = Adversary(scenario.adversary, self.byzantine,
                                   self._slots(), self.factory, self.rng,
                                   scenario.adversary_params)
        if scenario.transport == "oracle":
            self.transport = OracleTransport(self)
        else:
            self.transport = DatalinkTransport(self, scenario.cap)
        self._reply_fifo: dict = {}
        self.clients = self._build_clients()

        for i, fault in enumerate(scenario.faults):
            self.schedule(int(fault["time"]), "fault", (i,))
        for w in scenario.workload:
            pid = scenario._client_pid(w["client"])
            self.schedule(int(w["time"]), "submit", (pid, w["op"], w.get("value")))

    # -- construction helpers --

    def _regs(self):
        return list(range(1, self.scenario.m + 1)) if self.scenario.register == "mwmr" \
            else [0]

    def _slots(self):
        return self.scenario.m if self.scenario.register in ("swmr", "mwmr") else 1

    def _initial_last(self):
        reg = self.scenario.register
        if reg == "swsr_regular":
            return BOTTOM
        if reg == "swsr_atomic":
            return (0, BOTTOM)
        return (0, (BOTTOM, initial_epoch(self.scenario.epoch_k), 0))

    def _build_clients(self) -> dict:
        sc = self.scenario
        clients: dict = {}
        if sc.register in ("swsr_regular", "swsr_atomic"):
            if sc.register == "swsr_regular":
                wm = RegularWriter(self.cfg, reg=0, slots=1)
                rm = RegularReader(self.cfg, reg=0, slot=1)
            else:
                wm = SeqWriter(self.cfg, sc.modulus, reg=0, slots=1)
                rm = SeqReader(self.cfg, sc.modulus, reg=0, slot=1,
                               mutations=sc.mutations)
            clients[writer_pid()] = WriterRuntime(self, writer_pid(), wm)
            clients[reader_pid()] = ReaderRuntime(self, reader_pid(), rm)
        elif sc.register == "swmr":
            wm = SeqWriter(self.cfg, sc.modulus, reg=0, slots=sc.m)
            e0 = initial_epoch(sc.epoch_k)

            def wrap(value, count):
                return (value, e0, count)

            clients[writer_pid()] = WriterRuntime(self, writer_pid(), wm,
                                                  wrap_value=wrap)
            for r in range(1, sc.m + 1):
                rm = SeqReader(self.cfg, sc.modulus, reg=0, slot=r,
                               mutations=sc.mutations)
                clients[reader_pid(r)] = ReaderRuntime(self, reader_pid(r), rm)
        else:
            for i in range(1, sc.m + 1):
                wm = SeqWriter(self.cfg, sc.modulus, reg=i, slots=sc.m)
                readers = {
                    owner: SeqReader(self.cfg, sc.modulus, reg=owner, slot=i,
                                     mutations=sc.mutations)
                    for owner in range(1, sc.m + 1)
                }
                clients[client_pid(i)] = CompositeRuntime(self, client_pid(i),
                                                          wm, readers)
        return clients

    # -- scheduling primitives --

    def schedule(self, time: int, kind: str, payload: tuple) -> None:
        self._seq += 1
        heapq.heappush(self._heap, (time, self._seq, kind, payload))

    def new_op_id(self) -> str:
        self._op_seq += 1
        return f"op{self._op_seq}"

    def trace_event(self, time: int, pid, kind: str, **data) -> None:
        self._seq += 1
        self.trace.emit(time, self._seq, str(pid), kind, **data)

    def draw_delay(self, kind: str, server: int = 0) -> int:
        if self.scenario.timing == "sync":
            return self.rng.randint(1, self.scenario.delta)
        return self.rng.randint(1, self.scenario.d_max)

    # -- transport & messaging services --

    def do_broadcast(self, sender_pid, msg, now: int) -> int:
        handle = self.transport.broadcast(sender_pid, msg, now)
        self.trace_event(now, sender_pid, "bcast", handle=handle,
                         mkind=msg.kind.value, reg=msg.reg)
        return handle

    def deliver_now(self, server_index: int, sender_pid, msg, handle,
                    spurious: bool, now: int) -> None:
        self._handle_deliver((server_index, sender_pid, msg, handle, spurious), now)

    def point_send(self, from_server: int, dest_pid, msg, now: int) -> None:
        delay = self.draw_delay("reply", from_server)
        key = (from_server, dest_pid)
        t = max(now + delay, self._reply_fifo.get(key, 0))
        self._reply_fifo[key] = t
        self.schedule(t, "reply", (dest_pid, from_server, msg))

    def op_returned(self, rt: _OpRuntime, value, meta: dict, now: int) -> None:
        self.trace_event(now, rt.pid, "ret", op=rt.op_kind, op_id=rt.op_id,
                         value=value, meta=meta)
        if rt.op_kind == "write" and not isinstance(rt, CompositeRuntime):
            self.record_write_snapshot(rt, Ret(value, meta), now,
                                       reg=rt.machine().reg)

    def record_write_snapshot(self, rt, ret: Ret, now: int, reg: int) -> None:
        payload = ret.meta.get("payload")
        self.trace_event(now, rt.pid, "snapshot", op_id=rt.op_id, reg=reg,
                         payload=payload,
                         servers={str(i): s.snapshot()[reg]
                                  for i, s in self.servers.items()})

    # -- main loop --

    def run(self) -> Trace:
        sc = self.scenario
        while self._heap:
            if self.processed >= sc.max_events:
                self.trace.meta["max_events_hit"] = True
                break
            time, _, kind, payload = heapq.heappop(self._heap)
            self.now = time
            self.processed += 1
            getattr(self, "_handle_" + kind)(payload, time)
        self.trace.meta["final_time"] = self.now
        self.trace.events.sort(key=lambda e: (e.time, e.seq))
        return self.trace

    # -- event handlers --

    def _handle_submit(self, payload, now: int) -> None:
        pid, op, value = payload
        self.clients[pid].submit(op, value, now)

    def _handle_deliver(self, payload, now: int) -> None:
        server_index, sender_pid, msg, handle, spurious = payload
        self.trace_event(now, server_pid(server_index), "deliver",
                         handle=handle, sender=str(sender_pid),
                         mkind=msg.kind.value, spurious=spurious)
        if server_index in self.byzantine:
            replies = self.adversary.step(server_index, sender_pid, msg, now)
        else:
            replies = self.servers[server_index].on_deliver(sender_pid, msg)
        for dest, reply in replies:
            self.point_send(server_index, dest, reply, now)

    def _handle_reply(self, payload, now: int) -> None:
        dest_pid, from_server, msg = payload
        rt = self.clients.get(dest_pid)
        if rt is not None:
            rt.on_ack(from_server, msg, now)

    def _handle_bcast_done(self, payload, now: int) -> None:
        sender_pid, handle = payload
        self.trace_event(now, sender_pid, "bcast_done", handle=handle)
        rt = self.clients.get(sender_pid)
        if rt is not None:
            rt.on_bcast_done(handle, now)

    def _handle_timer(self, payload, now: int) -> None:
        pid, token = payload
        rt = self.clients.get(pid)
        if rt is not None:
            rt.on_timer(token, now)

    def _handle_packet(self, payload, now: int) -> None:
        pair_key, direction, packet = payload
        self.transport.on_packet(pair_key, direction, packet, now)

    def _handle_links_clean(self, payload, now: int) -> None:
        self.trace_event(now, "engine", "links_clean")

    def _handle_fault(self, payload, now: int) -> None:
        (index,) = payload
        spec = self.scenario.faults[index]
        self._inject(spec, now)

    # -- transient fault injection --

    def _inject(self, spec: dict, now: int) -> None:
        target = spec["target"]
        self.trace_event(now, "engine", "fault", target=target)
        if target in ("servers", "all"):
            for idx, server in self.servers.items():
                server.corrupt(self.rng, self.factory.payload)
        if target in ("writer", "clients", "all"):
            for rt in self.clients.values():
                if isinstance(rt, WriterRuntime):
                    rt.machine().corrupt(self.rng)
                elif isinstance(rt, CompositeRuntime):
                    rt.writer.corrupt(self.rng)
        if target in ("reader", "clients", "all"):
            ahead = spec.get("pwsn") == "ahead"
            for rt in self.clients.values():
                if isinstance(rt, ReaderRuntime):
                    mach = rt.machine()
                    if isinstance(mach, SeqReader):
                        mach.corrupt(self.rng, value_maker=self.factory.value,
                                     ahead=ahead)
                    else:
                        mach.corrupt(self.rng)
                elif isinstance(rt, CompositeRuntime):
                    for mach in rt.readers.values():
                        mach.corrupt(self.rng, value_maker=self.factory.value,
                                     ahead=ahead)
        if target in ("links", "all"):
            self._inject_links(spec, now)

    def _garbage_msg(self, rng) -> Any:
        reg = rng.choice(self._regs())
        slot = rng.randint(1, self._slots())
        roll = rng.random()
        if roll < 0.4:
            return WriteMsg(reg, self.factory.payload(rng))
        if roll < 0.7:
            return ReadMsg(reg, slot, rng.random() < 0.5)
        return NewHelpValMsg(reg, (slot,), self.factory.payload(rng))

    def _garbage_ack(self, rng) -> Any:
        reg = rng.choice(self._regs())
        slot = rng.randint(1, self._slots())
        if rng.random() < 0.5:
            helping = tuple(self.factory.payload(rng) for _ in range(self._slots()))
            return AckWriteMsg(reg, helping)
        return AckReadMsg(reg, slot, self.factory.payload(rng),
                          self.factory.payload(rng))

    def _garbage_arrival(self, now: int) -> Optional[int]:
        # In-flight corruption is part of the transient window: it must
        # land before the horizon after which no transient failure occurs.
        horizon = self.scenario.tau_no_tr - 1
        if horizon <= now:
            return None
        return self.rng.randint(now + 1, max(now + 1, horizon))

    def _inject_links(self, spec: dict, now: int) -> None:
        rng = self.rng
        latest = now
        client_pids = sorted(self.clients, key=str)
        if self.scenario.transport == "datalink":
            count = int(spec.get("packets", self.scenario.cap))
            for cpid in client_pids:
                for sidx in range(1, self.n + 1):
                    for _ in range(rng.randint(0, count)):
                        arrival = self._garbage_arrival(now)
                        if arrival is None:
                            continue
                        direction = "fwd" if rng.random() < 0.6 else "rev"
                        if direction == "fwd":
                            packet = (rng.randrange(2), "msg",
                                      (None, self._garbage_msg(rng)))
                        else:
                            packet = (rng.randrange(2), "ack", None)
                        self.transport.preload((cpid, sidx), direction, packet,
                                               arrival)
                        latest = max(latest, arrival)
            self.transport.corrupt_endpoints(rng)
        else:
            deliveries = int(spec.get("deliveries", 3))
            for _ in range(deliveries):
                arrival = self._garbage_arrival(now)
                if arrival is None:
                    break
                sidx = rng.randint(1, self.n)
                sender = rng.choice(client_pids)
                self.schedule(arrival, "deliver",
                              (sidx, sender, self._garbage_msg(rng), None, True))
                latest = max(latest, arrival)
        replies = int(spec.get("replies", 3))
        for _ in range(replies):
            arrival = self._garbage_arrival(now)
            if arrival is None:
                break
            dest = rng.choice(client_pids)
            sidx = rng.randint(1, self.n)
            self.schedule(arrival, "reply", (dest, sidx, self._garbage_ack(rng)))
            latest = max(latest, arrival)
        self.schedule(latest, "links_clean", ())


def _random_epoch(rng, k: int):
    from .epochs import Epoch
    big_k = k * k + 1
    return Epoch(rng.randint(1, big_k),
                 frozenset(rng.sample(range(1, big_k + 1), k)))


def run_scenario(scenario: Scenario) -> Trace:
    return Engine(scenario).run()


# ---------------------------------------------------------------------------
# Workload builders (used by sweeps and the acceptance suite)
# ---------------------------------------------------------------------------

def swsr_workload(rng: random.Random, start: int, writes: int, reads: int,
                  spacing: int = 30) -> list:
    """A single-writer single-reader schedule: an early write, an isolated
    read (the stabilization point for the sequenced register), then a
    random interleaving.  Write values are unique small integers."""
    ops = [{"time": start, "client": "writer:1", "op": "write", "value": 1}]
    value = 1
    t = start + 4 * spacing
    ops.append({"time": t, "client": "reader:1", "op": "read", "value": None})
    t += 4 * spacing
    kinds = ["write"] * (writes - 1) + ["read"] * (reads - 1)
    rng.shuffle(kinds)
    for kind in kinds:
        t += rng.randint(1, spacing)
        if kind == "write":
            value += 1
            ops.append({"time": t, "client": "writer:1", "op": "write",
                        "value": value})
        else:
            ops.append({"time": t, "client": "reader:1", "op": "read",
                        "value": None})
    return ops


def mwmr_workload(rng: random.Random, m: int, start: int, ops_per_client: int,
                  spacing: int = 60) -> list:
    """Mixed multi-writer schedule.  The first operation is an isolated
    write; later operations interleave moderately across clients."""
    ops = [{"time": start, "client": "client:1", "op": "write", "value": 1}]
    value = 1
    t = start + 6 * spacing
    entries = []
    for i in range(1, m + 1):
        for _ in range(ops_per_client):
            entries.append(i)
    rng.shuffle(entries)
    for i in entries:
        t += rng.randint(1, spacing)
        if rng.random() < 0.6:
            value += 1
            ops.append({"time": t, "client": f"client:{i}", "op": "write",
                        "value": value})
        else:
            ops.append({"time": t, "client": f"client:{i}", "op": "read",
                        "value": None})
    return ops
