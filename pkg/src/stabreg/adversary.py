"""Byzantine server strategies.

A corrupted server never runs the correct handlers; every message
delivered to it is handed to the run's strategy, which returns an
arbitrary (possibly empty) list of well-typed replies.  Strategies cannot
forge messages from other processes: replies are sent over the corrupted
server's own reply links, so recipients always know who sent them.

Fabricated payloads are drawn from the injector's garbage namespace,
disjoint from workload values: a lone Byzantine server can try to steer
quorum counts but cannot impersonate agreement on a genuinely written
value it never saw.
"""

from __future__ import annotations

from .core import (
    BOTTOM,
    AckReadMsg,
    AckWriteMsg,
    NewHelpValMsg,
    ReadMsg,
    Role,
    WriteMsg,
    garbage_value,
)


class PayloadFactory:
    """Builds random domain-valid payloads for a given register shape."""

    def __init__(self, register: str, modulus: int, seq_bound: int, epoch_k: int,
                 random_epoch):
        self.register = register
        self.modulus = modulus
        self.seq_bound = seq_bound
        self.epoch_k = epoch_k
        self._random_epoch = random_epoch

    def value(self, rng):
        if self.register in ("swmr", "mwmr"):
            return (garbage_value(rng), self._random_epoch(rng, self.epoch_k),
                    rng.randrange(self.seq_bound + 1))
        return garbage_value(rng)

    def payload(self, rng):
        if self.register == "swsr_regular":
            return self.value(rng)
        return (rng.randrange(self.modulus), self.value(rng))


class Adversary:
    def __init__(self, strategy: str, corrupted, slots: int, factory: PayloadFactory,
                 rng, params=None):
        if strategy not in STRATEGIES:
            from .core import ConfigError
            raise ConfigError(f"unknown adversary strategy: {strategy}")
        self.strategy = strategy
        self.corrupted = frozenset(corrupted)
        self.slots = slots
        self.factory = factory
        self.rng = rng
        self.params = params or {}
        # help_poisoner: one fixed bogus non-bottom payload for the run.
        self._poison = factory.payload(rng)
        self._poison_last = factory.payload(rng)
        # equivocate: one fabricated world per audience.
        self._face = {"writer": factory.payload(rng), "reader": factory.payload(rng)}
        # stale_replay: oldest write / helping payloads seen, per register.
        self._first_write: dict = {}
        self._first_help: dict = {}

    def step(self, server_index: int, sender_pid, msg, now: int) -> list:
        return getattr(self, "_" + self.strategy)(server_index, sender_pid, msg)

    # -- strategies ------------------------------------------------------

    def _silent(self, idx, sender, msg):
        return []

    def _random_reply(self, idx, sender, msg):
        rng = self.rng
        if isinstance(msg, WriteMsg):
            helping = tuple(
                BOTTOM if rng.random() < 0.3 else self.factory.payload(rng)
                for _ in range(self.slots)
            )
            return [(sender, AckWriteMsg(msg.reg, helping))]
        if isinstance(msg, ReadMsg):
            helping = BOTTOM if rng.random() < 0.3 else self.factory.payload(rng)
            return [(sender, AckReadMsg(msg.reg, msg.slot,
                                        self.factory.payload(rng), helping))]
        return []

    def _equivocate(self, idx, sender, msg):
        face = self._face["writer" if sender.role in (Role.WRITER, Role.CLIENT)
                          else "reader"]
        if isinstance(msg, WriteMsg):
            return [(sender, AckWriteMsg(msg.reg, (face,) * self.slots))]
        if isinstance(msg, ReadMsg):
            return [(sender, AckReadMsg(msg.reg, msg.slot, face, face))]
        return []

    def _help_poisoner(self, idx, sender, msg):
        if isinstance(msg, WriteMsg):
            return [(sender, AckWriteMsg(msg.reg, (self._poison,) * self.slots))]
        if isinstance(msg, ReadMsg):
            return [(sender, AckReadMsg(msg.reg, msg.slot, self._poison_last,
                                        self._poison))]
        return []

    def _stale_replay(self, idx, sender, msg):
        if isinstance(msg, WriteMsg):
            self._first_write.setdefault(msg.reg, msg.payload)
            old_help = self._first_help.get(msg.reg, BOTTOM)
            return [(sender, AckWriteMsg(msg.reg, (old_help,) * self.slots))]
        if isinstance(msg, NewHelpValMsg):
            self._first_help.setdefault(msg.reg, msg.payload)
            return []
        if isinstance(msg, ReadMsg):
            return [(sender, AckReadMsg(msg.reg, msg.slot,
                                        self._first_write.get(msg.reg, BOTTOM),
                                        self._first_help.get(msg.reg, BOTTOM)))]
        return []


STRATEGIES = ("silent", "random_reply", "equivocate", "help_poisoner", "stale_replay")
