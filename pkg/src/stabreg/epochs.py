"""Bounded epoch labels and their precedence order.

A label is a pair (tag, seen) with tag drawn from X = {1..K} and seen a
k-subset of X, where K = k*k + 1.  Label a dominates label b when a's
seen-set covers b's tag while b's seen-set misses a's tag.  The order is
antisymmetric but partial: two labels can be mutually unaware of each
other and therefore incomparable.

next_epoch() mints a label that dominates any k given labels: its tag is
taken outside the union of their seen-sets (always possible since the
union has at most k*k elements), and its seen-set covers all their tags.
Both choices are made deterministically (smallest candidates first) so
simulations replay identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .core import ConfigError


@dataclass(frozen=True)
class Epoch:
    tag: int
    seen: frozenset

    @property
    def k(self) -> int:
        return len(self.seen)

    @property
    def bound(self) -> int:
        return self.k * self.k + 1

    def validate(self) -> "Epoch":
        k = self.k
        if k <= 1:
            raise ConfigError(f"epoch parameter k must exceed 1, got {k}")
        big_k = self.bound
        if not 1 <= self.tag <= big_k:
            raise ConfigError(f"epoch tag {self.tag} outside [1, {big_k}]")
        if not all(1 <= a <= big_k for a in self.seen):
            raise ConfigError(f"epoch seen-set {sorted(self.seen)} outside [1, {big_k}]")
        return self

    def render(self) -> str:
        inner = ",".join(str(a) for a in sorted(self.seen))
        return f"({self.tag},{{{inner}}})"


def make_epoch(tag: int, seen: Iterable[int]) -> Epoch:
    return Epoch(tag, frozenset(seen)).validate()


def initial_epoch(k: int) -> Epoch:
    """A fixed well-formed label used as the clean-start timestamp."""
    return make_epoch(1, range(1, k + 1))


class EpochCmp(Enum):
    GREATER = "greater"
    NOT_GREATER = "not_greater"
    INCOMPARABLE = "incomparable"


def _dominates(a: Epoch, b: Epoch) -> bool:
    return b.tag in a.seen and a.tag not in b.seen


def epoch_gt(a: Epoch, b: Epoch) -> EpochCmp:
    """Tri-state comparison under the domination order.

    GREATER when a dominates b; NOT_GREATER when b dominates a or a == b;
    INCOMPARABLE when distinct labels dominate in neither direction.
    """
    if a.k != b.k:
        raise ConfigError(f"epoch parameter mismatch: k={a.k} vs k={b.k}")
    if _dominates(a, b):
        return EpochCmp.GREATER
    if a == b or _dominates(b, a):
        return EpochCmp.NOT_GREATER
    return EpochCmp.INCOMPARABLE


def epoch_geq(a: Epoch, b: Epoch) -> bool:
    """a dominates b, or a equals b componentwise."""
    return a == b or epoch_gt(a, b) is EpochCmp.GREATER


def next_epoch(labels: Sequence[Epoch]) -> Epoch:
    """Mint a label strictly dominating every label in the input.

    Expects exactly k labels (callers with fewer distinct labels pass
    duplicates).  The tag is the smallest element of X outside the union
    of the inputs' seen-sets; the seen-set collects the input tags, padded
    to size k with the smallest elements of X not referenced by any input,
    falling back to any absent element if the inputs reference all of X.
    """
    if not labels:
        raise ConfigError("next_epoch requires at least one label")
    k = labels[0].k
    if len(labels) != k:
        raise ConfigError(f"next_epoch expects exactly k={k} labels, got {len(labels)}")
    for lab in labels:
        if lab.k != k:
            raise ConfigError("next_epoch inputs must share the parameter k")
    big_k = k * k + 1
    universe = range(1, big_k + 1)
    union_seen = frozenset().union(*(lab.seen for lab in labels))

    tag = next(a for a in universe if a not in union_seen)

    seen = {lab.tag for lab in labels}
    referenced = union_seen | seen
    padding = [a for a in universe if a not in referenced]
    padding += [a for a in universe if a in union_seen and a not in seen]
    for a in padding:
        if len(seen) >= k:
            break
        seen.add(a)
    return Epoch(tag, frozenset(seen))


def max_epoch(labels: Sequence[Epoch]) -> Optional[int]:
    """Index of a label that is >= every label in the list, if one exists.

    Ties between equal maximal labels resolve to the smallest index.
    Returns None when no label dominates-or-equals all the others.
    """
    if not labels:
        raise ConfigError("max_epoch requires a non-empty list")
    for i, cand in enumerate(labels):
        if all(epoch_geq(cand, other) for other in labels):
            return i
    return None


def all_epochs(k: int) -> list:
    """The full label space for a parameter k: K * C(K, k) labels."""
    big_k = k * k + 1
    universe = range(1, big_k + 1)
    return [
        Epoch(tag, frozenset(sub))
        for tag in universe
        for sub in combinations(universe, k)
    ]
