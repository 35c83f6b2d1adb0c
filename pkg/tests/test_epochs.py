"""Epoch label order: pinned examples plus exhaustive k=2 verification."""

import itertools

import pytest

from stabreg.core import ConfigError
from stabreg.epochs import (
    Epoch,
    EpochCmp,
    all_epochs,
    epoch_geq,
    epoch_gt,
    initial_epoch,
    make_epoch,
    max_epoch,
    next_epoch,
)


def brute_dominates(a: Epoch, b: Epoch) -> bool:
    # Direct evaluation of the definition, independent of epoch_gt.
    return b.tag in a.seen and a.tag not in b.seen


def test_examples_k2():
    a = make_epoch(1, {1, 2})
    b = make_epoch(1, {2, 3})
    assert epoch_gt(a, b) is EpochCmp.GREATER       # 1 in {1,2} and 1 not in {2,3}
    assert epoch_gt(b, b) is EpochCmp.NOT_GREATER
    assert epoch_geq(b, b) is True
    c = make_epoch(2, {1, 4})
    assert epoch_gt(b, c) is EpochCmp.INCOMPARABLE
    assert epoch_gt(c, b) is EpochCmp.INCOMPARABLE


def test_label_space_size_k2():
    labels = all_epochs(2)
    assert len(labels) == 50        # K * C(K, k) = 5 * 10


def test_antisymmetry_exhaustive_k2():
    labels = all_epochs(2)
    pairs = 0
    for a, b in itertools.permutations(labels, 2):
        pairs += 1
        assert not (
            epoch_gt(a, b) is EpochCmp.GREATER and epoch_gt(b, a) is EpochCmp.GREATER
        )
    assert pairs == 2450


def test_next_epoch_examples():
    out = next_epoch([make_epoch(1, {2, 3}), make_epoch(2, {4, 5})])
    assert out == make_epoch(1, {1, 2})
    out = next_epoch([make_epoch(3, {1, 2}), make_epoch(3, {1, 2})])
    assert out == make_epoch(3, {3, 4})
    assert brute_dominates(out, make_epoch(3, {1, 2}))


def test_next_epoch_dominance_exhaustive_k2():
    labels = all_epochs(2)
    for a, b in itertools.product(labels, repeat=2):
        out = next_epoch([a, b])
        out.validate()
        assert brute_dominates(out, a), (a, b, out)
        assert brute_dominates(out, b), (a, b, out)


def test_max_epoch_examples():
    a = make_epoch(1, {1, 2})
    b = make_epoch(1, {2, 3})
    assert max_epoch([a, b]) == 0
    assert max_epoch([make_epoch(1, {2, 3}), make_epoch(2, {1, 4})]) is None
    e = make_epoch(2, {3, 4})
    assert max_epoch([e, e, e]) == 0


def test_max_epoch_soundness_exhaustive_pairs_k2():
    labels = all_epochs(2)
    for a, b in itertools.product(labels, repeat=2):
        got = max_epoch([a, b])
        # Brute force: scan for any index that is >= all entries.
        pair = [a, b]
        expect = None
        for i, cand in enumerate(pair):
            if all(cand == o or brute_dominates(cand, o) for o in pair):
                expect = i
                break
        assert got == expect, (a, b)


def test_epoch_validation():
    with pytest.raises(ConfigError):
        make_epoch(6, {1, 2})       # tag outside [1, 5] for k=2
    with pytest.raises(ConfigError):
        make_epoch(1, {1, 9})
    with pytest.raises(ConfigError):
        epoch_gt(make_epoch(1, {1, 2}), make_epoch(1, {1, 2, 3}))
    with pytest.raises(ConfigError):
        next_epoch([make_epoch(1, {1, 2})])     # arity must equal k


def test_render():
    assert make_epoch(3, {4, 1}).render() == "(3,{1,4})"
    assert initial_epoch(3) == make_epoch(1, {1, 2, 3})
