"""Ring-order arithmetic checked against brute-force tables."""

import pytest
from hypothesis import given, strategies as st

from stabreg.core import (
    BOTTOM,
    ConfigError,
    ProcessId,
    Role,
    cd_geq,
    cd_greater,
    lifespan,
    next_seq,
)

M17 = 17


def brute_cd_greater(x: int, y: int, m: int) -> bool:
    # Clockwise distance from y to x, counted by stepping, versus the
    # anti-clockwise distance.  Strictly greater requires x != y.
    if x == y:
        return False
    cw = 0
    p = y
    while p != x:
        p = (p + 1) % m
        cw += 1
    return cw < m - cw


def test_examples_m17():
    assert cd_greater(5, 3, M17) is True            # (5-3) % 17 = 2 <= 8
    assert cd_greater(3, 3, M17) is False
    assert cd_geq(3, 3, M17) is True
    assert cd_greater(3, 15, M17) is True           # wrap: (3-15) % 17 = 5 <= 8


def test_next_seq():
    assert next_seq(0, M17) == 1
    assert next_seq(16, M17) == 0
    assert next_seq(7, M17) == 8
    assert cd_greater(8, 7, M17) is True


def test_matches_brute_force_table_m17():
    for x in range(M17):
        for y in range(M17):
            assert cd_greater(x, y, M17) == brute_cd_greater(x, y, M17), (x, y)


def test_totality_on_distinct_pairs_m17():
    for x in range(M17):
        for y in range(M17):
            if x == y:
                continue
            assert cd_greater(x, y, M17) != cd_greater(y, x, M17)


def test_monotone_within_half_ring_m17():
    half = lifespan(M17)
    assert half == 8
    for x in range(M17):
        for j in range(1, half + 1):
            assert cd_greater((x + j) % M17, x, M17)
        # One step past the horizon the comparison flips.
        assert not cd_greater((x + half + 1) % M17, x, M17)


def test_not_transitive_m17():
    # Exhaustive scan for a witness triple: x > y and y > z but not x > z.
    witnesses = [
        (x, y, z)
        for x in range(M17)
        for y in range(M17)
        for z in range(M17)
        if cd_greater(x, y, M17)
        and cd_greater(y, z, M17)
        and not cd_greater(x, z, M17)
    ]
    assert witnesses, "expected the ring order to be non-transitive"
    # One documented witness: 12 > 5 (dist 7), 5 > 15 (dist 7), but the
    # distance from 15 to 12 is 14, past the half ring.
    assert (12, 5, 15) in witnesses


@given(
    m=st.integers(min_value=1, max_value=200).map(lambda i: 2 * i + 1),
    x=st.integers(min_value=0),
    y=st.integers(min_value=0),
)
def test_totality_random_rings(m, x, y):
    x %= m
    y %= m
    if x == y:
        assert not cd_greater(x, y, m)
    else:
        assert cd_greater(x, y, m) != cd_greater(y, x, m)


def test_rejects_bad_modulus_and_range():
    with pytest.raises(ConfigError):
        cd_greater(0, 1, 16)        # even modulus
    with pytest.raises(ConfigError):
        cd_greater(17, 1, 17)       # out of range
    with pytest.raises(ConfigError):
        next_seq(-1, 17)


def test_bottom_distinct_from_payloads():
    assert BOTTOM != 0
    assert BOTTOM != ""
    assert (0, BOTTOM) != BOTTOM


def test_pid_roundtrip():
    pid = ProcessId(Role.SERVER, 4)
    assert str(pid) == "server:4"
    assert ProcessId.parse("server:4") == pid
    assert ProcessId.parse("writer:1") == ProcessId(Role.WRITER, 1)
