import math

import numpy as np
import pytest

from ordfact.arith import build_sieve
from ordfact.counting import m_oracle
from ordfact.summatory import (
    SmoothCounter,
    TableOverflow,
    build_m_table,
    champion_search,
    progression_ratio,
    progression_sum,
    psi,
    psi_enumerate,
    summatory_M,
    summatory_Mk,
)

TABLE = build_m_table(10**4)
SIEVE = build_sieve(10**4)


def _brute_psi(x, y):
    def smooth(n):
        for p in range(2, n + 1):
            while n % p == 0:
                if p > y:
                    return False
                n //= p
        return True
    return sum(1 for n in range(1, x + 1) if smooth(n))


def test_table_matches_oracle():
    assert [TABLE[n] for n in range(1, 301)] == [m_oracle(n) for n in range(1, 301)]
    with pytest.raises(IndexError):
        TABLE[0]


def test_summatory_small():
    assert summatory_M(TABLE, 10) == 19  # 1+1+1+2+1+3+1+4+2+3
    assert summatory_M(TABLE, 0) == 0


def test_Mk():
    assert summatory_Mk(TABLE, SIEVE, 100, 1) == sum(m_oracle(2**a) for a in range(7))
    assert summatory_Mk(TABLE, SIEVE, 10**4, 10**6) == summatory_M(TABLE, 10**4)


def test_psi_small():
    assert psi(100, 5, SIEVE).count == 34
    assert _brute_psi(100, 5) == 34
    for x, y in [(1, 2), (50, 7), (997, 31), (2000, 100)]:
        assert psi(x, y, SIEVE).count == _brute_psi(x, y)


def test_psi_recurrence_vs_enumeration():
    counter = SmoothCounter(SIEVE)
    for y in (2, 3, 10, 47, 100):
        for x in range(1, 10**4 + 1, 97):
            assert counter.psi(x, y).count == psi_enumerate(x, y, SIEVE)


def test_psi_large_value():
    # memoized recurrence only needs primes up to y
    assert psi(10**9, 1000, build_sieve(1000)).count == 59244184


def test_psi_bad_args():
    with pytest.raises(ValueError):
        psi(10, 1, SIEVE)
    with pytest.raises(IndexError):
        psi(10**6, 10**5, SIEVE)


def test_progressions():
    assert progression_sum(TABLE, 25, 2, 1) == 19
    with pytest.raises(ValueError):
        progression_sum(TABLE, 100, 4, 2)
    # the residue classes coprime to K partition the coprime part of M
    x, K = 10**4, 12
    classes = [a for a in range(1, K) if math.gcd(a, K) == 1]
    total = sum(progression_sum(TABLE, x, K, a) for a in classes)
    assert total == sum(TABLE[n] for n in range(1, x + 1) if math.gcd(n, K) == 1)
    r = progression_ratio(TABLE, x, 3, 1)
    assert r == 2 * progression_sum(TABLE, x, 3, 1) / summatory_M(TABLE, x)


def test_overflow_guard():
    vals = build_m_table(2000).values
    assert vals.dtype == np.int64
    assert issubclass(TableOverflow, OverflowError)


def test_champion():
    rho = 1.7286472389981836
    c = champion_search(TABLE, SIEVE, 10**4, rho, k=3, rho_k=1.5660312528202)
    best = max(TABLE[n] / n**rho for n in range(3, 10**4 + 1)
               if SIEVE.largest_prime_factor[n] <= 5)
    assert math.isclose(c.ratio, best, rel_tol=1e-12)
    assert c.witness >= 1


def test_complete_residue_system_tiles_M():
    for K in (2, 6, 7):
        total = sum(progression_sum(TABLE, 5000, K, a, require_coprime=False) for a in range(K))
        assert total == summatory_M(TABLE, 5000)
