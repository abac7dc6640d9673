import threading

import pytest
from hypothesis import given, settings, strategies as st

from ordfact.arith import build_sieve, signature_to_int
from ordfact.counting import (
    BudgetExceeded,
    Convention,
    MemoCache,
    factorizations,
    is_perfect_partition,
    m_divrec,
    m_k,
    m_macmahon,
    m_moebius,
    m_oracle,
    m_signature,
    m_sklar,
    m_two_prime,
    m_value,
    perfect_partition_count,
)

FIRST_25 = (1, 1, 1, 2, 1, 3, 1, 4, 2, 3, 1, 8, 1, 3, 3, 8, 1, 8, 1, 8, 3, 3, 1, 20, 2)
SIEVE = build_sieve(10**4)

signatures = st.lists(st.integers(1, 5), min_size=1, max_size=4).filter(lambda s: sum(s) <= 12)


def test_first_terms():
    assert tuple(m_value(n, SIEVE) for n in range(1, 26)) == FIRST_25
    assert tuple(m_oracle(n) for n in range(1, 26)) == FIRST_25


def test_known_values():
    assert m_value(30, SIEVE) == 13  # squarefree, three primes: 3! + 3! + 1
    assert m_divrec(36, SIEVE) == 26
    assert m_moebius(12, SIEVE) == 8
    assert m_signature((4, 1)) == 48
    assert m_two_prime(4, 1) == 48
    assert m_two_prime(1, 4) == 48


def test_convention():
    assert m_oracle(1, Convention.ZERO_AT_ONE) == 0
    assert m_oracle(1) == 1
    assert m_k(1, 3, SIEVE, Convention.ZERO_AT_ONE) == 0


def test_enumeration_matches_count():
    for n in (12, 48, 60, 96):
        listed = list(factorizations(n))
        assert len(listed) == len(set(listed)) == m_oracle(n)
        assert all(min(t) > 1 for t in listed)


def test_oracle_budget():
    with pytest.raises(BudgetExceeded):
        m_oracle(2**12 * 3**3, budget=100)


@settings(max_examples=60, deadline=None)
@given(signatures)
def test_closed_forms_agree(sig):
    expected = m_signature(sig, MemoCache())
    assert m_macmahon(sig) == expected
    assert m_sklar(sig) == expected
    if len(sig) == 2:
        assert m_two_prime(*sig) == expected


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 10**4))
def test_number_routes_agree(n):
    value = m_value(n, SIEVE)
    assert m_divrec(n, SIEVE) == value
    assert m_moebius(n, SIEVE) == value


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 10**4), st.integers(2, 10**4))
def test_supermultiplicative(a, b):
    # concatenating factorizations of a and b gives distinct ones of ab
    if a * b <= 10**4:
        assert m_value(a * b, SIEVE) >= m_value(a, SIEVE) * m_value(b, SIEVE)


def test_m_k_smoothness():
    assert m_k(12, 2, SIEVE) == 8
    assert m_k(10, 2, SIEVE) == 0
    assert m_k(10, 3, SIEVE) == 3


def test_memo_cache_threads():
    cache = MemoCache()
    sigs = [(a, b) for a in range(1, 9) for b in range(1, a + 1)]
    results = {}

    def work(i):
        results[i] = [m_signature(s, cache) for s in sigs]

    threads = [threading.Thread(target=work, args=(i,)) for i in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r == results[0] for r in results.values())
    assert results[0] == [m_two_prime(a, b) for a, b in sigs]
    assert cache.items() == sorted(cache.items())


def test_perfect_partitions():
    assert perfect_partition_count(12) == 8
    for n in range(2, 30):
        assert perfect_partition_count(n) == m_oracle(n)
    assert is_perfect_partition([1, 1, 3, 6])
    assert is_perfect_partition([1, 2, 2])
    assert not is_perfect_partition([1, 2, 3])


def test_perfect_partition_budget():
    with pytest.raises(BudgetExceeded):
        perfect_partition_count(60, budget=5)


def test_signature_int_link():
    for sig in [(1,), (2, 1), (3, 2, 1), (1, 1, 1, 1)]:
        assert m_oracle(signature_to_int(sig)) == m_signature(sig)
