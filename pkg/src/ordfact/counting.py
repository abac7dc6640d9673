"""The ordered-factorization count ``m(n)``, computed every way we know.

Independent routes to the same number:

* ``m_oracle``     explicit enumeration over the first factor
* ``m_divrec``     ``m(n) = sum of m(d)`` over proper divisors
* ``m_moebius``    inclusion-exclusion over the distinct primes, ``m(1) = 1/2``
* ``m_signature``  memoized vector-composition DP keyed on the signature
* ``m_macmahon``   MacMahon's alternating binomial sum
* ``m_sklar``      ``sum d_k(n) / 2^(k+1)``, summed in closed form
* ``m_two_prime``  closed form for ``p^a q^b``
* ``perfect_partition_count``  the additive (perfect partition) description

They are kept deliberately separate; none calls another.
"""

from __future__ import annotations

import enum
import math
import threading
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator

from .arith import (
    Factorization,
    PrimeSieve,
    Signature,
    binomial,
    factorize,
    make_signature,
    signature_of,
)

DEFAULT_BUDGET = 10**8


class Convention(enum.Enum):
    """Value assigned to ``m(1)``."""

    ZERO_AT_ONE = 0
    ONE_AT_ONE = 1

    @property
    def at_one(self) -> int:
        return self.value


class BudgetExceeded(RuntimeError):
    """An exponential enumeration ran past its node budget."""


class InternalConsistencyError(ArithmeticError):
    """A formula that must produce an integer did not."""


class MemoCache:
    """Signature -> m-value store shared by the DP.

    Readers never lock: a dict lookup observes either no entry or the whole
    value.  Writers take a lock so counters and inserts stay coherent.  Pass
    ``threadsafe=False`` for the lock-free single-threaded variant.
    """

    def __init__(self, threadsafe: bool = True):
        self._data: dict[Signature, int] = {(): 1}
        self._lock = threading.Lock() if threadsafe else None
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, sig) -> bool:
        return sig in self._data

    def get(self, sig: Signature) -> int | None:
        value = self._data.get(sig)
        if value is None:
            self.misses += 1
        else:
            self.hits += 1
        return value

    def put(self, sig: Signature, value: int) -> None:
        if self._lock is None:
            self._data[sig] = value
        else:
            with self._lock:
                self._data.setdefault(sig, value)

    def items(self) -> list[tuple[Signature, int]]:
        return sorted(self._data.items())

    def update(self, records) -> None:
        for sig, value in records:
            self.put(make_signature(sig), int(value))


_default_cache = MemoCache()


def default_cache() -> MemoCache:
    return _default_cache


# -- brute force -------------------------------------------------------------


def _trial_divisors(n: int) -> list[int]:
    small, large = [], []
    for d in range(1, math.isqrt(n) + 1):
        if n % d == 0:
            small.append(d)
            if d * d != n:
                large.append(n // d)
    return small + large[::-1]


def m_oracle(
    n: int,
    convention: Convention = Convention.ONE_AT_ONE,
    budget: int = DEFAULT_BUDGET,
) -> int:
    """Count ordered factorizations of ``n`` by listing them.

    No sieve, no memo: every factorization is a leaf of the recursion over
    the first factor, so the cost is proportional to ``m(n)`` itself.
    """
    if n < 1:
        raise ValueError(f"m is defined for n >= 1, got {n}")
    if n == 1:
        return convention.at_one
    divs = _trial_divisors(n)
    children = {r: [d for d in divs if d > 1 and r % d == 0] for r in divs}
    nodes = 0

    def walk(r: int) -> int:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"m_oracle({n}) exceeded {budget} nodes")
        if r == 1:
            return 1
        return sum(walk(r // d) for d in children[r])

    return walk(n)


def factorizations(n: int) -> Iterator[tuple[int, ...]]:
    """Yield every ordered factorization of ``n >= 2`` as a tuple of factors."""
    if n == 1:
        yield ()
        return
    for d in _trial_divisors(n)[1:]:
        for rest in factorizations(n // d):
            yield (d,) + rest


# -- divisor recurrences -----------------------------------------------------


def m_divrec(n: int, sieve: PrimeSieve) -> int:
    f = factorize(n, sieve)
    divs = f.divisors()
    memo: dict[int, int] = {1: 1}
    for r in divs[1:]:
        memo[r] = sum(memo[d] for d in divs if d < r and r % d == 0)
    return memo[n]


def m_moebius(n: int, sieve: PrimeSieve) -> int:
    if n < 2:
        raise ValueError("the Moebius recurrence needs n >= 2")
    primes = factorize(n, sieve).primes
    memo: dict[int, Fraction] = {1: Fraction(1, 2)}

    def m_star(r: int) -> Fraction:
        if r in memo:
            return memo[r]
        qs = [q for q in primes if r % q == 0]
        total = Fraction(0)
        for size in range(1, len(qs) + 1):
            sign = 1 if size % 2 else -1
            for subset in combinations(qs, size):
                total += sign * m_star(r // math.prod(subset))
        memo[r] = 2 * total
        return memo[r]

    value = m_star(n)
    if value.denominator != 1:
        raise InternalConsistencyError(f"m_moebius({n}) = {value} is not integral")
    return int(value)


# -- signature based ---------------------------------------------------------


def m_signature(sig, cache: MemoCache | None = None) -> int:
    """m of any integer with exponent signature ``sig``.

    m(lambda) counts ordered sums of nonzero vectors equal to lambda; peel
    off the first vector and recurse on the canonical (sorted) remainder.
    """
    if cache is None:
        cache = _default_cache
    sig = make_signature(sig)
    return _m_sig(sig, cache)


def _m_sig(sig: Signature, cache: MemoCache) -> int:
    hit = cache.get(sig)
    if hit is not None:
        return hit
    total = 0
    for v in product(*(range(a + 1) for a in sig)):
        rest = tuple(sorted((a - b for a, b in zip(sig, v) if a != b), reverse=True))
        if rest == sig:
            continue  # v = 0
        total += _m_sig(rest, cache)
    cache.put(sig, total)
    return total


def m_macmahon(sig) -> int:
    sig = make_signature(sig)
    if not sig:
        raise ValueError("MacMahon's formula needs a nonempty signature")
    a = sum(sig)
    total = 0
    for j in range(1, a + 1):
        for i in range(j):
            term = binomial(j, i)
            for ak in sig:
                term *= binomial(ak + j - i - 1, ak)
            total += -term if i % 2 else term
    return total


def _forward_differences(values: list[int]) -> list[int]:
    diffs = []
    row = list(values)
    while row:
        diffs.append(row[0])
        row = [b - a for a, b in zip(row, row[1:])]
    return diffs


def m_sklar(sig) -> int:
    """Sum ``d_k(n) / 2^(k+1)`` over ``k >= 1`` without truncation.

    ``d_k(n) = prod C(a_i + k - 1, a_i)`` is a polynomial in k of degree
    Omega(n).  Writing it in the binomial basis ``sum_j D_j C(k, j)`` (D_j the
    forward differences at 0) turns the series into the exact sum
    ``sum_j D_j * S_j`` with ``S_j = sum_{k>=1} C(k, j) / 2^(k+1)``.
    """
    sig = make_signature(sig)
    if not sig:
        raise ValueError("Sklar's series needs a nonempty signature")
    degree = sum(sig)

    def d_k(k: int) -> int:
        return math.prod(binomial(a + k - 1, a) for a in sig)

    diffs = _forward_differences([d_k(k) for k in range(degree + 1)])
    total = Fraction(0)
    for j, dj in enumerate(diffs):
        # sum_{k>=0} C(k,j) x^k = x^j / (1-x)^(j+1); at x = 1/2 that is 2.
        # The k = 0 term is 1 only for j = 0 and must be dropped.
        s_j = Fraction(2) - (1 if j == 0 else 0)
        total += dj * s_j / 2
    if total.denominator != 1:
        raise InternalConsistencyError(f"Sklar sum for {sig} = {total} is not integral")
    return int(total)


def m_two_prime(a: int, b: int) -> int:
    """m(p^a q^b) for distinct primes p, q."""
    if a < b:
        a, b = b, a
    if a < 1 or b < 0:
        raise ValueError(f"need a >= b >= 0 and a >= 1, got ({a}, {b})")
    s = sum(Fraction(binomial(a, k) * binomial(b, k), 2**k) for k in range(b + 1))
    value = 2 ** (a + b - 1) * s
    if value.denominator != 1:
        raise InternalConsistencyError(f"m_two_prime({a}, {b}) = {value}")
    return int(value)


def m_value(n: int, sieve: PrimeSieve, cache: MemoCache | None = None) -> int:
    """m(n) with m(1) = 1, through the signature DP."""
    return m_signature(signature_of(factorize(n, sieve)), cache)


def m_k(
    n: int,
    k: int,
    sieve: PrimeSieve,
    convention: Convention = Convention.ONE_AT_ONE,
    cache: MemoCache | None = None,
) -> int:
    """m restricted to factors composed of the first ``k`` primes."""
    if n < 1 or k < 1:
        raise ValueError(f"need n >= 1 and k >= 1, got n={n}, k={k}")
    if n == 1:
        return convention.at_one
    f: Factorization = factorize(n, sieve)
    if k <= len(sieve.primes) and f.largest_prime > sieve.nth_prime(k):
        return 0
    return m_signature(signature_of(f), cache)


# -- perfect partitions ------------------------------------------------------


def perfect_partition_count(n: int, budget: int = DEFAULT_BUDGET) -> int:
    """Number of perfect partitions of ``n - 1``.

    Partitions are built with part sizes in increasing order while tracking
    how many sub-multisets reach each total (capped at 2).  Two observations
    prune without assuming anything about the answer: a total with two
    representations keeps them forever, and once every part below ``w`` is
    fixed the totals below ``w`` can no longer change.
    """
    if n < 2:
        raise ValueError("perfect partitions are counted for n >= 2")
    target = n - 1
    nodes = 0
    found = 0

    def add_copies(reps: list[int], w: int, b: int) -> list[int]:
        out = list(reps)
        for m in range(target + 1):
            s = reps[m]
            for j in range(1, b + 1):
                if m - j * w < 0:
                    break
                s += reps[m - j * w]
            out[m] = min(s, 2)
        return out

    def search(reps: list[int], remaining: int, smallest_next: int) -> None:
        nonlocal nodes, found
        nodes += 1
        if nodes > budget:
            raise BudgetExceeded(f"perfect_partition_count({n}) exceeded {budget} nodes")
        if remaining == 0:
            if all(r == 1 for r in reps):
                found += 1
            return
        # the first total nobody reaches must be covered by the next part
        gap = next((m for m in range(1, target + 1) if reps[m] == 0), target + 1)
        for w in range(smallest_next, min(remaining, gap) + 1):
            for b in range(1, remaining // w + 1):
                nxt = add_copies(reps, w, b)
                if 2 in nxt:
                    break
                if any(nxt[m] != 1 for m in range(1, min(w, target) + 1)):
                    continue
                search(nxt, remaining - w * b, w + 1)

    reps = [1] + [0] * target
    search(reps, target, 1)
    return found


def is_perfect_partition(parts: list[int] | tuple[int, ...]) -> bool:
    """Direct check: every 0 < m <= sum(parts) has exactly one sub-multiset."""
    total = sum(parts)
    counts: dict[int, int] = {}
    for p in parts:
        counts[p] = counts.get(p, 0) + 1
    reps = [1] + [0] * total
    for w, c in counts.items():
        new = [0] * (total + 1)
        for m in range(total + 1):
            new[m] = sum(reps[m - j * w] for j in range(c + 1) if m - j * w >= 0)
        reps = new
    return all(r == 1 for r in reps[1:])
