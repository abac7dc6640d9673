"""Primes, factorization and exact combinatorics.

Everything downstream keys on the *exponent signature* of an integer: the
prime exponents sorted non-increasingly, with the primes themselves thrown
away.  ``m(n)`` depends on nothing else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Signature",
    "PrimeSieve",
    "Factorization",
    "build_sieve",
    "factorize",
    "signature_of",
    "make_signature",
    "signature_to_int",
    "binomial",
    "partition_count",
    "partitions",
]

Signature = tuple[int, ...]


class OutOfRange(ValueError):
    """Input lies beyond what a sieve covers."""


@dataclass(frozen=True, eq=False)
class PrimeSieve:
    """Smallest-prime-factor table for ``2 <= n <= limit``.

    ``spf[n]`` is the least prime dividing ``n`` (``spf[0] = spf[1] = 0``).
    The arrays are made read-only so a sieve can be shared between threads.
    """

    limit: int
    primes: np.ndarray
    spf: np.ndarray

    def __repr__(self) -> str:
        return f"PrimeSieve(limit={self.limit}, primes={len(self.primes)})"

    def nth_prime(self, k: int) -> int:
        """Return ``p_k`` (``p_1 = 2``)."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if k > len(self.primes):
            raise OutOfRange(f"p_{k} exceeds sieve limit {self.limit}")
        return int(self.primes[k - 1])

    def prime_count(self, x: int) -> int:
        """pi(x) for x <= limit."""
        if x > self.limit:
            raise OutOfRange(f"pi({x}) needs a sieve beyond {self.limit}")
        return int(np.searchsorted(self.primes, x, side="right"))

    def is_prime(self, n: int) -> bool:
        if n > self.limit:
            raise OutOfRange(f"{n} exceeds sieve limit {self.limit}")
        return n >= 2 and int(self.spf[n]) == n

    @property
    def largest_prime_factor(self) -> np.ndarray:
        """Array ``P`` with ``P[n]`` the largest prime factor (``P[1] = 1``)."""
        cached = self.__dict__.get("_lpf")
        if cached is None:
            lpf = np.zeros(self.limit + 1, dtype=np.int64)
            lpf[1] = 1
            for p in self.primes:
                lpf[p::p] = p
            lpf.setflags(write=False)
            object.__setattr__(self, "_lpf", lpf)
            cached = lpf
        return cached


def build_sieve(limit: int) -> PrimeSieve:
    if limit < 2:
        raise ValueError(f"sieve limit must be >= 2, got {limit}")
    limit = int(limit)
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, math.isqrt(limit) + 1):
        if spf[p] == 0:
            block = spf[p * p :: p]
            block[block == 0] = p
    rest = np.nonzero(spf == 0)[0]
    rest = rest[rest >= 2]
    spf[rest] = rest
    primes = np.nonzero(spf == np.arange(limit + 1))[0]
    primes = primes[primes >= 2].astype(np.int64)
    spf.setflags(write=False)
    primes.setflags(write=False)
    return PrimeSieve(limit, primes, spf)


@dataclass(frozen=True)
class Factorization:
    n: int
    parts: tuple[tuple[int, int], ...]

    @property
    def omega(self) -> int:
        return len(self.parts)

    @property
    def big_omega(self) -> int:
        return sum(e for _, e in self.parts)

    @property
    def largest_prime(self) -> int | None:
        return self.parts[-1][0] if self.parts else None

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.parts)

    def divisors(self) -> list[int]:
        divs = [1]
        for p, e in self.parts:
            divs = [d * p**i for d in divs for i in range(e + 1)]
        return sorted(divs)


def factorize(n: int, sieve: PrimeSieve) -> Factorization:
    if n < 1:
        raise ValueError(f"cannot factorize {n}")
    if n > sieve.limit:
        raise OutOfRange(f"{n} exceeds sieve limit {sieve.limit}")
    spf = sieve.spf
    parts: list[tuple[int, int]] = []
    r = int(n)
    while r > 1:
        p = int(spf[r])
        e = 0
        while r % p == 0:
            r //= p
            e += 1
        parts.append((p, e))
    return Factorization(int(n), tuple(parts))


def signature_of(f: Factorization) -> Signature:
    return tuple(sorted((e for _, e in f.parts), reverse=True))


def make_signature(exps: Iterable[int]) -> Signature:
    """Canonicalize an exponent vector: drop zeros, sort non-increasing."""
    exps = [int(a) for a in exps]
    if any(a < 0 for a in exps):
        raise ValueError(f"negative exponent in {exps}")
    return tuple(sorted((a for a in exps if a), reverse=True))


def signature_to_int(sig: Sequence[int]) -> int:
    """Smallest integer with the given signature (largest exponent on 2)."""
    sig = make_signature(sig)
    out = 1
    p = 1
    for a in sig:
        p = _next_prime(p)
        out *= p**a
    return out


def _next_prime(p: int) -> int:
    q = p + 1
    while any(q % d == 0 for d in range(2, math.isqrt(q) + 1)):
        q += 1
    return q


def binomial(n: int, k: int) -> int:
    return math.comb(n, k)


@lru_cache(maxsize=None)
def _partition_table(n: int) -> tuple[int, ...]:
    p = [1] + [0] * n
    for m in range(1, n + 1):
        total = 0
        j = 1
        while True:
            g1 = j * (3 * j - 1) // 2
            if g1 > m:
                break
            sign = 1 if j % 2 else -1
            total += sign * p[m - g1]
            g2 = j * (3 * j + 1) // 2
            if g2 <= m:
                total += sign * p[m - g2]
            j += 1
        p[m] = total
    return tuple(p)


def partition_count(n: int) -> int:
    """Number of partitions of ``n`` via Euler's pentagonal recurrence."""
    if n < 0:
        raise ValueError("n must be >= 0")
    # grow the cached table in powers of two so repeated calls stay cheap
    size = 1
    while size < n:
        size *= 2
    return _partition_table(size)[n]


def partitions(n: int, largest: int | None = None):
    """Yield the partitions of ``n`` as non-increasing tuples."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for a in range(min(n, largest), 0, -1):
        for rest in partitions(n - a, a):
            yield (a,) + rest
