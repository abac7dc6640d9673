"""Dense tables of m(n) and the sums built on them."""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass

import numpy as np

from .arith import PrimeSieve
from .counting import BudgetExceeded, DEFAULT_BUDGET

INT64_MAX = np.iinfo(np.int64).max


class TableOverflow(OverflowError):
    """An m-value no longer fits in a 64-bit table entry."""


@dataclass(frozen=True, eq=False)
class MTable:
    """``values[n] = m(n)`` for ``1 <= n <= limit`` with m(1) = 1; ``values[0] = 0``."""

    limit: int
    values: np.ndarray

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.limit:
            raise IndexError(f"n = {n} outside table 1..{self.limit}")
        return int(self.values[n])

    @property
    def prefix(self) -> np.ndarray:
        """Cumulative sums, ``prefix[x] = M(x)``."""
        cached = self.__dict__.get("_prefix")
        if cached is None:
            total = int(self.values.sum(dtype=object)) if self.limit > 10**7 else None
            if total is not None and total > INT64_MAX:
                raise TableOverflow("M(limit) does not fit in 64 bits")
            cached = np.cumsum(self.values, dtype=np.int64)
            cached.setflags(write=False)
            object.__setattr__(self, "_prefix", cached)
        return cached


def build_m_table(limit: int) -> MTable:
    """Forward divisor sieve: push m(d) onto every proper multiple of d.

    Entries only grow, so the running total of everything pushed bounds
    every entry.  While that bound fits in int64 no check is needed; past it
    each push is checked against the headroom of its target slice.
    """
    if limit < 1:
        raise ValueError("limit must be >= 1")
    vals = np.zeros(limit + 1, dtype=np.int64)
    vals[1] = 1
    pushed = 0
    for d in range(1, limit // 2 + 1):
        md = int(vals[d])
        pushed += md
        block = vals[2 * d :: d]
        if pushed > INT64_MAX:
            headroom = INT64_MAX - md
            bad = np.nonzero(block > headroom)[0]
            if bad.size:
                raise TableOverflow(f"m({(int(bad[0]) + 2) * d}) overflows a 64-bit entry")
        block += md
    vals.setflags(write=False)
    return MTable(limit, vals)


def _check_x(table: MTable, x: int) -> None:
    if not 0 <= x <= table.limit:
        raise IndexError(f"x = {x} outside table range 0..{table.limit}")


def summatory_M(table: MTable, x: int) -> int:
    _check_x(table, x)
    return int(table.prefix[x])


def kalmar_ratio(table: MTable, x: int, rho) -> float:
    """M(x) / x^rho."""
    return summatory_M(table, x) / math.exp(float(rho) * math.log(x))


def smooth_mask(sieve: PrimeSieve, k: int, limit: int) -> np.ndarray:
    """Boolean array: n is p_k-smooth (1 included, 0 excluded)."""
    if sieve.limit < limit:
        raise IndexError(f"sieve limit {sieve.limit} below table limit {limit}")
    lpf = sieve.largest_prime_factor[: limit + 1]
    if k > len(sieve.primes):
        mask = np.ones(limit + 1, dtype=bool)
    else:
        mask = lpf <= sieve.nth_prime(k)
    mask = mask.copy()
    mask[0] = False
    return mask


def summatory_Mk(table: MTable, sieve: PrimeSieve, x: int, k: int) -> int:
    """Sum of m(n) over p_k-smooth n <= x."""
    _check_x(table, x)
    if k < 1:
        raise ValueError("k must be >= 1")
    mask = smooth_mask(sieve, k, x)
    return int(table.values[: x + 1][mask].sum(dtype=np.int64))


# -- smooth numbers ------------------------------------------------------------


@dataclass(frozen=True)
class SmoothCountResult:
    x: int
    y: int
    count: int


class SmoothCounter:
    """Psi(x, y) by ``Psi(x, p_j) = Psi(x, p_{j-1}) + Psi(x / p_j, p_j)``.

    Unrolled over j this reads ``Psi(x, p_j) = 1 + sum_{l <= j} Psi(x/p_l, p_l)``.
    Once ``p_l^2 > x`` the inner term is just ``floor(x/p_l)``; those terms
    are summed in blocks of equal quotient.  Results are memoized on
    ``(x, j)`` and the memo survives between calls.
    """

    def __init__(self, sieve: PrimeSieve, budget: int = DEFAULT_BUDGET):
        self.sieve = sieve
        self.primes = [int(p) for p in sieve.primes]
        self.budget = budget
        self.memo: dict[tuple[int, int], int] = {}
        self.calls = 0

    def _pi(self, v: int) -> int:
        return bisect.bisect_right(self.primes, v)

    def count(self, x: int, j: int) -> int:
        """Number of n <= x whose prime factors are among the first j primes."""
        if x < 1:
            return 0
        if j == 0 or x < 2:
            return 1
        if j == 1:
            return x.bit_length()
        j = min(j, self._pi(x))
        if j == 0:
            return 1
        key = (x, j)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        self.calls += 1
        if self.calls > self.budget:
            raise BudgetExceeded(f"Psi recursion exceeded {self.budget} calls")
        small = min(j, self._pi(math.isqrt(x)))
        total = 1
        for l in range(small):
            p = self.primes[l]
            total += self.count(x // p, l + 1)
        # primes p_l with p_l^2 > x: every n <= x/p_l is p_l-smooth
        l = small
        while l < j:
            q = x // self.primes[l]
            # last prime with the same quotient q
            hi = min(j, self._pi(x // q))
            total += q * (hi - l)
            l = hi
        self.memo[key] = total
        return total

    def psi(self, x: int, y: int) -> SmoothCountResult:
        if x < 1 or y < 2:
            raise ValueError(f"need x >= 1 and y >= 2, got x={x}, y={y}")
        reach = min(x, y)
        if reach > self.sieve.limit:
            raise IndexError(f"primes up to {reach} needed; sieve stops at {self.sieve.limit}")
        return SmoothCountResult(x, y, self.count(x, self._pi(reach)))


def psi(x: int, y: int, sieve: PrimeSieve, budget: int = DEFAULT_BUDGET) -> SmoothCountResult:
    return SmoothCounter(sieve, budget).psi(x, y)


def psi_enumerate(x: int, y: int, sieve: PrimeSieve) -> int:
    """Direct count of y-smooth n <= x from the largest-prime-factor table."""
    lpf = sieve.largest_prime_factor[1 : x + 1]
    return int(np.count_nonzero(lpf <= y))


# -- progressions and champions --------------------------------------------------


def progression_sum(table: MTable, x: int, K: int, A: int, require_coprime: bool = True) -> int:
    """Sum of m(n) over n <= x with n = A (mod K)."""
    _check_x(table, x)
    if K < 2:
        raise ValueError("modulus K must be >= 2")
    if require_coprime and math.gcd(A, K) != 1:
        raise ValueError(f"gcd({A}, {K}) != 1")
    start = A % K
    if start == 0:
        start = K
    return int(table.values[start : x + 1 : K].sum(dtype=np.int64))


def euler_phi(K: int) -> int:
    return sum(1 for a in range(1, K + 1) if math.gcd(a, K) == 1)


def progression_ratio(table: MTable, x: int, K: int, A: int) -> float:
    """phi(K) * (progression sum) / M(x); tends to 1."""
    return euler_phi(K) * progression_sum(table, x, K, A) / summatory_M(table, x)


@dataclass(frozen=True)
class Champion:
    n: int
    m: int
    ratio: float  # m(n) / n^rho
    margin: float  # log(n^rho / m(n)) / (log n / log log n)^(1/rho), at n
    margin_n: int  # n <= x with the smallest margin
    margin_min: float
    k: int | None = None
    witness: float | None = None  # Psi(x, p_k) max m / (x^rho_k / 5), k given


def champion_search(table: MTable, sieve: PrimeSieve, x: int, rho, k: int | None = None,
                    rho_k=None) -> Champion:
    """argmax of m(n)/n^rho over 3 <= n <= x (p_k-smooth only when k given).

    The margin statistic is reported at the argmax and minimized separately;
    the smaller it stays as x grows, the closer m gets to n^rho.  ``rho_k``
    (an upper bound for rho_k) enables the pigeonhole witness
    ``Psi(x, p_k) max m(n) / (x^rho_k / 5)``, max over smooth n <= x, which
    is at least 1 whenever ``M_k(x) > x^rho_k / 5``.
    """
    _check_x(table, x)
    if x < 3:
        raise ValueError("champion search needs x >= 3")
    rho = float(rho)
    n = np.arange(3, x + 1)
    log_n = np.log(n)
    vals = table.values[3 : x + 1]
    score = np.log(vals.astype(np.float64)) - rho * log_n
    margins = -score / (log_n / np.log(log_n)) ** (1 / rho)
    if k is not None:
        mask = smooth_mask(sieve, k, x)[3:]
        score = np.where(mask, score, -np.inf)
        margins = np.where(mask, margins, np.inf)
    i = int(np.argmax(score))
    j = int(np.argmin(margins))
    best = int(n[i])
    mv = int(vals[i])
    witness = None
    if k is not None and rho_k is not None:
        count = psi(x, sieve.nth_prime(k), sieve).count if k <= len(sieve.primes) else x
        top = int(vals[mask].max())
        witness = math.exp(math.log(count * top) - float(rho_k) * math.log(x) + math.log(5))
    return Champion(best, mv, math.exp(score[i]), float(margins[i]), int(n[j]),
                    float(margins[j]), k, witness)
