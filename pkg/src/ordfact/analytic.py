"""Real zeta values, the roots of zeta_k(s) = 2, and derived constants.

All arithmetic runs in a private mpmath context at 50 significant digits.
Every returned quantity is a :class:`RealEnclosure` whose error bound covers
both truncation (computed, never assumed) and rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from mpmath.ctx_mp import MPContext

from .arith import PrimeSieve, build_sieve

_mp = MPContext()
_mp.dps = 50
mpf = _mp.mpf
# one unit of working precision, with headroom
_EPS = mpf(10) ** (-(_mp.dps - 2))

INFINITY = math.inf
K = Union[int, float]

POLE_MARGIN = 0.05


class PoleProximityError(ValueError):
    """Argument too close to the pole of zeta at s = 1."""


class SolverError(RuntimeError):
    """Root solve did not converge or could not be certified."""


class PrecisionError(ArithmeticError):
    """An enclosure is too wide to decide the question asked of it."""


class CoverageError(ValueError):
    """The sieve does not reach far enough for the requested sum."""


@dataclass(frozen=True)
class RealEnclosure:
    value: object  # mpf
    err: object  # mpf, >= 0

    @property
    def lo(self):
        return self.value - self.err

    @property
    def hi(self):
        return self.value + self.err

    def contains(self, x) -> bool:
        return self.lo <= mpf(x) <= self.hi

    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        return f"{_mp.nstr(self.value, 20)} +/- {_mp.nstr(self.err, 3)}"


def _as_mpf(x):
    return x if isinstance(x, type(mpf(0))) else mpf(str(x) if isinstance(x, float) else x)


def _check_pole(s) -> None:
    if s <= 1 + POLE_MARGIN:
        raise PoleProximityError(f"s = {_mp.nstr(s, 10)} is within {POLE_MARGIN} of the pole")


def _rising(s, m: int):
    out = mpf(1)
    for i in range(m):
        out *= s + i
    return out


def _euler_maclaurin(s, precision, log_weight: bool) -> RealEnclosure:
    """Sum of ``n^-s`` (or ``log(n) n^-s``) over n >= 1.

    The correction terms stop at index p-1 and the remainder is bounded by
    ``|B_2p|/(2p)! * integral_N^inf |f^(2p)|``, which for these monotone
    integrands has the closed forms used below.
    """
    s = _as_mpf(s)
    _check_pole(s)
    precision = mpf(precision)
    n_cut = 16
    while True:
        N = mpf(n_cut)
        logN = _mp.log(N)
        if log_weight:
            head = _mp.fsum(_mp.log(n) * mpf(n) ** (-s) for n in range(2, n_cut))
            integral = N ** (1 - s) * (logN / (s - 1) + 1 / (s - 1) ** 2)
            f_N = logN * N ** (-s)
        else:
            head = _mp.fsum(mpf(n) ** (-s) for n in range(1, n_cut))
            integral = N ** (1 - s) / (s - 1)
            f_N = N ** (-s)
        total = head + integral + f_N / 2
        bound = None
        for p in range(1, 200):
            b2p = abs(_mp.bernoulli(2 * p)) / _mp.factorial(2 * p)
            a = s + 2 * p
            if log_weight:
                harm = _mp.fsum(1 / (s + i) for i in range(2 * p))
                tail_int = _rising(s, 2 * p) * N ** (1 - a) * (
                    logN / (a - 1) + 1 / (a - 1) ** 2 + harm / (a - 1)
                )
            else:
                tail_int = _rising(s, 2 * p) * N ** (1 - a) / (a - 1)
            candidate = b2p * tail_int
            if candidate <= precision / 2:
                bound = candidate
                break
            if bound is not None and candidate > bound:
                break
            bound = candidate
            # add correction term p (uses f^(2p-1)(N))
            m = 2 * p - 1
            if log_weight:
                rising = _rising(s, m)
                harm_m = _mp.fsum(1 / (s + i) for i in range(m))
                deriv = -(N ** (-s - m)) * (rising * logN - rising * harm_m)
            else:
                deriv = -_rising(s, m) * N ** (-s - m)
            total -= _mp.bernoulli(2 * p) / _mp.factorial(2 * p) * deriv
        if bound is not None and bound <= precision / 2:
            err = bound + abs(total) * _EPS * n_cut
            return RealEnclosure(total, err)
        n_cut *= 2
        if n_cut > 1 << 16:
            raise PrecisionError(f"cannot reach precision {precision}")


def zeta_real(s, precision=1e-40) -> RealEnclosure:
    """zeta(s) for real s > 1.05."""
    return _euler_maclaurin(s, precision, log_weight=False)


def zeta_prime_real(s, precision=1e-40) -> RealEnclosure:
    """zeta'(s) for real s > 1.05."""
    e = _euler_maclaurin(s, precision, log_weight=True)
    return RealEnclosure(-e.value, e.err)


def first_primes(k: int, sieve: PrimeSieve | None = None) -> np.ndarray:
    """The first ``k`` primes, sieving further if needed."""
    if sieve is not None and len(sieve.primes) >= k:
        return sieve.primes[:k]
    # p_k < k (log k + log log k) for k >= 6
    bound = 20 if k < 6 else int(k * (math.log(k) + math.log(math.log(k)))) + 10
    return build_sieve(bound).primes[:k]


def _euler_product(s, primes):
    """Return (zeta_k(s), -zeta_k'(s)/zeta_k(s)) at working precision."""
    prod = mpf(1)
    logsum = mpf(0)
    for p in primes:
        lp = _mp.log(int(p))
        t = _mp.exp(-s * lp)
        prod /= 1 - t
        logsum += lp * t / (1 - t)
    return prod, logsum


def _product_err(value, k: int):
    return abs(value) * _EPS * (4 * k + 10)


def zeta_k_real(s, k: int, sieve: PrimeSieve | None = None) -> RealEnclosure:
    """Euler product over the first ``k`` primes, real s > 0."""
    s = _as_mpf(s)
    if k < 1:
        raise ValueError("k must be >= 1")
    if s <= 0:
        raise ValueError("the finite product needs s > 0")
    value, _ = _euler_product(s, first_primes(k, sieve))
    return RealEnclosure(value, _product_err(value, k))


def zeta_k_prime_real(s, k: int, sieve: PrimeSieve | None = None) -> RealEnclosure:
    s = _as_mpf(s)
    if k < 1:
        raise ValueError("k must be >= 1")
    if s <= 0:
        raise ValueError("the finite product needs s > 0")
    value, logsum = _euler_product(s, first_primes(k, sieve))
    d = -value * logsum
    return RealEnclosure(d, _product_err(d, 2 * k))


def log_derivative_prime_sum(s, k: int, sieve: PrimeSieve | None = None):
    """``sum_{p <= p_k} log p / (p^s - 1)``, i.e. ``-zeta_k'/zeta_k`` at s."""
    _, logsum = _euler_product(_as_mpf(s), first_primes(k, sieve))
    return logsum


# -- root solving --------------------------------------------------------------


@dataclass(frozen=True)
class RhoResult:
    k: K
    rho: RealEnclosure
    residual: object
    iterations: int


def _is_infinite(k) -> bool:
    return k is None or k == INFINITY


def _make_f(k, sieve):
    """Return g(s) -> (zeta_k(s) - 2 enclosure, derivative value)."""
    if _is_infinite(k):
        def g(s, precision=mpf(10) ** -45):
            z = zeta_real(s, precision)
            zp = zeta_prime_real(s, precision)
            return RealEnclosure(z.value - 2, z.err), zp.value
        return g
    primes = first_primes(int(k), sieve)

    def g(s, precision=None):
        value, logsum = _euler_product(s, primes)
        return RealEnclosure(value - 2, _product_err(value, len(primes))), -value * logsum
    return g


def _float_start(k, sieve) -> float:
    """Double-precision bisection, used only to seed Newton."""
    if _is_infinite(k):
        return 1.7286
    logp = np.log(first_primes(int(k), sieve).astype(np.float64))
    lo, hi = 1.0, 2.0
    for _ in range(52):
        mid = 0.5 * (lo + hi)
        if -np.log1p(-np.exp(-mid * logp)).sum() > math.log(2):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _certify(g, x, tol):
    """Enclose the root by a verified sign change around ``x``."""
    delta = mpf(tol) / 2
    left, _ = g(x - delta)
    right, _ = g(x + delta)
    if not (left.lo > 0 and right.hi < 0):
        raise SolverError(f"no certified sign change within {_mp.nstr(delta, 3)} of {x}")
    return RealEnclosure(x, delta)


def solve_rho(k=INFINITY, tol: float = 1e-14, sieve: PrimeSieve | None = None,
              method: str = "newton", max_iter: int = 200) -> RhoResult:
    """Real solution of zeta_k(s) = 2 in [1, 2] (k = INFINITY for zeta).

    Newton is seeded by bisection; ``method="bisection"`` keeps bisecting to
    the tolerance instead, which gives an independent path for comparison.
    """
    if tol < 1e-14:
        raise ValueError("tol must be >= 1e-14")
    if not _is_infinite(k):
        if int(k) != k or k < 1:
            raise ValueError(f"k must be a positive integer or INFINITY, got {k}")
        k = int(k)
        if k == 1:
            # 1/(1 - 2^-s) = 2 exactly at s = 1
            return RhoResult(1, RealEnclosure(mpf(1), mpf(0)), mpf(0), 0)
    g = _make_f(k, sieve)
    tol_m = mpf(tol)
    iterations = 0
    if method == "bisection":
        lo, hi = mpf(1) if not _is_infinite(k) else mpf(1) + POLE_MARGIN * 2, mpf(2)
        while hi - lo > tol_m / 4:
            iterations += 1
            if iterations > max_iter:
                raise SolverError("bisection iteration cap reached")
            mid = (lo + hi) / 2
            val, _ = g(mid)
            if val.value > 0:
                lo = mid
            else:
                hi = mid
        x = (lo + hi) / 2
    elif method == "newton":
        x = mpf(_float_start(k, sieve))
        while True:
            iterations += 1
            if iterations > max_iter:
                raise SolverError("Newton iteration cap reached")
            val, deriv = g(x)
            step = val.value / deriv
            x -= step
            if not (1 <= x <= 2):
                raise SolverError(f"Newton left the bracket [1, 2] at {x}")
            if abs(step) < tol_m * mpf(10) ** -6:
                break
    else:
        raise ValueError(f"unknown method {method!r}")
    enclosure = _certify(g, x, tol)
    val, _ = g(x)
    residual = abs(val.value)
    if residual > tol_m:
        raise SolverError(f"residual {residual} exceeds tol {tol}")
    return RhoResult(k, enclosure, residual, iterations)


# -- constants -----------------------------------------------------------------


@dataclass(frozen=True)
class ConstantsBundle:
    rho: RealEnclosure
    zeta_prime_at_rho: RealEnclosure
    kalmar_c: RealEnclosure
    lower_bound_c: RealEnclosure


def _span(values) -> RealEnclosure:
    lo, hi = min(values), max(values)
    mid = (lo + hi) / 2
    return RealEnclosure(mid, (hi - lo) / 2 + abs(mid) * _EPS * 100)


def _zeta_prime_over(rho: RealEnclosure, precision) -> RealEnclosure:
    # zeta' is increasing on (1, inf), so the endpoints bound it
    a = zeta_prime_real(rho.lo, precision)
    b = zeta_prime_real(rho.hi, precision)
    return _span([a.lo, b.hi])


def constants(tol: float = 1e-14) -> ConstantsBundle:
    """rho, zeta'(rho), Kalmar's c = -1/(rho zeta'(rho)) and the constant
    (rho^(rho+1) / ((rho-1)|zeta'(rho)|))^(1/rho).

    Derived quantities are evaluated at the corners of the input boxes.
    """
    res = solve_rho(INFINITY, tol)
    rho = res.rho
    zp = _zeta_prime_over(rho, mpf(tol) / 100)
    corners = [(r, z) for r in (rho.lo, rho.hi) for z in (zp.lo, zp.hi)]
    kalmar = _span([-1 / (r * z) for r, z in corners])
    lower = _span([(r ** (r + 1) / ((r - 1) * abs(z))) ** (1 / r) for r, z in corners])
    return ConstantsBundle(rho, zp, kalmar, lower)


def c_k(k: int, tol: float = 1e-14, sieve: PrimeSieve | None = None) -> RealEnclosure:
    """-1 / (rho_k zeta_k'(rho_k)), the leading coefficient of M_k(x)."""
    res = solve_rho(k, tol, sieve)
    r = res.rho
    # zeta_k' is increasing in s as well
    a = zeta_k_prime_real(r.lo, k, sieve)
    b = zeta_k_prime_real(r.hi, k, sieve)
    corners = [(x, z) for x in (r.lo, r.hi) for z in (a.lo, b.hi)]
    return _span([-1 / (x * z) for x, z in corners])


def lemma3_ratio(k: int, tol: float = 1e-13, sieve: PrimeSieve | None = None,
                 rho: RhoResult | None = None, zeta_prime: RealEnclosure | None = None
                 ) -> RealEnclosure:
    """R(k) = (rho - rho_k)(rho - 1)|zeta'(rho)| k^(rho-1) (log k)^rho."""
    if k < 2:
        raise ValueError("k must be >= 2")
    if rho is None:
        rho = solve_rho(INFINITY, tol)
    if zeta_prime is None:
        zeta_prime = _zeta_prime_over(rho.rho, mpf(tol) / 100)
    rk = solve_rho(k, tol, sieve)
    diff = rho.rho.value - rk.rho.value
    diff_err = rho.rho.err + rk.rho.err
    if diff_err >= abs(diff):
        raise PrecisionError(f"rho - rho_{k} not resolved at tol {tol}; lower tol")
    r = rho.rho.value
    scale = (r - 1) * abs(zeta_prime.value) * mpf(k) ** (r - 1) * _mp.log(k) ** r
    value = diff * scale
    # relative error of the difference dominates; the rest is a few ulps plus
    # the sensitivity of scale to rho and zeta'
    rel = diff_err / abs(diff) + zeta_prime.err / abs(zeta_prime.value) \
        + rho.rho.err * (1 / (r - 1) + _mp.log(k) + _mp.log(_mp.log(k))) + _EPS * 100
    return RealEnclosure(value, abs(value) * rel)


@dataclass(frozen=True)
class TailSum:
    t: float
    delta: float
    total: RealEnclosure
    main_term: float
    ratio: float


# Rosser-Schoenfeld: pi(x) < 1.25506 x / log x for x > 1
_PI_UPPER = 1.25506


def prime_tail_sum(t: float, delta: float, sieve: PrimeSieve) -> TailSum:
    """``sum_{p > t} p^-delta`` from the sieve plus a bound on the rest.

    Beyond the sieve limit L the remainder is at most
    ``1.25506 * delta * L^(1-delta) / ((delta-1) log L)`` (partial summation
    against an explicit upper bound for pi(x)).
    """
    if t <= 2:
        raise ValueError("t must exceed 2")
    if delta <= 1.05:
        raise ValueError("delta must exceed 1.05")
    L = sieve.limit
    if L < 10 * t:
        raise CoverageError(f"sieve limit {L} too small for t = {t} (need >= {10 * t})")
    ps = sieve.primes[sieve.primes > t].astype(np.float64)
    head = math.fsum(np.exp(-delta * np.log(ps)).tolist())
    tail = _PI_UPPER * delta * L ** (1 - delta) / ((delta - 1) * math.log(L))
    rounding = head * 1e-13
    total = RealEnclosure(mpf(head + tail / 2), mpf(tail / 2 + rounding))
    main = 1 / ((delta - 1) * t ** (delta - 1) * math.log(t))
    return TailSum(t, delta, total, main, float(total.value) / main)


def nstr(x, digits: int = 20) -> str:
    return _mp.nstr(x, digits)


def to_mpf(x):
    return _as_mpf(x)
