import math

import mpmath
import pytest

from ordfact import analytic
from ordfact.analytic import (
    INFINITY,
    CoverageError,
    PoleProximityError,
    RealEnclosure,
    c_k,
    constants,
    lemma3_ratio,
    log_derivative_prime_sum,
    prime_tail_sum,
    solve_rho,
    zeta_k_real,
    zeta_prime_real,
    zeta_real,
)
from ordfact.arith import build_sieve

ORACLE = mpmath.MPContext()
ORACLE.dps = 60  # finer than the enclosures under test
ZETA_PRIME_2 = ORACLE.mpf("-0.937548254315843753702574094568")  # frozen mpmath value


@pytest.mark.parametrize("s", ["1.1", "1.5", "1.72864723899818", "2", "3.5", "10"])
def test_zeta_against_mpmath(s):
    z = zeta_real(s)
    zp = zeta_prime_real(s)
    assert z.contains(ORACLE.zeta(ORACLE.mpf(s)))
    assert zp.contains(ORACLE.zeta(ORACLE.mpf(s), derivative=1))
    assert z.err < 1e-38


def test_zeta_prime_at_two():
    assert abs(zeta_prime_real(2).value - ZETA_PRIME_2) < 1e-25


def test_pole_guard():
    with pytest.raises(PoleProximityError):
        zeta_real(1.01)


def test_euler_product_small_k():
    z = zeta_k_real(2, 2)
    assert abs(z.value - mpmath.mpf(4) / 3 * mpmath.mpf(9) / 8) < 1e-40


def test_rho_values():
    assert solve_rho(1).rho.value == 1
    r = solve_rho().rho
    assert abs(zeta_real(r.value).value - 2) < 1e-13
    assert round(float(r), 5) == 1.72865
    assert abs(float(solve_rho(2).rho) - 1.43527908) < 1e-8
    assert abs(float(solve_rho(3).rho) - 1.56603125) < 1e-8


@pytest.mark.parametrize("k", [2, 5, 40, INFINITY])
def test_newton_and_bisection_agree(k):
    a = solve_rho(k, 1e-14).rho
    b = solve_rho(k, 1e-14, method="bisection").rho
    assert abs(a.value - b.value) <= a.err + b.err


def test_rho_k_increasing():
    values = [solve_rho(k, 1e-13).rho for k in (1, 2, 3, 10, 100)]
    assert all(a.hi < b.lo for a, b in zip(values, values[1:]))
    assert values[-1].hi < solve_rho().rho.lo


def test_tol_floor():
    with pytest.raises(ValueError):
        solve_rho(INFINITY, 1e-16)


def test_constants():
    c = constants()
    assert abs(float(c.kalmar_c) - 0.3181736522) < 1e-9
    assert abs(float(c.lower_bound_c) - 2.01630455469) < 1e-9
    assert abs(float(c.zeta_prime_at_rho) + 1.81814874303754) < 1e-12
    # independent evaluation with mpmath's zeta
    rho = ORACLE.findroot(lambda s: ORACLE.zeta(s) - 2, 1.7)
    zp = ORACLE.zeta(rho, derivative=1)
    assert c.kalmar_c.contains(-1 / (rho * zp))
    assert c.lower_bound_c.contains((rho ** (rho + 1) / ((rho - 1) * abs(zp))) ** (1 / rho))


def test_prime_sum_identity():
    # -zeta'/zeta(rho) = sum log p / (p^rho - 1), and zeta(rho) = 2
    rho = solve_rho().rho.value
    full = -zeta_prime_real(rho).value / 2
    partial = log_derivative_prime_sum(rho, 20000)
    assert partial < full
    assert full - partial < 5e-3


def test_c_k_tends_to_c():
    c = float(constants().kalmar_c)
    gaps = [float(c_k(k)) - c for k in (2, 10, 100)]
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_lemma3_ratio_enclosure():
    r = lemma3_ratio(100)
    assert isinstance(r, RealEnclosure)
    assert 0.5 <= r.value <= 2
    assert r.err < 1e-8


def test_prime_tail_sum():
    sieve = build_sieve(10**6)
    res = prime_tail_sum(1000, 2.0, sieve)
    exact = ORACLE.primezeta(2) - sum(ORACLE.mpf(int(p)) ** -2 for p in sieve.primes if p <= 1000)
    assert res.total.contains(exact)
    assert 0.5 < res.ratio < 2
    with pytest.raises(CoverageError):
        prime_tail_sum(10**6, 2.0, sieve)
    with pytest.raises(ValueError):
        prime_tail_sum(100, 1.0, sieve)


def test_enclosure_str_and_float():
    e = RealEnclosure(analytic.mpf(1.5), analytic.mpf("1e-10"))
    assert float(e) == 1.5
    assert e.contains(1.5 + 5e-11) and not e.contains(1.5 + 2e-10)
    assert "1.5" in str(e)


@pytest.mark.parametrize("k", [100, 1000, 10000])
def test_prime_sum_rate(k):
    # |zeta'(rho)| = zeta(rho) * sum_p log p / (p^rho - 1) = 2 * (full prime sum)
    rho = solve_rho().rho.value
    gap = abs(zeta_prime_real(rho).value) - 2 * log_derivative_prime_sum(rho, k)
    assert 0 < gap < 1 / math.sqrt(k)
