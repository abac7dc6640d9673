"""Acceptance criteria, one test each, each printing a PASS/FAIL line.

Run standalone with ``python tests/test_acceptance.py`` or under pytest
(``pytest tests/test_acceptance.py -v``; the lines show up in the output).
"""

import subprocess
import sys
import time

import numpy as np
import pytest

from ordfact import verify
from ordfact.analytic import constants, solve_rho
from ordfact.arith import build_sieve, factorize, signature_of
from ordfact.counting import MemoCache, m_oracle, m_signature, perfect_partition_count
from ordfact.summatory import SmoothCounter, build_m_table, kalmar_ratio, psi

FIRST_25 = (1, 1, 1, 2, 1, 3, 1, 4, 2, 3, 1, 8, 1, 3, 3, 8, 1, 8, 1, 8, 3, 3, 1, 20, 2)
KALMAR_C = 0.31817

_CTX = None


def big_ctx():
    global _CTX
    if _CTX is None:
        _CTX = verify.VerifyContext(10**6, seed=1)
    return _CTX


def report(number, title, ok, elapsed, limit, detail=""):
    in_time = elapsed < limit
    status = "PASS" if ok and in_time else "FAIL"
    timing = f"{elapsed:.1f}s/{limit:g}s" + ("" if in_time else " OVER")
    line = f"[{status}] criterion {number:2d} {title}: {detail} ({timing})"
    print(line, flush=True)
    return ok and in_time, line


def check(number, title, limit, body):
    t = time.perf_counter()
    ok, detail = body()
    return report(number, title, ok, time.perf_counter() - t, limit, detail)


def c1():
    table = build_m_table(25)
    got = tuple(int(v) for v in table.values[1:26])
    return got == FIRST_25, f"m(1..25) = {got[:8]}..."


def c2():
    rep = verify.suite_equivalence(10**4, verify.VerifyContext(10**4), sig_omega=15)
    e = rep.extremal
    return rep.passed, f"{rep.cases} cases, {rep.failure_count} disagreements; {e}"


def c3():
    sieve = build_sieve(2000)
    cache = MemoCache()
    bad = [n for n in range(1, 2001)
           if m_oracle(n) != m_signature(signature_of(factorize(n, sieve)), cache)]
    return not bad, f"n <= 2000, mismatches {bad[:5]}"


def c4():
    c = constants()
    values = {
        "rho": (float(c.rho), 1.72864),
        "rho_2": (float(solve_rho(2).rho), 1.43527),
        "rho_3": (float(solve_rho(3).rho), 1.56603),
        "c": (float(c.kalmar_c), 0.31817),
        "lower": (float(c.lower_bound_c), 2.01630),
    }
    # printed values are truncated; agreement to 5 places means |v - printed| < 1e-5
    ok = all(0 <= v - p < 1e-5 for v, p in values.values())
    return ok, ", ".join(f"{k}={v:.10f}" for k, (v, _) in values.items())


def c5():
    rep = verify.suite_lemma3(10**5, verify.VerifyContext(100))
    r = rep.extremal["R"]
    in_band = all(0.5 <= v <= 2 for v in r.values())
    devs = [abs(r[k] - 1) for k in sorted(r, key=int)]
    decreasing = all(b < a for a, b in zip(devs, devs[1:]))
    detail = (f"R = {[round(v, 4) for v in r.values()]}, in [0.5,2]: {in_band}, "
              f"|R-1| decreasing: {decreasing}")
    return in_band and decreasing and rep.passed, detail


def c6():
    ctx = big_ctx()
    rep = verify.suite_inequalities(10**6, ctx)
    par = verify.suite_parity(10**6, ctx)
    e = rep.extremal
    detail = (f"{rep.failure_count + par.failure_count} failures; "
              f"max sqrt2 m/n^rho = {e['max_sqrt2_m_over_n_rho']:.4f} "
              f"at n={e['argmax_sqrt2_m_over_n_rho']}")
    return rep.passed and par.passed, detail


def c7():
    ctx = big_ctx()
    rep = verify.suite_fixed_points(13, ctx)
    vals = ctx.table.values
    n = np.arange(len(vals))
    least = int(n[2:][vals[2:] == n[2:]][0])
    return rep.passed and least == 48, f"q in 3..13 ok: {rep.passed}, least fixed point {least}"


def c8():
    bad = [n for n in range(2, 61) if perfect_partition_count(n) != m_oracle(n)]
    at12 = perfect_partition_count(12)
    return not bad and at12 == 8, f"2..60 mismatches {bad}, count at 12 = {at12}"


def c9():
    ctx = big_ctx()
    rho = ctx.rho.rho.value
    ratios = [kalmar_ratio(ctx.table, x, rho) for x in (10**4, 10**5, 10**6)]
    in_band = all(0.15 <= r <= 0.65 for r in ratios)
    dist = [abs(r - KALMAR_C) for r in ratios]
    trend = all(b <= a for a, b in zip(dist, dist[1:]))
    detail = (f"M/x^rho = {[round(r, 5) for r in ratios]}, distances "
              f"{[round(d, 5) for d in dist]}, band: {in_band}, non-increasing: {trend}")
    return in_band and trend, detail


def c10():
    rep = verify.suite_corollary([10**3, 10**4, 10**5, 10**6], range(2, 11), big_ctx())
    return rep.passed, (f"{rep.cases} (k, x) pairs, {rep.failure_count} failures, "
                        f"min ratio {rep.extremal['min_Mk_over_bound']:.3f}")


def c11():
    rep = verify.suite_census(10**5, big_ctx())
    e = rep.extremal
    ok = (rep.passed
          and e["distinct_values_n_le_X"] < min(e["r_p_r_n"], e["exp_bound"])
          and e["distinct_values_m_le_X"] < min(e["r_p_r_m"], e["exp_bound"]))
    return ok, (f"{e['distinct_values_n_le_X']} < {e['r_p_r_n']}, "
                f"{e['distinct_values_m_le_X']} < {e['r_p_r_m']}, bound {e['exp_bound']:.4g}")


def c12():
    X = 10**4
    sieve = build_sieve(X)
    counter = SmoothCounter(sieve)
    lpf = sieve.largest_prime_factor[: X + 1]
    bad = []
    for y in range(2, 101):
        enum = np.cumsum(lpf[1:] <= y)  # enum[x - 1] = Psi(x, y)
        for x in range(1, X + 1):
            if counter.psi(x, y).count != int(enum[x - 1]):
                bad.append((x, y))
    small = psi(100, 5, sieve).count
    return not bad and small == 34, f"{99 * X} pairs, mismatches {bad[:3]}, Psi(100,5) = {small}"


def c13():
    cmd = [sys.executable, "-m", "ordfact", "verify", "all", "--seed", "1"]
    a = subprocess.run(cmd, capture_output=True).stdout
    b = subprocess.run(cmd, capture_output=True).stdout
    return a == b and len(a) > 0, f"{len(a)} bytes, identical: {a == b}"


CRITERIA = [
    (1, "sequence reproduction", 1, c1),
    (2, "algorithm equivalence", 300, c2),
    (3, "oracle equality", 120, c3),
    (4, "constants", 30, c4),
    (5, "rate ratio R(k)", 120, c5),
    (6, "inequality suite", 600, c6),
    (7, "fixed points", 10, c7),
    (8, "perfect partitions", 120, c8),
    (9, "Kalmar trend", 300, c9),
    (10, "smooth summatory bound", 300, c10),
    (11, "census", 120, c11),
    (12, "Psi cross-validation", 60, c12),
    (13, "determinism", 600, c13),
]


@pytest.mark.parametrize("number, title, limit, body", CRITERIA,
                         ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(number, title, limit, body, capsys):
    with capsys.disabled():
        print()
        ok, line = check(number, title, limit, body)
    assert ok, line


if __name__ == "__main__":
    results = [check(*c) for c in CRITERIA]
    print(f"{sum(ok for ok, _ in results)}/{len(results)} criteria pass")
    sys.exit(0 if all(ok for ok, _ in results) else 1)
