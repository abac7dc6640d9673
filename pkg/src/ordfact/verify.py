"""Property suites: each checks a family of claims about m(n) over a range
and returns a :class:`VerifyReport`.

Strict real inequalities are decided on certified endpoints.  A float
comparison is accepted only when its gap dwarfs double rounding; anything
closer is re-decided at 50 digits.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import analytic
from .analytic import INFINITY, lemma3_ratio, solve_rho
from .arith import PrimeSieve, build_sieve, factorize, partition_count, partitions, signature_of
from .counting import (
    MemoCache,
    m_divrec,
    m_macmahon,
    m_moebius,
    m_oracle,
    m_signature,
    m_sklar,
    m_two_prime,
)
from .summatory import MTable, build_m_table, summatory_Mk

MAX_RECORDED_FAILURES = 1000
# float log comparisons closer than this are re-decided exactly
FLOAT_GAP = 1e-9
CENSUS_SLACK = 0.5


@dataclass
class VerifyReport:
    suite: str
    params: dict[str, Any]
    cases: int = 0
    failures: list[dict[str, Any]] = field(default_factory=list)
    extremal: dict[str, Any] = field(default_factory=dict)
    failure_count: int = 0

    @property
    def passed(self) -> bool:
        return self.failure_count == 0

    def fail(self, input, relation: str, observed) -> None:
        self.failure_count += 1
        if len(self.failures) < MAX_RECORDED_FAILURES:
            self.failures.append({"input": input, "relation": relation, "observed": observed})

    def to_dict(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "params": self.params,
            "cases": self.cases,
            "passed": self.passed,
            "failure_count": self.failure_count,
            "failures": self.failures,
            "extremal": self.extremal,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def to_text(self) -> str:
        status = "PASS" if self.passed else f"FAIL ({self.failure_count})"
        lines = [f"{self.suite}: {status}  cases={self.cases}  params={self.params}"]
        for key in sorted(self.extremal):
            lines.append(f"  {key}: {self.extremal[key]}")
        for f in self.failures[:10]:
            lines.append(f"  failure {f['input']}: {f['relation']} (observed {f['observed']})")
        return "\n".join(lines)


class VerifyContext:
    """Lazily built sieve, m-table and rho shared by the suites."""

    def __init__(self, limit: int, seed: int = 1, tol: float = 1e-13):
        self.limit = max(int(limit), 100)
        self.seed = seed
        self.tol = tol
        self._sieve: PrimeSieve | None = None
        self._table: MTable | None = None
        self._rho = None
        self._factor_arrays = None
        self.cache = MemoCache()

    @property
    def sieve(self) -> PrimeSieve:
        if self._sieve is None:
            self._sieve = build_sieve(self.limit)
        return self._sieve

    @property
    def table(self) -> MTable:
        if self._table is None:
            self._table = build_m_table(self.limit)
        return self._table

    @property
    def rho(self):
        if self._rho is None:
            self._rho = solve_rho(INFINITY, self.tol)
        return self._rho

    def rng(self) -> random.Random:
        return random.Random(self.seed)

    def factor_arrays(self):
        """(omega, Omega) for 0..limit."""
        if self._factor_arrays is None:
            self._factor_arrays = factor_arrays(self.sieve, self.limit)
        return self._factor_arrays

    def need(self, X: int) -> None:
        if X > self.limit:
            raise ValueError(f"X = {X} exceeds the context limit {self.limit}")


def factor_arrays(sieve: PrimeSieve, X: int) -> tuple[np.ndarray, np.ndarray]:
    spf = sieve.spf
    rest = np.arange(X + 1, dtype=np.int64)
    omega = np.zeros(X + 1, dtype=np.int64)
    big = np.zeros(X + 1, dtype=np.int64)
    last = np.zeros(X + 1, dtype=np.int64)
    active = rest > 1
    while active.any():
        p = np.where(active, spf[rest], 1)
        big += active
        omega += active & (p != last)
        last = np.where(active, p, last)
        rest = np.where(active, rest // p, rest)
        active = rest > 1
    return omega, big


def _below_power(m: int, n: int, exponent, factor: float = 1.0) -> bool:
    """Exact-enough test of ``factor * m < n^exponent`` at 50 digits."""
    mp = analytic._mp
    return mp.mpf(factor) * m < mp.mpf(n) ** exponent


# -- suites --------------------------------------------------------------------


def suite_equivalence(X: int, ctx: VerifyContext, sig_omega: int = 15,
                      n_cap: int = 10**4) -> VerifyReport:
    top = min(X, n_cap)
    ctx.need(top)
    report = VerifyReport("equivalence", {"X": X, "n_max": top, "signature_omega_max": sig_omega})
    table, sieve, cache = ctx.table, ctx.sieve, ctx.cache
    largest = (0, 0)
    for n in range(1, top + 1):
        sig = signature_of(factorize(n, sieve))
        values = {
            "oracle": m_oracle(n),
            "divrec": m_divrec(n, sieve),
            "signature": m_signature(sig, cache),
            "table": table[n],
        }
        if n >= 2:
            values["moebius"] = m_moebius(n, sieve)
            values["macmahon"] = m_macmahon(sig)
            values["sklar"] = m_sklar(sig)
            if len(sig) <= 2:
                values["two_prime"] = m_two_prime(sig[0], sig[1] if len(sig) == 2 else 0)
        report.cases += 1
        if len(set(values.values())) != 1:
            report.fail(n, "all algorithms equal", values)
        largest = max(largest, (values["oracle"], n))
    signatures = 0
    for omega in range(1, sig_omega + 1):
        for sig in partitions(omega):
            values = {
                "signature": m_signature(sig, cache),
                "macmahon": m_macmahon(sig),
                "sklar": m_sklar(sig),
            }
            if len(sig) <= 2:
                values["two_prime"] = m_two_prime(sig[0], sig[1] if len(sig) == 2 else 0)
            signatures += 1
            report.cases += 1
            if len(set(values.values())) != 1:
                report.fail(list(sig), "signature formulas equal", values)
    report.extremal.update({
        "signatures_checked": signatures,
        "max_m": largest[0],
        "argmax_m": largest[1],
    })
    return report


def suite_inequalities(X: int, ctx: VerifyContext, samples: int = 10**4) -> VerifyReport:
    """Upper bound n^rho/sqrt2, the lower bounds, drop-a-prime, parity,
    supermultiplicativity and the antichain product bound."""
    ctx.need(X)
    rho = ctx.rho.rho
    rho_lo = rho.lo
    report = VerifyReport("inequalities", {"X": X, "samples": samples, "seed": ctx.seed,
                                           "rho_lower": analytic.nstr(rho_lo, 20)})
    vals = ctx.table.values[: X + 1]
    omega_all, big_all = ctx.factor_arrays()
    omega, big = omega_all[: X + 1], big_all[: X + 1]
    n = np.arange(X + 1)
    idx = n[2:]
    m = vals[2:]
    w, W = omega[2:], big[2:]
    report.cases += len(idx)

    # m(n) < n^rho / sqrt(2); with m(1) = 0 the case n = 1 is trivial
    logm = np.log(m.astype(np.float64))
    gap = float(rho_lo) * np.log(idx) - logm - 0.5 * math.log(2)
    close = np.nonzero(gap <= FLOAT_GAP)[0]
    for i in close:
        nn, mm = int(idx[i]), int(m[i])
        if not _below_power(mm, nn, rho_lo, math.sqrt(2)):
            report.fail(nn, "m(n) < n^rho / sqrt(2)", mm)
    worst = int(np.argmin(gap))
    report.extremal["max_sqrt2_m_over_n_rho"] = float(math.exp(-gap[worst]))
    report.extremal["argmax_sqrt2_m_over_n_rho"] = int(idx[worst])

    # m(n) >= 2^(Omega-1), equality exactly at prime powers
    pow2 = np.left_shift(np.int64(1), W - 1)
    for i in np.nonzero(m < pow2)[0]:
        report.fail(int(idx[i]), "m(n) >= 2^(Omega-1)", int(m[i]))
    for i in np.nonzero((m == pow2) != (w == 1))[0]:
        report.fail(int(idx[i]), "m(n) = 2^(Omega-1) iff n is a prime power", int(m[i]))

    # m(n) >= omega! 2^(Omega - omega)
    fact = np.array([math.factorial(k) for k in range(int(w.max()) + 1)], dtype=np.int64)
    lower6 = fact[w] * np.left_shift(np.int64(1), W - w)
    for i in np.nonzero(m < lower6)[0]:
        report.fail(int(idx[i]), "m(n) >= omega! 2^(Omega-omega)", int(m[i]))
    report.extremal["min_m_over_omega_bound"] = float((m / lower6).min())

    # parity: m(n) odd iff n squarefree
    for i in np.nonzero((m % 2 == 1) != (w == W))[0]:
        report.fail(int(idx[i]), "m(n) odd iff squarefree", int(m[i]))

    # m(n) < 2 Omega(n) m(n/p) for each prime p | n
    rest = idx.copy()
    last = np.zeros_like(idx)
    active = rest > 1
    worst_ratio = 0.0
    spf = ctx.sieve.spf
    while active.any():
        p = np.where(active, spf[rest], 1)
        fresh = active & (p != last)
        sel = np.nonzero(fresh)[0]
        bound = 2 * W[sel] * vals[idx[sel] // p[sel]]
        bad = sel[m[sel] >= bound]
        for i in bad:
            report.fail(int(idx[i]), f"m(n) < 2 Omega(n) m(n/{int(p[i])})", int(m[i]))
        if sel.size:
            worst_ratio = max(worst_ratio, float((m[sel] / bound).max()))
        last = np.where(active, p, last)
        rest = np.where(active, rest // p, rest)
        active = rest > 1
    report.extremal["max_m_over_drop_prime_bound"] = worst_ratio

    rng = ctx.rng()
    # supermultiplicativity on r, s <= sqrt(X)
    root = math.isqrt(X)
    if root >= 2:
        pairs = [(r, s) for r in range(2, root + 1) for s in range(2, root + 1)]
        if len(pairs) > samples:
            pairs = [(rng.randint(2, root), rng.randint(2, root)) for _ in range(samples)]
        worst_sm = math.inf
        for r, s in pairs:
            lhs, rhs = int(vals[r * s]), 2 * int(vals[r]) * int(vals[s])
            report.cases += 1
            if lhs < rhs:
                report.fail([r, s], "m(rs) >= 2 m(r) m(s)", [lhs, rhs])
            worst_sm = min(worst_sm, lhs / rhs)
        report.extremal["min_m_rs_over_2_m_r_m_s"] = worst_sm

    # antichain: m(n_1...n_k) >= k! prod m(n_i) when no n_i divides another
    tuples = 0
    tries = 0
    worst_ac = math.inf
    while tuples < samples and tries < 20 * samples:
        tries += 1
        k = rng.choice((2, 3, 4))
        cap = int(round(X ** (1 / k)))
        if cap < 3:
            continue
        ns = [rng.randint(2, cap) for _ in range(k)]
        if any(a % b == 0 for i, a in enumerate(ns) for j, b in enumerate(ns) if i != j):
            continue
        prod = math.prod(ns)
        if prod > X:
            continue
        tuples += 1
        report.cases += 1
        lhs = int(vals[prod])
        rhs = math.factorial(k) * math.prod(int(vals[a]) for a in ns)
        if lhs < rhs:
            report.fail(ns, "m(prod) >= k! prod m(n_i)", [lhs, rhs])
        worst_ac = min(worst_ac, lhs / rhs)
    report.extremal["antichain_tuples"] = tuples
    if tuples:
        report.extremal["min_antichain_ratio"] = worst_ac
    return report


def suite_parity(X: int, ctx: VerifyContext) -> VerifyReport:
    ctx.need(X)
    report = VerifyReport("parity", {"X": X})
    omega, big = (a[: X + 1] for a in ctx.factor_arrays())
    m = ctx.table.values[: X + 1]
    report.cases = max(X - 1, 0)
    bad = np.nonzero((m[2:] % 2 == 1) != (omega[2:] == big[2:]))[0] + 2
    for n in bad:
        report.fail(int(n), "m(n) odd iff n squarefree", int(m[n]))
    report.extremal["squarefree_count"] = int(np.count_nonzero(omega[2:] == big[2:]))
    return report


def _primes_upto(q: int) -> list[int]:
    return [int(p) for p in build_sieve(max(q, 2)).primes]


def suite_fixed_points(qmax: int, ctx: VerifyContext) -> VerifyReport:
    if qmax < 3:
        raise ValueError("qmax must be >= 3")
    report = VerifyReport("fixed_points", {"qmax": qmax, "table_limit": ctx.limit})
    for q in _primes_upto(qmax):
        if q == 2:
            continue
        n = 2 ** (2 * q - 2) * q
        closed = m_two_prime(2 * q - 2, 1)
        dp = m_signature((2 * q - 2, 1), ctx.cache)
        report.cases += 1
        if not closed == dp == n:
            report.fail(q, "m(2^(2q-2) q) = 2^(2q-2) q", {"n": n, "two_prime": closed,
                                                          "signature": dp})
    vals = ctx.table.values
    fixed = [int(n) for n in np.nonzero(vals == np.arange(ctx.limit + 1))[0] if n > 1]
    report.cases += 1
    if not fixed or fixed[0] != 48:
        report.fail("table", "least fixed point > 1 is 48", fixed[:5])
    report.extremal["table_fixed_points"] = fixed[:50]
    return report


def census_values(X: int, ctx: VerifyContext) -> tuple[int, int]:
    """(#{m(n): n <= X}, #{m(n): m(n) <= X, n >= 1})."""
    ctx.need(X)
    first = len(np.unique(ctx.table.values[1 : X + 1]))
    # m(n) >= 2^(Omega-1) bounds Omega for the second census
    r2 = 1 + int(math.floor(math.log2(X)))
    seen = {1}
    for omega in range(1, r2 + 1):
        for sig in partitions(omega):
            v = m_signature(sig, ctx.cache)
            if v <= X:
                seen.add(v)
    return first, len(seen)


def suite_census(X: int, ctx: VerifyContext, slack: float = CENSUS_SLACK) -> VerifyReport:
    report = VerifyReport("census", {"X": X, "slack": slack})
    by_n, by_value = census_values(X, ctx)
    log2x = math.log(X) / math.log(2)
    r1 = int(math.floor(log2x))
    r2 = int(math.floor(1 + log2x))
    smooth = math.exp(math.pi * math.sqrt(2 / math.log(8)) * (1 + slack) * math.sqrt(math.log(X)))
    checks = [
        ("#{m(n): n <= X} <= r p(r)", by_n, r1 * partition_count(r1)),
        ("#{m(n): n <= X} <= exp bound", by_n, smooth),
        ("#{m(n): m(n) <= X} <= r p(r)", by_value, r2 * partition_count(r2)),
        ("#{m(n): m(n) <= X} <= exp bound", by_value, smooth),
    ]
    for relation, count, bound in checks:
        report.cases += 1
        if not count <= bound:
            report.fail(X, relation, [count, bound])
    report.extremal.update({
        "distinct_values_n_le_X": by_n,
        "distinct_values_m_le_X": by_value,
        "r_n": r1,
        "r_m": r2,
        "r_p_r_n": r1 * partition_count(r1),
        "r_p_r_m": r2 * partition_count(r2),
        "exp_bound": smooth,
    })
    return report


def lemma3_grid(kmax: int) -> list[int]:
    grid = []
    k = 100
    while k <= kmax:
        grid.append(k)
        k *= 10
    return grid


def suite_lemma3(kmax: int, ctx: VerifyContext, tol: float = 1e-13) -> VerifyReport:
    """R(k) on k = 10^2, 10^3, ... <= kmax: inside [0.5, 2], |R - 1| shrinking."""
    if kmax < 100:
        raise ValueError("kmax must be >= 100")
    report = VerifyReport("lemma3", {"kmax": kmax, "tol": tol})
    rho = solve_rho(INFINITY, tol)
    zp = analytic._zeta_prime_over(rho.rho, analytic.mpf(tol) / 100)
    sieve = analytic.build_sieve(_prime_bound(kmax))
    ratios, rhos = {}, {}
    for k in lemma3_grid(kmax):
        r = lemma3_ratio(k, tol, sieve, rho=rho, zeta_prime=zp)
        ratios[k] = r
        rhos[k] = solve_rho(k, tol, sieve).rho
        report.cases += 1
        if not 0.5 <= r.value <= 2:
            report.fail(k, "0.5 <= R(k) <= 2", float(r.value))
    ks = sorted(ratios)
    for a, b in zip(ks, ks[1:]):
        report.cases += 1
        # certified: the upper end of |R(b)-1| must sit below the lower end of |R(a)-1|
        dev_a_lo = abs(ratios[a].value - 1) - ratios[a].err
        dev_b_hi = abs(ratios[b].value - 1) + ratios[b].err
        if not dev_b_hi < dev_a_lo:
            report.fail([a, b], "|R(k) - 1| strictly decreasing",
                        [float(ratios[a].value - 1), float(ratios[b].value - 1)])
    chain = [solve_rho(2, tol).rho, solve_rho(3, tol).rho] + [rhos[k] for k in ks] + [rho.rho]
    for a, b in zip(chain, chain[1:]):
        report.cases += 1
        if not a.hi < b.lo:
            report.fail([analytic.nstr(a.value, 12), analytic.nstr(b.value, 12)],
                        "rho_k strictly increasing to rho", None)
    diff = rho.rho.value - chain[0].value
    report.cases += 1
    if abs(diff - (analytic.mpf("1.72864") - analytic.mpf("1.43527"))) > 0.5e-4:
        report.fail(2, "rho - rho_2 = 0.29337 to 4 decimals", float(diff))
    zeta_at_rho = 2  # zeta(rho) = 2 by definition
    report.extremal.update({
        "R": {str(k): float(ratios[k].value) for k in ks},
        "R_err": {str(k): float(ratios[k].err) for k in ks},
        "R_over_zeta_rho": {str(k): float(ratios[k].value / zeta_at_rho) for k in ks},
        "rho_minus_rho_k": {str(k): float(rho.rho.value - rhos[k].value) for k in ks},
        "rho_minus_rho_2": float(diff),
    })
    return report


def _prime_bound(k: int) -> int:
    return 20 if k < 6 else int(k * (math.log(k) + math.log(math.log(k)))) + 10


def suite_corollary(x_grid, k_set, ctx: VerifyContext, tol: float = 1e-13) -> VerifyReport:
    x_grid = sorted(int(x) for x in x_grid)
    k_set = sorted(int(k) for k in k_set)
    if any(k < 2 for k in k_set):
        raise ValueError("Corollary instances need k >= 2")
    ctx.need(max(x_grid))
    report = VerifyReport("corollary", {"x_grid": x_grid, "k_set": k_set, "tol": tol})
    mp = analytic._mp
    smallest: dict[str, int | None] = {}
    ck: dict[str, float] = {}
    margins: dict[str, float] = {}
    for k in k_set:
        rk = solve_rho(k, tol).rho
        ck[str(k)] = float(analytic.c_k(k, tol).value)
        passing = []
        for x in x_grid:
            total = summatory_Mk(ctx.table, ctx.sieve, x, k)
            # a lower bound to beat: use the upper end of rho_k
            target = mp.mpf(x) ** rk.hi / 5
            report.cases += 1
            ok = total > target
            if ok:
                passing.append(x)
            else:
                report.fail([k, x], "M_k(x) > x^rho_k / 5", [total, float(target)])
            margins[f"{k},{x}"] = float(total / target)
        smallest[str(k)] = passing[0] if passing else None
    report.extremal.update({
        "smallest_passing_x": smallest,
        "c_k": ck,
        "min_Mk_over_bound": min(margins.values()) if margins else None,
        "c_k_all_above_0.3": all(v > 0.3 for v in ck.values()),
    })
    return report


def residue_census(X: int, k: int, K: int, A: int, ctx: VerifyContext) -> VerifyReport:
    """Residues of m(n) mod k along n = A (mod K), n <= X.

    Records whether at least two residue classes still occur in the upper
    half of the range; evidence only.
    """
    if k < 2 or K < 2:
        raise ValueError("need k >= 2 and K >= 2")
    if math.gcd(A, K) != 1:
        raise ValueError(f"gcd({A}, {K}) != 1")
    ctx.need(X)
    report = VerifyReport("residues", {"X": X, "k": k, "K": K, "A": A})
    start = A % K or K
    ns = np.arange(start, X + 1, K)
    if ns.size == 0:
        report.fail(X, "nonempty progression", "empty census")
        report.extremal["empty"] = True
        return report
    residues = ctx.table.values[ns] % k
    report.cases = int(ns.size)
    counts = {str(int(r)): int(c) for r, c in zip(*np.unique(residues, return_counts=True))}
    tail = residues[ns > X // 2]
    tail_classes = sorted(int(r) for r in np.unique(tail))
    report.extremal.update({"counts": counts, "tail_classes": tail_classes, "empty": False})
    if len(tail_classes) < 2:
        report.fail(X, "two residue classes beyond X/2", tail_classes)
    return report


def upper_bound_margin(X: int, ctx: VerifyContext, exponent: float = 1.1) -> VerifyReport:
    """D(n) = log(n^rho / m(n)) / ((log n)^(1/rho) / (log log n)^exponent).

    The exponent stands in for 1 + epsilon and is arbitrary.  Only
    D(n) > 0, i.e. m(n) < n^rho, is asserted.
    """
    ctx.need(X)
    rho = ctx.rho.rho
    report = VerifyReport("margin", {"X": X, "loglog_exponent": exponent})
    n = np.arange(3, X + 1)
    m = ctx.table.values[3 : X + 1]
    log_n = np.log(n)
    gap = float(rho.lo) * log_n - np.log(m.astype(np.float64))
    report.cases = int(n.size)
    for i in np.nonzero(gap <= FLOAT_GAP)[0]:
        if not _below_power(int(m[i]), int(n[i]), rho.lo):
            report.fail(int(n[i]), "m(n) < n^rho", int(m[i]))
    D = gap / (log_n ** (1 / float(rho.value)) / np.log(log_n) ** exponent)
    j = int(np.argmin(D))
    report.extremal.update({"min_D": float(D[j]), "argmin_D": int(n[j]),
                            "m_at_argmin": int(m[j])})
    return report


SUITES: dict[str, Callable[..., VerifyReport]] = {
    "equivalence": suite_equivalence,
    "inequalities": suite_inequalities,
    "parity": suite_parity,
    "fixed_points": suite_fixed_points,
    "census": suite_census,
    "lemma3": suite_lemma3,
    "corollary": suite_corollary,
    "residues": residue_census,
    "margin": upper_bound_margin,
}


def run_all(ctx: VerifyContext, X: int | None = None, qmax: int = 13, kmax: int = 10**4,
            samples: int = 10**4) -> list[VerifyReport]:
    """Every suite at modest default sizes, in a fixed order."""
    X = ctx.limit if X is None else X
    grid = [x for x in (10**3, 10**4, 10**5, 10**6) if x <= X]
    return [
        suite_equivalence(X, ctx),
        suite_inequalities(X, ctx, samples),
        suite_parity(X, ctx),
        suite_fixed_points(qmax, ctx),
        suite_census(X, ctx),
        suite_lemma3(kmax, ctx),
        suite_corollary(grid, range(2, 11), ctx),
        residue_census(X, 2, 3, 1, ctx),
        residue_census(X, 3, 5, 2, ctx),
        upper_bound_margin(X, ctx),
    ]
