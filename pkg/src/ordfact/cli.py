"""Command-line front end.

Exit codes: 0 ok, 1 suite failure, 2 usage, 3 budget exceeded,
4 internal disagreement, 5 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analytic, summatory, verify
from .arith import build_sieve, factorize, make_signature, signature_of, signature_to_int
from .counting import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    Convention,
    InternalConsistencyError,
    MemoCache,
    m_divrec,
    m_macmahon,
    m_moebius,
    m_oracle,
    m_signature,
    m_sklar,
)

EXIT_OK, EXIT_SUITE, EXIT_USAGE, EXIT_BUDGET, EXIT_DISAGREE, EXIT_IO = 0, 1, 2, 3, 4, 5

CACHE_HEADER = "ordfact-cache v1"
CACHE_FILE = "signatures.txt"
CACHE_ENV = "ORDFACT_CACHE"


class CacheFormatError(ValueError):
    pass


class Disagreement(RuntimeError):
    pass


# -- cache file ----------------------------------------------------------------


def format_cache(records) -> str:
    lines = [CACHE_HEADER]
    for sig, value in sorted((tuple(s), int(v)) for s, v in records):
        lines.append(",".join(map(str, sig)) + "\t" + str(value))
    return "\n".join(lines) + "\n"


def parse_cache(text: str) -> list[tuple[tuple[int, ...], int]]:
    lines = text.splitlines()
    if not lines or lines[0] != CACHE_HEADER:
        raise CacheFormatError(f"cache header must be {CACHE_HEADER!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        try:
            exps, value = line.split("\t")
            sig = tuple(int(a) for a in exps.split(",")) if exps else ()
            v = int(value)
        except ValueError as exc:
            raise CacheFormatError(f"line {lineno}: {line!r}") from exc
        if list(sig) != sorted(sig, reverse=True) or any(a < 1 for a in sig) or v < 0:
            raise CacheFormatError(f"line {lineno}: not a canonical record")
        records.append((sig, v))
    return records


def resolve_cache_dir(flag: str | None) -> Path:
    """--cache-dir, then $ORDFACT_CACHE, then the platform cache directory."""
    if flag:
        return Path(flag)
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(Path.home(), ".cache")
    return Path(base) / "ordfact"


def load_cache(path: Path) -> MemoCache:
    cache = MemoCache()
    if path.exists():
        cache.update(parse_cache(path.read_text()))
    return cache


def save_cache(cache: MemoCache, path: Path) -> None:
    atomic_write(path, format_cache(cache.items()))


def atomic_write(path: Path | str, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- output --------------------------------------------------------------------


def render(rows: list[dict], columns: list[str], fmt: str) -> str:
    if fmt == "json":
        return json.dumps([{c: row[c] for c in columns} for row in rows], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([row[c] for c in columns])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        atomic_write(out, text)
    else:
        sys.stdout.write(text)


def _dec(x, digits: int = 25) -> str:
    """Decimal string of an mpf without exponent notation."""
    return analytic.nstr(x, digits) if abs(x) >= 1e-5 else format(float(x), ".6e")


def _row_schema(props: dict[str, dict]) -> dict:
    return {
        "type": "array",
        "items": {
            "type": "object",
            "properties": props,
            "required": list(props),
            "additionalProperties": False,
        },
    }


_INT = {"type": "integer", "minimum": 0}
_NUM = {"type": "number"}
_STR = {"type": "string"}
_NULLABLE_NUM = {"type": ["number", "null"]}

_REPORT = {
    "type": "object",
    "properties": {
        "suite": _STR,
        "params": {"type": "object"},
        "cases": _INT,
        "passed": {"type": "boolean"},
        "failure_count": _INT,
        "failures": {
            "type": "array",
            "items": {"type": "object", "required": ["input", "relation", "observed"]},
        },
        "extremal": {"type": "object"},
    },
    "required": ["suite", "params", "cases", "failures", "extremal"],
}

SCHEMAS: dict[str, dict] = {
    "m": _row_schema({"input": _STR, "algo": _STR, "m": _INT}),
    "table": _row_schema({"n": _INT, "m": _INT}),
    "summatory": {"type": "array", "items": {
        "type": "object",
        "properties": {"x": _INT, "M": _INT, "M_over_x_rho": _NUM, "M_k": _INT,
                       "M_k_over_x_rho_k": _NUM, "progression": _INT,
                       "progression_ratio": _NUM},
        "required": ["x", "M", "M_over_x_rho"],
        "additionalProperties": False,
    }},
    "rho": _row_schema({"k": _STR, "rho": _STR, "err": _STR, "residual": _STR,
                        "iterations": _INT}),
    "rho_table": _row_schema({"k": _INT, "rho": _STR, "err": _STR, "c_k": _STR}),
    "psi": _row_schema({"x": _INT, "y": _INT, "psi": _INT}),
    "census": _row_schema({"X": _INT, "distinct_n_le_X": _INT, "distinct_m_le_X": _INT,
                           "r_n": _INT, "r_p_r_n": _INT, "r_m": _INT, "r_p_r_m": _INT,
                           "exp_bound": _NUM}),
    "champion": _row_schema({"x": _INT, "k": {"type": ["integer", "null"]}, "n": _INT,
                             "m": _INT, "ratio": _NUM, "margin": _NUM, "margin_n": _INT,
                             "margin_min": _NUM, "witness": _NULLABLE_NUM}),
    "tail": _row_schema({"t": _NUM, "delta": _NUM, "sum": _STR, "err": _STR,
                         "main_term": _NUM, "ratio": _NUM}),
    "verify": {"oneOf": [_REPORT, {"type": "array", "items": _REPORT}]},
}


# -- commands ------------------------------------------------------------------

ALGORITHMS = ("oracle", "divrec", "moebius", "signature", "macmahon", "sklar")


def _m_by(algo: str, n: int, sig, sieve, cache, budget: int = DEFAULT_BUDGET) -> int:
    if n == 1 and algo in ("moebius", "macmahon", "sklar"):
        return 1
    if algo == "oracle":
        return m_oracle(n, budget=budget)
    if algo == "divrec":
        return m_divrec(n, sieve)
    if algo == "moebius":
        return m_moebius(n, sieve)
    if algo == "signature":
        return m_signature(sig, cache)
    if algo == "macmahon":
        return m_macmahon(sig)
    if algo == "sklar":
        return m_sklar(sig)
    raise ValueError(algo)


def cmd_m(args) -> int:
    if (args.n is None) == (args.signature is None):
        raise UsageError("give exactly one of N or --signature")
    if args.signature is not None:
        sig = make_signature(int(a) for a in args.signature.split(",") if a.strip())
        n = signature_to_int(sig)
        label = ",".join(map(str, sig))
    else:
        n = args.n
        if n < 1:
            raise UsageError("N must be >= 1")
        sig = None
        label = str(n)
    algo = "signature" if args.algo == "auto" else args.algo
    needs_n = args.check_all or algo in ("oracle", "divrec", "moebius")
    sieve = build_sieve(max(n, 2)) if (sig is None or needs_n) else None
    if sig is None:
        sig = signature_of(factorize(n, sieve))

    cache_path = None
    cache = MemoCache()
    if not args.no_cache:
        cache_path = resolve_cache_dir(args.cache_dir) / CACHE_FILE
        cache = load_cache(cache_path)

    convention = Convention.ZERO_AT_ONE if args.convention == "zero" else Convention.ONE_AT_ONE
    if n == 1:
        value = convention.at_one
    else:
        value = _m_by(algo, n, sig, sieve, cache, args.budget)
        if args.check_all:
            values = {a: _m_by(a, n, sig, sieve, cache, args.budget) for a in ALGORITHMS}
            if len(set(values.values())) != 1:
                raise Disagreement(f"algorithms disagree on {label}: {values}")
    if cache_path is not None:
        save_cache(cache, cache_path)
    if args.format == "text":
        emit(f"{value}\n", args.out)
    else:
        emit(render([{"input": label, "algo": algo, "m": value}], ["input", "algo", "m"],
                    args.format), args.out)
    return EXIT_OK


def cmd_table(args) -> int:
    table = summatory.build_m_table(args.max)
    rows = [{"n": n, "m": int(v)} for n, v in enumerate(table.values[1:].tolist(), start=1)]
    emit(render(rows, ["n", "m"], args.format), args.out)
    return EXIT_OK


def _grid(X: int, step: int | None) -> list[int]:
    step = step or max(1, X // 1000)
    xs = list(range(step, X + 1, step))
    if not xs or xs[-1] != X:
        xs.append(X)
    return xs


def cmd_summatory(args) -> int:
    X = args.max
    if (args.mod is None) != (args.res is None):
        raise UsageError("--mod and --res go together")
    table = summatory.build_m_table(X)
    rho = analytic.solve_rho(analytic.INFINITY, 1e-13).rho.value
    columns = ["x", "M", "M_over_x_rho"]
    sieve = rho_k = None
    if args.k is not None:
        sieve = build_sieve(max(X, 2))
        rho_k = analytic.solve_rho(args.k, 1e-13).rho.value
        columns += ["M_k", "M_k_over_x_rho_k"]
    if args.mod is not None:
        if math.gcd(args.res, args.mod) != 1:
            raise UsageError(f"gcd({args.res}, {args.mod}) != 1")
        columns += ["progression", "progression_ratio"]
    rows = []
    for x in _grid(X, args.step):
        row = {"x": x, "M": summatory.summatory_M(table, x),
               "M_over_x_rho": summatory.kalmar_ratio(table, x, rho)}
        if args.k is not None:
            mk = summatory.summatory_Mk(table, sieve, x, args.k)
            row["M_k"] = mk
            row["M_k_over_x_rho_k"] = mk / math.exp(float(rho_k) * math.log(x))
        if args.mod is not None:
            row["progression"] = summatory.progression_sum(table, x, args.mod, args.res)
            row["progression_ratio"] = summatory.progression_ratio(table, x, args.mod, args.res)
        rows.append(row)
    emit(render(rows, columns, args.format), args.out)
    return EXIT_OK


def cmd_rho(args) -> int:
    k = analytic.INFINITY if (args.inf or args.k is None) else args.k
    res = analytic.solve_rho(k, args.tol)
    row = {"k": "inf" if k == analytic.INFINITY else str(k), "rho": _dec(res.rho.value),
           "err": _dec(res.rho.err, 3), "residual": _dec(res.residual, 3),
           "iterations": res.iterations}
    emit(render([row], ["k", "rho", "err", "residual", "iterations"], args.format), args.out)
    return EXIT_OK


def cmd_rho_table(args) -> int:
    if args.kmax < 1:
        raise UsageError("--kmax must be >= 1")
    sieve = build_sieve(verify._prime_bound(args.kmax))
    rows = []
    for k in range(1, args.kmax + 1):
        res = analytic.solve_rho(k, args.tol, sieve)
        ck = analytic.c_k(k, args.tol, sieve) if k >= 2 else None
        rows.append({"k": k, "rho": _dec(res.rho.value), "err": _dec(res.rho.err, 3),
                     "c_k": _dec(ck.value) if ck is not None else "inf"})
    emit(render(rows, ["k", "rho", "err", "c_k"], args.format), args.out)
    return EXIT_OK


def cmd_psi(args) -> int:
    sieve = build_sieve(max(2, min(args.x, args.y)))
    res = summatory.psi(args.x, args.y, sieve)
    emit(render([{"x": res.x, "y": res.y, "psi": res.count}], ["x", "y", "psi"], args.format),
         args.out)
    return EXIT_OK


def cmd_census(args) -> int:
    ctx = verify.VerifyContext(args.max)
    rep = verify.suite_census(args.max, ctx, args.slack)
    e = rep.extremal
    row = {"X": args.max, "distinct_n_le_X": e["distinct_values_n_le_X"],
           "distinct_m_le_X": e["distinct_values_m_le_X"], "r_n": e["r_n"],
           "r_p_r_n": e["r_p_r_n"], "r_m": e["r_m"], "r_p_r_m": e["r_p_r_m"],
           "exp_bound": e["exp_bound"]}
    emit(render([row], list(row), args.format), args.out)
    return EXIT_OK


def cmd_champion(args) -> int:
    X = args.max
    table = summatory.build_m_table(X)
    sieve = build_sieve(max(X, 2))
    rho = analytic.solve_rho(analytic.INFINITY, 1e-13).rho.value
    rho_k = analytic.solve_rho(args.k, 1e-13).rho.hi if args.k else None
    c = summatory.champion_search(table, sieve, X, rho, args.k, rho_k)
    row = {"x": X, "k": args.k, "n": c.n, "m": c.m, "ratio": c.ratio, "margin": c.margin,
           "margin_n": c.margin_n, "margin_min": c.margin_min, "witness": c.witness}
    emit(render([row], list(row), args.format), args.out)
    return EXIT_OK


def cmd_tail(args) -> int:
    sieve = build_sieve(args.limit)
    res = analytic.prime_tail_sum(args.t, args.delta, sieve)
    row = {"t": args.t, "delta": args.delta, "sum": _dec(res.total.value),
           "err": _dec(res.total.err, 3), "main_term": res.main_term, "ratio": res.ratio}
    emit(render([row], list(row), args.format), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    X = args.max
    ctx = verify.VerifyContext(X, seed=args.seed)
    name = args.suite
    x_grid = args.x_grid or [x for x in (10**3, 10**4, 10**5, 10**6) if x <= X]
    if name == "all":
        # build shared state up front so parallel suites only read it
        ctx.table, ctx.sieve, ctx.rho, ctx.factor_arrays()
        jobs = [
            lambda: verify.suite_equivalence(X, ctx),
            lambda: verify.suite_inequalities(X, ctx, args.samples),
            lambda: verify.suite_parity(X, ctx),
            lambda: verify.suite_fixed_points(args.qmax, ctx),
            lambda: verify.suite_census(X, ctx, args.slack),
            lambda: verify.suite_lemma3(args.kmax, ctx),
            lambda: verify.suite_corollary(x_grid, args.k_set, ctx),
            lambda: verify.residue_census(X, 2, 3, 1, ctx),
            lambda: verify.residue_census(X, 3, 5, 2, ctx),
            lambda: verify.upper_bound_margin(X, ctx),
        ]
        if args.jobs > 1:
            with ThreadPoolExecutor(args.jobs) as pool:
                reports = list(pool.map(lambda f: f(), jobs))
        else:
            reports = [f() for f in jobs]
    else:
        reports = [_run_one(name, args, ctx, x_grid)]
    if args.format == "text":
        text = "\n".join(r.to_text() for r in reports) + "\n"
    elif name == "all":
        text = json.dumps([r.to_dict() for r in reports], sort_keys=True, indent=2) + "\n"
    else:
        text = reports[0].to_json() + "\n"
    emit(text, args.out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_SUITE


def _run_one(name, args, ctx, x_grid):
    X = args.max
    if name == "equivalence":
        return verify.suite_equivalence(X, ctx)
    if name == "inequalities":
        return verify.suite_inequalities(X, ctx, args.samples)
    if name == "parity":
        return verify.suite_parity(X, ctx)
    if name == "fixed_points":
        return verify.suite_fixed_points(args.qmax, ctx)
    if name == "census":
        return verify.suite_census(X, ctx, args.slack)
    if name == "lemma3":
        return verify.suite_lemma3(args.kmax, ctx)
    if name == "corollary":
        return verify.suite_corollary(x_grid, args.k_set, ctx)
    if name == "residues":
        return verify.residue_census(X, args.modk, args.K, args.A, ctx)
    if name == "margin":
        return verify.upper_bound_margin(X, ctx)
    raise UsageError(f"unknown suite {name}")


# -- parser --------------------------------------------------------------------


class UsageError(ValueError):
    pass


def _int(text: str) -> int:
    """Integers, also written as 1e6 or 10**6."""
    t = text.strip().replace("_", "")
    try:
        if "**" in t:
            base, exp = t.split("**")
            return int(base) ** int(exp)
        if "e" in t.lower():
            value = float(t)
            if value != int(value):
                raise ValueError
            return int(value)
        return int(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None


def _int_list(text: str) -> list[int]:
    return [_int(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordfact",
                                     description="Ordered factorizations: m(n) and friends.")
    parser.add_argument("--cache-dir", help=f"signature cache directory (else ${CACHE_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, formats=("csv", "json"), **kw):
        p = sub.add_parser(name, **kw)
        p.set_defaults(func=func)
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=formats, default=formats[0])
        return p

    p = add("m", cmd_m, formats=("text", "csv", "json"), help="m(n) for one input")
    p.add_argument("n", nargs="?", type=_int)
    p.add_argument("--signature", help="comma-separated exponents, e.g. 4,1")
    p.add_argument("--algo", choices=ALGORITHMS + ("auto",), default="auto")
    p.add_argument("--convention", choices=["zero", "one"], default="one",
                   help="value of m(1)")
    p.add_argument("--check-all", action="store_true", help="run every algorithm, exit 4 on disagreement")
    p.add_argument("--budget", type=_int, default=DEFAULT_BUDGET, help="node cap for --algo oracle")
    p.add_argument("--no-cache", action="store_true")
    p.add_argument("--cache-dir", dest="cache_dir", default=argparse.SUPPRESS)

    p = add("table", cmd_table, help="m(n) for n <= X")
    p.add_argument("--max", type=_int, required=True)

    p = add("summatory", cmd_summatory, help="M(x), M_k(x), progression sums")
    p.add_argument("--max", type=_int, required=True)
    p.add_argument("--k", type=_int)
    p.add_argument("--mod", type=_int)
    p.add_argument("--res", type=_int)
    p.add_argument("--step", type=_int)

    p = add("rho", cmd_rho, help="root of zeta_k(s) = 2")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--k", type=_int)
    g.add_argument("--inf", action="store_true")
    p.add_argument("--tol", type=float, default=1e-14)

    p = add("rho-table", cmd_rho_table, aliases=["rho_table"], help="rho_k and c_k for k <= K")
    p.add_argument("--kmax", type=_int, required=True)
    p.add_argument("--tol", type=float, default=1e-13)

    p = add("psi", cmd_psi, help="count of y-smooth n <= x")
    p.add_argument("--x", type=_int, required=True)
    p.add_argument("--y", type=_int, required=True)

    p = add("census", cmd_census, help="number of distinct m-values")
    p.add_argument("--max", type=_int, required=True)
    p.add_argument("--slack", type=float, default=verify.CENSUS_SLACK)

    p = add("champion", cmd_champion, help="largest m(n)/n^rho")
    p.add_argument("--max", type=_int, required=True)
    p.add_argument("--k", type=_int)

    p = add("tail", cmd_tail, help="sum of p^-delta over primes p > t")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--limit", type=_int, default=10**6)

    p = add("verify", cmd_verify, formats=("json", "text"), help="run a property suite")
    p.add_argument("suite", choices=sorted(verify.SUITES) + ["all"])
    p.add_argument("--max", type=_int, default=10**5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--samples", type=_int, default=10**4)
    p.add_argument("--qmax", type=_int, default=13)
    p.add_argument("--kmax", type=_int, default=10**4)
    p.add_argument("--slack", type=float, default=verify.CENSUS_SLACK)
    p.add_argument("--x-grid", type=_int_list)
    p.add_argument("--k-set", type=_int_list, default=list(range(2, 11)))
    p.add_argument("--modk", type=_int, default=2, help="residues: modulus of m(n)")
    p.add_argument("--K", type=_int, default=3, help="residues: progression modulus")
    p.add_argument("--A", type=_int, default=1, help="residues: progression residue")
    p.add_argument("--jobs", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except BudgetExceeded as exc:
        print(f"ordfact: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (Disagreement, InternalConsistencyError) as exc:
        print(f"ordfact: {exc}", file=sys.stderr)
        return EXIT_DISAGREE
    except (OSError, CacheFormatError) as exc:
        print(f"ordfact: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"ordfact: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
