import json

import pytest

from ordfact import verify
from ordfact.verify import VerifyContext, VerifyReport


@pytest.fixture(scope="module")
def ctx():
    return VerifyContext(2 * 10**4)


def test_report_roundtrip():
    r = VerifyReport("demo", {"x": 1})
    r.cases = 3
    r.fail(7, "a < b", [1, 2])
    d = json.loads(r.to_json())
    assert d["passed"] is False and d["failure_count"] == 1
    assert "FAIL (1)" in r.to_text()


def test_failure_list_is_capped():
    r = VerifyReport("demo", {})
    for i in range(verify.MAX_RECORDED_FAILURES + 5):
        r.fail(i, "x", None)
    assert len(r.failures) == verify.MAX_RECORDED_FAILURES
    assert r.failure_count == verify.MAX_RECORDED_FAILURES + 5


def test_equivalence(ctx):
    rep = verify.suite_equivalence(2000, ctx, sig_omega=8)
    assert rep.passed, rep.failures[:3]


def test_inequalities_and_parity(ctx):
    assert verify.suite_inequalities(2 * 10**4, ctx, samples=500).passed
    assert verify.suite_parity(2 * 10**4, ctx).passed


def test_fixed_points(ctx):
    rep = verify.suite_fixed_points(13, ctx)
    assert rep.passed
    assert rep.extremal["table_fixed_points"][:3] == [48, 1280, 2496]


def test_census(ctx):
    rep = verify.suite_census(10**4, ctx)
    assert rep.passed
    assert rep.extremal["distinct_values_n_le_X"] < rep.extremal["r_p_r_n"]


def test_residues_complete(ctx):
    rep = verify.residue_census(2 * 10**4, 3, 5, 2, ctx)
    assert rep.passed


def test_margin(ctx):
    assert verify.upper_bound_margin(2 * 10**4, ctx).passed


def test_corollary_small(ctx):
    rep = verify.suite_corollary([10**3, 10**4], [2, 3, 5], ctx)
    assert rep.passed


def test_context_limit(ctx):
    with pytest.raises(ValueError):
        verify.suite_corollary([10**6], [2], ctx)


def test_lemma3_reports_bounds():
    rep = verify.suite_lemma3(1000, VerifyContext(100))
    assert all(0.5 <= v <= 2 for v in rep.extremal["R"].values())
