import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from siegelkit import ledger
from siegelkit.ledger import CheckResult, piecewise_min, quadratic_min, run_all, timed_run

CHECKS = [
    ("ellipse_minima", ledger.check_ellipse_minima, ()),
    ("covering_constants", ledger.check_covering_constants, (3,)),
    ("sector_polynomials", ledger.check_sector_polynomials, ()),
    ("phi_att_bounds", ledger.check_phi_att_bounds, (22,)),
    ("W1_connected", ledger.check_W1_connected, (22,)),
    ("sector_mapping", ledger.check_sector_mapping, (5,)),
    ("beta_max_3", ledger.check_beta_max, (3,)),
    ("beta_max_4", ledger.check_beta_max, (4,)),
    ("beta_max_22", ledger.check_beta_max, (22,)),
    ("log_ratio", ledger.check_log_ratio, ()),
]


@pytest.mark.parametrize("label,fn,args", CHECKS, ids=[c[0] for c in CHECKS])
def test_each_check_passes(label, fn, args):
    res = fn(*args)
    assert res.passed, res.as_dict()
    assert res.rel_tol <= 1e-3
    for c, p in zip(res.computed, res.printed):
        assert abs(c - p) <= res.rel_tol * max(1, abs(p))


def test_run_all_fast_sorted_and_deterministic():
    results, seconds = timed_run()
    assert seconds < 1.0
    keys = [(r.name, -1 if r.m is None else r.m) for r in results]
    assert keys == sorted(keys)
    again = run_all()
    assert [r.as_dict() for r in results] == [r.as_dict() for r in again]


def test_dense_mode_passes():
    assert all(r.passed for r in run_all(dense=True))


def test_check_result_semantics():
    ok = CheckResult("x", None, [1.00001], [1.0], 1e-4, margins=[0.5])
    assert ok.passed and getattr(ok, "pass")
    assert not CheckResult("x", None, [1.001], [1.0], 1e-4).passed
    assert not CheckResult("x", None, [1.0], [1.0], 1e-4, margins=[0.0]).passed
    # absolute tolerance below one in magnitude
    assert CheckResult("x", None, [0.00005], [0.0], 1e-4).passed
    with pytest.raises(ValueError):
        CheckResult("x", None, [1.0, 2.0], [1.0], 1e-4)
    with pytest.raises(AttributeError):
        ok.nonexistent


def test_ellipse_printed_values():
    res = ledger.check_ellipse_minima()
    for p in (0.137177, 8.75717, 0.760272, 0.0166743, 0.00781714, 0.0283886, 1.44, 0.24):
        assert any(abs(c - p) <= 1e-4 * max(1, abs(p)) and q == p for c, q in zip(res.computed, res.printed))


def test_table_formula_vs_true_minimum():
    a, c = 0.84 * 1.7 + 0.6 / 1.7, 0.84 * 1.7 - 0.6 / 1.7
    b = -0.18 - 1
    table = piecewise_min(a, b, c, -0.01)
    true = quadratic_min(a, b, c, -0.01)
    assert abs(table - 8.75717) < 1e-4
    assert abs(true - 0.35113) < 1e-5
    assert true > 0


@given(st.floats(0.1, 3), st.floats(-3, 3), st.floats(0.05, 3), st.floats(-1, 1))
def test_quadratic_min_matches_brute_force(a, b, c, d):
    t = np.linspace(-1, 1, 40001)
    brute = np.min((a * a - c * c) * t * t + 2 * a * b * t + b * b + c * c + d)
    got = quadratic_min(a, b, c, d)
    assert got <= brute + 1e-12
    assert brute - got < 1e-6 * (1 + abs(a * b) + a * a + c * c)


@given(st.floats(0.1, 3), st.floats(-3, 3), st.floats(0.05, 3), st.floats(-1, 1))
def test_table_formula_agrees_near_vertex(a, b, c, d):
    k = a * a - c * c
    if k > 1e-6 and abs(a * b / k) <= 1:
        assert piecewise_min(a, b, c, d) == pytest.approx(quadratic_min(a, b, c, d), abs=1e-12)


def test_log_ratio_value():
    assert abs(math.log(2.4 / 0.4) - 1.79176) < 1e-5
    assert abs(math.log(6) / math.pi - 0.570335) < 1e-6
