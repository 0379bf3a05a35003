import cmath
import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from siegelkit.family import (
    EllipseSpec, FamilyParams, Sector, critical_data, cv_P_exact, dQ_factored,
    eval_dP, eval_dQ, eval_P, eval_P_alpha, eval_Q, ipow, psi_maps, q2_max,
    q2_max_terms, q_remainder, sector_contains, structural_constants,
)


def test_family_params_rejects_small_m():
    with pytest.raises(ValueError):
        FamilyParams(1)
    with pytest.raises(ValueError):
        FamilyParams(2.5)


@pytest.mark.parametrize("alpha", [0.0, 0.3, 0.618, 0.1 + 0.05j])
def test_fixed_point_and_multiplier(alpha):
    f = FamilyParams(3, alpha)
    assert f(0) == 0
    assert abs(f.derivative(0) - cmath.exp(2j * math.pi * alpha)) < 1e-15


def test_eval_P_examples():
    assert eval_P(2, 0) == 0
    assert eval_P(2, -1) == 0
    assert abs(eval_P(2, -1 / 3) - (-4 / 27)) < 1e-16


def test_eval_P_alpha_examples():
    assert abs(eval_P_alpha(FamilyParams(2, 0), 1) - 4) < 1e-15
    assert abs(eval_P_alpha(FamilyParams(2, 0.5), 1) + 4) < 1e-14
    with mpmath.workdps(40):
        oracle = -mpmath.mpf(22) ** 22 / mpmath.mpf(23) ** 23
    got = eval_P_alpha(FamilyParams(22, 0), -1 / 23)
    assert abs(got - float(oracle)) <= 1e-13 * abs(float(oracle))


def test_ipow_matches_builtin_power():
    z = np.array([0.3 + 0.2j, -1.1, 2j])
    for n in range(0, 12):
        assert np.allclose(ipow(z, n), z ** n, rtol=1e-14)
    with pytest.raises(ValueError):
        ipow(2.0, -1)


def test_eval_Q_examples():
    assert eval_Q(2, -1) == 0
    assert abs(eval_Q(2, 5 + 2 * math.sqrt(6)) - 27) < 1e-12
    with pytest.raises(ZeroDivisionError):
        eval_Q(2, 0)
    with pytest.raises(ZeroDivisionError):
        eval_Q(2, 1)


def test_cv_Q_m4_closed_form():
    # 4 (m+1)^{m+1} / m^m at m = 4 is 4 * 5^5 / 4^4 = 3125/64
    val = eval_Q(4, 9 + 4 * math.sqrt(5))
    assert abs(val - 3125 / 64) < 1e-10 * 3125 / 64
    assert abs(critical_data(4).cv_Q - 3125 / 64) < 1e-12 * 3125 / 64


def test_critical_data_examples():
    cd = critical_data(2)
    assert cd.cp_P == -1 / 3
    assert cv_P_exact(2) == Fraction(-4, 27)
    assert abs(cd.cp_Q1 - (math.sqrt(3) + math.sqrt(2)) ** 2) < 1e-12
    assert abs(cd.cp_Q1 - 9.898979) < 1e-6
    assert abs(critical_data(3).cp_Q1 - (7 + 4 * math.sqrt(3))) < 1e-12


@pytest.mark.parametrize("m", [2, 3, 5, 10, 22, 30])
def test_critical_data_invariants(m):
    cd = critical_data(m)
    assert abs(eval_dP(m, cd.cp_P)) < 1e-12
    assert abs(eval_P(m, cd.cp_P) - cd.cv_P) <= 1e-12 * abs(cd.cv_P)
    assert abs(cd.cp_Q1 * cd.cp_Q2 - 1) < 1e-14
    for cp in (cd.cp_Q1, cd.cp_Q2):
        assert abs(eval_Q(m, cp) - cd.cv_Q) <= 1e-10 * cd.cv_Q
    assert abs(math.log(cd.cv_Q) - cd.log_cv_Q) < 1e-12


def test_cp_product_is_exactly_one_in_surds():
    # (sqrt(m+1)+sqrt(m))^2 (sqrt(m+1)-sqrt(m))^2 = ((m+1) - m)^2
    for m in range(2, 50):
        with mpmath.workdps(50):
            a = (mpmath.sqrt(m + 1) + mpmath.sqrt(m)) ** 2
            b = (mpmath.sqrt(m + 1) - mpmath.sqrt(m)) ** 2
            assert abs(a * b - 1) < mpmath.mpf(10) ** -45


def test_cv_Q_ratio_increasing_below_e():
    ms = np.arange(2, 10_001)
    log_ratio = ms * (np.log1p(1 / ms))
    assert np.all(np.diff(log_ratio) > 0)
    assert np.all(log_ratio < 1)


def test_cp_Q1_lower_bound():
    ms = np.arange(2, 10_001, dtype=float)
    cp = (2 * ms + 1) + 2 * np.sqrt(ms * (ms + 1))
    assert np.all(cp >= 4 * ms + 2 * math.sqrt(6) - 3)
    for m in (2, 3, 22, 1000):
        assert abs(critical_data(m).cp_Q1 - cp[m - 2]) <= 1e-12 * cp[m - 2]


def test_large_m_is_stored_in_logs():
    cd = critical_data(400)
    assert math.isfinite(cd.log_cv_Q)
    sc = structural_constants(400)
    assert sc.R is None and sc.R1 is None
    assert abs(sc.log_R - (math.log(2.66) + 400 * math.log(10))) < 1e-9


def test_q_remainder_examples():
    assert abs(q_remainder(2, 1e6)) < 1e-3
    assert abs(q_remainder(3, 13)) <= q2_max(3, 13)
    direct = eval_Q(2, -20) - (-20) - 10 - 49 / (-20)
    assert abs(q_remainder(2, -20) - direct) < 1e-10
    with pytest.raises(ValueError):
        q_remainder(2, 0.5)


def test_q2_max_addends():
    got3 = q2_max_terms(3, 7 + 4 * math.sqrt(3))
    for g, p in zip(got3, [0.88856, 0.266568, 0.137461, 2.55277]):
        assert abs(g - p) < 1e-4
    got4 = q2_max_terms(4, 9 + 4 * math.sqrt(5))
    for g, p in zip(got4, [1.47343, 0.21049, 0.339677, 3.04763]):
        assert abs(g - p) < 1e-4
    assert q2_max(2, 1e9) < 1e-6
    with pytest.raises(ValueError):
        q2_max(2, 1.0)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_q2_max_bounds_remainder_on_circles(m):
    for r in (4 * m + 1, 10 * m, 100 * m):
        z = r * np.exp(2j * np.pi * np.arange(64) / 64)
        assert np.max(np.abs(q_remainder(m, z))) <= q2_max(m, r)


def test_psi_examples():
    assert psi_maps(-4, "psi0") == 1
    assert psi_maps(1, "psi1") == -1
    w = psi_maps(-1 + 1j, "psi1_inv_plus")
    assert abs(w) > 1
    assert abs(psi_maps(w, "psi1") - (-1 + 1j)) < 1e-12
    v = psi_maps(-1 + 1j, "psi1_inv_minus")
    assert abs(v) < 1
    assert abs(psi_maps(v, "psi1") - (-1 + 1j)) < 1e-12
    with pytest.raises(ZeroDivisionError):
        psi_maps(0, "psi0")
    with pytest.raises(ZeroDivisionError):
        psi_maps(-1, "psi1")
    with pytest.raises(ValueError):
        psi_maps(-2, "psi1_inv_plus")
    with pytest.raises(ValueError):
        psi_maps(1, "nope")


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_psi1_inverse_branches_round_trip(x, y):
    z = complex(x, y)
    if (y == 0 and x <= -1) or abs(z) < 1e-6 or abs(z + 1) < 1e-3:
        return
    for which, outside in (("psi1_inv_plus", True), ("psi1_inv_minus", False)):
        w = psi_maps(z, which)
        assert (abs(w) >= 1 - 1e-9) if outside else (abs(w) <= 1 + 1e-9)
        assert abs(psi_maps(w, "psi1") - z) <= 1e-9 * (1 + abs(z))


@pytest.mark.parametrize("m", [2, 3, 5, 22])
def test_Q_is_conjugate_of_P(m):
    rng = np.random.default_rng(m)
    r = rng.uniform(1.5, 50, 200)
    t = rng.uniform(-math.pi, math.pi, 200)
    z = r * np.exp(1j * t)
    z = z[np.abs(np.angle(z)) < math.pi - 1e-3]
    for zz in z:
        via = psi_maps(eval_P(m, psi_maps(zz, "psi1")), "psi0_inv")
        q = eval_Q(m, zz)
        assert abs(q - via) < 1e-9 * (1 + abs(q))


@pytest.mark.parametrize("m", [2, 3, 5, 22])
def test_derivative_factorization(m):
    rng = np.random.default_rng(100 + m)
    z = rng.uniform(1.5, 50, 100) * np.exp(1j * rng.uniform(-3, 3, 100))
    h = 1e-6
    for zz in z:
        fd = (eval_Q(m, zz + h * abs(zz)) - eval_Q(m, zz - h * abs(zz))) / (2 * h * abs(zz))
        closed = dQ_factored(m, zz)
        assert abs(fd - closed) <= 1e-6 * abs(closed) + 1e-9 * abs(eval_Q(m, zz))
        assert abs(eval_dQ(m, zz) - closed) <= 1e-10 * abs(closed)


def test_sector_examples():
    s = Sector(0, math.pi / 5)
    assert sector_contains(s, 1)
    assert not sector_contains(s, 1j)
    assert not sector_contains(s, 0)
    with pytest.raises(ValueError):
        Sector(0, 0)


def test_sector_maps_into_sector_m5():
    m = 5
    src = Sector((4 * math.e - 1) * m, math.pi / 5)
    dst = Sector(critical_data(m).cv_Q, math.pi / 5)
    t = np.geomspace(1e-6, 1e4 - src.vertex, 50)
    pts = src.boundary(t)
    assert len(pts) == 100
    assert np.all(dst.contains(eval_Q(m, pts)))


@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0.05, 3.0))
def test_sector_contains_is_principal_arg(x, y, half):
    s = Sector(0.5 - 0.25j, half)
    z = complex(x, y)
    d = z - s.vertex
    expected = d != 0 and abs(cmath.phase(d)) < half
    assert s.contains(z) == expected


@given(st.floats(1.0, 5.0), st.floats(0, 2 * math.pi))
def test_ellipse_boundary_on_ellipse(r, theta):
    E = EllipseSpec(r=r)
    z = E.zeta(r * cmath.exp(1j * theta))
    assert abs(E.implicit(z)) < 1e-12


def test_ellipse_axes():
    E = EllipseSpec(r=1.0)
    assert abs(E.a - 1.44) < 1e-15 and abs(E.b - 0.24) < 1e-15
    with pytest.raises(ValueError):
        EllipseSpec(r=0.5)
    with pytest.raises(ValueError):
        EllipseSpec(e1=0.5, em1=0.5, r=1.0)


def test_structural_constants():
    assert structural_constants(22).eta > 20.38
    sc = structural_constants(3)
    assert abs(sc.R - 2660) < 1e-9 and abs(sc.R1 - 2390) < 1e-9
    for m in (2, 7, 300):
        assert structural_constants(m).rho == 0.07
