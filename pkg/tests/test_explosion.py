import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from siegelkit.explosion import (
    ContinuationFailed, PerturbedSiegelSet, TruncatedSeries, chi_continuation,
    chi_prime0, cycle_function, explosion_coefficient, explosion_radius_probe,
    family_series, normalization_factor, pi_n, series_iterate, tau_n,
    xi_n, xn_membership,
)
from siegelkit.family import eval_P_alpha, FamilyParams

small_ints = st.lists(st.integers(-5, 5), min_size=1, max_size=9)


@given(small_ints, small_ints, small_ints)
def test_series_product_associative_exactly(a, b, c):
    K = 8
    s, t, u = (TruncatedSeries(x, K) for x in (a, b, c))
    assert np.array_equal(((s * t) * u).c, (s * (t * u)).c)


@given(small_ints, small_ints, small_ints)
def test_series_composition_associative(a, b, c):
    K = 8
    s = TruncatedSeries(np.array(a) / 5, K)
    t = TruncatedSeries([0] + list(np.array(b) / 5), K)
    u = TruncatedSeries([0] + list(np.array(c) / 5), K)
    lhs = s.compose(t).compose(u)
    rhs = s.compose(t.compose(u))
    assert np.allclose(lhs.c, rhs.c, atol=1e-12, rtol=1e-12)


def test_compose_rejects_constant_term():
    s = TruncatedSeries([1, 2, 3], 5)
    with pytest.raises(ValueError):
        s.compose(TruncatedSeries([1, 1], 5))


def test_series_helpers():
    x = TruncatedSeries.identity(10)
    one_plus = x + 1
    inv = one_plus.reciprocal()
    assert np.allclose(inv.c, [(-1) ** k for k in range(11)])
    lg = one_plus.log()
    assert np.allclose(lg.c[1:], [(-1) ** (k + 1) / k for k in range(1, 11)])
    assert abs(one_plus.derivative().c[0] - 1) == 0
    with pytest.raises(ZeroDivisionError):
        x.reciprocal()
    assert np.allclose((x ** 3).shift_down(3).c[:1], [1])


def test_family_series_coefficients():
    s = family_series(3, 0, K=8)
    assert np.allclose(s.c[:5], [0, 1, 3, 3, 1])


@pytest.mark.parametrize("m", [2, 3, 5, 22])
def test_A_rotation_zero_is_m(m):
    assert abs(explosion_coefficient(m, 0, 1) - m) < 1e-12


def test_A_one_half():
    base = np.poly1d([-1, -2, -1, 0])  # P_{1/2}(z) = -z - 2z^2 - z^3
    comp = base(base)
    assert comp.coeffs[-4] == -6  # z^3 coefficient
    assert abs(explosion_coefficient(2, 1, 2) - (-6)) < 1e-12


def test_A_one_third_value():
    A = explosion_coefficient(2, 1, 3)
    assert abs(A - (21 + 3 * math.sqrt(3) * 1j)) < 1e-9


@pytest.mark.parametrize("m,p,q", [(2, 1, 2), (2, 1, 3), (3, 2, 5), (2, 3, 7), (5, 1, 4)])
def test_low_order_coefficients_vanish(m, p, q):
    s = series_iterate(m, p, q, K=q + 4)
    assert np.max(np.abs(s.c[2 : q + 1])) < 1e-10
    assert abs(s.c[1] - 1) < 1e-12
    assert s.c[q + 1] != 0


def test_series_iterate_validation():
    with pytest.raises(ValueError):
        series_iterate(2, 2, 4)
    with pytest.raises(ValueError):
        series_iterate(2, 1, 3, K=4)


def test_chi_prime0_examples():
    for m in (2, 3, 7):
        assert abs(chi_prime0(m, 0, 1) - (-2j * math.pi / m)) < 1e-12
    c = chi_prime0(2, 1, 2)
    assert abs(c ** 2 - 2j * math.pi / 3) < 1e-12
    assert abs(abs(c) - math.sqrt(2 * math.pi / 3)) < 1e-12


def test_normalization_factor_gives_unit_derivative():
    for m, p, q in [(2, 1, 2), (2, 1, 3), (3, 0, 1)]:
        f = normalization_factor(m, p, q)
        assert abs(chi_prime0(m, p, q) ** q * f - 1) < 1e-12


def test_cycle_matches_polynomial_roots():
    delta = 0.05
    cyc = chi_continuation(2, 1, 2, delta)
    alpha = 0.5 + delta ** 2
    lam = cmath.exp(2j * math.pi * alpha)
    P = np.poly1d([lam, 2 * lam, lam, 0])
    g = P(P) - np.poly1d([1, 0])
    roots = g.roots
    assert g.order == 9
    # the fixed points of P_alpha itself are 0 and the roots of lam (1+z)^2 = 1
    fixed = [0, cmath.sqrt(1 / lam) - 1, -cmath.sqrt(1 / lam) - 1]
    assert abs(cyc[0] - cyc[1]) > 1e-3
    for z in cyc:
        assert min(abs(roots - z)) < 1e-8
        assert min(abs(np.array(fixed) - z)) > 1e-3
        w = eval_P_alpha(FamilyParams(2, alpha), eval_P_alpha(FamilyParams(2, alpha), z))
        assert abs(w - z) < 1e-10


@pytest.mark.parametrize("m,p,q", [(2, 0, 1), (2, 1, 2), (2, 1, 3), (3, 1, 3)])
def test_equivariance(m, p, q):
    zeta = cmath.exp(2j * math.pi * p / q)
    rmax = 0.9 * q ** (-3 / q)
    for d in (0.3 * rmax * cmath.exp(0.4j), 0.6 * rmax * cmath.exp(2.1j)):
        cyc = chi_continuation(m, p, q, d)
        alpha = p / q + d ** q
        nxt = chi_continuation(m, p, q, zeta * d)
        lam = cmath.exp(2j * math.pi * alpha)
        image = lam * cyc[0] * (1 + cyc[0]) ** m
        assert abs(nxt[0] - image) < 1e-9


@pytest.mark.parametrize("m,p,q", [(2, 0, 1), (2, 1, 2), (2, 1, 3)])
def test_small_delta_slope(m, p, q):
    c0 = abs(chi_prime0(m, p, q))
    for r in (1e-3, 1e-2):
        cyc = chi_continuation(m, p, q, r * cmath.exp(0.7j))
        slope = max(abs(z) for z in cyc) / r
        assert abs(slope / c0 - 1) < 0.02


def test_finite_difference_derivative_at_small_delta():
    m, p, q = 2, 1, 2
    d, h = 1e-4, 1e-6
    u = cmath.exp(0.3j)
    a = chi_continuation(m, p, q, d * u)[0]
    b = chi_continuation(m, p, q, (d + h) * u)[0]
    slope = (b - a) / (h * u)
    c0 = chi_prime0(m, p, q)
    assert abs(slope - c0) < 1e-3 * abs(c0)


def test_conjugate_symmetry():
    # conj(P_alpha) = P_{-conj(alpha)}; for q = 2 this maps delta to i conj(delta)
    m, p, q = 2, 1, 2
    for d in (0.1, 0.2 * cmath.exp(0.5j)):
        cyc = chi_continuation(m, p, q, d)
        mirror = chi_continuation(m, p, q, 1j * complex(d).conjugate())
        conj = sorted((z.conjugate() for z in cyc), key=lambda z: (z.real, z.imag))
        mirror = sorted(mirror, key=lambda z: (z.real, z.imag))
        assert np.allclose(conj, mirror, atol=1e-10)
    for d in (0.2, 0.5):
        cyc = chi_continuation(m, 0, 1, d)
        mirror = chi_continuation(m, 0, 1, -d)
        assert abs(cyc[0].conjugate() - mirror[0]) < 1e-10


def test_cycle_function_samples_are_nondegenerate():
    cf = cycle_function(2, 1, 3)
    for d in (0.05, 0.1 * 1j, 0.2 * cmath.exp(1j)):
        cf(d)
    for d, cyc in cf.samples:
        assert len(cyc) == 3
        assert cf.residual(d, cyc) < 1e-10
        assert abs(cf.multiplier(d, cyc) - 1) > 1e-6
        assert min(abs(a - b) for i, a in enumerate(cyc) for b in cyc[i + 1:]) > 0


def test_continuation_domain():
    with pytest.raises(ValueError):
        chi_continuation(2, 1, 2, 0.9 * 2 ** -1.5 * 1.01)
    assert chi_continuation(2, 1, 2, 0) == [0j, 0j]


@pytest.mark.parametrize("p,q", [(0, 1), (1, 2), (1, 3)])
def test_radius_probe(p, q):
    res = explosion_radius_probe(2, p, q)
    assert res["probe"] * q ** (3 / q) >= 0.9
    assert res["floor"] == pytest.approx(q ** (-3 / q))


def test_probe_limited_to_small_q():
    with pytest.raises(ValueError):
        explosion_radius_probe(2, 1, 9)


def test_continuation_failed_carries_last_delta():
    exc = ContinuationFailed("x", 0.25)
    assert exc.last_good_delta == 0.25


def test_xn_membership_examples():
    X = PerturbedSiegelSet(q_n=3, eps_n=1e-3, rho=0.07)
    assert xn_membership(X, 0)
    z = X.rho * cmath.exp(1j * math.pi / 3)  # z^3 = -rho^3
    assert abs(abs(X.invariant(z)) - X.s_n) < 1e-12
    half = (X.eps_n / 2) ** (1 / 3)
    assert abs(abs(X.invariant(half)) - 1) < 1e-12
    assert not xn_membership(X, half)
    inside, flag = xn_membership(PerturbedSiegelSet(1, 0.5, 0.07), 0.5, with_flag=True)
    assert not inside and flag
    assert 0 < X.s_n < 1
    with pytest.raises(ValueError):
        PerturbedSiegelSet(3, 0.0, 0.07)


@pytest.mark.parametrize("q,eps", [(1, 0.01), (3, 2e-3), (5, -1e-4)])
def test_pi_n_geometry(q, eps):
    X = PerturbedSiegelSet(q_n=q, eps_n=eps, rho=0.07)
    period = 1 / (q * eps)
    h = 2 * tau_n(X, 0.07)
    Z = 0.3 * period + 1j * math.copysign(h, eps)
    w0 = pi_n(X, Z)
    assert abs(pi_n(X, Z + period) - w0) < 1e-10 * max(1, abs(w0))
    inner = PerturbedSiegelSet(q, eps, 1 - 1e-12)
    assert xn_membership(inner, w0)
    assert xn_membership(X, w0)
    step = 1e-6 * abs(period)
    fd = (pi_n(X, Z + step) - pi_n(X, Z - step)) / (2 * step)
    assert abs(fd / xi_n(X, w0) - 1) < 1e-4


def test_pi_n_rejects_wrong_half_plane():
    X = PerturbedSiegelSet(q_n=2, eps_n=1e-2, rho=0.07)
    with pytest.raises(ValueError):
        pi_n(X, -1j)
