"""Parabolic explosion of cycles for P_{p/q + delta^q}.

The q-fold iterate of P_{p/q} is tangent to the identity:

    P_{p/q}^q(z) = z + A(p/q) z^{q+1} + O(z^{q+2}),

and the period-q cycle born at 0 is parametrised by delta through a
function chi with chi(0) = 0 and chi'(0)^q = -2 pi i q / A(p/q).  This
module carries a small truncated power-series type (also used to extract
the iterative residue for the Fatou coordinates), the coefficient A, a
Newton continuation for chi, and the model sets X_n(rho) and coverings
pi_n attached to the vector field 2 pi i q z (eps - z^q) d/dz.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from math import comb, gcd

import numpy as np

from .family import eval_P, eval_dP

__all__ = [
    "TruncatedSeries",
    "ContinuationFailed",
    "CycleFunction",
    "PerturbedSiegelSet",
    "family_series",
    "series_iterate",
    "explosion_coefficient",
    "chi_prime0",
    "normalization_factor",
    "iterate_with_derivative",
    "chi_continuation",
    "cycle_function",
    "explosion_radius_probe",
    "xn_membership",
    "pi_n",
    "tau_n",
    "xi_n",
]

DEFAULT_ORDER = 64


class TruncatedSeries:
    """Complex power series c_0 + c_1 z + ... + c_K z^K modulo z^{K+1}."""

    __slots__ = ("c",)

    def __init__(self, coeffs, K: int | None = None):
        coeffs = np.asarray(coeffs, dtype=complex).ravel()
        if K is None:
            K = len(coeffs) - 1
        c = np.zeros(K + 1, dtype=complex)
        n = min(len(coeffs), K + 1)
        c[:n] = coeffs[:n]
        self.c = c

    @classmethod
    def identity(cls, K: int = DEFAULT_ORDER):
        return cls([0, 1], K)

    @classmethod
    def constant(cls, value, K: int = DEFAULT_ORDER):
        return cls([value], K)

    @property
    def K(self) -> int:
        return len(self.c) - 1

    def __getitem__(self, k):
        return self.c[k]

    def __len__(self):
        return len(self.c)

    def __repr__(self):
        nz = [f"({v:.6g})z^{k}" for k, v in enumerate(self.c) if v != 0][:6]
        return f"TruncatedSeries(K={self.K}: {' + '.join(nz) or '0'}{' + ...' if len(nz) == 6 else ''})"

    def _coerce(self, other):
        if isinstance(other, TruncatedSeries):
            K = min(self.K, other.K)
            return self.c[: K + 1], other.c[: K + 1], K
        return None

    def __add__(self, other):
        co = self._coerce(other)
        if co is None:
            c = self.c.copy()
            c[0] += other
            return TruncatedSeries(c)
        a, b, K = co
        return TruncatedSeries(a + b)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(-self.c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        co = self._coerce(other)
        if co is None:
            return TruncatedSeries(self.c * other)
        a, b, K = co
        return TruncatedSeries(np.convolve(a, b)[: K + 1])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.reciprocal()
        return TruncatedSeries(self.c / other)

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise ValueError("only non-negative integer powers")
        result = TruncatedSeries.constant(1, self.K)
        base = self
        n = int(n)
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __call__(self, z):
        """Evaluate the polynomial part at z (Horner)."""
        acc = 0 * z + self.c[-1]
        for v in self.c[-2::-1]:
            acc = acc * z + v
        return acc

    def compose(self, inner: "TruncatedSeries") -> "TruncatedSeries":
        """self(inner(z)); inner must have zero constant term."""
        if inner.c[0] != 0:
            raise ValueError("composition needs an inner series with c_0 = 0")
        K = min(self.K, inner.K)
        inner = TruncatedSeries(inner.c, K)
        acc = TruncatedSeries.constant(self.c[K], K)
        for v in self.c[K - 1 :: -1]:
            acc = acc * inner + v
        return acc

    def reciprocal(self) -> "TruncatedSeries":
        c = self.c
        if c[0] == 0:
            raise ZeroDivisionError("series with zero constant term is not invertible")
        K = self.K
        out = np.zeros(K + 1, dtype=complex)
        out[0] = 1 / c[0]
        for n in range(1, K + 1):
            out[n] = -np.dot(c[1 : n + 1], out[n - 1 :: -1][:n]) / c[0]
        return TruncatedSeries(out)

    def derivative(self) -> "TruncatedSeries":
        k = np.arange(1, self.K + 1)
        return TruncatedSeries(np.append(self.c[1:] * k, 0))

    def integral(self, constant=0) -> "TruncatedSeries":
        k = np.arange(1, self.K + 1)
        return TruncatedSeries(np.concatenate([[constant], self.c[:-1] / k]))

    def log(self) -> "TruncatedSeries":
        """Principal log of c_0 plus the integral of s'/s."""
        if self.c[0] == 0:
            raise ValueError("log needs a nonzero constant term")
        return (self.derivative() * self.reciprocal()).integral(cmath.log(self.c[0]))

    def shift_down(self, k: int) -> "TruncatedSeries":
        """Divide by z^k; the first k coefficients must vanish."""
        if np.any(self.c[:k] != 0):
            raise ValueError("low-order coefficients are not zero")
        return TruncatedSeries(self.c[k:], self.K)


def family_series(m: int, alpha=0.0, K: int = DEFAULT_ORDER) -> TruncatedSeries:
    """e^{2 pi i alpha} z (1+z)^m as a series (exact up to degree m+1)."""
    lam = cmath.exp(2j * math.pi * alpha) if alpha != 0 else 1.0
    c = np.zeros(K + 1, dtype=complex)
    for j in range(0, min(m, K - 1) + 1):
        c[j + 1] = lam * comb(m, j)
    return TruncatedSeries(c)


def _rotation(p: int, q: int) -> complex:
    # exact values where the floating exponential would leave dust
    r = p % q
    if r == 0:
        return 1.0 + 0j
    if 2 * r == q:
        return -1.0 + 0j
    return cmath.exp(2j * math.pi * p / q)


def series_iterate(m: int, p: int, q: int, K: int = DEFAULT_ORDER, tol: float = 1e-10) -> TruncatedSeries:
    """Series of P_{p/q}^q; checks that z^2..z^q vanish."""
    if q < 1 or gcd(p, q) != 1:
        raise ValueError("need q >= 1 and gcd(p, q) = 1")
    if K < q + 2:
        raise ValueError("truncation order K must be at least q + 2")
    lam = _rotation(p, q)
    base = TruncatedSeries(np.zeros(K + 1), K)
    for j in range(0, min(m, K - 1) + 1):
        base.c[j + 1] = lam * comb(m, j)
    s = TruncatedSeries.identity(K)
    for _ in range(q):
        s = base.compose(s)
    low = s.c[2 : q + 1]
    scale = max(1.0, float(np.max(np.abs(s.c[: q + 2]))))
    if low.size and np.max(np.abs(low)) > tol * scale:
        raise ArithmeticError(f"low-order coefficients do not vanish: {low}")
    if abs(s.c[1] - 1) > tol:
        raise ArithmeticError("linear coefficient of the q-th iterate is not 1")
    return s


def explosion_coefficient(m: int, p: int, q: int) -> complex:
    """A(p/q): coefficient of z^{q+1} in P_{p/q}^q."""
    A = complex(series_iterate(m, p, q, K=q + 2).c[q + 1])
    if A == 0:
        raise ArithmeticError("A(p/q) vanished; series failure")
    return A


def chi_prime0(m: int, p: int, q: int) -> complex:
    """Principal q-th root of -2 pi i q / A(p/q)."""
    A = explosion_coefficient(m, p, q)
    return (-2j * math.pi * q / A) ** (1.0 / q)


def normalization_factor(m: int, p: int, q: int) -> complex:
    """-A/(2 pi i q): with alpha = p/q + factor*delta^q one gets chi'(0)^q = 1."""
    A = explosion_coefficient(m, p, q)
    return -A / (2j * math.pi * q)


def iterate_with_derivative(m: int, alpha: complex, z: complex, n: int):
    """(P_alpha^n(z), (P_alpha^n)'(z)) with the chain rule accumulated."""
    return _iterate(m, cmath.exp(2j * math.pi * alpha), z, n)


def _multiplier(p: int, q: int, delta: complex) -> complex:
    # e^{2 pi i (p/q + delta^q)} without rounding delta^q against p/q
    return _rotation(p, q) * cmath.exp(2j * math.pi * complex(delta) ** q)


def _iterate(m, lam, z, n):
    d = 1.0 + 0j
    for _ in range(n):
        d *= lam * eval_dP(m, z)
        z = lam * eval_P(m, z)
    return z, d


class ContinuationFailed(RuntimeError):
    def __init__(self, message, last_good_delta):
        super().__init__(message)
        self.last_good_delta = last_good_delta


def _newton_cycle(m, lam, q, z, maxit=60):
    for _ in range(maxit):
        g, d = _iterate(m, lam, z, q)
        denom = d - 1
        if denom == 0 or not cmath.isfinite(g):
            return None
        step = (g - z) / denom
        z = z - step
        if not cmath.isfinite(z):
            return None
        if abs(step) <= 4e-16 * max(abs(z), 1e-300):
            return z
    g, _ = _iterate(m, lam, z, q)
    if abs(g - z) <= 1e-13 * max(abs(z), 1e-300):
        return z
    return None


def _full_cycle(m, lam, q, z0):
    pts = [z0]
    for _ in range(q - 1):
        pts.append(lam * eval_P(m, pts[-1]))
    return pts


def chi_continuation(m: int, p: int, q: int, delta: complex, step_control: float = 1.25,
                     max_halvings: int = 40, start_fraction: float = 1e-3) -> list:
    """Cycle chi(delta), P(chi(delta)), ... of P_alpha, alpha = p/q + delta^q.

    The point is followed along the ray from |delta| * start_fraction out to
    delta, Newton-solving P_alpha^q(z) = z at each step.
    """
    delta = complex(delta)
    if delta == 0:
        return [0j] * q
    rmax = 0.9 * q ** (-3.0 / q)
    if abs(delta) >= rmax * (1 + 1e-12):
        raise ValueError(f"|delta| must be below {rmax:.6g}")
    return _continue(m, p, q, delta, step_control, max_halvings, start_fraction)


def _continue(m, p, q, delta, step_control, max_halvings, start_fraction):
    c0 = chi_prime0(m, p, q)
    r_end = abs(delta)
    u = delta / r_end
    zeta = _rotation(p, q)
    sep = abs(1 - zeta) if q > 1 else 1.0

    def lam_at(r):
        return _multiplier(p, q, r * u)

    # Below |delta|^q ~ 1e-9 the equation P^q(z) = z is lost in rounding
    # (P^q(z) - z is of relative size |z|^q), so the path never starts lower.
    r = min(r_end, max(r_end * start_fraction, 1e-9 ** (1.0 / q)))
    z = _newton_cycle(m, lam_at(r), q, c0 * r * u)
    if z is None or abs(z - c0 * r * u) > 0.3 * sep * abs(c0 * r):
        raise ContinuationFailed("could not seed the continuation", 0j)
    halvings = 0
    while r < r_end:
        r_new = min(r * step_control, r_end)
        while True:
            pred = z * (r_new / r)
            z_new = _newton_cycle(m, lam_at(r_new), q, pred)
            ok = (z_new is not None and z_new != 0
                  and abs(z_new - pred) <= 0.3 * sep * abs(pred))
            if ok and q > 1:
                pts = _full_cycle(m, lam_at(r_new), q, z_new)
                gaps = [abs(a - b) for i, a in enumerate(pts) for b in pts[i + 1:]]
                ok = min(gaps) > 0
            if ok:
                break
            halvings += 1
            if halvings > max_halvings:
                raise ContinuationFailed(f"continuation failed near |delta|={r:.6g}", r * u)
            r_new = r + (r_new - r) / 2
        r, z = r_new, z_new
    lam = lam_at(r_end)
    pts = _full_cycle(m, lam, q, z)
    for w in pts:
        g, _ = _iterate(m, lam, w, q)
        if abs(g - w) >= 1e-10:
            raise ContinuationFailed("cycle residual above 1e-10", r_end * u)
    return pts


@dataclass
class CycleFunction:
    """chi for a given p/q and m, with the samples evaluated so far."""

    p: int
    q: int
    m: int
    A: complex
    chi_prime0: complex
    branch: int = 0
    samples: list = field(default_factory=list)

    def alpha(self, delta) -> complex:
        return self.p / self.q + complex(delta) ** self.q

    def __call__(self, delta, step_control: float = 1.25) -> list:
        pts = chi_continuation(self.m, self.p, self.q, delta, step_control)
        self.samples.append((complex(delta), pts))
        return pts

    def rotation(self, delta) -> complex:
        """e^{2 pi i alpha} for alpha = p/q + delta^q."""
        return _multiplier(self.p, self.q, delta)

    def residual(self, delta, cycle) -> float:
        lam = self.rotation(delta)
        return max(abs(_iterate(self.m, lam, z, self.q)[0] - z) for z in cycle)

    def multiplier(self, delta, cycle) -> complex:
        return _iterate(self.m, self.rotation(delta), cycle[0], self.q)[1]


def cycle_function(m: int, p: int, q: int) -> CycleFunction:
    A = explosion_coefficient(m, p, q)
    return CycleFunction(p=p, q=q, m=m, A=A, chi_prime0=chi_prime0(m, p, q))


def explosion_radius_probe(m: int, p: int, q: int, directions: int = 16,
                           reach: float = 1.5, step_control: float = 1.25) -> dict:
    """Largest |delta| reached by radial continuation in every direction.

    Each ray is followed out to ``reach`` times the floor q^{-3/q}; the
    probe is the smallest radius reached over all rays.
    """
    if q > 8:
        raise ValueError("probe is limited to q <= 8")
    floor = q ** (-3.0 / q)
    target = reach * floor
    reached = []
    for k in range(directions):
        u = cmath.exp(2j * math.pi * k / directions)
        try:
            _continue(m, p, q, target * u, step_control, 40, 1e-3)
            reached.append(target)
        except ContinuationFailed as exc:
            reached.append(abs(exc.last_good_delta))
    return {
        "m": m, "p": p, "q": q,
        "probe": min(reached),
        "per_direction": reached,
        "floor": floor,
        "ratio": min(reached) / floor,
    }


@dataclass(frozen=True)
class PerturbedSiegelSet:
    """X_n(rho) = {z : |z^q/(z^q - eps)| < s},  s = rho^q/(rho^q + |eps|)."""

    q_n: int
    eps_n: float
    rho: float

    def __post_init__(self):
        if self.q_n < 1 or self.eps_n == 0 or not 0 < self.rho:
            raise ValueError("need q_n >= 1, eps_n != 0, rho > 0")

    @property
    def s_n(self) -> float:
        rq = self.rho ** self.q_n
        return rq / (rq + abs(self.eps_n))

    def invariant(self, z):
        zq = np.asarray(z, dtype=complex) ** self.q_n
        return zq / (zq - self.eps_n)


def xn_membership(xset: PerturbedSiegelSet, z, with_flag: bool = False):
    """Membership in X_n(rho); the pole z^q = eps counts as outside."""
    zq = complex(z) ** xset.q_n
    if zq == xset.eps_n:
        return (False, True) if with_flag else False
    inside = abs(zq / (zq - xset.eps_n)) < xset.s_n
    return (inside, False) if with_flag else inside


def tau_n(xset: PerturbedSiegelSet, r: float) -> float:
    """Height above which pi_n lands in X_n(r): log(1+|eps|/r^q)/(2 pi q^2 |eps|)."""
    q, e = xset.q_n, abs(xset.eps_n)
    return math.log1p(e / r ** q) / (2 * math.pi * q * q * e)


def pi_n(xset: PerturbedSiegelSet, Z: complex, branch: int = 0) -> complex:
    """Covering pi_n(Z) = psi_n^{-1}(e^{2 pi i q eps Z}).

    Needs |e^{2 pi i q eps Z}| < 1, i.e. eps * Im Z > 0.  The root is taken as
    zeta^branch * (-eps)^{1/q} * theta * (1 - theta^q)^{-1/q} with principal
    roots, which is holomorphic on that half-plane.
    """
    q, eps = xset.q_n, xset.eps_n
    theta = cmath.exp(2j * math.pi * q * eps * complex(Z))
    tq = theta ** q
    if abs(theta) >= 1:
        raise ValueError("pi_n needs eps * Im Z > 0")
    if tq == 1:
        raise ZeroDivisionError("pole of the covering")
    root = complex(-eps) ** (1.0 / q)
    return cmath.exp(2j * math.pi * branch / q) * root * theta * (1 - tq) ** (-1.0 / q)


def xi_n(xset: PerturbedSiegelSet, z):
    """The vector field 2 pi i q z (eps - z^q)."""
    return 2j * math.pi * xset.q_n * z * (xset.eps_n - z ** xset.q_n)
