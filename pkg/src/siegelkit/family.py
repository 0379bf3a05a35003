"""The polynomial family P_alpha(z) = e^{2 pi i alpha} z (1+z)^m and its companions.

Besides P and P_alpha this module holds the rational map

    Q(z) = (1+z)^{2m+2} / (z (1-z)^{2m}),

which is P seen through the coordinate changes psi0(z) = -4/z and
psi1(z) = -4z/(1+z)^2, i.e. Q = psi0^{-1} o P o psi1.  Critical data,
the Joukowski-type ellipse used by the estimate ledger, principal-branch
sectors and a handful of closed-form constants live here too.

Everything is a pure function of its arguments.  Scalars and numpy arrays
are both accepted wherever it makes sense.
"""
from __future__ import annotations

import math
import cmath
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

__all__ = [
    "FamilyParams",
    "CriticalData",
    "EllipseSpec",
    "Sector",
    "StructuralConstants",
    "ipow",
    "eval_P",
    "eval_dP",
    "eval_P_alpha",
    "eval_dP_alpha",
    "eval_Q",
    "eval_dQ",
    "dQ_factored",
    "critical_data",
    "cv_P_exact",
    "q_remainder",
    "q2_max",
    "q2_max_terms",
    "psi_maps",
    "sector_contains",
    "structural_constants",
]


def ipow(base, n: int):
    """base**n for a non-negative integer n by repeated squaring."""
    if n < 0:
        raise ValueError("negative exponent")
    result = np.ones_like(base) if isinstance(base, np.ndarray) else 1
    b = base
    while n:
        if n & 1:
            result = result * b
        n >>= 1
        if n:
            b = b * b
    return result


@dataclass(frozen=True)
class FamilyParams:
    """Degree parameter m and (possibly complex) rotation number alpha."""

    m: int
    alpha: complex = 0.0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 2:
            raise ValueError(f"m must be an integer >= 2, got {self.m!r}")

    @property
    def multiplier(self) -> complex:
        return cmath.exp(2j * math.pi * complex(self.alpha))

    def __call__(self, z):
        return eval_P_alpha(self, z)

    def derivative(self, z):
        return eval_dP_alpha(self, z)


def _check_m(m):
    if int(m) != m or m < 2:
        raise ValueError(f"m must be an integer >= 2, got {m!r}")


def eval_P(m: int, z):
    """P(z) = z (1+z)^m."""
    return z * ipow(1 + z, int(m))


def eval_dP(m: int, z):
    """P'(z) = (1+z)^{m-1} (1 + (m+1) z)."""
    return ipow(1 + z, int(m) - 1) * (1 + (m + 1) * z)


def eval_P_alpha(params: FamilyParams, z):
    return params.multiplier * eval_P(params.m, z)


def eval_dP_alpha(params: FamilyParams, z):
    return params.multiplier * eval_dP(params.m, z)


def eval_Q(m: int, z):
    """Q(z) = (1+z)^{2m+2} / (z (1-z)^{2m}); poles at 0 and 1."""
    if np.any(np.asarray(z) == 0) or np.any(np.asarray(z) == 1):
        raise ZeroDivisionError("Q has poles at z = 0 and z = 1")
    return ipow(1 + z, 2 * m + 2) / (z * ipow(1 - z, 2 * m))


def dQ_factored(m: int, z):
    """Q'(z) as (1 - cp1/z)(1 - cp2/z)((1+1/z)/(1-1/z))^{2m+1}."""
    cd = critical_data(m)
    return (1 - cd.cp_Q1 / z) * (1 - cd.cp_Q2 / z) * ipow((1 + 1 / z) / (1 - 1 / z), 2 * m + 1)


def eval_dQ(m: int, z):
    """Q'(z) by logarithmic differentiation of the product form."""
    return eval_Q(m, z) * ((2 * m + 2) / (1 + z) - 1 / z + 2 * m / (1 - z))


@dataclass(frozen=True)
class CriticalData:
    m: int
    cp_P: float
    cv_P: float
    cp_Q1: float
    cp_Q2: float
    cv_Q: float
    log_cv_Q: float


def cv_P_exact(m: int) -> Fraction:
    """-m^m/(m+1)^{m+1} as an exact rational."""
    _check_m(m)
    return Fraction(-(m ** m), (m + 1) ** (m + 1))


def critical_data(m: int) -> CriticalData:
    _check_m(m)
    s = math.sqrt(m + 1)
    t = math.sqrt(m)
    # (s+t)^2 = 2m+1+2 sqrt(m(m+1)); the small root is its reciprocal, which
    # avoids the cancellation in (s-t)^2.
    cp1 = (2 * m + 1) + 2 * math.sqrt(m * (m + 1))
    cp2 = 1.0 / cp1
    log_cvq = math.log(4) + (m + 1) * math.log(m + 1) - m * math.log(m)
    cvq = math.exp(log_cvq) if log_cvq < 700 else math.inf
    if m < 600:
        cvq = 4.0 * (m + 1) * ((m + 1) / m) ** m
    return CriticalData(
        m=m,
        cp_P=-1.0 / (m + 1),
        cv_P=float(cv_P_exact(m)) if m < 200 else -((m / (m + 1)) ** m) / (m + 1),
        cp_Q1=cp1,
        cp_Q2=cp2,
        cv_Q=cvq,
        log_cv_Q=log_cvq,
    )


def q_remainder(m: int, z):
    """Q2(z) = Q(z) - z - (4m+2) - (8m(m+1)+1)/z, for |z| > 1."""
    if np.any(np.abs(np.asarray(z)) <= 1):
        raise ValueError("q_remainder needs |z| > 1")
    return eval_Q(m, z) - z - (4 * m + 2) - (8 * m * (m + 1) + 1) / z


def q2_max_terms(m: int, r: float) -> tuple[float, float, float, float]:
    """The four addends of the upper bound for |Q2| on |z| = r.

    The first two together form the 1/(r(r-1)) term; they are kept apart
    because that is how they are usually tabulated.
    """
    if r <= 1:
        raise ValueError("q2_max needs r > 1")
    n = 2 * m
    c3 = math.comb(n, 3)
    k = (r + 1) / (r - 1)
    t1 = 8 * c3 / (r * (r - 1))
    t2 = 16 * m / (r * (r - 1))
    t3 = 2 * n * (n - 1) * (n - 2) * (n - 3) / (3 * r * (r - 1) ** 2) * k ** (n - 4)
    t4 = 8 * n * (n - 1) / (r - 1) ** 2 * k ** (n - 2)
    return t1, t2, t3, t4


def q2_max(m: int, r: float) -> float:
    return float(sum(q2_max_terms(m, r)))


_PSI = ("psi0", "psi0_inv", "psi1", "psi1_inv_plus", "psi1_inv_minus")


def psi_maps(z, which: str):
    """The coordinate changes psi0(z) = -4/z and psi1(z) = -4z/(1+z)^2.

    ``psi1_inv_plus`` is the inverse branch of psi1 valued outside the closed
    unit disk and ``psi1_inv_minus`` the one valued inside it; both are
    defined off the slit (-inf, -1].
    """
    if which not in _PSI:
        raise ValueError(f"unknown map {which!r}; choose from {_PSI}")
    z = complex(z)
    if which in ("psi0", "psi0_inv"):
        if z == 0:
            raise ZeroDivisionError("psi0 is singular at 0")
        return -4 / z
    if which == "psi1":
        if z == -1:
            raise ZeroDivisionError("psi1 is singular at -1")
        return -4 * z / (1 + z) ** 2
    if z.imag == 0 and z.real <= -1:
        raise ValueError("inverse branches of psi1 are cut along (-inf, -1]")
    if z == 0:
        return complex(math.inf) if which == "psi1_inv_plus" else 0j
    root = cmath.sqrt(1 + z)
    u = (-(z + 2) - 2 * root) / z
    v = (-(z + 2) + 2 * root) / z
    big, small = (u, v) if abs(u) >= abs(v) else (v, u)
    return big if which == "psi1_inv_plus" else small


@dataclass(frozen=True)
class Sector:
    """Open sector {z : z != vertex, |arg(z - vertex)| < half_angle}."""

    vertex: complex
    half_angle: float

    def __post_init__(self):
        if not 0 < self.half_angle < math.pi:
            raise ValueError("half_angle must lie in (0, pi)")

    def contains(self, z):
        d = np.asarray(z, dtype=complex) - self.vertex
        inside = (d != 0) & (np.abs(np.angle(d)) < self.half_angle)
        return bool(inside) if inside.ndim == 0 else inside

    def boundary(self, radii):
        """Points on the two boundary rays at the given distances."""
        radii = np.asarray(radii, dtype=float)
        up = self.vertex + radii * np.exp(1j * self.half_angle)
        return np.concatenate([up, np.conj(up - self.vertex) + self.vertex])


def sector_contains(s: Sector, z):
    return s.contains(z)


@dataclass(frozen=True)
class EllipseSpec:
    """zeta(w) = e1 w + e0 + em1/w restricted to |w| = r."""

    e1: float = 0.84
    e0: float = -0.18
    em1: float = 0.6
    r: float = 1.0

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("ring parameter r must be >= 1")
        if self.a == 0 or self.b == 0:
            raise ValueError("degenerate ellipse")

    @property
    def a(self) -> float:
        return self.e1 * self.r + self.em1 / self.r

    @property
    def b(self) -> float:
        return self.e1 * self.r - self.em1 / self.r

    def zeta(self, w):
        return self.e1 * w + self.e0 + self.em1 / w

    def boundary(self, n: int):
        theta = 2 * np.pi * np.arange(n) / n
        return self.zeta(self.r * np.exp(1j * theta))

    def implicit(self, z):
        """((x-e0)/a)^2 + (y/b)^2 - 1; zero on the ellipse."""
        z = np.asarray(z, dtype=complex)
        return ((z.real - self.e0) / self.a) ** 2 + (z.imag / self.b) ** 2 - 1


@dataclass(frozen=True)
class StructuralConstants:
    m: int
    eta: float
    rho: float
    log_R: float
    log_R1: float
    R: float | None = field(default=None)
    R1: float | None = field(default=None)


def structural_constants(m: int) -> StructuralConstants:
    """eta, R = 2.66*10^m, rho = 0.07 and R1 = 2.39*10^m.

    R and R1 are left as None above m = 250; the logarithms are always set.
    """
    _check_m(m)
    eta = (math.log(12 * (m + 1)) + (2 + 2 * m) * math.log(30) + 1) / (2 * math.pi)
    log_R = math.log(2.66) + m * math.log(10)
    log_R1 = math.log(2.39) + m * math.log(10)
    big = m > 250
    return StructuralConstants(
        m=m,
        eta=eta,
        rho=0.07,
        log_R=log_R,
        log_R1=log_R1,
        R=None if big else 2.66 * 10.0 ** m,
        R1=None if big else 2.39 * 10.0 ** m,
    )
