"""Fatou coordinates, horn maps and renormalized return maps for the family.

For a germ f(z) = z + a2 z^2 + a3 z^3 + ... the chart w = -1/(a2 z) sends the
parabolic point to infinity, where

    F(w) = -1/(a2 f(-1/(a2 w))) = w + 1 + b1/w + O(1/w^2),   b1 = 1 - a3/a2^2.

A formal Fatou coordinate

    Phi(w) = w - b1 log w + sum_{k>=1} c_k w^{-k}

solves Phi(F(w)) = Phi(w) + 1 order by order.  The series diverges, but
truncated at about twenty terms it is accurate to rounding once |w| is a few
dozen, so the genuine coordinates are obtained by pushing points into that
region with F (attracting side) or F^{-1} (repelling side) and correcting by
the number of steps taken.  The attracting coordinate uses the principal log;
the repelling one uses log(-w) + i pi, which agrees with it on the upper
half-plane.

The horn map E = Phi_att o Phi_rep^{-1} is normalized so that E(Z) - Z -> 0
as Im Z -> +infinity.  Exp#(Z) = e^{2 pi i Z} transports its upper end to a
germ R0 f fixing 0 with derivative 1.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .family import FamilyParams, critical_data, eval_P, eval_dP
from .explosion import TruncatedSeries

__all__ = [
    "OutsidePetal",
    "ParabolicGerm",
    "FatouCoordinates",
    "FatouCoordinate",
    "fatou_coordinates",
    "iterative_residue",
    "to_infinity_chart",
    "from_infinity_chart",
    "phi_att",
    "phi_rep",
    "phi_rep_inverse",
    "horn_map",
    "horn_constants",
    "parabolic_renorm",
    "second_fixed_point",
    "near_parabolic_return",
    "ReturnResult",
]

HORN_MIN_HEIGHT = 6.0


class OutsidePetal(ArithmeticError):
    """The orbit did not reach the region where the asymptotic series is used."""


def _series_h(m: int, a2: complex, K: int) -> TruncatedSeries:
    # g(u) = -a2 f(-u/a2) = u h(u) with h(u) = sum_j C(m,j) (-1/a2)^j u^j
    c = np.zeros(K + 1, dtype=complex)
    for j in range(min(m, K) + 1):
        c[j] = math.comb(m, j) * (-1 / a2) ** j
    return TruncatedSeries(c)


def _displacement_series(h: TruncatedSeries) -> TruncatedSeries:
    # F(w) - w = 1/g(u) - 1/u = (1/h(u) - 1)/u
    inv = h.reciprocal()
    inv.c[0] = 0.0
    return inv.shift_down(1)


@lru_cache(maxsize=None)
def iterative_residue(m: int) -> complex:
    """b1 for P(z) = z(1+z)^m, read off the chart series (expected (m+1)/(2m))."""
    h = _series_h(m, complex(m), 6)
    return complex(_displacement_series(h).c[1])


@dataclass(frozen=True)
class ParabolicGerm:
    """P_alpha viewed as a germ at 0; the chart uses a2 = e^{2 pi i alpha} m."""

    m: int
    alpha: complex = 0.0

    def __post_init__(self):
        FamilyParams(self.m, self.alpha)

    @property
    def lam(self) -> complex:
        return cmath.exp(2j * math.pi * complex(self.alpha)) if self.alpha != 0 else 1.0 + 0j

    @property
    def a2(self) -> complex:
        return self.lam * self.m

    @property
    def a3(self) -> complex:
        return self.lam * math.comb(self.m, 2)

    @property
    def b1(self) -> complex:
        return iterative_residue(self.m)

    def f(self, z):
        return self.lam * eval_P(self.m, z)

    def df(self, z):
        return self.lam * eval_dP(self.m, z)

    def F(self, w):
        z = -1 / (self.a2 * w)
        return -1 / (self.a2 * self.f(z))

    def dF(self, w):
        z = -1 / (self.a2 * w)
        fz = self.f(z)
        return self.df(z) / (self.a2 ** 2 * fz * fz * w * w)

    def F_inverse(self, w, iterations: int = 8):
        """Branch of F^{-1} near w - 1 (valid for |w| not small)."""
        y = w - 1 - self.b1 / w
        for _ in range(iterations):
            y = y - (self.F(y) - w) / self.dF(y)
        return y


def to_infinity_chart(germ: ParabolicGerm, z):
    if np.any(np.asarray(z) == 0):
        raise ZeroDivisionError("z = 0 is the parabolic point itself")
    return -1 / (germ.a2 * z)


def from_infinity_chart(germ: ParabolicGerm, w):
    if np.any(np.asarray(w) == 0):
        raise ZeroDivisionError("w = 0 corresponds to z = infinity")
    return -1 / (germ.a2 * w)


def _log_rep(w):
    return np.log(-w) + 1j * np.pi


class FatouCoordinates:
    """Attracting and repelling Fatou coordinates of an exactly parabolic germ.

    ``radius`` is where the asymptotic series takes over (Re w >= radius on
    the attracting side, Re w <= -radius on the repelling side) and ``order``
    the number of correction terms c_k.
    """

    def __init__(self, germ: ParabolicGerm, radius: float = 30.0, order: int = 20,
                 max_steps: int = 200_000, bailout: float = 1e6):
        if germ.alpha != 0:
            raise ValueError("Fatou coordinates need an exactly parabolic germ (alpha = 0)")
        self.germ = germ
        self.radius = float(radius)
        self.order = int(order)
        self.max_steps = int(max_steps)
        self.bailout = float(bailout)
        self.b1 = germ.b1
        self.coeffs = self._formal_coefficients()
        self.offset = 0j
        cv = critical_data(germ.m).cv_P
        self.offset = 1 - complex(self.att(cv))

    # -- formal series -------------------------------------------------
    def _formal_coefficients(self):
        K = self.order + 2
        h = _series_h(self.germ.m, self.germ.a2, K)
        D = _displacement_series(h)
        L = -1 * h.log()
        b1 = complex(D.c[1])
        powers = [None]
        hk = TruncatedSeries.constant(1, K)
        for _ in range(self.order):
            hk = hk * h
            powers.append(hk)
        c = [0j]
        for n in range(1, self.order + 1):
            acc = D.c[n + 1] - b1 * L.c[n + 1]
            for k in range(1, n):
                acc += c[k] * powers[k].c[n + 1 - k]
            c.append(acc / n)
        return np.array(c)

    def asym(self, w, kind: str = "att"):
        w = np.asarray(w, dtype=complex)
        lg = np.log(w) if kind == "att" else _log_rep(w)
        inv = 1 / w
        acc = np.zeros_like(w)
        for ck in self.coeffs[:0:-1]:
            acc = (acc + ck) * inv
        return w - self.b1 * lg + acc

    def asym_derivative(self, w):
        w = np.asarray(w, dtype=complex)
        inv = 1 / w
        acc = np.zeros_like(w)
        for k in range(self.order, 0, -1):
            acc = (acc - k * self.coeffs[k]) * inv
        return 1 - self.b1 * inv + acc * inv

    # -- chart-level coordinates ----------------------------------------
    def _push(self, w, forward: bool):
        w = np.array(w, dtype=complex, ndmin=1, copy=True)
        n = np.zeros(w.shape, dtype=np.int64)
        lost = np.zeros(w.shape, dtype=bool)
        small = 1 / (abs(self.germ.a2) * self.bailout)
        R = self.radius

        def pending():
            done = (w.real >= R) if forward else (w.real <= -R)
            return ~done & ~lost

        act = pending()
        steps = 0
        while act.any():
            if steps >= self.max_steps:
                lost |= act
                break
            wa = w[act]
            w[act] = self.germ.F(wa) if forward else self.germ.F_inverse(wa)
            n[act] += 1
            bad = ~np.isfinite(w) | (np.abs(w) < small)
            lost |= bad
            steps += 1
            act = pending()
        return w, n, lost

    def att_w(self, w, check: bool = False):
        wN, n, lost = self._push(w, True)
        val = self.asym(wN, "att") - n + self.offset
        val[lost] = np.nan
        if check:
            nxt = self.asym(self.germ.F(wN), "att") - (n + 1) + self.offset
            return val, np.abs(nxt - val)
        return val

    def rep_w(self, w):
        wN, n, lost = self._push(w, False)
        val = self.asym(wN, "rep") + n
        val[lost] = np.nan
        return val

    def rep_inverse_w(self, Z, newton: int = 12):
        Z = np.array(Z, dtype=complex, ndmin=1)
        R = self.radius
        b = abs(self.b1)
        n = np.ceil(np.maximum(0.0, Z.real + R + 4 + b * np.log(R + 4 + np.abs(Z.imag)))).astype(np.int64)
        for _ in range(4):
            Y = Z - n
            u = Y + self.b1 * _log_rep(Y)
            for _ in range(newton):
                u = u - (self.asym(u, "rep") - Y) / self.asym_derivative(u)
            short = u.real > -R
            if not short.any():
                break
            n = n + np.where(short, np.ceil(u.real + R + 1).astype(np.int64), 0)
        w = u
        for k in range(int(n.max()) if n.size else 0):
            act = n > k
            w[act] = self.germ.F(w[act])
        return w

    # -- z-plane wrappers ----------------------------------------------
    def att(self, z, check: bool = False):
        out = self.att_w(to_infinity_chart(self.germ, np.asarray(z, dtype=complex)), check)
        return _unwrap(out, z, check)

    def rep(self, z):
        return _unwrap(self.rep_w(to_infinity_chart(self.germ, np.asarray(z, dtype=complex))), z)

    def rep_inverse(self, Z):
        w = self.rep_inverse_w(Z)
        return _unwrap(from_infinity_chart(self.germ, w), Z)

    # -- horn map ------------------------------------------------------
    def horn_raw(self, Z):
        return self.att_w(self.rep_inverse_w(Z))

    @property
    def constants(self) -> tuple[complex, complex]:
        """(c_upper, c_lower) of the unnormalized horn map."""
        if not hasattr(self, "_constants"):
            xs = np.linspace(0, 1, 8, endpoint=False)
            H = 40.0
            up = xs + 1j * H
            lo = xs - 1j * H
            cu = np.mean(self.horn_raw(up) - up)
            cl = np.mean(self.horn_raw(lo) - lo)
            self._constants = (complex(cu), complex(cl))
        return self._constants

    def horn(self, Z, min_height: float = HORN_MIN_HEIGHT):
        Z = np.asarray(Z, dtype=complex)
        if np.any(np.abs(Z.imag) < min_height):
            raise ValueError(f"horn map is evaluated only for |Im Z| >= {min_height}")
        return _unwrap(self.horn_raw(Z) - self.constants[0], Z)


def _unwrap(out, like, check=False):
    if check:
        val, diff = out
        if np.ndim(like) == 0:
            return complex(val[0]), float(diff[0])
        return val.reshape(np.shape(like)), diff.reshape(np.shape(like))
    if np.ndim(like) == 0:
        return complex(out[0])
    return out.reshape(np.shape(like))


@lru_cache(maxsize=16)
def fatou_coordinates(m: int, radius: float = 30.0, order: int = 20) -> FatouCoordinates:
    return FatouCoordinates(ParabolicGerm(m), radius=radius, order=order)


@dataclass(frozen=True)
class FatouCoordinate:
    """One of the two coordinates with its bookkeeping."""

    kind: str
    germ: ParabolicGerm
    steps: int
    normalization_offset: complex
    L: float
    value: complex = field(default=0j)


def _coords_for(germ: ParabolicGerm) -> FatouCoordinates:
    if germ.alpha != 0:
        raise ValueError("Fatou coordinates need alpha = 0")
    return fatou_coordinates(germ.m)


def phi_att(germ: ParabolicGerm, z, tol: float = 1e-8):
    """Attracting coordinate normalized by Phi_att(cv) = 1.

    Raises OutsidePetal when the orbit does not settle, or when the values at
    depths N and N+1 differ by more than ``tol``.
    """
    fc = _coords_for(germ)
    val, diff = fc.att(z, check=True)
    if np.any(~np.isfinite(val)):
        raise OutsidePetal("orbit did not enter the attracting region")
    if np.any(diff > tol):
        raise OutsidePetal(f"depth N and N+1 disagree by {np.max(diff):.3g}")
    return val


def phi_rep(germ: ParabolicGerm, z):
    fc = _coords_for(germ)
    val = fc.rep(z)
    if np.any(~np.isfinite(val)):
        raise OutsidePetal("backward orbit did not enter the repelling region")
    return val


def phi_rep_inverse(germ: ParabolicGerm, Z, tol: float = 1e-8):
    fc = _coords_for(germ)
    z = fc.rep_inverse(Z)
    if np.any(~np.isfinite(z)):
        raise OutsidePetal("template inversion failed")
    return z


def horn_map(germ: ParabolicGerm, Z, min_height: float = HORN_MIN_HEIGHT):
    return _coords_for(germ).horn(Z, min_height)


def horn_constants(germ: ParabolicGerm) -> tuple[complex, complex]:
    return _coords_for(germ).constants


def parabolic_renorm(germ: ParabolicGerm, w, min_height: float = HORN_MIN_HEIGHT):
    """R0 f(w) = Exp#(E(Exp#^{-1}(w))) on 0 < |w| < e^{-2 pi min_height}; R0 f(0) = 0."""
    w = np.asarray(w, dtype=complex)
    limit = math.exp(-2 * math.pi * min_height)
    if np.any(np.abs(w) >= limit):
        raise ValueError(f"|w| must stay below e^(-2 pi {min_height}) = {limit:.3g}")
    zero = w == 0
    safe = np.where(zero, limit / 2, w)
    Z = np.log(safe) / (2j * math.pi)
    E = horn_map(germ, Z, min_height)
    out = np.exp(2j * math.pi * np.asarray(E))
    out = np.where(zero, 0, out)
    return complex(out) if np.ndim(w) == 0 else out


def second_fixed_point(params: FamilyParams) -> complex:
    """The fixed point sigma != 0 near 0: (1+sigma)^m = e^{-2 pi i alpha}."""
    m = params.m
    return cmath.exp(-2j * math.pi * complex(params.alpha) / m) - 1


@dataclass(frozen=True)
class ReturnResult:
    w: complex
    value: complex
    count: int
    alpha: complex
    model: complex
    discrepancy: float
    sigma: complex


def _wrap(x: complex) -> complex:
    return complex(x.real - math.floor(x.real + 0.5), x.imag)


def near_parabolic_return(params: FamilyParams, w: complex, min_height: float = HORN_MIN_HEIGHT,
                          coords: FatouCoordinates | None = None) -> ReturnResult:
    """First return of P_alpha to the repelling fundamental strip, read in
    the repelling coordinate of P_0.

    The start point is Phi_rep^{-1}(w) for P_0; the orbit of P_alpha is
    followed through the gate between 0 and sigma until it re-enters the
    strip |Re Phi_rep - Re w| <= 1/2 on the same end.  ``value`` is
    Phi_rep(z_n) - n, to be compared with the model E(w) - 1/alpha.
    """
    alpha = complex(params.alpha)
    m = params.m
    if alpha == 0:
        raise ValueError("alpha must be nonzero")
    if abs(cmath.phase(alpha)) >= math.pi / 4:
        raise ValueError("need |arg alpha| < pi/4")
    if abs(w.imag) < min_height:
        raise ValueError(f"need |Im w| >= {min_height}")
    fc = coords or fatou_coordinates(m)
    germ0 = fc.germ
    b1 = fc.b1
    lam = cmath.exp(2j * math.pi * alpha)
    limit = 10 * math.ceil(1 / abs(alpha))
    gate = 1 / (2 * math.pi * abs(alpha))
    z = complex(fc.rep_inverse(w))
    orbit = [z]
    passed = False
    candidate = None
    for k in range(1, limit + 1):
        z = lam * z * (1 + z) ** m
        orbit.append(z)
        if z == 0 or abs(z) > 10 or not cmath.isfinite(z):
            raise OutsidePetal("no return: orbit escaped")
        ww = -1 / (germ0.a2 * z)
        if not passed:
            passed = abs(ww) > gate
            continue
        if ww.imag * w.imag > 0 and abs(ww) < 4 * abs(w) + fc.radius:
            approx = ww - b1 * complex(_log_rep(np.complex128(ww)))
            if approx.real >= w.real - 1.5:
                candidate = k
                break
    if candidate is None:
        raise OutsidePetal("no return within 10/|alpha| iterations")
    best = None
    for j in range(max(1, candidate - 3), candidate + 4):
        while j >= len(orbit):
            zz = orbit[-1]
            orbit.append(lam * zz * (1 + zz) ** m)
        val = complex(fc.rep(orbit[j]))
        if -0.5 <= val.real - w.real < 0.5:
            best = (j, val)
            break
    if best is None:
        raise OutsidePetal("return strip not located")
    n, val = best
    value = val - n
    model = complex(fc.horn(np.complex128(w), min_height)) - 1 / alpha
    return ReturnResult(
        w=w,
        value=value,
        count=n,
        alpha=alpha,
        model=model,
        discrepancy=abs(_wrap(value - model)),
        sigma=second_fixed_point(params),
    )
