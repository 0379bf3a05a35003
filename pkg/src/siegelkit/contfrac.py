"""Continued fractions, convergents, Brjuno sums and perturbed rotation numbers.

Conventions:

    a_0 = floor(alpha),  alpha_0 = {alpha},
    a_{k+1} = floor(1/alpha_k),  alpha_{k+1} = {1/alpha_k},
    p_{-1} = 1, q_{-1} = 0, p_0 = a_0, q_0 = 1,
    beta_{-1} = 1,  beta_k = alpha_0 alpha_1 ... alpha_k.

Floats and Fractions are expanded exactly (a double is a rational number), so
the entries are those of the binary value that was passed in.  For genuinely
irrational input pass an ``mpmath.mpf`` carrying enough digits, for example
``golden_mean()``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath

__all__ = [
    "RATIONAL_CUTOFF",
    "InfiniteBrjunoSum",
    "ContinuedFractionData",
    "PerturbedSequenceSpec",
    "SNCheck",
    "golden_mean",
    "expand",
    "convergents",
    "evaluate",
    "brjuno_sum",
    "brjuno_partial_sums",
    "is_in_SN",
    "epsilon_n",
]

RATIONAL_CUTOFF = 1e-14


class InfiniteBrjunoSum(ArithmeticError):
    """Raised when the expansion terminates, i.e. alpha is (numerically) rational."""


def golden_mean(dps: int = 60) -> mpmath.mpf:
    """(sqrt(5) - 1)/2 with ``dps`` significant digits."""
    with mpmath.workdps(dps):
        return +(mpmath.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class ContinuedFractionData:
    entries: tuple
    convergents: tuple
    alphas: tuple
    betas: tuple
    terminated: bool = False
    alphas_exact: tuple = field(default=(), repr=False, compare=False)
    betas_exact: tuple = field(default=(), repr=False, compare=False)

    @property
    def depth(self) -> int:
        return len(self.entries) - 1


def convergents(entries: Sequence[int]) -> list[tuple[int, int]]:
    """(p_k, q_k) for k = 0..len(entries)-1 from the integer recurrences.

    Python integers are unbounded, so nothing overflows past 64 bits.
    """
    out = []
    p_prev, q_prev = 1, 0
    p, q = None, None
    for k, a in enumerate(entries):
        a = int(a)
        if k > 0 and a < 1:
            raise ValueError("entries past index 0 must be >= 1")
        if k == 0:
            p, q = a, 1
        else:
            p, p_prev = a * p + p_prev, p
            q, q_prev = a * q + q_prev, q
        out.append((p, q))
    return out


def _frac_floor(x):
    if isinstance(x, Fraction):
        return x.numerator // x.denominator
    return int(mpmath.floor(x))


def expand(alpha, depth: int) -> ContinuedFractionData:
    """Expand alpha to entries a_0..a_depth.

    Stops early, with ``terminated=True``, once some alpha_k drops below
    ``RATIONAL_CUTOFF``.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if isinstance(alpha, (int, float, Fraction)):
        if isinstance(alpha, float) and not math.isfinite(alpha):
            raise ValueError("alpha must be finite")
        x = Fraction(alpha)
        one = Fraction(1)
        ctx = None
    else:
        bits = getattr(alpha, "_mpf_", (0, 0, 0, 0))[3]
        ctx = mpmath.workprec(max(mpmath.mp.prec, bits + 8))
        with ctx:
            x = mpmath.mpf(alpha)
            one = mpmath.mpf(1)

    def run():
        a0 = _frac_floor(x)
        entries = [a0]
        alphas = [x - a0]
        terminated = False
        while len(entries) <= depth:
            ak = alphas[-1]
            if ak < RATIONAL_CUTOFF:
                terminated = True
                break
            inv = one / ak
            a = _frac_floor(inv)
            frac = inv - a
            if 1 - frac < RATIONAL_CUTOFF:
                # 1/alpha_k sits just below an integer: the same noise floor
                # seen from the other side.
                a, frac = a + 1, frac - frac
            entries.append(a)
            alphas.append(frac)
        if not terminated and alphas[-1] < RATIONAL_CUTOFF:
            terminated = True
        betas = []
        b = one
        for ak in alphas:
            b = b * ak
            betas.append(b)
        return entries, alphas, betas, terminated

    if ctx is None:
        entries, alphas, betas, terminated = run()
    else:
        with ctx:
            entries, alphas, betas, terminated = run()
    return ContinuedFractionData(
        entries=tuple(entries),
        convergents=tuple(convergents(entries)),
        alphas=tuple(float(a) for a in alphas),
        betas=tuple(float(b) for b in betas),
        terminated=terminated,
        alphas_exact=tuple(alphas),
        betas_exact=tuple(betas),
    )


def evaluate(entries: Sequence[int], tail=0, dps: int = 50):
    """Value of a_0 + 1/(a_1 + 1/(... + 1/(a_k + tail))) as an mpf."""
    with mpmath.workdps(dps):
        x = mpmath.mpf(entries[-1]) + tail
        for a in reversed(entries[:-1]):
            x = a + 1 / x
        return +x


def brjuno_partial_sums(alpha, depth: int) -> list[float]:
    """Partial sums S_d = sum_{k=0}^{d} beta_{k-1} log(1/alpha_k), d = 0..depth."""
    cf = expand(alpha, depth)
    if cf.terminated or len(cf.alphas_exact) < depth + 1:
        raise InfiniteBrjunoSum("expansion terminated: alpha is rational to working precision")
    sums = []
    total = mpmath.mpf(0)
    prev_beta = mpmath.mpf(1)
    for ak in cf.alphas_exact[: depth + 1]:
        ak = mpmath.mpf(ak)
        total += prev_beta * mpmath.log(1 / ak)
        prev_beta *= ak
        sums.append(float(total))
    return sums


def brjuno_sum(alpha, depth: int) -> float:
    return brjuno_partial_sums(alpha, depth)[-1]


class SNCheck:
    """Truth value of an S_N membership test plus the depth it looked at."""

    def __init__(self, ok: bool, depth: int, N: int, bound):
        self.ok = ok
        self.depth = depth
        self.N = N
        self.bound = bound

    def __bool__(self):
        return self.ok

    def __repr__(self):
        return f"SNCheck(ok={self.ok}, depth={self.depth}, N={self.N}, bound={self.bound})"


def is_in_SN(entries: Sequence[int], N: int, bound: int | None = None) -> SNCheck:
    """All available a_k (k >= 1) satisfy N <= a_k (<= bound when given)."""
    tail = [int(a) for a in entries[1:]]
    ok = all(a >= N for a in tail)
    if bound is not None:
        ok = ok and all(a <= bound for a in tail)
    return SNCheck(ok, len(tail), N, bound)


@dataclass(frozen=True)
class PerturbedSequenceSpec:
    """alpha_n = [a_0, ..., a_n, A_n, N, N, N, ...]."""

    base_entries: tuple
    A_n: int
    N: int
    n: int

    def __post_init__(self):
        if self.n < 0 or self.n >= len(self.base_entries):
            raise ValueError("n must index into base_entries")
        if self.A_n < 1 or self.N < 1:
            raise ValueError("A_n and N must be >= 1")
        if any(int(a) < 1 for a in self.base_entries[1 : self.n + 1]):
            raise ValueError("entries past index 0 must be >= 1")

    def theta(self, dps: int = 50):
        """[0; N, N, N, ...] = (sqrt(N^2+4) - N)/2."""
        with mpmath.workdps(dps):
            return (mpmath.sqrt(self.N ** 2 + 4) - self.N) / 2

    def entries(self, extra: int = 0) -> list[int]:
        return [int(a) for a in self.base_entries[: self.n + 1]] + [self.A_n] + [self.N] * extra

    def value(self, dps: int = 50):
        return evaluate(self.entries(), tail=self.theta(dps), dps=dps)

    def pq(self) -> tuple[int, int, int]:
        cv = convergents(self.base_entries[: self.n + 1])
        p_n, q_n = cv[-1]
        q_prev = cv[-2][1] if self.n > 0 else 0
        return p_n, q_n, q_prev

    def growth_ratio(self) -> float:
        """log(A_n)^{1/q_n}; only a finite-prefix diagnostic."""
        _, q_n, _ = self.pq()
        return math.log(self.A_n) ** (1.0 / q_n) if self.A_n > 1 else 0.0


def epsilon_n(spec: PerturbedSequenceSpec, theta_tail=None) -> float:
    """alpha_n - p_n/q_n = (-1)^n / (q_n^2 (A_n + theta) + q_n q_{n-1})."""
    if theta_tail is None:
        theta_tail = spec.theta()
    _, q_n, q_prev = spec.pq()
    with mpmath.workdps(50):
        val = mpmath.mpf((-1) ** spec.n) / (q_n ** 2 * (spec.A_n + mpmath.mpf(theta_tail)) + q_n * q_prev)
    return float(val)
