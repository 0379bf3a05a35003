"""Escape-time rendering of filled Julia sets and the experiments built on it.

Pixels are sampled at their centers.  Row 0 is the top of the frame, so for
a frame centered on the real axis complex conjugation is a row mirror.

The bailout radius defaults to 2 + 2^{1/m}: beyond it |P_alpha(z)| >= 2|z|,
so a pixel that crosses it is certainly outside the filled Julia set and
the only uncertainty left is "did not escape within max_iter".
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import contfrac
from .family import FamilyParams, ipow
from .explosion import PerturbedSiegelSet, xn_membership

__all__ = [
    "BOUNDED",
    "GridSpec",
    "AreaEstimate",
    "DensityReport",
    "escape_radius",
    "escape_time",
    "escape_grid",
    "filled_julia_mask",
    "render_gray",
    "area_estimate",
    "area_refinement",
    "dens",
    "square_mask",
    "siegel_approximation",
    "distance_field",
    "k_delta_membership",
    "k_delta_mask",
    "boundary_point",
    "k_delta_density_trend",
    "perturbed_density_experiment",
    "write_pgm",
    "pgm_bytes",
    "read_pgm",
]

BOUNDED = "bounded"
# escape_grid uses 0 for "did not escape"; real escape counts start at 1
_NO_ESCAPE = 0
MAX_DESK_Q = 30


def escape_radius(m: int) -> float:
    return 2.0 + 2.0 ** (1.0 / m)


@dataclass(frozen=True)
class GridSpec:
    center: complex = 0j
    half_width: float = 2.0
    resolution: int = 256
    max_iter: int = 500
    bailout: float | None = None

    def __post_init__(self):
        if self.resolution < 2:
            raise ValueError("resolution must be >= 2")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")

    def radius_for(self, m: int) -> float:
        if self.bailout is None:
            return escape_radius(m)
        if self.bailout < escape_radius(m):
            raise ValueError(f"bailout must be >= 2 + 2^(1/m) = {escape_radius(m):.6f}")
        return float(self.bailout)

    @property
    def pixel_size(self) -> float:
        return 2 * self.half_width / self.resolution

    @property
    def pixel_area(self) -> float:
        return self.pixel_size ** 2

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        """Pixel-center x coordinates (left to right) and y (top to bottom)."""
        c = complex(self.center)
        k = (np.arange(self.resolution) + 0.5) * self.pixel_size
        xs = c.real - self.half_width + k
        ys = c.imag + self.half_width - k
        return xs, ys

    def points(self) -> np.ndarray:
        xs, ys = self.axes()
        return xs[None, :] + 1j * ys[:, None]

    def index_of(self, z):
        """Fractional (row, col) of a point; pixel centers sit on integers."""
        z = np.asarray(z, dtype=complex)
        c = complex(self.center)
        col = (z.real - (c.real - self.half_width)) / self.pixel_size - 0.5
        row = ((c.imag + self.half_width) - z.imag) / self.pixel_size - 0.5
        return row, col

    def with_(self, **kw) -> "GridSpec":
        d = dict(center=self.center, half_width=self.half_width, resolution=self.resolution,
                 max_iter=self.max_iter, bailout=self.bailout)
        d.update(kw)
        return GridSpec(**d)


def escape_time(params: FamilyParams, z: complex, spec: GridSpec):
    """First n >= 1 with |P_alpha^n(z)| > bailout, or ``BOUNDED``."""
    B = spec.radius_for(params.m)
    lam = params.multiplier
    m = params.m
    z = complex(z)
    for n in range(1, spec.max_iter + 1):
        z = lam * z * (1 + z) ** m
        if abs(z) > B:
            return n
    return BOUNDED


def _orbit_loop(params: FamilyParams, z0: np.ndarray, max_iter: int, B: float,
                track_max: bool = False):
    """Vectorized escape loop with active-set compaction.

    Returns escape counts (0 for no escape) and, optionally, the maximum
    modulus reached by each orbit before escaping.
    """
    lam = params.multiplier
    m = params.m
    flat = np.asarray(z0, dtype=complex).ravel()
    counts = np.zeros(flat.shape, dtype=np.int64)
    peak = np.abs(flat) if track_max else None
    idx = np.arange(flat.size)
    z = flat.copy()
    for n in range(1, max_iter + 1):
        if idx.size == 0:
            break
        z = lam * z * ipow(1 + z, m)
        a = np.abs(z)
        out = a > B
        if track_max:
            peak[idx] = np.maximum(peak[idx], a)
        if out.any():
            counts[idx[out]] = n
            keep = ~out
            idx = idx[keep]
            z = z[keep]
    shape = np.shape(z0)
    if track_max:
        return counts.reshape(shape), peak.reshape(shape)
    return counts.reshape(shape)


def escape_grid(params: FamilyParams, spec: GridSpec) -> np.ndarray:
    """Escape counts over the grid; 0 marks pixels that never escaped."""
    return _orbit_loop(params, spec.points(), spec.max_iter, spec.radius_for(params.m))


def filled_julia_mask(params: FamilyParams, spec: GridSpec) -> np.ndarray:
    """Boolean grid, True where the pixel center did not escape."""
    return escape_grid(params, spec) == _NO_ESCAPE


def render_gray(params: FamilyParams, spec: GridSpec, supersample: bool = False) -> np.ndarray:
    """uint8 image, 255 for bounded and 0 for escaped.

    With ``supersample`` each pixel averages four sub-pixel samples; this is
    for figures only and is not the mask used by the measurements.
    """
    if not supersample:
        return np.where(filled_julia_mask(params, spec), 255, 0).astype(np.uint8)
    fine = spec.with_(resolution=2 * spec.resolution)
    mask = filled_julia_mask(params, fine).astype(np.int64)
    r = spec.resolution
    blocks = mask.reshape(r, 2, r, 2).sum(axis=(1, 3))
    return ((blocks * 255 + 2) // 4).astype(np.uint8)


@dataclass(frozen=True)
class AreaEstimate:
    value: float
    resolution: int
    max_iter: int
    inner_count: int
    outer_count: int


def area_estimate(params: FamilyParams, spec: GridSpec) -> AreaEstimate:
    counts = escape_grid(params, spec)
    inner = int(np.count_nonzero(counts == _NO_ESCAPE))
    outer = int(counts.size - inner)
    return AreaEstimate(inner * spec.pixel_area, spec.resolution, spec.max_iter, inner, outer)


def area_refinement(params: FamilyParams, spec: GridSpec) -> tuple[AreaEstimate, AreaEstimate, float]:
    """Estimates at resolution r and 2r and their relative difference."""
    a = area_estimate(params, spec)
    b = area_estimate(params, spec.with_(resolution=2 * spec.resolution))
    ref = max(a.value, b.value)
    rel = abs(a.value - b.value) / ref if ref > 0 else 0.0
    return a, b, rel


def dens(U: np.ndarray, X: np.ndarray) -> float:
    """area(U and X) / area(U) by pixel counting."""
    U = np.asarray(U, dtype=bool)
    X = np.asarray(X, dtype=bool)
    if U.shape != X.shape:
        raise ValueError("U and X must live on the same grid")
    n = int(np.count_nonzero(U))
    if n == 0:
        raise ValueError("U is empty")
    return np.count_nonzero(U & X) / n


def square_mask(spec: GridSpec, center: complex, radius: float) -> np.ndarray:
    """Pixels whose centers lie in the closed square of half side ``radius``."""
    z = spec.points()
    c = complex(center)
    return (np.abs(z.real - c.real) <= radius) & (np.abs(z.imag - c.imag) <= radius)


# --------------------------------------------------------------------------
# Siegel disk proxy and K(delta)

def _return_distance(params: FamilyParams, z0: np.ndarray, n_iter: int) -> np.ndarray:
    """min over 1 <= n <= n_iter of |P_alpha^n(z) - z| for each start point."""
    lam = params.multiplier
    m = params.m
    z = z0.copy()
    best = np.full(z0.shape, np.inf)
    for _ in range(n_iter):
        z = lam * z * ipow(1 + z, m)
        np.minimum(best, np.abs(z - z0), out=best)
    return best


def _prune_to_invariant(params: FamilyParams, spec: GridSpec, keep: np.ndarray,
                        rounds: int = 20) -> np.ndarray:
    """Drop pixels whose orbit leaves the set (one pixel of slack) until stable.

    A pixel can pass the recurrence test by a chance close return while its
    orbit visits a region outside the rotation domain; the domain itself is
    invariant, so such pixels are removed here.
    """
    lam = params.multiplier
    m = params.m
    n = spec.resolution
    for _ in range(rounds):
        if not keep.any():
            break
        target = ndimage.binary_dilation(keep)
        idx = np.flatnonzero(keep)
        z = spec.points().ravel()[idx]
        alive = np.ones(idx.size, dtype=bool)
        for _ in range(spec.max_iter):
            z = lam * z * ipow(1 + z, m)
            row, col = spec.index_of(z)
            r = np.rint(row)
            c = np.rint(col)
            inside = (r >= 0) & (r < n) & (c >= 0) & (c < n)
            ri = np.clip(r, 0, n - 1).astype(np.int64)
            ci = np.clip(c, 0, n - 1).astype(np.int64)
            alive &= inside & target[ri, ci]
        if alive.all():
            break
        keep = keep.copy()
        keep.ravel()[idx[~alive]] = False
    return keep


def siegel_approximation(params: FamilyParams, spec: GridSpec, ring: float = 0.95,
                         method: str = "recurrent", recurrence_pixels: float = 2.0) -> np.ndarray:
    """Pixel proxy for the Siegel disk about 0.

    Both methods keep bounded pixels whose orbits stay inside ring * bailout
    and then take the 4-connected component containing 0.

    ``method="component"`` stops there.  At pixel scale the preimage
    components of the disk touch it through pinch pixels, so this usually
    returns most of the filled Julia set.

    ``method="recurrent"`` (the default) first discards pixels whose orbit
    never returns within ``recurrence_pixels`` pixels of its start in
    max_iter steps.  Orbits inside a rotation domain are recurrent.  Orbits
    in strict preimages of it are not.  It then prunes pixels whose orbit
    leaves the remaining set, since the domain is invariant.
    """
    if method not in ("recurrent", "component"):
        raise ValueError("method must be 'recurrent' or 'component'")
    B = spec.radius_for(params.m)
    pts = spec.points()
    counts, peak = _orbit_loop(params, pts, spec.max_iter, B, track_max=True)
    keep = (counts == _NO_ESCAPE) & (peak <= ring * B)
    if method == "recurrent" and keep.any():
        back = _return_distance(params, pts[keep], spec.max_iter)
        keep[keep] = back < recurrence_pixels * spec.pixel_size
        keep = _prune_to_invariant(params, spec, keep)
    labels, _ = ndimage.label(keep)
    row, col = spec.index_of(0j)
    r, c = int(round(float(row))), int(round(float(col)))
    if not (0 <= r < spec.resolution and 0 <= c < spec.resolution):
        raise ValueError("the frame does not contain 0")
    lab = labels[r, c]
    if lab == 0:
        return np.zeros_like(keep)
    return labels == lab


def distance_field(mask: np.ndarray, spec: GridSpec) -> np.ndarray:
    """World-unit distance from each pixel center to the nearest set pixel."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return np.full(mask.shape, np.inf)
    return ndimage.distance_transform_edt(~mask) * spec.pixel_size


def _lookup(dist: np.ndarray, spec: GridSpec, z: np.ndarray) -> np.ndarray:
    """Distance at the nearest pixel, plus the gap to the frame when outside it."""
    row, col = spec.index_of(z)
    n = spec.resolution
    r = np.clip(np.rint(row), 0, n - 1).astype(np.int64)
    c = np.clip(np.rint(col), 0, n - 1).astype(np.int64)
    gap_r = np.maximum(np.abs(row - np.clip(row, 0, n - 1)), 0)
    gap_c = np.maximum(np.abs(col - np.clip(col, 0, n - 1)), 0)
    gap = np.hypot(gap_r, gap_c) * spec.pixel_size
    return dist[r, c] + gap


def k_delta_mask_points(params: FamilyParams, z0, delta: float, ref_mask: np.ndarray,
                        ref_spec: GridSpec, max_iter: int, dist: np.ndarray | None = None) -> np.ndarray:
    """Vectorized K(delta) test for an array of starting points."""
    if dist is None:
        dist = distance_field(ref_mask, ref_spec)
    lam = params.multiplier
    m = params.m
    flat = np.asarray(z0, dtype=complex).ravel()
    ok = _lookup(dist, ref_spec, flat) < delta
    idx = np.flatnonzero(ok)
    z = flat[idx]
    for _ in range(max_iter):
        if idx.size == 0:
            break
        z = lam * z * ipow(1 + z, m)
        good = np.isfinite(z) & (_lookup(dist, ref_spec, np.where(np.isfinite(z), z, 0)) < delta)
        if not good.all():
            ok[idx[~good]] = False
            idx = idx[good]
            z = z[good]
    return ok.reshape(np.shape(z0))


def k_delta_membership(params: FamilyParams, z: complex, delta: float, K_ref_mask: np.ndarray,
                       max_iter: int, ref_spec: GridSpec | None = None) -> bool:
    """True iff the first max_iter orbit points all stay within delta of the reference set.

    Running out of iterations counts as membership.
    """
    if ref_spec is None:
        raise ValueError("ref_spec is needed to place the reference mask in the plane")
    return bool(k_delta_mask_points(params, np.array([z]), delta, K_ref_mask, ref_spec, max_iter)[0])


def k_delta_mask(params: FamilyParams, spec: GridSpec, delta: float, ref_mask: np.ndarray,
                 ref_spec: GridSpec, max_iter: int | None = None) -> np.ndarray:
    return k_delta_mask_points(params, spec.points(), delta, ref_mask, ref_spec,
                               spec.max_iter if max_iter is None else max_iter)


def boundary_point(mask: np.ndarray, spec: GridSpec, toward: complex) -> complex:
    """Center of the set pixel on the mask boundary closest to ``toward``."""
    mask = np.asarray(mask, dtype=bool)
    edge = mask & ~ndimage.binary_erosion(mask)
    if not edge.any():
        raise ValueError("mask has no boundary")
    z = spec.points()[edge]
    return complex(z[np.argmin(np.abs(z - toward))])


@dataclass
class DensityReport:
    center: complex
    radii: list
    densities: list
    samples: int

    @property
    def increasing(self) -> bool:
        return all(b > a for a, b in zip(self.densities, self.densities[1:]))


def k_delta_density_trend(params: FamilyParams, delta: float, ref_mask: np.ndarray, ref_spec: GridSpec,
                          radii=(0.2, 0.1, 0.05), center: complex | None = None,
                          samples: int = 129, max_iter: int | None = None) -> DensityReport:
    """Density of K(delta) in shrinking squares about a boundary point of the reference set.

    Each square is sampled on its own samples x samples grid so the smallest
    square is resolved as finely as the largest.  By default the center is the
    boundary point nearest the critical point -1/(m+1).
    """
    if center is None:
        center = boundary_point(ref_mask, ref_spec, -1.0 / (params.m + 1))
    dist = distance_field(ref_mask, ref_spec)
    it = ref_spec.max_iter if max_iter is None else max_iter
    out = []
    for r in radii:
        local = GridSpec(center=center, half_width=r, resolution=samples, max_iter=it)
        inside = k_delta_mask_points(params, local.points(), delta, ref_mask, ref_spec, it, dist)
        out.append(float(np.mean(inside)))
    return DensityReport(complex(center), list(radii), out, samples)


# --------------------------------------------------------------------------
# perturbed rotation numbers

def perturbed_density_experiment(base_alpha_entries, n: int, A_n: int, N: int, rho: float = 0.07,
                                 m: int = 2, spec: GridSpec | None = None,
                                 U: np.ndarray | None = None, erode: int = 2) -> dict:
    """Density of the bounded set of P_{alpha_n} inside a Siegel-disk proxy for alpha.

    alpha is the value of ``base_alpha_entries`` and alpha_n replaces the tail
    after a_n by [A_n, N, N, ...].  ``U`` defaults to the proxy for alpha,
    eroded by ``erode`` pixels.
    """
    entries = [int(a) for a in base_alpha_entries]
    pspec = contfrac.PerturbedSequenceSpec(tuple(entries), int(A_n), int(N), int(n))
    p_n, q_n, _ = pspec.pq()
    if q_n > MAX_DESK_Q:
        spec0 = spec or GridSpec()
        cost = spec0.resolution ** 2 * max(spec0.max_iter, 50 * q_n * q_n)
        raise ValueError(f"q_n = {q_n} exceeds {MAX_DESK_Q}; estimated cost ~{cost:.2e} map evaluations")
    if spec is None:
        spec = GridSpec(half_width=1.5, resolution=256, max_iter=2000)
    alpha = float(contfrac.evaluate(entries))
    alpha_n = float(pspec.value())
    eps = contfrac.epsilon_n(pspec)
    base = FamilyParams(m, alpha)
    pert = FamilyParams(m, alpha_n)
    S = siegel_approximation(base, spec)
    if U is None:
        U = ndimage.binary_erosion(S, iterations=erode) if erode > 0 else S
    K_n = filled_julia_mask(pert, spec)
    d = dens(U, K_n)
    xset = PerturbedSiegelSet(q_n, eps, rho)
    pts = spec.points()[np.asarray(U, dtype=bool)]
    core = float(np.mean([xn_membership(xset, z) for z in pts[:: max(1, pts.size // 4096)]]))
    return {
        "n": n,
        "A_n": int(A_n),
        "N": int(N),
        "p_n": p_n,
        "q_n": q_n,
        "alpha": alpha,
        "alpha_n": alpha_n,
        "eps_n": eps,
        "dens": d,
        "U_pixels": int(np.count_nonzero(U)),
        "xn_fraction": core,
    }


# --------------------------------------------------------------------------
# PGM

def write_pgm(path, image: np.ndarray) -> None:
    """Binary PGM (P5), maxval 255.  Booleans become 0 / 255."""
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(image))


def pgm_bytes(image: np.ndarray) -> bytes:
    img = np.asarray(image)
    if img.dtype == bool:
        img = np.where(img, 255, 0)
    img = np.ascontiguousarray(img, dtype=np.uint8)
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + img.tobytes()


def read_pgm(path) -> np.ndarray:
    data = open(path, "rb").read()
    tokens = []
    pos = 0
    while len(tokens) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    if tokens[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    if maxval > 255:
        raise ValueError("16-bit PGM not supported")
    pos += 1
    return np.frombuffer(data[pos:pos + w * h], dtype=np.uint8).reshape(h, w)
