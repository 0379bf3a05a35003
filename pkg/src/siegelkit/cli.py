"""Command-line front end.

    python -m siegelkit verify [--json | --csv] [--dense]
    python -m siegelkit render --m 2 --alpha golden --res 512 --out k.pgm
    python -m siegelkit area   --m 2 --alpha 0 --res 512 [--refine]
    python -m siegelkit dens   --m 2 --alpha golden --u-center -0.33 --u-radius 0.05 [--delta 0.1]
    python -m siegelkit explode --m 2 --p 1 --q 3 [--delta 0.05]
    python -m siegelkit horn   --m 2 [--height 8]
    python -m siegelkit renorm --m 2 --w 1e-20
    python -m siegelkit cf     --alpha golden --depth 8

Every run writes one header line, starting with "#", that records the fully
resolved configuration (``explode`` adds a second "#" line with A and
chi'(0)).  Output is deterministic: nothing depends on the clock, the locale
or the order of parallel work.

Exit codes: 0 success, 1 a verify check failed, 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass
from fractions import Fraction

import mpmath

from . import __version__, contfrac
from .family import FamilyParams

__all__ = ["ParsedAlpha", "parse_alpha", "format_alpha", "build_parser", "main"]


@dataclass(frozen=True)
class ParsedAlpha:
    text: str
    value: float
    exact: object          # Fraction, or mpf for golden
    entries: tuple | None  # only for cf:[...] input

    def __str__(self):
        return self.text


def parse_alpha(text: str) -> ParsedAlpha:
    """Accept a decimal, a fraction p/q, ``cf:[a0,a1,...]`` or ``golden``."""
    s = text.strip()
    if s == "golden":
        g = contfrac.golden_mean()
        return ParsedAlpha("golden", float(g), g, None)
    if s.startswith("cf:"):
        body = s[3:].strip()
        if not (body.startswith("[") and body.endswith("]")):
            raise ValueError(f"continued fraction must look like cf:[a0,a1,...], got {text!r}")
        parts = [p.strip() for p in body[1:-1].split(",") if p.strip()]
        if not parts:
            raise ValueError("empty continued fraction")
        try:
            entries = tuple(int(p) for p in parts)
        except ValueError:
            raise ValueError(f"continued fraction entries must be integers: {text!r}") from None
        if any(a < 1 for a in entries[1:]):
            raise ValueError("continued fraction entries after the first must be >= 1")
        exact = Fraction(entries[-1])
        for a in reversed(entries[:-1]):
            exact = a + 1 / exact
        return ParsedAlpha("cf:[" + ",".join(map(str, entries)) + "]", float(exact), exact, entries)
    try:
        exact = Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"cannot parse alpha {text!r}") from None
    return ParsedAlpha(s, float(exact), exact, None)


def format_alpha(a: ParsedAlpha) -> str:
    return a.text


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _alpha_arg(text: str) -> ParsedAlpha:
    try:
        return parse_alpha(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(2)


def _grid_flags(p):
    p.add_argument("--res", type=int, default=256, help="pixels per side")
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--bailout", type=float, default=None)
    p.add_argument("--half-width", type=float, default=2.0)
    p.add_argument("--center", type=_complex, default=0j)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="siegelkit", description="Toolkit for z(1+z)^m rotations.")
    parser.add_argument("--version", action="version", version=f"siegelkit {__version__}")
    parser.add_argument("--seed", type=int, default=0, help="reserved; every path is deterministic")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    v = sub.add_parser("verify", help="re-derive the estimate constants")
    fmt = v.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true")
    fmt.add_argument("--csv", action="store_true")
    v.add_argument("--dense", action="store_true", help="ten times the sampling density")

    r = sub.add_parser("render", help="filled Julia set as a PGM mask")
    r.add_argument("--m", type=int, default=2)
    r.add_argument("--alpha", type=_alpha_arg, default=parse_alpha("0"))
    _grid_flags(r)
    r.add_argument("--out", default=None, help="output path; PGM bytes go to stdout when omitted")
    r.add_argument("--format", choices=["pgm"], default="pgm")
    r.add_argument("--supersample", action="store_true")

    a = sub.add_parser("area", help="pixel-count area of the filled Julia set")
    a.add_argument("--m", type=int, default=2)
    a.add_argument("--alpha", type=_alpha_arg, default=parse_alpha("0"))
    _grid_flags(a)
    a.add_argument("--refine", action="store_true", help="also report resolution 2*res")
    a.add_argument("--format", choices=["csv", "json"], default="csv")

    d = sub.add_parser("dens", help="density of the bounded set or of K(delta) in a square")
    d.add_argument("--m", type=int, default=2)
    d.add_argument("--alpha", type=_alpha_arg, default=parse_alpha("golden"))
    _grid_flags(d)
    d.add_argument("--u-center", type=_complex, required=True)
    d.add_argument("--u-radius", type=float, required=True)
    d.add_argument("--delta", type=float, default=None,
                   help="measure K(delta) around the Siegel proxy instead of the bounded set")
    d.add_argument("--format", choices=["csv", "json"], default="csv")

    e = sub.add_parser("explode", help="explosion coefficient and cycle near p/q")
    e.add_argument("--m", type=int, default=2)
    e.add_argument("--p", type=int, required=True)
    e.add_argument("--q", type=int, required=True)
    e.add_argument("--delta", type=_complex, action="append", default=None,
                   help="repeatable; defaults to a tenth of 0.9 q^(-3/q)")
    e.add_argument("--format", choices=["csv", "json"], default="csv")

    h = sub.add_parser("horn", help="horn map constants and samples")
    h.add_argument("--m", type=int, default=2)
    h.add_argument("--height", type=float, default=8.0)
    h.add_argument("--samples", type=int, default=4)
    h.add_argument("--constants", action="store_true", help="print b1, c_upper, c_lower and the residue")
    h.add_argument("--format", choices=["csv", "json"], default="csv")

    n = sub.add_parser("renorm", help="parabolic renormalization R0 f(w)")
    n.add_argument("--m", type=int, default=2)
    n.add_argument("--w", type=_complex, action="append", default=None, help="repeatable sample point")
    n.add_argument("--radius", type=float, default=1e-20, help="polar grid radius when --w is absent")
    n.add_argument("--angles", type=int, default=8)
    n.add_argument("--format", choices=["csv", "json"], default="csv")

    c = sub.add_parser("cf", help="continued fraction table")
    c.add_argument("--alpha", type=_alpha_arg, required=True)
    c.add_argument("--depth", type=int, default=10)
    c.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


def _header(args) -> str:
    cfg = {}
    for k, v in sorted(vars(args).items()):
        if isinstance(v, complex):
            v = _fmt_complex(v)
        elif isinstance(v, ParsedAlpha):
            v = v.text
        elif isinstance(v, list):
            v = [_fmt_complex(x) if isinstance(x, complex) else x for x in v]
        cfg[k] = v
    return "# siegelkit " + __version__ + " " + json.dumps(cfg, sort_keys=True)


def _fmt(x) -> str:
    if isinstance(x, complex):
        return _fmt_complex(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _fmt_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}j"


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _emit_rows(out, header: str, columns, rows, fmt: str):
    out.write(header + "\n")
    if fmt == "json":
        out.write(json.dumps([_jsonable(dict(zip(columns, r))) for r in rows], sort_keys=True) + "\n")
        return
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    out.write(buf.getvalue())


def _grid(args):
    from .julia import GridSpec
    return GridSpec(center=args.center, half_width=args.half_width, resolution=args.res,
                    max_iter=args.max_iter, bailout=args.bailout)


# --------------------------------------------------------------------------
# subcommands

def _cmd_verify(args, out):
    from .ledger import run_all
    results = run_all(dense=args.dense)
    ok = all(r.passed for r in results)
    header = _header(args)
    if args.json:
        out.write(header + "\n")
        out.write(json.dumps({"pass": ok, "checks": [r.as_dict() for r in results]}, sort_keys=True) + "\n")
    else:
        rows = [(r.name, "" if r.m is None else r.m,
                 ";".join(f"{x:.9g}" for x in r.computed),
                 ";".join(f"{x:.9g}" for x in r.printed),
                 "PASS" if r.passed else "FAIL") for r in results]
        if args.csv:
            _emit_rows(out, header, ["name", "m", "computed", "printed", "pass"], rows, "csv")
        else:
            out.write(header + "\n")
            for name, m, _, _, status in rows:
                out.write(f"{status:4s}  {name}{'' if m == '' else f' (m={m})'}\n")
            out.write(f"{sum(r.passed for r in results)}/{len(results)} checks pass\n")
    return 0 if ok else 1


def _cmd_render(args, out):
    from .julia import render_gray, pgm_bytes
    params = FamilyParams(args.m, args.alpha.value)
    img = render_gray(params, _grid(args), supersample=args.supersample)
    data = pgm_bytes(img)
    header = _header(args)
    if args.out is None:
        sys.stderr.write(header + "\n")
        sys.stdout.flush()
        sys.stdout.buffer.write(data)
        sys.stdout.buffer.flush()
    else:
        with open(args.out, "wb") as fh:
            fh.write(data)
        out.write(header + "\n")
        out.write(f"wrote {args.out} {img.shape[1]}x{img.shape[0]} bounded={int((img == 255).sum())}\n")
    return 0


def _cmd_area(args, out):
    from .julia import area_estimate
    params = FamilyParams(args.m, args.alpha.value)
    spec = _grid(args)
    ests = [area_estimate(params, spec)]
    if args.refine:
        ests.append(area_estimate(params, spec.with_(resolution=2 * spec.resolution)))
    rows = [(args.m, args.alpha.text, e.resolution, e.max_iter, e.value, e.inner_count, e.outer_count)
            for e in ests]
    _emit_rows(out, _header(args),
               ["m", "alpha", "resolution", "max_iter", "value", "inner_count", "outer_count"],
               rows, args.format)
    return 0


def _cmd_dens(args, out):
    import numpy as np
    from .julia import GridSpec, dens, filled_julia_mask, k_delta_mask_points, siegel_approximation
    params = FamilyParams(args.m, args.alpha.value)
    spec = _grid(args)
    local = GridSpec(center=args.u_center, half_width=args.u_radius, resolution=args.res,
                     max_iter=args.max_iter, bailout=args.bailout)
    U = np.ones((local.resolution, local.resolution), dtype=bool)
    if args.delta is None:
        X = filled_julia_mask(params, local)
        what = "bounded"
    else:
        S = siegel_approximation(params, spec)
        X = k_delta_mask_points(params, local.points(), args.delta, S, spec, spec.max_iter)
        what = f"K({args.delta!r})"
    value = dens(U, X)
    _emit_rows(out, _header(args),
               ["m", "alpha", "set", "u_center", "u_radius", "resolution", "max_iter", "value"],
               [(args.m, args.alpha.text, what, args.u_center, args.u_radius, local.resolution,
                 local.max_iter, value)], args.format)
    return 0


def _cmd_explode(args, out):
    from .explosion import CycleFunction, chi_prime0, explosion_coefficient
    if args.q < 1 or math.gcd(args.p, args.q) != 1:
        raise ValueError("need q >= 1 and gcd(p, q) = 1")
    A = explosion_coefficient(args.m, args.p, args.q)
    d0 = chi_prime0(args.m, args.p, args.q)
    chi = CycleFunction(p=args.p, q=args.q, m=args.m, A=A, chi_prime0=d0)
    deltas = args.delta or [0.1 * 0.9 * args.q ** (-3.0 / args.q)]
    rows = []
    for delta in deltas:
        cyc = chi(delta)
        res = chi.residual(delta, cyc)
        for k, z in enumerate(cyc):
            rows.append((delta.real, delta.imag, k, z.real, z.imag, res))
    header = _header(args) + f"\n# A={_fmt_complex(A)} chi_prime0={_fmt_complex(d0)}"
    _emit_rows(out, header, ["delta_re", "delta_im", "index", "z_re", "z_im", "residual"],
               rows, args.format)
    return 0


def _cmd_horn(args, out):
    import numpy as np
    from .fatou import fatou_coordinates
    fc = fatou_coordinates(args.m)
    cu, cl = fc.constants
    if args.constants:
        rows = [("b1", fc.germ.b1), ("c_upper", cu), ("c_lower", cl),
                ("residue", (cu - cl) / (2j * math.pi))]
        _emit_rows(out, _header(args), ["quantity", "value"], rows, args.format)
        return 0
    rows = []
    for height in (args.height, -args.height):
        for x in np.arange(args.samples) / args.samples:
            Z = complex(x, height)
            E = complex(fc.horn(Z))
            rows.append((Z.real, Z.imag, E.real, E.imag))
    _emit_rows(out, _header(args), ["re_z", "im_z", "re_E", "im_E"], rows, args.format)
    return 0


def _cmd_renorm(args, out):
    import numpy as np
    from .fatou import ParabolicGerm, parabolic_renorm
    germ = ParabolicGerm(args.m)
    if args.w:
        ws = list(args.w)
    else:
        ws = [args.radius * complex(np.exp(2j * np.pi * k / args.angles)) for k in range(args.angles)]
    rows = []
    for w in ws:
        R = complex(parabolic_renorm(germ, w))
        rows.append((w.real, w.imag, R.real, R.imag))
    _emit_rows(out, _header(args), ["w_re", "w_im", "R_re", "R_im"], rows, args.format)
    return 0


def _cmd_cf(args, out):
    a = args.alpha
    src = Fraction(a.exact) if a.entries is not None else a.exact
    cf = contfrac.expand(src, args.depth)
    rows = []
    total = mpmath.mpf(0)
    prev = mpmath.mpf(1)
    for k, ak in enumerate(cf.entries):
        p, q = cf.convergents[k]
        tail = mpmath.mpf(cf.alphas_exact[k]) if not isinstance(cf.alphas_exact[k], Fraction) \
            else mpmath.mpf(cf.alphas_exact[k].numerator) / cf.alphas_exact[k].denominator
        total = total + (prev * mpmath.log(1 / tail) if tail > 0 else mpmath.inf)
        prev = prev * tail
        rows.append((k, ak, p, q, cf.betas[k], float(total)))
    _emit_rows(out, _header(args), ["k", "a_k", "p_k", "q_k", "beta_k", "phi_partial"], rows, args.format)
    return 0


_COMMANDS = {
    "verify": _cmd_verify,
    "render": _cmd_render,
    "area": _cmd_area,
    "dens": _cmd_dens,
    "explode": _cmd_explode,
    "horn": _cmd_horn,
    "renorm": _cmd_renorm,
    "cf": _cmd_cf,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out = sys.stdout
    try:
        return _COMMANDS[args.command](args, out)
    except (ValueError, ZeroDivisionError) as exc:
        sys.stderr.write(f"siegelkit {args.command}: {exc}\n")
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
