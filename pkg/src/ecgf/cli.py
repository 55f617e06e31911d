"""Command-line front end: `ecgf <command> [options]`.

Floats are written with 17 significant digits so that re-parsing the output
reproduces the in-memory values bit for bit. Exit status: 0 success,
1 usage error or failed self test, 2 domain error, 3 resource error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import re
import sys

from . import acceptance
from . import curve_local as cl
from . import genfun as gf
from . import global_curve as gc
from . import modform as mf
from .errors import DomainError, EcgfError, ResourceError
from .numth import is_probable_prime

CATALOG_ENV = "ECGF_CATALOG"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# ---------------------------------------------------------------------------
# output


def _plain(obj):
    """Reduce results to JSON-ready builtins; complex numbers become {re, im}."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _plain(getattr(obj, f.name)) for f in dataclasses.fields(obj)
                if f.repr}
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if hasattr(obj, "item"):  # numpy scalar
        return _plain(obj.item())
    return obj


def _encode(obj) -> str:
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return format(obj, ".17g") if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{_encode(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, list):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(obj) -> str:
    """JSON text with floats at 17 significant digits."""
    return _encode(_plain(obj))


def render(result, fmt: str) -> str:
    if isinstance(result, str):
        return result
    plain = _plain(result)
    if fmt == "csv" and isinstance(plain, list) and plain and isinstance(plain[0], dict):
        header = list(plain[0])
        return _csv(([row.get(k) for k in header] for row in plain), header)
    return _encode(plain) + "\n"


def _csv(rows, header) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# argument helpers


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _local_curve(args) -> cl.CurveFp:
    if args.p < 5 or not is_probable_prime(args.p):
        raise DomainError(f"p = {args.p} must be a prime >= 5")
    return cl.CurveFp(args.p, args.A % args.p, args.B % args.p)


def _global_curve(args) -> gc.GlobalCurve:
    path = args.catalog or os.environ.get(CATALOG_ENV)
    curves = gc.load_global_catalog(path)
    for curve in curves:
        if curve.name == args.curve:
            return curve
    names = ", ".join(c.name for c in curves)
    raise DomainError(f"curve {args.curve!r} not in catalog ({names})")


def _form(args) -> mf.CuspForm:
    if args.coeff_file:
        if args.level is None:
            raise DomainError("--coeff-file needs --level")
        return mf.CuspForm.from_file(args.coeff_file, args.level)
    return mf.CuspForm(11, mf.eta11_coeffs(args.M)).with_sign()


# ---------------------------------------------------------------------------
# commands


def cmd_count(args):
    curve = _local_curve(args)
    out = {}
    if args.method in ("weil", "both"):
        out["weil"] = cl.count_points_weil(curve, args.n)
    if args.method in ("oracle", "both"):
        out["oracle"] = cl.count_points_oracle(curve, args.n)
    return out


def cmd_census(args):
    return cl.census(_local_curve(args), args.a, args.x, args.eps).to_dict()


def cmd_ratio_census(args):
    return cl.ratio_census(_local_curve(args), args.x)


def cmd_bounds(args):
    return cl.ratio_bounds(_local_curve(args), args.n, args.eps)


def cmd_tauberian(args):
    total = cl.tauberian_sum(_local_curve(args), args.x)
    return {"x": args.x, "sum": total, "normalized": total / math.floor(args.x)}


def cmd_genfun_coeff(args):
    fun = gf.LocalGenFun(_local_curve(args), args.kind)
    ev = gf.coeff_cauchy(fun, args.n, args.rho, args.quad_points)
    exact = gf.series_coefficients(fun.curve, args.kind, args.n)[args.n]
    return {"n": args.n, "value_re": ev.value.real, "value_im": ev.value.imag,
            "abs_error": ev.abs_error, "exact": exact}


def cmd_genfun_feq(args):
    curve = _local_curve(args)
    fun = gf.LocalGenFun(curve, "B_s")
    rows = []
    for s in args.s:
        rec = gf.eval_local(fun, s).record(s)
        rec["defect"] = gf.functional_equation_defect(curve, s)
        rows.append(rec)
    return rows


def cmd_local_zeros(args):
    zeros = gf.local_zeros(_local_curve(args), (args.kmin, args.kmax))
    return [{"re": z.real, "im": z.imag} for z in zeros]


def cmd_global_eval(args):
    curve = _global_curve(args)
    return [gc.eval_B_global(curve, s, args.M, args.path).record(s) for s in args.s]


def cmd_bn(args):
    table = gc.bn_table(_global_curve(args), args.M)
    return [{"n": n, "b": table[n]} for n in range(1, args.M + 1)]


def cmd_residue(args):
    formula, numeric = gc.residue_at_2(_global_curve(args), args.M)
    return {"formula": formula, "numeric": numeric,
            "relative_deviation": abs(formula - numeric) / abs(formula)}


def cmd_global_feq(args):
    curve = _global_curve(args)
    return [{"s_re": s.real, "s_im": s.imag,
             "defect": gc.functional_equation_global(curve, s, args.M)} for s in args.s]


def cmd_b_zero_scan(args):
    minima = gc.b_zero_scan(_global_curve(args), args.sigma, args.tmax, args.step, args.M)
    return [{"t": t, "abs_value": m} for t, m in minima]


def cmd_deuring(args):
    res = gc.deuring_census(_global_curve(args), args.x)
    return {"x": res.x, "count": res.count, "li_half": res.li_half, "ratio": res.ratio}


def cmd_hf_eval(args):
    f = _form(args)
    evaluate = mf.eval_H if args.method == "integral" else mf.eval_H_gamma
    return [evaluate(f, z).record(z) for z in args.z]


def cmd_hf_moments(args):
    f = _form(args)
    return {"sign": f.sign, "moments": mf.h_moments(f, args.n_max)}


def cmd_hf_lambda(args):
    f = _form(args)
    return [dict(mf.eval_H_lambda(f, args.lam, z).record(z), lam=args.lam) for z in args.z]


def cmd_falsified_zeros(args):
    scan = mf.falsified_zero_scan((args.ymin, args.ymax), (args.xmin, args.xmax), args.grid)
    rows = []
    for y, r in zip(scan.axis_zeros, scan.residuals):
        rows += [(y, 0.0, y, r), (-y, 0.0, -y, r)]
    rows.sort()
    if args.format == "csv":
        return _csv(rows, ["y", "re", "im", "abs_error"])
    return {"zeros": [dict(zip(("y", "re", "im", "abs_error"), r)) for r in rows],
            "off_axis_min": scan.off_axis_min, "off_axis_argmin": scan.off_axis_argmin}


def cmd_approx_feq(args):
    f = _form(args)
    res = mf.approx_functional_eq(f, args.s, args.x, args.C)
    return {"s_re": args.s.real, "s_im": args.s.imag, "x": args.x,
            "truncated": res.truncated, "reference": res.reference,
            "error_ratio": res.error_ratio}


def cmd_selftest(args):
    results = acceptance.run_checks(args.jobs, args.seed)
    for r in results:
        print(r.line(), file=sys.stderr)
    return {"passed": all(r.passed for r in results),
            "checks": [{"name": r.name, "passed": r.passed, "elapsed": r.elapsed,
                        "summary": r.summary} for r in results]}


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    # accepted before or after the command name
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    common.add_argument("--jobs", type=int, default=argparse.SUPPRESS,
                        help="worker cap for parallel steps")
    parser = _Parser(prog="ecgf", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    add_parser = sub.add_parser
    sub.add_parser = lambda *a, **kw: add_parser(*a, parents=[common], **kw)

    def local(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--p", type=int, required=True)
        p.add_argument("--A", type=int, required=True)
        p.add_argument("--B", type=int, required=True)
        p.set_defaults(func=func)
        return p

    def global_(name, func, help_text, M=gc.DEFAULT_M):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--curve", default="11a1", help="catalog label")
        p.add_argument("--catalog", help=f"catalog file (default ${CATALOG_ENV} or built-in)")
        p.add_argument("--M", type=int, default=M)
        p.set_defaults(func=func)
        return p

    def form(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--coeff-file", help="file of `n a_n` lines")
        p.add_argument("--level", type=int)
        p.add_argument("--M", type=int, default=10**5, help="eta-product coefficients")
        p.set_defaults(func=func)
        return p

    p = local("count", cmd_count, "#E(F_{p^n}) by recursion and/or enumeration")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--method", choices=("weil", "oracle", "both"), default="both")

    p = local("census", cmd_census, "levels n <= x with #E_n = a mod p^n")
    p.add_argument("--a", type=int, default=1)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.25)

    p = local("ratio-census", cmd_ratio_census, "prime levels where #E_l / #E_1 is prime")
    p.add_argument("--x", type=float, required=True)

    p = local("bounds", cmd_bounds, "upper bounds on #E_n / #E_1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.25)

    p = local("tauberian", cmd_tauberian, "sum of #E_n p^-n up to x")
    p.add_argument("--x", type=float, default=100)

    p = local("genfun-coeff", cmd_genfun_coeff, "Taylor coefficient by contour quadrature")
    p.add_argument("--kind", choices=("A", "B"), default="B")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rho", type=float)
    p.add_argument("--quad-points", type=int, default=256)

    p = local("genfun-feq", cmd_genfun_feq, "local B(s) and its s -> 1-s defect")
    p.add_argument("--s", type=_complex, nargs="+", required=True)

    p = local("local-zeros", cmd_local_zeros, "zeros of local B on Re s = 1/2")
    p.add_argument("--kmin", type=int, default=-3)
    p.add_argument("--kmax", type=int, default=3)

    p = global_("global-eval", cmd_global_eval, "global B(s) on an s-grid")
    p.add_argument("--s", type=_complex, nargs="+", required=True)
    p.add_argument("--path", choices=("factored", "euler"), default="factored")

    global_("bn", cmd_bn, "Dirichlet coefficients b_n, n <= M", M=100)
    global_("residue", cmd_residue, "residue of global B at s = 2")

    p = global_("global-feq", cmd_global_feq, "functional-equation defect of global B")
    p.add_argument("--s", type=_complex, nargs="+", required=True)

    p = global_("b-zero-scan", cmd_b_zero_scan,
                "local minima of |B| along a vertical line (diagnostic)", M=20000)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--tmax", type=float, default=30.0)
    p.add_argument("--step", type=float, default=0.05)

    p = global_("deuring", cmd_deuring, "supersingular prime count for a CM curve")
    p.add_argument("--x", type=float, default=1e5)
    p.set_defaults(curve="32a2")

    p = form("hf-eval", cmd_hf_eval, "H transform of a cusp form")
    p.add_argument("--z", type=_complex, nargs="+", required=True)
    p.add_argument("--method", choices=("integral", "gamma"), default="integral")

    p = form("hf-moments", cmd_hf_moments, "moments of Phi")
    p.add_argument("--n-max", type=int, default=8)

    p = form("hf-lambda", cmd_hf_lambda, "deformed transform H_lambda")
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--z", type=_complex, nargs="+", required=True)

    p = sub.add_parser("falsified-zeros", help="imaginary-axis zeros of the falsified transform")
    p.add_argument("--ymin", type=float, default=0.0)
    p.add_argument("--ymax", type=float, default=40.0)
    p.add_argument("--xmin", type=float, default=0.1)
    p.add_argument("--xmax", type=float, default=3.0)
    p.add_argument("--grid", type=int, default=400)
    p.set_defaults(func=cmd_falsified_zeros, format_default="csv")

    p = form("approx-feq", cmd_approx_feq, "truncated Dirichlet series against the full sum")
    p.add_argument("--s", type=_complex, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--C", type=float, default=4.0)

    p = sub.add_parser("selftest", help="run every acceptance check")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_selftest)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    argv = sys.argv[1:] if argv is None else list(argv)
    # argparse takes "-1-4i" for an option; a leading space makes it a value
    argv = [" " + a if re.match(r"-[\d.]", a) else a for a in argv]
    return build_parser().parse_args(argv)


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    args.jobs = getattr(args, "jobs", 1)
    if args.jobs < 1:
        print("ecgf: error: --jobs must be at least 1", file=sys.stderr)
        return 1
    args.format = getattr(args, "format", None) or getattr(args, "format_default", "json")
    try:
        result = args.func(args)
    except DomainError as exc:
        print(f"ecgf: domain error: {exc}", file=sys.stderr)
        return 2
    except (ResourceError, MemoryError) as exc:
        print(f"ecgf: resource error: {exc}", file=sys.stderr)
        return 3
    except EcgfError as exc:
        print(f"ecgf: {exc}", file=sys.stderr)
        return 1
    sys.stdout.write(render(result, args.format))
    if args.command == "selftest":
        return 0 if result["passed"] else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
