"""Local generating functions of a curve over F_p.

kind "A":   1 / (1 - t z + p z^2)
kind "B":   #E(F_p) z (1 - p z^2) / ((1 - t z + p z^2)(1 - z)(1 - p z)),
            whose Taylor coefficients are the counts #E(F_{p^n})
kind "B_s": the B series in the variable z = p^(-s)
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np

from .curve_local import CurveFp
from .errors import DomainError, InconsistencyError, PoleError
from .numth import ComplexEval

KINDS = ("A", "B", "B_s")
POLE_DISTANCE = 1e-9
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class LocalGenFun:
    curve: CurveFp
    kind: str = "A"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")

    def poles(self) -> list[complex]:
        """Poles in the z variable."""
        p, t = self.curve.p, self.curve.t
        disc = cmath.sqrt(t * t - 4 * p)
        # roots of p z^2 - t z + 1
        roots = [(t + disc) / (2 * p), (t - disc) / (2 * p)]
        if self.kind == "A":
            return roots
        return roots + [1.0, 1.0 / p]

    def radius(self) -> float:
        """Radius of convergence of the Taylor series at 0."""
        return min(abs(z) for z in self.poles())


def _rational(p: int, t: int, order: int, kind: str, z):
    """Shared formula, valid for complex floats and mpmath numbers."""
    quad = 1 - t * z + p * z * z
    if kind == "A":
        return 1 / quad
    return order * z * (1 - p * z * z) / (quad * (1 - z) * (1 - p * z))


def _z_of(fun: LocalGenFun, arg: complex) -> complex:
    if fun.kind == "B_s":
        return cmath.exp(-complex(arg) * math.log(fun.curve.p))
    return complex(arg)


def eval_local(fun: LocalGenFun, z: complex) -> ComplexEval:
    """Evaluate at z (or at s for kind B_s) with a condition-number error estimate."""
    zz = _z_of(fun, z)
    if not cmath.isfinite(zz):
        raise DomainError(f"argument {z} overflows p^(-s)")
    poles = fun.poles()
    gaps = [abs(zz - w) for w in poles]
    if min(gaps) <= POLE_DISTANCE * max(1.0, abs(zz)):
        raise PoleError(f"{z} is within {POLE_DISTANCE} of a pole")
    c = fun.curve
    kind = "A" if fun.kind == "A" else "B"
    value = complex(_rational(c.p, c.t, c.order, kind, zz))
    # magnitude before the cancellation in 1 - p z^2
    scale = abs(value) if kind == "A" else abs(
        c.order * zz * (1 + c.p * abs(zz) ** 2)
        / ((1 - c.t * zz + c.p * zz * zz) * (1 - zz) * (1 - c.p * zz)))
    cond = 1.0 + sum(abs(zz) / g for g in gaps)
    if fun.kind == "B_s":
        # p^(-s) carries relative error of order |s| log p
        cond += abs(complex(z)) * math.log(c.p) * (1.0 + cond)
    return ComplexEval(value, 16 * _EPS * scale * cond)


def b_local_s(curve: CurveFp, s: complex) -> complex:
    return eval_local(LocalGenFun(curve, "B_s"), s).value


def euler_factor(curve: CurveFp, s: complex) -> complex:
    """(p^s - 1) B_{p}(s) / #E(F_p), rewritten without the series."""
    p, t = curve.p, curve.t
    ps = cmath.exp(-complex(s) * math.log(p))
    l_factor = 1 / (1 - t * ps + p * ps * ps)
    zeta_ratio = (1 - p * ps * ps) / (1 - p * ps)
    return l_factor * zeta_ratio


# ---------------------------------------------------------------------------
# Taylor coefficients by the trapezoid rule on a circle


def default_rho(fun: LocalGenFun) -> float:
    p = fun.curve.p
    return 1 / (2 * math.sqrt(p)) if fun.kind == "A" else 1 / (2 * p)


def _check_rho(fun: LocalGenFun, rho: float) -> None:
    if fun.kind == "B_s":
        raise DomainError("Cauchy coefficients are defined for kinds A and B only")
    limit = fun.radius()
    if not 0 < rho < limit:
        raise DomainError(f"rho must lie in (0, {limit:.6g}) for kind {fun.kind}")


@lru_cache(maxsize=256)
def _circle_values(p: int, t: int, kind: str, rho: float, quad_points: int, dps: int):
    order = p + 1 - t
    with mpmath.workdps(dps):
        r = mpmath.mpf(rho)
        nodes = [mpmath.expjpi(mpmath.mpf(2 * k) / quad_points) for k in range(quad_points)]
        values = [_rational(p, t, order, kind, r * w) for w in nodes]
    return nodes, values


def _precision(n: int, rho: float) -> int:
    # rounded up so that nearby n share one cached set of circle values
    need = int(n * math.log10(1 / rho)) + 20
    return -(-need // 32) * 32


def _aliasing_bound(fun: LocalGenFun, n: int, rho: float, quad_points: int) -> float:
    """Bound on contamination from coefficients n + kQ, via a wider circle."""
    big = 0.5 * (rho + fun.radius())
    c = fun.curve
    kind = "A" if fun.kind == "A" else "B"
    samples = [abs(complex(_rational(c.p, c.t, c.order, kind, big * cmath.exp(2j * math.pi * k / 64))))
               for k in range(64)]
    ratio = (rho / big) ** quad_points
    return 1.5 * max(samples) * big ** (-n) * 2 * ratio / (1 - ratio)


def _cauchy_mp(fun: LocalGenFun, n: int, rho: float | None, quad_points: int):
    if n < 0:
        raise DomainError("coefficient index must be nonnegative")
    if quad_points < 16:
        raise DomainError("quad_points must be at least 16")
    rho = default_rho(fun) if rho is None else float(rho)
    _check_rho(fun, rho)
    dps = _precision(n, rho)
    c = fun.curve
    nodes, values = _circle_values(c.p, c.t, fun.kind, rho, quad_points, dps)
    with mpmath.workdps(dps):
        # w_k^(-n) is again a node: w_{(-n k) mod Q}
        acc = mpmath.fsum(v * nodes[(-n * k) % quad_points] for k, v in enumerate(values))
        coef = acc / quad_points / mpmath.mpf(rho) ** n
    return coef, rho, dps


def coeff_cauchy(fun: LocalGenFun, n: int, rho: float | None = None,
                 quad_points: int = 256) -> ComplexEval:
    """n-th Taylor coefficient from (1/Q) sum f(rho w_k) (rho w_k)^(-n)."""
    coef, rho, dps = _cauchy_mp(fun, n, rho, quad_points)
    value = complex(coef)
    err = _aliasing_bound(fun, n, rho, quad_points) + abs(value) * 10.0 ** (5 - dps)
    return ComplexEval(value, err)


def integer_coefficient(fun: LocalGenFun, n: int, rho: float | None = None,
                        quad_points: int = 256) -> int:
    """The exact integer Taylor coefficient; raises if the quadrature missed."""
    coef, _, dps = _cauchy_mp(fun, n, rho, quad_points)
    with mpmath.workdps(dps):
        nearest = mpmath.nint(coef.real)
        if abs(coef - nearest) > 1e-6:
            raise InconsistencyError(f"coefficient {n} is {coef}, not an integer")
        return int(nearest)


def series_coefficients(curve: CurveFp, kind: str, n_max: int) -> list[int]:
    """Exact Taylor coefficients from the linear recursion of the denominator."""
    p, t = curve.p, curve.t
    if kind == "A":
        u = [1, t]
        while len(u) <= n_max:
            u.append(t * u[-1] - p * u[-2])
        return u[: n_max + 1]
    if kind == "B":
        counts = [0]
        traces = [2, t]
        while len(traces) <= n_max:
            traces.append(t * traces[-1] - p * traces[-2])
        counts += [1 + p**k - traces[k] for k in range(1, n_max + 1)]
        return counts
    raise DomainError("series coefficients exist for kinds A and B only")


# ---------------------------------------------------------------------------
# functional equation and zeros


def functional_equation_defect(curve: CurveFp, s: complex) -> float:
    fun = LocalGenFun(curve, "B_s")
    return abs(eval_local(fun, s).value + eval_local(fun, 1 - complex(s)).value)


def zero_is_cancelled(curve: CurveFp, k: int) -> bool:
    """Whether 1 - t p^(-s_k) + p^(1-2s_k) vanishes at s_k = 1/2 + i pi k / log p.

    At s_k the expression is 2 - (-1)^k t / sqrt(p), zero only if t^2 = 4p.
    """
    t, p = curve.t, curve.p
    return t * t == 4 * p and (t > 0) == (k % 2 == 0)


def local_zeros(curve: CurveFp, k_range) -> list[complex]:
    if isinstance(k_range, tuple):
        k_range = range(k_range[0], k_range[1] + 1)
    fun = LocalGenFun(curve, "B_s")
    log_p = math.log(curve.p)
    zeros = []
    for k in k_range:
        if zero_is_cancelled(curve, k):
            continue
        s = complex(0.5, math.pi * k / log_p)
        val = eval_local(fun, s).value
        if abs(val) > 1e-8:
            raise InconsistencyError(f"|B(s_{k})| = {abs(val):.3g} is not small")
        zeros.append(s)
    return zeros
