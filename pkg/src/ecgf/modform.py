"""Weight-2 cusp forms of level N and the integral transform H_f.

With phi(t) = sum a_n exp(-2 pi n t / sqrt(N)) the completed L-function is

    xi(s) = N^(s/2) (2 pi)^(-s) Gamma(s) L(f, s) = int_0^inf phi(t) t^(s-1) dt,

and the Fricke relation phi(1/t) = eps t^2 phi(t) folds it onto [1, inf):

    H(z) = xi(1 + z) = int_0^inf Phi(u) (e^(zu) + eps e^(-zu)) / 2 du,
    Phi(u) = 2 e^u phi(e^u).

``CuspForm.sign`` stores w = -eps, so that H(z) + w H(-z) = 0.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate, optimize

from .errors import ConfigError, DomainError, InconsistencyError
from .global_curve import AnTable, eval_L_table
from .numth import ComplexEval, divisor_tables

_EPS = np.finfo(float).eps


# ---------------------------------------------------------------------------
# coefficients


def _euler_function(M: int, step: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Sparse prod_{n>=1} (1 - q^(step n)) up to q^M via pentagonal numbers."""
    exps, signs = [0], [1]
    k = 1
    while True:
        added = False
        for e in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            if step * e <= M:
                exps.append(step * e)
                signs.append(-1 if k % 2 else 1)
                added = True
        if not added:
            break
        k += 1
    return np.array(exps, dtype=np.int64), np.array(signs, dtype=np.int64)


def _sparse_square(exps: np.ndarray, signs: np.ndarray, M: int) -> np.ndarray:
    out = np.zeros(M + 1, dtype=np.int64)
    e = exps[:, None] + exps[None, :]
    c = signs[:, None] * signs[None, :]
    keep = e <= M
    np.add.at(out, e[keep], c[keep])
    return out


@lru_cache(maxsize=4)
def eta11_coeffs(M: int) -> AnTable:
    """Coefficients of q prod (1 - q^n)^2 (1 - q^(11n))^2."""
    if not 1 <= M <= 10**5:
        raise DomainError("eta11_coeffs supports 1 <= M <= 10^5")
    L = M - 1  # the leading q shifts indices by one
    first = _sparse_square(*_euler_function(L), L)
    second = _sparse_square(*_euler_function(L, 11), L)
    prod = np.zeros(L + 1, dtype=np.int64)
    for k in np.nonzero(second)[0]:
        prod[k:] += second[k] * first[: L + 1 - k]
    coeffs = np.zeros(M + 1, dtype=np.int64)
    coeffs[1:] = prod
    return AnTable(coeffs)


# ---------------------------------------------------------------------------
# the form


@dataclass(frozen=True)
class CuspForm:
    level: int
    an: AnTable = field(repr=False)
    sign: int | None = None
    weight: int = 2

    def __post_init__(self):
        if self.weight != 2:
            raise DomainError("only weight 2 is supported")
        if self.level < 1:
            raise DomainError("level must be positive")
        if self.an[1] == 0:
            raise DomainError("a_1 must be nonzero")
        M = self.an.M
        _, d = divisor_tables(M)
        n = np.arange(M + 1)
        if np.any(np.abs(self.an.coeffs[1:]) > n[1:] * d[1:]):
            raise DomainError("coefficients exceed the bound |a_n| <= n d(n)")
        if self.sign not in (None, 1, -1):
            raise DomainError("sign must be +1, -1 or None")

    @property
    def decay(self) -> float:
        """c in exp(-c n t): the exponential rate of phi."""
        return 2 * math.pi / math.sqrt(self.level)

    def with_sign(self) -> "CuspForm":
        if self.sign is not None:
            return self
        return CuspForm(self.level, self.an, detect_sign(self))

    @classmethod
    def eta11(cls, M: int = 2000) -> "CuspForm":
        form = cls(11, eta11_coeffs(M))
        return form.with_sign()

    @classmethod
    def from_file(cls, path: str | Path, level: int, sign: int | None = None) -> "CuspForm":
        """Read `n a_n` pairs, one per line; missing n get a_n = 0."""
        pairs = {}
        for raw in Path(path).read_text().splitlines():
            line = raw.split("#", 1)[0].split()
            if line:
                pairs[int(line[0])] = int(line[1])
        M = max(pairs)
        coeffs = np.zeros(M + 1, dtype=np.int64)
        for n, a in pairs.items():
            coeffs[n] = a
        form = cls(level, AnTable(coeffs), sign)
        return form.with_sign()


def phi_small(f: CuspForm, t: float, tol: float = 1e-17) -> float:
    """phi(t) = sum a_n exp(-c n t), truncated once n d(n) e^(-c n t) is below tol."""
    c = f.decay
    n_max = int(max(2.0, (math.log(1 / tol) + 2 * math.log(1 + 1 / (c * t))) / (c * t))) + 2
    if n_max > f.an.M:
        raise ConfigError(f"phi({t}) needs {n_max} coefficients, only {f.an.M} stored")
    n = np.arange(1, n_max + 1, dtype=float)
    return float(np.dot(f.an.coeffs[1:n_max + 1].astype(float), np.exp(-c * t * n)))


def detect_sign(f: CuspForm, probe: float = 1.25) -> int:
    """w = -eps from phi(1/t) = eps t^2 phi(t) at one probe point."""
    eps = phi_small(f, 1 / probe) / (probe**2 * phi_small(f, probe))
    w = -round(eps)
    if abs(abs(eps) - 1) > 1e-8:
        raise InconsistencyError(f"theta relation gives eps = {eps}, not +-1")
    return w


# ---------------------------------------------------------------------------
# Phi and quadrature settings


@dataclass(frozen=True)
class HEvalConfig:
    u_max: float | None = None
    quad_tol: float = 1e-12
    series_terms: int | None = None

    def __post_init__(self):
        if self.u_max is not None and self.u_max < 3:
            raise ConfigError("u_max must be at least 3")
        if not self.quad_tol > 0:
            raise ConfigError("quad_tol must be positive")


def _series_length(f: CuspForm, u: float, tol: float) -> int:
    c = f.decay * math.exp(u)
    n = max(1, int(math.log(1 / tol) / c) + 2)
    while (n * (n + 1) * math.exp(-c * n) > tol / 10):
        n += 1
    return n


def phi_big(f: CuspForm, u, cfg: HEvalConfig = HEvalConfig()):
    """Phi(u) = 2 e^u phi(e^u); accepts scalars or arrays."""
    scalar = np.isscalar(u)
    uu = np.atleast_1d(np.asarray(u, dtype=float))
    n_terms = cfg.series_terms or _series_length(f, float(uu.min()), cfg.quad_tol * 1e-3)
    if n_terms > f.an.M:
        raise ConfigError(f"Phi({uu.min()}) needs {n_terms} coefficients, only {f.an.M} stored")
    a = f.an.coeffs[1:n_terms + 1].astype(float)
    n = np.arange(1, n_terms + 1, dtype=float)
    t = np.exp(uu)
    vals = 2 * t * (np.exp(-f.decay * np.outer(t, n)) @ a)
    return float(vals[0]) if scalar else vals


def phi_leading(f: CuspForm, u: float) -> float:
    """Leading asymptotic 2 a_1 e^u exp(-c e^u)."""
    return 2 * f.an[1] * math.exp(u) * math.exp(-f.decay * math.exp(u))


def phi_majorant(f: CuspForm, u: float, terms: int = 200) -> float:
    """2 sum n d(n) e^u exp(-c n e^u), a bound on |Phi(u)|."""
    _, d = divisor_tables(terms)
    n = np.arange(1, terms + 1, dtype=float)
    t = math.exp(u)
    return float(2 * t * np.sum(n * d[1:] * np.exp(-f.decay * n * t)))


def tail_bound(f: CuspForm, u_max: float, growth: float) -> float:
    """Bound on int_{u_max}^inf |Phi(u)| e^(growth u) du.

    With v = e^u, |Phi| <= 2 K v e^(-c v) where K bounds sum n d(n) e^(-c (n-1) v),
    and int_V^inf v^g e^(-c v) dv <= V^g e^(-c V) / (c - g / V).
    """
    c = f.decay
    V = math.exp(u_max)
    if c - growth / V <= 0:
        return math.inf
    _, d = divisor_tables(64)
    n = np.arange(1, 65, dtype=float)
    K = float(np.sum(n * d[1:] * np.exp(-c * (n - 1) * V)))
    return 2 * K * V**growth * math.exp(-c * V) / (c - growth / V)


def choose_u_max(f: CuspForm, cfg: HEvalConfig, growth: float) -> float:
    if cfg.u_max is not None:
        if tail_bound(f, cfg.u_max, growth) > cfg.quad_tol:
            raise ConfigError(f"u_max = {cfg.u_max} leaves a tail above {cfg.quad_tol}")
        return cfg.u_max
    u = math.log(math.sqrt(f.level) * math.log(1 / cfg.quad_tol) / (2 * math.pi) + 3)
    u = max(u, 3.0)
    while tail_bound(f, u, growth) > cfg.quad_tol * 1e-2:
        u += 0.05
    return u


def _kernel(f: CuspForm, z: complex, u):
    w = f.sign
    return (np.exp(z * u) - w * np.exp(-z * u)) / 2


def _integrate_complex(g, a: float, b: float, tol: float) -> tuple[complex, float]:
    opts = dict(epsabs=tol * 1e-2, epsrel=1e-13, limit=400)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        re, err_re = integrate.quad(lambda u: g(u).real, a, b, **opts)
        im, err_im = integrate.quad(lambda u: g(u).imag, a, b, **opts)
    err = err_re + err_im
    if caught:
        # quad hit roundoff; its own estimate may be optimistic
        err = max(10 * err, 1e-13 * (abs(re) + abs(im)))
    return complex(re, im), err


def eval_H_lambda(f: CuspForm, lam: float, z: complex, cfg: HEvalConfig = HEvalConfig()) -> ComplexEval:
    """int_0^inf e^(lam u) Phi(u) K(z u) du with the sign-adapted kernel K."""
    f = f.with_sign()
    z = complex(z)
    growth = 1 + abs(z.real) + lam
    u_max = choose_u_max(f, cfg, growth)
    tail = tail_bound(f, u_max, growth)

    def integrand(u):
        return math.exp(lam * u) * phi_big(f, u, cfg) * complex(_kernel(f, z, u))

    val, qerr = _integrate_complex(integrand, 0.0, u_max, cfg.quad_tol)
    return ComplexEval(val, qerr + tail + 64 * _EPS * abs(val))


def eval_H(f: CuspForm, z: complex, cfg: HEvalConfig = HEvalConfig()) -> ComplexEval:
    return eval_H_lambda(f, 0.0, z, cfg)


def h_moments(f: CuspForm, n_max: int, cfg: HEvalConfig = HEvalConfig()) -> list[float]:
    """Moments int Phi(u) u^k du for the n_max + 1 exponents k of the kernel's parity.

    For w = +1 (sinh kernel) k = 1, 3, 5, ...; for w = -1 (cosh kernel) k = 0, 2, 4, ...
    """
    if not 0 <= n_max <= 8:
        raise DomainError("n_max must lie in [0, 8]")
    f = f.with_sign()
    u_max = choose_u_max(f, cfg, 1 + 2 * n_max + 2)
    offset = 1 if f.sign == 1 else 0
    out = []
    for n in range(n_max + 1):
        k = 2 * n + offset
        val, _ = integrate.quad(lambda u: phi_big(f, u, cfg) * u**k, 0.0, u_max,
                                epsabs=cfg.quad_tol * 1e-2, epsrel=1e-13, limit=400)
        out.append(val)
    return out


def moment_series(f: CuspForm, moments: list[float], z: complex) -> complex:
    f = f.with_sign()
    offset = 1 if f.sign == 1 else 0
    return sum(m * complex(z) ** (2 * n + offset) / math.factorial(2 * n + offset)
               for n, m in enumerate(moments))


# ---------------------------------------------------------------------------
# gamma function


_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7,
])


def _loggamma_right(z: np.ndarray) -> np.ndarray:
    """log Gamma(z) for Re z >= 1/2 (Lanczos, g = 7)."""
    zm = z - 1
    series = np.full(z.shape, _LANCZOS[0], dtype=complex)
    for k in range(1, len(_LANCZOS)):
        series = series + _LANCZOS[k] / (zm + k)
    t = zm + _LANCZOS_G + 0.5
    return 0.5 * math.log(2 * math.pi) + (zm + 0.5) * np.log(t) - t + np.log(series)


def gamma(z):
    """Complex Gamma with reflection for Re z < 1/2; arrays allowed."""
    scalar = np.isscalar(z)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any((zz.imag == 0) & (zz.real <= 0) & (zz.real == np.round(zz.real))):
        raise DomainError("Gamma has poles at the nonpositive integers")
    out = np.empty_like(zz)
    right = zz.real >= 0.5
    out[right] = np.exp(_loggamma_right(zz[right]))
    left = ~right
    if np.any(left):
        w = zz[left]
        out[left] = np.pi / (np.sin(np.pi * w) * np.exp(_loggamma_right(1 - w)))
    return complex(out[0]) if scalar else out


def eval_H_gamma(f: CuspForm, z: complex, M: int | None = None) -> ComplexEval:
    """xi(1 + z) = N^(s/2) (2 pi)^(-s) Gamma(s) L(f, s) at s = 1 + z."""
    s = 1 + complex(z)
    table = f.an if M is None else AnTable(f.an.coeffs[: M + 1])
    lval = eval_L_table(table, s)
    factor = cmath.exp(s / 2 * math.log(f.level) - s * math.log(2 * math.pi)) * gamma(s)
    value = factor * lval.value
    err = abs(factor) * lval.abs_error + abs(value) * 1e-13
    return ComplexEval(value, err, certified=lval.certified)


# ---------------------------------------------------------------------------
# falsified transform


def _lower_series(a: np.ndarray) -> np.ndarray:
    """S(a) = sum_n (-1)^n (2 pi)^n / (n! (a + n)) = (2 pi)^(-a) gamma_lower(a, 2 pi)."""
    total = np.zeros(a.shape, dtype=complex)
    coef = 1.0
    for n in range(120):
        total += coef / (a + n)
        coef *= -2 * math.pi / (n + 1)
        if abs(coef) < 1e-20:
            break
    return total


def falsified_series(z, a1: float = 1.0):
    """Closed form a1 [J(z + 2) - J(2 - z)] with J(a) = (2 pi)^(-a) Gamma(a) - S(a)."""
    scalar = np.isscalar(z)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    for a in (zz + 2, 2 - zz):
        if np.any((a.imag == 0) & (a.real <= 0) & (a.real == np.round(a.real))):
            raise DomainError("z + 2 or 2 - z hits a pole of Gamma")

    def upper(a):
        return np.exp(-a * math.log(2 * math.pi)) * gamma(a) - _lower_series(a)

    val = a1 * (upper(zz + 2) - upper(2 - zz))
    return complex(val[0]) if scalar else val


def _falsified_grid(zs: np.ndarray, a1: float) -> np.ndarray:
    """Series values, falling back to quadrature at the removable Gamma poles."""
    zs = np.asarray(zs, dtype=complex)
    poles = np.zeros(zs.shape, dtype=bool)
    for a in (zs + 2, 2 - zs):
        poles |= (a.imag == 0) & (a.real <= 0) & (a.real == np.round(a.real))
    out = np.empty(zs.shape, dtype=complex)
    if np.any(~poles):
        out[~poles] = falsified_series(zs[~poles], a1)
    for i in np.nonzero(poles)[0]:
        out[i] = falsified_quadrature(complex(zs[i]), a1).value
    return out


def falsified_quadrature(z: complex, a1: float = 1.0, tol: float = 1e-13) -> ComplexEval:
    """2 a1 int_0^U e^(2u) exp(-2 pi e^u) sinh(z u) du (literal definition)."""
    z = complex(z)
    growth = 2 + abs(z.real)
    U = 3.0
    while True:
        V = math.exp(U)
        tail = 2 * abs(a1) * V ** (growth - 1) * math.exp(-2 * math.pi * V) / (2 * math.pi - (growth - 1) / V)
        if 2 * math.pi * V > growth and tail < tol * 1e-2:
            break
        U += 0.1

    def g(u):
        return 2 * a1 * math.exp(2 * u - 2 * math.pi * math.exp(u)) * cmath.sinh(z * u)

    val, err = _integrate_complex(g, 0.0, U, tol)
    return ComplexEval(val, err + tail)


def falsified_H(z: complex, a1: float = 1.0, path: str = "series") -> ComplexEval:
    if path == "series":
        zc = complex(z)
        at_pole = zc.imag == 0 and zc.real == round(zc.real) and abs(zc.real) >= 2
        if at_pole:
            return falsified_quadrature(zc, a1)
        val = falsified_series(zc, a1)
        scale = abs(a1) * (1 + abs(z)) * 1e-14
        return ComplexEval(val, scale + 1e-14 * abs(val))
    if path == "quadrature":
        return falsified_quadrature(z, a1)
    raise DomainError(f"unknown path {path!r}")


@dataclass(frozen=True)
class ZeroScan:
    axis_zeros: tuple[float, ...]
    residuals: tuple[float, ...]
    off_axis_min: float
    off_axis_argmin: complex

    @property
    def paired(self) -> tuple[float, ...]:
        return tuple(sorted([-y for y in self.axis_zeros] + list(self.axis_zeros)))


def falsified_zero_scan(y_range=(0.0, 40.0), x_range=(0.1, 3.0), grid: int = 400,
                        a1: float = 1.0) -> ZeroScan:
    """Zeros of y -> Im H(iy) by sign change and bisection, plus min |H| off the axis."""
    if grid < 100:
        raise DomainError("grid must be at least 100")
    y0, y1 = y_range
    ys = np.linspace(max(y0, 1e-6), y1, 40 * grid)

    def axis(y):
        return falsified_series(1j * y, a1).imag

    vals = falsified_series(1j * ys, a1).imag
    zeros, residuals = [], []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        root = optimize.brentq(axis, ys[i], ys[i + 1], xtol=1e-12, rtol=1e-15)
        zeros.append(float(root))
        residuals.append(abs(falsified_series(1j * root, a1)))
    xs = np.linspace(x_range[0], x_range[1], grid)
    yg = np.linspace(y0, y1, grid)
    X, Y = np.meshgrid(xs, yg)
    mags = np.abs(_falsified_grid((X + 1j * Y).ravel(), a1))
    k = int(np.argmin(mags))
    return ZeroScan(tuple(zeros), tuple(residuals), float(mags[k]),
                    complex(X.ravel()[k], Y.ravel()[k]))


def argument_principle_count(func, x_range, y_range, samples: int = 4000) -> int:
    """Winding number of func around the rectangle boundary."""
    (x0, x1), (y0, y1) = x_range, y_range
    edges = [
        x0 + 1j * y0 + (x1 - x0) * np.linspace(0, 1, samples, endpoint=False),
        x1 + 1j * y0 + 1j * (y1 - y0) * np.linspace(0, 1, samples, endpoint=False),
        x1 + 1j * y1 - (x1 - x0) * np.linspace(0, 1, samples, endpoint=False),
        x0 + 1j * y1 - 1j * (y1 - y0) * np.linspace(0, 1, samples, endpoint=False),
    ]
    path = np.concatenate(edges + [edges[0][:1]])
    phase = np.unwrap(np.angle(func(path)))
    return int(round((phase[-1] - phase[0]) / (2 * math.pi)))


def falsified_zeros_in_box(x_range=(-15.0, 15.0), y_range=(0.5, 40.0), a1: float = 1.0,
                           grid: int = 300) -> tuple[int, list[complex]]:
    """Zero count by the argument principle, and Newton-refined locations."""
    count = argument_principle_count(lambda z: falsified_series(z, a1), x_range, y_range)
    xs = np.linspace(*x_range, grid)
    ys = np.linspace(*y_range, grid)
    X, Y = np.meshgrid(xs, ys)
    mags = np.abs(_falsified_grid((X + 1j * Y).ravel(), a1)).reshape(X.shape)
    found: list[complex] = []
    for i in range(1, grid - 1):
        for j in range(1, grid - 1):
            window = mags[i - 1:i + 2, j - 1:j + 2]
            if mags[i, j] != window.min():
                continue
            z = complex(X[i, j], Y[i, j])
            for _ in range(50):
                h = 1e-6 * (1 + abs(z))
                fz = falsified_series(z, a1)
                dz = (falsified_series(z + h, a1) - falsified_series(z - h, a1)) / (2 * h)
                step = fz / dz
                z -= step
                if abs(step) < 1e-13 * (1 + abs(z)):
                    break
            inside = x_range[0] <= z.real <= x_range[1] and y_range[0] <= z.imag <= y_range[1]
            if inside and abs(falsified_series(z, a1)) < 1e-10 and all(abs(z - w) > 1e-6 for w in found):
                found.append(z)
    return count, sorted(found, key=lambda w: (w.imag, w.real))


# ---------------------------------------------------------------------------
# approximate functional equation


@dataclass(frozen=True)
class ApproxFE:
    truncated: complex
    reference: complex
    error_ratio: float


def approx_functional_eq(f: CuspForm, s: complex, x: float, C: float = 4.0) -> ApproxFE:
    """sum_{n<=x} a_n n^-s - a_[x] x^(1-s) / (1-s) against the full partial sum."""
    s = complex(s)
    if s.real < 1.75:
        raise DomainError("approximate functional equation needs Re(s) >= 1.75")
    if abs(s.imag) > 2 * math.pi * x / C:
        raise DomainError(f"|Im s| = {abs(s.imag)} exceeds 2 pi x / C = {2 * math.pi * x / C}")
    fx = math.floor(x)
    if fx > f.an.M:
        raise DomainError("x exceeds the stored coefficients")
    n = np.arange(1, fx + 1, dtype=float)
    head = complex(np.sum(f.an.coeffs[1:fx + 1] * np.exp(-s * np.log(n))))
    truncated = head - f.an[fx] * x ** (1 - s) / (1 - s)
    reference = eval_L_table(f.an, s).value
    return ApproxFE(truncated, reference, abs(truncated - reference) / x ** (1 - s.real))


# ---------------------------------------------------------------------------
# diagnostics


def evenness_defect(f: CuspForm, us=(0.5, 1.0, 2.0, 3.0)) -> dict[float, float]:
    """Phi(u) - Phi(-u) at the given u, with Phi(-u) from the series in e^-u."""
    out = {}
    for u in us:
        out[u] = 2 * math.exp(u) * phi_small(f, math.exp(u)) - 2 * math.exp(-u) * phi_small(f, math.exp(-u))
    return out


def growth_order(f: CuspForm, radii=(5.0, 10.0, 20.0), samples: int = 16,
                 cfg: HEvalConfig = HEvalConfig(quad_tol=1e-10)) -> dict[float, float]:
    """log log max_{|z|=r} |H(z)| / log r at each radius."""
    out = {}
    for r in radii:
        peak = max(abs(eval_H(f, r * cmath.exp(1j * math.pi * k / samples), cfg).value)
                   for k in range(samples + 1))
        out[r] = math.log(math.log(peak)) / math.log(r) if peak > math.e else math.nan
    return out
