"""Elliptic curves over Q: reduction data, L(E, s) and the global B series.

B(s) is the Euler product over good primes of (p^s - 1) B_p(s) / #E(F_p).
It factors as

    B(s) = L(E, s) * prod_bad [(1 - a_p p^-s)(1 - p^(1-s)) / (1 - p^(1-2s))]
           * zeta(s - 1) / zeta(2s - 1)

and both forms are evaluated independently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .curve_local import frobenius_trace
from .errors import (ConditioningError, DomainError, InconsistencyError,
                     MissingDataError)
from .numth import (ComplexEval, DirichletCoeffs, dirichlet_convolve, divisor_tables,
                    factorize, legendre, li, mobius_table, sieve_primes,
                    smallest_prime_factor, zeta)

REDUCTION_TYPES = ("good", "split", "nonsplit", "additive")
DEFAULT_M = 10**5
EULER_GAMMA = 0.5772156649015329
ZETA_GUARD = 1e-8
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class ReductionRecord:
    p: int
    reduction: str
    a_p: int
    f_p: int

    def __post_init__(self):
        if self.reduction not in REDUCTION_TYPES:
            raise DomainError(f"unknown reduction type {self.reduction!r}")

    @classmethod
    def parse(cls, token: str) -> "ReductionRecord":
        try:
            p, kind, ap, fp = token.split(":")
            return cls(int(p), kind, int(ap), int(fp))
        except ValueError:
            raise DomainError(f"bad reduction override {token!r}, want p:type:ap:fp") from None


@dataclass(frozen=True)
class GlobalCurve:
    """y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6 over Q."""

    a1: int
    a2: int
    a3: int
    a4: int
    a6: int
    cm: bool = False
    overrides: tuple[ReductionRecord, ...] = ()
    name: str = ""

    def __post_init__(self):
        if self.disc == 0:
            raise DomainError("singular Weierstrass model (discriminant 0)")

    @property
    def ainvs(self) -> tuple[int, int, int, int, int]:
        return self.a1, self.a2, self.a3, self.a4, self.a6

    @property
    def b_invariants(self):
        a1, a2, a3, a4, a6 = self.ainvs
        b2 = a1 * a1 + 4 * a2
        b4 = 2 * a4 + a1 * a3
        b6 = a3 * a3 + 4 * a6
        b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4
        return b2, b4, b6, b8

    @property
    def c4(self) -> int:
        b2, b4, _, _ = self.b_invariants
        return b2 * b2 - 24 * b4

    @property
    def c6(self) -> int:
        b2, b4, b6, _ = self.b_invariants
        return -b2**3 + 36 * b2 * b4 - 216 * b6

    @property
    def disc(self) -> int:
        b2, b4, b6, b8 = self.b_invariants
        return -b2 * b2 * b8 - 8 * b4**3 - 27 * b6 * b6 + 9 * b2 * b4 * b6

    @cached_property
    def override_map(self) -> dict[int, ReductionRecord]:
        return {r.p: r for r in self.overrides}

    @cached_property
    def bad_primes(self) -> tuple[ReductionRecord, ...]:
        records = [reduce_curve(self, p) for p in sorted(factorize(abs(self.disc)))]
        extra = [r for p, r in self.override_map.items() if self.disc % p]
        return tuple(r for r in sorted(records + extra, key=lambda r: r.p)
                     if r.reduction != "good")

    @cached_property
    def conductor(self) -> int:
        return math.prod(r.p**r.f_p for r in self.bad_primes)

    def __str__(self):
        return self.name or f"[{','.join(map(str, self.ainvs))}]"


def _valuation(n: int, p: int) -> int:
    if n == 0:
        return 10**9
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _minimal_invariants(curve: GlobalCurve, p: int) -> tuple[int, int, int]:
    """(c4, c6, disc) of a model minimal at p >= 5."""
    c4, c6, disc = curve.c4, curve.c6, curve.disc
    while (_valuation(c4, p) >= 4 and _valuation(c6, p) >= 6
           and _valuation(disc, p) >= 12):
        c4, c6, disc = c4 // p**4, c6 // p**6, disc // p**12
    return c4, c6, disc


def _count_long_model(curve: GlobalCurve, p: int) -> int:
    a1, a2, a3, a4, a6 = curve.ainvs
    affine = sum(1 for x in range(p) for y in range(p)
                 if (y * y + a1 * x * y + a3 * y - x**3 - a2 * x * x - a4 * x - a6) % p == 0)
    return affine + 1


def _node_is_split(A: int, B: int, p: int) -> bool:
    """Tangent test at the node of y^2 = x^3 + Ax + B (multiplicative reduction).

    The cubic is (x - x0)^2 (x + 2 x0) with x0 = -3B / (2A); near the node
    y^2 ~ 3 x0 (x - x0)^2, so the tangents are rational iff 3 x0 is a square.
    """
    x0 = -3 * B * pow(2 * A, -1, p) % p
    return legendre(3 * x0, p) == 1


def reduce_curve(curve: GlobalCurve, p: int) -> ReductionRecord:
    if p in curve.override_map:
        return curve.override_map[p]
    if p in (2, 3):
        if curve.disc % p:
            return ReductionRecord(p, "good", p + 1 - _count_long_model(curve, p), 0)
        raise MissingDataError(f"reduction data at p={p} must be supplied for {curve}")
    c4, c6, disc = _minimal_invariants(curve, p)
    A, B = -27 * c4 % p, -54 * c6 % p
    if disc % p:
        a_p = frobenius_trace(p, A, B)
        if a_p * a_p >= 4 * p:
            raise InconsistencyError(f"a_{p} = {a_p} breaks the Hasse bound")
        return ReductionRecord(p, "good", a_p, 0)
    if c4 % p == 0:
        return ReductionRecord(p, "additive", 0, 2)
    split = _node_is_split(A, B, p)
    if split != (legendre(-c6, p) == 1):
        raise InconsistencyError(f"tangent test and (-c6/p) disagree at p={p}")
    return ReductionRecord(p, "split" if split else "nonsplit", 1 if split else -1, 1)


@lru_cache(maxsize=16)
def _prime_data(curve: GlobalCurve, limit: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(primes, a_p, good mask) for all primes <= limit."""
    primes = sieve_primes(max(limit, 2)).primes
    ap = np.zeros(len(primes), dtype=np.int64)
    good = np.ones(len(primes), dtype=bool)
    disc = curve.disc
    for i, p in enumerate(map(int, primes)):
        if p < 5 or disc % p == 0 or p in curve.override_map:
            rec = reduce_curve(curve, p)
            ap[i] = rec.a_p
            good[i] = rec.reduction == "good"
        else:
            ap[i] = frobenius_trace(p, -27 * curve.c4, -54 * curve.c6)
    return primes, ap, good


@dataclass(frozen=True)
class AnTable:
    """a_1..a_M of L(E, s); ``coeffs[n]`` is a_n and index 0 is unused."""

    coeffs: np.ndarray = field(repr=False)

    @property
    def M(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.M:
            raise IndexError(n)
        return int(self.coeffs[n])

    def as_dirichlet(self) -> DirichletCoeffs:
        return DirichletCoeffs(tuple(int(v) for v in self.coeffs[1:]))

    @classmethod
    def constant_one(cls, M: int) -> "AnTable":
        """a_n = 1 for every n; its L-series is zeta."""
        c = np.ones(M + 1, dtype=np.int64)
        c[0] = 0
        return cls(c)


@lru_cache(maxsize=8)
def an_table(curve: GlobalCurve, M: int = DEFAULT_M) -> AnTable:
    if M < 1:
        raise DomainError("M must be at least 1")
    primes, ap, good = _prime_data(curve, max(M, 2))
    a = np.zeros(M + 1, dtype=np.int64)
    a[1] = 1
    for p, a_p, is_good in zip(map(int, primes), map(int, ap), good):
        if p > M:
            break
        prev, cur, pk = 1, a_p, p
        while pk <= M:
            a[pk] = cur
            nxt = a_p * cur - (p * prev if is_good else 0)
            prev, cur, pk = cur, nxt, pk * p
    spf = smallest_prime_factor(M)
    for n in range(2, M + 1):
        p = int(spf[n])
        m, pk = n, 1
        while m % p == 0:
            m //= p
            pk *= p
        if m > 1:
            a[n] = a[pk] * a[m]
    return AnTable(a)


# ---------------------------------------------------------------------------
# L(E, s)


def l_tail_bound(sigma: float, M: int) -> float:
    """Bound on sum_{n > M} d(n) n^(1/2 - sigma), valid for sigma > 3/2."""
    x = sigma - 1.5
    decay = M ** (-x)
    return (math.log(M) + 2 * EULER_GAMMA) * decay / x + decay / (x * x)


def eval_L_table(table: AnTable, s: complex) -> ComplexEval:
    s = complex(s)
    M = table.M
    n = np.arange(1, M + 1, dtype=float)
    terms = table.coeffs[1:].astype(float) * np.exp(-s * np.log(n))
    value = complex(terms.sum())
    rounding = 4 * _EPS * (1 + abs(s) * math.log(M + 1)) * float(np.abs(terms).sum())
    sigma = s.real
    if sigma > 1.5:
        tail = l_tail_bound(sigma, M)
    else:
        # no proven bound left of absolute convergence; use the last-half drift
        tail = abs(complex(terms[M // 2:].sum()))
    return ComplexEval(value, tail + rounding, certified=sigma >= 1.75)


def eval_L(curve: GlobalCurve, s: complex, M: int = DEFAULT_M) -> ComplexEval:
    return eval_L_table(an_table(curve, M), s)


# ---------------------------------------------------------------------------
# B over Q


def factored_domain_violation(s: complex) -> str | None:
    """Name of the excluded set containing s for the factored path, if any."""
    s = complex(s)
    if s == 2:
        return "pole at s = 2"
    if s.real == 0:
        return "line Re(s) = 0"
    if 0.5 <= s.real < 1:
        return "strip 1/2 <= Re(s) < 1"
    if s.imag == 0 and s.real < 0:
        n = 0.5 - s.real
        if n == int(n) and int(n) % 2 == 0:
            return "points -n + 1/2, n = 2, 4, ..."
    if s.real <= 1:
        return "zeta continuation unsupported for Re(s) <= 1"
    if abs(s.imag) > 500:
        return "|Im s| > 500 exceeds the zeta evaluator range"
    return None


def bad_factor(curve: GlobalCurve, s: complex) -> complex:
    """prod over bad p of (1 - a_p p^-s)(1 - p^(1-s)) / (1 - p^(1-2s))."""
    s = complex(s)
    out = 1 + 0j
    for r in curve.bad_primes:
        ps = cmath.exp(-s * math.log(r.p))
        out *= (1 - r.a_p * ps) * (1 - r.p * ps) / (1 - r.p * ps * ps)
    return out


def _zeta_ratio(s: complex) -> tuple[complex, float]:
    """zeta(s-1) / zeta(2s-1) and its absolute error."""
    num = zeta(s - 1)
    den = zeta(2 * s - 1)
    if abs(den.value) < ZETA_GUARD:
        raise ConditioningError(f"|zeta(2s-1)| = {abs(den.value):.2e} at s = {s}")
    ratio = num.value / den.value
    rel = num.abs_error / abs(num.value) + den.abs_error / abs(den.value)
    return ratio, abs(ratio) * rel


def _eval_factored(curve: GlobalCurve, s: complex, M: int) -> ComplexEval:
    lval = eval_L(curve, s, M)
    zr, zr_err = _zeta_ratio(s)
    bf = bad_factor(curve, s)
    value = lval.value * bf * zr
    rel = (lval.abs_error / max(abs(lval.value), 1e-300) + zr_err / abs(zr)
           + 8 * _EPS * (1 + len(curve.bad_primes)))
    return ComplexEval(value, abs(value) * rel, certified=lval.certified)


def _eval_euler(curve: GlobalCurve, s: complex, P: int) -> ComplexEval:
    sigma = s.real
    if sigma <= 2:
        raise DomainError(f"Euler path needs Re(s) > 2, got {s}")
    primes, ap, good = _prime_data(curve, P)
    pf = primes.astype(float)
    z = np.exp(-s * np.log(pf))
    t = ap.astype(float)
    order = pf + 1 - t
    # literal (p^s - 1) B_p(s) / #E(F_p) with B_p in the variable z = p^-s
    b_local = order * z * (1 - pf * z * z) / ((1 - t * z + pf * z * z) * (1 - z) * (1 - pf * z))
    local = (1 / z - 1) * b_local / order
    head = complex(np.prod(local[good]))
    # the zeta part of the omitted primes, supplied exactly
    zeta_part = (1 - pf * z * z) / (1 - pf * z)
    zr, zr_err = _zeta_ratio(s)
    tail = zr / complex(np.prod(zeta_part))
    value = head * tail
    log_p = math.log(P)
    l_tail = 2 * P ** (1.5 - sigma) / ((sigma - 1.5) * log_p)
    rel = l_tail * math.exp(l_tail) + zr_err / abs(zr) + 8 * _EPS * len(primes)
    return ComplexEval(value, abs(value) * rel)


def eval_B_global(curve: GlobalCurve, s: complex, M: int = DEFAULT_M,
                  path: str = "factored") -> ComplexEval:
    s = complex(s)
    if path == "euler":
        return _eval_euler(curve, s, M)
    if path != "factored":
        raise DomainError(f"unknown path {path!r}")
    violation = factored_domain_violation(s)
    if violation:
        raise DomainError(f"s = {s} lies in the excluded set: {violation}")
    return _eval_factored(curve, s, M)


def b_growth_bound(curve: GlobalCurve, s: complex, delta: float = 0.49) -> float:
    """Explicit bound on |B(s)| for Re(s) > 2.

    The zeta growth constant is max(zeta(sigma - 1), zeta(2 sigma - 1) / zeta(4 sigma - 2)),
    which bounds |zeta(s - 1)| and |1 / zeta(2s - 1)| on the vertical line.
    """
    s = complex(s)
    sigma = s.real
    if sigma <= 2:
        raise DomainError("growth bound is stated for Re(s) > 2")
    gamma1 = max(zeta(sigma - 1).value.real,
                 zeta(2 * sigma - 1).value.real / zeta(4 * sigma - 2).value.real)
    bad = math.prod(1 + 1 / r.p for r in curve.bad_primes)
    const = 36 * zeta(3).value.real * zeta(1.5).value.real / math.pi**2
    return const * bad * gamma1**2 * (abs(s.imag) + 2) ** (2 * delta)


# ---------------------------------------------------------------------------
# b_n coefficients


def bn_table(curve: GlobalCurve | None, M: int, an: AnTable | None = None) -> DirichletCoeffs:
    """b = a * (sigma d) * (mu * mu) * (n mu), exact integers."""
    if M < 1:
        raise DomainError("M must be at least 1")
    if an is None:
        an = an_table(curve, M)
    a = DirichletCoeffs(tuple(int(an.coeffs[n]) for n in range(1, M + 1)))
    sigma, d = divisor_tables(M)
    mu = mobius_table(M)
    sd = DirichletCoeffs(tuple(int(sigma[n] * d[n]) for n in range(1, M + 1)))
    mu_c = DirichletCoeffs(tuple(int(mu[n]) for n in range(1, M + 1)))
    id_mu = DirichletCoeffs(tuple(n * int(mu[n]) for n in range(1, M + 1)))
    inner = dirichlet_convolve(dirichlet_convolve(mu_c, mu_c), id_mu)
    return dirichlet_convolve(a, dirichlet_convolve(sd, inner))


# ---------------------------------------------------------------------------
# residue at s = 2


def residue_formula(curve: GlobalCurve, M: int = DEFAULT_M) -> float:
    lval = eval_L(curve, 2, M).value.real
    bad = math.prod((1 - 1 / r.p) / (1 - r.p**-3) * (1 - r.a_p / r.p**2)
                    for r in curve.bad_primes)
    return lval / zeta(3).value.real * bad


def _neville_at_zero(xs, ys) -> float:
    """Value at 0 of the interpolating polynomial through (xs, ys)."""
    table = list(ys)
    n = len(xs)
    for k in range(1, n):
        for i in range(n - k):
            table[i] = (xs[i + k] * table[i] - xs[i] * table[i + 1]) / (xs[i + k] - xs[i])
    return table[0]


def residue_at_2(curve: GlobalCurve, M: int = DEFAULT_M) -> tuple[float, float]:
    """(closed form, extrapolated h * B(2 + h) from the Euler path)."""
    formula = residue_formula(curve, M)
    hs = [1e-2, 1e-3, 1e-4]
    samples = [h * eval_B_global(curve, 2 + h, M, "euler").value.real for h in hs]
    return formula, _neville_at_zero(hs, samples)


# ---------------------------------------------------------------------------
# functional equation


def functional_equation_global(curve: GlobalCurve, s: complex, M: int = DEFAULT_M) -> float:
    """|B(1-s) - B(s) zeta(s) prod_bad(1 - p^-s) / (zeta(2s-1) prod_bad(1 - p^(1-2s)))|,
    relative to |B(1-s)|; both sides go through the factored path."""
    s = complex(s)
    for point in (s, 1 - s):
        violation = factored_domain_violation(point)
        if violation:
            raise DomainError(f"s = {point} lies in the excluded set: {violation}")
    lhs = eval_B_global(curve, 1 - s, M).value
    rhs = eval_B_global(curve, s, M).value * zeta(s).value / zeta(2 * s - 1).value
    for r in curve.bad_primes:
        rhs *= (1 - r.p ** (-s)) / (1 - r.p ** (1 - 2 * s))
    return abs(lhs - rhs) / max(abs(lhs), 1e-300)


# ---------------------------------------------------------------------------
# Deuring census


@dataclass(frozen=True)
class DeuringCensus:
    x: float
    count: int
    li_half: float
    primes: tuple[int, ...] = field(repr=False, default=())

    @property
    def ratio(self) -> float:
        return self.count / self.li_half if self.li_half else math.nan


def deuring_census(curve: GlobalCurve, x: float) -> DeuringCensus:
    """Good primes p <= x with a_p divisible by p."""
    if not curve.cm:
        raise DomainError(f"{curve} is not flagged as having complex multiplication")
    if x > 10**6:
        raise DomainError("deuring census supports x <= 10^6")
    if x < 2:
        return DeuringCensus(x, 0, 0.0)
    primes, ap, good = _prime_data(curve, int(x))
    hits = tuple(int(p) for p, a, g in zip(primes, ap, good) if g and int(a) % int(p) == 0)
    return DeuringCensus(x, len(hits), 0.5 * li(x), hits)


# ---------------------------------------------------------------------------
# zero scan along a vertical line


def b_zero_scan(curve: GlobalCurve, sigma: float, t_max: float, step: float = 0.05,
                M: int = 20000) -> list[tuple[float, float]]:
    """Local minima of |B(sigma + it)| for 0 < t <= t_max, as (t, |B|) pairs."""
    ts = np.arange(step, t_max + step / 2, step)
    mags = []
    for t in ts:
        try:
            mags.append(abs(eval_B_global(curve, complex(sigma, t), M).value))
        except DomainError:
            mags.append(math.nan)
    return [(float(ts[i]), mags[i]) for i in range(1, len(ts) - 1)
            if mags[i] < mags[i - 1] and mags[i] < mags[i + 1]]


# ---------------------------------------------------------------------------
# catalog


def parse_global_catalog(text: str) -> list[GlobalCurve]:
    curves = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body, _, comment = raw.partition("#")
        parts = body.split()
        if not parts:
            continue
        if len(parts) < 5:
            raise DomainError(f"line {lineno}: need a1 a2 a3 a4 a6, got {raw!r}")
        try:
            ainvs = [int(v) for v in parts[:5]]
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from None
        rest = parts[5:]
        cm = bool(rest) and rest[0].lower() == "cm"
        if cm:
            rest = rest[1:]
        records = tuple(ReductionRecord.parse(tok) for tok in rest)
        curves.append(GlobalCurve(*ainvs, cm=cm, overrides=records, name=comment.strip()))
    return curves


def load_global_catalog(path: str | Path | None = None) -> list[GlobalCurve]:
    if path is None:
        text = resources.files("ecgf").joinpath("data/global_curves.txt").read_text()
    else:
        text = Path(path).read_text()
    return parse_global_catalog(text)
