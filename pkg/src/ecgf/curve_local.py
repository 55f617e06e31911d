"""Elliptic curves y^2 = x^3 + Ax + B over prime fields and their extensions."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DomainError, InconsistencyError, ResourceError
from .numth import is_probable_prime, li, sieve_primes, sqrt_mod

ENUMERATION_BUDGET = 10**5
# Above this prime the trace is found by baby-step giant-step instead of a
# full character sum.
DIRECT_TRACE_LIMIT = 1000


# ---------------------------------------------------------------------------
# polynomial helpers over F_p (coefficient lists, lowest degree first)


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    dm = len(m) - 1
    inv = pow(m[-1], -1, p)
    while len(a) - 1 >= dm:
        shift = len(a) - 1 - dm
        coef = a[-1] * inv % p
        for i, c in enumerate(m):
            a[shift + i] = (a[shift + i] - coef * c) % p
        _trim(a)
    return a


def _poly_mulmod(a: list[int], b: list[int], m: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                prod[i + j] += x * y
    return _poly_mod(prod, m, p)


def _poly_powmod(a: list[int], e: int, m: list[int], p: int) -> list[int]:
    result, base = [1], _poly_mod(list(a), m, p)
    while e:
        if e & 1:
            result = _poly_mulmod(result, base, m, p)
        base = _poly_mulmod(base, base, m, p)
        e >>= 1
    return result


def _poly_gcd(a: list[int], b: list[int], p: int) -> list[int]:
    a, b = _trim([c % p for c in a]), _trim([c % p for c in b])
    while b:
        a, b = b, _poly_mod(a, b, p)
    return a


def is_irreducible(modulus: list[int], p: int) -> bool:
    """Irreducibility of a monic polynomial over F_p (lowest degree first)."""
    n = len(modulus) - 1
    if n < 1:
        return False
    if n == 1:
        return True
    if modulus[0] % p == 0:
        return False
    x = [0, 1]
    frob = x
    for k in range(1, n + 1):
        frob = _poly_powmod(frob, p, modulus, p)
        diff = list(frob) + [0] * max(0, 2 - len(frob))
        diff[1] -= 1
        if k < n:
            if len(_poly_gcd(modulus, diff, p)) > 1:
                return False
        elif _trim([c % p for c in diff]):
            return False
    return True


@dataclass(frozen=True)
class ExtField:
    """F_{p^n} as F_p[x]/(modulus); modulus is monic, lowest degree first."""

    p: int
    n: int
    modulus: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1 or len(self.modulus) != self.n + 1 or self.modulus[-1] != 1:
            raise DomainError("modulus must be monic of degree n")
        if not is_irreducible(list(self.modulus), self.p):
            raise DomainError(f"modulus {self.modulus} is reducible over F_{self.p}")

    @classmethod
    def smallest(cls, p: int, n: int) -> "ExtField":
        return _smallest_field(p, n)

    @property
    def q(self) -> int:
        return self.p**self.n

    def decode(self, codes) -> np.ndarray:
        """Digit arrays of shape (len(codes), n) for integer element codes."""
        codes = np.asarray(codes, dtype=np.int64)
        powers = self.p ** np.arange(self.n, dtype=np.int64)
        return (codes[:, None] // powers) % self.p

    def encode(self, digits: np.ndarray) -> np.ndarray:
        powers = self.p ** np.arange(self.n, dtype=np.int64)
        return (digits % self.p) @ powers

    def elements(self) -> np.ndarray:
        return self.decode(np.arange(self.q))

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        p, n = self.p, self.n
        low = np.asarray(self.modulus[:n], dtype=np.int64)
        prod = np.zeros((a.shape[0], 2 * n - 1), dtype=np.int64)
        for i in range(n):
            prod[:, i:i + n] += a[:, i:i + 1] * b
        prod %= p
        for d in range(2 * n - 2, n - 1, -1):
            lead = prod[:, d] % p
            prod[:, d - n:d] -= lead[:, None] * low
            prod[:, d] = 0
        return prod[:, :n] % p

    def power(self, a: np.ndarray, e: int) -> np.ndarray:
        result = np.zeros_like(a)
        result[:, 0] = 1
        base = a.copy()
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result


@lru_cache(maxsize=None)
def _smallest_field(p: int, n: int) -> ExtField:
    # tuples run over (c_{n-1}, ..., c_0) in lexicographic order
    for high_first in itertools.product(range(p), repeat=n):
        modulus = tuple(reversed(high_first)) + (1,)
        if is_irreducible(list(modulus), p):
            return ExtField(p, n, modulus)
    raise InconsistencyError(f"no irreducible polynomial of degree {n} over F_{p}")


@lru_cache(maxsize=32)
def _field_tables(p: int, n: int):
    """Elements, their cubes and the quadratic character, indexed by code."""
    fld = _smallest_field(p, n)
    elems = fld.elements()
    cubes = fld.mul(fld.mul(elems, elems), elems)
    pw = fld.power(elems, (fld.q - 1) // 2)
    if np.any(pw[:, 1:]) or not np.all(np.isin(pw[:, 0], (0, 1, p - 1))):
        raise InconsistencyError("Euler criterion produced a non-sign value")
    chi = np.where(pw[:, 0] == 1, 1, np.where(pw[:, 0] == 0, 0, -1)).astype(np.int64)
    return fld, elems, cubes, chi


def _character_sum(p: int, n: int, A: int, B: int) -> int:
    fld, elems, cubes, chi = _field_tables(p, n)
    rhs = cubes + A * elems
    rhs[:, 0] += B
    return int(chi[fld.encode(rhs % p)].sum())


# ---------------------------------------------------------------------------
# Frobenius trace over F_p


@lru_cache(maxsize=64)
def _legendre_table(p: int) -> np.ndarray:
    table = -np.ones(p, dtype=np.int64)
    sq = (np.arange(1, p, dtype=np.int64) ** 2) % p
    table[sq] = 1
    table[0] = 0
    return table


def _trace_direct(p: int, A: int, B: int) -> int:
    x = np.arange(p, dtype=np.int64)
    rhs = ((x * x % p) * x + A * x + B) % p
    return -int(_legendre_table(p)[rhs].sum())


def _ec_add(P, Q, A: int, p: int):
    if P is None:
        return Q
    if Q is None:
        return P
    x1, y1 = P
    x2, y2 = Q
    if x1 == x2:
        if (y1 + y2) % p == 0:
            return None
        lam = (3 * x1 * x1 + A) * pow(2 * y1, -1, p) % p
    else:
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
    x3 = (lam * lam - x1 - x2) % p
    return x3, (lam * (x1 - x3) - y1) % p


def _ec_neg(P, p: int):
    return None if P is None else (P[0], (-P[1]) % p)


def _ec_mul(k: int, P, A: int, p: int):
    if k < 0:
        return _ec_mul(-k, _ec_neg(P, p), A, p)
    R = None
    while k:
        if k & 1:
            R = _ec_add(R, P, A, p)
        P = _ec_add(P, P, A, p)
        k >>= 1
    return R


def _random_point(p: int, A: int, B: int, rng: random.Random):
    while True:
        x = rng.randrange(p)
        rhs = (x * x * x + A * x + B) % p
        if rhs == 0:
            continue
        y = sqrt_mod(rhs, p)
        if y is not None:
            return x, y


def _trace_candidates(P, p: int, A: int, bound: int) -> set[int]:
    """All a with |a| <= bound and (p + 1 - a)P = O."""
    m = math.isqrt(2 * bound + 1) + 1
    baby: dict[int, list[tuple[int, tuple]]] = {}
    jP = None
    for j in range(1, m + 1):
        jP = _ec_add(jP, P, A, p)
        if jP is None:
            break
        baby.setdefault(jP[0], []).append((j, jP))
    found: set[int] = set()
    target = _ec_mul(p + 1, P, A, p)
    center = -bound + m
    R = _ec_add(target, _ec_neg(_ec_mul(center, P, A, p), p), A, p)
    step = _ec_neg(_ec_mul(2 * m + 1, P, A, p), p)
    while center - m <= bound:
        # R = (p + 1 - center)P; look for R = jP or R = -jP
        if R is None:
            found.add(center)
        else:
            for j, Q in baby.get(R[0], ()):
                found.add(center + j if Q[1] == R[1] else center - j)
        R = _ec_add(R, step, A, p)
        center += 2 * m + 1
    return {a for a in found if abs(a) <= bound}


def _trace_bsgs(p: int, A: int, B: int, seed: int = 0) -> int:
    rng = random.Random(seed ^ p)
    nonres = next(d for d in range(2, p) if pow(d, (p - 1) // 2, p) == p - 1)
    # quadratic twist y^2 = x^3 + A d^2 x + B d^3 has trace -t
    twist = (A * nonres * nonres % p, B * pow(nonres, 3, p) % p)
    bound = math.isqrt(4 * p)
    cands: set[int] | None = None
    for rnd in range(40):
        if rnd % 2 == 0:
            P = _random_point(p, A, B, rng)
            new = _trace_candidates(P, p, A, bound)
        else:
            P = _random_point(p, *twist, rng)
            new = {-a for a in _trace_candidates(P, p, twist[0], bound)}
        cands = new if cands is None else cands & new
        if len(cands) == 1:
            return cands.pop()
    if p <= 10**7:
        return _trace_direct(p, A, B)
    raise ResourceError(f"trace ambiguous at p={p}: {sorted(cands or ())[:5]}")


def frobenius_trace(p: int, A: int, B: int) -> int:
    """t with #E(F_p) = p + 1 - t, for p >= 5 and a nonsingular model."""
    if p <= DIRECT_TRACE_LIMIT:
        return _trace_direct(p, A % p, B % p)
    return _trace_bsgs(p, A % p, B % p)


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CurveFp:
    p: int
    A: int
    B: int
    t: int = field(init=False)
    theta: float = field(init=False)

    def __post_init__(self):
        p = self.p
        if p < 5 or not is_probable_prime(p):
            raise DomainError(f"p={p} must be a prime >= 5")
        A, B = self.A % p, self.B % p
        if (4 * A**3 + 27 * B**2) % p == 0:
            raise DomainError(f"y^2 = x^3 + {A}x + {B} is singular mod {p}")
        t = frobenius_trace(p, A, B)
        if t * t > 4 * p:
            raise InconsistencyError(f"trace {t} violates the Hasse bound at p={p}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "t", t)
        cos_theta = max(-1.0, min(1.0, t / (2 * math.sqrt(p))))
        object.__setattr__(self, "theta", math.acos(cos_theta))

    @property
    def order(self) -> int:
        return self.p + 1 - self.t

    def __str__(self):
        return f"y^2 = x^3 + {self.A}x + {self.B} over F_{self.p} (t={self.t})"


@lru_cache(maxsize=None)
def curve_with_trace(p: int, t: int) -> CurveFp:
    """The first curve (A, B) in lexicographic order with trace t."""
    if t * t > 4 * p:
        raise DomainError(f"|t| = {abs(t)} exceeds 2*sqrt({p})")
    for A in range(p):
        x = np.arange(p, dtype=np.int64)
        base = ((x * x % p) * x + A * x) % p
        leg = _legendre_table(p)
        for B in range(p):
            if (4 * A**3 + 27 * B**2) % p == 0:
                continue
            if -int(leg[(base + B) % p].sum()) == t:
                return CurveFp(p, A, B)
    raise InconsistencyError(f"no curve over F_{p} with trace {t}")


def count_points_oracle(curve: CurveFp, fld: ExtField | int) -> int:
    """Point count over F_{p^n} by summing the quadratic character over x."""
    if isinstance(fld, int):
        n = fld
    else:
        if fld.p != curve.p:
            raise DomainError("field characteristic differs from the curve's")
        n = fld.n
    q = curve.p**n
    if q > ENUMERATION_BUDGET:
        raise ResourceError(f"enumeration of F_{curve.p}^{n} exceeds budget {ENUMERATION_BUDGET}")
    return 1 + q + _character_sum(curve.p, n, curve.A, curve.B)


@dataclass(frozen=True)
class TraceSeq:
    curve: CurveFp
    t_seq: tuple[int, ...]

    def __getitem__(self, n: int) -> int:
        return self.t_seq[n]

    def __len__(self):
        return len(self.t_seq)


def _traces(p: int, t: int, n_max: int) -> tuple[int, ...]:
    seq = [2, t]
    for _ in range(n_max - 1):
        seq.append(t * seq[-1] - p * seq[-2])
    return tuple(seq[: n_max + 1])


def trace_seq(curve: CurveFp, n_max: int) -> TraceSeq:
    if n_max < 1:
        raise DomainError("n_max must be at least 1")
    return TraceSeq(curve, _traces(curve.p, curve.t, n_max))


def count_points_weil(curve: CurveFp, n: int) -> int:
    if n < 1:
        raise DomainError("n must be at least 1")
    return 1 + curve.p**n - _traces(curve.p, curve.t, n)[n]


def is_supersingular(curve: CurveFp) -> bool:
    return curve.t % curve.p == 0


def supersingular_residue(p: int, n: int) -> int:
    """Closed-form #E(F_{p^n}) mod p^n for a supersingular curve."""
    if n % 2:
        return 1
    k = n // 2
    sign = -1 if k % 2 == 0 else 1
    return (1 + sign * 2 * p**k) % p**n


def congruence_class(curve: CurveFp, n: int) -> int:
    modulus = curve.p**n
    residue = count_points_weil(curve, n) % modulus
    if is_supersingular(curve):
        if residue != supersingular_residue(curve.p, n):
            raise InconsistencyError(f"supersingular residue mismatch at n={n}")
    elif residue == 1:
        raise InconsistencyError(f"ordinary curve {curve} has residue 1 at n={n}")
    return residue


# ---------------------------------------------------------------------------
# censuses


@dataclass(frozen=True)
class CensusRecord:
    curve: CurveFp
    a: int
    x: float
    hits: tuple[int, ...]
    count: int
    n0: int | None = None
    N: int | None = None
    k_values: tuple[int, ...] = ()
    report: dict | None = None

    def to_dict(self) -> dict:
        return {
            "p": self.curve.p, "A": self.curve.A, "B": self.curve.B, "t": self.curve.t,
            "a": self.a, "x": self.x, "hits": list(self.hits), "count": self.count,
            "n0": self.n0, "N": self.N, "report": self.report,
        }


def _census_counts(hits, x_max: int) -> list[int]:
    """counts[u] = number of hits in [2, u]."""
    counts = [0] * (x_max + 1)
    hit_set = set(hits)
    for u in range(2, x_max + 1):
        counts[u] = counts[u - 1] + (u in hit_set)
    return counts


def _empirical_delta(counts: list[int], eps: float) -> int | None:
    """Smallest u0 with (1-eps)([u]-1) <= [u]_a <= (1+eps)([u]-1) on [u0, x]."""
    x_max = len(counts) - 1
    delta = None
    for u in range(x_max, 1, -1):
        if (1 - eps) * (u - 1) <= counts[u] <= (1 + eps) * (u - 1):
            delta = u
        else:
            break
    return delta


def _inequality_report(curve: CurveFp, a: int, x: float, n0: int, counts, eps: float) -> dict:
    p, theta = curve.p, curve.theta
    fx = math.floor(x)
    delta = _empirical_delta(counts, eps)
    report: dict = {"eps": eps, "delta": delta}
    a = a % p**n0
    if a <= 1 + 2 * math.sqrt(p**n0):
        report["case"] = "small"
    else:
        report["case"] = "large"
        return report
    if delta is None:
        report["holds"] = None
        return report
    spread = theta * (eps * (delta - 1) ** 2 / 2 + (1 + eps) * (x - 1) ** 2 / 2)
    decay = p ** (-delta / 2)
    if a < 1:
        lhs = 0.5 * (1 - eps) * decay - fx + 1 - spread
        rhs = a / 2 * (1 - eps) * decay
        report.update(lhs=lhs, rhs=rhs, holds=bool(lhs <= rhs))
    else:
        lhs = fx - 1 + spread
        rhs = (1 - a) / 2 * (delta * (1 / p - decay) + (1 + eps) * (delta - 1) * decay
                             + (1 + eps) * 2 / math.log(p) * decay)
        report.update(lhs=lhs, rhs=rhs, holds=bool(lhs >= rhs))
    return report


def census(curve: CurveFp, a: int, x: float, eps: float = 0.25) -> CensusRecord:
    """Levels n in [2, x] with #E(F_{p^n}) congruent to a mod p^n."""
    if x < 2:
        raise DomainError("census cutoff must be at least 2")
    x_max = math.floor(x)
    p = curve.p
    traces = _traces(p, curve.t, x_max)
    hits, ks = [], []
    for n in range(2, x_max + 1):
        modulus = p**n
        a_n = a % modulus
        count = 1 + modulus - traces[n]
        if (count - a_n) % modulus:
            continue
        k_n, rem = divmod(1 - traces[n] - a_n, modulus)
        root = math.sqrt(modulus)
        side_ok = a_n <= 1 + 2 * root if k_n == 0 else modulus + 1 - 2 * root <= a_n
        if rem or k_n not in (0, -1) or not side_ok:
            raise InconsistencyError(f"level {n}: k_n = {k_n} breaks the dichotomy")
        hits.append(n)
        ks.append(k_n)
    if len(hits) > x_max - 1:
        raise InconsistencyError("census exceeds [x] - 1")
    if not hits:
        return CensusRecord(curve, a, x, (), 0)
    n0, N = hits[0], hits[-1]
    report = _inequality_report(curve, a, x, n0, _census_counts(hits, x_max), eps)
    return CensusRecord(curve, a, x, tuple(hits), len(hits), n0, N, tuple(ks), report)


@dataclass(frozen=True)
class RatioCensus:
    count: int
    theta: float
    hits: tuple[int, ...]
    pi_x_theta: int
    consistent: bool


def ratio_census(curve: CurveFp, x: float) -> RatioCensus:
    """Primes l <= x for which #E(F_{p^l}) / #E(F_p) is an integral prime.

    `consistent` reports whether the count equals pi(x^theta).
    """
    if x < 2:
        raise DomainError("ratio census needs x >= 2")
    base = curve.order
    hits = []
    for ell in map(int, sieve_primes(max(2, math.floor(x))).primes):
        q, r = divmod(count_points_weil(curve, ell), base)
        if r == 0 and is_probable_prime(q):
            hits.append(ell)
    if not hits:
        return RatioCensus(0, -math.inf, (), 0, True)
    top = hits[-1]
    theta = math.log(top) / math.log(x)
    # x^theta equals the top hit up to rounding
    pi_val = sieve_primes(max(2, top)).pi(top)
    return RatioCensus(len(hits), theta, tuple(hits), pi_val, pi_val == len(hits))


@dataclass(frozen=True)
class PrimeLevelCensus:
    """Prime levels l <= x split by whether #E(F_{p^l}) is 1 mod p^l."""

    x: float
    congruent: int
    non_congruent: int
    li_x: float


def prime_level_census(curve: CurveFp, x: float) -> PrimeLevelCensus:
    if x < 2:
        raise DomainError("x must be at least 2")
    p = curve.p
    primes = [int(v) for v in sieve_primes(max(2, math.floor(x))).primes]
    traces = _traces(p, curve.t, max(primes))
    hit = sum(1 for ell in primes if (1 + p**ell - traces[ell]) % p**ell == 1)
    return PrimeLevelCensus(x, hit, len(primes) - hit, li(x))


@dataclass(frozen=True)
class RatioBounds:
    bound_s3: float
    bound_s7: float
    ratio: float
    holds_s3: bool
    holds_s7: bool
    ratio_ge_1: bool

    @property
    def holds(self) -> bool:
        return self.holds_s3 and self.holds_s7 and self.ratio_ge_1


def angle_bound(p: int, theta: float, n: int) -> float:
    """Ratio bound expressed through sin(theta/2)."""
    s = abs(math.sin(theta / 2))
    return (1 + 2 * p ** ((n - 1) / 2) / s - 1 / s) ** 2


def contour_constant(p: int, eps: float, t: int) -> float:
    """The explicit constant of the contour bound, radius p^(-1/2-eps)."""
    rho = p ** (-0.5 - eps)
    num = abs(1 - p ** (0.5 - eps)) + math.sqrt(p) * (1 - rho)
    den = abs(1 - abs(t) * rho - p ** (-2 * eps)) * (1 - rho) * abs(1 - p ** (0.5 - eps))
    return num / den


def ratio_bounds(curve: CurveFp, n: int, eps: float) -> RatioBounds:
    if not 0 < eps < 1:
        raise DomainError("eps must lie in (0, 1)")
    if n < 1:
        raise DomainError("n must be at least 1")
    p = curve.p
    ratio = float(Fraction(count_points_weil(curve, n), curve.order))
    b3 = angle_bound(p, curve.theta, n)
    b7 = contour_constant(p, eps, curve.t) * p ** ((0.5 + eps) * (n - 1))
    return RatioBounds(b3, b7, ratio, ratio <= b3, ratio <= b7, ratio >= 1)


def tauberian_sum(curve: CurveFp, x: float) -> float:
    if x < 1:
        raise DomainError("x must be at least 1")
    n_max = math.floor(x)
    p = curve.p
    traces = _traces(p, curve.t, max(n_max, 1))
    total = sum(Fraction(1 + p**n - traces[n], p**n) for n in range(1, n_max + 1))
    return float(total)


def count_monotone_check(curve: CurveFp, n_max: int) -> bool:
    if n_max < 2:
        raise DomainError("n_max must be at least 2")
    counts = [count_points_weil(curve, n) for n in range(2, n_max + 1)]
    return all(a < b for a, b in zip(counts, counts[1:]))


# ---------------------------------------------------------------------------
# catalog


def parse_local_catalog(text: str) -> list[CurveFp]:
    curves = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise DomainError(f"line {lineno}: expected 'p A B', got {raw!r}")
        try:
            p, A, B = (int(v) for v in parts)
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from None
        curves.append(CurveFp(p, A, B))
    return curves


def load_local_catalog(path: str | Path | None = None) -> list[CurveFp]:
    if path is None:
        text = resources.files("ecgf").joinpath("data/local_curves.txt").read_text()
    else:
        text = Path(path).read_text()
    return parse_local_catalog(text)
