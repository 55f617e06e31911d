"""Integer and arithmetic-function substrate.

Primes and prime counting, Legendre symbols, multiplicative functions,
exact Dirichlet convolution, partial summation, primality of big integers,
the zeta function on Re(s) > 0 and the logarithmic integral.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .errors import DomainError, PoleError, ResourceError


@dataclass(frozen=True)
class ComplexEval:
    """A complex value together with an estimated absolute error bound.

    ``certified`` is False when the error bound is a heuristic rather than a
    proven tail estimate (for instance a Dirichlet series evaluated left of
    its region of absolute convergence).
    """

    value: complex
    abs_error: float
    certified: bool = True

    def __post_init__(self):
        err = float(self.abs_error)
        if not math.isfinite(err) or err < 0:
            raise ValueError(f"abs_error must be finite and nonnegative, got {err}")
        object.__setattr__(self, "value", complex(self.value))
        object.__setattr__(self, "abs_error", err)

    def record(self, s: complex) -> dict:
        s = complex(s)
        return {
            "s_re": s.real,
            "s_im": s.imag,
            "value_re": self.value.real,
            "value_im": self.value.imag,
            "abs_error": self.abs_error,
        }


# ---------------------------------------------------------------- primes

@lru_cache(maxsize=8)
def _prime_array(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    primes = np.flatnonzero(sieve)
    primes.setflags(write=False)
    return primes


@dataclass(frozen=True, eq=False)
class PrimeTable:
    limit: int
    primes: np.ndarray

    def pi(self, x: float) -> int:
        """Number of primes <= x, for x up to the table limit."""
        if x > self.limit:
            raise DomainError(f"pi({x}) exceeds table limit {self.limit}")
        if x < 2:
            return 0
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def __contains__(self, n: int) -> bool:
        if n > self.limit or n < 2:
            return False
        i = np.searchsorted(self.primes, n)
        return i < len(self.primes) and int(self.primes[i]) == n

    def __len__(self):
        return len(self.primes)

    def __iter__(self):
        return (int(p) for p in self.primes)


def sieve_primes(limit: int) -> PrimeTable:
    if limit < 2:
        raise DomainError("sieve limit must be at least 2")
    limit = int(limit)
    return PrimeTable(limit, _prime_array(limit))


@lru_cache(maxsize=4)
def smallest_prime_factor(limit: int) -> np.ndarray:
    """spf[n] for 0 <= n <= limit (spf[0] = spf[1] = 0)."""
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if spf[p] == 0:
            block = spf[p::p]
            block[block == 0] = p
            # numpy slices of slices are views, so the write lands in spf
    spf.setflags(write=False)
    return spf


_SMALL_PRIMES = tuple(int(p) for p in _prime_array(1000))


def _pollard_brent(n: int, seed: int) -> int:
    rng = random.Random(seed)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


def factorize(n: int) -> dict[int, int]:
    """Prime factorization of a nonzero integer (sign ignored)."""
    n = abs(int(n))
    if n == 0:
        raise DomainError("cannot factor 0")
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_probable_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_brent(m, seed=m & 0xFFFF)
        stack.extend((d, m // d))
    return dict(sorted(out.items()))


def _check_odd_prime(p: int) -> None:
    if p < 3 or p % 2 == 0 or not is_probable_prime(p):
        raise DomainError(f"{p} is not an odd prime")


def legendre(a: int, p: int) -> int:
    _check_odd_prime(p)
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


# ------------------------------------------------- multiplicative functions

def arithmetic_functions(n: int) -> tuple[int, int, int]:
    """(mu(n), sigma(n), d(n))."""
    if n < 1:
        raise DomainError("arithmetic functions need n >= 1")
    mu, sigma, d = 1, 1, 1
    for p, e in factorize(n).items():
        mu = 0 if e > 1 else -mu
        sigma *= (p ** (e + 1) - 1) // (p - 1)
        d *= e + 1
    return mu, sigma, d


def mobius_table(M: int) -> np.ndarray:
    """mu[0..M] with mu[0] = 0."""
    mu = np.ones(M + 1, dtype=np.int64)
    mu[0] = 0
    for p in _prime_array(max(M, 2)):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p :: p * p] = 0
    return mu


def divisor_tables(M: int) -> tuple[np.ndarray, np.ndarray]:
    """(sigma[0..M], d[0..M]) by a divisor sieve."""
    sigma = np.zeros(M + 1, dtype=np.int64)
    d = np.zeros(M + 1, dtype=np.int64)
    for k in range(1, M + 1):
        sigma[k::k] += k
        d[k::k] += 1
    return sigma, d


@dataclass(frozen=True)
class DirichletCoeffs:
    """Coefficients c_1..c_M of a Dirichlet series, stored exactly.

    ``coeffs[n - 1]`` is the coefficient of n^(-s).
    """

    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) < 1:
            raise DomainError("DirichletCoeffs needs at least the index-1 entry")

    @property
    def M(self) -> int:
        return len(self.coeffs)

    def __getitem__(self, n: int):
        if not 1 <= n <= self.M:
            raise IndexError(n)
        return self.coeffs[n - 1]

    @classmethod
    def from_function(cls, f: Callable[[int], int], M: int) -> "DirichletCoeffs":
        return cls(tuple(f(n) for n in range(1, M + 1)))

    @classmethod
    def from_sequence(cls, seq: Sequence) -> "DirichletCoeffs":
        return cls(tuple(int(c) if isinstance(c, (np.integer,)) else c for c in seq))

    def pointwise(self, other: "DirichletCoeffs") -> "DirichletCoeffs":
        if other.M != self.M:
            raise DomainError("truncation lengths differ")
        return DirichletCoeffs(tuple(a * b for a, b in zip(self.coeffs, other.coeffs)))

    def evaluate(self, s: complex) -> complex:
        """Partial sum of c_n n^(-s) in binary64."""
        n = np.arange(1, self.M + 1, dtype=float)
        c = np.array([float(x) for x in self.coeffs])
        return complex(np.sum(c * np.exp(-complex(s) * np.log(n))))


def dirichlet_convolve(f: DirichletCoeffs, g: DirichletCoeffs) -> DirichletCoeffs:
    if f.M != g.M:
        raise DomainError(f"mismatched truncation lengths {f.M} and {g.M}")
    M = f.M
    h = [0] * M
    gc = g.coeffs
    for d, fd in enumerate(f.coeffs, start=1):
        if not fd:
            continue
        for k in range(1, M // d + 1):
            gk = gc[k - 1]
            if gk:
                h[d * k - 1] += fd * gk
    return DirichletCoeffs(tuple(h))


# ------------------------------------------------------ partial summation

def adaptive_simpson(g: Callable[[float], float], a: float, b: float, tol: float,
                     max_depth: int = 50) -> float:
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = g(lm), g(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth <= 0 or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (recurse(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    if b == a:
        return 0.0
    fa, fb, fm = g(a), g(b), g(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


def abel_sum(values: Sequence[float], knots: Sequence[float], f: Callable[[float], float],
             x: float, df: Callable[[float], float] | None = None,
             tol: float = 1e-10) -> tuple[float, float]:
    """Return (direct sum, partial-summation form) of sum_{b_n <= x} a_n f(b_n).

    ``df`` is the derivative of f; a central difference is used if omitted.
    """
    if len(values) != len(knots):
        raise DomainError("values and knots differ in length")
    if any(b2 <= b1 for b1, b2 in zip(knots, knots[1:])):
        raise DomainError("knots must be strictly increasing")
    if not knots or x < knots[0]:
        return 0.0, 0.0
    if df is None:
        def df(t):
            h = 1e-3 * max(1.0, abs(t))
            return (8 * (f(t + h) - f(t - h)) - (f(t + 2 * h) - f(t - 2 * h))) / (12 * h)

    lhs = 0.0
    partial = []
    total = 0.0
    for a, b in zip(values, knots):
        if b > x:
            break
        lhs += a * f(b)
        total += a
        partial.append((b, total))
    integral = 0.0
    for i, (b, A) in enumerate(partial):
        right = partial[i + 1][0] if i + 1 < len(partial) else x
        if A != 0 and right > b:
            integral += A * adaptive_simpson(df, b, right, tol)
    rhs = f(x) * total - integral
    return lhs, rhs


# ---------------------------------------------------------------- primality

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_DETERMINISTIC_BOUND = 3317044064679887385961981


def _mr_round(n: int, d: int, r: int, a: int) -> bool:
    x = pow(a, d, n)
    if x in (1, n - 1):
        return True
    for _ in range(r - 1):
        x = x * x % n
        if x == n - 1:
            return True
    return False


def is_probable_prime(N: int) -> bool:
    """Miller-Rabin; deterministic below 3.3e24, error < 2^-128 above."""
    n = int(N)
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    if not all(_mr_round(n, d, r, a) for a in _MR_WITNESSES):
        return False
    if n < _MR_DETERMINISTIC_BOUND:
        return True
    rng = random.Random(n)
    # each extra round errs with probability <= 1/4
    return all(_mr_round(n, d, r, rng.randrange(2, n - 1)) for _ in range(64))


# --------------------------------------------------------------------- zeta

_BERNOULLI_2K = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510,
                 43867 / 798)
_EM_TERMS = 8
_EPS = np.finfo(float).eps


def _em_terms(s: complex, N: int, K: int):
    """Euler-Maclaurin correction terms T_1..T_{K+1} at shift N."""
    terms = []
    rising = s  # s (s+1) ... (s+2k-2)
    npow = N ** (-s - 1)
    fact = 2.0  # (2k)!
    for k in range(1, K + 2):
        terms.append(_BERNOULLI_2K[k - 1] / fact * rising * npow)
        rising *= (s + 2 * k - 1) * (s + 2 * k)
        npow /= N * N
        fact *= (2 * k + 1) * (2 * k + 2)
    return terms


def zeta(s: complex, target_error: float = 1e-12) -> ComplexEval:
    """Riemann zeta on Re(s) > 0, s != 1, by Euler-Maclaurin summation."""
    s = complex(s)
    if s == 1:
        raise PoleError("zeta has a pole at s = 1")
    if s.real <= 0:
        raise DomainError(f"zeta unsupported for Re(s) <= 0 (s = {s})")
    if abs(s.imag) > 1e3:
        raise DomainError("zeta supported only for |Im s| <= 1000")
    K = _EM_TERMS
    sigma = s.real
    N = max(8, int(abs(s) / 4) + 1)
    while True:
        terms = _em_terms(s, N, K)
        bound = abs(s + 2 * K + 1) / (sigma + 2 * K + 1) * abs(terms[K])
        if bound <= 0.5 * target_error:
            break
        N *= 2
        if N > 1 << 22:
            raise ResourceError(f"zeta({s}) cannot reach target error {target_error}")
    n = np.arange(1, N, dtype=float)
    head = np.exp(-s * np.log(n))
    tail_int = N ** (1 - s) / (s - 1)
    half = 0.5 * N ** (-s)
    corr = sum(terms[:K])
    value = complex(head.sum()) + tail_int + half + corr
    # the phase of n^(-s) carries an error of about |s| log n ulps
    phase = 1.0 + abs(s) * math.log(N)
    rounding = 4 * _EPS * phase * (float(np.abs(head).sum()) + abs(tail_int) + abs(half)
                                   + abs(corr))
    return ComplexEval(value, bound + rounding)


# ------------------------------------------------------- logarithmic integral

_LI2 = 1.0451637801174927848445888891946131365226155781512


def li(x: float) -> float:
    """Logarithmic integral li(x) = li(2) + int_2^x du / log u, for x > 1."""
    if x <= 1:
        raise DomainError("li is evaluated only for x > 1")
    if x == 2:
        return _LI2
    val, _ = integrate.quad(lambda u: 1.0 / math.log(u), 2.0, float(x), limit=400,
                            epsabs=0, epsrel=1e-13)
    return _LI2 + val


def sqrt_mod(a: int, p: int) -> int | None:
    """A square root of a modulo an odd prime p, or None for a non-residue."""
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, tt = 0, t
        while tt != 1:
            tt = tt * tt % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c, t, r = i, b * b % p, t * b * b % p, r * b % p
    return r
