import cmath
import math

import pytest
from hypothesis import given, settings, strategies as st

from ecgf import genfun as gf
from ecgf.curve_local import CurveFp, count_points_weil, load_local_catalog
from ecgf.errors import DomainError, PoleError

E5 = CurveFp(5, 1, 1)  # t = -3


def test_series_coefficients_are_counts():
    counts = gf.series_coefficients(E5, "B", 10)
    assert counts[0] == 0
    assert counts[1:] == [count_points_weil(E5, n) for n in range(1, 11)]
    assert gf.series_coefficients(E5, "A", 3) == [1, -3, 4, 3]


def test_cauchy_coefficients_exact():
    for kind in ("A", "B"):
        exact = gf.series_coefficients(E5, kind, 30)
        fun = gf.LocalGenFun(E5, kind)
        assert [gf.integer_coefficient(fun, n) for n in range(31)] == exact


def test_cauchy_value_with_error_bar():
    fun = gf.LocalGenFun(E5, "B")
    ev = gf.coeff_cauchy(fun, 7)
    assert abs(ev.value - count_points_weil(E5, 7)) <= max(ev.abs_error, 1e-6)


def test_cauchy_converges_with_more_points():
    fun = gf.LocalGenFun(CurveFp(31, 5, 7), "B")
    assert gf.integer_coefficient(fun, 20, quad_points=128) == \
        gf.integer_coefficient(fun, 20, quad_points=256)


def test_rho_outside_disc_rejected():
    fun = gf.LocalGenFun(E5, "B")
    with pytest.raises(DomainError):
        gf.coeff_cauchy(fun, 3, rho=0.3)  # radius is 1/p
    with pytest.raises(DomainError):
        gf.coeff_cauchy(gf.LocalGenFun(E5, "B_s"), 3)
    with pytest.raises(DomainError):
        gf.LocalGenFun(E5, "C")


def test_poles_and_radius():
    fun = gf.LocalGenFun(E5, "A")
    for z in fun.poles():
        assert abs(1 + 3 * z + 5 * z * z) < 1e-12
        assert abs(z) == pytest.approx(1 / math.sqrt(5))
    assert gf.LocalGenFun(E5, "B").radius() == pytest.approx(0.2)


def test_pole_is_reported():
    with pytest.raises(PoleError):
        gf.eval_local(gf.LocalGenFun(E5, "B"), 1.0)
    with pytest.raises(PoleError):
        gf.eval_local(gf.LocalGenFun(E5, "B_s"), 0.0)


def test_power_series_matches_closed_form_inside_disc():
    fun = gf.LocalGenFun(E5, "B")
    z = 0.05 + 0.03j
    counts = gf.series_coefficients(E5, "B", 80)
    partial = sum(c * z**n for n, c in enumerate(counts))
    assert abs(partial - gf.eval_local(fun, z).value) < 1e-12


def test_euler_factor_relation():
    s = complex(2.3, 1.1)
    p = E5.p
    lhs = (p**s - 1) * gf.b_local_s(E5, s) / E5.order
    assert abs(lhs - gf.euler_factor(E5, s)) < 1e-12


def test_zeros_on_critical_line():
    zeros = gf.local_zeros(E5, (-3, 3))
    assert len(zeros) == 7
    for s in zeros:
        assert s.real == 0.5
        assert abs(gf.b_local_s(E5, s)) < 1e-12
    assert gf.local_zeros(E5, range(0, 1)) == [0.5 + 0j]


def test_zero_cancellation_needs_boundary_trace():
    # t^2 = 4p is impossible for prime p, so no zero is ever cancelled
    for e in load_local_catalog():
        assert not any(gf.zero_is_cancelled(e, k) for k in range(-5, 6))


@given(st.sampled_from(load_local_catalog()),
       st.floats(-3, 4), st.floats(-40, 40))
@settings(max_examples=300, deadline=None)
def test_local_function_is_odd_under_reflection(curve, x, y):
    s = complex(x, y)
    fun = gf.LocalGenFun(curve, "B_s")
    try:
        a = gf.eval_local(fun, s)
        b = gf.eval_local(fun, 1 - s)
    except PoleError:
        return
    assert abs(a.value + b.value) <= 1e-10 * max(abs(a.value), abs(b.value), 1e-300) + a.abs_error + b.abs_error


@given(st.sampled_from([5, 7, 11, 13]), st.integers(0, 30))
@settings(max_examples=40, deadline=None)
def test_every_trace_gives_exact_coefficients(p, n):
    bound = math.isqrt(4 * p)
    for t in (-bound, 0, bound):
        from ecgf.curve_local import curve_with_trace
        e = curve_with_trace(p, t)
        fun = gf.LocalGenFun(e, "B")
        assert gf.integer_coefficient(fun, n) == gf.series_coefficients(e, "B", n)[n]


def test_error_estimate_survives_cancellation():
    # at s = 1/2 + i pi k / log p the numerator vanishes; the bound must stay positive
    s = complex(0.5, math.pi / math.log(5))
    ev = gf.eval_local(gf.LocalGenFun(E5, "B_s"), s)
    assert abs(ev.value) <= ev.abs_error
    assert cmath.isfinite(ev.value)
