from fractions import Fraction

import pytest
import sympy
from gmpy2 import mpq
from hypothesis import given, settings, strategies as st

from negser.cn import (
    CnPolynomial,
    PreconditionError,
    cn_polynomial,
    dcn_derivative_series,
    dm_polynomial,
    endpoint_signs,
    error_ratios,
    finite_difference_errors,
    grid_zeros,
    isolate_largest_root,
    perturb_ladder,
    rm_bound_check,
    split_instance,
)
from negser.theorem import DCoefficients, ProblemInstance, d_series, substituted_d
from strategies import instances

q = mpq
t, x = sympy.symbols("t x")
PREFIX = ProblemInstance((1,), (q(1, 2),))


def sympy_dm(c_prefix, mu, m):
    """-{prod (1 - c_j t)^mu_j * (1 - x t)^mu_n}_m as a polynomial in x."""
    expr = sympy.Integer(1)
    for cj, mj in zip(c_prefix, mu[:-1]):
        expr *= (1 - sympy.Rational(str(cj)) * t) ** sympy.Rational(str(mj))
    expr *= (1 - x * t) ** sympy.Rational(str(mu[-1]))
    coeff = sympy.expand(sympy.series(expr, t, 0, m + 1).removeO().coeff(t, m))
    return sympy.Poly(-coeff, x)


def as_mpq_coeffs(poly, m):
    all_c = poly.all_coeffs()[::-1]
    all_c += [0] * (m + 1 - len(all_c))
    return tuple(q(str(sympy.Rational(a))) for a in all_c)


def test_dm_polynomial_square_root_pair():
    p2 = dm_polynomial(PREFIX, q(1, 2), 2)
    assert p2.coeffs == (q(1, 8), q(-1, 4), q(1, 8))
    assert p2.coeffs == as_mpq_coeffs(sympy_dm((1,), ("1/2", "1/2"), 2), 2)
    p1 = dm_polynomial(PREFIX, q(1, 2), 1)
    assert p1.coeffs == (q(1, 2), q(1, 2))


def test_dm_polynomial_rejects_bad_index():
    with pytest.raises(PreconditionError):
        dm_polynomial(PREFIX, q(1, 2), 0)
    with pytest.raises(PreconditionError):
        dm_polynomial(PREFIX, q(1, 2), 5, order=4)


def test_dm_polynomial_matches_sympy_three_factors():
    c, mu = (3, q(3, 2)), (q(1, 5), q(1, 2), q(3, 10))
    prefix = ProblemInstance(c, mu[:2])
    for m in range(1, 6):
        assert dm_polynomial(prefix, mu[2], m).coeffs == as_mpq_coeffs(sympy_dm(c, [str(v) for v in mu], m), m)


@given(instances(n_min=2, n_max=4, order=12), st.integers(1, 12), st.integers(1, 999))
@settings(max_examples=40, deadline=None)
def test_polynomial_consistency(inst, m, k):
    prefix, mu_n = split_instance(inst)
    poly = dm_polynomial(prefix, mu_n, m)
    assert len(poly.coeffs) == m + 1
    x0 = prefix.c[-1] * q(k, 1000)
    assert poly.evaluate(x0) == substituted_d(inst, x0, m)[m]
    assert poly.evaluate(inst.c[-1]) == d_series(inst, m)[m]


def test_endpoint_signs_examples():
    p2 = dm_polynomial(PREFIX, q(1, 2), 2)
    assert endpoint_signs(p2) == (-1, 0)
    p1 = dm_polynomial(PREFIX, q(1, 2), 1)
    assert endpoint_signs(p1) == (-1, -1)
    prefix = ProblemInstance((3, 2), (q(1, 3), q(1, 3)))
    for m in range(1, 10):
        assert endpoint_signs(dm_polynomial(prefix, q(1, 3), m)) == (-1, -1)


def _poly(coeffs, c_prev=1):
    return CnPolynomial(tuple(q(a) for a in coeffs), len(coeffs) - 1,
                        ProblemInstance((c_prev,), (q(1, 2),)), q(1, 2))


def test_isolate_known_root_on_grid():
    bracket = isolate_largest_root(_poly([q(-1, 4), 0, 1]), 0, 1)
    assert bracket is not None
    lo, hi = bracket
    assert lo <= q(1, 2) <= hi


def test_isolate_rightmost_of_two_roots_off_grid():
    # (x - 1/3)(x - 2/3) = x^2 - x + 2/9
    lo, hi = isolate_largest_root(_poly([q(2, 9), -1, 1]), 0, 1)
    assert lo < q(2, 3) < hi
    assert hi - lo < q(1, 2**40)


def test_isolate_ignores_tangential_zero():
    p2 = dm_polynomial(PREFIX, q(1, 2), 2)
    assert isolate_largest_root(p2, 0, 1) is None
    assert grid_zeros(p2, 0, 1) == [1]


def test_isolate_degenerate_interval():
    with pytest.raises(ValueError):
        isolate_largest_root(_poly([1, 1]), 1, 1)


@given(instances(n_min=2, n_max=4, order=10), st.integers(1, 10))
@settings(max_examples=15, deadline=None)
def test_no_sign_change_on_valid_instances(inst, m):
    poly = cn_polynomial(inst, m)
    assert isolate_largest_root(poly, 0, poly.c_prev, grid=128) is None


def test_dcn_derivative_examples():
    inst = ProblemInstance((1, q(1, 2)), (q(1, 2), q(1, 2)), order=4)
    dL = dcn_derivative_series(inst)
    assert dL[0] == 0
    assert dL[1] == q(-1, 2)
    xs = sympy.Rational(1, 2)
    expected = sympy.diff(-(1 - x) ** 2 / 8, x).subs(x, xs)
    assert dL[2] == q(str(expected)) == q(1, 8)


@given(instances(n_min=2, n_max=4, order=10))
@settings(max_examples=25, deadline=None)
def test_derivative_consistency(inst):
    dL = dcn_derivative_series(inst)
    for k in range(1, inst.order + 1):
        poly = cn_polynomial(inst, k)
        assert dL[k] == -poly.evaluate_derivative(inst.c[-1])


def test_finite_difference_ratio():
    inst = ProblemInstance((3, 2, 1), (q(1, 2), q(1, 4), q(1, 4)))
    ratios = error_ratios(finite_difference_errors(inst, order=20))
    assert len(ratios) == 10
    assert all(3.2 <= r <= 4.8 for r in ratios)


def test_rm_bound_equality_at_m2():
    inst = ProblemInstance((1, q(1, 2)), (q(1, 2), q(1, 2)))
    rec = rm_bound_check(inst, 2)
    assert rec.rate == q(1, 8) == rec.bound_rate
    assert rec.satisfied
    assert rec.epsilon_star == q(1, 2) * rec.epsilon


def test_rm_bound_m3_gap_is_dropped_term():
    inst = ProblemInstance((1, q(1, 2)), (q(1, 2), q(1, 2)))
    rec = rm_bound_check(inst, 3)
    D = d_series(inst, 3)
    assert rec.rate - rec.bound_rate == q(1, 2) * D[2] > 0
    assert rec.satisfied


def test_rm_bound_preconditions():
    inst = ProblemInstance((1, q(1, 2)), (q(1, 2), q(1, 2)))
    with pytest.raises(PreconditionError):
        rm_bound_check(inst, 1)
    tampered = DCoefficients((q(0), q(1), q(1)), source=inst)
    with pytest.raises(PreconditionError):
        rm_bound_check(inst, 3, D=tampered)


def test_rate_matches_derivative_series():
    inst = ProblemInstance((5, 3, 2, 1), (q(1, 10), q(2, 5), q(1, 4), q(1, 4)), order=15)
    dL = dcn_derivative_series(inst)
    for m in range(2, 16):
        assert rm_bound_check(inst, m).rate == dL[m]


def test_ladder_remainder_is_second_order():
    inst = ProblemInstance((3, 2, 1), (q(1, 2), q(1, 4), q(1, 4)))
    recs = perturb_ladder(inst, 5)
    assert len(recs) == 11 and all(r.satisfied for r in recs)
    assert recs[0].epsilon == Fraction(1, 2**10) and recs[-1].epsilon == Fraction(1, 2**20)
    for a, b in zip(recs, recs[1:]):
        assert 3.9 < a.remainder / b.remainder < 4.1
        assert a.exact_increment - a.lhs_increment == a.remainder
