"""Sturm-sequence real-root isolation against factored oracles."""
import random
from fractions import Fraction as F

import pytest

from fiber_atlas.poly import UnivariatePolynomial as U
from fiber_atlas.realroots import (
    RootIsolationResult,
    ZeroPolynomialError,
    cauchy_root_bound,
    count_real_roots,
    isolate_real_roots,
    polynomial_gcd,
    square_free_part,
    sturm_sequence,
)


def g_slice(bundle, u, v):
    return bundle.g_slice(F(u), F(v))


def test_reference_slice_roots(bundle):
    # u=1, v=1/2: the closed-form roots are -1/u^2 = -1 and 1/v = 2
    res = isolate_real_roots(g_slice(bundle, 1, F(1, 2)))
    assert res.count == 2
    mids = [(a + b) / 2 for a, b in res.intervals]
    assert abs(mids[0] + 1) <= F(1, 10**10)
    assert abs(mids[1] - 2) <= F(1, 10**10)
    assert res.multiple == (False, False)


def test_quadratic_factor_degenerates(bundle):
    # u=1/2, v=1/4 makes v - u^2 = 0, so the quadratic factor is x^2 + 1
    q = g_slice(bundle, F(1, 2), F(1, 4))
    res = isolate_real_roots(q)
    assert res.count == 2
    mids = [(a + b) / 2 for a, b in res.intervals]
    assert abs(mids[0] + 4) <= F(1, 10**10)
    assert abs(mids[1] - 4) <= F(1, 10**10)
    # dividing out both linear factors leaves x^2 + 1 up to a constant
    lin = U("x", [F(1, 4), F(1, 16)]) * U("x", [-1, F(1, 4)])
    quotient, rem = q.divmod(lin)
    assert rem.is_zero()
    assert quotient.primitive() == U("x", [1, 0, 1])


def test_no_real_roots():
    assert isolate_real_roots(U("x", [1, 0, 1])).count == 0


def test_multiple_root_detected():
    res = isolate_real_roots(U("x", [1, -2, 1]))
    assert res.count == 1
    assert res.multiple == (True,)
    sf, has_mult = square_free_part(U("x", [1, -2, 1]))
    assert has_mult is True
    assert sf.degree == 1


def test_square_free_part_of_slices(bundle):
    for u, v in [(1, F(1, 2)), (F(1, 2), F(1, 4)), (F(1, 4), F(3, 10))]:
        _, has_mult = square_free_part(g_slice(bundle, u, v))
        assert has_mult is False


def test_zero_polynomial_raises():
    z = U("x", [])
    with pytest.raises(ZeroPolynomialError):
        isolate_real_roots(z)
    with pytest.raises(ZeroPolynomialError):
        square_free_part(z)
    with pytest.raises(ZeroPolynomialError):
        sturm_sequence(z)


def test_exact_rational_root_hit():
    # x (x-1) (x+2): bisection lands exactly on 0
    p = U("x", [0, 1]) * U("x", [-1, 1]) * U("x", [2, 1])
    res = isolate_real_roots(p)
    mids = res.midpoints()
    assert len(mids) == 3
    for got, want in zip(mids, (-2, 0, 1)):
        assert got == pytest.approx(want, abs=1e-9)


def test_intervals_are_disjoint_and_sign_changing():
    random.seed(7)
    for _ in range(40):
        roots = sorted(random.sample(range(-6, 7), random.randint(1, 4)))
        p = U("x", [1])
        for r in roots:
            p = p * U("x", [-r, 1])
        if random.random() < 0.4:
            p = p * U("x", [random.randint(1, 4), 0, 1])
        res = isolate_real_roots(p)
        assert res.count == len(roots)
        s, _ = square_free_part(p)
        for (a1, b1), (a2, b2) in zip(res.intervals, res.intervals[1:]):
            assert b1 < a2 or (b1 == a2 and a1 == b1)  # disjoint, sorted
        for a, b in res.intervals:
            if a == b:
                assert s.evaluate(a) == 0
            else:
                assert s.evaluate(a) * s.evaluate(b) < 0
        mids = res.midpoints()
        for got, want in zip(mids, roots):
            assert got == pytest.approx(want, abs=1e-9)


def test_interval_count_equals_sturm_count():
    random.seed(21)
    for _ in range(25):
        coeffs = [F(random.randint(-9, 9)) for _ in range(random.randint(2, 7))]
        if all(c == 0 for c in coeffs):
            coeffs.append(F(1))
        p = U("x", coeffs)
        if p.is_zero() or p.degree == 0:
            continue
        res = isolate_real_roots(p)
        assert res.count == count_real_roots(p)


def test_refinement_width():
    p = U("x", [-2, 0, 1])  # sqrt(2)
    res = isolate_real_roots(p, precision=F(1, 2**40))
    for a, b in res.intervals:
        assert b - a <= F(1, 2**40)
    assert res.midpoints()[1] == pytest.approx(2**0.5, abs=1e-11)


def test_cauchy_bound_contains_roots():
    p = U("x", [-6, 11, -6, 1])  # roots 1, 2, 3
    b = cauchy_root_bound(p)
    assert b > 3


def test_gcd_basics():
    p = U("x", [-1, 0, 1])      # (x-1)(x+1)
    q = U("x", [1, 1])          # x+1
    assert polynomial_gcd(p, q) == U("x", [1, 1])
    assert polynomial_gcd(p, U("x", [1])).degree == 0


def test_criterion_grid_is_fast_and_exact(bundle):
    # all 27 grid slices: exactly two roots at the closed-form locations
    for un, ud in [(1, 4), (1, 2), (1, 1)]:
        u = F(un, ud)
        for j in range(1, 10):
            v = F(j, 10)
            res = isolate_real_roots(g_slice(bundle, u, v))
            assert res.count == 2
            expected = bundle.expected_roots(u, v)
            mids = [(a + b) / 2 for a, b in res.intervals]
            assert abs(mids[0] - expected[0]) <= F(1, 10**10)
            assert abs(mids[1] - expected[1]) <= F(1, 10**10)
