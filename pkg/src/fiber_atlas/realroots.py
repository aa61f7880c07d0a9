"""Real-root isolation for exact univariate polynomials.

Sturm sequences with rational interval bisection: fully deterministic, no
numerical root-finding trust needed.  Intervals are refined to a requested
rational width; rational roots hit exactly during bisection come back as
degenerate ``[r, r]`` intervals.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from .poly import UnivariatePolynomial

__all__ = [
    "RootIsolationResult",
    "ZeroPolynomialError",
    "sturm_sequence",
    "count_real_roots",
    "isolate_real_roots",
    "square_free_part",
    "polynomial_gcd",
    "cauchy_root_bound",
]


class ZeroPolynomialError(ValueError):
    """Raised when an operation requires a nonzero polynomial."""


@dataclass(frozen=True)
class RootIsolationResult:
    """Disjoint rational intervals, each containing exactly one real root.

    ``intervals`` are half-open ``(a, b]`` by construction (closed ``[r, r]``
    when a root was hit exactly); they are pairwise disjoint, sorted
    ascending, and together account for every real root.  ``multiple[i]``
    flags whether the root in interval i is a multiple root of the input.
    """

    intervals: Tuple[Tuple[Fraction, Fraction], ...]
    multiple: Tuple[bool, ...]
    precision: Fraction

    @property
    def count(self) -> int:
        return len(self.intervals)

    def midpoints(self) -> List[float]:
        return [float((a + b) / 2) for a, b in self.intervals]


def polynomial_gcd(a: UnivariatePolynomial, b: UnivariatePolynomial) -> UnivariatePolynomial:
    """Monic-free exact gcd (primitive, positive leading coefficient)."""
    a, b = a.primitive(), b.primitive()
    while not b.is_zero():
        _, r = a.divmod(b)
        a, b = b, r.primitive() if not r.is_zero() else r
    return a.primitive()


def square_free_part(q: UnivariatePolynomial) -> Tuple[UnivariatePolynomial, bool]:
    """Exact square-free part of ``q`` and whether ``q`` has a multiple root.

    ``gcd(q, q')`` is computed exactly; a multiple root exists iff its degree
    is positive.
    """
    if q.is_zero():
        raise ZeroPolynomialError("square_free_part of the zero polynomial")
    if q.degree == 0:
        return q.primitive(), False
    g = polynomial_gcd(q, q.derivative())
    if g.degree == 0:
        return q.primitive(), False
    s, r = q.divmod(g)
    assert r.is_zero(), "gcd must divide exactly"
    return s.primitive(), True


def _positive_rescale(p: UnivariatePolynomial) -> UnivariatePolynomial:
    """Divide by the positive content; sign pattern is preserved."""
    prim = p.primitive()
    if not p.is_zero() and _sign(p.leading()) != _sign(prim.leading()):
        prim = -prim
    return prim


def sturm_sequence(q: UnivariatePolynomial) -> List[UnivariatePolynomial]:
    """Classic Sturm chain: p, p', then negated remainders until constant.

    Each entry is rescaled by a positive rational to keep coefficients small;
    positive rescaling preserves the sign-variation counts.
    """
    if q.is_zero():
        raise ZeroPolynomialError("Sturm sequence of the zero polynomial")
    chain = [_positive_rescale(q)]
    if q.degree == 0:
        return chain
    chain.append(_positive_rescale(q.derivative()))
    while chain[-1].degree > 0:
        _, r = chain[-2].divmod(chain[-1])
        if r.is_zero():
            break
        chain.append(_positive_rescale(-r))
    return chain


def _sign(x: Fraction) -> int:
    return (x > 0) - (x < 0)


def _variations(signs: Sequence[int]) -> int:
    nz = [s for s in signs if s != 0]
    return sum(1 for a, b in zip(nz, nz[1:]) if a * b < 0)


def _variations_at(chain: Sequence[UnivariatePolynomial], x: Fraction) -> int:
    return _variations([_sign(p.evaluate(x)) for p in chain])


def _variations_at_inf(chain: Sequence[UnivariatePolynomial], positive: bool) -> int:
    signs = []
    for p in chain:
        s = _sign(p.leading())
        if not positive and p.degree % 2 == 1:
            s = -s
        signs.append(s)
    return _variations(signs)


def count_real_roots(q: UnivariatePolynomial, a=None, b=None) -> int:
    """Number of distinct real roots in ``(a, b]`` (whole line by default)."""
    s, _ = square_free_part(q)
    if s.degree <= 0:
        return 0
    chain = sturm_sequence(s)
    va = _variations_at(chain, Fraction(a)) if a is not None else _variations_at_inf(chain, False)
    vb = _variations_at(chain, Fraction(b)) if b is not None else _variations_at_inf(chain, True)
    return va - vb


def cauchy_root_bound(q: UnivariatePolynomial) -> Fraction:
    """Strict bound: every real root r satisfies |r| < bound."""
    if q.is_zero():
        raise ZeroPolynomialError("root bound of the zero polynomial")
    lead = abs(q.leading())
    if q.degree == 0:
        return Fraction(1)
    return 1 + max(abs(c) / lead for c in q.coeffs[:-1])


def _nonroot_split(s: UnivariatePolynomial, a: Fraction, b: Fraction):
    """A split point in (a, b) where s does not vanish, or an exact root."""
    candidates = [
        (a + b) / 2,
        (2 * a + b) / 3,
        (a + 2 * b) / 3,
        (3 * a + b) / 4,
        (a + 3 * b) / 4,
    ]
    for m in candidates:
        if s.evaluate(m) != 0:
            return m, None
    # two distinct roots among five rationals in (a, b) is impossible for
    # an isolating step; the first candidate must then be the root itself
    return None, candidates[0]


def _separate_from_point(
    s: UnivariatePolynomial, lo: Fraction, hi: Fraction, point: Fraction
) -> Tuple[Fraction, Fraction]:
    """Shrink an isolating interval of ``s`` until ``point`` lies outside.

    Keeps the half with the sign change; ``point`` is not a root of ``s``,
    so the loop terminates.
    """
    while lo < point <= hi and lo != hi:
        for cand in (
            (lo + hi) / 2,
            (2 * lo + hi) / 3,
            (lo + 2 * hi) / 3,
            (3 * lo + hi) / 4,
            (lo + 3 * hi) / 4,
        ):
            if cand != point and s.evaluate(cand) != 0:
                m = cand
                break
        if _sign(s.evaluate(m)) == _sign(s.evaluate(lo)):
            lo = m
        else:
            hi = m
    return lo, hi


def _isolate_squarefree(
    s: UnivariatePolynomial, precision: Fraction
) -> List[Tuple[Fraction, Fraction]]:
    """Isolating intervals for a square-free polynomial.

    When bisection lands exactly on a root, that root is divided out and the
    quotient is isolated separately; the exact root comes back as ``[r, r]``.
    """
    if s.degree <= 0:
        return []
    chain = sturm_sequence(s)
    bound = cauchy_root_bound(s)
    a, b = -bound, bound
    # the Cauchy bound is strict, so ±bound are never roots
    total = _variations_at(chain, a) - _variations_at(chain, b)

    isolated: List[Tuple[Fraction, Fraction]] = []
    stack = [(a, b, total)]
    while stack:
        lo, hi, count = stack.pop()
        if count == 0:
            continue
        if count == 1:
            isolated.append((lo, hi))
            continue
        m, exact = _nonroot_split(s, lo, hi)
        if exact is not None:
            quotient, rem = s.divmod(
                UnivariatePolynomial(s.variable, [-exact, Fraction(1)])
            )
            assert rem.is_zero()
            sub = [
                _separate_from_point(quotient, lo2, hi2, exact)
                for lo2, hi2 in _isolate_squarefree(quotient, precision)
            ]
            return sorted(sub + [(exact, exact)])
        vm = _variations_at(chain, m)
        stack.append((lo, m, _variations_at(chain, lo) - vm))
        stack.append((m, hi, vm - _variations_at(chain, hi)))

    refined: List[Tuple[Fraction, Fraction]] = []
    for lo, hi in isolated:
        sign_lo = _sign(s.evaluate(lo))
        while hi - lo > precision:
            m, exact = _nonroot_split(s, lo, hi)
            if exact is not None:
                lo = hi = exact
                break
            if _sign(s.evaluate(m)) == sign_lo:
                lo = m
            else:
                hi = m
        refined.append((lo, hi))
    return sorted(refined)


def isolate_real_roots(
    q: UnivariatePolynomial, precision: Fraction = Fraction(1, 10**12)
) -> RootIsolationResult:
    """Isolate all real roots of ``q`` into disjoint rational intervals.

    Sturm-count bisection on the square-free part; each interval is refined
    until its width is at most ``precision``.
    """
    if q.is_zero():
        raise ZeroPolynomialError("cannot isolate roots of the zero polynomial")
    precision = Fraction(precision)
    if precision <= 0:
        raise ValueError("precision must be positive")
    s, _ = square_free_part(q)
    refined = _isolate_squarefree(s, precision)

    g = polynomial_gcd(q, q.derivative())
    flags = []
    for lo, hi in refined:
        if g.degree <= 0:
            flags.append(False)
        elif lo == hi:
            flags.append(g.evaluate(lo) == 0)
        else:
            gchain = sturm_sequence(g)
            flags.append(_variations_at(gchain, lo) - _variations_at(gchain, hi) > 0)
    return RootIsolationResult(tuple(refined), tuple(flags), precision)
