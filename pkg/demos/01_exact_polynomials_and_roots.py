"""Exact polynomial algebra: parsing, calculus, and real-root isolation.

The algebra layer works over arbitrary-precision rationals, so algebraic
facts (derivative values, root locations, multiple-root tests) come out
exact rather than approximate.
"""
from fractions import Fraction as F

from fiber_atlas import Polynomial, PolynomialMap, isolate_real_roots, parse_polynomial, square_free_part

V = ("x", "y", "z", "u", "v")
f1 = parse_polynomial("y^2+(u^2*x+1)*(v*x-1)*(x^2+(v-u^2)*x+1)", V)
f2 = parse_polynomial("(z^2+u^2)-v*(u^2+1)*(z^2+1)", V)
f3 = parse_polynomial("u", V)
F_map = PolynomialMap([f1, f2, f3])

print("the bundled map, parsed from text:")
for k, comp in enumerate(F_map.components, 1):
    print(f"  f{k} =", comp)

print("\nexact evaluation at (2, 0, 0, 1, 1/2):", F_map.evaluate((2, 0, 0, 1, F(1, 2))))
print("third Jacobian row (always):", F_map.jacobian((1, 2, 3, F(1, 2), F(1, 3)))[2])

g = parse_polynomial("(u^2*x+1)*(v*x-1)*(x^2+(v-u^2)*x+1)", ("x", "u", "v"))
print("\npartial dg/dx at (2, 1, 1/2):", g.differentiate("x").evaluate((2, 1, F(1, 2))))

print("\nreal roots of one-variable slices of g (Sturm isolation):")
for u, v in [(F(1), F(1, 2)), (F(1, 2), F(1, 4)), (F(1, 4), F(1, 10))]:
    q = g.univariate_slice("x", {"u": u, "v": v})
    res = isolate_real_roots(q)
    _, multiple = square_free_part(q)
    mids = [float((a + b) / 2) for a, b in res.intervals]
    print(f"  u={u}, v={v}: roots near {mids}, closed forms "
          f"{[-1 / float(u) ** 2, 1 / float(v)]}, multiple root: {multiple}")
