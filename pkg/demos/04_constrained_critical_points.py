"""Constrained critical points with Morse data.

Multistart damped Newton on the Lagrange system, tangent-space Hessians in
an orthonormal chart, and Morse indices.  On the bundled fibers the cut
function x - z^2 has exactly one critical point on the feasible side, of
Morse index 2, at a closed-form location.
"""
from fractions import Fraction as F

import numpy as np

from fiber_atlas import RestrictedFunction, build_bundle, constrained_critical_points, parse_polynomial
from fiber_atlas.poly import PolynomialMap

circle = PolynomialMap([parse_polynomial("x^2+y^2-1", ("x", "y"))])
height = RestrictedFunction(parse_polynomial("x", ("x", "y")), circle)
res = constrained_critical_points(height, [(-2, 2)] * 2, multistart_n=200, seed=1)
print("height on the unit circle:")
for p in res.points:
    print(f"  at {np.round(p.location, 8)}: index {p.morse_index}, eigenvalues {np.round(p.eigenvalues, 6)}")

bundle = build_bundle()
print("\ncut function x - z^2 on the reduced fibers (feasible side only):")
for u in (F(1, 2), F(3, 4), F(1)):
    rf = bundle.cut_restricted(u)
    res = constrained_critical_points(rf, [(-25, 25)] * 3, multistart_n=400, seed=3)
    p = res.points[0]
    print(f"  u={u}: point {np.round(p.location, 8)} (expected x = {float(bundle.morse_x(u)):.6f}), "
          f"index {p.morse_index}, chart eigenvalues {np.round(p.eigenvalues, 8)}")
print("\nat u=1 the chart eigenvalues are -2 and -1/3; the second equals "
      "-2 divided by the slice derivative value 6 seen in demo 01")
