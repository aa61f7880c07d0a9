"""The bundled verification case, end to end (coarse grids for speed).

The headline: along the target segment, every fiber shows the same Betti
numbers, but the circle cut out by x = z^2 bounds a disk over Z/2 on every
positive-parameter fiber and fails to bound on the endpoint fiber.  The
loop-class change is the evidence that the endpoint fiber is atypical even
though homology alone cannot see it.

The full-grid pipeline is `fiber-atlas verify-example --seed 7`; this demo
uses the coarse configuration to finish quickly.
"""
import time

from fiber_atlas.showcase import build_bundle, coarse_config, verify_all

bundle = build_bundle()
t0 = time.time()
report = verify_all(bundle, coarse_config(seed=7))
print(f"({time.time() - t0:.0f}s)")
print(report.verdict.machine_line)
print("\nper-check status:")
for check in report.checks:
    print(f"  {check.name}: {check.status}")
print("\nBetti table along the arc (loop pipeline):")
for u, b0, b1 in report.betti_table:
    print(f"  u={u}: (b0, b1) = ({b0}, {b1})")
print("\nloop verdicts:")
for row in report.check("loop_dichotomy").details["steps"]:
    print(f"  u={row['u']}: bounds over Z/2: {row['is_boundary']} (ball radius {row['radius']:.1f})")
print("\n" + report.to_json_dict()["headline"])
