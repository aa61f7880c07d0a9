"""Arc scanning with positive and negative controls.

A pencil with a genuine component jump at the endpoint is flagged ATYPICAL
with a b0-jump reason; a trivial product fibration produces NO-EVIDENCE.
Both verdicts state that they are sample-level evidence, not proof.
"""
from fiber_atlas import Arc, ScanConfig, atypicality_verdict, detect_vanishing_components, scan_arc
from fiber_atlas.poly import PolynomialMap, parse_polynomial

print("pencil x(xy - 1) = t over t in [0, 1]:")
pm = PolynomialMap([parse_polynomial("x*(x*y-1)", ("x", "y"))])
arc = Arc.segment([0.0], [1.0], [k / 10 for k in range(11)])
report = scan_arc(pm, arc, ScanConfig(radius=4.0, count=1500, seed=11, oversample=8))
for s, betti in report.betti_table():
    print(f"  t={s:0.1f}: components={betti[0]}")
verdict = atypicality_verdict(report, vanishing=detect_vanishing_components(report))
print(verdict.machine_line)
for code, detail in verdict.reasons:
    print(f"  reason {code}: {detail}")

print("\ntrivial product fibration (circle x unit interval):")
pm2 = PolynomialMap([
    parse_polynomial("x^2+y^2-1", ("x", "y", "t")),
    parse_polynomial("t", ("x", "y", "t")),
])
arc2 = Arc.segment([0.0, 0.0], [0.0, 1.0], [0.0, 0.25, 0.5, 0.75, 1.0])
report2 = scan_arc(pm2, arc2, ScanConfig(radius=4.0, count=700, seed=5))
for s, betti in report2.betti_table():
    print(f"  t={s:0.2f}: (b0, b1)={betti}")
print(atypicality_verdict(report2, vanishing=detect_vanishing_components(report2)).machine_line)
