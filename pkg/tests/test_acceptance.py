"""Acceptance gate: one test per criterion, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s``.

Two criteria are expected to fail and are asserted faithfully anyway:

* criterion 4 (and the Betti-table half of criterion 6): the rank of H1 of
  a single-scale Rips complex on these ball-clipped fiber samples carries
  irreducible sampling artifacts.  The ball boundary cuts each fiber
  mid-feature, leaving thin void "bites" whose width sits near any
  affordable scale; bridge quadrilaterals across such a void fill only when
  the gap clears sqrt(eps^2 - delta^2), so a band of marginal quads
  survives with seed-dependent count whose expectation does not shrink with
  sample density.  Zipping the voids shut (coarser scale) instead caps the
  clipped cylinder ends and kills the true degree-1 class.  Either way
  (beta0, beta1) = (1, 1) at the auto-selected scale cannot hold in 18 of
  20 runs.  The loop-class dichotomy itself is robust: it reduces one
  explicit chain and does not depend on the global H1 rank.

The assertions below state the criteria exactly; the expected failures are
left to fail.
"""
import json
import time
from fractions import Fraction as F

import numpy as np
import pytest

from fiber_atlas.poly import Polynomial, PolynomialMap, parse_polynomial
from fiber_atlas.realroots import isolate_real_roots, square_free_part
from fiber_atlas.rips import (
    betti0_by_reduction,
    betti_summary,
    farthest_point_subsample,
    rips_components,
)
from fiber_atlas.showcase import (
    ShowcaseConfig,
    build_bundle,
    verify_fiber_topology,
    verify_loop_dichotomy,
    verify_morse_point,
    verify_no_singularity,
)
from fiber_atlas.variety import (
    RestrictedFunction,
    certify_no_singularity_on_arc,
    constrained_critical_points,
    project_to_fiber,
)


def _verdict(number: int, passed: bool, detail: str) -> None:
    print(f"\nCRITERION {number}: {'PASS' if passed else 'FAIL'} - {detail}")


@pytest.fixture(scope="module")
def bundle():
    return build_bundle()


# ----------------------------------------------------------------------
# 1. exact-value suite
# ----------------------------------------------------------------------


def test_criterion_1_exact_values(bundle):
    start = time.time()
    ok_map = bundle.map.evaluate((2, 0, 0, 1, F(1, 2))) == (0, 0, 1)
    ok_g0 = bundle.reduced_fiber_polynomial(F(0)).evaluate((0, 0, 0)) == -1
    ok_circle = abs(bundle.endpoint_circle_residual(np.sqrt(2.0), 0.0)) <= 1e-12
    jac_row = bundle.map.jacobian((3, 1, -2, F(1, 3), F(2, 7)))[2]
    ok_jac = jac_row == (0, 0, 0, 1, 0)
    elapsed = time.time() - start
    passed = ok_map and ok_g0 and ok_circle and ok_jac and elapsed < 1.0
    _verdict(1, passed, f"exact reference values ({elapsed:.3f}s)")
    assert ok_map and ok_g0 and ok_circle and ok_jac
    assert elapsed < 1.0


# ----------------------------------------------------------------------
# 2. root structure on the rational grid
# ----------------------------------------------------------------------


def test_criterion_2_root_structure(bundle):
    start = time.time()
    ok = True
    for u in (F(1, 4), F(1, 2), F(1)):
        for j in range(1, 10):
            v = F(j, 10)
            q = bundle.g_slice(u, v)
            res = isolate_real_roots(q)
            expected = bundle.expected_roots(u, v)
            mids = [(a + b) / 2 for a, b in res.intervals]
            ok &= res.count == 2
            ok &= abs(mids[0] - expected[0]) <= F(1, 10**10)
            ok &= abs(mids[1] - expected[1]) <= F(1, 10**10)
            _, multiple = square_free_part(q)
            ok &= multiple is False
    elapsed = time.time() - start
    passed = ok and elapsed < 5.0
    _verdict(2, passed, f"27 slices, roots at -1/u^2 and 1/v ({elapsed:.2f}s)")
    assert ok
    assert elapsed < 5.0


# ----------------------------------------------------------------------
# 3. no-singularity certification plus planted mutant
# ----------------------------------------------------------------------


def test_criterion_3_certification(bundle):
    start = time.time()
    cfg = ShowcaseConfig(seed=7)
    result = verify_no_singularity(bundle, cfg)
    cert = result.details["certificate"]
    clean_ok = (
        result.status == "pass"
        and float(cert["min_residual"]) > 1e-4
        and not cert["candidates"]
        and all(bad is False for _, bad in cert["exact_verdicts"])
    )

    mutant_f1 = parse_polynomial(
        "y^2+(x-1)^2*(x-2)", ("x", "y", "z", "u", "v")
    )
    mutant = PolynomialMap([mutant_f1, bundle.map.components[1], bundle.map.components[2]])
    hw = cfg.singularity_box_halfwidth
    mut_cert = certify_no_singularity_on_arc(
        mutant,
        bundle.arc.gamma,
        cfg.singularity_grid,
        box=[(-hw, hw)] * 3 + [(-0.5, 1.5), (-1.0, 2.0)],
        multistart_n=400,
        seed=cfg.seed,
    )
    mutant_ok = (not mut_cert.passed) and len(mut_cert.candidates) > 0
    elapsed = time.time() - start
    passed = clean_ok and mutant_ok and elapsed < 120.0
    _verdict(
        3,
        passed,
        f"min residual {float(cert['min_residual']):.3e}, mutant candidates "
        f"{len(mut_cert.candidates)} ({elapsed:.0f}s)",
    )
    assert clean_ok
    assert mutant_ok
    assert elapsed < 120.0


# ----------------------------------------------------------------------
# 4. fiber topology at the fixed ball (expected FAIL; see module docstring)
# ----------------------------------------------------------------------


def test_criterion_4_fiber_topology(bundle):
    grid = (F(0), F(1, 4), F(1, 2), F(1))
    seeds = list(range(20))
    needed, allowed_failures = 18, 2
    clean_runs = 0
    failures = 0
    max_fiber_time = 0.0
    rows = []
    for seed in seeds:
        cfg = ShowcaseConfig(seed=seed, topology_grid=grid)
        run_clean = True
        for k, u in enumerate(grid):
            t0 = time.time()
            from fiber_atlas.showcase import _topology_sample

            points = _topology_sample(
                bundle, cfg, u, cfg.topology_radius, cfg.topology_count(u),
                cfg.seed + 211 * k,
            )
            summary = betti_summary(points, simplex_cap=cfg.simplex_cap)
            dt = time.time() - t0
            max_fiber_time = max(max_fiber_time, dt)
            good = (summary.b0, summary.b1) == (1, 1) and summary.euler == 0
            run_clean &= good
            rows.append((seed, str(u), summary.b0, summary.b1, round(dt, 1)))
        clean_runs += run_clean
        failures += not run_clean
        if failures > allowed_failures:
            break  # the >= 18/20 target is already unreachable
    remaining = len(seeds) - clean_runs - failures
    passed = clean_runs + remaining >= needed and max_fiber_time < 120.0
    _verdict(
        4,
        passed,
        f"(1,1,0) in {clean_runs}/{clean_runs + failures} runs "
        f"(early stop when >2 failures; max fiber time {max_fiber_time:.0f}s)",
    )
    for row in rows[-12:]:
        print("   seed %d u=%s: b=(%d,%d) %.1fs" % row)
    assert max_fiber_time < 120.0
    assert clean_runs + remaining >= needed, (
        "single-scale Rips Betti numbers on ball-clipped fiber samples carry "
        "irreducible marginal-bridge artifacts; see the module docstring"
    )


# ----------------------------------------------------------------------
# 5. Morse point
# ----------------------------------------------------------------------


def test_criterion_5_morse_point(bundle):
    start = time.time()
    cfg = ShowcaseConfig(seed=3)
    result = verify_morse_point(bundle, cfg)
    ok = result.status == "pass"
    detail_rows = result.details["fibers"]
    for row in detail_rows:
        ok &= row["n_points"] == 1
        ok &= float(row["location_error"]) <= 1e-8
        ok &= row["morse_index"] == 2
    u1 = [r for r in detail_rows if r["u"] == "1"][0]
    ok &= float(u1["chart_eigenvalue_error"]) <= 1e-6
    elapsed = time.time() - start
    passed = ok and elapsed < 30.0
    _verdict(5, passed, f"one index-2 point per fiber at ((u^2+1)/u^2,0,0) ({elapsed:.0f}s)")
    assert ok
    assert elapsed < 30.0


# ----------------------------------------------------------------------
# 6. loop dichotomy (Betti-table half expected FAIL; see module docstring)
# ----------------------------------------------------------------------


def test_criterion_6_loop_dichotomy(bundle):
    seeds = list(range(20))
    needed, allowed_failures = 18, 2
    dichotomy_hits = 0
    table_hits = 0
    both_hits = 0
    runs = 0
    worst_time = 0.0
    last_report = None
    for seed in seeds:
        cfg = ShowcaseConfig(seed=seed)
        t0 = time.time()
        result, trace = verify_loop_dichotomy(bundle, cfg)
        dt = time.time() - t0
        worst_time = max(worst_time, dt)
        runs += 1
        dichotomy_hits += result.details["dichotomy"]
        table_hits += result.details["betti_table_constant"]
        both_hits += result.status == "pass"
        last_report = result
        if runs - both_hits > allowed_failures and runs - dichotomy_hits > allowed_failures:
            break
    remaining = len(seeds) - runs
    passed = both_hits + remaining >= needed and worst_time < 180.0
    _verdict(
        6,
        passed,
        f"dichotomy {dichotomy_hits}/{runs}, betti table (1,1) {table_hits}/{runs}, "
        f"both {both_hits}/{runs} (early stop; worst run {worst_time:.0f}s)",
    )
    if last_report is not None:
        print("   last run steps:", last_report.details["steps"])
    assert worst_time < 180.0
    assert dichotomy_hits + remaining >= needed, "the loop-class dichotomy itself failed"
    assert both_hits + remaining >= needed, (
        "the per-u Betti table shares criterion 4's artifact mechanism; "
        "see the module docstring"
    )


# ----------------------------------------------------------------------
# 7. oracle suites
# ----------------------------------------------------------------------


def test_criterion_7_oracles():
    start = time.time()
    # union-find vs reduction on 100 random complexes, exact
    uf_ok = True
    for k in range(100):
        g = np.random.default_rng(k)
        pts = g.uniform(0, 4, (25 + (k % 20), 2))
        eps = 0.5 + 0.4 * (k % 4) / 3
        uf_ok &= rips_components(pts, eps) == betti0_by_reduction(pts, eps)

    # restricted Hessian vs projected finite differences on 50 problems
    rng = np.random.default_rng(12)
    checked = 0
    fd_ok = True
    trial = 0
    while checked < 50 and trial < 120:
        trial += 1
        a, b, c = (int(v) for v in rng.integers(1, 4, 3))
        vars3 = ("x", "y", "z")
        ellipsoid = parse_polynomial(f"{a}*x^2+{b}*y^2+{c}*z^2-4", vars3)
        coeffs = rng.integers(-3, 4, 6)
        objective = parse_polynomial(
            f"{coeffs[0]}*x+{coeffs[1]}*y+{coeffs[2]}*z"
            f"+{coeffs[3]}*x*y+{coeffs[4]}*y*z+{coeffs[5]}*x^2",
            vars3,
        )
        if objective.is_zero():
            continue
        rf = RestrictedFunction(objective, PolynomialMap([ellipsoid]))
        res = constrained_critical_points(rf, [(-3, 3)] * 3, multistart_n=120, seed=trial)
        if not res.points:
            continue
        p = res.points[0]
        T = p.tangent_basis
        pm = rf.constraints
        base = project_to_fiber(pm, [0.0], p.location, tol=1e-13)
        f0 = float(objective.evaluate(base))

        def d2(i, j, h):
            def val(si, sj):
                step = si * h * T[:, i] + sj * h * T[:, j]
                return float(
                    objective.evaluate(project_to_fiber(pm, [0.0], base + step, tol=1e-13))
                )

            if i == j:
                return (val(1, 0) - 2 * f0 + val(-1, 0)) / h**2
            return (val(1, 1) - val(1, -1) - val(-1, 1) + val(-1, -1)) / (4 * h**2)

        P2 = np.zeros((2, 2))
        for i in range(2):
            for j in range(i, 2):
                coarse, fine = d2(i, j, 4e-4), d2(i, j, 2e-4)
                P2[i, j] = P2[j, i] = (4 * fine - coarse) / 3
        eig_fd = np.sort(np.linalg.eigvalsh(P2))
        fd_ok &= bool(np.allclose(eig_fd, np.sort(np.array(p.eigenvalues)), atol=1e-4))
        checked += 1

    # synthetic manifold statistical regression, 20 seeds each
    def fps(raw, n):
        return raw[farthest_point_subsample(raw, n)]

    def circle(n, s):
        g = np.random.default_rng(s)
        t = g.uniform(0, 2 * np.pi, 6 * n)
        return fps(np.c_[np.cos(t), np.sin(t)], n)

    def annulus(n, s):
        g = np.random.default_rng(s)
        th = g.uniform(0, 2 * np.pi, 6 * n)
        rr = np.sqrt(g.uniform(1.0, 4.0, 6 * n))
        return fps(np.c_[rr * np.cos(th), rr * np.sin(th)], n)

    def sphere(n, s):
        g = np.random.default_rng(s)
        v = g.standard_normal((6 * n, 3))
        return fps(v / np.linalg.norm(v, axis=1)[:, None], n)

    stats = {}
    for name, gen, n, truth in [
        ("circle", circle, 250, (1, 1)),
        ("annulus", annulus, 900, (1, 1)),
        ("sphere", sphere, 900, (1, 0)),
    ]:
        hits = 0
        for seed in range(20):
            s = betti_summary(gen(n, seed))
            hits += (s.b0, s.b1) == truth
        stats[name] = hits
    manifolds_ok = all(hits >= 19 for hits in stats.values())

    elapsed = time.time() - start
    passed = uf_ok and fd_ok and checked >= 50 and manifolds_ok
    _verdict(
        7,
        passed,
        f"b0 oracle exact x100, Hessian FD x{checked}, manifolds {stats} ({elapsed:.0f}s)",
    )
    assert uf_ok
    assert checked >= 50 and fd_ok
    assert manifolds_ok


# ----------------------------------------------------------------------
# 8. negative controls
# ----------------------------------------------------------------------


def test_criterion_8_negative_controls():
    from fiber_atlas.arcscan import Arc, ScanConfig, atypicality_verdict, scan_arc

    start = time.time()
    pm = PolynomialMap([parse_polynomial("x*(x*y-1)", ("x", "y"))])
    arc = Arc.segment([0.0], [1.0], [k / 10 for k in range(11)])
    report = scan_arc(pm, arc, ScanConfig(radius=4.0, count=1500, seed=11, oversample=8))
    betti = dict(report.betti_table())
    jump_ok = (
        betti[0.0][0] == 3
        and all(betti[s][0] == 2 for s in arc.schedule[1:])
        and len(report.jumps) == 1
        and report.jumps[0].s_toward_zero == 0.0
    )
    verdict = atypicality_verdict(report)
    verdict_ok = verdict.verdict == "ATYPICAL" and any(
        code == "b0-jump" for code, _ in verdict.reasons
    )

    trivial = PolynomialMap(
        [
            parse_polynomial("x^2+y^2-1", ("x", "y", "t")),
            parse_polynomial("t", ("x", "y", "t")),
        ]
    )
    arc2 = Arc.segment([0.0, 0.0], [0.0, 1.0], [0.0, 0.25, 0.5, 0.75, 1.0])
    report2 = scan_arc(trivial, arc2, ScanConfig(radius=4.0, count=700, seed=5))
    trivial_ok = atypicality_verdict(report2).verdict == "NO-EVIDENCE"

    elapsed = time.time() - start
    passed = jump_ok and verdict_ok and trivial_ok and elapsed < 30.0
    _verdict(8, passed, f"b0 jump 2->3 flagged ATYPICAL; product fibration clean ({elapsed:.0f}s)")
    assert jump_ok and verdict_ok and trivial_ok
    assert elapsed < 30.0


# ----------------------------------------------------------------------
# 9. determinism across thread counts
# ----------------------------------------------------------------------


def test_criterion_9_determinism(bundle):
    seed = 7
    reports = {}
    for threads in (1, 2):
        cfg = ShowcaseConfig(
            seed=seed,
            threads=threads,
            topology_grid=(F(0), F(1)),          # criterion-4 pipeline, reduced grid
            loop_grid=(F(0), F(1, 2), F(1)),     # criterion-6 pipeline, reduced grid
            singularity_grid=(0.0, 0.5, 1.0),
            singularity_multistart=400,
            morse_grid=(F(1),),
        )
        c3 = verify_no_singularity(bundle, cfg)
        c4 = verify_fiber_topology(bundle, cfg)
        c5 = verify_morse_point(bundle, cfg)
        c6, _ = verify_loop_dichotomy(bundle, cfg)
        payload = {
            "c3": c3.to_json_dict(),
            "c4": c4.to_json_dict(),
            "c5": c5.to_json_dict(),
            "c6": c6.to_json_dict(),
        }
        reports[threads] = json.dumps(payload, sort_keys=True)
    passed = reports[1] == reports[2]
    _verdict(9, passed, "criteria 3-6 reports byte-identical across thread counts")
    assert passed
