"""Projection, sampling, stability radius, critical points, certification."""
from fractions import Fraction as F

import numpy as np
import pytest

from fiber_atlas.poly import Polynomial, PolynomialMap, parse_polynomial
from fiber_atlas.variety import (
    FiberEmptyWithinBall,
    MaxIterExceeded,
    RestrictedFunction,
    SingularStep,
    certify_no_singularity_on_arc,
    constrained_critical_points,
    estimate_milnor_radius,
    project_to_fiber,
    sample_fiber,
    sample_fiber_rim,
)


@pytest.fixture(scope="module")
def endpoint_map(bundle):
    return bundle.reduced_fiber_map(F(0))


@pytest.fixture(scope="module")
def circle_map():
    return PolynomialMap([parse_polynomial("x^2+y^2-1", ("x", "y"))])


# ----------------------------------------------------------------------
# projection
# ----------------------------------------------------------------------


def test_projection_onto_endpoint_fiber(endpoint_map):
    # (0, 1, 0) is an exact fiber point; a nearby start lands on it
    p = project_to_fiber(endpoint_map, [0.0], [0.0, 0.9, 0.0])
    assert np.allclose(p, [0.0, 1.0, 0.0], atol=1e-8)


def test_projection_returns_start_when_already_on_fiber(endpoint_map):
    start = np.array([0.0, 1.0, 0.0])
    out = project_to_fiber(endpoint_map, [0.0], start)
    assert np.array_equal(out, start)


def test_projection_idempotent_to_tolerance(endpoint_map):
    p = project_to_fiber(endpoint_map, [0.0], [1.3, 0.4, -0.7])
    q = project_to_fiber(endpoint_map, [0.0], p)
    assert np.linalg.norm(p - q) <= 1e-9


def test_projection_singular_step(endpoint_map):
    # the gradient of the defining polynomial vanishes at the origin while
    # its value is -1: the first step has no row rank
    with pytest.raises(SingularStep):
        project_to_fiber(endpoint_map, [0.0], [0.0, 0.0, 0.0])


def test_projection_fails_on_empty_fiber():
    pm = PolynomialMap([parse_polynomial("x^2+y^2+1", ("x", "y"))])
    with pytest.raises((MaxIterExceeded, SingularStep)):
        project_to_fiber(pm, [0.0], [1.0, 1.0])


def test_projection_validates_shapes(endpoint_map):
    with pytest.raises(ValueError):
        project_to_fiber(endpoint_map, [0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        project_to_fiber(endpoint_map, [0.0, 0.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        project_to_fiber(endpoint_map, [0.0], [np.nan, 0.0, 0.0])


# ----------------------------------------------------------------------
# fiber sampling
# ----------------------------------------------------------------------


def test_sample_fiber_basic_invariants(endpoint_map):
    s = sample_fiber(endpoint_map, [0.0], radius=8.0, count=500, seed=7)
    assert s.count == 500
    assert np.all(np.linalg.norm(s.points, axis=1) <= 8.0 + 1e-12)
    assert s.residuals.max() <= 1e-10


def test_sample_fiber_deterministic(endpoint_map):
    a = sample_fiber(endpoint_map, [0.0], radius=8.0, count=400, seed=3)
    b = sample_fiber(endpoint_map, [0.0], radius=8.0, count=400, seed=3)
    assert np.array_equal(a.points, b.points)
    assert np.array_equal(a.residuals, b.residuals)
    c = sample_fiber(endpoint_map, [0.0], radius=8.0, count=400, seed=4)
    assert not np.array_equal(a.points, c.points)


def test_sample_fiber_count_zero(endpoint_map):
    s = sample_fiber(endpoint_map, [0.0], radius=8.0, count=0, seed=1)
    assert s.count == 0


def test_sample_fiber_empty_fiber_raises():
    pm = PolynomialMap([parse_polynomial("x^2+y^2+1", ("x", "y"))])
    with pytest.raises(FiberEmptyWithinBall):
        sample_fiber(pm, [0.0], radius=2.0, count=10, seed=1)


def test_sample_csv_and_json(tmp_path, endpoint_map):
    s = sample_fiber(endpoint_map, [0.0], radius=8.0, count=50, seed=2)
    csv_path = tmp_path / "pts.csv"
    s.to_csv(csv_path)
    rows = csv_path.read_text().strip().splitlines()
    assert rows[0] == "x,y,z,residual"
    assert len(rows) == 51
    s.to_json(tmp_path / "pts.json")
    import json

    payload = json.loads((tmp_path / "pts.json").read_text())
    assert payload["count"] == 50 and payload["seed"] == 2


def test_rim_sampling_lies_on_sphere(endpoint_map):
    rim = sample_fiber_rim(endpoint_map, [0.0], radius=8.0, count=80, seed=5)
    norms = np.linalg.norm(rim.points, axis=1)
    assert np.all(norms <= 8.0 + 1e-12)
    assert norms.min() >= 8.0 - 1e-6


# ----------------------------------------------------------------------
# stability radius of the sampling ball
# ----------------------------------------------------------------------


def test_compact_fiber_is_vacuous_beyond_reach(circle_map):
    rep = estimate_milnor_radius(circle_map, [0.0], [0.5, 1.5, 2.0, 3.0], seed=3)
    assert rep.radius == 1.5
    assert rep.vacuous is True


def test_line_fiber_passes_at_smallest_radius():
    pm = PolynomialMap([parse_polynomial("y", ("x", "y"))])
    rep = estimate_milnor_radius(pm, [0.0], [0.5, 1.0, 2.0], seed=3)
    assert rep.radius == 0.5
    assert rep.vacuous is False
    for shell in rep.shells:
        assert shell.margin == pytest.approx(1.0, abs=1e-8)


def test_endpoint_fiber_sweep_regression(endpoint_map):
    # frozen from the first sweep of this fiber: stable from radius 2 with
    # min relative margin about 0.21 there and >= 0.88 beyond
    rep = estimate_milnor_radius(endpoint_map, [0.0], list(range(2, 13)), seed=5)
    assert rep.radius == 2.0
    assert rep.vacuous is False
    margins = {s.radius: s.margin for s in rep.shells}
    assert margins[2.0] == pytest.approx(0.2086, abs=0.05)
    assert all(margins[r] > 0.8 for r in range(3, 13))


def test_milnor_grid_validation(circle_map):
    with pytest.raises(ValueError):
        estimate_milnor_radius(circle_map, [0.0], [2.0, 1.0])
    with pytest.raises(ValueError):
        estimate_milnor_radius(circle_map, [0.0], [])


# ----------------------------------------------------------------------
# constrained critical points
# ----------------------------------------------------------------------


def test_height_on_circle(circle_map):
    rf = RestrictedFunction(parse_polynomial("x", ("x", "y")), circle_map)
    res = constrained_critical_points(rf, [(-2, 2), (-2, 2)], multistart_n=200, seed=2)
    assert len(res.points) == 2
    lo, hi = sorted(res.points, key=lambda p: p.location[0])
    assert np.allclose(lo.location, [-1, 0], atol=1e-8) and lo.morse_index == 0
    assert np.allclose(hi.location, [1, 0], atol=1e-8) and hi.morse_index == 1
    for p in res.points:
        assert p.kkt_residual <= 1e-10
        assert p.constraint_residual <= 1e-10


def test_cut_function_morse_point_on_positive_fibers(bundle):
    # one critical point at ((u^2+1)/u^2, 0, 0), Morse index 2, left-end
    # twin filtered by the inequality
    for u, expected_x in [(F(1), 2.0), (F(1, 2), 5.0), (F(3, 4), 25 / 9)]:
        rf = bundle.cut_restricted(u)
        res = constrained_critical_points(rf, [(-25, 25)] * 3, multistart_n=400, seed=3)
        assert len(res.points) == 1
        p = res.points[0]
        assert np.allclose(p.location, [expected_x, 0, 0], atol=1e-8)
        assert p.morse_index == 2
        assert res.diagnostics["n_inequality_rejected"] > 0


def test_reference_chart_eigenvalues_at_u_one(bundle):
    rf = bundle.cut_restricted(F(1))
    res = constrained_critical_points(rf, [(-25, 25)] * 3, multistart_n=400, seed=3)
    eig = sorted(res.points[0].eigenvalues)
    assert eig[0] == pytest.approx(-2.0, abs=1e-6)
    assert eig[1] == pytest.approx(-1.0 / 3.0, abs=1e-6)


def test_submersion_has_no_critical_points(bundle, endpoint_map):
    rf = RestrictedFunction(bundle.cut, endpoint_map)
    res = constrained_critical_points(rf, [(-10, 10)] * 3, multistart_n=300, seed=4)
    assert res.points == ()


def test_morse_index_invariant_under_tangent_rotation(bundle):
    rf = bundle.cut_restricted(F(1))
    res = constrained_critical_points(rf, [(-25, 25)] * 3, multistart_n=300, seed=5)
    p = res.points[0]
    rng = np.random.default_rng(0)
    T = p.tangent_basis
    HL_proj = None
    from fiber_atlas.variety import _KKTSystem

    sys_ = _KKTSystem(rf.objective, rf.constraints)
    HL = sys_.lagrangian_hessian(p.location, p.multipliers)
    base = T.T @ HL @ T
    for _ in range(5):
        A = rng.standard_normal((2, 2))
        Q, _ = np.linalg.qr(A)
        rotated = (T @ Q).T @ HL @ (T @ Q)
        ev_base = np.sort(np.linalg.eigvalsh(base))
        ev_rot = np.sort(np.linalg.eigvalsh(rotated))
        assert np.allclose(ev_base, ev_rot, atol=1e-8)
        assert int((ev_rot < -1e-8).sum()) == p.morse_index


def test_boundary_pass_reports_continuum(bundle):
    rf = bundle.cut_restricted(F(1))
    res = constrained_critical_points(rf, [(-25, 25)] * 3, multistart_n=300, seed=6)
    boundary = res.diagnostics["boundary_pass"]
    assert len(boundary) == 1
    assert boundary[0]["continuum_suspected"] is True


def test_restricted_hessian_matches_finite_differences():
    # ellipsoid-constrained random cubics: project tangent steps back to the
    # variety and second-difference the objective
    rng = np.random.default_rng(12)
    checked = 0
    for trial in range(60):
        if checked >= 50:
            break
        a, b, c = (int(v) for v in rng.integers(1, 4, 3))
        vars3 = ("x", "y", "z")
        ellipsoid = parse_polynomial(f"{a}*x^2+{b}*y^2+{c}*z^2-4", vars3)
        coeffs = rng.integers(-3, 4, 6)
        text = (
            f"{coeffs[0]}*x+{coeffs[1]}*y+{coeffs[2]}*z"
            f"+{coeffs[3]}*x*y+{coeffs[4]}*y*z+{coeffs[5]}*x^2"
        )
        objective = parse_polynomial(text, vars3)
        if objective.is_zero():
            continue
        rf = RestrictedFunction(objective, PolynomialMap([ellipsoid]))
        res = constrained_critical_points(
            rf, [(-3, 3)] * 3, multistart_n=120, seed=trial
        )
        if not res.points:
            continue
        p = res.points[0]
        T = p.tangent_basis
        P2 = np.zeros((2, 2))
        pm = rf.constraints
        base = project_to_fiber(pm, [0.0], p.location, tol=1e-13)
        f0 = float(objective.evaluate(base))

        def second_difference(i, j, h):
            def val(si, sj):
                step = si * h * T[:, i] + sj * h * T[:, j]
                moved = project_to_fiber(pm, [0.0], base + step, tol=1e-13)
                return float(objective.evaluate(moved))

            if i == j:
                return (val(1, 0) - 2 * f0 + val(-1, 0)) / h**2
            return (val(1, 1) - val(1, -1) - val(-1, 1) + val(-1, -1)) / (4 * h**2)

        for i in range(2):
            for j in range(i, 2):
                h = 4e-4
                coarse = second_difference(i, j, h)
                fine = second_difference(i, j, h / 2)
                P2[i, j] = P2[j, i] = (4 * fine - coarse) / 3  # Richardson
        eig_fd = np.sort(np.linalg.eigvalsh(P2))
        eig = np.sort(np.array(p.eigenvalues))
        assert np.allclose(eig_fd, eig, atol=1e-4), (trial, eig_fd, eig)
        checked += 1
    assert checked >= 50


# ----------------------------------------------------------------------
# no-singularity certification
# ----------------------------------------------------------------------


def test_cone_point_is_detected():
    pm = PolynomialMap([parse_polynomial("x^2+y^2", ("x", "y"))])
    cert = certify_no_singularity_on_arc(
        pm, lambda s: [s], [0.0, 0.5, 1.0], box=[(-3, 3)] * 2,
        multistart_n=150, seed=1,
    )
    assert not cert.passed
    assert any(c.arc_parameter == 0.0 for c in cert.candidates)
    worst = min(c.residual for c in cert.candidates)
    assert worst < 1e-8


def test_hyperbola_family_is_clean():
    # x(xy-1) is a submersion on every fiber over [0,1]
    pm = PolynomialMap([parse_polynomial("x*(x*y-1)", ("x", "y"))])
    cert = certify_no_singularity_on_arc(
        pm, lambda s: [s], [k / 10 for k in range(11)], box=[(-5, 5)] * 2,
        multistart_n=250, seed=2,
    )
    assert cert.passed
    assert cert.min_residual > 1e-4


def test_exact_slices_feed_verdicts(bundle):
    slices = [("u=1,v=1/2", bundle.g_slice(F(1), F(1, 2)))]
    pm = PolynomialMap([parse_polynomial("x*(x*y-1)", ("x", "y"))])
    cert = certify_no_singularity_on_arc(
        pm, lambda s: [s], [0.0, 1.0], box=[(-4, 4)] * 2,
        multistart_n=100, seed=3, exact_slices=slices,
    )
    assert cert.exact_verdicts == (("u=1,v=1/2", False),)
