"""The bundled verification case: exact data, reduced family, checks."""
from fractions import Fraction as F

import numpy as np
import pytest

from fiber_atlas.realroots import isolate_real_roots
from fiber_atlas.showcase import (
    ShowcaseConfig,
    build_bundle,
    coarse_config,
    implicit_chart_eigenvalues,
    verify_no_singularity,
)


# ----------------------------------------------------------------------
# exact bundle data
# ----------------------------------------------------------------------


def test_reference_map_value(bundle):
    assert bundle.map.evaluate((2, 0, 0, 1, F(1, 2))) == (0, 0, 1)


def test_endpoint_polynomial_value_at_origin(bundle):
    assert bundle.reduced_fiber_polynomial(F(0)).evaluate((0, 0, 0)) == -1


def test_anchor_points_lie_on_endpoint_fiber(bundle):
    c0 = bundle.reduced_fiber_polynomial(F(0))
    assert c0.evaluate((0, 1, 0)) == 0
    assert c0.evaluate((0, -1, 0)) == 0
    # the cut level x = z^2 + 1 meets the endpoint fiber in the circle
    # y^2 + (z^2-1)(z^2+1)(z^2+2) = 0; its z = 0 anchor is (1, sqrt(2), 0)
    assert abs(bundle.endpoint_circle_residual(np.sqrt(2.0), 0.0)) < 1e-12
    assert abs(float(c0.evaluate((1.0, np.sqrt(2.0), 0.0)))) < 1e-10


def test_cut_level_anchors_parametrize_endpoint_values(bundle):
    # (t, sqrt(t^2+1), 0) lies on the endpoint fiber with cut value t
    c0 = bundle.reduced_fiber_polynomial(F(0))
    for t in (0.0, 0.7, -1.3, 2.5):
        y = np.sqrt(t * t + 1.0)
        assert abs(float(c0.evaluate((t, y, 0.0)))) < 1e-9
        assert float(bundle.cut.evaluate((t, y, 0.0))) == pytest.approx(t)


def test_morse_point_formula(bundle):
    assert bundle.morse_x(F(1)) == 2
    assert bundle.morse_x(F(1, 2)) == 5
    assert bundle.morse_x(F(3, 4)) == F(25, 9)
    with pytest.raises(ValueError):
        bundle.morse_x(F(0))


def test_eliminated_variable_formula(bundle):
    # v = (z^2+u^2)/((u^2+1)(z^2+1)) reconstructs the full-space fiber point
    rng = np.random.default_rng(8)
    f1, f2 = bundle.map.components[0], bundle.map.components[1]
    for _ in range(25):
        u = rng.uniform(0, 1)
        x, y, z = rng.uniform(-2, 2, 3)
        v = bundle.eliminated_variable(u, z)
        assert abs(float(f2.evaluate((x, y, z, u, v)))) < 1e-12
    lifted = bundle.lift_to_full_space(0.5, np.array([[1.0, 2.0, 3.0]]))
    assert lifted.shape == (1, 5)
    assert lifted[0, 3] == 0.5


def test_feasible_v_range(bundle):
    lo, hi = bundle.feasible_v_range(F(1, 2))
    assert lo == F(1, 5) and hi == F(4, 5)
    lo0, hi0 = bundle.feasible_v_range(F(0))
    assert lo0 == 0 and hi0 == 1


def test_case_two_exclusion_has_no_real_roots(bundle):
    # the off-axis branch of the cut singularity system is empty: the
    # eliminating polynomial in z has no real roots for each grid u
    for u in (F(1, 10), F(1, 4), F(1, 2), F(3, 4), F(1)):
        slice_z = bundle.case_two_exclusion_slice(u)
        assert isolate_real_roots(slice_z).count == 0


def test_reduced_family_matches_full_map_spotcheck(bundle):
    rng = np.random.default_rng(5)
    f1 = bundle.map.components[0]
    for _ in range(30):
        u = F(int(rng.integers(0, 5)), 4)
        pt = rng.uniform(-2, 2, 3)
        v = bundle.eliminated_variable(float(u), pt[2])
        d = (float(u) ** 2 + 1) * (pt[2] ** 2 + 1)
        lhs = float(bundle.reduced_fiber_polynomial(u).evaluate(pt))
        rhs = d * d * float(f1.evaluate((pt[0], pt[1], pt[2], float(u), v)))
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


def test_family_map_slices_are_reduced_fibers(bundle):
    rng = np.random.default_rng(9)
    for _ in range(10):
        u = F(int(rng.integers(0, 9)), 8)
        pt = rng.uniform(-2, 2, 3)
        family_val = float(
            bundle.family_map.components[0].evaluate((pt[0], pt[1], pt[2], float(u)))
        )
        reduced_val = float(bundle.reduced_fiber_polynomial(u).evaluate(pt))
        assert family_val == pytest.approx(reduced_val, rel=1e-9, abs=1e-9)


# ----------------------------------------------------------------------
# chart oracle
# ----------------------------------------------------------------------


def test_implicit_chart_matches_reference_at_u_one(bundle):
    eig = implicit_chart_eigenvalues(bundle, F(1))
    assert eig[0] == pytest.approx(-2.0, abs=1e-5)
    assert eig[1] == pytest.approx(-1.0 / 3.0, abs=1e-5)


def test_implicit_chart_index_two_on_grid(bundle):
    for u in (F(1, 2), F(3, 4)):
        eig = implicit_chart_eigenvalues(bundle, u)
        assert eig[0] < 0 and eig[1] < 0


# ----------------------------------------------------------------------
# checks (coarse where expensive)
# ----------------------------------------------------------------------


def test_no_singularity_inconclusive_on_loose_tolerances(bundle):
    cfg = ShowcaseConfig(seed=1, candidate_tol=1e-2, residual_floor=1e-4)
    result = verify_no_singularity(bundle, cfg)
    assert result.status == "inconclusive"


@pytest.mark.slow
def test_no_singularity_passes_and_mutant_fails(bundle):
    cfg = coarse_config(seed=2)
    result = verify_no_singularity(bundle, cfg)
    assert result.status == "pass"
    cert = result.details["certificate"]
    assert cert["passed"] is True
    assert all(bad is False for _, bad in cert["exact_verdicts"])


def test_config_round_trips_to_json():
    cfg = ShowcaseConfig(seed=3)
    payload = cfg.to_json_dict()
    assert payload["seed"] == 3
    assert payload["topology_grid"] == ["0", "1/4", "1/2", "3/4", "1"]
    assert isinstance(payload["topology_counts"], dict)
