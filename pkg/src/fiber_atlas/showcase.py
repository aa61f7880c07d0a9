"""Built-in verification case: a five-variable polynomial map to R^3.

Along the target segment {(0,0,u) : u in [0,1]} every fiber of the bundled
map looks the same to Betti numbers, yet the endpoint fiber is atypical: a
distinguished circle cut out by x = z^2 bounds a disk on every fiber with
u > 0 and fails to bound on the endpoint fiber.  This module packages the
map, its reduced three-variable fiber family, the reference values, and a
one-command verification pipeline over four checks:

  no_singularity   multistart + exact-root evidence that the restriction of
                   the map over the segment has no singular point,
  fiber_topology   sampled Betti numbers (1, 1) and Euler estimate 0 for
                   every grid fiber inside the default ball,
  morse_point      the cut function has exactly one critical point on each
                   grid fiber, Morse index 2, at its closed-form location,
  loop_dichotomy   the cut circle bounds over Z/2 for u > 0 and does not
                   bound at u = 0, while the per-u Betti table stays (1,1).

Checks report pass/fail/inconclusive; the overall verdict line states
ATYPICAL via the loop-class change while homology stays constant.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .arcscan import Arc, LoopTrace, LoopTraceConfig, VerdictRecord, atypicality_verdict, track_loop_along_arc
from .poly import Polynomial, PolynomialMap, UnivariatePolynomial, parse_polynomial
from .realroots import isolate_real_roots
from .rips import betti_summary, farthest_point_subsample
from .variety import (
    MilnorReport,
    InconclusiveMargin,
    RestrictedFunction,
    SingularityCertificate,
    certify_no_singularity_on_arc,
    constrained_critical_points,
    estimate_milnor_radius,
    sample_fiber,
    sample_fiber_evened,
)
from ._tasks import task_map

__all__ = [
    "FULL_VARIABLES",
    "REDUCED_VARIABLES",
    "ShowcaseBundle",
    "ShowcaseConfig",
    "CheckResult",
    "ShowcaseReport",
    "build_bundle",
    "verify_no_singularity",
    "verify_fiber_topology",
    "verify_morse_point",
    "verify_loop_dichotomy",
    "verify_all",
    "implicit_chart_eigenvalues",
]

FULL_VARIABLES = ("x", "y", "z", "u", "v")
REDUCED_VARIABLES = ("x", "y", "z")
FAMILY_VARIABLES = ("x", "y", "z", "u")

_F1_TEXT = "y^2+(u^2*x+1)*(v*x-1)*(x^2+(v-u^2)*x+1)"
_F2_TEXT = "(z^2+u^2)-v*(u^2+1)*(z^2+1)"
_F3_TEXT = "u"
_G_TEXT = "(u^2*x+1)*(v*x-1)*(x^2+(v-u^2)*x+1)"


def _reduced_fiber_polynomial(variables: Sequence[str], u_value: Optional[Fraction]) -> Polynomial:
    """Denominator-cleared defining polynomial of the reduced fiber.

    Substituting v = (z^2+u^2) / ((u^2+1)(z^2+1)) into y^2 + g and clearing
    the squared denominator (positive everywhere, so the zero set is kept)
    gives  y^2 D^2 + (u^2 x + 1)(N x - D)(D x^2 + (N - u^2 D) x + D)  with
    N = z^2 + u^2 and D = (u^2+1)(z^2+1).  ``u_value=None`` keeps u symbolic.
    """
    x = Polynomial.variable("x", variables)
    y = Polynomial.variable("y", variables)
    z = Polynomial.variable("z", variables)
    one = Polynomial.constant(variables, 1)
    if u_value is None:
        u2 = Polynomial.variable("u", variables) ** 2
    else:
        u2 = Polynomial.constant(variables, Fraction(u_value) ** 2)
    N = z**2 + u2
    D = (u2 + one) * (z**2 + one)
    lead = u2 * x + one
    return y**2 * D**2 + lead * (N * x - D) * (D * x**2 + (N - u2 * D) * x + D)


@dataclass(frozen=True)
class ShowcaseBundle:
    """The bundled map, its arc, reduced fiber family, and reference data."""

    map: PolynomialMap                # (f1, f2, f3) on (x, y, z, u, v)
    g: Polynomial                     # the non-quadratic part of f1, on (x, u, v)
    arc: Arc                          # the target segment (0,0,0) -> (0,0,1)
    cut: Polynomial                   # x - z^2 on the reduced variables
    family_map: PolynomialMap         # (C(x,y,z,u), u) on (x, y, z, u)
    family_cut: PolynomialMap         # x - z^2 on the family variables

    # -- reduced fibers -------------------------------------------------

    def reduced_fiber_polynomial(self, u: Fraction) -> Polynomial:
        return _reduced_fiber_polynomial(REDUCED_VARIABLES, Fraction(u))

    def reduced_fiber_map(self, u: Fraction) -> PolynomialMap:
        return PolynomialMap([self.reduced_fiber_polynomial(u)])

    @staticmethod
    def eliminated_variable(u: float, z: float) -> float:
        """Reconstruction formula for the eliminated coordinate:
        v = (z^2 + u^2) / ((u^2 + 1)(z^2 + 1))."""
        return (z * z + u * u) / ((u * u + 1.0) * (z * z + 1.0))

    def lift_to_full_space(self, u: float, points: np.ndarray) -> np.ndarray:
        """Map reduced (x, y, z) samples onto the fiber in the full space."""
        points = np.atleast_2d(points)
        v = np.array([self.eliminated_variable(u, z) for z in points[:, 2]])
        uu = np.full(points.shape[0], float(u))
        return np.column_stack([points, uu, v])

    # -- exact reference data -------------------------------------------

    def g_slice(self, u: Fraction, v: Fraction) -> UnivariatePolynomial:
        """g with (u, v) fixed, as an exact univariate polynomial in x."""
        return self.g.univariate_slice("x", {"u": Fraction(u), "v": Fraction(v)})

    @staticmethod
    def feasible_v_range(u: Fraction) -> Tuple[Fraction, Fraction]:
        """The values v takes on the fiber over (0,0,u): [u^2/(u^2+1), 1/(u^2+1))."""
        u = Fraction(u)
        return (u**2 / (u**2 + 1), Fraction(1) / (u**2 + 1))

    @staticmethod
    def expected_roots(u: Fraction, v: Fraction) -> Tuple[Fraction, Fraction]:
        """The two real roots of the g slice: -1/u^2 and 1/v."""
        u, v = Fraction(u), Fraction(v)
        if u == 0 or v == 0:
            raise ValueError("closed-form roots need u != 0 and v != 0")
        return (-1 / u**2, 1 / v)

    @staticmethod
    def morse_x(u: Fraction) -> Fraction:
        """x-coordinate (u^2+1)/u^2 of the unique critical point of the cut
        function on the fiber's feasible side."""
        u = Fraction(u)
        if u == 0:
            raise ValueError("the critical point exists only for u > 0")
        return (u**2 + 1) / u**2

    def cut_restricted(self, u: Fraction) -> RestrictedFunction:
        """x - z^2 restricted to the reduced fiber, with x - z^2 >= 0."""
        return RestrictedFunction(self.cut, self.reduced_fiber_map(u), (self.cut,))

    @staticmethod
    def endpoint_circle_residual(y: float, z: float) -> float:
        """Residual of the endpoint reference circle equation
        y^2 + (z^2-1)(z^2+1)(z^2+2) = 0 (the cut level x = z^2 + 1)."""
        w = z * z
        return y * y + (w - 1.0) * (w + 1.0) * (w + 2.0)

    def case_two_exclusion_slice(self, u: Fraction) -> UnivariatePolynomial:
        """Exact witness that the off-axis branch of the cut singularity
        system is empty.

        On that branch x satisfies x (z^2+u^2) = (u^2+1)(z^2+1) together with
        (1 - x + z^2)(u^2+1) + x^2 = 0; eliminating x and clearing the
        positive denominator yields a polynomial in z that must have no real
        root.
        """
        u = Fraction(u)
        vars_xz = ("x", "z")
        x = Polynomial.variable("x", vars_xz)
        z = Polynomial.variable("z", vars_xz)
        one = Polynomial.constant(vars_xz, 1)
        u2 = Polynomial.constant(vars_xz, u**2)
        A = (z**2 + u2) * x - (u2 + one) * (z**2 + one)      # = 0 on the branch
        B = (one - x + z**2) * (u2 + one) + x**2
        # resultant in x by direct substitution: B has degree 2 in x, A degree 1
        # clear x via  x = (u^2+1)(z^2+1) / (z^2+u^2)  ->  multiply by (z^2+u^2)^2
        num = (u2 + one) * (z**2 + one)
        den = z**2 + u2
        substituted = (one + z**2) * (u2 + one) * den**2 - num * (u2 + one) * den + num**2
        return substituted.univariate_slice("z", {"x": 0})

    # -- consistency spot checks (run at build time) ----------------------

    def _verify_construction(self) -> None:
        value = self.map.evaluate((2, 0, 0, 1, Fraction(1, 2)))
        if value != (0, 0, 1):
            raise AssertionError(f"reference evaluation failed: {value}")
        c0 = self.reduced_fiber_polynomial(Fraction(0))
        if c0.evaluate((0, 0, 0)) != -1:
            raise AssertionError("reduced endpoint polynomial is wrong at the origin")
        if c0.evaluate((0, 1, 0)) != 0 or c0.evaluate((0, -1, 0)) != 0:
            raise AssertionError("(0, ±1, 0) must lie on the endpoint fiber")
        jac_row = self.map.jacobian((1, 2, 3, Fraction(1, 2), Fraction(1, 3)))[2]
        if jac_row != (0, 0, 0, 1, 0):
            raise AssertionError("third Jacobian row must be (0,0,0,1,0)")
        rng = np.random.default_rng(20260808)
        f1, f2 = self.map.components[0], self.map.components[1]
        for _ in range(100):
            u = Fraction(int(rng.integers(0, 101)), 100)
            pt = rng.uniform(-3, 3, 3)
            v = self.eliminated_variable(float(u), pt[2])
            full = (pt[0], pt[1], pt[2], float(u), v)
            lhs = self.reduced_fiber_polynomial(u).evaluate(pt)
            d = (float(u) ** 2 + 1.0) * (pt[2] ** 2 + 1.0)
            rhs = d * d * float(f1.evaluate(full))
            if abs(float(f2.evaluate(full))) > 1e-9 * (1 + d):
                raise AssertionError("eliminated-variable formula violates f2 = 0")
            if abs(float(lhs) - rhs) > 1e-6 * (1.0 + abs(rhs)):
                raise AssertionError("reduced family disagrees with the full map")


def build_bundle(schedule: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0)) -> ShowcaseBundle:
    """Exact construction of the bundled map; invariants checked at build."""
    f1 = parse_polynomial(_F1_TEXT, FULL_VARIABLES)
    f2 = parse_polynomial(_F2_TEXT, FULL_VARIABLES)
    f3 = parse_polynomial(_F3_TEXT, FULL_VARIABLES)
    g = parse_polynomial(_G_TEXT, ("x", "u", "v"))
    family_poly = _reduced_fiber_polynomial(FAMILY_VARIABLES, None)
    bundle = ShowcaseBundle(
        map=PolynomialMap([f1, f2, f3]),
        g=g,
        arc=Arc.segment([0.0, 0.0, 0.0], [0.0, 0.0, 1.0], schedule),
        cut=parse_polynomial("x-z^2", REDUCED_VARIABLES),
        family_map=PolynomialMap(
            [family_poly, Polynomial.variable("u", FAMILY_VARIABLES)]
        ),
        family_cut=PolynomialMap([parse_polynomial("x-z^2", FAMILY_VARIABLES)]),
    )
    bundle._verify_construction()
    return bundle


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------


def _default_topology_counts() -> Dict[str, int]:
    # per-u sample sizes; the wide fibers need more points before the
    # auto-selected scale resolves the ball-boundary features
    return {"0": 7000, "1/4": 14000, "1/2": 3500, "3/4": 3000, "1": 3000}


@dataclass(frozen=True)
class ShowcaseConfig:
    """Configuration for the verification pipeline.  The seed is mandatory."""

    seed: int
    threads: Optional[int] = None

    # no_singularity
    singularity_grid: Tuple[float, ...] = tuple(k / 10 for k in range(11))
    singularity_multistart: int = 2000
    singularity_box_halfwidth: float = 15.0
    candidate_tol: float = 1e-8
    residual_floor: float = 1e-4
    exact_slices_per_u: int = 9

    # fiber_topology
    topology_grid: Tuple[Fraction, ...] = (
        Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1),
    )
    topology_radius: float = 8.0
    topology_counts: Mapping[str, int] = field(default_factory=_default_topology_counts)
    topology_default_count: int = 3000
    oversample_factor: int = 3
    sample_dedup: float = 0.02
    rim_fraction: float = 0.0
    seam_fraction: float = 0.10
    scale_factor: float = 3.0
    scale_percentile: float = 90.0
    milnor_grid: Tuple[float, ...] = tuple(float(r) for r in range(2, 13))
    milnor_threshold: float = 0.05
    milnor_samples: int = 150

    # morse_point
    morse_grid: Tuple[Fraction, ...] = (Fraction(1, 2), Fraction(3, 4), Fraction(1))
    morse_multistart: int = 400
    morse_box_halfwidth: float = 25.0
    morse_location_tol: float = 1e-8
    morse_eigen_tol: float = 1e-6

    # loop_dichotomy
    loop_grid: Tuple[Fraction, ...] = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(1))
    loop_radius: float = 3.5
    loop_count: int = 3200
    loop_count_wide: int = 5000
    loop_cut_count: int = 420
    loop_oversample: int = 12
    loop_rim_fraction: float = 0.0
    loop_simplex_cap: int = 4_000_000

    simplex_cap: int = 2_000_000

    def topology_count(self, u: Fraction) -> int:
        return int(self.topology_counts.get(str(Fraction(u)), self.topology_default_count))

    def to_json_dict(self) -> dict:
        d = {}
        for k, v in self.__dict__.items():
            if isinstance(v, tuple):
                d[k] = [str(x) if isinstance(x, Fraction) else x for x in v]
            elif isinstance(v, Mapping):
                d[k] = dict(v)
            else:
                d[k] = v
        return d


# ----------------------------------------------------------------------
# check results
# ----------------------------------------------------------------------

PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"


def coarse_config(seed: int, threads: Optional[int] = None) -> ShowcaseConfig:
    """Smaller grids and counts: same verdict, weaker margins, faster."""
    return ShowcaseConfig(
        seed=seed,
        threads=threads,
        singularity_grid=(0.0, 0.5, 1.0),
        singularity_multistart=400,
        topology_grid=(Fraction(0), Fraction(1, 2), Fraction(1)),
        topology_counts={"0": 7000},
        milnor_grid=(2.0, 4.0, 8.0, 12.0),
        morse_grid=(Fraction(1),),
        loop_grid=(Fraction(0), Fraction(1, 2), Fraction(1)),
        loop_count=3000,
    )


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # pass | fail | inconclusive
    details: dict

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_json_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "details": self.details}


@dataclass(frozen=True)
class ShowcaseReport:
    config: ShowcaseConfig
    checks: Tuple[CheckResult, ...]
    verdict: VerdictRecord
    betti_table: Tuple[Tuple[str, int, int], ...]  # (u, b0, b1) along the loop grid

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "tool": "fiber-atlas",
            "config": self.config.to_json_dict(),
            "checks": [c.to_json_dict() for c in self.checks],
            "verdict": self.verdict.to_json_dict(),
            "betti_table": [
                {"u": u, "b0": b0, "b1": b1} for u, b0, b1 in self.betti_table
            ],
            "overall_pass": self.overall_pass,
            "headline": (
                "Betti numbers are constant along the arc while the tracked "
                "loop class changes at the endpoint: homology alone cannot "
                "see this atypical fiber."
            ),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, indent=1)


# ----------------------------------------------------------------------
# the four checks
# ----------------------------------------------------------------------


def _rational_grid(lo: Fraction, hi: Fraction, n: int) -> List[Fraction]:
    step = (hi - lo) / (n + 1)
    return [lo + step * (k + 1) for k in range(n)]


def verify_no_singularity(bundle: ShowcaseBundle, cfg: ShowcaseConfig) -> CheckResult:
    """Multistart search for rank drops over the arc plus exact root checks.

    Passes when no start converges onto the singularity system, the best
    residual stays above the floor, and no exact slice of g has a multiple
    root.  Inconclusive when the tolerances cannot separate those outcomes.
    """
    if cfg.candidate_tol >= cfg.residual_floor:
        return CheckResult(
            "no_singularity",
            INCONCLUSIVE,
            {
                "reason": "candidate tolerance is not below the residual floor",
                "candidate_tol": cfg.candidate_tol,
                "residual_floor": cfg.residual_floor,
            },
        )
    slices = []
    for s in cfg.singularity_grid:
        u = Fraction(s).limit_denominator(1000)
        lo, hi = bundle.feasible_v_range(u)
        for v in _rational_grid(lo, hi, cfg.exact_slices_per_u):
            slices.append((f"u={u},v={v}", bundle.g_slice(u, v)))
    hw = cfg.singularity_box_halfwidth
    box = [(-hw, hw)] * 3 + [(-0.5, 1.5), (-1.0, 2.0)]
    cert = certify_no_singularity_on_arc(
        bundle.map,
        bundle.arc.gamma,
        cfg.singularity_grid,
        box=box,
        multistart_n=cfg.singularity_multistart,
        seed=cfg.seed,
        candidate_tol=cfg.candidate_tol,
        residual_floor=cfg.residual_floor,
        exact_slices=slices,
        threads=cfg.threads,
    )
    status = PASS if cert.passed else FAIL
    return CheckResult("no_singularity", status, {"certificate": cert.to_json_dict()})


def _topology_sample(bundle, cfg, u: Fraction, radius: float, count: int, seed: int):
    pm = bundle.reduced_fiber_map(u)
    return sample_fiber_evened(
        pm,
        [0.0],
        radius=radius,
        count=count,
        seed=seed,
        oversample=cfg.oversample_factor,
        dedup_resolution=cfg.sample_dedup,
        rim_fraction=cfg.rim_fraction,
        feature_cuts=(Polynomial.variable("y", REDUCED_VARIABLES),),
        feature_fraction=cfg.seam_fraction,
    )


def verify_fiber_topology(bundle: ShowcaseBundle, cfg: ShowcaseConfig) -> CheckResult:
    """Sampled Betti numbers (1, 1) and Euler estimate 0 on every grid fiber.

    Each fiber also carries a ball-stability margin report; a failed margin
    sweep downgrades a pass to inconclusive rather than failing it.
    """

    def run_one(item):
        k, u = item
        pm = bundle.reduced_fiber_map(u)
        points = _topology_sample(
            bundle, cfg, u, cfg.topology_radius, cfg.topology_count(u), cfg.seed + 211 * k
        )
        summary = betti_summary(
            points,
            factor=cfg.scale_factor,
            percentile=cfg.scale_percentile,
            simplex_cap=cfg.simplex_cap,
        )
        margin_ok = True
        margin: dict
        try:
            rep = estimate_milnor_radius(
                pm,
                [0.0],
                cfg.milnor_grid,
                seed=cfg.seed + 211 * k + 7,
                samples_per_shell=cfg.milnor_samples,
                threshold=cfg.milnor_threshold,
            )
            margin = rep.to_json_dict()
            margin_ok = rep.radius <= cfg.topology_radius
        except InconclusiveMargin as exc:
            margin = exc.report.to_json_dict() if exc.report else {}
            margin_ok = False
        return {
            "u": str(u),
            "betti": [summary.b0, summary.b1],
            "euler": summary.euler,
            "scale": summary.scale,
            "n_points": summary.n_points,
            "stability": margin,
            "stability_ok": margin_ok,
        }

    rows = task_map(run_one, list(enumerate(cfg.topology_grid)), threads=cfg.threads)
    betti_ok = all(tuple(r["betti"]) == (1, 1) and r["euler"] == 0 for r in rows)
    margins_ok = all(r["stability_ok"] for r in rows)
    if not betti_ok:
        status = FAIL
    elif not margins_ok:
        status = INCONCLUSIVE
    else:
        status = PASS
    return CheckResult("fiber_topology", status, {"fibers": rows})


def verify_morse_point(bundle: ShowcaseBundle, cfg: ShowcaseConfig) -> CheckResult:
    """Exactly one critical point of the cut function per grid fiber, at
    ((u^2+1)/u^2, 0, 0) with Morse index 2."""
    hw = cfg.morse_box_halfwidth
    rows = []
    ok = True
    for k, u in enumerate(cfg.morse_grid):
        rf = bundle.cut_restricted(u)
        result = constrained_critical_points(
            rf,
            [(-hw, hw)] * 3,
            multistart_n=cfg.morse_multistart,
            seed=cfg.seed + 97 * k,
        )
        expected = np.array([float(bundle.morse_x(u)), 0.0, 0.0])
        row = {
            "u": str(u),
            "n_points": len(result.points),
            "expected_location": [repr(float(v)) for v in expected],
            "diagnostics": {
                k2: v for k2, v in result.diagnostics.items() if k2 != "boundary_pass"
            },
        }
        if len(result.points) == 1:
            p = result.points[0]
            err = float(np.abs(p.location - expected).max())
            row.update(
                {
                    "location": [repr(float(v)) for v in p.location],
                    "location_error": repr(err),
                    "morse_index": p.morse_index,
                    "eigenvalues": [repr(float(e)) for e in p.eigenvalues],
                }
            )
            ok = ok and err <= cfg.morse_location_tol and p.morse_index == 2
            if u == 1:
                eig = sorted(p.eigenvalues)
                ref = (-2.0, -1.0 / 3.0)
                chart_err = max(abs(eig[0] - ref[0]), abs(eig[1] - ref[1]))
                row["chart_eigenvalue_error"] = repr(chart_err)
                ok = ok and chart_err <= cfg.morse_eigen_tol
        else:
            ok = False
        rows.append(row)
    return CheckResult("morse_point", PASS if ok else FAIL, {"fibers": rows})


def verify_loop_dichotomy(bundle: ShowcaseBundle, cfg: ShowcaseConfig) -> CheckResult:
    """Track the cut circle along the arc: it must bound over Z/2 on every
    positive-grid fiber and fail to bound at the endpoint, with the per-u
    Betti table constant at (1, 1)."""
    schedule = sorted(float(u) for u in cfg.loop_grid)
    arc = Arc.segment([0.0, 0.0], [0.0, 1.0], schedule)
    trace_cfg = LoopTraceConfig(
        radius=cfg.loop_radius,
        auto_radius=True,
        count=cfg.loop_count,
        count_wide=cfg.loop_count_wide,
        loop_count=cfg.loop_cut_count,
        seed=cfg.seed,
        simplex_cap=cfg.loop_simplex_cap,
        scale_factor=cfg.scale_factor,
        scale_percentile=cfg.scale_percentile,
        oversample=cfg.loop_oversample,
        rim_fraction=cfg.loop_rim_fraction,
        feature_cuts=(Polynomial.variable("y", FAMILY_VARIABLES),),
        threads=cfg.threads,
    )
    trace = track_loop_along_arc(bundle.family_map, arc, bundle.family_cut, trace_cfg)
    rows = [
        {
            "u": st.s,
            "is_boundary": st.is_boundary,
            "betti": list(st.betti),
            "radius": st.radius,
            "scale": repr(st.scale),
        }
        for st in trace.steps
    ]
    verdicts = {st.s: st.is_boundary for st in trace.steps}
    dichotomy = verdicts.get(0.0) is False and all(
        v for s, v in verdicts.items() if s > 0
    )
    table_ok = all(tuple(st.betti) == (1, 1) for st in trace.steps)
    status = PASS if (dichotomy and table_ok) else FAIL
    return (
        CheckResult(
            "loop_dichotomy",
            status,
            {"steps": rows, "betti_table_constant": table_ok, "dichotomy": dichotomy},
        ),
        trace,
    )


def verify_all(bundle: ShowcaseBundle, cfg: ShowcaseConfig) -> ShowcaseReport:
    """Run all four checks and assemble the report with the final verdict."""
    c1 = verify_no_singularity(bundle, cfg)
    c23 = verify_fiber_topology(bundle, cfg)
    c4a = verify_morse_point(bundle, cfg)
    c4b, trace = verify_loop_dichotomy(bundle, cfg)
    verdict = atypicality_verdict(None, trace=trace)
    table = tuple(
        (str(st.s), st.betti[0], st.betti[1]) for st in trace.steps
    )
    return ShowcaseReport(
        config=cfg,
        checks=(c1, c23, c4a, c4b),
        verdict=verdict,
        betti_table=table,
    )


# ----------------------------------------------------------------------
# independent chart oracle for the Morse data
# ----------------------------------------------------------------------


def implicit_chart_eigenvalues(
    bundle: ShowcaseBundle, u: Fraction, step: float = 1e-4
) -> Tuple[float, float]:
    """Hessian eigenvalues of the cut function in the implicit (y, z) chart.

    Solves x(y, z) from the fiber equation by one-dimensional Newton around
    the critical point and applies second differences to x(y,z) - z^2; an
    oracle for the tangent-basis eigenvalues reported by the solver.
    """
    u = Fraction(u)
    poly = bundle.reduced_fiber_polynomial(u)
    px = poly.differentiate("x")
    x0 = float(bundle.morse_x(u))

    def solve_x(yv: float, zv: float) -> float:
        xv = x0
        for _ in range(80):
            val = float(poly.evaluate((xv, yv, zv)))
            dv = float(px.evaluate((xv, yv, zv)))
            delta = val / dv
            xv -= delta
            if abs(delta) < 1e-14 * (1 + abs(xv)):
                break
        return xv

    def r(yv: float, zv: float) -> float:
        return solve_x(yv, zv) - zv * zv

    h = step
    r00 = r(0.0, 0.0)
    dyy = (r(h, 0.0) - 2 * r00 + r(-h, 0.0)) / h**2
    dzz = (r(0.0, h) - 2 * r00 + r(0.0, -h)) / h**2
    dyz = (r(h, h) - r(h, -h) - r(-h, h) + r(-h, -h)) / (4 * h**2)
    H = np.array([[dyy, dyz], [dyz, dzz]])
    eig = np.linalg.eigvalsh(H)
    return (float(eig[0]), float(eig[1]))
