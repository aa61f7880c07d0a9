"""Fibration analysis along an arc in the target space.

Per-parameter fiber invariants (beta_0, beta_1, Euler estimate), component
tracking with a vanishing-component heuristic, tracking of a distinguished
loop family cut out by polynomial constraints, and the final atypicality
verdict.  The verdict is evidence, not proof, and says so in its output.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .poly import Polynomial, PolynomialMap
from .rips import (
    DEFAULT_SIMPLEX_CAP,
    PersistenceSummary,
    RipsComplex,
    betti_summary,
    loop_is_boundary,
    select_scale,
)
from .variety import (
    FiberEmptyWithinBall,
    ProjectionError,
    RestrictedFunction,
    constrained_critical_points,
    sample_fiber,
    sample_fiber_evened,
)
from ._tasks import task_map

__all__ = [
    "Arc",
    "ScanConfig",
    "ComponentStat",
    "FiberRecord",
    "JumpRecord",
    "ArcReport",
    "VanishingFlag",
    "LoopTraceConfig",
    "LoopStep",
    "LoopTrace",
    "VerdictRecord",
    "CutLocusNotACircle",
    "ChainingAmbiguity",
    "scan_arc",
    "detect_vanishing_components",
    "track_loop_along_arc",
    "atypicality_verdict",
]


class CutLocusNotACircle(RuntimeError):
    """The cut constraints do not slice this fiber in a single circle."""


class ChainingAmbiguity(RuntimeError):
    """Nearest-neighbor chaining of the cut locus branched."""


# ----------------------------------------------------------------------
# arcs
# ----------------------------------------------------------------------


class Arc:
    """A piecewise-linear embedded arc gamma: [0,1] -> R^n with a sample
    schedule.

    ``gamma(0)`` is the endpoint of interest; the schedule lies in [0,1],
    contains both 0 and 1, and is stored sorted ascending.
    """

    def __init__(self, vertices: Sequence[Sequence[float]], schedule: Sequence[float]):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] < 2:
            raise ValueError("an arc needs at least two waypoints")
        seg = np.linalg.norm(np.diff(V, axis=0), axis=1)
        if np.any(seg == 0):
            raise ValueError("consecutive arc waypoints must be distinct")
        self.vertices = V
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])
        self._length = float(self._cum[-1])
        sched = sorted(float(s) for s in schedule)
        if not sched or sched[0] != 0.0 or sched[-1] != 1.0:
            raise ValueError("schedule must lie in [0,1] and contain 0 and 1")
        if any(s < 0 or s > 1 for s in sched):
            raise ValueError("schedule must lie in [0,1]")
        if len(set(sched)) != len(sched):
            raise ValueError("schedule entries must be distinct")
        self.schedule = tuple(sched)
        pts = np.array([self.gamma(s) for s in self.schedule])
        d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
        np.fill_diagonal(d, np.inf)
        if d.min() == 0.0:
            raise ValueError("gamma is not injective on the schedule samples")

    @property
    def dimension(self) -> int:
        return int(self.vertices.shape[1])

    @property
    def endpoint(self) -> np.ndarray:
        """t0 = gamma(0)."""
        return self.vertices[0].copy()

    def gamma(self, s: float) -> np.ndarray:
        """Arc-length parametrization over [0,1]."""
        s = float(s)
        if s < 0.0 or s > 1.0:
            raise ValueError("arc parameter must lie in [0,1]")
        target = s * self._length
        k = int(np.searchsorted(self._cum, target, side="right") - 1)
        k = min(max(k, 0), len(self._cum) - 2)
        seg_len = self._cum[k + 1] - self._cum[k]
        t = 0.0 if seg_len == 0 else (target - self._cum[k]) / seg_len
        return (1 - t) * self.vertices[k] + t * self.vertices[k + 1]

    @classmethod
    def segment(cls, start, end, schedule) -> "Arc":
        return cls([start, end], schedule)

    def to_json_dict(self) -> dict:
        return {
            "vertices": [[float(v) for v in row] for row in self.vertices],
            "schedule": list(self.schedule),
        }


# ----------------------------------------------------------------------
# arc scanning
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ScanConfig:
    radius: float = 8.0
    count: int = 2000
    seed: int = 0
    tol: float = 1e-10
    oversample: int = 3
    dedup_resolution: float = 1e-6
    scale_factor: float = 3.0
    scale_percentile: float = 90.0
    simplex_cap: int = DEFAULT_SIMPLEX_CAP
    attempts_factor: int = 12
    component_subsample: int = 60
    threads: Optional[int] = None

    def to_json_dict(self) -> dict:
        d = self.__dict__.copy()
        return d


@dataclass(frozen=True)
class ComponentStat:
    n_points: int
    centroid: Tuple[float, ...]
    diameter: float
    subsample: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "n_points": self.n_points,
            "centroid": [repr(c) for c in self.centroid],
            "diameter": repr(self.diameter),
        }


@dataclass(frozen=True)
class FiberRecord:
    s: float
    target: Tuple[float, ...]
    summary: Optional[PersistenceSummary]
    components: Tuple[ComponentStat, ...]
    error: Optional[str] = None

    def betti(self) -> Optional[Tuple[int, int]]:
        return None if self.summary is None else (self.summary.b0, self.summary.b1)

    def to_json_dict(self) -> dict:
        return {
            "s": self.s,
            "target": list(self.target),
            "summary": None if self.summary is None else self.summary.to_json_dict(),
            "components": [c.to_json_dict() for c in self.components],
            "error": self.error,
        }


@dataclass(frozen=True)
class JumpRecord:
    s_toward_zero: float
    s_away: float
    betti_toward_zero: Tuple[int, int]
    betti_away: Tuple[int, int]

    def to_json_dict(self) -> dict:
        return {
            "s_toward_zero": self.s_toward_zero,
            "s_away": self.s_away,
            "betti_toward_zero": list(self.betti_toward_zero),
            "betti_away": list(self.betti_away),
        }


@dataclass(frozen=True)
class ArcReport:
    arc: Arc
    config: ScanConfig
    records: Tuple[FiberRecord, ...]  # ascending in s
    jumps: Tuple[JumpRecord, ...]

    def record_at(self, s: float) -> FiberRecord:
        for r in self.records:
            if r.s == s:
                return r
        raise KeyError(f"no record at s={s}")

    def betti_table(self) -> List[Tuple[float, Optional[Tuple[int, int]]]]:
        return [(r.s, r.betti()) for r in self.records]

    def to_json_dict(self) -> dict:
        return {
            "arc": self.arc.to_json_dict(),
            "config": self.config.to_json_dict(),
            "records": [r.to_json_dict() for r in self.records],
            "jumps": [j.to_json_dict() for j in self.jumps],
        }


def _component_stats(points: np.ndarray, scale: float, subsample: int) -> Tuple[ComponentStat, ...]:
    if points.shape[0] == 0:
        return ()
    cx = RipsComplex(points, scale, simplex_cap=2**62)
    labels = cx.union_find().labels()
    stats = []
    for lab in sorted(set(int(l) for l in labels)):
        mask = labels == lab
        pts = points[mask]
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        step = max(1, pts.shape[0] // subsample)
        stats.append(
            ComponentStat(
                n_points=int(mask.sum()),
                centroid=tuple(float(c) for c in pts.mean(axis=0)),
                diameter=float(np.linalg.norm(hi - lo)),
                subsample=pts[::step].copy(),
            )
        )
    stats.sort(key=lambda c: (-c.n_points, c.centroid))
    return tuple(stats)


def scan_arc(pmap: PolynomialMap, arc: Arc, cfg: ScanConfig = ScanConfig()) -> ArcReport:
    """Sample the fiber over every schedule parameter and record invariants.

    Per-parameter sampling failures are recorded on the affected entry, not
    raised.  Invariant jumps between consecutive schedule entries are
    reported at their toward-zero endpoint.  Deterministic per seed.
    """
    if arc.dimension != pmap.n:
        raise ValueError(f"arc lives in R^{arc.dimension}, map targets R^{pmap.n}")
    if pmap.m <= pmap.n:
        raise ValueError("fiber analysis needs domain dimension > target dimension")

    def run_one(item):
        k, s = item
        target = arc.gamma(s)
        try:
            points = sample_fiber_evened(
                pmap,
                target,
                radius=cfg.radius,
                count=cfg.count,
                seed=cfg.seed + 1009 * k,
                tol=cfg.tol,
                oversample=cfg.oversample,
                dedup_resolution=max(cfg.dedup_resolution, 1e-6),
                rim_fraction=0.0,
                attempts_factor=cfg.attempts_factor,
            )
        except (FiberEmptyWithinBall, ProjectionError) as exc:
            return FiberRecord(
                s=float(s), target=tuple(float(t) for t in target), summary=None,
                components=(), error=f"{type(exc).__name__}: {exc}",
            )
        summary = betti_summary(
            points,
            factor=cfg.scale_factor,
            percentile=cfg.scale_percentile,
            simplex_cap=cfg.simplex_cap,
        )
        comps = _component_stats(points, summary.scale, cfg.component_subsample)
        return FiberRecord(
            s=float(s), target=tuple(float(t) for t in target), summary=summary,
            components=comps,
        )

    records = task_map(run_one, list(enumerate(arc.schedule)), threads=cfg.threads)
    jumps = []
    for low, high in zip(records, records[1:]):
        bl, bh = low.betti(), high.betti()
        if bl is not None and bh is not None and bl != bh:
            jumps.append(JumpRecord(low.s, high.s, bl, bh))
    return ArcReport(arc=arc, config=cfg, records=tuple(records), jumps=tuple(jumps))


# ----------------------------------------------------------------------
# vanishing components
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class VanishingFlag:
    chain_s: Tuple[float, ...]  # parameters where the component was tracked
    counts: Tuple[int, ...]
    diameters: Tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {
            "chain_s": list(self.chain_s),
            "counts": list(self.counts),
            "diameters": [repr(d) for d in self.diameters],
        }


def _components_match(a: ComponentStat, b: ComponentStat, scale_a, scale_b, factor) -> bool:
    radius = factor * max(scale_a, scale_b) + 0.6 * max(a.diameter, b.diameter)
    d = np.linalg.norm(a.subsample[:, None, :] - b.subsample[None, :, :], axis=2)
    return float(d.min()) <= radius


def detect_vanishing_components(
    report: ArcReport, match_factor: float = 2.0, shrink_slack: float = 1.15
) -> List[VanishingFlag]:
    """Flag components that shrink monotonically toward s=0 and have no
    match on the endpoint fiber.

    Matching is proximity of component subsamples at a radius set by the
    complex scales and component sizes; a heuristic, so boundary cases
    (components shrinking to a sampled limit point) stay unflagged.
    """
    if len(report.records) < 2:
        raise ValueError("need at least two schedule entries")
    recs = list(report.records)  # ascending in s
    zero = recs[0]
    if zero.s != 0.0:
        raise ValueError("the schedule must contain s=0")
    flags: List[VanishingFlag] = []
    positive = [r for r in recs[1:] if r.summary is not None]
    if not positive:
        return flags
    first = positive[0]  # smallest positive s

    def scale_of(rec):
        return rec.summary.scale if rec.summary else 0.0

    for comp in first.components:
        # no continuation on the endpoint fiber?
        matched_zero = zero.summary is not None and any(
            _components_match(comp, c0, scale_of(first), scale_of(zero), match_factor)
            for c0 in zero.components
        )
        if matched_zero:
            continue
        # walk the chain away from 0 while it stays matched and shrinking
        chain = [(first.s, comp)]
        cur = comp
        cur_scale = scale_of(first)
        for rec in positive[1:]:
            nxt = None
            for cand in rec.components:
                if _components_match(cur, cand, cur_scale, scale_of(rec), match_factor):
                    nxt = cand
                    break
            if nxt is None:
                break
            chain.append((rec.s, nxt))
            cur, cur_scale = nxt, scale_of(rec)
        if len(chain) < 2:
            continue
        counts = [c.n_points for _, c in chain]
        diams = [c.diameter for _, c in chain]
        shrinking = all(
            counts[i] <= shrink_slack * counts[i + 1] for i in range(len(counts) - 1)
        ) and all(diams[i] <= shrink_slack * diams[i + 1] for i in range(len(diams) - 1))
        if shrinking:
            flags.append(
                VanishingFlag(
                    chain_s=tuple(s for s, _ in chain),
                    counts=tuple(counts),
                    diameters=tuple(diams),
                )
            )
    return flags


# ----------------------------------------------------------------------
# loop tracking
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class LoopTraceConfig:
    radius: float = 8.0
    auto_radius: bool = True
    radius_margin: float = 1.1
    crit_box_halfwidth: float = 30.0
    crit_multistart: int = 768
    count: int = 3000
    count_wide: Optional[int] = None  # used when the ball is auto-enlarged
    oversample: int = 1
    rim_fraction: float = 0.0
    feature_cuts: Tuple[Polynomial, ...] = ()
    loop_count: int = 400
    loop_oversample: int = 8
    seed: int = 0
    tol: float = 1e-10
    dedup_resolution: float = 1e-6
    scale_factor: float = 3.0
    scale_percentile: float = 90.0
    simplex_cap: int = DEFAULT_SIMPLEX_CAP
    attempts_factor: int = 20
    ambiguity_factor: float = 3.0
    continuation_gap: float = 3.0
    threads: Optional[int] = None

    def to_json_dict(self) -> dict:
        return self.__dict__.copy()


@dataclass(frozen=True)
class LoopStep:
    s: float
    radius: float
    is_boundary: bool
    scale: float
    betti: Tuple[int, int]
    loop_points: np.ndarray
    max_chain_gap: float
    median_chain_gap: float
    hausdorff_to_previous: Optional[float] = None
    continuation_gap_flag: bool = False

    def to_json_dict(self) -> dict:
        return {
            "s": self.s,
            "radius": self.radius,
            "is_boundary": self.is_boundary,
            "scale": repr(self.scale),
            "betti": list(self.betti),
            "n_loop_points": int(self.loop_points.shape[0]),
            "max_chain_gap": repr(self.max_chain_gap),
            "median_chain_gap": repr(self.median_chain_gap),
            "hausdorff_to_previous": None
            if self.hausdorff_to_previous is None
            else repr(self.hausdorff_to_previous),
            "continuation_gap_flag": self.continuation_gap_flag,
        }


@dataclass(frozen=True)
class LoopTrace:
    config: LoopTraceConfig
    steps: Tuple[LoopStep, ...]  # ascending in s

    def verdicts(self) -> List[Tuple[float, bool]]:
        return [(st.s, st.is_boundary) for st in self.steps]

    def class_change_toward_zero(self) -> bool:
        if len(self.steps) < 2:
            return False
        at_zero = self.steps[0].is_boundary
        return any(st.is_boundary != at_zero for st in self.steps[1:])

    def to_json_dict(self) -> dict:
        return {
            "config": self.config.to_json_dict(),
            "steps": [st.to_json_dict() for st in self.steps],
        }


def _nearest_neighbor_cycle(points: np.ndarray, ambiguity_factor: float) -> Tuple[np.ndarray, float, float]:
    """Order points into a closed cycle by greedy nearest-neighbor walking.

    Returns (ordered points, max gap, median gap); raises
    :class:`ChainingAmbiguity` when some step jumps across branches.
    """
    n = points.shape[0]
    if n < 3:
        raise CutLocusNotACircle(f"only {n} cut-locus points; cannot chain a circle")
    used = np.zeros(n, dtype=bool)
    order = [0]
    used[0] = True
    for _ in range(n - 1):
        d = np.linalg.norm(points - points[order[-1]], axis=1)
        d[used] = np.inf
        nxt = int(np.argmin(d))
        order.append(nxt)
        used[nxt] = True
    cycle = points[order]
    gaps = np.linalg.norm(np.roll(cycle, -1, axis=0) - cycle, axis=1)
    med = float(np.median(gaps))
    mx = float(gaps.max())
    if med > 0 and mx > ambiguity_factor * med:
        raise ChainingAmbiguity(
            f"chaining gap {mx:.4g} exceeds {ambiguity_factor} x median {med:.4g}"
        )
    return cycle, mx, med


def _hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def track_loop_along_arc(
    pmap: PolynomialMap,
    arc: Arc,
    loop_constraints: PolynomialMap,
    cfg: LoopTraceConfig = LoopTraceConfig(),
) -> LoopTrace:
    """Track the loop cut out of each fiber by the constraints and test
    whether it bounds over Z/2 in that fiber's complex.

    The sampling ball is enlarged per fiber to cover every critical point of
    the cut function on the fiber: those are where a filling membrane can
    close off, so the verdict must not be an artifact of the ball.  The cut
    locus must sample as a single circle (beta_0 = beta_1 = 1), else
    :class:`CutLocusNotACircle` is raised.
    """
    if loop_constraints.variables != pmap.variables:
        raise ValueError("loop constraints must share the map's variable list")
    cut_polys = loop_constraints.components

    def run_one(item):
        k, s = item
        target = arc.gamma(s)
        radius = cfg.radius
        count = cfg.count
        if cfg.auto_radius and len(cut_polys) == 1:
            shifted = [
                c - Polynomial.constant(pmap.variables, _to_fraction_exact(t))
                for c, t in zip(pmap.components, target)
            ]
            rf = RestrictedFunction(cut_polys[0], PolynomialMap(shifted))
            crit = constrained_critical_points(
                rf,
                [(-cfg.crit_box_halfwidth, cfg.crit_box_halfwidth)] * pmap.m,
                multistart_n=cfg.crit_multistart,
                seed=cfg.seed + 37 * k,
                boundary_pass=False,
            )
            if crit.points:
                reach = max(float(np.linalg.norm(p.location)) for p in crit.points)
                enlarged = max(radius, cfg.radius_margin * (reach + 1.0))
                if enlarged > 1.5 * radius and cfg.count_wide:
                    count = max(count, int(cfg.count_wide))
                radius = enlarged

        if cfg.oversample > 1 or cfg.rim_fraction > 0:
            fiber_points = sample_fiber_evened(
                pmap, target, radius=radius, count=count,
                seed=cfg.seed + 1009 * k, tol=cfg.tol,
                oversample=max(cfg.oversample, 1),
                dedup_resolution=max(cfg.dedup_resolution, 0.02),
                rim_fraction=cfg.rim_fraction,
                feature_cuts=cfg.feature_cuts,
                attempts_factor=cfg.attempts_factor,
            )
        else:
            fiber = sample_fiber(
                pmap, target, radius=radius, count=count,
                seed=cfg.seed + 1009 * k, tol=cfg.tol,
                dedup_resolution=cfg.dedup_resolution, attempts_factor=cfg.attempts_factor,
            )
            fiber_points = fiber.points
        aug = PolynomialMap(list(pmap.components) + list(cut_polys))
        cut_target = list(target) + [0.0] * len(cut_polys)
        # probe the cut locus extent, then resample it inside a tight ball so
        # the start budget is spent on the curve rather than the empty bulk
        probe = sample_fiber(
            aug, cut_target, radius=radius, count=64,
            seed=cfg.seed + 1009 * k + 29, tol=cfg.tol,
            dedup_resolution=1e-6, attempts_factor=40,
        )
        reach = float(np.linalg.norm(probe.points, axis=1).max())
        cut_radius = min(radius, 1.25 * reach + 0.5)
        cut_points = sample_fiber_evened(
            aug, cut_target, radius=cut_radius,
            count=cfg.loop_count, seed=cfg.seed + 1009 * k + 13, tol=cfg.tol,
            oversample=cfg.loop_oversample, dedup_resolution=1e-6,
            rim_fraction=0.0, attempts_factor=cfg.attempts_factor,
        )
        cut_summary = betti_summary(
            cut_points, factor=cfg.scale_factor, percentile=cfg.scale_percentile,
            simplex_cap=cfg.simplex_cap,
        )
        if (cut_summary.b0, cut_summary.b1) != (1, 1):
            raise CutLocusNotACircle(
                f"cut locus at s={s} has (b0,b1)=({cut_summary.b0},{cut_summary.b1})"
            )
        cycle, mx, med = _nearest_neighbor_cycle(cut_points, cfg.ambiguity_factor)

        fiber_summary = betti_summary(
            fiber_points, factor=cfg.scale_factor, percentile=cfg.scale_percentile,
            simplex_cap=cfg.simplex_cap,
        )
        verdict = loop_is_boundary(
            fiber_points, cycle, fiber_summary.scale, simplex_cap=cfg.simplex_cap
        )
        return LoopStep(
            s=float(s), radius=float(radius), is_boundary=bool(verdict),
            scale=fiber_summary.scale, betti=(fiber_summary.b0, fiber_summary.b1),
            loop_points=cycle, max_chain_gap=mx, median_chain_gap=med,
        )

    steps = task_map(run_one, list(enumerate(arc.schedule)), threads=cfg.threads)
    # continuation bookkeeping, walking away from s=0
    final: List[LoopStep] = [steps[0]]
    for prev, cur in zip(steps, steps[1:]):
        h = _hausdorff(prev.loop_points, cur.loop_points)
        final.append(
            replace(cur, hausdorff_to_previous=h, continuation_gap_flag=h > cfg.continuation_gap)
        )
    return LoopTrace(config=cfg, steps=tuple(final))


def _to_fraction_exact(t: float):
    from fractions import Fraction

    return Fraction(float(t)).limit_denominator(10**12)


# ----------------------------------------------------------------------
# verdict
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class VerdictRecord:
    verdict: str  # "ATYPICAL" | "NO-EVIDENCE"
    reasons: Tuple[Tuple[str, str], ...]  # (code, detail)
    note: str

    @property
    def machine_line(self) -> str:
        codes = ",".join(code for code, _ in self.reasons) or "none"
        return f"verdict={self.verdict} reasons={codes}"

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "reasons": [{"code": c, "detail": d} for c, d in self.reasons],
            "note": self.note,
        }


def atypicality_verdict(
    report: Optional[ArcReport],
    trace: Optional[LoopTrace] = None,
    vanishing: Optional[List[VanishingFlag]] = None,
) -> VerdictRecord:
    """Combine scan, vanishing-component, and loop evidence into a verdict.

    ATYPICAL when any invariant jumps along the arc, a component vanishes
    toward the endpoint, or the tracked loop changes boundary class toward
    s=0.  Adding evidence can only move the verdict toward ATYPICAL.
    """
    reasons: List[Tuple[str, str]] = []
    for j in (report.jumps if report is not None else ()):
        b_lo, b_hi = j.betti_toward_zero, j.betti_away
        if b_lo[0] != b_hi[0]:
            reasons.append(
                (
                    "b0-jump",
                    f"component count {b_hi[0]} -> {b_lo[0]} at s={j.s_toward_zero}",
                )
            )
        if b_lo[1] != b_hi[1]:
            reasons.append(
                ("b1-jump", f"loop rank {b_hi[1]} -> {b_lo[1]} at s={j.s_toward_zero}")
            )
    if vanishing:
        for flag in vanishing:
            reasons.append(
                (
                    "vanishing-component",
                    f"component tracked over s={list(flag.chain_s)} has no endpoint match",
                )
            )
    if trace is not None and trace.class_change_toward_zero():
        at_zero = trace.steps[0].is_boundary
        reasons.append(
            (
                "loop-class-change",
                "tracked loop is a boundary for s>0 but not at s=0"
                if not at_zero
                else "tracked loop is a boundary at s=0 but not for s>0",
            )
        )
    verdict = "ATYPICAL" if reasons else "NO-EVIDENCE"
    return VerdictRecord(
        verdict=verdict,
        reasons=tuple(reasons),
        note="sample-level evidence, not a proof",
    )
