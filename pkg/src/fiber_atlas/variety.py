"""Numerical operations on real polynomial varieties.

Gauss-Newton projection onto fibers, quasirandom fiber sampling inside balls,
stability-radius estimation for the sampling ball, multistart search for
constrained critical points with Morse data, and evidence-grade certification
that a map has no singular point over an arc.

Everything is deterministic for a fixed seed: starts come from seeded
scrambled Sobol sequences and results are merged by lexicographic sort on
rounded coordinates.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import qmc

from .poly import BatchEvaluator, BatchMap, Polynomial, PolynomialMap, UnivariatePolynomial
from .realroots import square_free_part

__all__ = [
    "ProjectionError",
    "MaxIterExceeded",
    "SingularStep",
    "FiberEmptyWithinBall",
    "InconclusiveMargin",
    "FiberSample",
    "RestrictedFunction",
    "CriticalPoint",
    "CriticalPointResult",
    "MilnorShell",
    "MilnorReport",
    "SingularityCertificate",
    "project_to_fiber",
    "sample_fiber",
    "estimate_milnor_radius",
    "constrained_critical_points",
    "certify_no_singularity_on_arc",
]

RANK_RTOL = 1e-6  # smallest/largest singular value below this flags deficiency


class ProjectionError(RuntimeError):
    pass


class MaxIterExceeded(ProjectionError):
    """Gauss-Newton failed to reach the fiber within the iteration budget."""


class SingularStep(ProjectionError):
    """Jacobian row rank collapsed along the projection path."""


class FiberEmptyWithinBall(RuntimeError):
    """No projection start converged; the fiber looks empty in the ball."""


class InconclusiveMargin(RuntimeError):
    """Transversality margins oscillate below threshold across the grid."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# ----------------------------------------------------------------------
# seeding helpers
# ----------------------------------------------------------------------

_STREAM_SAMPLE = 101
_STREAM_SHELL = 202
_STREAM_CRITICAL = 303
_STREAM_CERTIFY = 404


def _sobol(dim: int, seed: int, stream: int) -> qmc.Sobol:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream),))
    return qmc.Sobol(d=dim, scramble=True, seed=np.random.default_rng(ss))


# ----------------------------------------------------------------------
# batched Gauss-Newton projection
# ----------------------------------------------------------------------


def _project_batch(
    bm: BatchMap,
    target: np.ndarray,
    starts: np.ndarray,
    tol: float,
    max_iter: int,
):
    """Project a batch of starts onto f^{-1}(target) by Gauss-Newton.

    Returns (points, converged mask, residual norms, singular-step mask).
    The update is the minimal-norm least-squares step, so iterates move in
    the row space of the Jacobian (the normal directions of the fiber).
    """
    X = np.array(starts, dtype=float, copy=True)
    B = X.shape[0]
    target = np.asarray(target, dtype=float).reshape(1, -1)
    R = bm.values(X) - target
    rnorm = np.linalg.norm(R, axis=1)
    converged = rnorm <= tol
    singular = np.zeros(B, dtype=bool)
    active = ~converged
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        J = bm.jacobian(X[idx])
        # row equilibration: mixed-degree components make raw singular-value
        # ratios meaningless, and solutions of the consistent system J s = r
        # are unchanged by row scaling
        row_norms = np.maximum(np.linalg.norm(J, axis=2), 1e-300)
        Js = J / row_norms[:, :, None]
        Rs = R[idx] / row_norms
        finite = np.isfinite(Js).all(axis=(1, 2)) & np.isfinite(Rs).all(axis=1)
        if not finite.all():
            active[idx[~finite]] = False
            idx = idx[finite]
            if idx.size == 0:
                break
            Js, Rs = Js[finite], Rs[finite]
        U, S, Vt = np.linalg.svd(Js, full_matrices=False)
        smax = S[:, 0]
        bad = S[:, -1] <= RANK_RTOL * np.maximum(smax, 1e-300)
        Sinv = np.where(S > RANK_RTOL * smax[:, None], 1.0 / np.maximum(S, 1e-300), 0.0)
        coeff = np.einsum("bkn,bn->bk", U.transpose(0, 2, 1), Rs)
        step = np.einsum("bkm,bk->bm", Vt, Sinv * coeff)
        Xn = X[idx] - step
        X[idx] = Xn
        Rn = bm.values(Xn) - target
        R[idx] = Rn
        rn = np.linalg.norm(Rn, axis=1)
        rnorm[idx] = rn
        newly_conv = rn <= tol
        diverged = ~np.isfinite(rn) | (np.linalg.norm(Xn, axis=1) > 1e9)
        singular[idx[bad & ~newly_conv]] = True
        converged[idx[newly_conv]] = True
        active[idx[newly_conv | bad | diverged]] = False
    return X, converged, rnorm, singular


def project_to_fiber(
    pmap: PolynomialMap,
    target: Sequence[float],
    start: Sequence[float],
    tol: float = 1e-10,
    max_iter: int = 80,
) -> np.ndarray:
    """Move ``start`` onto f^{-1}(target) by Gauss-Newton least squares.

    The returned point satisfies ``||f(x) - target|| <= tol``.  A start that
    already lies on the fiber is returned unchanged (the first step is zero).

    Raises :class:`SingularStep` when the Jacobian loses row rank along the
    path and :class:`MaxIterExceeded` when the iteration budget runs out.
    """
    start = np.asarray(start, dtype=float)
    if start.shape != (pmap.m,):
        raise ValueError(f"start has shape {start.shape}, expected ({pmap.m},)")
    if not np.all(np.isfinite(start)):
        raise ValueError("start must be finite")
    target = np.asarray(target, dtype=float)
    if target.shape != (pmap.n,):
        raise ValueError(f"target has shape {target.shape}, expected ({pmap.n},)")
    bm = BatchMap(pmap)
    X, ok, rnorm, singular = _project_batch(bm, target, start[None, :], tol, max_iter)
    if ok[0]:
        return X[0]
    if singular[0]:
        raise SingularStep(
            f"Jacobian row rank collapsed at {X[0]} (residual {rnorm[0]:.3e})"
        )
    raise MaxIterExceeded(
        f"no convergence after {max_iter} iterations (residual {rnorm[0]:.3e})"
    )


# ----------------------------------------------------------------------
# fiber sampling
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class FiberSample:
    """Point cloud on f^{-1}(target) inside the ball of radius ``radius``.

    Deterministic for a fixed (seed, config); every point satisfies
    ``||f(x) - target|| <= tol`` and ``||x|| <= radius``.
    """

    target: Tuple[float, ...]
    radius: float
    points: np.ndarray
    residuals: np.ndarray
    seed: int
    tol: float
    dedup_resolution: float
    attempts: int
    variables: Tuple[str, ...]

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(list(self.variables) + ["residual"])
            for p, r in zip(self.points, self.residuals):
                writer.writerow([repr(float(v)) for v in p] + [repr(float(r))])

    def metadata(self) -> dict:
        return {
            "target": list(self.target),
            "radius": self.radius,
            "count": self.count,
            "seed": self.seed,
            "tol": self.tol,
            "dedup_resolution": self.dedup_resolution,
            "attempts": self.attempts,
            "variables": list(self.variables),
        }

    def to_json(self, path) -> None:
        payload = dict(self.metadata())
        payload["points"] = [[repr(float(v)) for v in p] for p in self.points]
        payload["residuals"] = [repr(float(r)) for r in self.residuals]
        with open(path, "w") as fh:
            json.dump(payload, fh, sort_keys=True, indent=1)


def sample_fiber(
    pmap: PolynomialMap,
    target: Sequence[float],
    radius: float,
    count: int,
    seed: int,
    tol: float = 1e-10,
    dedup_resolution: float = 1e-6,
    attempts_factor: int = 12,
    max_iter: int = 60,
    batch_size: int = 4096,
    start_pad: Optional[float] = None,
) -> FiberSample:
    """Sample ``count`` fiber points inside the ball by projecting scrambled
    Sobol starts; duplicates are removed on a grid of the given resolution.

    Starts are drawn from a slightly padded ball (``start_pad``, default
    5% of the radius plus 0.1) so fiber stretches near the ball boundary
    keep their full projection basins; only points with ``||x|| <= radius``
    are returned.  Raises :class:`FiberEmptyWithinBall` when ``count > 0``
    and no start converges within the attempt budget.
    """
    if count < 0:
        raise ValueError("count must be nonnegative")
    if radius <= 0:
        raise ValueError("radius must be positive")
    if start_pad is None:
        start_pad = 0.05 * radius + 0.1
    start_radius = radius + max(float(start_pad), 0.0)
    m = pmap.m
    bm = BatchMap(pmap)
    target_arr = np.asarray(target, dtype=float)
    sob = _sobol(m, seed, _STREAM_SAMPLE)
    h = float(dedup_resolution)
    seen: Dict[tuple, int] = {}
    pts: List[np.ndarray] = []
    res: List[float] = []
    attempts = 0
    max_attempts = attempts_factor * max(count, 1)
    while count > 0 and len(pts) < count and attempts < max_attempts:
        raw = sob.random(batch_size)
        starts = (2.0 * raw - 1.0) * start_radius
        inside = np.linalg.norm(starts, axis=1) <= start_radius
        starts = starts[inside]
        if starts.shape[0] == 0:
            continue
        attempts += starts.shape[0]
        X, ok, rnorm, _ = _project_batch(bm, target_arr, starts, tol, max_iter)
        keep = ok & (np.linalg.norm(X, axis=1) <= radius)
        for x, r in zip(X[keep], rnorm[keep]):
            key = tuple(np.round(x / h).astype(np.int64)) if h > 0 else tuple(x)
            if key in seen:
                continue
            seen[key] = len(pts)
            pts.append(x)
            res.append(float(r))
            if len(pts) >= count:
                break
    if count > 0 and not pts:
        raise FiberEmptyWithinBall(
            f"no start converged onto f^{{-1}}({tuple(target_arr)}) within radius {radius}"
        )
    if pts:
        P = np.vstack(pts)
        E = np.asarray(res)
        order = np.lexsort(np.round(P / max(h, 1e-12)).astype(np.int64).T[::-1])
        P, E = P[order], E[order]
    else:
        P = np.zeros((0, m))
        E = np.zeros(0)
    return FiberSample(
        target=tuple(float(t) for t in target_arr),
        radius=float(radius),
        points=P,
        residuals=E,
        seed=int(seed),
        tol=float(tol),
        dedup_resolution=h,
        attempts=attempts,
        variables=pmap.variables,
    )


# ----------------------------------------------------------------------
# stability radius of the sampling ball
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class MilnorShell:
    radius: float
    n_points: int
    margin: Optional[float]  # min relative tangential gradient of ||x||^2
    vacuous: bool


@dataclass(frozen=True)
class MilnorReport:
    radius: float
    vacuous: bool
    shells: Tuple[MilnorShell, ...]
    threshold: float
    fiber_max_norm: float

    def to_json_dict(self) -> dict:
        return {
            "radius": self.radius,
            "vacuous": self.vacuous,
            "threshold": self.threshold,
            "fiber_max_norm": self.fiber_max_norm,
            "shells": [
                {
                    "radius": s.radius,
                    "n_points": s.n_points,
                    "margin": s.margin,
                    "vacuous": s.vacuous,
                }
                for s in self.shells
            ],
        }


def _norm_squared_poly(variables: Sequence[str]) -> Polynomial:
    total = Polynomial.zero(variables)
    for v in variables:
        total = total + Polynomial.variable(v, variables) ** 2
    return total


def sample_fiber_rim(
    pmap: PolynomialMap,
    target: Sequence[float],
    radius: float,
    count: int,
    seed: int,
    tol: float = 1e-10,
    dedup_resolution: float = 1e-6,
    attempts_factor: int = 12,
) -> FiberSample:
    """Sample the rim f^{-1}(target) ∩ ∂B_radius (sphere equation adjoined).

    Ball clipping starves the complex exactly along this rim, so pipelines
    spend a small slice of their budget here; an empty rim (fiber interior
    to the ball) raises :class:`FiberEmptyWithinBall` like the interior
    sampler would.
    """
    psi = _norm_squared_poly(pmap.variables)
    sphere = psi - Polynomial.constant(pmap.variables, Fraction(float(radius)) ** 2)
    aug = PolynomialMap(list(pmap.components) + [sphere])
    sample = sample_fiber(
        aug,
        list(target) + [0.0],
        radius=radius * (1 + 1e-9) + 1e-9,
        count=count,
        seed=seed,
        tol=tol,
        dedup_resolution=dedup_resolution,
        attempts_factor=attempts_factor,
    )
    # rim points satisfy ||x|| = radius to tolerance; clamp into the ball so
    # downstream invariants (||x|| <= radius) hold exactly
    pts = sample.points
    norms = np.linalg.norm(pts, axis=1)
    over = norms > radius
    if np.any(over):
        pts = pts.copy()
        pts[over] *= (radius / norms[over])[:, None]
    return FiberSample(
        target=sample.target[: pmap.n],
        radius=float(radius),
        points=pts,
        residuals=sample.residuals,
        seed=sample.seed,
        tol=sample.tol,
        dedup_resolution=sample.dedup_resolution,
        attempts=sample.attempts,
        variables=pmap.variables,
    )


def sample_fiber_evened(
    pmap: PolynomialMap,
    target: Sequence[float],
    radius: float,
    count: int,
    seed: int,
    tol: float = 1e-10,
    oversample: int = 3,
    dedup_resolution: float = 0.02,
    rim_fraction: float = 0.08,
    feature_cuts: Sequence[Polynomial] = (),
    feature_fraction: float = 0.08,
    attempts_factor: int = 8,
) -> np.ndarray:
    """Evenly distributed fiber sample with densified thin-feature curves.

    Oversamples the fiber and thins it by farthest-point selection to even
    the density.  Two kinds of curves on the fiber are then appended at
    higher linear density: the clipping rim (fiber ∩ sphere) and any
    ``feature_cuts`` (fiber ∩ {q = 0}), typically fold loci where two sheets
    of the variety meet.  Without these, the complex at the auto-selected
    scale develops marginal unfilled bridges along exactly those curves.
    Returns the stacked point array.
    """
    from .rips import farthest_point_subsample

    rim_count = int(round(count * rim_fraction))
    feat_count = int(round(count * feature_fraction)) if feature_cuts else 0
    bulk_count = max(count - rim_count - feat_count, count // 2)
    bulk = sample_fiber(
        pmap, target, radius=radius, count=oversample * bulk_count, seed=seed,
        tol=tol, dedup_resolution=dedup_resolution, attempts_factor=attempts_factor,
    )
    pool = bulk.points
    max_pool = 8 * bulk_count
    if pool.shape[0] > max_pool:
        stride = pool.shape[0] / max_pool
        keep = np.unique((np.arange(max_pool) * stride).astype(np.int64))
        pool = pool[keep]
    idx = farthest_point_subsample(pool, bulk_count)
    parts = [pool[idx]]
    if rim_count > 0:
        try:
            rim = sample_fiber_rim(
                pmap, target, radius=radius, count=rim_count, seed=seed + 1,
                tol=tol, dedup_resolution=min(dedup_resolution, 0.02) / 2,
                attempts_factor=attempts_factor,
            )
            parts.append(rim.points)
        except FiberEmptyWithinBall:
            pass  # compact fiber inside the ball: no rim to hem
    if feat_count > 0:
        per_cut = max(feat_count // len(feature_cuts), 1)
        for j, q in enumerate(feature_cuts):
            aug = PolynomialMap(list(pmap.components) + [q])
            try:
                curve = sample_fiber(
                    aug, list(target) + [0.0], radius=radius, count=per_cut,
                    seed=seed + 2 + j, tol=tol,
                    dedup_resolution=min(dedup_resolution, 0.02) / 2,
                    attempts_factor=attempts_factor,
                )
                parts.append(curve.points)
            except FiberEmptyWithinBall:
                continue
    return np.vstack(parts)


def estimate_milnor_radius(
    pmap: PolynomialMap,
    target: Sequence[float],
    r_grid: Sequence[float],
    seed: int = 0,
    samples_per_shell: int = 200,
    threshold: float = 0.05,
    tol: float = 1e-10,
    probe_count: int = 400,
    attempts_factor: int = 20,
) -> MilnorReport:
    """Estimate a radius beyond which the fiber meets every sphere cleanly.

    For each grid radius the fiber is sampled on the sphere (the sphere
    equation is adjoined to the system) and the margin is the smallest
    relative norm of the component of the gradient of ``||x||^2`` tangent to
    the fiber.  The result is the smallest grid radius from which margins
    stay above threshold, where shells beyond the sampled fiber's reach count
    as vacuous.  Raises :class:`InconclusiveMargin` when no such radius
    exists within the grid.
    """
    grid = [float(r) for r in r_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("r_grid must be strictly increasing")
    if not grid:
        raise ValueError("r_grid must be nonempty")
    rmax = grid[-1]
    try:
        probe = sample_fiber(
            pmap,
            target,
            radius=rmax * 1.05,
            count=probe_count,
            seed=seed,
            tol=tol,
            dedup_resolution=1e-9,
            attempts_factor=attempts_factor,
        )
        fiber_max_norm = (
            float(np.linalg.norm(probe.points, axis=1).max()) if probe.count else 0.0
        )
    except FiberEmptyWithinBall:
        fiber_max_norm = 0.0

    variables = pmap.variables
    psi = _norm_squared_poly(variables)
    bm = BatchMap(pmap)
    pad = 1e-6
    shells: List[MilnorShell] = []
    for r in grid:
        vacuous = r > fiber_max_norm + pad
        if vacuous:
            shells.append(MilnorShell(r, 0, None, True))
            continue
        sphere = psi - Polynomial.constant(variables, Fraction(float(r) * float(r)))
        aug = PolynomialMap(list(pmap.components) + [sphere])
        try:
            shell_sample = sample_fiber(
                aug,
                list(target) + [0.0],
                radius=r * (1 + 1e-9) + 1e-9,
                count=samples_per_shell,
                seed=seed + 17 * int(round(r * 1024)),
                tol=tol,
                dedup_resolution=1e-9,
                attempts_factor=attempts_factor,
            )
        except FiberEmptyWithinBall:
            shells.append(MilnorShell(r, 0, None, False))
            continue
        P = shell_sample.points
        grad_psi = 2.0 * P
        J = bm.jacobian(P)
        G = np.einsum("bnm,bkm->bnk", J, J)
        rhs = np.einsum("bnm,bm->bn", J, grad_psi)
        eye = np.eye(pmap.n) * 1e-14
        alpha = np.linalg.solve(G + eye, rhs[:, :, None])[:, :, 0]
        tangential = grad_psi - np.einsum("bnm,bn->bm", J, alpha)
        rel = np.linalg.norm(tangential, axis=1) / np.maximum(
            np.linalg.norm(grad_psi, axis=1), 1e-300
        )
        shells.append(MilnorShell(r, P.shape[0], float(rel.min()), False))

    def ok(shell: MilnorShell) -> bool:
        return shell.vacuous or (shell.margin is not None and shell.margin >= threshold)

    chosen = None
    for i, shell in enumerate(shells):
        if all(ok(s) for s in shells[i:]):
            chosen = i
            break
    if chosen is None:
        raise InconclusiveMargin(
            "margins stay below threshold through the end of the grid",
            report=MilnorReport(float("nan"), False, tuple(shells), threshold, fiber_max_norm),
        )
    tail_vacuous = all(s.vacuous for s in shells[chosen:])
    return MilnorReport(
        radius=shells[chosen].radius,
        vacuous=tail_vacuous,
        shells=tuple(shells),
        threshold=threshold,
        fiber_max_norm=fiber_max_norm,
    )


# ----------------------------------------------------------------------
# constrained critical points
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class RestrictedFunction:
    """A polynomial objective restricted to a variety with optional
    inequality constraints (each interpreted as ``poly >= 0``)."""

    objective: Polynomial
    constraints: PolynomialMap
    inequalities: Tuple[Polynomial, ...] = ()

    def __post_init__(self):
        if self.objective.variables != self.constraints.variables:
            raise ValueError("objective and constraints must share a variable list")
        for q in self.inequalities:
            if q.variables != self.objective.variables:
                raise ValueError("inequalities must share the variable list")


@dataclass(frozen=True)
class CriticalPoint:
    """A constrained critical point with restricted-Hessian Morse data.

    Eigenvalues are reported in an orthonormal basis of the tangent space
    (QR of the constraint Jacobian); the Morse index is the basis-invariant
    count of negative eigenvalues.
    """

    location: np.ndarray
    multipliers: np.ndarray
    eigenvalues: Tuple[float, ...]
    morse_index: int
    kkt_residual: float
    constraint_residual: float
    tangent_basis: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "location": [repr(float(v)) for v in self.location],
            "multipliers": [repr(float(v)) for v in self.multipliers],
            "eigenvalues": [repr(float(v)) for v in self.eigenvalues],
            "morse_index": self.morse_index,
            "kkt_residual": repr(float(self.kkt_residual)),
            "constraint_residual": repr(float(self.constraint_residual)),
            "chart": "orthonormal tangent basis (QR of constraint Jacobian)",
        }


@dataclass(frozen=True)
class CriticalPointResult:
    points: Tuple[CriticalPoint, ...]
    diagnostics: dict


class _KKTSystem:
    """Batched residual/Jacobian of the Lagrange system for an equality-
    constrained critical point search (unknowns are x then multipliers)."""

    def __init__(self, objective: Polynomial, constraints: PolynomialMap):
        variables = objective.variables
        self.m = len(variables)
        self.k = constraints.n
        self.grad_f = [BatchEvaluator(g) for g in objective.gradient()]
        self.cons = BatchMap(constraints)
        self.hess_f = _hessian_evaluators(objective)
        self.hess_c = [_hessian_evaluators(c) for c in constraints.components]

    def dim(self) -> int:
        return self.m + self.k

    def residual(self, U: np.ndarray) -> np.ndarray:
        X, lam = U[:, : self.m], U[:, self.m :]
        J = self.cons.jacobian(X)
        grad = np.stack([g(X) for g in self.grad_f], axis=1)
        top = grad - np.einsum("bkm,bk->bm", J, lam)
        bottom = self.cons.values(X)
        return np.concatenate([top, bottom], axis=1)

    def jacobian(self, U: np.ndarray) -> np.ndarray:
        X, lam = U[:, : self.m], U[:, self.m :]
        B = X.shape[0]
        m, k = self.m, self.k
        out = np.zeros((B, m + k, m + k))
        HL = _eval_hessians(self.hess_f, X)
        for i, hc in enumerate(self.hess_c):
            HL -= lam[:, i, None, None] * _eval_hessians(hc, X)
        J = self.cons.jacobian(X)
        out[:, :m, :m] = HL
        out[:, :m, m:] = -J.transpose(0, 2, 1)
        out[:, m:, :m] = J
        return out

    def lagrangian_hessian(self, x: np.ndarray, lam: np.ndarray) -> np.ndarray:
        X = x[None, :]
        HL = _eval_hessians(self.hess_f, X)
        for i, hc in enumerate(self.hess_c):
            HL -= lam[i] * _eval_hessians(hc, X)
        return HL[0]


def _hessian_evaluators(p: Polynomial):
    grads = p.gradient()
    m = p.n_variables
    evs = {}
    for i in range(m):
        for j in range(i, m):
            evs[(i, j)] = BatchEvaluator(grads[i].differentiate(p.variables[j]))
    return (m, evs)


def _eval_hessians(hess, X: np.ndarray) -> np.ndarray:
    m, evs = hess
    B = X.shape[0]
    H = np.zeros((B, m, m))
    for (i, j), ev in evs.items():
        vals = ev(X)
        H[:, i, j] = vals
        if i != j:
            H[:, j, i] = vals
    return H


def _levenberg_marquardt(
    residual_fn,
    jacobian_fn,
    U0: np.ndarray,
    tol: float,
    max_iter: int = 60,
    mu0: float = 1e-3,
):
    """Batched damped Newton (Levenberg-Marquardt on the squared residual).

    Accepted steps never increase the residual, so the final residual is the
    minimum along each start's path.  Returns (U, residual norms).
    """
    U = np.array(U0, dtype=float, copy=True)
    R = residual_fn(U)
    cost = np.einsum("be,be->b", R, R)
    mu = np.full(U.shape[0], mu0)
    active = np.sqrt(cost) > tol
    d = U.shape[1]
    eye = np.eye(d)
    for _ in range(max_iter):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        J = jacobian_fn(U[idx])
        finite = (
            np.isfinite(J).all(axis=(1, 2))
            & np.isfinite(R[idx]).all(axis=1)
            & (np.abs(U[idx]).max(axis=1) < 1e12)
        )
        if not finite.all():
            active[idx[~finite]] = False
            idx = idx[finite]
            if idx.size == 0:
                break
            J = J[finite]
        g = np.einsum("bed,be->bd", J, R[idx])
        H = np.einsum("bed,bec->bdc", J, J)
        remaining = np.arange(idx.size)
        accepted = np.zeros(idx.size, dtype=bool)
        for _ in range(8):
            if remaining.size == 0:
                break
            sub = idx[remaining]
            A = H[remaining] + mu[sub][:, None, None] * eye
            try:
                step = np.linalg.solve(A, -g[remaining][:, :, None])[:, :, 0]
            except np.linalg.LinAlgError:
                step = np.empty((remaining.size, d))
                for row in range(remaining.size):
                    try:
                        step[row] = np.linalg.lstsq(A[row], -g[remaining[row]], rcond=None)[0]
                    except np.linalg.LinAlgError:
                        step[row] = 0.0
            Un = U[sub] + step
            Rn = residual_fn(Un)
            cn = np.einsum("be,be->b", Rn, Rn)
            better = np.isfinite(cn) & (cn < cost[sub])
            take = sub[better]
            U[take] = Un[better]
            R[take] = Rn[better]
            cost[take] = cn[better]
            mu[take] = np.maximum(mu[take] * 0.35, 1e-12)
            accepted[remaining[better]] = True
            rejected = remaining[~better]
            mu[idx[rejected]] *= 8.0
            remaining = rejected
        stalled = ~accepted
        done = np.sqrt(cost[idx]) <= tol
        active[idx[done | stalled]] = False
    return U, np.sqrt(cost)


def _sobol_box(box: Sequence[Tuple[float, float]], n: int, seed: int, stream: int) -> np.ndarray:
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    if np.any(hi <= lo):
        raise ValueError("box bounds must satisfy lo < hi")
    sob = _sobol(len(box), seed, stream)
    n_pow2 = 1 << max(int(n) - 1, 0).bit_length()
    return (lo + sob.random(n_pow2) * (hi - lo))[:n]


def constrained_critical_points(
    rf: RestrictedFunction,
    box: Sequence[Tuple[float, float]],
    multistart_n: int = 400,
    seed: int = 0,
    tol: float = 1e-10,
    cluster_resolution: float = 1e-6,
    max_iter: int = 80,
    boundary_pass: bool = True,
    index_tol: float = 1e-8,
) -> CriticalPointResult:
    """Find critical points of the objective restricted to the constraint
    variety inside ``box`` by multistart damped Newton on the Lagrange system.

    Solutions are clustered at ``cluster_resolution``; points that violate an
    inequality constraint or sit on a rank-deficient part of the variety are
    discarded (counted in diagnostics).  For each survivor the Hessian of the
    Lagrangian is projected onto an orthonormal tangent basis; the Morse
    index is the number of negative eigenvalues.  An empty list is a valid
    result.
    """
    m = len(rf.objective.variables)
    if len(box) != m:
        raise ValueError(f"box must have {m} entries, got {len(box)}")
    sys_ = _KKTSystem(rf.objective, rf.constraints)
    ineq_evs = [BatchEvaluator(q) for q in rf.inequalities]
    diagnostics: Dict[str, object] = {
        "n_starts": multistart_n,
        "n_converged": 0,
        "n_box_rejected": 0,
        "n_inequality_rejected": 0,
        "n_rank_rejected": 0,
    }

    points = _solve_kkt(
        sys_, rf, box, multistart_n, seed, _STREAM_CRITICAL, tol, max_iter,
        cluster_resolution, ineq_evs, diagnostics, index_tol,
    )

    if boundary_pass and rf.inequalities:
        boundary = []
        for q in rf.inequalities:
            aug = RestrictedFunction(
                rf.objective,
                PolynomialMap(list(rf.constraints.components) + [q]),
                tuple(p for p in rf.inequalities if p is not q),
            )
            bsys = _KKTSystem(aug.objective, aug.constraints)
            bdiag: Dict[str, object] = {
                "n_starts": multistart_n,
                "n_converged": 0,
                "n_box_rejected": 0,
                "n_inequality_rejected": 0,
                "n_rank_rejected": 0,
            }
            bpts = _solve_kkt(
                bsys, aug, box, multistart_n, seed + 1, _STREAM_CRITICAL + 7, tol,
                max_iter, cluster_resolution,
                [BatchEvaluator(p) for p in aug.inequalities], bdiag, index_tol,
            )
            values = [float(BatchEvaluator(rf.objective)(p.location[None, :])[0]) for p in bpts]
            continuum = len(bpts) > max(24, multistart_n // 8) or (
                len(bpts) > 4 and np.std(values) < 1e-10
            )
            boundary.append(
                {
                    "constraint": str(q),
                    "n_points": len(bpts),
                    "objective_values": values[:16],
                    "continuum_suspected": bool(continuum),
                }
            )
        diagnostics["boundary_pass"] = boundary

    return CriticalPointResult(points=tuple(points), diagnostics=diagnostics)


def _solve_kkt(
    sys_: _KKTSystem,
    rf: RestrictedFunction,
    box,
    multistart_n,
    seed,
    stream,
    tol,
    max_iter,
    cluster_resolution,
    ineq_evs,
    diagnostics,
    index_tol,
):
    m, k = sys_.m, sys_.k
    X0 = _sobol_box(box, multistart_n, seed, stream)
    J0 = sys_.cons.jacobian(X0)
    grad0 = np.stack([g(X0) for g in sys_.grad_f], axis=1)
    G = np.einsum("bkm,bjm->bkj", J0, J0) + 1e-12 * np.eye(k)
    lam0 = np.linalg.solve(G, np.einsum("bkm,bm->bk", J0, grad0)[:, :, None])[:, :, 0]
    U0 = np.concatenate([X0, lam0], axis=1)

    U, rnorm = _levenberg_marquardt(sys_.residual, sys_.jacobian, U0, tol, max_iter)
    ok = rnorm <= tol
    diagnostics["n_converged"] = int(ok.sum())
    X, lam = U[ok, :m], U[ok, m:]

    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    inside = np.all((X >= lo - 1e-9) & (X <= hi + 1e-9), axis=1)
    diagnostics["n_box_rejected"] = int((~inside).sum())
    X, lam = X[inside], lam[inside]

    if ineq_evs and X.shape[0]:
        feas = np.ones(X.shape[0], dtype=bool)
        for ev in ineq_evs:
            feas &= ev(X) >= -1e-9
        diagnostics["n_inequality_rejected"] = int((~feas).sum())
        X, lam = X[feas], lam[feas]

    # cluster at the dedup resolution, keep the best KKT residual per cluster
    clusters: Dict[tuple, Tuple[np.ndarray, np.ndarray, float]] = {}
    if X.shape[0]:
        res_ok = np.linalg.norm(sys_.residual(np.concatenate([X, lam], axis=1)), axis=1)
        for x, l, r in zip(X, lam, res_ok):
            key = tuple(np.round(x / cluster_resolution).astype(np.int64))
            if key not in clusters or r < clusters[key][2]:
                clusters[key] = (x, l, float(r))
    diagnostics["n_clusters"] = len(clusters)

    points: List[CriticalPoint] = []
    n_rank_rejected = 0
    for key in sorted(clusters):
        x, l, r = clusters[key]
        Jc = sys_.cons.jacobian(x[None, :])[0]
        s = np.linalg.svd(Jc, compute_uv=False)
        if s[-1] <= RANK_RTOL * max(s[0], 1e-300):
            n_rank_rejected += 1
            continue
        Q, _ = np.linalg.qr(Jc.T, mode="complete")
        T = Q[:, k:]
        HL = sys_.lagrangian_hessian(x, l)
        P = T.T @ HL @ T
        eig = np.linalg.eigvalsh(0.5 * (P + P.T))
        scale = max(1.0, float(np.abs(eig).max()) if eig.size else 1.0)
        index = int((eig < -index_tol * scale).sum())
        cres = float(np.linalg.norm(sys_.cons.values(x[None, :])[0]))
        points.append(
            CriticalPoint(
                location=x,
                multipliers=l,
                eigenvalues=tuple(float(v) for v in eig),
                morse_index=index,
                kkt_residual=r,
                constraint_residual=cres,
                tangent_basis=T,
            )
        )
    diagnostics["n_rank_rejected"] = n_rank_rejected
    return points


# ----------------------------------------------------------------------
# no-singularity certification along an arc
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SingularityCandidate:
    arc_parameter: float
    point: np.ndarray
    residual: float


@dataclass(frozen=True)
class SingularityCertificate:
    """Evidence that a map restricted to an arc preimage has no singularity.

    Not a proof: multistart non-convergence (residuals bounded away from
    zero) plus exact no-multiple-root verdicts on supplied rational slices.
    """

    min_residual: float
    per_parameter: Tuple[Tuple[float, float], ...]  # (arc parameter, min residual)
    candidates: Tuple[SingularityCandidate, ...]
    exact_verdicts: Tuple[Tuple[str, bool], ...]  # (label, has_common_root)
    candidate_tol: float
    residual_floor: float

    @property
    def passed(self) -> bool:
        return (
            not self.candidates
            and self.min_residual > self.residual_floor
            and all(not bad for _, bad in self.exact_verdicts)
        )

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "min_residual": repr(self.min_residual),
            "per_parameter": [[s, repr(r)] for s, r in self.per_parameter],
            "candidates": [
                {
                    "arc_parameter": c.arc_parameter,
                    "point": [repr(float(v)) for v in c.point],
                    "residual": repr(c.residual),
                }
                for c in self.candidates
            ],
            "exact_verdicts": [[label, bad] for label, bad in self.exact_verdicts],
            "candidate_tol": self.candidate_tol,
            "residual_floor": self.residual_floor,
        }


class _RankDropSystem:
    """F(x) = t together with JF(x)^T w = 0 and ||w||^2 = 1.

    A zero of this system is a point where the Jacobian loses row rank over
    the target t, witnessed by the left null vector w.
    """

    def __init__(self, pmap: PolynomialMap):
        self.bm = BatchMap(pmap)
        self.m = pmap.m
        self.n = pmap.n
        self.hess = [_hessian_evaluators(c) for c in pmap.components]

    def dim(self) -> int:
        return self.m + self.n

    def residual(self, U: np.ndarray, target: np.ndarray) -> np.ndarray:
        X, W = U[:, : self.m], U[:, self.m :]
        vals = self.bm.values(X) - target[None, :]
        J = self.bm.jacobian(X)
        jtw = np.einsum("bnm,bn->bm", J, W)
        unit = np.einsum("bn,bn->b", W, W)[:, None] - 1.0
        return np.concatenate([vals, jtw, unit], axis=1)

    def jacobian(self, U: np.ndarray) -> np.ndarray:
        X, W = U[:, : self.m], U[:, self.m :]
        B = X.shape[0]
        m, n = self.m, self.n
        out = np.zeros((B, n + m + 1, m + n))
        J = self.bm.jacobian(X)
        out[:, :n, :m] = J
        acc = np.zeros((B, m, m))
        for i, h in enumerate(self.hess):
            acc += W[:, i, None, None] * _eval_hessians(h, X)
        out[:, n : n + m, :m] = acc
        out[:, n : n + m, m:] = J.transpose(0, 2, 1)
        out[:, n + m, m:] = 2.0 * W
        return out


def certify_no_singularity_on_arc(
    pmap: PolynomialMap,
    gamma: Callable[[float], Sequence[float]],
    parameter_grid: Sequence[float],
    box: Sequence[Tuple[float, float]],
    multistart_n: int = 2000,
    seed: int = 0,
    candidate_tol: float = 1e-8,
    residual_floor: float = 1e-4,
    max_iter: int = 60,
    exact_slices: Sequence[Tuple[str, UnivariatePolynomial]] = (),
    threads: Optional[int] = None,
) -> SingularityCertificate:
    """Search for singular points of ``pmap`` over each arc point gamma(s).

    For each grid parameter the rank-drop system is attacked by multistart
    damped Newton; the minimum residual achieved is evidence that no
    singularity exists (bounded away from zero) or a candidate when it drops
    below ``candidate_tol``.  ``exact_slices`` are labelled exact univariate
    polynomials checked for multiple roots (a common root of the slice and
    its derivative), reported alongside.
    """
    from ._tasks import task_map

    sys_ = _RankDropSystem(pmap)
    m, n = sys_.m, sys_.n

    def run_one(item):
        i, s = item
        target = np.asarray(gamma(s), dtype=float)
        X0 = _sobol_box(box, multistart_n, seed + 7919 * i, _STREAM_CERTIFY)
        W0 = _sobol_box([(-1.0, 1.0)] * n, multistart_n, seed + 7919 * i + 1, _STREAM_CERTIFY + 1)
        norms = np.linalg.norm(W0, axis=1)
        W0 = W0 / np.where(norms < 1e-9, 1.0, norms)[:, None]
        U0 = np.concatenate([X0, W0], axis=1)
        U, rnorm = _levenberg_marquardt(
            lambda V: sys_.residual(V, target), sys_.jacobian, U0, candidate_tol, max_iter
        )
        order = np.argsort(rnorm, kind="stable")
        best = float(rnorm[order[0]])
        cands = [
            SingularityCandidate(float(s), U[j, :m].copy(), float(rnorm[j]))
            for j in order[:8]
            if rnorm[j] < candidate_tol
        ]
        return best, cands

    results = task_map(run_one, list(enumerate(parameter_grid)), threads=threads)
    per_parameter = tuple(
        (float(s), res[0]) for s, res in zip(parameter_grid, results)
    )
    candidates = tuple(c for _, cands in results for c in cands)
    min_residual = min(r for _, r in per_parameter)

    verdicts = []
    for label, q in exact_slices:
        _, has_multiple = square_free_part(q)
        verdicts.append((label, bool(has_multiple)))

    return SingularityCertificate(
        min_residual=min_residual,
        per_parameter=per_parameter,
        candidates=candidates,
        exact_verdicts=tuple(verdicts),
        candidate_tol=candidate_tol,
        residual_floor=residual_floor,
    )
