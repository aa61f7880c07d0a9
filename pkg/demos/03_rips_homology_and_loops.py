"""Vietoris-Rips homology over Z/2 and the loop-bounding test.

Betti numbers come from union-find (b0) and boundary-matrix reduction (b1)
at an automatically selected scale; the loop test decides whether a given
vertex cycle is a Z/2 boundary, which is the computational stand-in for
"this circle bounds a disk in the sampled space".
"""
import numpy as np

from fiber_atlas import betti_summary, loop_is_boundary, persistence_pairs, select_scale

rng = np.random.default_rng(0)


def annulus(n):
    theta = rng.uniform(0, 2 * np.pi, n)
    rr = np.sqrt(rng.uniform(1.0, 4.0, n))
    return np.c_[rr * np.cos(theta), rr * np.sin(theta)]


def sphere(n):
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1)[:, None]


ann = annulus(5000)
from fiber_atlas import farthest_point_subsample

ann = ann[farthest_point_subsample(ann, 900)]
s = betti_summary(ann)
print(f"annulus: b0={s.b0} b1={s.b1} euler={s.euler} at scale {s.scale:.3f}")

t = np.linspace(0, 2 * np.pi, 60, endpoint=False)
core = 1.5 * np.c_[np.cos(t), np.sin(t)]
print("core circle bounds on the annulus:", loop_is_boundary(ann, core, s.scale))

sp = sphere(5000)
sp = sp[farthest_point_subsample(sp, 900)]
eq = np.c_[np.cos(t), np.sin(t), 0 * t]
print("equator bounds on the sphere:", loop_is_boundary(sp, eq, select_scale(sp)))

pairs = persistence_pairs(ann, s.scale)
essential = [p for p in pairs if p[2] == float("inf")]
print("essential classes (dim, birth):", [(d, round(b, 3)) for d, b, _ in essential])
