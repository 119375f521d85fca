"""Checking that no inter-site segment is parallel to a segment of the unit sphere."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .norms import DirectionSet, face_decomposition, sphere_directions, unique_directions
from .scenes import Point, Scene

PARALLEL_TOL = 1e-12


@dataclass(frozen=True)
class Violation:
    """Points ``p`` of site ``j`` and ``q`` of site ``k`` whose segment is
    parallel to the sphere direction ``direction`` (0-based site indices)."""

    j: int
    k: int
    p: Point
    q: Point
    direction: Point


@dataclass(frozen=True)
class GPReport:
    holds: bool
    violations: tuple[Violation, ...] = field(default=())
    margin: float = math.inf

    def involving(self, k: int) -> tuple[Violation, ...]:
        return tuple(v for v in self.violations if k in (v.j, v.k))


def _pair_differences(scene: Scene, j: int, k: int):
    P, Q = scene.site_points(j), scene.site_points(k)
    ii, jj = np.meshgrid(np.arange(len(P)), np.arange(len(Q)), indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    return P[ii], Q[jj], Q[jj] - P[ii]


def pair_directions(norm, P, A, both_ways: bool = True) -> np.ndarray:
    """Gauge-normalized directions (a - p)/|a - p| for p in P, a in A.

    With ``both_ways`` the reversed directions (p - a)/|p - a| are included
    too, i.e. the direction set of the unordered pairs.
    """
    P = np.asarray(P, dtype=float).reshape(-1, 2)
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    diff = (A[None, :, :] - P[:, None, :]).reshape(-1, 2)
    g = norm.gauge(diff)
    if np.any(g == 0):
        raise ValidationError("P and A share a point")
    u = diff / g[:, None]
    return np.vstack([u, -u]) if both_ways else u


def site_pair_directions(scene: Scene, k: int | None = None) -> DirectionSet:
    """{±(q - p)/|q - p|} over points p, q of different sites.

    With ``k`` given, only pairs with one endpoint in site k are used (the
    directions generated by P_k and A_k).
    """
    chunks = []
    for j, i in itertools.combinations(range(scene.n_sites), 2):
        if k is not None and k not in (j, i):
            continue
        _, _, diff = _pair_differences(scene, j, i)
        g = scene.norm.gauge(diff)
        if np.any(g == 0):
            raise ValidationError(f"sites {j + 1} and {i + 1} share a point")
        u = diff / g[:, None]
        chunks.extend([u, -u])
    dirs = np.vstack(chunks) + 0.0
    return DirectionSet(unique_directions(dirs), exact=True)


def check_general_position(scene: Scene) -> GPReport:
    """Exact parallelism test against the sphere's flat faces, plus margin.

    A pair violates when its Euclidean-normalized direction has cross
    product at most 1e-12 with some flat face.  The margin is the smallest
    gauge distance between a pair direction and a sphere direction; it is
    reported as 0 whenever a violation exists, and +inf when the sphere
    contains no segment.
    """
    norm = scene.norm
    sphere = sphere_directions(norm)
    if len(sphere) == 0:
        return GPReport(True, (), math.inf)

    faces = face_decomposition(norm)
    flat_dirs = np.array([np.subtract(b, a) for a, b in faces.flats])
    flat_dirs /= np.hypot(flat_dirs[:, 0], flat_dirs[:, 1])[:, None]

    violations = []
    pair_dirs = []
    for j, k in itertools.combinations(range(scene.n_sites), 2):
        P, Q, diff = _pair_differences(scene, j, k)
        e = diff / np.hypot(diff[:, 0], diff[:, 1])[:, None]
        cross = e[:, None, 0] * flat_dirs[None, :, 1] - e[:, None, 1] * flat_dirs[None, :, 0]
        hit_pair, hit_flat = np.nonzero(np.abs(cross) <= PARALLEL_TOL)
        seen = set()
        for r, f in zip(hit_pair, hit_flat):
            if r in seen:
                continue
            seen.add(r)
            s = norm.normalize(flat_dirs[f])
            if np.dot(s, diff[r]) < 0:
                s = -s
            s = s + 0.0
            violations.append(
                Violation(
                    j, k,
                    (float(P[r, 0]), float(P[r, 1])),
                    (float(Q[r, 0]), float(Q[r, 1])),
                    (float(s[0]), float(s[1])),
                )
            )
        u = diff / norm.gauge(diff)[:, None]
        pair_dirs.extend([u, -u])

    phi = np.vstack(pair_dirs)
    S = sphere.directions
    margin = math.inf
    chunk = 4096
    for lo in range(0, len(phi), chunk):
        d = norm.gauge(phi[lo: lo + chunk, None, :] - S[None, :, :])
        margin = min(margin, float(d.min()))
    if violations:
        margin = 0.0
    return GPReport(not violations, tuple(violations), margin)
