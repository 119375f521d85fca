"""Voronoi cells as bundles of rays shot from the site points.

For a site point p and a gauge-unit direction theta, the ray length

    T(theta, p) = sup{t >= 0 : p + t theta in X and d(p + t theta, p) <= d(p + t theta, A)}

is found by bisection: the feasibility predicate is downward closed in t
(if y is feasible then every x on [p, y] is, by the triangle inequality).
The cell of P is the union over p of the segments [p, p + T theta].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._parallel import pmap
from .errors import ConsistencyError, InputError, PreconditionError
from .general_position import site_pair_directions
from .norms import NormSpec, sphere_directions
from .scenes import Box, HausdorffReport, Scene, hausdorff, set_distance

DEFAULT_TOL = 1e-7
ANGLE_MERGE = 1e-12
COVERAGE_GRID = 200


# -- directions -------------------------------------------------------------


def _angles(dirs: np.ndarray) -> np.ndarray:
    return np.arctan2(dirs[:, 1] + 0.0, dirs[:, 0] + 0.0)


def uniform_directions(norm: NormSpec, n: int) -> np.ndarray:
    ang = 2 * np.pi * np.arange(n) / n
    d = np.column_stack([np.cos(ang), np.sin(ang)])
    d[np.abs(d) < 1e-15] = 0.0
    return norm.normalize(d)


def cell_directions(scene: Scene, n_dirs: int) -> np.ndarray:
    """Ray directions for a cell, sorted by angle in (-pi, pi].

    Uniform angles are augmented with the sphere directions and the
    inter-site pair directions; zero-width spikes of cells lie along the
    latter and are missed by uniform sampling.  When two candidates agree
    to 1e-12 in angle the exact (augmenting) one is kept.
    """
    norm = scene.norm
    exact = [sphere_directions(norm).directions, site_pair_directions(scene).directions]
    exact = np.vstack([e for e in exact if len(e)]) if any(len(e) for e in exact) else np.empty((0, 2))
    uniform = uniform_directions(norm, n_dirs)
    dirs = np.vstack([exact, uniform]) + 0.0
    priority = np.concatenate([np.zeros(len(exact), int), np.ones(len(uniform), int)])
    ang = _angles(dirs)
    order = np.lexsort((priority, ang))
    dirs, ang = dirs[order], ang[order]
    keep = np.ones(len(dirs), bool)
    # sorted by (angle, priority): first of every cluster is the preferred one
    cluster_start = np.concatenate([[True], np.diff(ang) > ANGLE_MERGE])
    keep &= cluster_start
    if len(ang) > 1 and ang[-1] - ang[0] > 2 * np.pi - ANGLE_MERGE:
        # the wrap-around cluster near -pi / +pi
        last = np.nonzero(cluster_start)[0][-1]
        keep[last] = False
    return dirs[keep]


# -- ray shooting -----------------------------------------------------------


def _feasible(scene: Scene, origins, thetas, t, competitors) -> np.ndarray:
    x = origins + t[:, None] * thetas
    dp = scene.norm.gauge(x - origins)
    da = set_distance(scene.norm, x, competitors)
    return dp <= da + scene.eq_slack


def shoot_rays(scene: Scene, k: int, origins, thetas, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Vectorized T(theta, p) for arrays of site points of P_k and directions."""
    if not tol > 0:
        raise InputError(f"tol must be positive, got {tol}")
    origins = np.asarray(origins, dtype=float).reshape(-1, 2)
    thetas = np.asarray(thetas, dtype=float).reshape(-1, 2)
    origins = np.broadcast_to(origins, thetas.shape).copy() if len(origins) == 1 else origins
    A = scene.competitors(k)
    t_box = scene.box.exit_parameter(origins, thetas)
    whole = _feasible(scene, origins, thetas, t_box, A)
    lo = np.zeros(len(thetas))
    hi = t_box.copy()
    t_max = float(t_box.max()) if len(t_box) else 0.0
    n_iter = max(1, math.ceil(math.log2(max(t_max, tol) / tol)))
    active = ~whole
    for _ in range(n_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        mid = 0.5 * (lo[idx] + hi[idx])
        ok = _feasible(scene, origins[idx], thetas[idx], mid, A)
        lo[idx] = np.where(ok, mid, lo[idx])
        hi[idx] = np.where(ok, hi[idx], mid)
        active[idx] = (hi[idx] - lo[idx]) > tol
    return np.where(whole, t_box, lo)


def shoot_ray(scene: Scene, k: int, p, theta, tol: float = DEFAULT_TOL) -> float:
    """Length of the ray from site point p of P_k in direction theta."""
    p = np.asarray(p, dtype=float)
    theta = np.asarray(theta, dtype=float)
    P = scene.site_points(k)
    if not np.any(np.all(P == p, axis=1)):
        raise InputError(f"{tuple(p)} is not a point of site {k}")
    if abs(scene.norm.gauge(theta) - 1.0) > 1e-9:
        raise InputError("theta must have gauge 1")
    return float(shoot_rays(scene, k, p[None], theta[None], tol)[0])


# -- cells ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class RayBundle:
    """Rays from one site point, sorted counterclockwise by angle."""

    point: np.ndarray
    thetas: np.ndarray
    lengths: np.ndarray

    @property
    def angles(self) -> np.ndarray:
        return _angles(self.thetas)

    @property
    def endpoints(self) -> np.ndarray:
        return self.point + self.lengths[:, None] * self.thetas


@dataclass(frozen=True, eq=False)
class Cell:
    site_index: int
    box: Box
    bundles: tuple[RayBundle, ...]
    n_dirs: int
    tol: float

    @property
    def max_length(self) -> float:
        return max(float(b.lengths.max()) for b in self.bundles)

    def endpoints(self) -> np.ndarray:
        return np.vstack([b.endpoints for b in self.bundles])

    def rows(self):
        """(px, py, theta_x, theta_y, T) for every ray."""
        for b in self.bundles:
            for th, T in zip(b.thetas, b.lengths):
                yield float(b.point[0]), float(b.point[1]), float(th[0]), float(th[1]), float(T)

    def contains(self, X, slack: float = 1e-9) -> np.ndarray:
        """Membership in the union of the fans (p, e_i, e_{i+1}) of every bundle."""
        X = np.asarray(X, dtype=float).reshape(-1, 2)
        inside = np.zeros(len(X), bool)
        for b in self.bundles:
            inside |= _fan_contains(b, X, slack)
        return inside

    def point_cloud(self, density: float) -> np.ndarray:
        return cell_point_cloud(self, density)


def _fan_contains(b: RayBundle, X: np.ndarray, slack: float) -> np.ndarray:
    ang = b.angles
    n = len(ang)
    V = X - b.point
    phi = np.arctan2(V[:, 1], V[:, 0])
    i = (np.searchsorted(ang, phi, side="right") - 1) % n
    j = (i + 1) % n
    E = b.endpoints
    ei, ej = E[i], E[j]
    edge = ej - ei
    rel = X - ei
    cross = edge[:, 0] * rel[:, 1] - edge[:, 1] * rel[:, 0]
    length = np.hypot(edge[:, 0], edge[:, 1])
    at_origin = np.hypot(V[:, 0], V[:, 1]) <= slack
    return (cross >= -slack * np.maximum(length, 1.0)) | at_origin


def compute_cell(scene: Scene, k: int, n_dirs: int = 512, tol: float = DEFAULT_TOL) -> Cell:
    """Ray-bundle representation of the Voronoi cell of site k."""
    if n_dirs < 16:
        raise PreconditionError(f"n_dirs must be >= 16, got {n_dirs}")
    dirs = cell_directions(scene, n_dirs)
    bundles = []
    for p in scene.site_points(k):
        T = shoot_rays(scene, k, p[None], dirs, tol)
        bundles.append(RayBundle(p.copy(), dirs, T))
    return Cell(k, scene.box, tuple(bundles), n_dirs, tol)


@dataclass(frozen=True, eq=False)
class Diagram:
    scene: Scene
    cells: tuple[Cell, ...]

    def __getitem__(self, k: int) -> Cell:
        return self.cells[k]

    def __len__(self) -> int:
        return len(self.cells)


def grid_points(box: Box, resolution: int, centers: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Axis coordinates of a resolution x resolution grid over the box."""
    (ax, ay), (bx, by) = box.lo, box.hi
    if centers:
        xs = ax + (np.arange(resolution) + 0.5) * (bx - ax) / resolution
        ys = ay + (np.arange(resolution) + 0.5) * (by - ay) / resolution
    else:
        xs = np.linspace(ax, bx, resolution)
        ys = np.linspace(ay, by, resolution)
    return xs, ys


def _mesh(xs, ys) -> np.ndarray:
    gx, gy = np.meshgrid(xs, ys)
    return np.column_stack([gx.ravel(), gy.ravel()])


def _radial_deficit(b: RayBundle, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Euclidean distance by which X lies outside the fan, and the chord length."""
    ang = b.angles
    n = len(ang)
    V = X - b.point
    phi = np.arctan2(V[:, 1], V[:, 0])
    i = (np.searchsorted(ang, phi, side="right") - 1) % n
    j = (i + 1) % n
    E = b.endpoints
    ei, ej = E[i], E[j]
    edge = ej - ei
    length = np.maximum(np.hypot(edge[:, 0], edge[:, 1]), 1e-300)
    rel = X - ei
    cross = edge[:, 0] * rel[:, 1] - edge[:, 1] * rel[:, 0]
    return np.maximum(-cross / length, 0.0), length


def coverage_failures(diagram: Diagram, resolution: int = COVERAGE_GRID) -> np.ndarray:
    """Grid points not covered by any cell, up to the local sampling chord.

    A point outside every fan is accepted when it lies within one chord
    length (the gap between neighbouring ray endpoints) of some fan, or
    within the bisection tolerance.
    """
    xs, ys = grid_points(diagram.scene.box, resolution)
    X = _mesh(xs, ys)
    covered = np.zeros(len(X), bool)
    for c in diagram.cells:
        covered |= c.contains(X)
    rest = np.nonzero(~covered)[0]
    if len(rest) == 0:
        return np.empty((0, 2))
    Y = X[rest]
    ok = np.zeros(len(Y), bool)
    for c in diagram.cells:
        for b in c.bundles:
            deficit, chord = _radial_deficit(b, Y)
            ok |= deficit <= np.maximum(chord, c.tol)
    return Y[~ok]


def compute_diagram(
    scene: Scene,
    n_dirs: int = 512,
    tol: float = DEFAULT_TOL,
    check_coverage: bool = True,
) -> Diagram:
    """All cells of the scene; verifies that they cover a 200 x 200 grid."""
    cells = pmap(lambda k: compute_cell(scene, k, n_dirs, tol), range(scene.n_sites))
    diagram = Diagram(scene, tuple(cells))
    if check_coverage:
        bad = coverage_failures(diagram)
        if len(bad):
            x, y = bad[0]
            raise ConsistencyError(
                f"{len(bad)} grid points are covered by no cell, e.g. ({x:.6g}, {y:.6g})"
            )
    return diagram


def cells_of(scene: Scene, ks, n_dirs: int = 512, tol: float = DEFAULT_TOL) -> dict[int, Cell]:
    ks = list(ks)
    return dict(zip(ks, pmap(lambda k: compute_cell(scene, k, n_dirs, tol), ks)))


# -- discretization and Hausdorff distance ------------------------------------


def _sample_segments(starts: np.ndarray, ends: np.ndarray, lengths: np.ndarray, density: float,
                     include_start: bool) -> np.ndarray:
    counts = np.floor(lengths * density).astype(int) + 1
    seg = np.repeat(np.arange(len(starts)), counts)
    offs = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    frac = np.where(lengths[seg] > 0, offs / density / np.where(lengths[seg] > 0, lengths[seg], 1.0), 0.0)
    pts = starts[seg] + frac[:, None] * (ends[seg] - starts[seg])
    if not include_start:
        pts = pts[offs > 0]
    return pts


def cell_point_cloud(cell: Cell, density: float) -> np.ndarray:
    """Discretize a cell: ray samples every 1/density, endpoints, and chords.

    The chords between consecutive ray endpoints (the outline of each fan)
    are sampled at the same spacing so that two nearby cells have nearby
    outlines even where individual rays change length.
    """
    if not density > 0:
        raise InputError("density must be positive")
    parts = []
    for b in cell.bundles:
        E = b.endpoints
        n = len(E)
        starts = np.broadcast_to(b.point, E.shape)
        parts.append(_sample_segments(starts, E, b.lengths, density, include_start=True))
        parts.append(E)
        nxt = np.roll(E, -1, axis=0)
        chord = np.hypot(*(nxt - E).T)
        parts.append(_sample_segments(E, nxt, chord, density, include_start=False))
    return np.vstack(parts)


def cloud_gap(cell: Cell) -> float:
    """Largest Euclidean gap between neighbouring ray endpoints."""
    gaps = []
    for b in cell.bundles:
        E = b.endpoints
        gaps.append(np.hypot(*(np.roll(E, -1, axis=0) - E).T).max())
    return float(max(gaps))


def cell_hausdorff(norm: NormSpec, c1: Cell, c2: Cell, density: float = 8) -> HausdorffReport:
    """Hausdorff distance between discretized cells.

    ``sampling_error`` is the spacing 1/density of the samples along rays and
    outlines; it bounds the discretization error of each cloud relative to
    its own fan polygon.
    """
    if c1.box != c2.box:
        raise InputError("cells live in different boxes")
    A = cell_point_cloud(c1, density)
    B = cell_point_cloud(c2, density)
    _, C = norm.euclidean_bounds()
    return hausdorff(norm, A, B, sampling_error=C / density)


# -- bisectors ------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BisectorSample:
    site_index: int
    points: np.ndarray
    grid_step: float

    @property
    def empty(self) -> bool:
        return len(self.points) == 0


def _gap(scene: Scene, k: int, X: np.ndarray) -> np.ndarray:
    dk = set_distance(scene.norm, X, scene.site_points(k))
    da = set_distance(scene.norm, X, scene.competitors(k))
    return dk - da


def extract_bisector(scene: Scene, k: int, resolution: int = 256, tol: float = 1e-9) -> BisectorSample:
    """Sample {x : d(x, P_k) = d(x, A_k)} on a grid of nodes.

    Nodes where the gap vanishes (up to rounding) are kept as they are, so
    a bisector with interior shows up as a 2D cloud.  Every grid edge whose
    endpoints have strictly opposite signs is refined by bisection to
    ``tol``.
    """
    if resolution < 64:
        raise PreconditionError(f"resolution must be >= 64, got {resolution}")
    scene._check_index(k)
    xs, ys = grid_points(scene.box, resolution, centers=False)
    X = _mesh(xs, ys)
    f = _gap(scene, k, X).reshape(resolution, resolution)
    eq = scene.eq_slack
    s = np.where(f < -eq, -1, np.where(f > eq, 1, 0))

    parts = [X[(s == 0).ravel()]]
    starts, ends = [], []
    G = X.reshape(resolution, resolution, 2)
    h = s[:, :-1] * s[:, 1:] < 0
    starts.append(G[:, :-1][h]); ends.append(G[:, 1:][h])
    v = s[:-1, :] * s[1:, :] < 0
    starts.append(G[:-1, :][v]); ends.append(G[1:, :][v])
    a = np.vstack(starts)
    b = np.vstack(ends)
    if len(a):
        fa = _gap(scene, k, a)
        lo = np.zeros(len(a))
        hi = np.ones(len(a))
        step = float(np.max(np.hypot(*(b - a).T)))
        n_iter = max(1, math.ceil(math.log2(step / tol)))
        for _ in range(n_iter):
            mid = 0.5 * (lo + hi)
            fm = _gap(scene, k, a + mid[:, None] * (b - a))
            same = np.sign(fm) == np.sign(fa)
            lo = np.where(same, mid, lo)
            hi = np.where(same, hi, mid)
        t = 0.5 * (lo + hi)
        parts.append(a + t[:, None] * (b - a))
    step = (scene.box.hi[0] - scene.box.lo[0]) / (resolution - 1)
    return BisectorSample(k, np.vstack(parts), step)


# -- lambda ----------------------------------------------------------------------


@dataclass(frozen=True)
class LambdaEstimate:
    epsilon: float
    lambda_tilde: float
    lam: float
    sample_count: int
    witness_x: tuple[float, float] | None = None
    witness_p: tuple[float, float] | None = None


def estimate_lambda(
    scene: Scene,
    k: int,
    epsilon: float,
    n_samples: int = 10_000,
    seed: int = 0,
    n_dirs: int = 256,
    tol: float = 1e-9,
) -> LambdaEstimate:
    """Sampled infimum of d(x, A_k) - d(x, p) over the pairs (x, p) where
    x sits on [p, y] at distance epsilon/2 before a cell point y.

    Along a ray the gap can only shrink as y moves outward, so half of the
    samples take y at ray endpoints (random directions plus the fixed
    augmented direction set) and half take y uniformly along random rays.
    Requires 0 < epsilon <= d(P_k, A_k) / 2.
    """
    P = scene.site_points(k)
    A = scene.competitors(k)
    d_pa = float(set_distance(scene.norm, P, A).min())
    if not 0 < epsilon <= d_pa / 2:
        raise PreconditionError(
            f"epsilon must lie in (0, d(P_k, A_k)/2] = (0, {d_pa / 2:g}], got {epsilon}"
        )
    rng = np.random.default_rng(seed)
    norm = scene.norm
    fixed = cell_directions(scene, n_dirs)
    n_rand = max(0, n_samples - len(fixed) * len(P))
    ang = rng.uniform(0, 2 * np.pi, n_rand)
    rand_dirs = norm.normalize(np.column_stack([np.cos(ang), np.sin(ang)]))
    origins = np.vstack([np.repeat(P, len(fixed), axis=0), P[rng.integers(0, len(P), n_rand)]])
    thetas = np.vstack([np.tile(fixed, (len(P), 1)), rand_dirs])
    T = shoot_rays(scene, k, origins, thetas, tol)

    half = epsilon / 2
    # boundary-biased: fixed directions and half the random ones end at T
    u = np.ones(len(T))
    n_fixed = len(fixed) * len(P)
    along = np.arange(len(T)) >= n_fixed + n_rand // 2
    u[along] = rng.random(int(along.sum()))
    y_t = half + u * (T - half)
    ok = T >= half
    x = origins[ok] + (y_t[ok] - half)[:, None] * thetas[ok]
    p = origins[ok]
    gap = set_distance(norm, x, A) - norm.gauge(x - p)
    i = int(np.argmin(gap))
    lam_tilde = float(gap[i])
    return LambdaEstimate(
        epsilon, lam_tilde, min(epsilon / 2, lam_tilde), int(ok.sum()),
        (float(x[i, 0]), float(x[i, 1])), (float(p[i, 0]), float(p[i, 1])),
    )
