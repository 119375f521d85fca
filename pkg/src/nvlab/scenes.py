"""The world box, site tuples, set distances and site perturbations."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import InputError, ValidationError
from .norms import NormKind, NormSpec

Point = tuple[float, float]

_KDTREE_P = {NormKind.L1: 1, NormKind.L2: 2, NormKind.LINF: np.inf}
_BRUTE_FORCE_LIMIT = 2_000_000


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle [lo_x, hi_x] x [lo_y, hi_y]."""

    lo: Point
    hi: Point

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 2 or len(hi) != 2:
            raise ValidationError("box must be two-dimensional")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ValidationError(f"degenerate box {lo} .. {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def width(self) -> float:
        return max(self.hi[0] - self.lo[0], self.hi[1] - self.lo[1])

    def corners(self) -> np.ndarray:
        (ax, ay), (bx, by) = self.lo, self.hi
        return np.array([[ax, ay], [bx, ay], [bx, by], [ax, by]])

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        return np.all((pts >= lo - tol) & (pts <= hi + tol), axis=-1)

    def diameter(self, norm: NormSpec) -> float:
        """Largest gauge distance between two points of the box."""
        c = self.corners()
        return float(np.max(norm.gauge(c[:, None, :] - c[None, :, :])))

    def exit_parameter(self, origins, thetas) -> np.ndarray:
        """Largest t with origin + t*theta still in the box (origins inside)."""
        origins = np.asarray(origins, dtype=float)
        thetas = np.asarray(thetas, dtype=float)
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            t_hi = np.where(thetas > 0, (hi - origins) / thetas, np.inf)
            t_lo = np.where(thetas < 0, (lo - origins) / thetas, np.inf)
        t = np.minimum(t_hi, t_lo).min(axis=-1)
        return np.maximum(t, 0.0)

    def clip_segment(self, origins, targets) -> np.ndarray:
        """Move each target back along [origin, target] until it is in the box."""
        origins = np.asarray(origins, dtype=float)
        targets = np.asarray(targets, dtype=float)
        step = targets - origins
        lo, hi = np.asarray(self.lo), np.asarray(self.hi)
        with np.errstate(divide="ignore", invalid="ignore"):
            s_hi = np.where(targets > hi, (hi - origins) / step, 1.0)
            s_lo = np.where(targets < lo, (lo - origins) / step, 1.0)
        s = np.clip(np.minimum(s_hi, s_lo).min(axis=-1), 0.0, 1.0)
        out = origins + s[:, None] * step
        return np.clip(out, lo, hi)


@dataclass(frozen=True)
class Site:
    """A compact site approximated by finitely many points."""

    points: tuple[Point, ...]

    def __post_init__(self):
        pts = tuple((float(p[0]), float(p[1])) for p in self.points)
        if not pts:
            raise ValidationError("a site needs at least one point")
        if any(len(p) != 2 for p in self.points):
            raise ValidationError("site points must be two-dimensional")
        object.__setattr__(self, "points", pts)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.points, dtype=float)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class Scene:
    """World box, norm and an ordered tuple of sites.

    ``centers`` lists (0-based) indices of sites that stay fixed under the
    deterministic "shift" perturbation mode; every other site point moves
    toward its nearest center.
    """

    box: Box
    norm: NormSpec
    sites: tuple[Site, ...]
    label: str = ""
    centers: tuple[int, ...] = ()
    _pts: np.ndarray = field(default=None, init=False, repr=False, compare=False)
    _owner: np.ndarray = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(self.sites))
        object.__setattr__(self, "centers", tuple(int(c) for c in self.centers))
        if self.norm.dim != 2:
            raise ValidationError("scenes are planar; the norm must act on R^2")
        if len(self.sites) < 2:
            raise ValidationError("a scene needs at least two sites")
        for c in self.centers:
            if not 0 <= c < len(self.sites):
                raise ValidationError(f"center index {c} out of range")
        pts = np.vstack([s.array for s in self.sites])
        owner = np.concatenate([np.full(len(s), k) for k, s in enumerate(self.sites)])
        inside = self.box.contains(pts)
        if not np.all(inside):
            bad = pts[~inside][0]
            raise ValidationError(
                f"site point ({bad[0]:g}, {bad[1]:g}) lies outside the box"
            )
        seen: dict[Point, int] = {}
        for k, s in enumerate(self.sites):
            for p in set(s.points):
                if p in seen and seen[p] != k:
                    raise ValidationError(
                        f"sites {seen[p] + 1} and {k + 1} share the point {p}"
                    )
                seen[p] = k
        object.__setattr__(self, "_pts", pts)
        object.__setattr__(self, "_owner", owner)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    @property
    def all_points(self) -> np.ndarray:
        return self._pts

    @property
    def point_owner(self) -> np.ndarray:
        return self._owner

    def site_points(self, k: int) -> np.ndarray:
        self._check_index(k)
        return self._pts[self._owner == k]

    def competitors(self, k: int) -> np.ndarray:
        """Points of A_k, the union of all sites other than k."""
        self._check_index(k)
        return self._pts[self._owner != k]

    @property
    def diameter(self) -> float:
        return self.box.diameter(self.norm)

    @property
    def eq_slack(self) -> float:
        """Absolute slack for distance comparisons (absorbs rounding only)."""
        return 1e-12 * max(1.0, self.diameter)

    def _check_index(self, k: int) -> None:
        if not isinstance(k, (int, np.integer)) or not 0 <= k < len(self.sites):
            raise InputError(f"site index {k!r} out of range 0..{len(self.sites) - 1}")

    def with_sites(self, sites: Sequence[Site], label: str | None = None) -> Scene:
        return replace(self, sites=tuple(sites), label=self.label if label is None else label)

    def scaled(self, s: float) -> Scene:
        """Scale box and sites about the origin by s > 0."""
        box = Box(tuple(s * v for v in self.box.lo), tuple(s * v for v in self.box.hi))
        sites = [Site([(s * x, s * y) for x, y in site.points]) for site in self.sites]
        return replace(self, box=box, sites=tuple(sites))


def load_scene(text: str) -> Scene:
    """Parse and validate scene-file text."""
    from .sceneio import parse_scene

    return parse_scene(text)


# -- distances ---------------------------------------------------------------


def pairwise_gauge(norm: NormSpec, X, Y) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return norm.gauge(X[:, None, :] - Y[None, :, :])


def nearest_gauge(norm: NormSpec, queries, targets) -> tuple[np.ndarray, np.ndarray]:
    """Gauge distance from every query to the nearest target and its index.

    Ties resolve to the lowest target index.  Small problems are brute
    forced; larger ones use a k-d tree (native Minkowski p for l1/l2/linf,
    Euclidean candidate search with norm-equivalence bounds for polytopes).
    """
    Q = np.asarray(queries, dtype=float).reshape(-1, 2)
    S = np.asarray(targets, dtype=float).reshape(-1, 2)
    if len(S) == 0:
        return np.full(len(Q), np.inf), np.full(len(Q), -1)
    if len(Q) * len(S) <= _BRUTE_FORCE_LIMIT or len(S) <= 32:
        return _nearest_brute(norm, Q, S)
    tree = cKDTree(S)
    if norm.kind in _KDTREE_P:
        d, idx = tree.query(Q, k=1, p=_KDTREE_P[norm.kind])
        return d, idx
    return _nearest_polytope(norm, tree, Q, S)


def _nearest_brute(norm, Q, S):
    out_d = np.empty(len(Q))
    out_i = np.empty(len(Q), dtype=int)
    chunk = max(1, _BRUTE_FORCE_LIMIT // max(1, len(S)))
    for lo in range(0, len(Q), chunk):
        D = pairwise_gauge(norm, Q[lo: lo + chunk], S)
        i = np.argmin(D, axis=1)
        out_i[lo: lo + chunk] = i
        out_d[lo: lo + chunk] = D[np.arange(len(i)), i]
    return out_d, out_i


def _nearest_polytope(norm, tree, Q, S):
    c, C = norm.euclidean_bounds()
    k = min(16, len(S))
    d2, idx = tree.query(Q, k=k)
    cand = norm.gauge(Q[:, None, :] - S[idx])
    j = np.argmin(cand, axis=1)
    rows = np.arange(len(Q))
    best = cand[rows, j]
    best_i = idx[rows, j]
    # any point closer in gauge lies within Euclidean radius best / c
    unsure = np.nonzero(d2[:, -1] < best / c)[0]
    for r in unsure:
        near = tree.query_ball_point(Q[r], best[r] / c + 1e-12)
        near = np.asarray(sorted(near))
        g = norm.gauge(Q[r] - S[near])
        m = int(np.argmin(g))
        best[r], best_i[r] = g[m], near[m]
    return best, best_i


def set_distance(norm: NormSpec, X, A) -> np.ndarray:
    """d(x, A) for every row x of X."""
    return nearest_gauge(norm, X, A)[0]


def site_distance(scene: Scene, x, k: int) -> tuple[float, Point]:
    """Distance from x to site k and the attaining site point."""
    pts = scene.site_points(k)
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise InputError("x must be a planar point")
    g = scene.norm.gauge(pts - x)
    i = int(np.argmin(g))
    return float(g[i]), (float(pts[i, 0]), float(pts[i, 1]))


def distance_field(scene: Scene, X) -> np.ndarray:
    """Matrix of d(x, P_j): one row per query point, one column per site."""
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    out = np.empty((len(X), scene.n_sites))
    for j in range(scene.n_sites):
        out[:, j] = set_distance(scene.norm, X, scene.site_points(j))
    return out


def dominance_gap(scene: Scene, k: int, X) -> np.ndarray:
    """f(x) = d(x, P_k) - d(x, A_k); the cell of k is {f <= 0}."""
    X = np.asarray(X, dtype=float).reshape(-1, 2)
    dk = set_distance(scene.norm, X, scene.site_points(k))
    da = set_distance(scene.norm, X, scene.competitors(k))
    return dk - da


@dataclass(frozen=True)
class HausdorffReport:
    """Hausdorff distance with the two directed witnesses.

    ``witness_ab`` = (a, b): the point of A farthest from B and its nearest
    point in B; ``witness_ba`` symmetrically.  ``sampling_error`` is set
    when the sets are discretizations of continuous regions.
    """

    value: float
    witness_ab: tuple[Point, Point] | None
    witness_ba: tuple[Point, Point] | None
    directed_ab: float = math.nan
    directed_ba: float = math.nan
    sampling_error: float = 0.0

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)


def _directed(norm, A, B):
    d, idx = nearest_gauge(norm, A, B)
    i = int(np.argmax(d))
    a, b = A[i], B[idx[i]]
    return float(d[i]), ((float(a[0]), float(a[1])), (float(b[0]), float(b[1])))


def hausdorff(norm: NormSpec, A, B, sampling_error: float = 0.0) -> HausdorffReport:
    """Exact Hausdorff distance between two finite point sets.

    An empty set is at infinite distance from any nonempty one; two empty
    sets are at distance 0.
    """
    A = np.asarray(A, dtype=float).reshape(-1, 2)
    B = np.asarray(B, dtype=float).reshape(-1, 2)
    if len(A) == 0 or len(B) == 0:
        value = 0.0 if len(A) == len(B) == 0 else math.inf
        return HausdorffReport(value, None, None, value, value, sampling_error)
    dab, wab = _directed(norm, A, B)
    dba, wba = _directed(norm, B, A)
    return HausdorffReport(max(dab, dba), wab, wba, dab, dba, sampling_error)


def min_pairwise_site_distance(scene: Scene) -> float:
    """eta: the smallest distance between points of two different sites."""
    best = math.inf
    for j, k in itertools.combinations(range(scene.n_sites), 2):
        D = pairwise_gauge(scene.norm, scene.site_points(j), scene.site_points(k))
        best = min(best, float(D.min()))
    return best


# -- perturbations -----------------------------------------------------------


def random_unit_directions(norm: NormSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    ang = rng.uniform(0.0, 2 * np.pi, n)
    return norm.normalize(np.column_stack([np.cos(ang), np.sin(ang)]))


def perturb_scene(scene: Scene, delta: float, seed: int = 0, mode: str = "random") -> Scene:
    """Move every site point by less than ``delta`` (in the scene's norm).

    ``random``: each point gets an independent displacement of uniformly
    random direction and gauge ``delta * u`` with u ~ U[0, 1).  Points that
    would leave the box are pulled back along their displacement, which
    keeps the displacement bound for any norm.

    ``shift``: every point of a non-center site shifts its first coordinate
    by ``delta`` toward its nearest center point (see ``Scene.centers``).
    This displacement has gauge ``delta * |e_1|``, which equals ``delta``
    for l1/l2/linf.  ``seed`` is ignored.
    """
    if not delta > 0:
        raise InputError(f"delta must be positive, got {delta}")
    pts = scene.all_points
    if mode == "random":
        rng = np.random.default_rng(seed)
        dirs = random_unit_directions(scene.norm, len(pts), rng)
        radius = delta * rng.random(len(pts))
        moved = scene.box.clip_segment(pts, pts + radius[:, None] * dirs)
    elif mode == "shift":
        moved = _center_shift(scene, delta)
    else:
        raise InputError(f"unknown perturbation mode {mode!r}")
    sites = []
    for k in range(scene.n_sites):
        sites.append(Site([tuple(p) for p in moved[scene.point_owner == k]]))
    return scene.with_sites(sites)


def _center_shift(scene: Scene, beta: float) -> np.ndarray:
    if not scene.centers:
        raise InputError("shift perturbation mode needs a scene with center sites")
    pts = scene.all_points.copy()
    center_pts = np.vstack([scene.site_points(c) for c in scene.centers])
    movable = ~np.isin(scene.point_owner, scene.centers)
    idx = np.nonzero(movable)[0]
    _, nearest = _nearest_brute(scene.norm, pts[idx], center_pts)
    dx = center_pts[nearest, 0] - pts[idx, 0]
    pts[idx, 0] += beta * np.sign(dx)
    return np.clip(pts, scene.box.lo, scene.box.hi)
