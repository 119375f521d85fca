"""Norms on R^m: gauge evaluation, unit-sphere faces and sphere directions.

Four kinds are supported.  ``l1``, ``l2`` and ``linf`` are evaluated in
closed form in any dimension m >= 2.  ``polytope`` is the Minkowski
functional of a centrally symmetric convex polygon in the plane, given by
its vertices in counterclockwise order.

In the plane, ``l1`` and ``linf`` are themselves polygonal norms (rhombus and
square unit balls), so their face structure is handled by the same polygon
machinery as user polytopes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InputError, ValidationError

SYMMETRY_TOL = 1e-9
SPHERE_TOL = 1e-9
N_SEGMENT_SAMPLES = 64


class NormKind(str, Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"
    POLYTOPE = "polytope"


_L1_VERTICES = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))
_LINF_VERTICES = ((1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0))


def _edge_normals(verts: np.ndarray) -> np.ndarray:
    """Facet functionals n_i with n_i . v = 1 on edge i of the polygon."""
    n = len(verts)
    normals = np.empty_like(verts)
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        mat = np.array([a, b])
        normals[i] = np.linalg.solve(mat, np.ones(2))
    return normals


def _validate_polygon(verts: np.ndarray) -> None:
    n = len(verts)
    if verts.ndim != 2 or verts.shape[1] != 2:
        raise ValidationError("polytope vertices must be points in R^2")
    if n < 4 or n % 2:
        raise ValidationError(
            f"polytope needs an even number (>= 4) of vertices, got {n}"
        )
    half = n // 2
    if np.max(np.abs(verts[half:] + verts[:half])) > SYMMETRY_TOL:
        raise ValidationError(
            "polytope is not centrally symmetric (v[i + n/2] != -v[i])"
        )
    edges = np.roll(verts, -1, axis=0) - verts
    nxt = np.roll(edges, -1, axis=0)
    cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    if np.any(cross <= SYMMETRY_TOL):
        raise ValidationError(
            "polytope vertices must form a strictly convex counterclockwise polygon"
        )
    # origin strictly inside: every edge sees it on its left
    side = edges[:, 0] * (-verts[:, 1]) - edges[:, 1] * (-verts[:, 0])
    if np.any(side <= SYMMETRY_TOL):
        raise ValidationError("origin is not strictly inside the polytope")


@dataclass(frozen=True)
class NormSpec:
    """A norm on R^m.

    Use the constructors :meth:`l1`, :meth:`l2`, :meth:`linf`,
    :meth:`polytope` and :meth:`regular_polygon` rather than the raw
    initializer.
    """

    kind: NormKind
    dim: int = 2
    vertices: tuple[tuple[float, float], ...] | None = None
    _normals: np.ndarray | None = field(
        default=None, init=False, repr=False, compare=False
    )

    def __post_init__(self):
        object.__setattr__(self, "kind", NormKind(self.kind))
        if self.dim < 2:
            raise ValidationError(f"dimension must be >= 2, got {self.dim}")
        if self.kind is NormKind.POLYTOPE:
            if self.vertices is None:
                raise ValidationError("polytope norm requires vertices")
            if self.dim != 2:
                raise ValidationError("polytope norms are supported only in R^2")
            verts = np.asarray(self.vertices, dtype=float)
            _validate_polygon(verts)
            object.__setattr__(
                self, "vertices", tuple((float(x), float(y)) for x, y in verts)
            )
            object.__setattr__(self, "_normals", _edge_normals(verts))
        elif self.vertices is not None:
            raise ValidationError(f"{self.kind.value} norm takes no vertices")

    @classmethod
    def l1(cls, dim: int = 2) -> NormSpec:
        return cls(NormKind.L1, dim)

    @classmethod
    def l2(cls, dim: int = 2) -> NormSpec:
        return cls(NormKind.L2, dim)

    @classmethod
    def linf(cls, dim: int = 2) -> NormSpec:
        return cls(NormKind.LINF, dim)

    @classmethod
    def polytope(cls, vertices: Sequence[Sequence[float]]) -> NormSpec:
        return cls(NormKind.POLYTOPE, 2, tuple(tuple(v) for v in vertices))

    @classmethod
    def regular_polygon(cls, n: int, phase: float = 0.0) -> NormSpec:
        """Regular n-gon (n even) with a vertex at angle ``phase``.

        Vertices on the axes are snapped so that e.g. the octagon has the
        exact vertex (1, 0).
        """
        ang = phase + 2 * np.pi * np.arange(n) / n
        verts = np.column_stack([np.cos(ang), np.sin(ang)])
        verts[np.abs(verts) < 1e-15] = 0.0
        # enforce exact central symmetry
        verts[n // 2:] = -verts[: n // 2]
        return cls.polytope(verts)

    @property
    def is_polygonal(self) -> bool:
        """True when the unit sphere is a polygon in the plane."""
        if self.kind is NormKind.POLYTOPE:
            return True
        return self.dim == 2 and self.kind in (NormKind.L1, NormKind.LINF)

    def polygon(self) -> np.ndarray:
        """Counterclockwise vertex array of a polygonal unit sphere."""
        if self.kind is NormKind.POLYTOPE:
            return np.asarray(self.vertices, dtype=float)
        if self.dim == 2 and self.kind is NormKind.L1:
            return np.array(_L1_VERTICES)
        if self.dim == 2 and self.kind is NormKind.LINF:
            return np.array(_LINF_VERTICES)
        raise InputError(f"{self.kind.value} in R^{self.dim} has no polygonal sphere")

    def facet_normals(self) -> np.ndarray:
        if self._normals is not None:
            return self._normals
        return _edge_normals(self.polygon())

    def gauge(self, v) -> np.ndarray | float:
        """Evaluate the norm along the last axis of ``v``."""
        arr = np.asarray(v, dtype=float)
        if arr.shape[-1:] != (self.dim,):
            raise InputError(
                f"expected vectors of dimension {self.dim}, got shape {arr.shape}"
            )
        if self.kind is NormKind.L1:
            out = np.abs(arr).sum(axis=-1)
        elif self.kind is NormKind.L2:
            if self.dim == 2:
                out = np.hypot(arr[..., 0], arr[..., 1])
            else:
                # scale by the largest entry so tiny vectors do not underflow
                m = np.abs(arr).max(axis=-1)
                safe = np.where(m > 0, m, 1.0)
                out = m * np.sqrt(((arr / safe[..., None]) ** 2).sum(axis=-1))
        elif self.kind is NormKind.LINF:
            out = np.abs(arr).max(axis=-1)
        else:
            # symmetric polygon: the largest facet functional is >= 0
            out = (arr @ self._normals.T).max(axis=-1)
        return float(out) if out.ndim == 0 else out

    def normalize(self, v) -> np.ndarray:
        """Scale nonzero vectors to gauge 1."""
        arr = np.asarray(v, dtype=float)
        g = np.asarray(self.gauge(arr))
        if np.any(g == 0):
            raise InputError("cannot normalize the zero vector")
        return arr / g[..., None]

    def euclidean_bounds(self) -> tuple[float, float]:
        """Constants (c, C) with c |v|_2 <= |v| <= C |v|_2."""
        m = self.dim
        if self.kind is NormKind.L1:
            return 1.0, math.sqrt(m)
        if self.kind is NormKind.L2:
            return 1.0, 1.0
        if self.kind is NormKind.LINF:
            return 1.0 / math.sqrt(m), 1.0
        verts = self.polygon()
        c = 1.0 / np.max(np.hypot(verts[:, 0], verts[:, 1]))
        C = float(np.max(np.hypot(self._normals[:, 0], self._normals[:, 1])))
        return float(c), C

    def __str__(self) -> str:
        return self.kind.value


def gauge(norm: NormSpec, v) -> np.ndarray | float:
    """|v| under ``norm``; vectorized over the last axis."""
    return norm.gauge(v)


@dataclass(frozen=True)
class FaceDecomposition:
    """Flat faces of the unit sphere (segments, in the plane) plus rotund flag."""

    flats: tuple[tuple[tuple[float, float], tuple[float, float]], ...]
    has_rotund: bool

    @property
    def ell(self) -> int:
        return len(self.flats)


def face_decomposition(norm: NormSpec) -> FaceDecomposition:
    if norm.kind is NormKind.L2:
        return FaceDecomposition((), True)
    if not norm.is_polygonal:
        # the faces of the l1/linf sphere in R^m, m >= 3, are not segments
        raise InputError(
            f"face decomposition of {norm.kind.value} in R^{norm.dim} is not supported"
        )
    verts = norm.polygon()
    n = len(verts)
    flats = tuple(
        (tuple(map(float, verts[i])), tuple(map(float, verts[(i + 1) % n])))
        for i in range(n)
    )
    return FaceDecomposition(flats, False)


@dataclass(frozen=True, eq=False)
class DirectionSet:
    """Finite set of gauge-unit directions, closed under negation."""

    directions: np.ndarray
    exact: bool = True

    def __len__(self) -> int:
        return len(self.directions)

    def __iter__(self):
        return iter(self.directions)

    def as_set(self, decimals: int = 12) -> set[tuple[float, ...]]:
        rounded = np.round(self.directions, decimals) + 0.0
        return {tuple(row) for row in rounded}


def unique_directions(dirs: np.ndarray, decimals: int = 12) -> np.ndarray:
    """Drop duplicate rows (after rounding), keeping first occurrences."""
    dirs = np.asarray(dirs, dtype=float).reshape(-1, 2)
    if len(dirs) == 0:
        return dirs
    keys = np.round(dirs, decimals) + 0.0
    _, first = np.unique(keys, axis=0, return_index=True)
    return dirs[np.sort(first)]


def sphere_directions(norm: NormSpec) -> DirectionSet:
    """Unit vectors of all nondegenerate segments lying in the unit sphere.

    For a polygonal sphere every such segment lies inside one edge, so the
    set is exactly the normalized edge directions and their negatives.  A
    strictly convex sphere contains no segment at all.
    """
    if norm.kind is NormKind.L2:
        return DirectionSet(np.empty((0, norm.dim)), exact=True)
    verts = norm.polygon()
    edges = np.roll(verts, -1, axis=0) - verts
    dirs = norm.normalize(np.vstack([edges, -edges]))
    dirs[np.abs(dirs) < 1e-15] = 0.0
    return DirectionSet(unique_directions(dirs + 0.0), exact=True)


def _common_edge(norm: NormSpec, u1: np.ndarray, u2: np.ndarray) -> bool:
    normals = norm.facet_normals()
    on1 = np.abs(normals @ u1 - 1.0) <= SPHERE_TOL
    on2 = np.abs(normals @ u2 - 1.0) <= SPHERE_TOL
    return bool(np.any(on1 & on2))


def triangle_equality_check(
    norm: NormSpec, x1, x2, tol: float = 1e-9
) -> tuple[bool, bool]:
    """Compare |x1 + x2| = |x1| + |x2| with [x1/|x1|, x2/|x2|] lying on the sphere.

    Returns ``(equality, segment_on_sphere)``; in exact arithmetic the two
    always agree.  The equality tolerance is relative to |x1| + |x2|.  The
    segment test samples 64 points and, for polygonal spheres, also requires
    both endpoints to lie on one closed edge.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    g1, g2 = norm.gauge(x1), norm.gauge(x2)
    if g1 == 0 or g2 == 0:
        raise InputError("triangle_equality_check needs nonzero vectors")
    equality = abs(norm.gauge(x1 + x2) - (g1 + g2)) <= tol * (g1 + g2)

    u1, u2 = x1 / g1, x2 / g2
    t = np.linspace(0.0, 1.0, N_SEGMENT_SAMPLES)[:, None]
    samples = u1 + t * (u2 - u1)
    on_sphere = bool(np.all(np.abs(norm.gauge(samples) - 1.0) <= SPHERE_TOL))
    if on_sphere and norm.is_polygonal:
        on_sphere = _common_edge(norm, u1, u2)
    return bool(equality), on_sphere


def parse_norm(name: str, vertices: Sequence[Sequence[float]] | None = None) -> NormSpec:
    """Build a planar norm from its scene-file name."""
    try:
        kind = NormKind(name.strip().lower())
    except ValueError:
        raise InputError(f"unknown norm {name!r}; expected l1, l2, linf or polytope")
    if kind is NormKind.POLYTOPE:
        if vertices is None:
            raise InputError("norm = polytope requires a vertices line")
        return NormSpec.polytope(vertices)
    if vertices is not None:
        raise InputError(f"norm {kind.value} does not take vertices")
    return NormSpec(kind, 2)
