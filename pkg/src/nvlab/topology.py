"""Grid-scale checks of the cell topology: boundary against bisector,
interior against the strict dominance set, and fat-bisector detection.

Everything here works on the sampled function f(x) = d(x, P_k) - d(x, A_k)
and can only falsify, never prove: a PASS means no counterexample was
visible at the chosen grid resolution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ._parallel import pmap
from .errors import PreconditionError
from .general_position import check_general_position
from .scenes import Scene, set_distance
from .voronoi import _mesh, grid_points

MIN_RESOLUTION = 64
MAX_RESOLUTION = 4096
NEIGHBOR_RADIUS = 2
MAX_WITNESSES = 5

_OFFSETS = np.array([(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if dx or dy], float)


@dataclass(frozen=True, eq=False)
class GridField:
    """f sampled at the centers of a resolution x resolution grid.

    ``values[i, j]`` belongs to the center ``(xs[j], ys[i])``, so rows run
    from the bottom of the box to the top.
    """

    scene: Scene
    site_index: int
    resolution: int
    values: np.ndarray
    cell_size: float
    xs: np.ndarray
    ys: np.ndarray

    def point(self, i: int, j: int) -> tuple[float, float]:
        return float(self.xs[j]), float(self.ys[i])

    @property
    def step_gauge(self) -> float:
        """Largest gauge length of a step to one of the 8 neighbour centers."""
        h = self.cell_size
        return float(self.scene.norm.gauge(h * _OFFSETS).max())


def grid_classify(scene: Scene, k: int, resolution: int = 512) -> GridField:
    if not MIN_RESOLUTION <= resolution <= MAX_RESOLUTION:
        raise PreconditionError(
            f"resolution must lie in [{MIN_RESOLUTION}, {MAX_RESOLUTION}], got {resolution}"
        )
    scene._check_index(k)
    xs, ys = grid_points(scene.box, resolution)
    P, A = scene.site_points(k), scene.competitors(k)

    def row_block(rows):
        X = _mesh(xs, ys[rows])
        return set_distance(scene.norm, X, P) - set_distance(scene.norm, X, A)

    blocks = np.array_split(np.arange(resolution), max(1, min(resolution, 16)))
    values = np.concatenate(pmap(row_block, blocks)).reshape(resolution, resolution)
    return GridField(scene, k, resolution, values, scene.box.width / resolution, xs, ys)


def default_fat_tol(scene: Scene) -> float:
    return 1e-9 * scene.diameter


def fat_bisector_detect(field: GridField, tol: float | None = None) -> tuple[bool, tuple[float, float] | None]:
    """A grid cell whose value and all 8 neighbours have |f| <= tol.

    The witness is the first such center scanning rows from the bottom of
    the box, left to right.
    """
    if tol is None:
        tol = default_fat_tol(field.scene)
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    flat = np.abs(field.values) <= tol
    core = ndimage.binary_erosion(flat, structure=np.ones((3, 3), bool), border_value=0)
    hits = np.argwhere(core)
    if len(hits) == 0:
        return False, None
    i, j = hits[0]
    return True, field.point(int(i), int(j))


# -- boundary / interior / closure ---------------------------------------------


@dataclass(frozen=True)
class Statement:
    name: str
    passed: bool
    checked: int
    counterexamples: tuple[tuple[float, float], ...] = field(default=())


@dataclass(frozen=True)
class TopologyReport:
    scene_label: str
    site_index: int
    applicable: bool
    resolution: int = 0
    tol: float = 0.0
    margin: float = 0.0
    statements: tuple[Statement, ...] = field(default=())
    reason: str = ""

    @property
    def passed(self) -> bool:
        return self.applicable and all(s.passed for s in self.statements)

    def to_text(self) -> str:
        head = f"# grid-scale verification (not a proof): scene={self.scene_label} site={self.site_index + 1}"
        if not self.applicable:
            return f"{head}\nNOT APPLICABLE {self.reason}\n"
        lines = [
            head,
            f"# resolution={self.resolution} tol={self.tol:.6g} interior_margin={self.margin:.6g} "
            f"radius={NEIGHBOR_RADIUS} cells",
            "# tol is half the gauge length of a one-cell step; f is 2-Lipschitz, so one step",
            "# changes f by at most the interior margin and a sign change is visible within 2 cells",
        ]
        for s in self.statements:
            status = "PASS" if s.passed else "FAIL"
            line = f"{status} {s.name} checked={s.checked}"
            if s.counterexamples:
                line += " at " + " ".join(f"({x:.6g},{y:.6g})" for x, y in s.counterexamples)
            lines.append(line)
        return "\n".join(lines) + "\n"


def _window(mask: np.ndarray, radius: int) -> np.ndarray:
    """True where some entry of mask lies within the (2r+1)^2 window."""
    size = 2 * radius + 1
    return ndimage.maximum_filter(mask.astype(np.uint8), size=size, mode="constant", cval=0) > 0


def _all_window(mask: np.ndarray, radius: int) -> np.ndarray:
    """True where every in-grid entry of the window satisfies mask."""
    size = 2 * radius + 1
    return ndimage.minimum_filter(mask.astype(np.uint8), size=size, mode="constant", cval=1) > 0


def _statement(name: str, field_: GridField, subject: np.ndarray, ok: np.ndarray) -> Statement:
    bad = np.argwhere(subject & ~ok)
    pts = tuple(field_.point(int(i), int(j)) for i, j in bad[:MAX_WITNESSES])
    return Statement(name, len(bad) == 0, int(subject.sum()), pts)


def check_field(field_: GridField, tol: float | None = None) -> tuple[Statement, ...]:
    f = field_.values
    g1 = field_.step_gauge
    if tol is None:
        tol = 0.5 * g1
    margin = 2.0 * g1
    r = NEIGHBOR_RADIUS
    neg, pos = f < -tol, f > tol
    zero = np.abs(f) <= tol
    boundary = _statement("boundary: near-equality points see both strict signs within 2 cells",
                          field_, zero, _window(neg, r) & _window(pos, r))
    # an interior point of the cell that is not strict would sit inside a
    # 3x3 block of near-equality values
    inner = _statement("interior: no 3x3 block of near-equality points",
                       field_, zero, ~_all_window(zero, 1))
    strict_open = _statement("interior: strict points beyond the margin have a 1-cell neighbourhood in the cell",
                             field_, f < -margin, _all_window(f < 0, 1))
    closure = _statement("closure: every cell point has a strict point within 2 cells",
                         field_, f <= tol, _window(neg, r))
    return boundary, inner, strict_open, closure


def boundary_bisector_check(
    scene: Scene, k: int, resolution: int = 512, tol: float | None = None
) -> TopologyReport:
    """Run the grid checks for site k; not applicable without general position."""
    gp = check_general_position(scene)
    if not gp.holds:
        v = gp.violations[0]
        reason = (f"general position fails: sites {v.j + 1},{v.k + 1} points {v.p} {v.q} "
                  f"parallel to {v.direction}")
        return TopologyReport(scene.label, k, False, reason=reason)
    field_ = grid_classify(scene, k, resolution)
    g1 = field_.step_gauge
    tol = 0.5 * g1 if tol is None else tol
    statements = check_field(field_, tol)
    return TopologyReport(scene.label, k, True, resolution, tol, 2.0 * g1, statements)
