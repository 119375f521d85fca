"""Perturbation sweeps: how far do cells and bisectors move when sites move?"""

from __future__ import annotations

import csv
import io
import math
import statistics
import zlib
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ._parallel import pmap
from .catalog import ex62
from .errors import InputError, PreconditionError, ValidationError
from .scenes import Scene, hausdorff, min_pairwise_site_distance, perturb_scene
from .voronoi import DEFAULT_TOL, cell_point_cloud, compute_cell, estimate_lambda, extract_bisector

TRACE_HEADER = ["delta", "trial", "seed", "max_cell_D", "max_bisector_D"]


@dataclass(frozen=True)
class TraceRow:
    delta: float
    trial: int
    seed: int
    max_cell_D: float
    max_bisector_D: float


@dataclass(frozen=True)
class StabilityTrace:
    label: str
    rows: tuple[TraceRow, ...]
    epsilon4_bound: float | None = None
    scale: float = 1.0
    skipped: tuple[tuple[float, int], ...] = field(default=())

    def deltas(self) -> list[float]:
        return sorted({r.delta for r in self.rows}, reverse=True)

    def medians(self, column: str = "max_cell_D") -> list[tuple[float, float]]:
        out = []
        for d in self.deltas():
            vals = [getattr(r, column) for r in self.rows if r.delta == d]
            out.append((d, statistics.median(vals)))
        return out


def trial_seed(seed: int, delta: float, trial: int) -> int:
    return (seed ^ zlib.crc32(f"{delta!r}/{trial}".encode())) & 0xFFFFFFFF


@dataclass
class _Reference:
    scene: Scene
    ks: list[int]
    n_dirs: int
    density: float
    tol: float
    bisector_resolution: int
    clouds: dict = field(default_factory=dict)
    bisectors: dict = field(default_factory=dict)

    def measure(self, scene: Scene, k: int) -> tuple[float, float]:
        cloud = cell_point_cloud(compute_cell(scene, k, self.n_dirs, self.tol), self.density)
        cell_d = hausdorff(scene.norm, self.clouds[k], cloud).value
        bis = extract_bisector(scene, k, self.bisector_resolution).points
        bis_d = hausdorff(scene.norm, self.bisectors[k], bis).value
        return cell_d, bis_d


def _reference(scene, ks, n_dirs, density, tol, bisector_resolution) -> _Reference:
    ref = _Reference(scene, ks, n_dirs, density, tol, bisector_resolution)
    for k in ks:
        ref.clouds[k] = cell_point_cloud(compute_cell(scene, k, n_dirs, tol), density)
        ref.bisectors[k] = extract_bisector(scene, k, bisector_resolution).points
    return ref


def stability_sweep(
    scene: Scene,
    deltas: Sequence[float],
    trials: int = 5,
    seed: int = 0,
    mode: str = "random",
    n_dirs: int = 512,
    density: float = 8,
    tol: float = DEFAULT_TOL,
    bisector_resolution: int = 128,
    sites: Iterable[int] | None = None,
    epsilon: float | None = None,
) -> StabilityTrace:
    """Perturb the sites at each delta and record the worst cell and bisector
    Hausdorff distances over the selected sites (all sites by default).

    A delta of 0 means the identity perturbation.  Trials whose perturbed
    sites collide are skipped and listed in ``trace.skipped``.  With
    ``epsilon`` given, ``epsilon4_bound`` is the sufficient perturbation
    size lambda / (8 (1 + M / epsilon)) with M the gauge diameter of the box.
    """
    if trials < 1:
        raise PreconditionError("trials must be >= 1")
    if any(not d >= 0 for d in deltas):
        raise PreconditionError("deltas must be nonnegative")
    if mode not in ("random", "shift"):
        raise InputError(f"unknown mode {mode!r}")
    ks = list(range(scene.n_sites)) if sites is None else list(sites)
    ref = _reference(scene, ks, n_dirs, density, tol, bisector_resolution)

    jobs = []
    for d in sorted(set(float(x) for x in deltas), reverse=True):
        for t in range(trials):
            jobs.append((d, t, trial_seed(seed, d, t)))

    cache: dict = {}

    def run(job):
        d, t, s = job
        if d == 0:
            perturbed = scene
        else:
            try:
                perturbed = perturb_scene(scene, d, s, mode)
            except ValidationError:
                return None
            if min_pairwise_site_distance(perturbed) <= 0:
                return None
        key = (d, None if mode == "shift" else s)
        if key not in cache:
            cache[key] = [ref.measure(perturbed, k) for k in ks]
        res = cache[key]
        return TraceRow(d, t, s, max(r[0] for r in res), max(r[1] for r in res))

    results = pmap(run, jobs) if mode == "random" else [run(j) for j in jobs]
    rows = tuple(r for r in results if r is not None)
    skipped = tuple((j[0], j[1]) for j, r in zip(jobs, results) if r is None)

    eps4 = None
    if epsilon is not None:
        lam = min(estimate_lambda(scene, k, epsilon).lam for k in range(scene.n_sites))
        eps4 = lam / (8 * (1 + scene.diameter / epsilon))
    return StabilityTrace(scene.label, rows, eps4, scene.box.width, skipped)


def swap_family_sweep(
    betas: Sequence[float] = (1.0, 0.1, 0.01),
    n_dirs: int = 512,
    density: float = 8,
    bisector_resolution: int = 128,
) -> StabilityTrace:
    """The two-site l1 family {(0, b)}, {(0, -b)}: swapping the sites moves
    each by 2b, yet the cells flip between the upper and lower half-box.

    Rows record the actual displacement 2b as delta."""
    rows = []
    for b in sorted(betas, reverse=True):
        scene = ex62(b)
        swapped = scene.with_sites(scene.sites[::-1])
        ref = _reference(scene, [0, 1], n_dirs, density, DEFAULT_TOL, bisector_resolution)
        res = [ref.measure(swapped, k) for k in (0, 1)]
        rows.append(TraceRow(2 * b, 0, 0, max(r[0] for r in res), max(r[1] for r in res)))
    return StabilityTrace("ex62-swap", tuple(rows), None, ex62(1.0).box.width)


def classify_stability(
    trace: StabilityTrace, shrink_factor: float = 2.0, floor: float = 0.1
) -> str:
    """``stable``, ``unstable`` or ``inconclusive`` from per-delta medians.

    ``floor`` is relative to the box width.  Stable: the median shrinks by
    at least ``shrink_factor`` per decade of delta (largest vs smallest
    delta) and ends below the floor.  Unstable: every median is at or above
    the floor.
    """
    meds = [(d, m) for d, m in trace.medians() if d > 0]
    if len(meds) < 3:
        raise PreconditionError("need at least three positive delta levels")
    d_hi, m_hi = meds[0]
    d_lo, m_lo = meds[-1]
    decades = math.log10(d_hi / d_lo)
    if decades < 2 - 1e-9:
        raise PreconditionError("delta levels must span at least two orders of magnitude")
    threshold = floor * trace.scale
    if all(m >= threshold for _, m in meds):
        return "unstable"
    shrinks = m_lo == 0 or m_hi / m_lo >= shrink_factor ** decades
    if shrinks and m_lo < threshold:
        return "stable"
    return "inconclusive"


# -- CSV ---------------------------------------------------------------------


def _fmt(x: float) -> str:
    return format(x, ".17g")


def trace_to_csv(trace: StabilityTrace) -> str:
    buf = io.StringIO()
    buf.write(f"# label={trace.label}\n")
    buf.write(f"# scale={_fmt(trace.scale)}\n")
    if trace.epsilon4_bound is not None:
        buf.write(f"# epsilon4_bound={_fmt(trace.epsilon4_bound)}\n")
    for d, t in trace.skipped:
        buf.write(f"# skipped={_fmt(d)}/{t}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_HEADER)
    for r in trace.rows:
        w.writerow([_fmt(r.delta), r.trial, r.seed, _fmt(r.max_cell_D), _fmt(r.max_bisector_D)])
    return buf.getvalue()


def trace_from_csv(text: str) -> StabilityTrace:
    meta: dict[str, str] = {}
    skipped = []
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key == "skipped":
                d, _, t = value.partition("/")
                skipped.append((float(d), int(t)))
            else:
                meta[key] = value
        elif line.strip():
            body.append(line)
    reader = csv.reader(body)
    header = next(reader, None)
    if header != TRACE_HEADER:
        raise InputError(f"unexpected trace header {header!r}")
    rows = tuple(
        TraceRow(float(d), int(t), int(s), float(c), float(b)) for d, t, s, c, b in reader
    )
    eps4 = meta.get("epsilon4_bound")
    return StabilityTrace(
        meta.get("label", ""), rows, None if eps4 is None else float(eps4),
        float(meta.get("scale", 1.0)), tuple(skipped),
    )
