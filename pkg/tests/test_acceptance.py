"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` (the lines are repeated in the
terminal summary) or ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import statistics
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import OCTAGON  # noqa: E402
from nvlab.catalog import (  # noqa: E402
    GENERAL_POSITION_BUILTINS, builtin_scene, ex61, ex62, fat_l1, fat_linf, gp10_linf, random_gp_scene,
)
from nvlab.general_position import check_general_position, pair_directions  # noqa: E402
from nvlab.norms import NormSpec, sphere_directions, triangle_equality_check  # noqa: E402
from nvlab.scenes import (  # noqa: E402
    Box, Scene, Site, dominance_gap, hausdorff, min_pairwise_site_distance, set_distance,
)
from nvlab.stability import stability_sweep  # noqa: E402
from nvlab.topology import boundary_bisector_check, fat_bisector_detect, grid_classify  # noqa: E402
from nvlab.voronoi import (  # noqa: E402
    _mesh, cell_point_cloud, compute_cell, estimate_lambda, grid_points,
)

pytestmark = pytest.mark.slow

RESULTS: list[str] = []
BOX = Box((-10, -10), (10, 10))


def record(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})"
    RESULTS.append(line)
    print(line)
    assert ok, line


# 1 ----------------------------------------------------------------------------


def test_c1_two_site_l1_cell_is_upper_half():
    t0 = time.perf_counter()
    s = ex62(1.0)
    cell = compute_cell(s, 0, n_dirs=512)
    cloud = cell_point_cloud(cell, 8)
    step = 1 / 8
    rect = _mesh(np.arange(-10, 10 + step / 2, step), np.arange(0, 10 + step / 2, step))
    D = hausdorff(s.norm, cloud, rect).value
    dt = time.perf_counter() - t0
    record(1, "l1 two-site cell vs rectangle [-10,10]x[0,10]", D <= 0.2 and dt < 5,
           f"D={D:.4g} <= 0.2, {dt:.2f}s < 5s")


# 2 ----------------------------------------------------------------------------


def vertical_ray_extent(scene: Scene, k: int, step: float = 1 / 64) -> float:
    """Longest run of grid points on the site's vertical line that belong to
    the cell while both horizontal neighbours do not (a zero-width ray)."""
    px, _ = scene.site_points(k)[0]
    ys = np.arange(scene.box.lo[1], scene.box.hi[1] + step / 2, step)
    cols = [np.column_stack([np.full_like(ys, px + dx), ys]) for dx in (-step, 0.0, step)]
    inside = [dominance_gap(scene, k, c) <= scene.eq_slack for c in cols]
    thin = inside[1] & ~inside[0] & ~inside[2]
    best = run = 0
    for v in thin:
        run = run + 1 if v else 0
        best = max(best, run)
    return max(best - 1, 0) * step


def test_c2_square_pattern_cells_do_not_recover():
    s = ex61()
    extent = max(vertical_ray_extent(s, k) for k in s.centers)
    t0 = time.perf_counter()
    tr = stability_sweep(s, [0.1, 0.001], trials=1, mode="shift", n_dirs=1024,
                         sites=list(s.centers), bisector_resolution=64)
    dt = time.perf_counter() - t0
    d = {r.delta: r.max_cell_D for r in tr.rows}
    ok = d[0.001] >= 0.5 * d[0.1] and min(d.values()) > 0.1 * extent and dt < 60
    record(2, "ex61 shift-mode instability", ok,
           f"D(0.1)={d[0.1]:.4g}, D(0.001)={d[0.001]:.4g}, ray extent={extent:.4g}, {dt:.1f}s < 60s")


# 3 ----------------------------------------------------------------------------


def test_c3_general_position_trend():
    deltas = [0.5, 0.1, 0.02, 0.004]
    t0 = time.perf_counter()
    ok = True
    parts = []
    for seed in range(3):
        tr = stability_sweep(gp10_linf(seed), deltas, trials=5, seed=seed, n_dirs=512, density=8)
        meds = [m for _, m in tr.medians()]
        inversions = sum(b > a for a, b in zip(meds, meds[1:]))
        ok &= inversions <= 1 and meds[-1] < 0.05
        parts.append(f"seed {seed}: " + "/".join(f"{m:.3g}" for m in meds) + f" inv={inversions}")
    dt = time.perf_counter() - t0
    ok &= dt < 300
    record(3, "gp10-linf median max_cell_D shrinks with delta", ok, "; ".join(parts) + f"; {dt:.0f}s < 300s")


# 4 ----------------------------------------------------------------------------


def test_c4_general_position_checker():
    r1 = check_general_position(fat_l1())
    r2 = check_general_position(fat_linf())
    two = Scene(BOX, NormSpec.linf(), (Site([(0, 0)]), Site([(3, 1)])))
    r3 = check_general_position(two)
    rng = np.random.default_rng(0)
    l2_ok = all(
        check_general_position(
            Scene(BOX, NormSpec.l2(), tuple(Site([tuple(p)]) for p in rng.uniform(-9, 9, (5, 2))))
        ).holds
        for _ in range(20)
    ) and check_general_position(Scene(BOX, NormSpec.l2(), fat_l1().sites)).holds
    S1 = sphere_directions(NormSpec.l1()).as_set()
    Sinf = sphere_directions(NormSpec.linf()).as_set()
    ok = (
        not r1.holds and {v.direction for v in r1.violations} == {(0.5, 0.5)} and (0.5, 0.5) in S1
        and not r2.holds and {v.direction for v in r2.violations} == {(0.0, -1.0)} and (0, -1) in Sinf
        and r3.holds and abs(r3.margin - 1 / 3) <= 1e-12 and l2_ok
    )
    record(4, "general-position checker exactness", ok,
           f"fat-l1 dir={r1.violations[0].direction}, fat-linf dir={r2.violations[0].direction}, "
           f"margin={r3.margin!r}, l2 holds={l2_ok}")


# 5 ----------------------------------------------------------------------------

# A pair is ambiguous when either the relative triangle gap or the largest
# deviation of the segment [x1/|x1|, x2/|x2|] from the sphere lies inside
# this band: both vanish exactly for equality pairs, but near-misses with
# unequal |x1|, |x2| can put one below its tolerance and not the other.
DEAD_BAND = (1e-12, 1e-6)


def _segment_deviation(norm, x1, x2) -> float:
    u1, u2 = norm.normalize(x1), norm.normalize(x2)
    t = np.linspace(0, 1, 257)[:, None]
    return float(np.abs(norm.gauge(u1 + t * (u2 - u1)) - 1).max())


def _lemma53_pairs(norm: NormSpec, rng, n: int):
    """A third each of random, on-one-flat and nearly-on-one-flat pairs."""
    pairs = []
    for i in range(n):
        kind = i % 3
        if kind == 0 or not norm.is_polygonal:
            x1, x2 = rng.normal(size=2), rng.normal(size=2)
            if kind and not norm.is_polygonal:
                # positively parallel vectors, exactly or almost
                x2 = rng.uniform(0.1, 10) * x1 + (kind == 2) * rng.normal(size=2) * 10 ** rng.uniform(-9, -1)
        else:
            V = norm.polygon()
            j = rng.integers(len(V))
            a, b = V[j], V[(j + 1) % len(V)]
            u1 = a + rng.random() * (b - a)
            u2 = a + rng.random() * (b - a)
            if kind == 2:
                nxt = V[(j + 2) % len(V)]
                u2 = b + rng.random() * 10 ** rng.uniform(-6, 0) * (nxt - b)
            x1, x2 = u1 * rng.uniform(0.1, 10), u2 * rng.uniform(0.1, 10)
        pairs.append((x1, x2))
    return pairs


def test_c5_triangle_equality_characterization():
    rng = np.random.default_rng(53)
    norms = {"l1": NormSpec.l1(), "l2": NormSpec.l2(), "linf": NormSpec.linf(), "octagon": OCTAGON}
    parts = []
    ok = True
    for name, norm in norms.items():
        bad = banded = 0
        for x1, x2 in _lemma53_pairs(norm, rng, 10_000):
            g1, g2 = norm.gauge(x1), norm.gauge(x2)
            rel = (g1 + g2 - norm.gauge(x1 + x2)) / (g1 + g2)
            dev = _segment_deviation(norm, x1, x2)
            if any(DEAD_BAND[0] < v < DEAD_BAND[1] for v in (rel, dev)):
                banded += 1
                continue
            eq, seg = triangle_equality_check(norm, x1, x2)
            bad += eq != seg
        ok &= bad == 0
        parts.append(f"{name}: {bad} disagreements, {banded} in dead band")
    record(5, "triangle equality iff segment on sphere", ok, "; ".join(parts))


# 6 ----------------------------------------------------------------------------


def _perturb_set(norm, X, eps, rng):
    r = rng.uniform(0, eps, (len(X), 1)) * 0.999
    return X + r * norm.normalize(rng.normal(size=X.shape))


def test_c6_hausdorff_union_and_perturbation_bounds():
    rng = np.random.default_rng(96)
    norms = [NormSpec.l1(), NormSpec.l2(), NormSpec.linf(), OCTAGON]
    slack = 1e-9
    union_bad = dist_bad = dir_bad = 0
    for i in range(1000):
        n = norms[i % 4]
        m = rng.integers(1, 5)
        G = [rng.uniform(-10, 10, (rng.integers(1, 6), 2)) for _ in range(m)]
        H = [rng.uniform(-10, 10, (rng.integers(1, 6), 2)) for _ in range(m)]
        bound = max(hausdorff(n, g, h).value for g, h in zip(G, H))
        union_bad += hausdorff(n, np.vstack(G), np.vstack(H)).value > bound + slack
    for i in range(1000):
        n = norms[i % 4]
        P = rng.uniform(-10, 10, (rng.integers(1, 5), 2))
        A = rng.uniform(-10, 10, (rng.integers(1, 5), 2))
        e1, e2 = rng.uniform(1e-3, 3, 2)
        P2, A2 = _perturb_set(n, P, e1, rng), _perturb_set(n, A, e2, rng)
        d0, d1 = set_distance(n, P, A).min(), set_distance(n, P2, A2).min()
        dist_bad += abs(d1 - d0) > e1 + e2 + slack
    done = 0
    while done < 1000:
        n = norms[done % 4]
        P = rng.uniform(-10, 10, (rng.integers(1, 5), 2))
        A = rng.uniform(-10, 10, (rng.integers(1, 5), 2))
        dPA = set_distance(n, P, A).min()
        e1, e2 = rng.uniform(1e-6, dPA / 2, 2)
        if e1 + e2 >= dPA:
            continue
        P2, A2 = _perturb_set(n, P, e1, rng), _perturb_set(n, A, e2, rng)
        D = hausdorff(n, pair_directions(n, P, A), pair_directions(n, P2, A2)).value
        dir_bad += D > 2 * (e1 + e2) / dPA + slack
        done += 1
    ok = union_bad == dist_bad == dir_bad == 0
    record(6, "union bound and the two perturbation bounds", ok,
           f"violations: union {union_bad}/1000, distance {dist_bad}/1000, directions {dir_bad}/1000")


# 7 ----------------------------------------------------------------------------


def test_c7_ray_bundles_match_grid_predicate():
    norms = [NormSpec.l1(), NormSpec.linf(), OCTAGON]
    worst = 1.0
    for i in range(20):
        s = random_gp_scene(norms[i % 3], 3 + (i * 7) % 8, 7000 + i)
        X = _mesh(*grid_points(s.box, 200))
        for k in range(s.n_sites):
            agree = compute_cell(s, k, 512).contains(X) == (dominance_gap(s, k, X) <= s.eq_slack)
            worst = min(worst, float(agree.mean()))
    record(7, "ray-bundle membership vs direct predicate on 200x200", worst >= 0.999,
           f"worst per-cell agreement {100 * worst:.3f}% >= 99.9% over 20 scenes")


# 8 ----------------------------------------------------------------------------


def test_c8_grid_topology():
    ok = True
    parts = []
    for name in GENERAL_POSITION_BUILTINS:
        s = builtin_scene(name)
        passed = all(boundary_bisector_check(s, k, 512).passed for k in range(s.n_sites))
        fat = any(fat_bisector_detect(grid_classify(s, k, 1024))[0] for k in range(s.n_sites))
        ok &= passed and not fat
        parts.append(f"{s.label}: checks {'pass' if passed else 'FAIL'}, fat={fat}")
    fat, w = fat_bisector_detect(grid_classify(fat_l1(), 0, 1024))
    ok &= fat and w is not None and w[0] >= 1 and w[1] <= -1
    parts.append(f"fat-l1: fat={fat} witness={w}")
    record(8, "boundary/interior/closure and fat-bisector detection", ok, "; ".join(parts))


# 9 ----------------------------------------------------------------------------


def test_c9_lambda_estimation():
    scenes = [ex62(1.0)] + [
        random_gp_scene(n, 2, seed)
        for n, seed in [(NormSpec.l1(), 1), (NormSpec.linf(), 2), (OCTAGON, 3), (NormSpec.l2(), 4)]
    ]
    ok = True
    parts = []
    for s in scenes:
        eps = min_pairwise_site_distance(s) / 4
        lams = [estimate_lambda(s, 0, eps, seed=seed).lam for seed in range(5)]
        mean = statistics.mean(lams)
        spread = max(abs(v - mean) for v in lams) / mean if mean > 0 else np.inf
        ok &= min(lams) > 0 and spread <= 0.1
        parts.append(f"{s.norm.kind.value}: lambda~{mean:.3g} spread {100 * spread:.1f}%")
    fat = estimate_lambda(fat_l1(), 0, 1.0, n_samples=100_000)
    ok &= fat.lambda_tilde < 1e-3
    parts.append(f"fat-l1 lambda_tilde={fat.lambda_tilde:.2g}")
    record(9, "lambda positive and reproducible; degenerate scene detected", ok, "; ".join(parts))


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
