from __future__ import annotations

import math

import numpy as np
import pytest

from conftest import OCTAGON
from nvlab.catalog import BOX20, ex61, ex62, fat_l1, fat_linf, gp10_linf, random_gp_scene
from nvlab.errors import ValidationError
from nvlab.general_position import check_general_position, pair_directions, site_pair_directions
from nvlab.norms import NormSpec
from nvlab.scenes import Scene, Site, hausdorff, min_pairwise_site_distance, perturb_scene, set_distance


def two_sites(norm, p, q):
    return Scene(BOX20, norm, (Site([p]), Site([q])))


def test_pair_directions_examples():
    assert site_pair_directions(fat_l1()).as_set() == {(0.5, 0.5), (-0.5, -0.5)}
    assert site_pair_directions(fat_linf()).as_set() == {(0, 1), (0, -1)}


def test_fat_scenes_violate():
    r = check_general_position(fat_l1())
    assert not r.holds and r.margin == 0
    assert {v.direction for v in r.violations} == {(0.5, 0.5)}
    r = check_general_position(fat_linf())
    assert not r.holds
    assert {v.direction for v in r.violations} == {(0.0, -1.0)}


def test_linf_margin_one_third():
    r = check_general_position(two_sites(NormSpec.linf(), (0, 0), (3, 1)))
    assert r.holds
    assert abs(r.margin - 1 / 3) <= 1e-12


def test_l2_always_holds():
    r = check_general_position(Scene(BOX20, NormSpec.l2(), ex61().sites))
    assert r.holds and r.margin == math.inf


def test_ex61_violates_and_ex62_holds():
    assert not check_general_position(ex61()).holds
    assert check_general_position(ex62(1.0)).holds


def test_octagon_edge_parallel_pair_violates():
    V = OCTAGON.polygon()
    edge = V[1] - V[0]
    r = check_general_position(two_sites(OCTAGON, (0.0, 0.0), tuple(3 * edge)))
    assert not r.holds


def test_random_scenes_have_no_false_violations():
    rng = np.random.default_rng(5)
    for i in range(1000):
        norm = NormSpec.l1() if i % 2 else NormSpec.linf()
        pts = rng.uniform(-9, 9, (4, 2))
        s = Scene(BOX20, norm, tuple(Site([tuple(p)]) for p in pts))
        r = check_general_position(s)
        assert r.holds and r.margin > 0


def test_shared_point_rejected():
    with pytest.raises(ValidationError):
        pair_directions(NormSpec.l1(), [(0, 0)], [(0, 0)])


def test_direction_perturbation_bound():
    # D(dir(P,A), dir(P',A')) <= 2 (e1 + e2) / d(P, A) when e1 + e2 < d(P, A)
    rng = np.random.default_rng(12)
    norms = [NormSpec.l1(), NormSpec.l2(), NormSpec.linf(), OCTAGON]
    checked = 0
    while checked < 1000:
        n = norms[checked % 4]
        P = rng.uniform(-10, 10, (rng.integers(1, 5), 2))
        A = rng.uniform(-10, 10, (rng.integers(1, 5), 2))
        dPA = set_distance(n, P, A).min()
        e1, e2 = rng.uniform(0, dPA / 2, 2) + 1e-6
        if e1 + e2 >= dPA:
            continue
        P2 = P + rng.uniform(0, e1, (len(P), 1)) * n.normalize(rng.normal(size=P.shape)) * 0.999
        A2 = A + rng.uniform(0, e2, (len(A), 1)) * n.normalize(rng.normal(size=A.shape)) * 0.999
        D = hausdorff(n, pair_directions(n, P, A), pair_directions(n, P2, A2)).value
        assert D <= 2 * (e1 + e2) / dPA + 1e-9
        checked += 1


@pytest.mark.parametrize("seed", range(3))
def test_margin_survives_small_perturbations(seed):
    s = gp10_linf(seed)
    r = check_general_position(s).margin
    eta = min_pairwise_site_distance(s)
    for delta in (r * eta / 16, r * eta / 9):
        for trial in range(5):
            p = perturb_scene(s, delta, seed=100 * trial + seed)
            after = check_general_position(p)
            assert after.holds
            assert after.margin >= r - 4 * delta / eta - 1e-12


def test_random_gp_scene_meets_thresholds():
    s = random_gp_scene(OCTAGON, 6, 9, points_per_site=2, min_margin=0.05, min_eta=1.0)
    r = check_general_position(s)
    assert r.holds and r.margin >= 0.05
    assert min_pairwise_site_distance(s) >= 1.0
