from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import OCTAGON
from nvlab.catalog import BOX20, builtin_scene
from nvlab.errors import SceneFormatError
from nvlab.sceneio import parse_scene, read_scene, serialize_scene, write_scene
from nvlab.scenes import Scene, Site

GOOD = """
# two sites
[world]
box = -10 -10 10 10
norm = linf
[meta]
label = demo
[site 1]
point = 0 1   # top
[site 2]
point = 0 -1
point = 3 -1
"""


def test_parse_example():
    s = parse_scene(GOOD)
    assert s.label == "demo" and s.n_sites == 2
    assert s.site_points(1).tolist() == [[0, -1], [3, -1]]


@pytest.mark.parametrize(
    "name", ["ex61", "ex62(0.25)", "fat-l1", "fat-linf", "gp10-linf(1)", "shops-l1(2)"]
)
def test_builtin_round_trip(name):
    s = builtin_scene(name)
    assert parse_scene(serialize_scene(s)) == s


def test_polytope_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    s = Scene(BOX20, OCTAGON, tuple(Site([tuple(rng.uniform(-9, 9, 2))]) for _ in range(3)), "oct")
    path = tmp_path / "s.scene"
    write_scene(s, path)
    assert read_scene(path) == s


@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=2, max_size=6, unique=True))
def test_exact_float_round_trip(pts):
    s = Scene(BOX20, OCTAGON, tuple(Site([p]) for p in pts))
    assert parse_scene(serialize_scene(s)).all_points.tolist() == s.all_points.tolist()


@pytest.mark.parametrize(
    "text, line",
    [
        ("[world]\nbox = 0 0 1\nnorm = l1\n[site 1]\npoint = 0 0\n[site 2]\npoint = 1 1\n", 2),
        ("[world]\nbox = 0 0 1 1\nnorm = l7\n", 3),
        ("[world]\nbox = 0 0 1 1\nnorm = l1\n[site 1]\npoint = a b\n", 5),
        ("[world]\nbox = 0 0 1 1\nnorm = l1\ncolor = red\n", 4),
        ("point = 1 1\n", 1),
        ("[world]\n[sight 1]\n", 2),
        ("[world]\nbox = 0 0 1 1\nbox = 0 0 1 1\n", 3),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(SceneFormatError) as exc:
        parse_scene(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


@pytest.mark.parametrize(
    "text",
    [
        "[world]\nnorm = l1\n",
        "[world]\nbox = 0 0 1 1\nnorm = l1\n[site 1]\npoint = 0 0\n[site 3]\npoint = 1 1\n",
        "[world]\nbox = 0 0 1 1\nnorm = l1\n[site 1]\npoint = 0 0\n[site 2]\npoint = 5 5\n",
        "[world]\nbox = 0 0 1 1\nnorm = l1\n[site 1]\npoint = 0 0\n",
    ],
)
def test_structural_errors(text):
    with pytest.raises(SceneFormatError):
        parse_scene(text)


def test_centers_are_one_based_in_files():
    text = serialize_scene(builtin_scene("ex61"))
    assert "centers = 5 10 15 20" in text
    assert parse_scene(text).centers == (4, 9, 14, 19)
