"""Builtin scenes: the counterexamples and seeded general-position scenes."""

from __future__ import annotations

import re

import numpy as np

from .errors import InputError
from .general_position import check_general_position
from .norms import NormSpec, sphere_directions
from .scenes import Box, Scene, Site, min_pairwise_site_distance

BOX20 = Box((-10.0, -10.0), (10.0, 10.0))

# rejection thresholds for the random general-position scenes
GP_MIN_MARGIN = 0.15
GP_MIN_ETA = 2.0
MAX_TRIES = 100_000

_NAME = re.compile(r"^\s*([a-z0-9-]+)\s*(?:\(\s*([^)]*)\s*\))?\s*$")


def ex61() -> Scene:
    """Twenty l1 point sites: four translated copies of a five-site group."""
    group = [(-6, -6), (-2, -6), (-6, -2), (-2, -2), (-4, -4)]
    sites = []
    for tx, ty in [(0, 0), (8, 0), (0, 8), (8, 8)]:
        sites.extend(Site([(x + tx, y + ty)]) for x, y in group)
    return Scene(BOX20, NormSpec.l1(), tuple(sites), "ex61", centers=(4, 9, 14, 19))


def ex62(beta: float = 1.0) -> Scene:
    if not 0 < beta <= 1:
        raise InputError(f"ex62 needs beta in (0, 1], got {beta}")
    sites = (Site([(0.0, beta)]), Site([(0.0, -beta)]))
    return Scene(BOX20, NormSpec.l1(), sites, f"ex62({beta!r})")


def fat_l1() -> Scene:
    return Scene(BOX20, NormSpec.l1(), (Site([(-1, -1)]), Site([(1, 1)])), "fat-l1")


def fat_linf() -> Scene:
    return Scene(BOX20, NormSpec.linf(), (Site([(0, 1)]), Site([(0, -1)])), "fat-linf")


def _pair_margin(norm: NormSpec, p: np.ndarray, Q: np.ndarray, sphere: np.ndarray) -> np.ndarray:
    """Gauge distance from the directions Q - p (both signs) to the sphere directions."""
    diff = Q - p
    g = norm.gauge(diff)
    u = diff / g[:, None]
    d = np.minimum(norm.gauge(u[:, None, :] - sphere[None]), norm.gauge(-u[:, None, :] - sphere[None]))
    return d.min(axis=1) if len(sphere) else np.full(len(Q), np.inf)


def random_gp_scene(
    norm: NormSpec,
    n_sites: int,
    seed: int,
    points_per_site: int = 1,
    min_margin: float = GP_MIN_MARGIN,
    min_eta: float = GP_MIN_ETA,
    extent: float = 9.0,
    label: str = "",
    box: Box = BOX20,
) -> Scene:
    """Random sites in [-extent, extent]^2 drawn point by point.

    Each candidate point is uniform and is rejected until it is at least
    ``min_eta`` away from, and in general position with margin at least
    ``min_margin`` relative to, every point of the other sites drawn so
    far.  The result is checked once more with the exact checker.
    """
    rng = np.random.default_rng(seed)
    sphere = sphere_directions(norm).directions
    pts: list[np.ndarray] = []
    owner: list[int] = []
    for k in range(n_sites):
        for _ in range(points_per_site):
            for _ in range(MAX_TRIES):
                c = rng.uniform(-extent, extent, 2)
                others = np.array([q for q, o in zip(pts, owner) if o != k]).reshape(-1, 2)
                if len(others) == 0:
                    break
                if norm.gauge(others - c).min() < min_eta:
                    continue
                if _pair_margin(norm, c, others, sphere).min() >= min_margin:
                    break
            else:
                raise RuntimeError(f"no acceptable point after {MAX_TRIES} draws (seed {seed})")
            pts.append(c)
            owner.append(k)
    sites = tuple(
        Site([tuple(float(v) for v in p) for p, o in zip(pts, owner) if o == k]) for k in range(n_sites)
    )
    scene = Scene(box, norm, sites, label)
    report = check_general_position(scene)
    if not report.holds or min_pairwise_site_distance(scene) < min_eta:
        raise RuntimeError("generated scene failed the general-position check")
    return scene


def gp10_linf(seed: int = 0) -> Scene:
    return random_gp_scene(NormSpec.linf(), 10, seed, label=f"gp10-linf({seed})")


def shops_l1(seed: int = 0) -> Scene:
    """Six l1 "shop chains"; each chain is one site with two branches."""
    return random_gp_scene(
        NormSpec.l1(), 6, seed, points_per_site=2, min_margin=0.1, min_eta=1.5,
        label=f"shops-l1({seed})",
    )


_BUILDERS = {
    "ex61": (ex61, None),
    "ex62": (ex62, float),
    "fat-l1": (fat_l1, None),
    "fat-linf": (fat_linf, None),
    "gp10-linf": (gp10_linf, int),
    "shops-l1": (shops_l1, int),
}

GENERAL_POSITION_BUILTINS = ("ex62", "gp10-linf", "shops-l1")


def builtin_names() -> list[str]:
    return [name if conv is None else f"{name}({'beta' if conv is float else 'seed'})"
            for name, (_, conv) in _BUILDERS.items()]


def builtin_scene(name: str) -> Scene:
    """Look up e.g. ``ex61``, ``ex62(0.5)``, ``gp10-linf(3)``."""
    m = _NAME.match(name)
    if not m or m.group(1) not in _BUILDERS:
        raise InputError(f"unknown builtin scene {name!r}; known: {', '.join(builtin_names())}")
    builder, conv = _BUILDERS[m.group(1)]
    arg = m.group(2)
    if arg is None or arg == "":
        return builder()
    if conv is None:
        raise InputError(f"builtin scene {m.group(1)} takes no parameter")
    try:
        return builder(conv(arg))
    except ValueError as exc:
        raise InputError(f"bad parameter for {m.group(1)}: {arg!r}") from exc
