"""Line-oriented scene files.

    # comment
    [world]
    box = -10 -10 10 10
    norm = polytope
    vertices = 1 0 0 1 -1 0 0 -1
    [meta]
    label = demo
    centers = 5
    [site 1]
    point = 0 1
    [site 2]
    point = 0 -1

Sites are numbered 1..n in the file; ``centers`` uses the same numbers.
Floats are written with 17 significant digits so that reloading is exact.
"""

from __future__ import annotations

import re
from pathlib import Path

from .errors import InputError, NVLabError, SceneFormatError
from .norms import NormKind, parse_norm
from .scenes import Box, Scene, Site

_SECTION = re.compile(r"^\[\s*(world|meta|site\s+(\d+))\s*\]$")
_KEYS = {"world": {"box", "norm", "vertices"}, "meta": {"label", "centers"}, "site": {"point"}}


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _floats(value: str, line: int, count: int | None = None, even: bool = False) -> list[float]:
    try:
        out = [float(tok) for tok in value.split()]
    except ValueError:
        raise SceneFormatError(f"expected numbers, got {value!r}", line) from None
    if any(v != v or v in (float("inf"), float("-inf")) for v in out):
        raise SceneFormatError("numbers must be finite", line)
    if count is not None and len(out) != count:
        raise SceneFormatError(f"expected {count} numbers, got {len(out)}", line)
    if even and len(out) % 2:
        raise SceneFormatError("expected an even count of numbers", line)
    return out


def parse_scene(text: str) -> Scene:
    section = None
    site_no = None
    seen_world: dict[str, tuple[str, int]] = {}
    meta: dict[str, tuple[str, int]] = {}
    sites: dict[int, list[tuple[float, float]]] = {}
    site_line: dict[int, int] = {}

    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _SECTION.match(line)
        if m:
            if m.group(2) is not None:
                section, site_no = "site", int(m.group(2))
                if site_no in sites:
                    raise SceneFormatError(f"duplicate [site {site_no}]", n)
                sites[site_no] = []
                site_line[site_no] = n
            else:
                section, site_no = m.group(1), None
            continue
        if line.startswith("["):
            raise SceneFormatError(f"unknown section {line!r}", n)
        key, eq, value = line.partition("=")
        key, value = key.strip().lower(), value.strip()
        if not eq or not key:
            raise SceneFormatError(f"expected 'key = value', got {line!r}", n)
        if section is None:
            raise SceneFormatError(f"{key!r} outside any section", n)
        if key not in _KEYS[section]:
            raise SceneFormatError(f"unknown key {key!r} in [{section}]", n)
        if section == "site":
            x, y = _floats(value, n, 2)
            sites[site_no].append((x, y))
            continue
        store = seen_world if section == "world" else meta
        if key in store:
            raise SceneFormatError(f"duplicate key {key!r}", n)
        store[key] = (value, n)

    for key in ("box", "norm"):
        if key not in seen_world:
            raise SceneFormatError(f"[world] is missing {key!r}")
    bval, bline = seen_world["box"]
    ax, ay, bx, by = _floats(bval, bline, 4)
    vertices = None
    if "vertices" in seen_world:
        vval, vline = seen_world["vertices"]
        flat = _floats(vval, vline, even=True)
        vertices = list(zip(flat[0::2], flat[1::2]))
    nval, nline = seen_world["norm"]
    try:
        norm = parse_norm(nval, vertices)
    except NVLabError as exc:
        raise SceneFormatError(str(exc), nline) from None

    numbers = sorted(sites)
    if numbers != list(range(1, len(numbers) + 1)):
        raise SceneFormatError(f"sites must be numbered 1..n, got {numbers}")
    for k in numbers:
        if not sites[k]:
            raise SceneFormatError(f"[site {k}] has no points", site_line[k])

    label = meta.get("label", ("", 0))[0]
    centers = ()
    if "centers" in meta:
        cval, cline = meta["centers"]
        try:
            centers = tuple(int(tok) - 1 for tok in cval.split())
        except ValueError:
            raise SceneFormatError(f"centers must be site numbers, got {cval!r}", cline) from None
        if any(not 0 <= c < len(numbers) for c in centers):
            raise SceneFormatError("center site number out of range", cline)

    try:
        return Scene(
            Box((ax, ay), (bx, by)), norm, tuple(Site(sites[k]) for k in numbers), label, centers
        )
    except NVLabError as exc:
        raise SceneFormatError(str(exc)) from None


def serialize_scene(scene: Scene) -> str:
    (ax, ay), (bx, by) = scene.box.lo, scene.box.hi
    out = ["[world]", f"box = {fmt(ax)} {fmt(ay)} {fmt(bx)} {fmt(by)}", f"norm = {scene.norm.kind.value}"]
    if scene.norm.kind is NormKind.POLYTOPE:
        out.append("vertices = " + " ".join(f"{fmt(x)} {fmt(y)}" for x, y in scene.norm.vertices))
    if scene.label or scene.centers:
        out.append("[meta]")
        if scene.label:
            if "#" in scene.label or "\n" in scene.label:
                raise InputError("labels cannot contain '#' or newlines")
            out.append(f"label = {scene.label}")
        if scene.centers:
            out.append("centers = " + " ".join(str(c + 1) for c in scene.centers))
    for k, site in enumerate(scene.sites, start=1):
        out.append(f"[site {k}]")
        out.extend(f"point = {fmt(x)} {fmt(y)}" for x, y in site.points)
    return "\n".join(out) + "\n"


def read_scene(path: str | Path) -> Scene:
    return parse_scene(Path(path).read_text())


def write_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(serialize_scene(scene))
