"""Voronoi cells of compact sites under polygonal and Euclidean norms in the
plane: ray-bundle cells, general-position checks, perturbation sweeps and
grid-scale topology checks."""

from __future__ import annotations

from .catalog import builtin_names, builtin_scene
from .errors import (
    ConsistencyError,
    InputError,
    NVLabError,
    PreconditionError,
    SceneFormatError,
    ValidationError,
)
from .general_position import GPReport, Violation, check_general_position, site_pair_directions
from .norms import (
    NormKind,
    NormSpec,
    face_decomposition,
    gauge,
    parse_norm,
    sphere_directions,
    triangle_equality_check,
)
from .render import Style, render_svg
from .sceneio import parse_scene, read_scene, serialize_scene, write_scene
from .scenes import (
    Box,
    HausdorffReport,
    Scene,
    Site,
    hausdorff,
    min_pairwise_site_distance,
    perturb_scene,
    set_distance,
)
from .stability import (
    StabilityTrace,
    TraceRow,
    classify_stability,
    stability_sweep,
    swap_family_sweep,
    trace_from_csv,
    trace_to_csv,
)
from .topology import GridField, TopologyReport, boundary_bisector_check, fat_bisector_detect, grid_classify
from .voronoi import (
    Cell,
    Diagram,
    LambdaEstimate,
    cell_hausdorff,
    compute_cell,
    compute_diagram,
    estimate_lambda,
    extract_bisector,
    shoot_ray,
)

__version__ = "0.1.0"
