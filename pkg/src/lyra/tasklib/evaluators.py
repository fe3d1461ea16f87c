"""Programmatic success evaluators for the benchmark tasks.

Evaluators are total and pure: any world yields a report, never an exception.
A report's success is the conjunction of its named sub-checks. Tolerances are
per-task parameters; the defaults are an order finer than the 0.04 m block
size and far coarser than float noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

from ..world import TaskObject, WorldState, object_aabb

CONTACT_TOL = 0.005  # m, resting contact
ADJACENCY_MAX_GAP = 0.03  # m, "next to" upper bound
CELL_TOL = 0.01  # m, lattice cell-center error per axis
JENGA_ANGLE_TOL_DEG = 10.0
COLUMN_TOL = 0.01  # m, xy alignment within a stack


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    measured: str = ""


@dataclass
class SuccessReport:
    success: bool
    checks: list[CheckResult] = field(default_factory=list)
    primitive_count: int = 0

    def failed_checks(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.ok]

    def to_json_obj(self) -> dict:
        return {
            "success": self.success,
            "checks": [
                {"name": c.name, "ok": c.ok, "measured": c.measured} for c in self.checks
            ],
            "primitive_count": self.primitive_count,
        }


def _blocks(world: WorldState, color: Optional[str] = None) -> list[TaskObject]:
    return [
        o
        for o in world.objects
        if o.object_type in ("block", "plate") and (color is None or o.color == color)
    ]


def _rests_on(upper: TaskObject, lower: TaskObject, tol: float) -> bool:
    ub, lb = object_aabb(upper), object_aabb(lower)
    return abs(ub.min.z - lb.max.z) <= tol and ub.overlaps_xy(lb)


def _long_axis_angle(obj: TaskObject) -> float:
    """xy angle of the object's longest dimension, in [0, pi)."""
    from ..geometry import Point3D

    axis_index = max(range(3), key=lambda i: obj.size[i])
    unit = [Point3D(1, 0, 0), Point3D(0, 1, 0), Point3D(0, 0, 1)][axis_index]
    v = obj.pose.rotation.apply(unit)
    return math.atan2(v.y, v.x) % math.pi


def _angle_delta_deg(a: float, b: float) -> float:
    """Smallest difference between two undirected xy angles, degrees in [0, 90]."""
    d = abs(a - b) % math.pi
    return math.degrees(min(d, math.pi - d))


# -- tower -------------------------------------------------------------------


def eval_tower(world: WorldState, params: dict) -> list[CheckResult]:
    tol = params.get("contact_tol", CONTACT_TOL)
    blocks = _blocks(world)
    count = int(params.get("count", len(blocks)))
    if not blocks:
        return [CheckResult("tower_chain", False, "no blocks in world")]

    rests = {
        a.id: [b.id for b in blocks if b.id != a.id and _rests_on(a, b, tol)] for a in blocks
    }
    by_id = {b.id: b for b in blocks}
    memo: dict[int, int] = {}

    def chain_len(top_id: int) -> int:
        if top_id in memo:
            return memo[top_id]
        memo[top_id] = 1  # cycle guard; real value set below
        best = 1 + max((chain_len(b) for b in rests[top_id]), default=0)
        memo[top_id] = best
        return best

    longest = max(chain_len(b.id) for b in blocks)
    return [
        CheckResult(
            "tower_chain",
            longest >= count,
            f"longest resting chain {longest} of required {count}",
        )
    ]


# -- next to reference ------------------------------------------------------------


def eval_next_to_reference(world: WorldState, params: dict) -> list[CheckResult]:
    mover_color = params.get("mover_color", "red")
    reference_color = params.get("reference_color", "blue")
    max_gap = params.get("max_gap", ADJACENCY_MAX_GAP)
    movers = _blocks(world, mover_color)
    references = _blocks(world, reference_color)
    if not movers or not references:
        return [CheckResult("objects_present", False, "mover or reference missing")]
    a, b = object_aabb(movers[0]), object_aabb(references[0])
    overlap = a.overlaps(b)
    gap_x = max(a.min.x - b.max.x, b.min.x - a.max.x)
    gap_y = max(a.min.y - b.max.y, b.min.y - a.max.y)
    adjacent = (gap_x <= 0 and 0 <= gap_y <= max_gap) or (
        gap_y <= 0 and 0 <= gap_x <= max_gap
    )
    return [
        CheckResult("no_collision", not overlap, f"aabb overlap: {overlap}"),
        CheckResult(
            "adjacent_along_one_axis",
            adjacent,
            f"gap_x {gap_x:.4f} m, gap_y {gap_y:.4f} m, max {max_gap} m",
        ),
    ]


# -- i x j x k structures ----------------------------------------------------------


def structure_cells(dims: tuple[int, int, int], shape: str) -> list[tuple[float, float, int]]:
    """Lattice cells of the target shape, in cell units relative to the origin cell.

    Pyramid layers shrink by one cell per level and sit centered, which puts
    them on half-cell offsets.
    """
    i, j, k = dims
    cells: list[tuple[float, float, int]] = []
    if shape == "pyramid":
        for c in range(k):
            li, lj = i - c, j - c
            if li <= 0 or lj <= 0:
                break
            for b in range(lj):
                for a in range(li):
                    cells.append((a + c / 2.0, b + c / 2.0, c))
    else:  # cube, wall, base: a full cuboid
        for c in range(k):
            for b in range(j):
                for a in range(i):
                    cells.append((float(a), float(b), c))
    return cells


def eval_structure(world: WorldState, params: dict) -> list[CheckResult]:
    dims = tuple(params["dims"])
    shape = params.get("shape", "cuboid")
    block = params.get("block", 0.04)
    gap = params.get("gap", 0.005)
    tol = params.get("cell_tol", CELL_TOL)
    pitch = block + gap

    cells = structure_cells(dims, shape)
    blocks = _blocks(world)
    checks = [
        CheckResult(
            "block_count",
            len(blocks) == len(cells),
            f"{len(blocks)} blocks for {len(cells)} cells",
        )
    ]
    if len(blocks) != len(cells):
        return checks

    min_z = min(b.pose.position.z for b in blocks)
    bottom = [b for b in blocks if abs(b.pose.position.z - min_z) <= tol]
    origin_x = min(b.pose.position.x for b in bottom)
    origin_y = min(b.pose.position.y for b in bottom)
    origin_z = min_z

    assigned: dict[int, int] = {}  # cell index -> block id
    worst = 0.0
    ok = True
    for b in blocks:
        p = b.pose.position
        best_idx, best_err = -1, float("inf")
        for idx, (cx, cy, cz) in enumerate(cells):
            ex = abs(p.x - (origin_x + cx * pitch))
            ey = abs(p.y - (origin_y + cy * pitch))
            ez = abs(p.z - (origin_z + cz * block))
            err = max(ex, ey, ez)
            if err < best_err:
                best_idx, best_err = idx, err
        if best_err > tol or best_idx in assigned:
            ok = False
            break
        assigned[best_idx] = b.id
        worst = max(worst, best_err)
    occupancy_ok = ok and len(assigned) == len(cells)
    checks.append(
        CheckResult(
            "lattice_occupancy",
            occupancy_ok,
            f"worst cell-center error {worst:.4f} m (tol {tol} m)"
            if occupancy_ok
            else "blocks do not match the target cell set",
        )
    )
    return checks


# -- jenga --------------------------------------------------------------------


def eval_jenga(world: WorldState, params: dict) -> list[CheckResult]:
    layers = int(params.get("layers", 4))
    per_layer = int(params.get("per_layer", 3))
    angle_tol = params.get("angle_tol_deg", JENGA_ANGLE_TOL_DEG)
    contact_tol = params.get("contact_tol", CONTACT_TOL)

    blocks = sorted(_blocks(world), key=lambda b: b.pose.position.z)
    checks = [
        CheckResult(
            "block_count",
            len(blocks) == layers * per_layer,
            f"{len(blocks)} blocks for {layers} layers of {per_layer}",
        )
    ]
    if len(blocks) != layers * per_layer:
        return checks

    groups: list[list[TaskObject]] = []
    for b in blocks:
        if groups and abs(b.pose.position.z - groups[-1][0].pose.position.z) <= contact_tol:
            groups[-1].append(b)
        else:
            groups.append([b])
    checks.append(
        CheckResult(
            "layer_grouping",
            len(groups) == layers and all(len(g) == per_layer for g in groups),
            f"layer sizes {[len(g) for g in groups]}",
        )
    )
    if len(groups) != layers or any(len(g) != per_layer for g in groups):
        return checks

    parallel_ok, parallel_measure = True, ""
    for level, group in enumerate(groups):
        angles = [_long_axis_angle(b) for b in group]
        spread = max(_angle_delta_deg(angles[0], a) for a in angles)
        if spread > angle_tol:
            parallel_ok = False
            parallel_measure = f"layer {level} spread {spread:.1f} deg"
            break
    checks.append(CheckResult("layers_parallel", parallel_ok, parallel_measure))

    alternating_ok, alternating_measure = True, ""
    for level in range(1, len(groups)):
        delta = _angle_delta_deg(
            _long_axis_angle(groups[level][0]), _long_axis_angle(groups[level - 1][0])
        )
        if abs(delta - 90.0) > angle_tol:
            alternating_ok = False
            alternating_measure = f"layers {level - 1}->{level} rotated {delta:.1f} deg"
            break
    checks.append(CheckResult("layers_alternate_90deg", alternating_ok, alternating_measure))

    stacked_ok = all(
        any(_rests_on(u, l, contact_tol) for l in groups[level - 1])
        for level in range(1, len(groups))
        for u in groups[level]
    )
    checks.append(CheckResult("layers_stacked", stacked_ok))
    return checks


# -- house ---------------------------------------------------------------------


def _xy_columns(blocks: list[TaskObject], tol: float) -> list[list[TaskObject]]:
    columns: list[list[TaskObject]] = []
    for b in sorted(blocks, key=lambda b: (b.pose.position.x, b.pose.position.y)):
        for col in columns:
            ref = col[0].pose.position
            if abs(b.pose.position.x - ref.x) <= tol and abs(b.pose.position.y - ref.y) <= tol:
                col.append(b)
                break
        else:
            columns.append([b])
    return columns


def eval_house(world: WorldState, params: dict) -> list[CheckResult]:
    tol = params.get("column_tol", COLUMN_TOL)
    contact_tol = params.get("contact_tol", CONTACT_TOL)
    checks: list[CheckResult] = []

    yellows = _blocks(world, "yellow")
    checks.append(CheckResult("base_block_count", len(yellows) == 14, f"{len(yellows)} yellow"))
    if len(yellows) != 14:
        return checks

    columns = _xy_columns(yellows, tol)
    doubles = [c for c in columns if len(c) == 2]
    singles = [c for c in columns if len(c) == 1]
    structure_ok = len(doubles) == 5 and len(singles) == 4
    checks.append(
        CheckResult(
            "base_columns",
            structure_ok,
            f"{len(doubles)} two-high columns, {len(singles)} singles",
        )
    )
    if not structure_ok:
        return checks

    # wall columns share the minimum x; corner stacks share the maximum x
    doubles.sort(key=lambda c: c[0].pose.position.x)
    wall_cols, corner_cols = doubles[:3], doubles[3:]
    wall_x = [c[0].pose.position.x for c in wall_cols]
    corner_x = [c[0].pose.position.x for c in corner_cols]
    wall_ok = (
        max(wall_x) - min(wall_x) <= tol
        and all(
            abs(
                sorted(c[0].pose.position.y for c in wall_cols)[idx + 1]
                - sorted(c[0].pose.position.y for c in wall_cols)[idx]
                - 0.045
            )
            <= tol
            for idx in range(2)
        )
    )
    checks.append(CheckResult("back_wall_1x3x2", wall_ok, f"wall x spread {max(wall_x) - min(wall_x):.4f}"))
    corners_ok = (
        max(corner_x) - min(corner_x) <= tol
        and abs(
            abs(corner_cols[0][0].pose.position.y - corner_cols[1][0].pose.position.y) - 0.08
        )
        <= 2 * tol
        and min(corner_x) - max(wall_x) > 0.05
    )
    checks.append(CheckResult("corner_stacks", corners_ok))

    corner_ys = sorted(c[0].pose.position.y for c in corner_cols)
    lines_ok = True
    for col in singles:
        p = col[0].pose.position
        on_line = any(abs(p.y - y) <= tol for y in corner_ys)
        between = min(wall_x) - tol <= p.x <= max(corner_x) + tol
        if not (on_line and between):
            lines_ok = False
    checks.append(CheckResult("side_lines", lines_ok))

    browns = _blocks(world, "brown")
    roof_base = next(
        (
            o
            for o in browns
            if sorted(o.size)[0] * 10 <= sorted(o.size)[1]
            and sorted(o.size)[0] * 10 <= sorted(o.size)[2]
        ),
        None,
    )
    beam = next(
        (
            o
            for o in browns
            if o is not roof_base
            and abs(sorted(o.size)[0] - sorted(o.size)[1]) < 1e-9
            and sorted(o.size)[2] >= 3 * sorted(o.size)[0]
        ),
        None,
    )
    checks.append(CheckResult("roof_parts_present", roof_base is not None and beam is not None))
    if roof_base is None or beam is None:
        return checks

    yellow_top = max(object_aabb(b).max.z for b in yellows)
    base_box = object_aabb(roof_base)
    base_on_walls = abs(base_box.min.z - yellow_top) <= contact_tol and all(
        base_box.overlaps_xy(object_aabb(col[0])) for col in wall_cols + corner_cols
    )
    checks.append(
        CheckResult(
            "roof_base_above_walls",
            base_on_walls,
            f"base bottom {base_box.min.z:.4f}, wall top {yellow_top:.4f}",
        )
    )

    beam_box = object_aabb(beam)
    beam_on_base = (
        abs(beam_box.min.z - base_box.max.z) <= contact_tol
        and beam_box.overlaps_xy(base_box)
    )
    checks.append(CheckResult("beam_above_roof_base", beam_on_base))

    tiles = [o for o in _blocks(world, "red") if min(o.size) < 0.02]
    checks.append(CheckResult("tile_count", len(tiles) == 6, f"{len(tiles)} tiles"))
    if len(tiles) != 6:
        return checks
    tiles_on_beam = all(
        abs(object_aabb(t).min.z - beam_box.max.z) <= contact_tol
        and object_aabb(t).overlaps_xy(beam_box)
        for t in tiles
    )
    xs = sorted(t.pose.position.x for t in tiles)
    ys = sorted(t.pose.position.y for t in tiles)

    def _cluster(values: list[float]) -> list[float]:
        centers: list[float] = []
        for v in values:
            if not centers or abs(v - centers[-1]) > tol:
                centers.append(v)
        return centers

    rows_of_three = len(_cluster(ys)) == 2 and len(_cluster(xs)) == 3
    checks.append(CheckResult("tiles_atop_beam", tiles_on_beam))
    checks.append(
        CheckResult(
            "tiles_two_rows_of_three",
            rows_of_three,
            f"{len(_cluster(xs))} columns x {len(_cluster(ys))} rows",
        )
    )
    return checks


# -- face -----------------------------------------------------------------------


def eval_face(world: WorldState, params: dict) -> list[CheckResult]:
    outline_count = int(params.get("outline_count", 12))
    radius_tol = params.get("radius_tol", 0.02)

    blocks = _blocks(world)
    rects = [b for b in blocks if max(b.size) / min(b.size) >= 2.0]
    cubes = [b for b in blocks if b not in rects]
    checks = [CheckResult("rectangle_present", len(rects) == 1, f"{len(rects)} rectangles")]
    if len(rects) != 1:
        return checks

    cx = sum(b.pose.position.x for b in cubes) / len(cubes)
    cy = sum(b.pose.position.y for b in cubes) / len(cubes)
    dists = sorted(math.hypot(b.pose.position.x - cx, b.pose.position.y - cy) for b in cubes)
    ring_radius = dists[len(dists) // 2]  # median: eyes are rare and near the center

    outline = [
        b
        for b in cubes
        if abs(math.hypot(b.pose.position.x - cx, b.pose.position.y - cy) - ring_radius)
        <= radius_tol
    ]
    feature_cubes = [b for b in cubes if b not in outline]
    checks.append(
        CheckResult(
            "outline_on_circle",
            len(outline) == outline_count,
            f"{len(outline)} of {outline_count} blocks within r={ring_radius:.3f} +/- {radius_tol}",
        )
    )
    features = feature_cubes + rects
    inside = all(
        math.hypot(o.pose.position.x - cx, o.pose.position.y - cy) < ring_radius - radius_tol / 2
        for o in features
    )
    checks.append(
        CheckResult("features_inside", inside and len(feature_cubes) == 2, f"{len(feature_cubes)} feature blocks")
    )
    return checks


EVALUATORS: dict[str, Callable[[WorldState, dict], list[CheckResult]]] = {
    "tower": eval_tower,
    "next_to_reference": eval_next_to_reference,
    "structure": eval_structure,
    "jenga": eval_jenga,
    "house": eval_house,
    "face": eval_face,
}


def evaluate(evaluator: str, world: WorldState, params: Optional[dict] = None) -> SuccessReport:
    """Run a named evaluator; total over all worlds."""
    picks = sum(1 for a in world.action_log if a.kind == "pick_place")
    fn = EVALUATORS.get(evaluator)
    if fn is None:
        return SuccessReport(
            False, [CheckResult("evaluator_known", False, f"unknown evaluator {evaluator!r}")], picks
        )
    try:
        checks = fn(world, params or {})
    except Exception as exc:  # totality: an evaluator bug is a failed check, not a crash
        checks = [CheckResult("evaluator_total", False, f"internal error: {exc}")]
    return SuccessReport(all(c.ok for c in checks), checks, picks)
