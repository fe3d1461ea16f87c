"""Flat task plans for the benchmark tasks and the few-shot seed examples.

Every plan is flat code over the builtin library; none defines a skill. Plans
are emitted in canonical formatting so they can be stored in memory verbatim.
"""

from __future__ import annotations

from ..skillscript import format_program, parse


def _canonical(source: str) -> str:
    return format_program(parse(source))


def plan_build_house() -> str:
    return _canonical("build_house()")


def plan_stack_blocks() -> str:
    return _canonical(
        """
let blocks = get_objects()
let middle = workspace_middle()
stack_blocks(blocks, pose(point(middle.x, middle.y, 0), rotation_from_euler_z(0)))
"""
    )


def plan_next_to_reference() -> str:
    return _canonical(
        """
let blue_blocks = get_blocks_by_color("blue")
let red_blocks = get_blocks_by_color("red")
move_block_next_to_reference(red_blocks[0], blue_blocks[0], "y")
"""
    )


def plan_structure(dims: tuple[int, int, int], shape: str) -> str:
    """Cuboids are one builtin call; pyramids stack shrinking centered layers."""
    i, j, k = dims
    if shape != "pyramid":
        return _canonical(
            f"""
let blocks = get_objects()
let middle = workspace_middle()
let start = pose(point(middle.x, middle.y, 0), rotation_from_euler_z(0))
build_structure_from_blocks(blocks, [{i}, {j}, {k}], start)
"""
        )
    lines = [
        "let blocks = get_objects()",
        "let middle = workspace_middle()",
        "let block_index = 0",
    ]
    for c in range(k):
        li, lj = i - c, j - c
        if li <= 0 or lj <= 0:
            break
        count = li * lj
        offset = c * 0.045 / 2.0
        lines.append(
            f"build_structure_from_blocks(blocks[block_index:block_index + {count}], "
            f"[{li}, {lj}, 1], pose(point(middle.x + {offset}, middle.y + {offset}, 0), "
            f"rotation_from_euler_z(0)))"
        )
        lines.append(f"block_index = block_index + {count}")
    return _canonical("\n".join(lines))


def plan_jenga(layers: int = 4, per_layer: int = 3, alternating: bool = True) -> str:
    rotation = "(layer % 2) * (pi / 2)" if alternating else "0"
    return _canonical(
        f"""
let blocks = get_objects()
let middle = workspace_middle()
for layer in range({layers}) {{
    let rot = rotation_from_euler_z({rotation})
    let first = blocks[layer * {per_layer}]
    let first_pos = point_at_distance_and_rotation(point(middle.x, middle.y, 0), rot, 0.045, point(0, 1, 0))
    put_first_on_second(get_object_pose(first), pose(first_pos, rot))
    move_block_next_to_reference(blocks[layer * {per_layer} + 1], first, "-y")
    move_block_next_to_reference(blocks[layer * {per_layer} + 2], blocks[layer * {per_layer} + 1], "-y")
}}
"""
    )


def plan_face(outline_count: int = 12, radius: float = 0.10) -> str:
    return _canonical(
        f"""
let outline = get_blocks_by_color("yellow")
let eyes = get_blocks_by_color("blue")
let mouth = get_blocks_by_color("red")
let middle = workspace_middle()
let center = point(middle.x, middle.y, 0)
for i in range({outline_count}) {{
    let rot = rotation_from_euler_z(i * (2 * pi / {outline_count}))
    let target = point_at_distance_and_rotation(center, rot, {radius})
    put_first_on_second(get_object_pose(outline[i]), pose(target, rot))
}}
put_first_on_second(get_object_pose(eyes[0]), pose(point(center.x + 0.03, center.y - 0.025, 0), rotation_from_euler_z(0)))
put_first_on_second(get_object_pose(eyes[1]), pose(point(center.x + 0.03, center.y + 0.025, 0), rotation_from_euler_z(0)))
put_first_on_second(get_object_pose(mouth[0]), pose(point(center.x - 0.04, center.y, 0), rotation_from_euler_z(pi / 2)))
"""
    )


# -- few-shot seed example plans --------------------------------------------------


def plan_put_next_to(mover_color: str, reference_color: str) -> str:
    return _canonical(
        f"""
let movers = get_blocks_by_color("{mover_color}")
let references = get_blocks_by_color("{reference_color}")
move_block_next_to_reference(movers[0], references[0], "y")
"""
    )


def plan_put_in_middle(color: str) -> str:
    return _canonical(
        f"""
let blocks = get_blocks_by_color("{color}")
let middle = workspace_middle()
put_first_on_second(get_object_pose(blocks[0]), pose(point(middle.x, middle.y, 0), rotation_from_euler_z(0)))
"""
    )


def plan_rotate_block(color: str, degrees: float) -> str:
    return _canonical(
        f"""
let blocks = get_blocks_by_color("{color}")
let current = get_object_pose(blocks[0])
let turned = compose_rotations(current.rotation, rotation_from_euler_z({degrees} * pi / 180))
put_first_on_second(current, pose(current.position, turned))
"""
    )


def plan_move_ee_to_center() -> str:
    return _canonical(
        """
let middle = workspace_middle()
move_end_effector_to(pose(point(middle.x, middle.y, 0.3), rotation_from_euler_z(0)))
"""
    )


def plan_move_smallest_left(distance: float = 0.10) -> str:
    return _canonical(
        f"""
let blocks = get_blocks_by_color()
let volumes = []
for b in blocks {{
    let s = get_object_size(b)
    volumes = append(volumes, s[0] * s[1] * s[2])
}}
let smallest = sorted_by(blocks, volumes)[0]
let current = get_object_pose(smallest)
put_first_on_second(current, pose(point(current.position.x, current.position.y - {distance}, current.position.z), current.rotation))
"""
    )


def plan_arrange_circle(radius: float = 0.10) -> str:
    return _canonical(
        f"""
let blocks = get_objects()
let middle = workspace_middle()
let center = point(middle.x, middle.y, 0)
let n = len(blocks)
for i in range(n) {{
    let rot = rotation_from_euler_z(i * (2 * pi / n))
    let target = point_at_distance_and_rotation(center, rot, {radius})
    put_first_on_second(get_object_pose(blocks[i]), pose(target, rot))
}}
"""
    )
