"""The seven-variant stack-blocks curriculum: acquisition plus six extensions.

Each variant is one scripted session. The skill body grows strictly by
defaulted parameters, so every earlier example keeps executing unchanged; the
regression gate verifies that at each acceptance. A deliberately breaking
candidate (default sideways shift) is provided for rejection tests.
"""

from __future__ import annotations

from ..skillscript import format_program, parse


def _canon(source: str) -> str:
    return format_program(parse(source))


_DOC_V1 = "Stacks a sequence of blocks on top of each other starting from a specified pose."
_DOC_V4 = (
    "Stacks a sequence of blocks on top of each other starting from a specified pose. "
    "The order can be 'given', 'large_to_small' or 'small_to_large'."
)
_DOC_V6 = (
    _DOC_V4 + " A nonzero zigzag_shift offsets every other block sideways by that amount."
)

SKILL_V1 = _canon(
    f'''
skill stack_blocks(blocks: list<object>, start_pose: pose) doc "{_DOC_V1}" {{
    let current_pose = start_pose
    for block in blocks {{
        put_first_on_second(get_object_pose(block), current_pose)
        let block_size = get_object_size(block)
        current_pose = pose(point(current_pose.position.x, current_pose.position.y, current_pose.position.z + block_size[2]), current_pose.rotation)
    }}
}}
'''
)

SKILL_V4 = _canon(
    f'''
skill stack_blocks(blocks: list<object>, start_pose: pose, order: string = "given") doc "{_DOC_V4}" {{
    let chosen = blocks
    if order != "given" {{
        let volumes = []
        for b in blocks {{
            let s = get_object_size(b)
            volumes = append(volumes, s[0] * s[1] * s[2])
        }}
        chosen = sorted_by(blocks, volumes)
        if order == "large_to_small" {{
            chosen = reversed(chosen)
        }}
    }}
    let current_pose = start_pose
    for block in chosen {{
        put_first_on_second(get_object_pose(block), current_pose)
        let block_size = get_object_size(block)
        current_pose = pose(point(current_pose.position.x, current_pose.position.y, current_pose.position.z + block_size[2]), current_pose.rotation)
    }}
}}
'''
)


def _v6_body(default_shift: float) -> str:
    return _canon(
        f'''
skill stack_blocks(blocks: list<object>, start_pose: pose, order: string = "given", zigzag_shift: number = {default_shift}) doc "{_DOC_V6}" {{
    let chosen = blocks
    if order != "given" {{
        let volumes = []
        for b in blocks {{
            let s = get_object_size(b)
            volumes = append(volumes, s[0] * s[1] * s[2])
        }}
        chosen = sorted_by(blocks, volumes)
        if order == "large_to_small" {{
            chosen = reversed(chosen)
        }}
    }}
    let current_pose = start_pose
    let index = 0
    for block in chosen {{
        let side = 0
        if zigzag_shift != 0 and index % 2 == 1 {{
            side = zigzag_shift
        }}
        let target = pose(point(current_pose.position.x, current_pose.position.y + side, current_pose.position.z), current_pose.rotation)
        put_first_on_second(get_object_pose(block), target)
        let block_size = get_object_size(block)
        current_pose = pose(point(current_pose.position.x, current_pose.position.y, current_pose.position.z + block_size[2]), current_pose.rotation)
        index = index + 1
    }}
}}
'''
)


SKILL_V6 = _v6_body(0.0)
# breaking candidate: shifts every other block by default, changing all prior towers
SKILL_BREAKING = _v6_body(0.01)

_CENTER_STACK_FLAT = """
let blocks = get_objects()
let middle = workspace_middle()
stack_blocks(blocks, pose(point(middle.x, middle.y, 0), rotation_from_euler_z(0)))
"""

_SETUP_FOUR_COLORS = _canon(
    """
add_block("red")
add_block("green")
add_block("blue")
add_block("yellow")
"""
)

_SETUP_MIXED_SIZES = _canon(
    """
add_block("red", [0.06, 0.06, 0.06])
add_block("green", [0.05, 0.05, 0.05])
add_block("blue", [0.04, 0.04, 0.04])
add_block("yellow", [0.03, 0.03, 0.03])
"""
)

_SETUP_TWO_COLORS = _canon(
    """
add_block("red")
add_block("red")
add_block("green")
add_block("green")
"""
)


def _variant(
    instruction: str,
    setup_code: str,
    skill_source: str,
    flat_source: str,
    header_response: str = "",
) -> dict:
    """One scripted session spec: setup, then skill+code, then an accept."""
    program = skill_source.rstrip() + "\n\n" + _canon(flat_source).rstrip() + "\n"
    agent_script = []
    if header_response:
        agent_script.append({"expect_kind": "skill_header", "response_text": header_response})
    agent_script.append({"expect_kind": "setup_code", "response_text": setup_code})
    agent_script.append({"expect_kind": "skill_plus_code", "response_text": program})
    return {
        "skill_name": "stack_blocks",
        "seed_offset": 0,
        "instruction": instruction,
        "agent_script": agent_script,
        "feedback": {
            "tasks": [
                {
                    "instruction": instruction,
                    "setup_description": "a few colored blocks on the table",
                    "reviews": [{"kind": "accept"}],
                }
            ]
        },
    }


HEADER_RESPONSE = f'skill stack_blocks(blocks: list<object>, start_pose: pose) doc "{_DOC_V1}" {{\n}}\n'


def curriculum_variants() -> list[dict]:
    """The seven-variant teaching ladder, in curriculum order."""
    variants = [
        _variant(
            "stack 4 blocks corner-to-corner at the workspace center",
            _SETUP_FOUR_COLORS,
            SKILL_V1,
            _CENTER_STACK_FLAT,
            header_response=HEADER_RESPONSE,
        ),
        _variant(
            "stack 4 blocks with a 45 degree rotation at the back-right table corner",
            _SETUP_FOUR_COLORS,
            SKILL_V1,
            """
let blocks = get_objects()
let corner = workspace_back_right()
stack_blocks(blocks, pose(point(corner.x + 0.06, corner.y - 0.06, 0), rotation_from_euler_z(pi / 4)))
""",
        ),
        _variant(
            "stack blocks by color, with the yellow block on top",
            _SETUP_FOUR_COLORS,
            SKILL_V1,
            """
let blocks = get_objects()
let ordered = []
for b in blocks {
    if get_object_color(b) != "yellow" {
        ordered = append(ordered, b)
    }
}
for b in blocks {
    if get_object_color(b) == "yellow" {
        ordered = append(ordered, b)
    }
}
let middle = workspace_middle()
stack_blocks(ordered, pose(point(middle.x, middle.y, 0), rotation_from_euler_z(0)))
""",
        ),
        _variant(
            "stack blocks from largest to smallest",
            _SETUP_MIXED_SIZES,
            SKILL_V4,
            """
let blocks = get_objects()
let middle = workspace_middle()
stack_blocks(blocks, pose(point(middle.x, middle.y, 0), rotation_from_euler_z(0)), "large_to_small")
""",
        ),
        _variant(
            "stack blocks from smallest to largest",
            _SETUP_MIXED_SIZES,
            SKILL_V4,
            """
let blocks = get_objects()
let middle = workspace_middle()
stack_blocks(blocks, pose(point(middle.x, middle.y, 0), rotation_from_euler_z(0)), "small_to_large")
""",
        ),
        _variant(
            "stack blocks into a zigzag tower",
            _SETUP_FOUR_COLORS,
            SKILL_V6,
            """
let blocks = get_objects()
let middle = workspace_middle()
stack_blocks(blocks, pose(point(middle.x, middle.y, 0), rotation_from_euler_z(0)), "given", 0.01)
""",
        ),
        _variant(
            "build two towers sorted by color",
            _SETUP_TWO_COLORS,
            SKILL_V6,
            """
let blocks = get_objects()
let reds = []
let greens = []
for b in blocks {
    if get_object_color(b) == "red" {
        reds = append(reds, b)
    }
    if get_object_color(b) == "green" {
        greens = append(greens, b)
    }
}
let middle = workspace_middle()
stack_blocks(reds, pose(point(middle.x, middle.y - 0.05, 0), rotation_from_euler_z(0)))
stack_blocks(greens, pose(point(middle.x, middle.y + 0.05, 0), rotation_from_euler_z(0)))
""",
        ),
    ]
    return variants


def breaking_variant() -> dict:
    """An extension whose candidate silently changes default stacking behavior."""
    return _variant(
        "stack blocks with a slight offset by default",
        _SETUP_FOUR_COLORS,
        SKILL_BREAKING,
        _CENTER_STACK_FLAT,
    )


def curriculum_specs(base_seed: int = 9000) -> list[dict]:
    """Self-contained run specs: one acquisition then six extension sessions."""
    specs = []
    for index, variant in enumerate(curriculum_variants()):
        specs.append(
            {
                "mode": "learn" if index == 0 else "extend",
                "skill_description": "stack blocks at a given pose" if index == 0 else "",
                "skill_name": "stack_blocks",
                "seed": base_seed + index * 17,
                "agent_script": variant["agent_script"],
                "feedback": variant["feedback"],
            }
        )
    return specs


def breaking_spec(base_seed: int = 9000) -> dict:
    variant = breaking_variant()
    return {
        "mode": "extend",
        "skill_name": "stack_blocks",
        "seed": base_seed + 777,
        "agent_script": variant["agent_script"],
        "feedback": variant["feedback"],
    }
