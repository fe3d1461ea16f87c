"""Scripted run specs used by tests and the bundled replay fixtures.

These author deterministic sessions with known correction counts, so the
metric plumbing can be verified against hand-counted values.
"""

from __future__ import annotations

from ..skillscript import format_program, parse
from . import plans


def _canon(source: str) -> str:
    return format_program(parse(source))


NOOP_MOVE = _canon(
    """
let middle = workspace_middle()
move_end_effector_to(pose(point(middle.x, middle.y, 0.3), rotation_from_euler_z(0)))
"""
)

SETUP_TWO_BLOCKS = _canon(
    """
add_block("red")
add_block("blue")
"""
)


def corrections_then_accept_spec(
    instruction: str, corrections: list[str], seed: int, plan: str = NOOP_MOVE
) -> dict:
    """A solve session that takes len(corrections) feedback rounds, then accepts."""
    rounds = len(corrections) + 1
    return {
        "mode": "solve",
        "instruction": instruction,
        "seed": seed,
        "setup_description": "a red block and a blue block",
        "agent_script": [
            {"expect_kind": "setup_code", "response_text": SETUP_TWO_BLOCKS},
        ]
        + [{"expect_kind": "task_code", "response_text": plan} for _ in range(rounds)],
        "feedback": {
            "tasks": [
                {
                    "instruction": instruction,
                    "reviews": [{"kind": "correction", "text": text} for text in corrections]
                    + [{"kind": "accept"}],
                }
            ]
        },
    }


def kitchen_noc_specs(base_seed: int = 3100) -> list[dict]:
    """Four kitchen-style sessions with correction counts 2, 2, 4, 3."""
    tasks = [
        ("move the kettle onto the stove", 2),
        ("open the slide cabinet", 2),
        ("open the hinge cabinet", 4),
        ("open the microwave door", 3),
    ]
    specs = []
    for index, (instruction, count) in enumerate(tasks):
        corrections = [f"adjust step {i + 1}" for i in range(count)]
        specs.append(
            corrections_then_accept_spec(instruction, corrections, base_seed + index)
        )
    return specs


def capped_failure_spec(seed: int = 3200, max_iterations: int = 10) -> dict:
    """A session the reviewer never accepts; it fails at the iteration cap."""
    return {
        "mode": "solve",
        "instruction": "balance the block on one corner",
        "seed": seed,
        "setup_description": "a red block and a blue block",
        "config": {"max_iterations": max_iterations},
        "agent_script": [
            {"expect_kind": "setup_code", "response_text": SETUP_TWO_BLOCKS},
        ]
        + [
            {"expect_kind": "task_code", "response_text": NOOP_MOVE}
            for _ in range(max_iterations)
        ],
        "feedback": {
            "tasks": [
                {
                    "instruction": "balance the block on one corner",
                    "reviews": [
                        {"kind": "correction", "text": f"still wrong, round {i + 1}"}
                        for i in range(max_iterations)
                    ],
                }
            ]
        },
    }


def house_solve_spec(seed: int = 4242) -> dict:
    """Seeded memory, the house scene, the seed plan, judged by the evaluator."""
    return {
        "mode": "solve",
        "instruction": "build a house",
        "memory": "seeded",
        "seed": seed,
        "scene": {"name": "house", "seed": seed},
        "evaluator": "house",
        "agent_script": [
            {"expect_kind": "task_code", "response_text": plans.plan_build_house()}
        ],
    }


def stack_solve_spec(seed: int = 4243) -> dict:
    return {
        "mode": "solve",
        "instruction": "stack all blocks into a tower",
        "memory": "seeded",
        "seed": seed,
        "scene": {"name": "stack_blocks", "seed": seed},
        "evaluator": "tower",
        "evaluator_params": {"count": 4},
        "agent_script": [
            {"expect_kind": "task_code", "response_text": plans.plan_stack_blocks()}
        ],
    }


def hinted_solve_spec(seed: int = 4244) -> dict:
    """A solve run whose hint forces jenga-related records into the prompt."""
    return {
        "mode": "solve",
        "instruction": "build a tall tower with alternating layers",
        "memory": "seeded",
        "seed": seed,
        "hint": "stack blocks",
        "scene": {"name": "jenga", "seed": seed},
        "evaluator": "jenga",
        "agent_script": [
            {"expect_kind": "task_code", "response_text": plans.plan_jenga()}
        ],
    }


def replay_fixture_specs() -> list[tuple[str, dict]]:
    """The three bundled transcripts `lyra replay` is verified against."""
    return [
        ("house_solve", house_solve_spec()),
        ("stack_solve", stack_solve_spec()),
        ("kettle_noc2", kitchen_noc_specs()[0]),
    ]
