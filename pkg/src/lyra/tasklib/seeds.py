"""Memory seeding: the builtin skills plus the few-shot example corpus.

Every seeded example carries an initial-state snapshot and a rollout digest
verified at seeding time by replaying the stored code against the stored
library. A digest mismatch aborts seeding: a memory whose examples cannot
reproduce themselves would poison every later regression check.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from ..memory import MemoryStore
from ..skillscript import execute, parse
from ..world import WorldState, Workspace, outcome_digest, WorldSnapshot
from . import plans
from .scenes import colored_blocks_scene, setup_scene
from .skills import builtin_library


class SeedingError(Exception):
    """A seed example failed to re-execute to its stored digest."""


@dataclass(frozen=True)
class SeedExample:
    instruction: str
    code: str
    scene: Callable[[WorldState, int], None]
    seed: int


def _scene_stack(world: WorldState, seed: int) -> None:
    setup_scene("stack_blocks", world, seed)


def _scene_yellow_green(world: WorldState, seed: int) -> None:
    colored_blocks_scene(world, seed, ("green", "yellow"))


def _scene_cube(world: WorldState, seed: int) -> None:
    setup_scene("structure", world, seed, {"dims": (2, 2, 2), "shape": "cube"})


def _scene_pyramid(world: WorldState, seed: int) -> None:
    setup_scene("structure", world, seed, {"dims": (3, 2, 2), "shape": "pyramid"})


def _scene_red_blue(world: WorldState, seed: int) -> None:
    colored_blocks_scene(world, seed, ("red", "blue"))


def _scene_blue_green(world: WorldState, seed: int) -> None:
    colored_blocks_scene(world, seed, ("blue", "green"))


def _scene_single_red(world: WorldState, seed: int) -> None:
    colored_blocks_scene(world, seed, ("red",))


def _scene_mixed_sizes(world: WorldState, seed: int) -> None:
    colored_blocks_scene(
        world,
        seed,
        ("red", "green", "blue"),
        sizes=[(0.08, 0.08, 0.08), (0.04, 0.04, 0.04), (0.02, 0.02, 0.02)],
        edge_margin=0.15,
    )


def _scene_six_blocks(world: WorldState, seed: int) -> None:
    colored_blocks_scene(
        world,
        seed,
        ("red", "green", "blue", "yellow", "orange", "purple"),
        clear_half=0.16,
        edge_margin=0.04,
    )


def seed_examples() -> list[SeedExample]:
    """The nine few-shot exemplars the agent starts from."""
    return [
        SeedExample("stack blocks", plans.plan_stack_blocks(), _scene_stack, 101),
        SeedExample(
            "put the yellow block next to the green block",
            plans.plan_put_next_to("yellow", "green"),
            _scene_yellow_green,
            102,
        ),
        SeedExample(
            "build a 2 x 2 x 2 cube with 8 blocks",
            plans.plan_structure((2, 2, 2), "cube"),
            _scene_cube,
            103,
        ),
        SeedExample(
            "build a 3 x 2 x 2 pyramid with 8 blocks",
            plans.plan_structure((3, 2, 2), "pyramid"),
            _scene_pyramid,
            104,
        ),
        SeedExample(
            "put the red block in the middle of the workspace",
            plans.plan_put_in_middle("red"),
            _scene_red_blue,
            105,
        ),
        SeedExample(
            "rotate the blue block by 45 degrees",
            plans.plan_rotate_block("blue", 45),
            _scene_blue_green,
            106,
        ),
        SeedExample(
            "move the end effector to the center of the workspace",
            plans.plan_move_ee_to_center(),
            _scene_single_red,
            107,
        ),
        SeedExample(
            "move the smallest block 10cm to the left",
            plans.plan_move_smallest_left(),
            _scene_mixed_sizes,
            108,
        ),
        SeedExample(
            "arrange the blocks around a circle", plans.plan_arrange_circle(), _scene_six_blocks, 109
        ),
    ]


def seed_memory(store: MemoryStore, workspace: Optional[Workspace] = None) -> None:
    """Insert the builtin skills and the verified few-shot examples."""
    workspace = workspace or Workspace()
    for skill in builtin_library():
        if store.latest_accepted_skill(skill.name) is None:
            store.upsert_skill(skill)
    library = store.library_view()

    for example in seed_examples():
        world = WorldState(workspace, rng_seed=example.seed)
        example.scene(world, example.seed)
        snapshot = world.snapshot()
        trace = execute(parse(example.code), world, library=library)
        if trace.error is not None:
            raise SeedingError(
                f"seed example {example.instruction!r} failed to execute: "
                f"{trace.error.render()}"
            )
        digest = outcome_digest(world)
        store.add_example(example.instruction, example.code, digest, snapshot.encode())

    # verification pass: every stored example must replay to its stored digest
    for record in store.examples:
        world = WorldSnapshot.decode(record.setup_snapshot).restore()
        trace = execute(parse(record.code), world, library=store.library_view())
        if trace.error is not None or outcome_digest(world) != record.outcome_digest:
            raise SeedingError(
                f"stored example {record.instruction!r} does not replay to its digest"
            )
