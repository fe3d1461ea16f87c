"""Task library: seed skills, scenes, evaluators, seeding, suite."""

from __future__ import annotations

import pytest

from lyra.geometry import Point3D, Pose
from lyra.memory import MemoryStore
from lyra.skillscript import call_graph, execute, parse, reachable
from lyra.tasklib import (
    BUILTIN_SKILL_NAMES,
    builtin_library,
    builtin_library_map,
    evaluate,
    seed_examples,
    seed_memory,
    setup_scene,
    skill_source,
    structure_block_count,
    structure_cells,
)
from lyra.tasklib import plans
from lyra.tasklib.suite import load_suite, run_suite
from lyra.world import WorldSnapshot, WorldState, outcome_digest

LIBRARY = builtin_library_map()

# the known skill-dependency tree: who calls whom, among skills
SKILL_TREE_EDGES = {
    "build_house": {
        "build_house_base",
        "identify_roof_tiles",
        "identify_beam_block",
        "identify_roof_base",
        "get_blocks_by_color",
        "assemble_roof",
        "make_line_with_blocks",
    },
    "build_house_base": {
        "stack_blocks",
        "make_line_of_blocks_next_to",
        "build_structure_from_blocks",
    },
    "assemble_roof": {"place_roof_tiles"},
    "build_structure_from_blocks": {"make_line_with_blocks"},
    "place_roof_tiles": {"move_block_next_to_reference"},
    "make_line_of_blocks_next_to": {"move_block_next_to_reference"},
    "make_line_with_blocks": {"move_block_next_to_reference"},
    "get_blocks_by_color": set(),
    "identify_roof_tiles": set(),
    "identify_beam_block": set(),
    "identify_roof_base": set(),
    "stack_blocks": set(),
    "move_block_next_to_reference": set(),
}

# primitive edges shown in the dependency tree (a subset of the true call graph)
PRIMITIVE_TREE_EDGES = {
    "build_house": {"get_object_pose"},
    "build_house_base": {"get_object_pose", "get_object_size"},
    "identify_roof_tiles": {"get_object_color", "get_object_size"},
    "identify_beam_block": {"get_object_color", "get_object_size"},
    "identify_roof_base": {"get_object_color", "get_object_size"},
    "get_blocks_by_color": {"get_objects"},
    "assemble_roof": {"get_object_pose", "put_first_on_second"},
    "build_structure_from_blocks": {"get_object_size"},
    "place_roof_tiles": {"get_object_pose", "put_first_on_second"},
    "stack_blocks": {"get_object_pose", "put_first_on_second", "get_object_size"},
    "move_block_next_to_reference": {
        "get_object_pose",
        "put_first_on_second",
        "get_object_size",
    },
}


def full_library_program_graph() -> dict[str, tuple[str, ...]]:
    source = "\n".join(skill_source(name) for name in BUILTIN_SKILL_NAMES)
    return call_graph(parse(source))


# -- library structure ----------------------------------------------------------


def test_library_has_thirteen_skills() -> None:
    library = builtin_library()
    assert len(library) == 13
    assert {s.name for s in library} == set(BUILTIN_SKILL_NAMES)


def test_skill_to_skill_edges_match_tree_exactly() -> None:
    graph = full_library_program_graph()
    names = set(BUILTIN_SKILL_NAMES)
    for name in names:
        got = {c for c in graph[name] if c in names}
        assert got == SKILL_TREE_EDGES[name], name


def test_primitive_tree_edges_are_present() -> None:
    graph = full_library_program_graph()
    for name, primitives in PRIMITIVE_TREE_EDGES.items():
        assert primitives <= set(graph[name]), name


def test_seed_plan_closure_from_build_house() -> None:
    graph = call_graph(parse(skill_source("build_house")), LIBRARY)
    reached = reachable(graph, ["build_house"])
    skill_names = {n for n in reached if n in set(BUILTIN_SKILL_NAMES)}
    for name in skill_names:
        assert name in LIBRARY


def test_default_gap_constant_everywhere() -> None:
    for name in (
        "move_block_next_to_reference",
        "make_line_of_blocks_next_to",
        "make_line_with_blocks",
        "build_structure_from_blocks",
    ):
        skill = LIBRARY[name]
        gap = next(p for p in skill.params if p.name == "gap")
        assert gap.default is not None and gap.default.value == 0.005, name


def test_move_block_rejects_bad_axis() -> None:
    world = WorldState(rng_seed=4)
    a = world.add_block("red")
    b = world.add_block("blue")
    program = parse(f"""
let objs = get_objects()
move_block_next_to_reference(objs[0], objs[1], "q", 0.005)
""")
    trace = execute(program, world, library=LIBRARY)
    assert trace.error is not None
    assert trace.error.type == "SkillRaised"
    assert trace.error.message == "Axis must be either 'x', '-x', 'y', or '-y'."


def test_place_roof_tiles_requires_exactly_six() -> None:
    world = WorldState(rng_seed=4)
    for _ in range(5):
        world.add_object("plate", "red", (0.04, 0.04, 0.012))
    program = parse(
        """
let tiles = get_objects()
place_roof_tiles(tiles, pose(workspace_middle(), rotation_from_euler_z(0)))
"""
    )
    trace = execute(program, world, library=LIBRARY)
    assert trace.error is not None
    assert trace.error.message == "There must be exactly six roof tiles"


def test_build_house_raises_without_fourteen_base_blocks() -> None:
    world = WorldState(rng_seed=4)
    world.add_block("yellow")
    trace = execute(parse("build_house()"), world, library=LIBRARY)
    assert trace.error is not None
    assert trace.error.message == "Not enough blocks to build the house"


# -- scenes --------------------------------------------------------------------


def test_stack_scene_census() -> None:
    world = WorldState(rng_seed=11)
    setup_scene("stack_blocks", world, 11)
    blocks = world.get_objects()
    assert len(blocks) == 4
    assert {b.color for b in blocks} == {"red", "green", "blue", "yellow"}
    assert all(b.size == (0.04, 0.04, 0.04) for b in blocks)


def test_next_to_scene_census() -> None:
    world = WorldState(rng_seed=12)
    setup_scene("next_to_reference", world, 12)
    sizes = {o.color: o.size for o in world.get_objects()}
    assert sizes == {"red": (0.08, 0.08, 0.08), "blue": (0.08, 0.08, 0.08)}


def test_house_scene_census() -> None:
    world = WorldState(rng_seed=13)
    setup_scene("house", world, 13)
    objs = world.get_objects()
    yellows = [o for o in objs if o.color == "yellow"]
    tiles = [o for o in objs if o.color == "red" and min(o.size) < 0.02]
    browns = [o for o in objs if o.color == "brown"]
    assert len(yellows) == 14
    assert len(tiles) == 6
    assert all(t.object_type == "plate" for t in tiles)
    beams = [o for o in browns if sorted(o.size)[2] >= 3 * sorted(o.size)[0] and abs(sorted(o.size)[0] - sorted(o.size)[1]) < 1e-12]
    bases = [
        o
        for o in browns
        if sorted(o.size)[0] * 10 <= sorted(o.size)[1] and sorted(o.size)[0] * 10 <= sorted(o.size)[2]
    ]
    assert len(browns) == 2 and len(beams) == 1 and len(bases) == 1


def test_structure_scene_block_counts() -> None:
    for dims, shape, expected in [
        ((2, 2, 2), "cube", 8),
        ((3, 2, 2), "pyramid", 8),
        ((4, 3, 3), "pyramid", 20),
        ((1, 3, 3), "wall", 9),
        ((4, 4, 1), "base", 16),
    ]:
        assert structure_block_count(dims, shape) == expected
        world = WorldState(rng_seed=14)
        setup_scene("structure", world, 14, {"dims": dims, "shape": shape})
        assert len(world.get_objects()) == expected


def test_scene_determinism() -> None:
    def build() -> str:
        world = WorldState(rng_seed=21)
        setup_scene("jenga", world, 21)
        return world.snapshot().encode()

    assert build() == build()


# -- evaluators -----------------------------------------------------------------


def run_plan(scene: str, scene_params: dict, plan: str, seed: int = 33) -> WorldState:
    world = WorldState(rng_seed=seed)
    setup_scene(scene, world, seed, scene_params)
    trace = execute(parse(plan), world, library=LIBRARY)
    assert trace.error is None, trace.error
    return world


def test_tower_evaluator_accepts_seed_solution() -> None:
    world = run_plan("stack_blocks", {}, plans.plan_stack_blocks())
    report = evaluate("tower", world, {"count": 4})
    assert report.success
    assert report.primitive_count == 4


def test_jenga_seed_passes_and_parallel_fails() -> None:
    good = run_plan("jenga", {}, plans.plan_jenga())
    assert evaluate("jenga", good, {}).success
    bad = run_plan("jenga", {}, plans.plan_jenga(alternating=False))
    report = evaluate("jenga", bad, {})
    assert not report.success
    failed = {c.name for c in report.failed_checks()}
    assert failed == {"layers_alternate_90deg"}


def test_house_seed_passes_with_over_twenty_primitives() -> None:
    world = run_plan("house", {}, plans.plan_build_house())
    report = evaluate("house", world, {})
    assert report.success
    assert report.primitive_count >= 20


def test_face_seed_passes() -> None:
    world = run_plan("face", {}, plans.plan_face())
    assert evaluate("face", world, {}).success


def test_next_to_seed_passes() -> None:
    world = run_plan("next_to_reference", {}, plans.plan_next_to_reference())
    assert evaluate("next_to_reference", world, {}).success


STRUCTURES = [
    ((2, 2, 2), "cube"),
    ((3, 2, 2), "pyramid"),
    ((4, 3, 3), "pyramid"),
    ((1, 3, 3), "wall"),
    ((4, 4, 1), "base"),
]


@pytest.mark.parametrize("dims,shape", STRUCTURES)
def test_structure_seed_solutions_pass(dims, shape) -> None:
    world = run_plan(
        "structure", {"dims": dims, "shape": shape}, plans.plan_structure(dims, shape)
    )
    report = evaluate("structure", world, {"dims": dims, "shape": shape})
    assert report.success, report.checks


def test_structure_evaluator_rejects_wrong_shape() -> None:
    world = run_plan("structure", {"dims": (2, 2, 2), "shape": "cube"}, plans.plan_structure((2, 2, 2), "cube"))
    report = evaluate("structure", world, {"dims": (3, 2, 2), "shape": "pyramid"})
    assert not report.success


def structure_oracle(world: WorldState, dims, shape, block=0.04, gap=0.005, tol=0.01) -> bool:
    """Independent check: search all block-to-cell bijections with backtracking."""
    cells = structure_cells(dims, shape)
    blocks = [o for o in world.objects if o.object_type in ("block", "plate")]
    if len(blocks) != len(cells):
        return False
    pitch = block + gap
    min_z = min(b.pose.position.z for b in blocks)
    bottom = [b for b in blocks if abs(b.pose.position.z - min_z) <= tol]
    ox = min(b.pose.position.x for b in bottom)
    oy = min(b.pose.position.y for b in bottom)
    oz = min_z

    def feasible(block_obj, cell) -> bool:
        cx, cy, cz = cell
        p = block_obj.pose.position
        return (
            abs(p.x - (ox + cx * pitch)) <= tol
            and abs(p.y - (oy + cy * pitch)) <= tol
            and abs(p.z - (oz + cz * block)) <= tol
        )

    used = [False] * len(cells)

    def assign(index: int) -> bool:
        if index == len(blocks):
            return True
        for cell_index, cell in enumerate(cells):
            if not used[cell_index] and feasible(blocks[index], cell):
                used[cell_index] = True
                if assign(index + 1):
                    return True
                used[cell_index] = False
        return False

    return assign(0)


def small_structures():
    return [(dims, shape) for dims, shape in STRUCTURES if structure_block_count(dims, shape) <= 12] + [
        ((2, 2, 3), "cuboid"),
        ((3, 2, 1), "cuboid"),
        ((2, 2, 2), "pyramid"),
    ]


@pytest.mark.parametrize("dims,shape", small_structures())
def test_structure_evaluator_agrees_with_bijection_oracle(dims, shape) -> None:
    count = structure_block_count(dims, shape)
    assert count <= 12
    world = run_plan(
        "structure",
        {"dims": dims, "shape": shape},
        plans.plan_structure(dims, shape),
    )
    report = evaluate("structure", world, {"dims": dims, "shape": shape})
    assert report.success == structure_oracle(world, dims, shape) is True

    # perturb one block beyond tolerance: both must now reject
    broken = world.snapshot().restore()
    obj = broken.get_objects()[0]
    p = obj.pose.position
    obj.pose = Pose(Point3D(p.x + 0.02, p.y, p.z), obj.pose.rotation)
    report2 = evaluate("structure", broken, {"dims": dims, "shape": shape})
    assert report2.success is False
    assert structure_oracle(broken, dims, shape) is False


def test_evaluators_tolerate_1e5_noise() -> None:
    cases = [
        ("stack_blocks", {}, plans.plan_stack_blocks(), "tower", {"count": 4}),
        ("jenga", {}, plans.plan_jenga(), "jenga", {}),
        ("house", {}, plans.plan_build_house(), "house", {}),
        ("face", {}, plans.plan_face(), "face", {}),
        ("next_to_reference", {}, plans.plan_next_to_reference(), "next_to_reference", {}),
        (
            "structure",
            {"dims": (3, 2, 2), "shape": "pyramid"},
            plans.plan_structure((3, 2, 2), "pyramid"),
            "structure",
            {"dims": (3, 2, 2), "shape": "pyramid"},
        ),
    ]
    for scene, scene_params, plan, evaluator, params in cases:
        world = run_plan(scene, scene_params, plan)
        assert evaluate(evaluator, world, params).success, evaluator
        noisy = world.snapshot().restore()
        offset = 1e-5
        for index, obj in enumerate(noisy.get_objects()):
            p = obj.pose.position
            sign = 1 if index % 2 == 0 else -1
            obj.pose = Pose(
                Point3D(p.x + sign * offset, p.y - sign * offset, p.z + offset),
                obj.pose.rotation,
            )
        assert evaluate(evaluator, noisy, params).success, f"{evaluator} flipped under noise"


def test_evaluators_total_on_arbitrary_worlds() -> None:
    empty = WorldState(rng_seed=1)
    strange = WorldState(rng_seed=2)
    strange.add_zone("green")
    strange.add_cylinder("red")
    for name in ("tower", "next_to_reference", "structure", "jenga", "house", "face"):
        params = {"dims": (2, 2, 2), "shape": "cube"} if name == "structure" else {}
        for world in (empty, strange):
            report = evaluate(name, world, params)
            assert report.success is False
            assert isinstance(report.checks, list)


def test_unknown_evaluator_is_failure_not_crash() -> None:
    report = evaluate("nonexistent", WorldState(rng_seed=1), {})
    assert not report.success


# -- seeding -----------------------------------------------------------------------


def test_seed_memory_counts(tmp_path) -> None:
    store = MemoryStore(tmp_path / "mem")
    seed_memory(store)
    assert len(store.accepted_skills()) >= 13
    assert len(store.examples) >= 9
    assert len(seed_examples()) == 9


def test_seeded_examples_reexecute_to_digest(tmp_path) -> None:
    store = MemoryStore(tmp_path / "mem")
    seed_memory(store)
    library = store.library_view()
    for record in store.examples:
        world = WorldSnapshot.decode(record.setup_snapshot).restore()
        trace = execute(parse(record.code), world, library=library)
        assert trace.error is None, record.instruction
        assert outcome_digest(world) == record.outcome_digest, record.instruction


def test_seed_retrieval_pyramid_first(tmp_path) -> None:
    store = MemoryStore(tmp_path / "mem")
    seed_memory(store)
    result = store.retrieve_examples("build a 3 x 2 x 2 pyramid")
    assert result.entries[0][0].instruction == "build a 3 x 2 x 2 pyramid with 8 blocks"


def test_seed_memory_idempotent_for_skills(tmp_path) -> None:
    store = MemoryStore(tmp_path / "mem")
    seed_memory(store)
    skills_before = len(store.skills)
    seed_memory(store)
    assert len(store.skills) == skills_before  # no duplicate versions


# -- suite ------------------------------------------------------------------------


def test_load_bundled_suite() -> None:
    name, attempts, tasks = load_suite()
    assert name == "ravens"
    assert attempts == 20
    names = {t.name for t in tasks}
    assert names == {
        "next to reference",
        "stack blocks",
        "build {i * j * k} {structure}",
        "build a house",
        "jenga tower",
        "make a face",
    }
    structure_variants = [t for t in tasks if t.name == "build {i * j * k} {structure}"]
    assert len(structure_variants) == 5


def test_run_suite_small(tmp_path) -> None:
    store = MemoryStore(tmp_path / "mem")
    seed_memory(store)
    result = run_suite(store, attempts=2)
    assert result.sr_macro == 1.0
    assert len(result.rows) == 6
    table = result.table()
    for label in ("next to reference", "build a house", "jenga tower"):
        assert label in table


def test_library_census_thirteen_skills_seven_core_api_calls() -> None:
    """The seed library node census: 13 skills over exactly 7 core API callables
    (5 environment primitives plus the 2 geometry constructors), not counting
    workspace anchors or generic list/number helpers."""
    graph = full_library_program_graph()
    called: set[str] = set()
    for callees in graph.values():
        called.update(callees)
    called -= set(BUILTIN_SKILL_NAMES)

    env_used = {c for c in called if not c.startswith("workspace_")} & {
        "get_objects",
        "get_object_pose",
        "get_object_size",
        "get_object_color",
        "get_bbox",
        "get_end_effector_pose",
        "put_first_on_second",
        "move_end_effector_to",
    }
    assert env_used == {
        "get_objects",
        "get_object_pose",
        "get_object_size",
        "get_object_color",
        "put_first_on_second",
    }
    geometry_used = called & {
        "point_at_distance_and_rotation",
        "rotation_from_euler_z",
        "compose_rotations",
        "rotate_vector",
    }
    assert {"point_at_distance_and_rotation", "rotation_from_euler_z"} <= geometry_used
    core_api = env_used | {"point_at_distance_and_rotation", "rotation_from_euler_z"}
    assert len(core_api) == 7
    assert len(BUILTIN_SKILL_NAMES) == 13
