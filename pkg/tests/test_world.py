"""World: task setup, primitives, resting model, snapshots, determinism."""

from __future__ import annotations

import math
import random

import pytest

from lyra.geometry import AABB, Point3D, Pose, Rotation
from lyra.world import (
    OutOfWorkspace,
    NoSuchObject,
    PickMiss,
    SetupCollision,
    SnapshotVersionError,
    WorldSnapshot,
    WorldState,
    Workspace,
    object_aabb,
    outcome_digest,
)


def make_world(seed: int = 1) -> WorldState:
    return WorldState(rng_seed=seed)


def middle_pose(world: WorldState, z: float = 0.02) -> Pose:
    mid = world.workspace.middle
    return Pose(Point3D(mid.x, mid.y, z), Rotation.identity())


# -- workspace -----------------------------------------------------------------


def test_default_bounds() -> None:
    ws = Workspace()
    assert (ws.x_min, ws.x_max) == (0.25, 0.80)
    assert (ws.y_min, ws.y_max) == (-0.55, 0.30)
    assert (ws.z_min, ws.z_max) == (0.01, 0.65)


def test_anchors_inside_bounds() -> None:
    ws = Workspace()
    for name in ("middle", "back_left", "back_right", "front_left", "front_right"):
        anchor = ws.anchor(name)
        assert ws.contains_xy(anchor.x, anchor.y)
        assert anchor.z == 0.0


def test_axis_convention() -> None:
    # back = x_min, front = x_max, left = y_min, right = y_max
    ws = Workspace()
    assert ws.back_left.x == ws.x_min and ws.front_left.x == ws.x_max
    assert ws.back_left.y == ws.y_min and ws.back_right.y == ws.y_max


def test_invalid_bounds_rejected() -> None:
    with pytest.raises(ValueError):
        Workspace(x_min=0.8, x_max=0.25)


# -- task setup -------------------------------------------------------------------


def test_add_block_default_size_rests_on_table() -> None:
    world = make_world()
    block = world.add_block("red")
    assert block.size == (0.04, 0.04, 0.04)
    assert block.pose.position.z == pytest.approx(0.02)
    assert world.workspace.contains_xy(block.pose.position.x, block.pose.position.y)


def test_add_block_explicit_pose_exact() -> None:
    world = make_world()
    block = world.add_block("blue", pose=middle_pose(world))
    mid = world.workspace.middle
    assert (block.pose.position.x, block.pose.position.y) == (mid.x, mid.y)


def test_add_block_explicit_collision_raises() -> None:
    world = make_world()
    world.add_block("red", pose=middle_pose(world))
    with pytest.raises(SetupCollision):
        world.add_block("blue", pose=middle_pose(world))


def test_add_block_out_of_bounds_pose_rejected() -> None:
    world = make_world()
    with pytest.raises(OutOfWorkspace):
        world.add_block("red", pose=Pose(Point3D(5, 5, 0.02), Rotation.identity()))


def test_fourteen_blocks_pairwise_disjoint_seed1() -> None:
    world = make_world(seed=1)
    blocks = [world.add_block("yellow") for _ in range(14)]
    for i, a in enumerate(blocks):
        for b in blocks[i + 1 :]:
            assert not object_aabb(a).overlaps(object_aabb(b))


def test_cylinder_scale() -> None:
    world = make_world()
    cyl = world.add_cylinder("green", scale=0.5)
    assert cyl.size == (0.02, 0.02, 0.02)
    assert cyl.object_type == "cylinder"


def test_cylinder_sampling_deterministic_across_worlds() -> None:
    a = make_world(seed=7).add_cylinder("red")
    b = make_world(seed=7).add_cylinder("red")
    assert a.pose == b.pose


def test_zone_never_collides() -> None:
    world = make_world()
    # fill the middle, then drop zones: zones are non-colliding floor markers
    world.add_block("red", pose=middle_pose(world))
    for _ in range(5):
        world.add_zone("green", pose=Pose(middle_pose(world).position, Rotation.identity()))
    assert sum(1 for o in world.objects if o.object_type == "zone") == 5


def test_spawn_actions_logged() -> None:
    world = make_world()
    world.add_block("red")
    world.add_zone("blue")
    assert [a.kind for a in world.action_log] == ["spawn", "spawn"]
    assert [a.seq for a in world.action_log] == [1, 2]


# -- accessors --------------------------------------------------------------------


def test_fresh_world_has_no_objects() -> None:
    assert make_world().get_objects() == []


def test_accessors_and_unknown_id() -> None:
    world = make_world()
    block = world.add_block("red", pose=middle_pose(world))
    assert world.get_object_color(block) == "red"
    assert world.get_object_size(block.id) == (0.04, 0.04, 0.04)
    assert world.get_object_pose(block) == block.pose
    with pytest.raises(NoSuchObject):
        world.get_object_pose(999)


def test_bbox_axis_aligned_block() -> None:
    world = make_world()
    block = world.add_block("red", pose=middle_pose(world))
    box = world.get_bbox(block)
    assert box.min.z == pytest.approx(0.0, abs=1e-12)
    assert box.max.z == pytest.approx(0.04, abs=1e-12)


def test_bbox_rotated_45_matches_corner_oracle() -> None:
    world = make_world()
    pose = Pose(middle_pose(world).position, Rotation.from_euler("z", 45, degrees=True))
    block = world.add_block("red", pose=pose)
    box = world.get_bbox(block)

    # oracle: rotate the 8 corners explicitly
    h = 0.02
    xs = []
    for sx in (-h, h):
        for sy in (-h, h):
            for sz in (-h, h):
                corner = pose.rotation.apply(Point3D(sx, sy, sz))
                xs.append(corner.x)
    expected_extent = max(xs) - min(xs)
    assert expected_extent == pytest.approx(0.04 * math.sqrt(2), abs=1e-12)
    assert box.max.x - box.min.x == pytest.approx(expected_extent, abs=1e-9)


# -- support and pick-and-place -------------------------------------------------------


def test_support_height_empty_table() -> None:
    world = make_world()
    footprint = AABB(Point3D(0.5, -0.1, 0), Point3D(0.54, -0.06, 0))
    assert world.support_height(footprint) == 0.0


def test_support_height_one_and_two_blocks() -> None:
    world = make_world()
    base = world.add_block("red", pose=middle_pose(world))
    footprint = object_aabb(base)
    assert world.support_height(footprint) == pytest.approx(0.04)
    world.put_first_on_second(
        world.add_block("blue").pose, middle_pose(world)
    )
    assert world.support_height(footprint) == pytest.approx(0.08)


def test_place_on_empty_target() -> None:
    world = make_world()
    block = world.add_block("red")
    target = Pose(Point3D(0.6, 0.1, 0), Rotation.identity())
    world.put_first_on_second(block.pose, target)
    assert block.pose.position.z == pytest.approx(0.02)
    assert (block.pose.position.x, block.pose.position.y) == (0.6, 0.1)


def test_place_on_occupied_rests_on_top() -> None:
    world = make_world()
    bottom = world.add_block("red", pose=middle_pose(world))
    top = world.add_block("blue")
    world.put_first_on_second(top.pose, Pose(bottom.pose.position, Rotation.identity()))
    assert top.pose.position.z == pytest.approx(0.06)


def test_stack_four_blocks_top_at_014() -> None:
    world = make_world()
    target = middle_pose(world)
    blocks = [world.add_block(c) for c in ("red", "green", "blue", "yellow")]
    for block in blocks:
        world.put_first_on_second(block.pose, target)
    assert blocks[-1].pose.position.z == pytest.approx(0.14)


def test_pick_miss_outside_tolerance() -> None:
    world = make_world()
    block = world.add_block("red", pose=middle_pose(world))
    off = Pose(
        Point3D(block.pose.position.x + 0.02, block.pose.position.y, 0.02), Rotation.identity()
    )
    with pytest.raises(PickMiss):
        world.put_first_on_second(off, middle_pose(world))


def test_pick_within_tolerance_selects_nearest() -> None:
    world = make_world()
    near = world.add_block("red", pose=Pose(Point3D(0.5, 0.0, 0.02), Rotation.identity()))
    world.add_block("blue", pose=Pose(Point3D(0.55, 0.0, 0.02), Rotation.identity()))
    pick = Pose(Point3D(0.505, 0.0, 0.02), Rotation.identity())
    world.put_first_on_second(pick, Pose(Point3D(0.7, 0.2, 0), Rotation.identity()))
    assert (near.pose.position.x, near.pose.position.y) == (0.7, 0.2)


def test_pick_tie_on_shared_xy_prefers_commanded_z() -> None:
    # a 2-stack shares (x, y); picking at the top block's pose moves the top one
    world = make_world()
    bottom = world.add_block("red", pose=middle_pose(world))
    top = world.add_block("blue")
    world.put_first_on_second(top.pose, Pose(bottom.pose.position, Rotation.identity()))
    world.put_first_on_second(top.pose, Pose(Point3D(0.7, 0.2, 0), Rotation.identity()))
    assert (top.pose.position.x, top.pose.position.y) == (0.7, 0.2)
    assert bottom.pose.position.x == world.workspace.middle.x


def test_place_outside_workspace_rejected() -> None:
    world = make_world()
    block = world.add_block("red", pose=middle_pose(world))
    with pytest.raises(OutOfWorkspace):
        world.put_first_on_second(block.pose, Pose(Point3D(0.9, 0, 0), Rotation.identity()))


def test_place_z_idempotent_at_empty_target() -> None:
    world = make_world()
    block = world.add_block("red")
    target = Pose(Point3D(0.6, 0.0, 0), Rotation.identity())
    world.put_first_on_second(block.pose, target)
    z_first = block.pose.position.z
    world.put_first_on_second(block.pose, target)
    assert block.pose.position.z == z_first


def test_placement_takes_commanded_rotation() -> None:
    world = make_world()
    block = world.add_block("red")
    rot = Rotation.from_euler("z", 45, degrees=True)
    world.put_first_on_second(block.pose, Pose(Point3D(0.6, 0.0, 0), rot))
    assert block.pose.rotation == rot


# -- end effector -----------------------------------------------------------------


def test_move_ee_and_last_wins() -> None:
    world = make_world()
    a = Pose(Point3D(0.5, 0.0, 0.3), Rotation.identity())
    b = Pose(Point3D(0.6, 0.1, 0.2), Rotation.identity())
    world.move_end_effector_to(a)
    world.move_end_effector_to(b)
    assert world.get_end_effector_pose() == b


def test_move_ee_out_of_bounds() -> None:
    world = make_world()
    with pytest.raises(OutOfWorkspace):
        world.move_end_effector_to(Pose(Point3D(0.5, 0.0, 0.9), Rotation.identity()))


def test_move_ee_restored_by_snapshot() -> None:
    world = make_world()
    snap = world.snapshot()
    world.move_end_effector_to(Pose(Point3D(0.5, 0.0, 0.3), Rotation.identity()))
    restored = snap.restore()
    assert restored.get_end_effector_pose() == snap.restore().get_end_effector_pose()
    assert restored.get_end_effector_pose() != world.get_end_effector_pose()


# -- snapshots ------------------------------------------------------------------------


def seeded_ten_object_world() -> WorldState:
    world = make_world(seed=99)
    for i in range(8):
        world.add_block(["red", "green", "blue", "yellow"][i % 4])
    world.add_cylinder("purple")
    world.add_zone("cyan")
    return world


def test_snapshot_restore_accessor_equal() -> None:
    world = seeded_ten_object_world()
    restored = world.snapshot().restore()
    assert [o.to_json_obj() for o in restored.get_objects()] == [
        o.to_json_obj() for o in world.get_objects()
    ]
    assert restored.get_end_effector_pose() == world.get_end_effector_pose()
    assert restored.rng_seed == world.rng_seed


def test_snapshot_isolates_mutation() -> None:
    world = make_world()
    block = world.add_block("red", pose=middle_pose(world))
    snap = world.snapshot()
    world.put_first_on_second(block.pose, Pose(Point3D(0.7, 0.2, 0), Rotation.identity()))
    restored = snap.restore()
    assert restored.get_objects()[0].pose.position.x == world.workspace.middle.x


def test_snapshot_byte_identical_reserialization() -> None:
    world = seeded_ten_object_world()
    encoded = world.snapshot().encode()
    again = WorldSnapshot.decode(encoded).restore().snapshot().encode()
    assert encoded == again


def test_snapshot_version_mismatch() -> None:
    world = make_world()
    text = world.snapshot().encode().replace('"version":1', '"version":99', 1)
    with pytest.raises(SnapshotVersionError):
        WorldSnapshot.decode(text)


def test_determinism_same_seed_same_calls() -> None:
    def build() -> str:
        world = make_world(seed=123)
        for color in ("red", "green", "blue"):
            world.add_block(color)
        world.put_first_on_second(
            world.get_objects()[0].pose, Pose(world.workspace.middle, Rotation.identity())
        )
        return world.snapshot().encode()

    assert build() == build()


# -- invariants ---------------------------------------------------------------------


def assert_no_collidable_overlap(world: WorldState) -> None:
    objs = [o for o in world.objects if o.collidable]
    for i, a in enumerate(objs):
        for b in objs[i + 1 :]:
            assert not object_aabb(a).overlaps(object_aabb(b)), (a.id, b.id)


def test_random_primitive_sequences_never_interpenetrate() -> None:
    rng = random.Random(2024)
    world = make_world(seed=5)
    blocks = [world.add_block(c) for c in ("red", "green", "blue", "yellow", "orange")]
    ws = world.workspace
    for step in range(120):
        block = rng.choice(blocks)
        x = rng.uniform(ws.x_min, ws.x_max)
        y = rng.uniform(ws.y_min, ws.y_max)
        angle = rng.uniform(0, math.pi)
        world.put_first_on_second(
            block.pose, Pose(Point3D(x, y, 0), Rotation.from_euler("z", angle))
        )
        assert_no_collidable_overlap(world)


def test_every_primitive_appends_one_action() -> None:
    world = make_world()
    block = world.add_block("red")
    before = len(world.action_log)
    world.put_first_on_second(block.pose, middle_pose(world))
    world.move_end_effector_to(Pose(Point3D(0.5, 0, 0.3), Rotation.identity()))
    assert len(world.action_log) == before + 2
    assert [a.seq for a in world.action_log] == list(range(1, len(world.action_log) + 1))


def test_object_count_changes_only_via_spawn() -> None:
    world = make_world()
    block = world.add_block("red")
    count = len(world.objects)
    world.put_first_on_second(block.pose, middle_pose(world))
    world.move_end_effector_to(Pose(Point3D(0.5, 0, 0.3), Rotation.identity()))
    assert len(world.objects) == count


# -- digest --------------------------------------------------------------------------


def test_digest_ignores_action_log() -> None:
    a = make_world(seed=3)
    block = a.add_block("red", pose=middle_pose(a))
    b = a.snapshot().restore()
    # same final pose reached with an extra intermediate move
    a.put_first_on_second(block.pose, Pose(Point3D(0.6, 0.0, 0), Rotation.identity()))
    b_block = b.get_objects()[0]
    b.put_first_on_second(b_block.pose, Pose(Point3D(0.7, 0.1, 0), Rotation.identity()))
    b.put_first_on_second(b_block.pose, Pose(Point3D(0.6, 0.0, 0), Rotation.identity()))
    assert outcome_digest(a) == outcome_digest(b)


def test_digest_quantization_tolerates_tiny_noise() -> None:
    world = make_world(seed=3)
    world.add_block("red", pose=middle_pose(world))
    base = outcome_digest(world)
    noisy = world.snapshot().restore()
    obj = noisy.get_objects()[0]
    p = obj.pose.position
    obj.pose = Pose(Point3D(p.x + 1e-6, p.y - 1e-6, p.z), obj.pose.rotation)
    assert outcome_digest(noisy) == base


def test_digest_flags_behavioral_drift() -> None:
    world = make_world(seed=3)
    world.add_block("red", pose=middle_pose(world))
    base = outcome_digest(world)
    moved = world.snapshot().restore()
    obj = moved.get_objects()[0]
    p = obj.pose.position
    obj.pose = Pose(Point3D(p.x + 0.001, p.y, p.z), obj.pose.rotation)
    assert outcome_digest(moved) != base


def test_setup_space_exhausted_after_bounded_attempts() -> None:
    # a workspace barely larger than one block cannot host a second one
    tight = Workspace(x_min=0.0, x_max=0.05, y_min=0.0, y_max=0.05, z_min=0.01, z_max=0.5)
    world = WorldState(tight, rng_seed=8)
    world.add_block("red", pose=Pose(Point3D(0.025, 0.025, 0.02), Rotation.identity()))
    from lyra.world import SetupSpaceExhausted

    with pytest.raises(SetupSpaceExhausted):
        world.add_block("blue")
