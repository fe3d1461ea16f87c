"""Kinematic tabletop world: objects, workspace, task-setup API and core primitives.

There is no dynamics engine. Placement is resolved by a deterministic resting
rule: a placed object drops onto the highest top face among objects whose
bounding boxes overlap its footprint in the xy plane (or onto the table).
Identical seeds and identical call sequences reproduce identical worlds,
byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .geometry import AABB, Point3D, Pose, Rotation

SNAPSHOT_VERSION = 1

PICK_TOLERANCE = 0.01  # m, horizontal radius for matching a pick pose to an object
SETUP_MAX_ATTEMPTS = 1000
DEFAULT_BLOCK_SIZE = (0.04, 0.04, 0.04)
ZONE_HEIGHT = 0.001

OBJECT_TYPES = ("block", "cylinder", "zone", "plate")

_MASK64 = (1 << 64) - 1


class WorldError(Exception):
    """Base class for world/primitive failures."""


class SetupSpaceExhausted(WorldError):
    """Rejection sampling found no collision-free pose within the attempt budget."""


class SetupCollision(WorldError):
    """An explicitly requested spawn pose collides with an existing object."""


class NoSuchObject(WorldError):
    """An accessor referenced an object id not present in the world."""


class PickMiss(WorldError):
    """No object center within the pick tolerance of the commanded pick pose."""


class OutOfWorkspace(WorldError):
    """A commanded position lies outside the workspace bounds."""


class SnapshotVersionError(WorldError):
    """A snapshot payload declares an unsupported schema version."""


def _splitmix64_next(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


@dataclass
class Workspace:
    """Bounded tabletop region with named anchors at the table plane (z = 0).

    Axis convention: back = x_min, front = x_max, left = y_min, right = y_max.
    """

    x_min: float = 0.25
    x_max: float = 0.80
    y_min: float = -0.55
    y_max: float = 0.30
    z_min: float = 0.01
    z_max: float = 0.65

    def __post_init__(self) -> None:
        if not (self.x_min < self.x_max and self.y_min < self.y_max and self.z_min < self.z_max):
            raise ValueError("workspace bounds must satisfy min < max per axis")

    @property
    def middle(self) -> Point3D:
        return Point3D((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0, 0.0)

    @property
    def back_left(self) -> Point3D:
        return Point3D(self.x_min, self.y_min, 0.0)

    @property
    def back_right(self) -> Point3D:
        return Point3D(self.x_min, self.y_max, 0.0)

    @property
    def front_left(self) -> Point3D:
        return Point3D(self.x_max, self.y_min, 0.0)

    @property
    def front_right(self) -> Point3D:
        return Point3D(self.x_max, self.y_max, 0.0)

    def anchor(self, name: str) -> Point3D:
        try:
            return getattr(self, name)
        except AttributeError:
            raise KeyError(f"unknown workspace anchor {name!r}") from None

    def contains_xy(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def to_json_obj(self) -> dict:
        return {
            "x": [self.x_min, self.x_max],
            "y": [self.y_min, self.y_max],
            "z": [self.z_min, self.z_max],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Workspace":
        return cls(
            x_min=obj["x"][0],
            x_max=obj["x"][1],
            y_min=obj["y"][0],
            y_max=obj["y"][1],
            z_min=obj["z"][0],
            z_max=obj["z"][1],
        )


@dataclass
class TaskObject:
    """A scene object. The pose is the only mutable field."""

    id: int
    object_type: str
    size: tuple[float, float, float]
    color: str
    pose: Pose

    @property
    def collidable(self) -> bool:
        return self.object_type != "zone"

    def to_json_obj(self) -> dict:
        return {
            "id": self.id,
            "type": self.object_type,
            "size": list(self.size),
            "color": self.color,
            "pose": self.pose.to_json_obj(),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "TaskObject":
        return cls(
            id=obj["id"],
            object_type=obj["type"],
            size=tuple(obj["size"]),
            color=obj["color"],
            pose=Pose.from_json_obj(obj["pose"]),
        )


@dataclass(frozen=True)
class ActionRecord:
    seq: int
    kind: str  # pick_place | move_ee | spawn
    params: dict

    def to_json_obj(self) -> dict:
        return {"seq": self.seq, "kind": self.kind, "params": self.params}


@dataclass(frozen=True)
class StepResult:
    kind: str
    seq: int
    object_id: Optional[int] = None
    pose_after: Optional[Pose] = None


def rotated_half_extents(
    size: tuple[float, float, float], rotation: Rotation
) -> tuple[float, float, float]:
    """Half extents of the AABB of a box `size` after rotation (|R| * h)."""
    hx, hy, hz = size[0] / 2.0, size[1] / 2.0, size[2] / 2.0
    m = rotation.as_matrix()
    return (
        abs(m[0][0]) * hx + abs(m[0][1]) * hy + abs(m[0][2]) * hz,
        abs(m[1][0]) * hx + abs(m[1][1]) * hy + abs(m[1][2]) * hz,
        abs(m[2][0]) * hx + abs(m[2][1]) * hy + abs(m[2][2]) * hz,
    )


def object_aabb(obj: TaskObject) -> AABB:
    ex, ey, ez = rotated_half_extents(obj.size, obj.pose.rotation)
    p = obj.pose.position
    return AABB(Point3D(p.x - ex, p.y - ey, p.z - ez), Point3D(p.x + ex, p.y + ey, p.z + ez))


ObjRef = Union[TaskObject, int]


class WorldState:
    """The mutable scene: objects, end effector, RNG and action log."""

    def __init__(self, workspace: Optional[Workspace] = None, rng_seed: int = 0) -> None:
        self.workspace = workspace or Workspace()
        self.rng_seed = rng_seed & _MASK64
        self.objects: list[TaskObject] = []
        self.action_log: list[ActionRecord] = []
        mid = self.workspace.middle
        self.end_effector = Pose(Point3D(mid.x, mid.y, self.workspace.z_max), Rotation.identity())
        self._next_id = 1

    # -- RNG ---------------------------------------------------------------

    def _next_uniform(self, lo: float, hi: float) -> float:
        self.rng_seed, out = _splitmix64_next(self.rng_seed)
        return lo + (out / 2.0**64) * (hi - lo)

    # -- bookkeeping ---------------------------------------------------------

    def _log(self, kind: str, params: dict) -> ActionRecord:
        record = ActionRecord(seq=len(self.action_log) + 1, kind=kind, params=params)
        self.action_log.append(record)
        return record

    def _resolve(self, obj: ObjRef) -> TaskObject:
        obj_id = obj.id if isinstance(obj, TaskObject) else obj
        for candidate in self.objects:
            if candidate.id == obj_id:
                return candidate
        raise NoSuchObject(f"no object with id {obj_id}")

    # -- task setup API --------------------------------------------------------

    def add_object(
        self,
        object_type: str,
        color: str,
        size: tuple[float, float, float],
        pose: Optional[Pose] = None,
    ) -> TaskObject:
        if object_type not in OBJECT_TYPES:
            raise ValueError(f"unknown object type {object_type!r}")
        if any(s <= 0 for s in size):
            raise ValueError("size components must be positive")
        if not color:
            raise ValueError("color must be nonempty")
        color = color.lower()
        size = (float(size[0]), float(size[1]), float(size[2]))
        collidable = object_type != "zone"

        if pose is not None:
            if not self.workspace.contains_xy(pose.position.x, pose.position.y):
                raise OutOfWorkspace(
                    f"spawn center ({pose.position.x}, {pose.position.y}) outside workspace"
                )
            candidate = TaskObject(self._next_id, object_type, size, color, pose)
            if collidable and self._collides(candidate):
                raise SetupCollision(f"explicit pose for {color} {object_type} collides")
        else:
            candidate = None
            for _ in range(SETUP_MAX_ATTEMPTS):
                x = self._next_uniform(self.workspace.x_min, self.workspace.x_max)
                y = self._next_uniform(self.workspace.y_min, self.workspace.y_max)
                trial_pose = Pose(Point3D(x, y, size[2] / 2.0), Rotation.identity())
                trial = TaskObject(self._next_id, object_type, size, color, trial_pose)
                if not collidable or not self._collides(trial):
                    candidate = trial
                    break
            if candidate is None:
                raise SetupSpaceExhausted(
                    f"no collision-free pose for {color} {object_type} "
                    f"after {SETUP_MAX_ATTEMPTS} attempts"
                )

        self.objects.append(candidate)
        self._next_id += 1
        self._log(
            "spawn",
            {
                "object_id": candidate.id,
                "type": object_type,
                "color": color,
                "size": list(size),
                "pose": candidate.pose.to_json_obj(),
            },
        )
        return candidate

    def add_block(
        self,
        color: str,
        size: tuple[float, float, float] = DEFAULT_BLOCK_SIZE,
        pose: Optional[Pose] = None,
    ) -> TaskObject:
        return self.add_object("block", color, size, pose)

    def add_cylinder(self, color: str = "red", scale: float = 0.5) -> TaskObject:
        side = 0.04 * scale
        return self.add_object("cylinder", color, (side, side, side))

    def add_zone(self, color: str, scale: float = 1.0, pose: Optional[Pose] = None) -> TaskObject:
        side = 0.1 * scale
        return self.add_object("zone", color, (side, side, ZONE_HEIGHT), pose)

    def _collides(self, candidate: TaskObject) -> bool:
        box = object_aabb(candidate)
        for other in self.objects:
            if other.collidable and object_aabb(other).overlaps(box):
                return True
        return False

    # -- accessors ------------------------------------------------------------

    def get_objects(self) -> list[TaskObject]:
        return list(self.objects)

    def get_object_pose(self, obj: ObjRef) -> Pose:
        return self._resolve(obj).pose

    def get_object_size(self, obj: ObjRef) -> tuple[float, float, float]:
        return self._resolve(obj).size

    def get_object_color(self, obj: ObjRef) -> str:
        return self._resolve(obj).color

    def get_bbox(self, obj: ObjRef) -> AABB:
        return object_aabb(self._resolve(obj))

    def get_end_effector_pose(self) -> Pose:
        return self.end_effector

    # -- primitives -------------------------------------------------------------

    def support_height(self, footprint_xy: AABB, ignore: Iterable[int] = ()) -> float:
        """Highest top face under the footprint (table = 0), excluding `ignore` ids."""
        skip = set(ignore)
        top = 0.0
        for obj in self.objects:
            if not obj.collidable or obj.id in skip:
                continue
            box = object_aabb(obj)
            if box.overlaps_xy(footprint_xy):
                top = max(top, box.max.z)
        return top

    def put_first_on_second(self, pick_pose: Pose, place_pose: Pose) -> StepResult:
        """Pick the object nearest to pick_pose and rest it at place_pose (x, y).

        The commanded place z is ignored: the object descends until contact,
        landing on the highest supporting face (or the table).
        """
        picked = self._find_pick(pick_pose)
        x, y = place_pose.position.x, place_pose.position.y
        if not self.workspace.contains_xy(x, y):
            raise OutOfWorkspace(f"place position ({x}, {y}) outside workspace")

        ex, ey, ez = rotated_half_extents(picked.size, place_pose.rotation)
        footprint = AABB(Point3D(x - ex, y - ey, 0.0), Point3D(x + ex, y + ey, 0.0))
        support = self.support_height(footprint, ignore=(picked.id,))
        final = Pose(Point3D(x, y, support + ez), place_pose.rotation)
        picked.pose = final
        record = self._log(
            "pick_place",
            {
                "object_id": picked.id,
                "pick": pick_pose.to_json_obj(),
                "place": place_pose.to_json_obj(),
                "final": final.to_json_obj(),
            },
        )
        return StepResult("pick_place", record.seq, picked.id, final)

    def _find_pick(self, pick_pose: Pose) -> TaskObject:
        target = pick_pose.position
        best: Optional[tuple[float, float, int, TaskObject]] = None
        for obj in self.objects:
            p = obj.pose.position
            d = math.hypot(p.x - target.x, p.y - target.y)
            if d > PICK_TOLERANCE:
                continue
            key = (d, abs(p.z - target.z), obj.id, obj)
            if best is None or key[:3] < best[:3]:
                best = key
        if best is None:
            raise PickMiss(
                f"no object within {PICK_TOLERANCE} m of ({target.x}, {target.y})"
            )
        return best[3]

    def move_end_effector_to(self, pose: Pose, speed: float = 0.001) -> StepResult:
        p = pose.position
        if not self.workspace.contains_xy(p.x, p.y) or not (
            self.workspace.z_min <= p.z <= self.workspace.z_max
        ):
            raise OutOfWorkspace(f"end-effector target ({p.x}, {p.y}, {p.z}) outside workspace")
        self.end_effector = pose
        record = self._log(
            "move_ee", {"pose": pose.to_json_obj(), "speed": float(speed)}
        )
        return StepResult("move_ee", record.seq, None, pose)

    # -- snapshots ---------------------------------------------------------------

    def snapshot(self) -> "WorldSnapshot":
        return WorldSnapshot(
            version=SNAPSHOT_VERSION,
            seed=self.rng_seed,
            workspace=self.workspace.to_json_obj(),
            ee=self.end_effector.to_json_obj(),
            objects=[o.to_json_obj() for o in self.objects],
            actions=[a.to_json_obj() for a in self.action_log],
        )


@dataclass(frozen=True)
class WorldSnapshot:
    """Immutable, JSON-canonical copy of a world state."""

    version: int
    seed: int
    workspace: dict
    ee: dict
    objects: list
    actions: list

    def to_json_obj(self) -> dict:
        return {
            "version": self.version,
            "seed": self.seed,
            "workspace": self.workspace,
            "ee": self.ee,
            "objects": self.objects,
            "actions": self.actions,
        }

    def encode(self) -> str:
        return json.dumps(self.to_json_obj(), separators=(",", ":"))

    @classmethod
    def decode(cls, text: str) -> "WorldSnapshot":
        obj = json.loads(text)
        version = obj.get("version")
        if version != SNAPSHOT_VERSION:
            raise SnapshotVersionError(
                f"snapshot version {version!r} unsupported (expected {SNAPSHOT_VERSION})"
            )
        return cls(
            version=version,
            seed=obj["seed"],
            workspace=obj["workspace"],
            ee=obj["ee"],
            objects=obj["objects"],
            actions=obj["actions"],
        )

    def restore(self) -> WorldState:
        world = WorldState(Workspace.from_json_obj(self.workspace), rng_seed=self.seed)
        world.end_effector = Pose.from_json_obj(self.ee)
        world.objects = [TaskObject.from_json_obj(o) for o in self.objects]
        world.action_log = [
            ActionRecord(seq=a["seq"], kind=a["kind"], params=a["params"]) for a in self.actions
        ]
        world._next_id = max((o.id for o in world.objects), default=0) + 1
        return world


def restore(snapshot: WorldSnapshot) -> WorldState:
    return snapshot.restore()


def _quantize(value: float, step: float = 1e-4) -> float:
    q = round(value / step) * step
    return 0.0 if q == 0.0 else round(q, 12)


def outcome_digest(world: WorldState) -> str:
    """Hash of the final scene with poses quantized to 1e-4 (m and quaternion units).

    Actions and the RNG state are excluded: two behaviorally equivalent rollouts
    that differ only in intermediate motions digest identically.
    """
    payload = {
        "ee": _quantize_pose(world.end_effector.to_json_obj()),
        "objects": [
            {
                "id": o.id,
                "type": o.object_type,
                "size": list(o.size),
                "color": o.color,
                "pose": _quantize_pose(o.pose.to_json_obj()),
            }
            for o in sorted(world.objects, key=lambda o: o.id)
        ],
    }
    blob = json.dumps(payload, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def _quantize_pose(pose_obj: dict) -> dict:
    return {
        "position": [_quantize(v) for v in pose_obj["position"]],
        "rotation": [_quantize(v) for v in pose_obj["rotation"]],
    }
