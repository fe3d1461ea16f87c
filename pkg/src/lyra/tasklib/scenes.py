"""Deterministic scene generators for the benchmark tasks.

Each generator populates a fresh world from a seed. Sampling is rejection-based
and may exclude a keep-clear region around the build area so that seed plans
without an explicit clearing phase land on free table. The house scene samples
the full table: its plan starts by moving everything out of the way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from ..geometry import AABB, Point3D, Pose, Rotation
from ..world import (
    SETUP_MAX_ATTEMPTS,
    SetupSpaceExhausted,
    WorldState,
    _splitmix64_next,
    object_aabb,
    rotated_half_extents,
)


@dataclass
class _Region:
    """Axis-aligned xy exclusion zone (centered box)."""

    cx: float
    cy: float
    half_x: float
    half_y: float

    def contains(self, x: float, y: float) -> bool:
        return abs(x - self.cx) <= self.half_x and abs(y - self.cy) <= self.half_y


class _Sampler:
    def __init__(self, seed: int):
        self.state = seed & ((1 << 64) - 1)

    def uniform(self, lo: float, hi: float) -> float:
        self.state, out = _splitmix64_next(self.state)
        return lo + (out / 2.0**64) * (hi - lo)


def _place(
    world: WorldState,
    sampler: _Sampler,
    object_type: str,
    color: str,
    size: tuple[float, float, float],
    avoid: Optional[_Region] = None,
    edge_margin: float = 0.0,
) -> None:
    ws = world.workspace
    ex, ey, _ = rotated_half_extents(size, Rotation.identity())
    for _ in range(SETUP_MAX_ATTEMPTS):
        x = sampler.uniform(ws.x_min + edge_margin, ws.x_max - edge_margin)
        y = sampler.uniform(ws.y_min + edge_margin, ws.y_max - edge_margin)
        if avoid is not None and avoid.contains(x, y):
            continue
        pose = Pose(Point3D(x, y, size[2] / 2.0), Rotation.identity())
        box = AABB(
            Point3D(x - ex, y - ey, 0.0), Point3D(x + ex, y + ey, size[2])
        )
        if any(o.collidable and object_aabb(o).overlaps(box) for o in world.objects):
            continue
        world.add_object(object_type, color, size, pose)
        return
    raise SetupSpaceExhausted(f"no room for {color} {object_type} in scene")


_BLOCK = (0.04, 0.04, 0.04)
_BIG_BLOCK = (0.08, 0.08, 0.08)
_JENGA_BLOCK = (0.12, 0.04, 0.04)
_ROOF_BASE = (0.20, 0.15, 0.01)
_ROOF_BEAM = (0.16, 0.04, 0.04)
_ROOF_TILE = (0.04, 0.04, 0.012)
_FACE_RECT = (0.08, 0.02, 0.02)

_CYCLE_COLORS = ("red", "green", "blue", "yellow", "orange", "purple", "cyan", "gray")


def _middle_region(world: WorldState, half_x: float, half_y: float) -> _Region:
    mid = world.workspace.middle
    return _Region(mid.x, mid.y, half_x, half_y)


def scene_stack_blocks(world: WorldState, seed: int, params: dict) -> None:
    """Four medium-sized colored blocks; the middle stays free for the tower."""
    sampler = _Sampler(seed)
    avoid = _middle_region(world, 0.12, 0.12)
    for color in ("red", "green", "blue", "yellow"):
        _place(world, sampler, "block", color, _BLOCK, avoid, edge_margin=0.03)


def scene_next_to_reference(world: WorldState, seed: int, params: dict) -> None:
    """Two large blocks; the blue reference keeps clear of the table edges."""
    sampler = _Sampler(seed)
    _place(world, sampler, "block", "blue", _BIG_BLOCK, edge_margin=0.15)
    _place(world, sampler, "block", "red", _BIG_BLOCK, edge_margin=0.05)


def scene_structure(world: WorldState, seed: int, params: dict) -> None:
    """params: dims=(i, j, k), shape. Spawns exactly the blocks the shape needs."""
    dims = tuple(params["dims"])
    shape = params.get("shape", "cuboid")
    count = structure_block_count(dims, shape)
    sampler = _Sampler(seed)
    avoid = _middle_region(
        world, dims[0] * 0.045 / 2 + 0.10, dims[1] * 0.045 / 2 + 0.10
    )
    for index in range(count):
        color = _CYCLE_COLORS[index % len(_CYCLE_COLORS)]
        _place(world, sampler, "block", color, _BLOCK, avoid, edge_margin=0.03)


def scene_jenga(world: WorldState, seed: int, params: dict) -> None:
    layers = int(params.get("layers", 4))
    per_layer = int(params.get("per_layer", 3))
    sampler = _Sampler(seed)
    avoid = _middle_region(world, 0.16, 0.16)
    for _ in range(layers * per_layer):
        _place(world, sampler, "block", "brown", _JENGA_BLOCK, avoid, edge_margin=0.07)


def scene_face(world: WorldState, seed: int, params: dict) -> None:
    outline = int(params.get("outline_count", 12))
    sampler = _Sampler(seed)
    avoid = _middle_region(world, 0.16, 0.16)
    for _ in range(outline):
        _place(world, sampler, "block", "yellow", _BLOCK, avoid, edge_margin=0.03)
    for _ in range(2):
        _place(world, sampler, "block", "blue", _BLOCK, avoid, edge_margin=0.03)
    _place(world, sampler, "block", "red", _FACE_RECT, avoid, edge_margin=0.05)


def scene_house(world: WorldState, seed: int, params: dict) -> None:
    """Yellow base blocks, a brown roof base and beam, six red tiles (plates)."""
    sampler = _Sampler(seed)
    for _ in range(14):
        _place(world, sampler, "block", "yellow", _BLOCK, edge_margin=0.03)
    _place(world, sampler, "block", "brown", _ROOF_BASE, edge_margin=0.11)
    _place(world, sampler, "block", "brown", _ROOF_BEAM, edge_margin=0.09)
    for _ in range(6):
        _place(world, sampler, "plate", "red", _ROOF_TILE, edge_margin=0.03)


def structure_block_count(dims: tuple[int, int, int], shape: str) -> int:
    i, j, k = dims
    if shape == "pyramid":
        return sum(max(i - c, 0) * max(j - c, 0) for c in range(k))
    return i * j * k


SCENES = {
    "stack_blocks": scene_stack_blocks,
    "next_to_reference": scene_next_to_reference,
    "structure": scene_structure,
    "jenga": scene_jenga,
    "face": scene_face,
    "house": scene_house,
}


def setup_scene(scene: str, world: WorldState, seed: int, params: Optional[dict] = None) -> None:
    try:
        generator = SCENES[scene]
    except KeyError:
        raise KeyError(f"unknown scene {scene!r} (have {sorted(SCENES)})") from None
    generator(world, seed, params or {})


def colored_blocks_scene(
    world: WorldState,
    seed: int,
    colors: tuple[str, ...],
    sizes: Optional[list[tuple[float, float, float]]] = None,
    clear_half: float = 0.12,
    edge_margin: float = 0.10,
) -> None:
    """Generic helper scene: one block per color, middle kept free."""
    sampler = _Sampler(seed)
    avoid = _middle_region(world, clear_half, clear_half)
    for index, color in enumerate(colors):
        size = sizes[index] if sizes else _BLOCK
        _place(world, sampler, "block", color, size, avoid, edge_margin=edge_margin)


def angle_of(rotation: Rotation) -> float:
    """Rotation of the local +x axis in the xy plane, radians in [0, pi)."""
    v = rotation.apply(Point3D(1.0, 0.0, 0.0))
    return math.atan2(v.y, v.x) % math.pi
