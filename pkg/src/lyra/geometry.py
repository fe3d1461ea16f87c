"""Spatial algebra: points, unit-quaternion rotations, poses, boxes, rigid transforms.

Conventions, fixed once and asserted in tests:

* quaternion components are stored (qx, qy, qz, qw); identity is (0, 0, 0, 1)
* angles are radians internally; degrees only at the `from_euler` constructor
* composing rotations renormalizes the result so unit norm holds to 1e-9
  across arbitrarily long chains
"""

from __future__ import annotations

import math
from dataclasses import dataclass

UNIT_NORM_TOL = 1e-9
_CONSTRUCT_NORM_TOL = 1e-6


class InvalidGeometry(ValueError):
    """A geometric value violates its invariants (non-finite, non-unit, ...)."""


def _require_finite(*values: float) -> None:
    for v in values:
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise InvalidGeometry(f"non-finite or non-numeric component: {v!r}")


@dataclass(frozen=True)
class Point3D:
    """A point (or free vector) in meters."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        _require_finite(self.x, self.y, self.z)
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))

    @classmethod
    def from_xyz(cls, xyz) -> "Point3D":
        x, y, z = xyz
        return cls(float(x), float(y), float(z))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    def translate(self, other: "Point3D") -> "Point3D":
        return Point3D(self.x + other.x, self.y + other.y, self.z + other.z)

    def sub(self, other: "Point3D") -> "Point3D":
        return Point3D(self.x - other.x, self.y - other.y, self.z - other.z)

    def scale(self, factor: float) -> "Point3D":
        return Point3D(self.x * factor, self.y * factor, self.z * factor)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)


@dataclass(frozen=True)
class Rotation:
    """Unit quaternion, stored (qx, qy, qz, qw)."""

    qx: float
    qy: float
    qz: float
    qw: float

    def __post_init__(self) -> None:
        _require_finite(self.qx, self.qy, self.qz, self.qw)
        n = math.sqrt(self.qx**2 + self.qy**2 + self.qz**2 + self.qw**2)
        if abs(n - 1.0) > _CONSTRUCT_NORM_TOL:
            raise InvalidGeometry(f"quaternion norm {n} is not 1 within {_CONSTRUCT_NORM_TOL}")
        object.__setattr__(self, "qx", float(self.qx) / n)
        object.__setattr__(self, "qy", float(self.qy) / n)
        object.__setattr__(self, "qz", float(self.qz) / n)
        object.__setattr__(self, "qw", float(self.qw) / n)

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(0.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_euler(cls, axis: str, angle: float, degrees: bool = False) -> "Rotation":
        """Single-axis rotation about 'x', 'y' or 'z'."""
        _require_finite(angle)
        if degrees:
            angle = math.radians(angle)
        half = angle / 2.0
        s, c = math.sin(half), math.cos(half)
        if axis == "x":
            return cls(s, 0.0, 0.0, c)
        if axis == "y":
            return cls(0.0, s, 0.0, c)
        if axis == "z":
            return cls(0.0, 0.0, s, c)
        raise InvalidGeometry(f"unknown rotation axis {axis!r} (expected 'x', 'y' or 'z')")

    def apply(self, v: Point3D) -> Point3D:
        """Rotate vector v by this quaternion (q v q^-1)."""
        _require_finite(v.x, v.y, v.z)
        # t = 2 (q_vec x v); v' = v + w t + (q_vec x t)
        tx = 2.0 * (self.qy * v.z - self.qz * v.y)
        ty = 2.0 * (self.qz * v.x - self.qx * v.z)
        tz = 2.0 * (self.qx * v.y - self.qy * v.x)
        return Point3D(
            v.x + self.qw * tx + (self.qy * tz - self.qz * ty),
            v.y + self.qw * ty + (self.qz * tx - self.qx * tz),
            v.z + self.qw * tz + (self.qx * ty - self.qy * tx),
        )

    def compose(self, other: "Rotation") -> "Rotation":
        """Rotation equal to applying `other` first, then self (Hamilton product)."""
        ax, ay, az, aw = self.qx, self.qy, self.qz, self.qw
        bx, by, bz, bw = other.qx, other.qy, other.qz, other.qw
        qx = aw * bx + ax * bw + ay * bz - az * by
        qy = aw * by - ax * bz + ay * bw + az * bx
        qz = aw * bz + ax * by - ay * bx + az * bw
        qw = aw * bw - ax * bx - ay * by - az * bz
        n = math.sqrt(qx * qx + qy * qy + qz * qz + qw * qw)
        return Rotation(qx / n, qy / n, qz / n, qw / n)

    def inverse(self) -> "Rotation":
        return Rotation(-self.qx, -self.qy, -self.qz, self.qw)

    def as_matrix(self) -> list[list[float]]:
        """3x3 rotation matrix, row-major."""
        x, y, z, w = self.qx, self.qy, self.qz, self.qw
        return [
            [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
            [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
            [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
        ]


def rotate_vector(r: Rotation, v: Point3D) -> Point3D:
    return r.apply(v)


def compose_rotations(a: Rotation, b: Rotation) -> Rotation:
    return a.compose(b)


def rotation_from_euler(axis: str, angle: float, degrees: bool = False) -> Rotation:
    return Rotation.from_euler(axis, angle, degrees=degrees)


_DEFAULT_DIRECTION = Point3D(1.0, 0.0, 0.0)


def point_at_distance_and_rotation(
    point: Point3D,
    rotation: Rotation,
    distance: float,
    direction: Point3D = _DEFAULT_DIRECTION,
) -> Point3D:
    """point + distance * (rotation applied to direction).

    The direction is deliberately NOT renormalized: a non-unit direction
    scales the step, matching how callers pass axis vectors.
    """
    _require_finite(distance)
    if direction.norm() == 0.0:
        raise InvalidGeometry("direction must be non-zero")
    step = rotation.apply(direction)
    return Point3D(
        point.x + distance * step.x,
        point.y + distance * step.y,
        point.z + distance * step.z,
    )


@dataclass(frozen=True)
class Pose:
    """Position plus orientation; the universal spatial datum."""

    position: Point3D
    rotation: Rotation

    @classmethod
    def identity(cls) -> "Pose":
        return cls(Point3D(0.0, 0.0, 0.0), Rotation.identity())

    def to_json_obj(self) -> dict:
        return {
            "position": [self.position.x, self.position.y, self.position.z],
            "rotation": [self.rotation.qx, self.rotation.qy, self.rotation.qz, self.rotation.qw],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Pose":
        px, py, pz = obj["position"]
        qx, qy, qz, qw = obj["rotation"]
        return cls(Point3D(px, py, pz), Rotation(qx, qy, qz, qw))


CONTACT_EPS = 1e-9  # intervals closer than this count as touching, not overlapping


@dataclass(frozen=True)
class AABB:
    """Axis-aligned box. Touching faces do NOT count as overlap; penetrations
    below CONTACT_EPS are treated as touch so resting contact survives float
    subtraction noise."""

    min: Point3D
    max: Point3D

    def __post_init__(self) -> None:
        if self.min.x > self.max.x or self.min.y > self.max.y or self.min.z > self.max.z:
            raise InvalidGeometry("AABB min must be <= max componentwise")

    def overlaps(self, other: "AABB") -> bool:
        return (
            self.min.x < other.max.x - CONTACT_EPS
            and other.min.x < self.max.x - CONTACT_EPS
            and self.min.y < other.max.y - CONTACT_EPS
            and other.min.y < self.max.y - CONTACT_EPS
            and self.min.z < other.max.z - CONTACT_EPS
            and other.min.z < self.max.z - CONTACT_EPS
        )

    def overlaps_xy(self, other: "AABB") -> bool:
        return (
            self.min.x < other.max.x - CONTACT_EPS
            and other.min.x < self.max.x - CONTACT_EPS
            and self.min.y < other.max.y - CONTACT_EPS
            and other.min.y < self.max.y - CONTACT_EPS
        )


def aabb_overlap(a: AABB, b: AABB) -> bool:
    return a.overlaps(b)


def aabb_overlap_xy(a: AABB, b: AABB) -> bool:
    return a.overlaps_xy(b)


_ORTHO_TOL = 1e-6


@dataclass(frozen=True)
class RigidTransform:
    """4x4 homogeneous transform, row-major, meters."""

    rows: tuple[tuple[float, float, float, float], ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(float(v) for v in row) for row in self.rows)
        if len(rows) != 4 or any(len(r) != 4 for r in rows):
            raise InvalidGeometry("rigid transform must be 4x4")
        for row in rows:
            _require_finite(*row)
        if rows[3] != (0.0, 0.0, 0.0, 1.0):
            raise InvalidGeometry("bottom row must be (0, 0, 0, 1)")
        for i in range(3):
            for j in range(3):
                dot = sum(rows[k][i] * rows[k][j] for k in range(3))
                expected = 1.0 if i == j else 0.0
                if abs(dot - expected) > _ORTHO_TOL:
                    raise InvalidGeometry("upper-left 3x3 block is not orthonormal within 1e-6")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def identity(cls) -> "RigidTransform":
        return cls(
            (
                (1.0, 0.0, 0.0, 0.0),
                (0.0, 1.0, 0.0, 0.0),
                (0.0, 0.0, 1.0, 0.0),
                (0.0, 0.0, 0.0, 1.0),
            )
        )

    def apply(self, p: Point3D) -> Point3D:
        r = self.rows
        return Point3D(
            r[0][0] * p.x + r[0][1] * p.y + r[0][2] * p.z + r[0][3],
            r[1][0] * p.x + r[1][1] * p.y + r[1][2] * p.z + r[1][3],
            r[2][0] * p.x + r[2][1] * p.y + r[2][2] * p.z + r[2][3],
        )

    def inverse(self) -> "RigidTransform":
        r = self.rows
        # inverse of [R t; 0 1] with orthonormal R is [R^T, -R^T t; 0 1]
        tx = -(r[0][0] * r[0][3] + r[1][0] * r[1][3] + r[2][0] * r[2][3])
        ty = -(r[0][1] * r[0][3] + r[1][1] * r[1][3] + r[2][1] * r[2][3])
        tz = -(r[0][2] * r[0][3] + r[1][2] * r[1][3] + r[2][2] * r[2][3])
        return RigidTransform(
            (
                (r[0][0], r[1][0], r[2][0], tx),
                (r[0][1], r[1][1], r[2][1], ty),
                (r[0][2], r[1][2], r[2][2], tz),
                (0.0, 0.0, 0.0, 1.0),
            )
        )


def transform_point(t: RigidTransform, p: Point3D) -> Point3D:
    return t.apply(p)
