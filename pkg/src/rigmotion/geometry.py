"""Quaternion and vector primitives used across the animation pipeline.

Convention: quaternions are stored as (x, y, z, w), i.e. the vector part
first and the scalar part last. Wherever a positional 4-tuple appears
(animation strings, JSON arrays), the order is (q0, q1, q2, q3) =
(x, y, z, w). Rotations act on column vectors: ``q.rotate(v)`` rotates v
by q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

UNIT_NORM_TOL = 1e-6


@dataclass(frozen=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def scaled(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def is_finite(self) -> bool:
        return all(math.isfinite(c) for c in (self.x, self.y, self.z))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


def lerp_vec3(a: Vec3, b: Vec3, u: float) -> Vec3:
    return Vec3(
        a.x + (b.x - a.x) * u,
        a.y + (b.y - a.y) * u,
        a.z + (b.z - a.z) * u,
    )


@dataclass(frozen=True)
class Quaternion:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    w: float = 1.0

    @classmethod
    def identity(cls) -> "Quaternion":
        return cls(0.0, 0.0, 0.0, 1.0)

    @classmethod
    def from_axis_angle(cls, axis: Vec3, angle: float) -> "Quaternion":
        n = axis.norm()
        if n == 0.0:
            return cls.identity()
        s = math.sin(angle / 2.0) / n
        return cls(axis.x * s, axis.y * s, axis.z * s, math.cos(angle / 2.0))

    def norm(self) -> float:
        return math.sqrt(
            self.x * self.x + self.y * self.y + self.z * self.z + self.w * self.w
        )

    def is_unit(self, tol: float = UNIT_NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def normalized(self) -> "Quaternion":
        """Unit-length copy. Already-unit values (within 1e-9) are returned
        unchanged so normalization is exactly idempotent."""
        n = self.norm()
        if abs(n - 1.0) <= 1e-9:
            return self
        if n == 0.0 or not math.isfinite(n):
            raise ValueError(f"cannot normalize quaternion with norm {n}")
        return Quaternion(self.x / n, self.y / n, self.z / n, self.w / n)

    def negated(self) -> "Quaternion":
        return Quaternion(-self.x, -self.y, -self.z, -self.w)

    def conjugate(self) -> "Quaternion":
        return Quaternion(-self.x, -self.y, -self.z, self.w)

    def dot(self, other: "Quaternion") -> float:
        return (
            self.x * other.x
            + self.y * other.y
            + self.z * other.z
            + self.w * other.w
        )

    def __mul__(self, other: "Quaternion") -> "Quaternion":
        """Hamilton product; (a * b).rotate(v) == a.rotate(b.rotate(v))."""
        ax, ay, az, aw = self.x, self.y, self.z, self.w
        bx, by, bz, bw = other.x, other.y, other.z, other.w
        return Quaternion(
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
            aw * bw - ax * bx - ay * by - az * bz,
        )

    def rotate(self, v: Vec3) -> Vec3:
        # q * (v, 0) * q^-1 expanded for unit quaternions
        x, y, z, w = self.x, self.y, self.z, self.w
        tx = 2.0 * (y * v.z - z * v.y)
        ty = 2.0 * (z * v.x - x * v.z)
        tz = 2.0 * (x * v.y - y * v.x)
        return Vec3(
            v.x + w * tx + (y * tz - z * ty),
            v.y + w * ty + (z * tx - x * tz),
            v.z + w * tz + (x * ty - y * tx),
        )

    def to_axis_angle(self) -> tuple[Vec3, float]:
        """Axis and angle in [0, pi] for a unit quaternion (identity -> z axis, 0)."""
        w = max(-1.0, min(1.0, self.w))
        angle = 2.0 * math.acos(w)
        s = math.sqrt(max(0.0, 1.0 - w * w))
        if s < 1e-12:
            return Vec3(0.0, 0.0, 1.0), 0.0
        return Vec3(self.x / s, self.y / s, self.z / s), angle

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.z, self.w)


def geodesic_angle(a: Quaternion, b: Quaternion) -> float:
    """Rotation angle in radians between two unit quaternions (sign-agnostic)."""
    d = min(1.0, abs(a.dot(b)))
    return 2.0 * math.acos(d)


NLERP_DOT_THRESHOLD = 1.0 - 1e-8


def slerp(a: Quaternion, b: Quaternion, u: float) -> Quaternion:
    """Shortest-path spherical interpolation between unit quaternions.

    b is negated when a.dot(b) < 0 so the path never takes the long way
    around; near-parallel endpoints fall back to normalized lerp.
    """
    d = a.dot(b)
    if d < 0.0:
        b = b.negated()
        d = -d
    if d > NLERP_DOT_THRESHOLD:
        q = Quaternion(
            a.x + (b.x - a.x) * u,
            a.y + (b.y - a.y) * u,
            a.z + (b.z - a.z) * u,
            a.w + (b.w - a.w) * u,
        )
        return q.normalized()
    theta = math.acos(min(1.0, d))
    sin_theta = math.sin(theta)
    ka = math.sin((1.0 - u) * theta) / sin_theta
    kb = math.sin(u * theta) / sin_theta
    return Quaternion(
        a.x * ka + b.x * kb,
        a.y * ka + b.y * kb,
        a.z * ka + b.z * kb,
        a.w * ka + b.w * kb,
    )
