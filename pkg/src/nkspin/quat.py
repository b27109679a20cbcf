"""Quaternion algebra underlying the 3-sphere calculus.

Conventions: Hamilton product with i*j = k, components stored as
(w, x, y, z).  The imaginary part Im H is identified with R^3 carrying
the standard dot and cross products, so that for imaginary p, q

    p * q = -dot(p, q) + cross(p, q)

holds as a quaternion identity.  Instances are plain value objects and
are never mutated after construction; they can be shared across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BranchError, DomainError

UNIT_NORM_TOL = 1e-12
ROTATION_TOL = 1e-8


@dataclass(slots=True)
class Quat:
    """Quaternion w + x*i + y*j + z*k."""

    w: float
    x: float
    y: float
    z: float

    def __add__(self, other: Quat) -> Quat:
        return Quat(self.w + other.w, self.x + other.x,
                    self.y + other.y, self.z + other.z)

    def __sub__(self, other: Quat) -> Quat:
        return Quat(self.w - other.w, self.x - other.x,
                    self.y - other.y, self.z - other.z)

    def __neg__(self) -> Quat:
        return Quat(-self.w, -self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, Quat):
            return Quat(
                self.w * other.w - self.x * other.x - self.y * other.y - self.z * other.z,
                self.w * other.x + self.x * other.w + self.y * other.z - self.z * other.y,
                self.w * other.y - self.x * other.z + self.y * other.w + self.z * other.x,
                self.w * other.z + self.x * other.y - self.y * other.x + self.z * other.w,
            )
        if isinstance(other, ImQuat):
            return self * other.to_quat()
        s = float(other)
        return Quat(self.w * s, self.x * s, self.y * s, self.z * s)

    def __rmul__(self, s) -> Quat:
        s = float(s)
        return Quat(self.w * s, self.x * s, self.y * s, self.z * s)

    def __truediv__(self, s) -> Quat:
        s = float(s)
        return Quat(self.w / s, self.x / s, self.y / s, self.z / s)

    @property
    def re(self) -> float:
        return self.w

    @property
    def im(self) -> ImQuat:
        return ImQuat(self.x, self.y, self.z)

    def conjugate(self) -> Quat:
        return Quat(self.w, -self.x, -self.y, -self.z)

    def norm2(self) -> float:
        return self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def inverse(self) -> Quat:
        n2 = self.norm2()
        if n2 <= 0.0 or not math.isfinite(n2):
            raise DomainError("cannot invert a quaternion of zero norm")
        return Quat(self.w / n2, -self.x / n2, -self.y / n2, -self.z / n2)

    def normalized(self) -> UnitQuat:
        return UnitQuat(self.w, self.x, self.y, self.z)

    def dot4(self, other: Quat) -> float:
        """R^4 inner product of the component vectors."""
        return (self.w * other.w + self.x * other.x
                + self.y * other.y + self.z * other.z)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    @classmethod
    def from_array(cls, v) -> Quat:
        return cls(float(v[0]), float(v[1]), float(v[2]), float(v[3]))


@dataclass(slots=True)
class UnitQuat(Quat):
    """Point of the unit 3-sphere; renormalized on construction.

    Renormalizing instead of rejecting keeps long flows stable: every
    step of an integration re-enters through this constructor.
    """

    def __post_init__(self):
        n2 = self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
        if n2 <= 0.0 or not math.isfinite(n2):
            raise DomainError("cannot normalize a quaternion of zero norm")
        n = math.sqrt(n2)
        self.w /= n
        self.x /= n
        self.y /= n
        self.z /= n

    def __mul__(self, other):
        if isinstance(other, UnitQuat):
            p = Quat.__mul__(self, other)
            return UnitQuat(p.w, p.x, p.y, p.z)
        return Quat.__mul__(self, other)

    def __neg__(self) -> UnitQuat:
        return UnitQuat(-self.w, -self.x, -self.y, -self.z)

    def inverse(self) -> UnitQuat:
        return UnitQuat(self.w, -self.x, -self.y, -self.z)

    @classmethod
    def of(cls, q: Quat) -> UnitQuat:
        return cls(q.w, q.x, q.y, q.z)


@dataclass(slots=True)
class ImQuat:
    """Imaginary quaternion, the Lie algebra of the unit sphere."""

    x: float
    y: float
    z: float

    def __add__(self, other: ImQuat) -> ImQuat:
        return ImQuat(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: ImQuat) -> ImQuat:
        return ImQuat(self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self) -> ImQuat:
        return ImQuat(-self.x, -self.y, -self.z)

    def __mul__(self, other):
        if isinstance(other, (Quat, ImQuat)):
            return self.to_quat() * other
        s = float(other)
        return ImQuat(self.x * s, self.y * s, self.z * s)

    def __rmul__(self, s) -> ImQuat:
        s = float(s)
        return ImQuat(self.x * s, self.y * s, self.z * s)

    def __truediv__(self, s) -> ImQuat:
        s = float(s)
        return ImQuat(self.x / s, self.y / s, self.z / s)

    def to_quat(self) -> Quat:
        return Quat(0.0, self.x, self.y, self.z)

    def norm2(self) -> float:
        return self.x * self.x + self.y * self.y + self.z * self.z

    def norm(self) -> float:
        return math.sqrt(self.norm2())

    def normalized(self) -> ImQuat:
        n = self.norm()
        if n <= 0.0 or not math.isfinite(n):
            raise DomainError("cannot normalize a zero imaginary quaternion")
        return ImQuat(self.x / n, self.y / n, self.z / n)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, v) -> ImQuat:
        return cls(float(v[0]), float(v[1]), float(v[2]))


ONE = UnitQuat(1.0, 0.0, 0.0, 0.0)
ZERO_IM = ImQuat(0.0, 0.0, 0.0)
EI = ImQuat(1.0, 0.0, 0.0)
EJ = ImQuat(0.0, 1.0, 0.0)
EK = ImQuat(0.0, 0.0, 1.0)
IM_BASIS = (EI, EJ, EK)


def dot(a: ImQuat, b: ImQuat) -> float:
    return a.x * b.x + a.y * b.y + a.z * b.z


def cross(a: ImQuat, b: ImQuat) -> ImQuat:
    return ImQuat(a.y * b.z - a.z * b.y,
                  a.z * b.x - a.x * b.z,
                  a.x * b.y - a.y * b.x)


def bracket(a: ImQuat, b: ImQuat) -> ImQuat:
    """Lie bracket [a, b] = ab - ba = 2 cross(a, b)."""
    c = cross(a, b)
    return ImQuat(2.0 * c.x, 2.0 * c.y, 2.0 * c.z)


def exp_im(v: ImQuat) -> UnitQuat:
    """exp(theta n) = cos theta + n sin theta for v = theta n."""
    t = v.norm()
    if t < 1e-8:
        t2 = t * t
        c = 1.0 - t2 / 2.0 + t2 * t2 / 24.0
        s = 1.0 - t2 / 6.0 + t2 * t2 / 120.0
    else:
        c = math.cos(t)
        s = math.sin(t) / t
    return UnitQuat(c, s * v.x, s * v.y, s * v.z)


def log_unit(q: UnitQuat, branch_tol: float = 1e-12) -> ImQuat:
    """Inverse of exp_im on the ball |v| < pi; undefined at q = -1."""
    s = math.sqrt(q.x * q.x + q.y * q.y + q.z * q.z)
    if s <= branch_tol:
        if q.w < 0.0:
            raise BranchError("logarithm undefined at the antipode of 1")
        return ImQuat(q.x, q.y, q.z)
    f = math.atan2(s, q.w) / s
    return ImQuat(f * q.x, f * q.y, f * q.z)


def conjugation_matrix(q: Quat) -> np.ndarray:
    """Matrix of a -> q a q^-1 on Im H in the basis (i, j, k)."""
    n2 = q.norm2()
    if n2 <= 0.0:
        raise DomainError("conjugation by a zero quaternion is undefined")
    w, x, y, z = q.w / math.sqrt(n2), q.x / math.sqrt(n2), q.y / math.sqrt(n2), q.z / math.sqrt(n2)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def _canonical_sign(w: float, x: float, y: float, z: float,
                    eps: float = 1e-12) -> float:
    # nonnegative w; ties broken by the first nonzero of (x, y, z)
    for c in (w, x, y, z):
        if c > eps:
            return 1.0
        if c < -eps:
            return -1.0
    return 1.0


def rotation_to_unit_quat(r, tol: float = ROTATION_TOL) -> UnitQuat:
    """Unit quaternion q with q a q^-1 = R a for all imaginary a.

    The result is determined up to global sign; the sign is fixed
    deterministically (nonnegative w, ties broken by the first nonzero
    vector component being positive).
    """
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise DomainError(f"expected a 3x3 matrix, got shape {r.shape}")
    if np.max(np.abs(r.T @ r - np.eye(3))) > tol:
        raise DomainError("matrix is not orthogonal within tolerance")
    if abs(np.linalg.det(r) - 1.0) > tol:
        raise DomainError("matrix does not have determinant +1 within tolerance")

    t = r[0, 0] + r[1, 1] + r[2, 2]
    if t > 0.0:
        s = math.sqrt(1.0 + t) * 2.0
        w = 0.25 * s
        x = (r[2, 1] - r[1, 2]) / s
        y = (r[0, 2] - r[2, 0]) / s
        z = (r[1, 0] - r[0, 1]) / s
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = math.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        w = (r[2, 1] - r[1, 2]) / s
        x = 0.25 * s
        y = (r[0, 1] + r[1, 0]) / s
        z = (r[0, 2] + r[2, 0]) / s
    elif r[1, 1] > r[2, 2]:
        s = math.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        w = (r[0, 2] - r[2, 0]) / s
        x = (r[0, 1] + r[1, 0]) / s
        y = 0.25 * s
        z = (r[1, 2] + r[2, 1]) / s
    else:
        s = math.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        w = (r[1, 0] - r[0, 1]) / s
        x = (r[0, 2] + r[2, 0]) / s
        y = (r[1, 2] + r[2, 1]) / s
        z = 0.25 * s

    sign = _canonical_sign(w, x, y, z)
    return UnitQuat(sign * w, sign * x, sign * y, sign * z)
