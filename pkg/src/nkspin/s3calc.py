"""Differential calculus on the round 3-sphere in the left-invariant gauge.

Every tangent vector at g is written X = g x with x imaginary, every
vector field as Y_g = g y(g) for a function y into Im H, and all frame
computations happen in the fixed basis (i, j, k), positively oriented.
Sign conventions (divergence as minus the trace, the Hodge contraction,
the orientation of det_triple) are pinned by the basis-level tests rather
than re-derived.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, DegeneracyError, DomainError
from .quat import (IM_BASIS, ImQuat, Quat, UnitQuat, cross, dot, exp_im)
from .sampling import DEFAULT_FD_STEP

Differential = Callable[[UnitQuat, ImQuat], "object"]


def _resolve_mode(mode: str | None, has_analytic: bool) -> str:
    if mode is None:
        return "analytic" if has_analytic else "fd"
    if mode not in ("analytic", "fd"):
        raise DomainError(f"unknown derivative mode {mode!r}")
    if mode == "analytic" and not has_analytic:
        raise ConfigurationError("analytic mode requested but no analytic "
                                 "differential is registered")
    return mode


def directional_derivative(F, g: UnitQuat, x: ImQuat, *, mode: str = "fd",
                           h: float = DEFAULT_FD_STEP, richardson: bool = False,
                           analytic: Differential | None = None):
    """d/dt F(g exp(t x)) at t = 0.

    Works for values in R, Im H, H or numpy arrays.  In "fd" mode a central
    difference along the one-parameter curve is used; "analytic" evaluates
    the supplied differential and raises ConfigurationError without one.
    """
    mode = _resolve_mode(mode, analytic is not None)
    if mode == "analytic":
        return analytic(g, x)
    if h <= 0.0:
        raise DomainError("finite-difference step must be positive")

    def central(step: float):
        gp = g * exp_im(step * x)
        gm = g * exp_im(-step * x)
        return (F(gp) - F(gm)) / (2.0 * step)

    if not richardson:
        return central(h)
    d1 = central(h)
    d2 = central(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


@dataclass(slots=True)
class TangentS3:
    """Tangent vector g x at the point g, stored by its Lie component x."""

    base: UnitQuat
    lie: ImQuat

    def ambient(self) -> Quat:
        return self.base * self.lie

    def norm(self) -> float:
        return self.lie.norm()


@dataclass(frozen=True)
class VectorFieldS3:
    """Vector field Y_g = g y(g) given by its left-frame component y.

    dy, when registered, must map (g, x) to the derivative of y along the
    curve t -> g exp(t x); it is trusted only as far as the FD agreement
    tests in the suite.
    """

    y: Callable[[UnitQuat], ImQuat]
    dy: Callable[[UnitQuat, ImQuat], ImQuat] | None = None
    name: str = "field"

    def at(self, g: UnitQuat) -> TangentS3:
        return TangentS3(g, self.y(g))

    def diff(self, g: UnitQuat, x: ImQuat, mode: str | None = None,
             h: float = DEFAULT_FD_STEP) -> ImQuat:
        mode = _resolve_mode(mode, self.dy is not None)
        if mode == "analytic":
            return self.dy(g, x)
        return directional_derivative(self.y, g, x, mode="fd", h=h)


@dataclass(frozen=True)
class ScalarFieldS3:
    """Scalar field with an optional analytic directional derivative."""

    value: Callable[[UnitQuat], float]
    dvalue: Callable[[UnitQuat, ImQuat], float] | None = None
    name: str = "scalar"

    def diff(self, g: UnitQuat, x: ImQuat, mode: str | None = None,
             h: float = DEFAULT_FD_STEP) -> float:
        mode = _resolve_mode(mode, self.dvalue is not None)
        if mode == "analytic":
            return self.dvalue(g, x)
        return directional_derivative(self.value, g, x, mode="fd", h=h)


def left_invariant(b: ImQuat, name: str | None = None) -> VectorFieldS3:
    """Y_g = g b; geodesic, divergence-free."""
    return VectorFieldS3(y=lambda g: b, dy=lambda g, x: ImQuat(0.0, 0.0, 0.0),
                         name=name or "left_invariant")


def right_invariant(b: ImQuat, name: str | None = None) -> VectorFieldS3:
    """Y_g = b g, i.e. y(g) = g^-1 b g; geodesic, divergence-free."""

    def y(g: UnitQuat) -> ImQuat:
        return (g.inverse() * b * g).im

    def dy(g: UnitQuat, x: ImQuat) -> ImQuat:
        v = y(g)
        c = cross(v, x)
        return ImQuat(2.0 * c.x, 2.0 * c.y, 2.0 * c.z)

    return VectorFieldS3(y=y, dy=dy, name=name or "right_invariant")


def covariant_derivative(Y: VectorFieldS3, X: TangentS3, *,
                         mode: str | None = None,
                         h: float = DEFAULT_FD_STEP) -> TangentS3:
    """Levi-Civita derivative: component (1/2)[x, y(g)] + y_*(g x)."""
    g, x = X.base, X.lie
    return TangentS3(g, cross(x, Y.y(g)) + Y.diff(g, x, mode, h))


def divergence(Y: VectorFieldS3, g: UnitQuat, *, mode: str | None = None,
               h: float = DEFAULT_FD_STEP) -> float:
    """Divergence with the sign convention delta Y = -trace(nabla Y).

    The bracket half of the covariant derivative is trace-free, so only
    the derivative of the component function contributes.
    """
    return -sum(dot(e, Y.diff(g, e, mode, h)) for e in IM_BASIS)


def gradient(alpha: ScalarFieldS3, g: UnitQuat, *, mode: str | None = None,
             h: float = DEFAULT_FD_STEP) -> TangentS3:
    comps = [alpha.diff(g, e, mode, h) for e in IM_BASIS]
    return TangentS3(g, ImQuat(comps[0], comps[1], comps[2]))


@dataclass(slots=True)
class TwoFormS3:
    """A 2-form at a point, stored by its antisymmetric frame matrix."""

    base: UnitQuat
    matrix: np.ndarray  # matrix[i, j] = omega(g e_i, g e_j)

    def dual(self) -> ImQuat:
        """Vector z with omega = *(z dual 1-form): z_k = omega(e_i, e_j)."""
        m = self.matrix
        return ImQuat(m[1, 2], m[2, 0], m[0, 1])


def exterior_derivative_dual(Y: VectorFieldS3, g: UnitQuat, *,
                             mode: str | None = None,
                             h: float = DEFAULT_FD_STEP) -> TwoFormS3:
    """Exterior derivative of the 1-form dual to Y, in frame coordinates.

    dY(g e_i, g e_j) = <y_*(g e_i), e_j> - <y_*(g e_j), e_i>
                       - 2 <y, cross(e_i, e_j)>,
    the last term being -<Y, [g e_i, g e_j]> with [g e_i, g e_j] = g [e_i, e_j].
    With this sign, dY = -2*Y for left-invariant Y and +2*Y for
    right-invariant Y.
    """
    dys = [Y.diff(g, e, mode, h) for e in IM_BASIS]
    v = Y.y(g)
    m = np.zeros((3, 3))
    for i in range(3):
        for j in range(i + 1, 3):
            val = (dot(dys[i], IM_BASIS[j]) - dot(dys[j], IM_BASIS[i])
                   - 2.0 * dot(v, cross(IM_BASIS[i], IM_BASIS[j])))
            m[i, j] = val
            m[j, i] = -val
    return TwoFormS3(g, m)


def hodge_contract(x: ImQuat, y: ImQuat) -> ImQuat:
    """X contracted into *Y in frame components: x -| *y = cross(y, x)."""
    return cross(y, x)


def det_triple(x: ImQuat, y: ImQuat, z: ImQuat) -> float:
    """<vol, x ^ y ^ z>, oriented so that det_triple(i, j, k) = +1."""
    return dot(x, cross(y, z))


@dataclass(frozen=True)
class OrthoFrame:
    """Three vector fields forming a pointwise oriented orthonormal frame."""

    xi1: VectorFieldS3
    xi2: VectorFieldS3
    xi3: VectorFieldS3

    @property
    def fields(self) -> tuple[VectorFieldS3, VectorFieldS3, VectorFieldS3]:
        return (self.xi1, self.xi2, self.xi3)

    def matrix_at(self, g: UnitQuat) -> np.ndarray:
        """Columns are the frame components (v1, v2, v3) at g."""
        return np.column_stack([f.y(g).as_array() for f in self.fields])

    def orthonormality_residual(self, g: UnitQuat) -> float:
        """Max deviation from an oriented orthonormal triple at g."""
        m = self.matrix_at(g)
        res = float(np.max(np.abs(m.T @ m - np.eye(3))))
        return max(res, abs(float(np.linalg.det(m)) - 1.0))


def flow_orbit(Y: VectorFieldS3, g0: UnitQuat, t_max: float, steps: int, *,
               min_speed: float = 1e-8) -> list[tuple[float, UnitQuat]]:
    """RK4 integration of the flow of Y, renormalized each step.

    For a geodesic unit field the orbit is a great circle and closes at
    t = 2 pi up to the integrator error O(t h^4).
    """
    if steps < 8:
        raise DomainError("orbit integration needs at least 8 steps")

    def vel(q: Quat) -> Quat:
        gq = UnitQuat(q.w, q.x, q.y, q.z)
        v = Y.y(gq)
        if v.norm() < min_speed:
            raise DegeneracyError(f"field magnitude {v.norm():.3e} below "
                                  f"{min_speed:.1e} along the orbit")
        return gq * v

    dt = t_max / steps
    out: list[tuple[float, UnitQuat]] = [(0.0, g0)]
    q: Quat = g0
    for k in range(steps):
        k1 = vel(q)
        k2 = vel(q + (dt / 2.0) * k1)
        k3 = vel(q + (dt / 2.0) * k2)
        k4 = vel(q + dt * k3)
        q = q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        q = UnitQuat(q.w, q.x, q.y, q.z)
        out.append(((k + 1) * dt, q))
    return out
