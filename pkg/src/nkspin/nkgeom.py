"""The nearly Kahler product of two unit 3-spheres.

The Lie-algebra inner product is the rescaled (negative) Killing form,
which on Im H is kappa times the standard dot product with kappa = 2/3.
That single number feeds every radius and volume below, so it is computed
from ad-traces at import time and asserted rather than hard-coded.

Tangent vectors at (g1, g2) are stored by their Lie components (x1, x2),
the vector being (g1 x1, g2 x2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, runtime_checkable

import numpy as np

from .errors import ConsistencyError, DegeneracyError, DomainError
from .quat import (IM_BASIS, ImQuat, ONE, Quat, UnitQuat, ZERO_IM, bracket,
                   cross, dot)
from .sampling import (DEFAULT_FD_STEP, MCEstimate, SampleSet,
                       estimate_values, parallel_map)
from .spinor import SpinorField

SQRT3 = math.sqrt(3.0)


def compute_kappa() -> float:
    """-(1/12) trace(ad_x o ad_x) for unit x, checked on several axes."""
    probes = [*IM_BASIS, ImQuat(1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0)]
    vals = []
    for x in probes:
        ad = np.column_stack([bracket(x, e).as_array() for e in IM_BASIS])
        vals.append(-float(np.trace(ad @ ad)) / 12.0)
    if max(vals) - min(vals) > 1e-13:
        raise ConsistencyError(f"ad-trace normalization is axis-dependent: {vals}")
    return vals[0]


@dataclass(frozen=True)
class KappaConstant:
    """Ratio between the rescaled Killing form and the standard dot."""

    value: float

    @classmethod
    def from_ad_trace(cls) -> KappaConstant:
        v = compute_kappa()
        if abs(v - 2.0 / 3.0) > 1e-14:
            raise ConsistencyError(f"kappa = {v!r}, expected 2/3")
        return cls(v)


KAPPA = KappaConstant.from_ad_trace()


def ip(x: ImQuat, y: ImQuat) -> float:
    """Lie-algebra inner product: kappa times the standard dot."""
    return KAPPA.value * dot(x, y)


@dataclass(slots=True)
class ProductPoint:
    g1: UnitQuat
    g2: UnitQuat


@dataclass(slots=True)
class ProductTangent:
    base: ProductPoint
    x1: ImQuat
    x2: ImQuat


def _same_base(a: ProductTangent, b: ProductTangent, tol: float = 1e-9) -> None:
    p, q = a.base, b.base
    if (abs(p.g1.w - q.g1.w) > tol or abs(p.g1.x - q.g1.x) > tol
            or abs(p.g1.y - q.g1.y) > tol or abs(p.g1.z - q.g1.z) > tol
            or abs(p.g2.w - q.g2.w) > tol or abs(p.g2.x - q.g2.x) > tol
            or abs(p.g2.y - q.g2.y) > tol or abs(p.g2.z - q.g2.z) > tol):
        raise DomainError("tangent vectors live at different base points")


def nk_metric(a: ProductTangent, b: ProductTangent) -> float:
    """(1/3)(2<x1,y1> + 2<x2,y2> - <x1,y2> - <x2,y1>)."""
    _same_base(a, b)
    return (2.0 * ip(a.x1, b.x1) + 2.0 * ip(a.x2, b.x2)
            - ip(a.x1, b.x2) - ip(a.x2, b.x1)) / 3.0


def nk_J(a: ProductTangent) -> ProductTangent:
    """J(x1, x2) = (1/sqrt 3)(x1 - 2 x2, 2 x1 - x2)."""
    return ProductTangent(a.base,
                          (a.x1 - 2.0 * a.x2) / SQRT3,
                          (2.0 * a.x1 - a.x2) / SQRT3)


def nk_omega(a: ProductTangent, b: ProductTangent) -> float:
    """Fundamental 2-form (1/sqrt 3)(<x1, y2> - <x2, y1>); equals g(J., .)."""
    _same_base(a, b)
    return (ip(a.x1, b.x2) - ip(a.x2, b.x1)) / SQRT3


@runtime_checkable
class Family(Protocol):
    label: str

    def point(self, g: UnitQuat) -> ProductPoint: ...

    def tangent(self, g: UnitQuat, x: ImQuat) -> ProductTangent: ...


def _unit_im(v: ImQuat, what: str) -> None:
    if abs(v.norm() - 1.0) > 1e-9:
        raise DomainError(f"{what} must be a unit imaginary quaternion, "
                          f"|{what}| = {v.norm():.6g}")


@dataclass(frozen=True)
class Gamma1:
    """First factor {(g, 1)}: round of radius 2/3."""

    label: str = "gamma1"

    def point(self, g: UnitQuat) -> ProductPoint:
        return ProductPoint(g, ONE)

    def tangent(self, g: UnitQuat, x: ImQuat) -> ProductTangent:
        return ProductTangent(self.point(g), x, ZERO_IM)


@dataclass(frozen=True)
class Gamma2:
    """Diagonal {(g, g)}: round of radius 2/3."""

    label: str = "gamma2"

    def point(self, g: UnitQuat) -> ProductPoint:
        return ProductPoint(g, g)

    def tangent(self, g: UnitQuat, x: ImQuat) -> ProductTangent:
        return ProductTangent(self.point(g), x, x)


@dataclass(frozen=True)
class Gamma3:
    """Conjugation graph {(g, g^-1 b g)}: Berger sphere."""

    b: ImQuat
    label: str = "gamma3"

    def __post_init__(self):
        _unit_im(self.b, "b")

    def point(self, g: UnitQuat) -> ProductPoint:
        return ProductPoint(g, UnitQuat.of(g.inverse() * self.b * g))

    def tangent(self, g: UnitQuat, x: ImQuat) -> ProductTangent:
        h = g.inverse() * self.b * g
        return ProductTangent(self.point(g), x, x - (h.inverse() * x * h).im)

    def fiber_axis(self, g: UnitQuat) -> ImQuat:
        return (g.inverse() * self.b * g).im


@dataclass(frozen=True)
class Gamma4:
    """Right translate {(g, g b)}: Berger sphere."""

    b: ImQuat
    label: str = "gamma4"

    def __post_init__(self):
        _unit_im(self.b, "b")

    def point(self, g: UnitQuat) -> ProductPoint:
        return ProductPoint(g, UnitQuat.of(g * self.b.to_quat()))

    def tangent(self, g: UnitQuat, x: ImQuat) -> ProductTangent:
        bq = self.b.to_quat()
        return ProductTangent(self.point(g), x, (bq.inverse() * x * bq).im)

    def fiber_axis(self, g: UnitQuat) -> ImQuat:
        return self.b


@dataclass(frozen=True)
class LFamily:
    """Double conjugation orbit {(g a g^-1, g b g^-1)}, a perp b: round 4/3."""

    a: ImQuat
    b: ImQuat
    label: str = "lab"

    def __post_init__(self):
        _unit_im(self.a, "a")
        _unit_im(self.b, "b")
        if abs(dot(self.a, self.b)) > 1e-9:
            raise DomainError(f"a and b must be orthogonal, <a,b> = "
                              f"{dot(self.a, self.b):.3e}")

    def point(self, g: UnitQuat) -> ProductPoint:
        gi = g.inverse()
        return ProductPoint(UnitQuat.of(g * self.a.to_quat() * gi),
                            UnitQuat.of(g * self.b.to_quat() * gi))

    def tangent(self, g: UnitQuat, x: ImQuat) -> ProductTangent:
        gi = g.inverse()
        u1 = -(self.a * bracket(x, self.a))
        u2 = -(self.b * bracket(x, self.b))
        return ProductTangent(self.point(g),
                              (g * u1 * gi).im,
                              (g * u2 * gi).im)


@dataclass(frozen=True)
class GraphInverse:
    """Graph {(g, f(g)^-1)} of the inverse of a sphere-valued map f.

    Lagrangian exactly when the derivative matrix of f is symmetric,
    which is the generalized Killing condition for the spinor with gauge
    component f.
    """

    psi: SpinorField
    mode: str | None = None
    h: float = DEFAULT_FD_STEP
    label: str = "graphinv"

    def _value(self, g: UnitQuat) -> Quat:
        fg = self.psi.f(g)
        if abs(fg.norm() - 1.0) > 1e-6:
            raise DomainError(f"graph map must take values in the unit "
                              f"sphere, |f| = {fg.norm():.6g}")
        return fg

    def point(self, g: UnitQuat) -> ProductPoint:
        return ProductPoint(g, UnitQuat.of(self._value(g).inverse()))

    def tangent(self, g: UnitQuat, x: ImQuat) -> ProductTangent:
        fg = self._value(g)
        fs = self.psi.diff(g, x, self.mode, self.h)
        return ProductTangent(self.point(g), x, -((fs * fg.inverse()).im))


def family_point(f: Family, g: UnitQuat) -> ProductPoint:
    return f.point(g)


def family_tangent(f: Family, g: UnitQuat, x: ImQuat) -> ProductTangent:
    return f.tangent(g, x)


def lagrangian_residual(f: Family, samples: SampleSet) -> float:
    """max |Omega(T_i, T_j)| over samples and frame tangent pairs."""

    def per_sample(g: UnitQuat) -> float:
        t = [f.tangent(g, e) for e in IM_BASIS]
        worst = 0.0
        for i in range(3):
            for j in range(i + 1, 3):
                worst = max(worst, abs(nk_omega(t[i], t[j])))
        return worst

    return max(parallel_map(per_sample, samples.points))


def induced_gram(f: Family, g: UnitQuat) -> np.ndarray:
    """Pullback metric G_ij = g(T_i, T_j) on the frame tangents at g."""
    t = [f.tangent(g, e) for e in IM_BASIS]
    m = np.zeros((3, 3))
    for i in range(3):
        for j in range(i, 3):
            m[i, j] = m[j, i] = nk_metric(t[i], t[j])
    return m


@dataclass(frozen=True)
class GeometryFit:
    """Classification of the induced metric of an immersed family."""

    kind: str                         # "round" | "berger" | "other"
    residual: float
    radius: float | None = None       # round
    c_base: float | None = None       # berger
    c_fiber: float | None = None      # berger
    axis_residual: float | None = None


@dataclass(frozen=True)
class GramReport:
    family: str
    grams: np.ndarray                 # (n, 3, 3)
    fit: GeometryFit
    volume_ratio: float               # mean sqrt(det G); ratio to vol(S^3)
    volume_stderr: float
    lagrangian_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.fit.kind != "other" and self.fit.residual <= self.tol


def _fit_round(grams: np.ndarray) -> tuple[float, float]:
    c2 = float(np.mean(grams[:, range(3), range(3)]))
    res = float(np.max(np.abs(grams - c2 * np.eye(3))))
    return c2, res


def _fit_berger(grams: np.ndarray, axis: Callable[[UnitQuat], ImQuat] | None,
                points) -> tuple[float, float, float, float | None]:
    evals = np.zeros((len(grams), 3))
    evecs = np.zeros((len(grams), 3, 3))
    for i, gm in enumerate(grams):
        w, v = np.linalg.eigh(gm)
        evals[i] = w
        evecs[i] = v
    mean = evals.mean(axis=0)
    # the simple eigenvalue sits at whichever end has the wider gap
    if mean[1] - mean[0] >= mean[2] - mean[1]:
        simple, dbl = 0, (1, 2)
    else:
        simple, dbl = 2, (0, 1)
    pair_spread = float(np.max(np.abs(evals[:, dbl[0]] - evals[:, dbl[1]])))
    mu_simple = float(evals[:, simple].mean())
    mu_double = float(evals[:, dbl].mean())
    drift = max(float(np.max(np.abs(evals[:, simple] - mu_simple))),
                float(np.max(np.abs(evals[:, dbl] - mu_double))))
    axis_res: float | None = None
    if axis is not None:
        axis_res = 0.0
        for i, g in enumerate(points):
            u = evecs[i][:, simple]
            a = axis(g).as_array()
            axis_res = max(axis_res, float(min(np.linalg.norm(u - a),
                                               np.linalg.norm(u + a))))
    return mu_simple, mu_double, max(pair_spread, drift), axis_res


def fit_geometry(f: Family, samples: SampleSet, tol: float = 1e-6, *,
                 det_tol: float = 1e-10) -> GramReport:
    """Classify the induced metric as round / Berger / other.

    Round means G = c^2 I for one constant c across all samples.  Berger
    means one simple and one double eigenvalue, constant across samples,
    with the simple eigenvector tracking the family's fiber axis when the
    family exposes one.  Everything else is "other".
    """
    grams = np.stack(parallel_map(lambda g: induced_gram(f, g), samples.points))
    dets = np.linalg.det(grams)
    if np.min(dets) <= det_tol:
        raise DegeneracyError(f"immersion degenerates: min det G = "
                              f"{np.min(dets):.3e}")

    c2, round_res = _fit_round(grams)
    axis = getattr(f, "fiber_axis", None)
    mu_s, mu_d, berger_res, axis_res = _fit_berger(grams, axis, samples.points)

    if round_res <= tol:
        fit = GeometryFit(kind="round", residual=round_res,
                          radius=math.sqrt(c2))
    elif berger_res <= tol and (axis_res is None or axis_res <= tol):
        fit = GeometryFit(kind="berger", residual=berger_res,
                          c_base=math.sqrt(mu_d), c_fiber=math.sqrt(mu_s),
                          axis_residual=axis_res)
    else:
        fit = GeometryFit(kind="other", residual=min(round_res, berger_res))

    vol = estimate_values(np.sqrt(dets))
    lag = lagrangian_residual(f, samples)
    return GramReport(family=f.label, grams=grams, fit=fit,
                      volume_ratio=vol.mean, volume_stderr=vol.standard_error,
                      lagrangian_residual=lag, tol=tol)


def volume_ratio(f: Family, samples: SampleSet, *,
                 det_tol: float = 1e-10,
                 const_tol: float | None = 1e-10) -> MCEstimate:
    """Monte Carlo volume of the family relative to vol(S^3).

    The integrand is the parameter-domain pullback density sqrt(det G)
    over the unit sphere, so the estimate is directly the volume ratio.
    Constant integrands short-circuit to the exact value.
    """

    def density(g: UnitQuat) -> float:
        d = float(np.linalg.det(induced_gram(f, g)))
        if d <= det_tol:
            raise DegeneracyError(f"immersion degenerates at {g}: det = {d:.3e}")
        return math.sqrt(d)

    values = np.array(parallel_map(density, samples.points), dtype=float)
    return estimate_values(values, const_tol)


def admissible_round_radius(r: float, tol: float = 1e-6) -> tuple[bool, int | None]:
    """Whether 3r is an integer k >= 2; returns (admissible, k)."""
    if r <= 0.0:
        raise DomainError("radius must be positive")
    k = round(3.0 * r)
    if abs(3.0 * r - k) <= tol and k >= 2:
        return True, int(k)
    return False, None


@dataclass(frozen=True)
class ComponentGroup:
    volume: float
    members: tuple[str, ...]


def component_invariant(reports: list[GramReport], *,
                        vol_tol: float = 1e-6,
                        lag_tol: float = 1e-8) -> tuple[ComponentGroup, ...]:
    """Group verified-Lagrangian families by their volume ratio.

    Volume is locally constant on the space of Lagrangian submanifolds, so
    distinct volumes certify distinct connected components.
    """
    for r in reports:
        if r.lagrangian_residual > lag_tol:
            raise DomainError(f"family {r.family} did not pass its Lagrangian "
                              f"check: {r.lagrangian_residual:.3e} > {lag_tol:.1e}")
    ordered = sorted(reports, key=lambda r: r.volume_ratio)
    groups: list[list[GramReport]] = []
    for r in ordered:
        if groups and abs(r.volume_ratio - groups[-1][0].volume_ratio) <= vol_tol:
            groups[-1].append(r)
        else:
            groups.append([r])
    return tuple(
        ComponentGroup(volume=float(np.mean([r.volume_ratio for r in grp])),
                       members=tuple(r.family for r in grp))
        for grp in groups
    )
