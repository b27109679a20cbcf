"""Spinor fields on the 3-sphere in the fixed left-invariant gauge.

A spinor is stored by its H-valued gauge component f; the frame lift is
never materialized.  The Clifford module is pinned by two requirements:
the constant spinor must satisfy nabla_X Psi = (1/2) X . Psi, and the
Hodge dual of a vector must act like the vector itself.  Both force the
action of a tangent vector g x to be left multiplication by x on f,
which fixes the convention up to the global sign already absorbed in
the +-f ambiguity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConsistencyError, DegeneracyError, DomainError
from .quat import (IM_BASIS, ImQuat, ONE, Quat, UnitQuat, cross, dot,
                   rotation_to_unit_quat)
from .s3calc import (OrthoFrame, ScalarFieldS3, VectorFieldS3,
                     covariant_derivative, det_triple, divergence,
                     exterior_derivative_dual, gradient, hodge_contract)
from .sampling import DEFAULT_FD_STEP, SampleSet, parallel_map

F_MIN = 1e-9


@dataclass(frozen=True)
class SpinorField:
    """Spinor given by its gauge component f: S^3 -> H.

    Generalized Killing candidates must keep |f| constant; that is not
    enforced here but measured by gk_check.
    """

    f: Callable[[UnitQuat], Quat]
    df: Callable[[UnitQuat, ImQuat], Quat] | None = None
    family: str = "custom"
    params: tuple = ()

    def diff(self, g: UnitQuat, x: ImQuat, mode: str | None = None,
             h: float = DEFAULT_FD_STEP) -> Quat:
        from .s3calc import directional_derivative
        return directional_derivative(self.f, g, x, mode=mode or ("analytic" if self.df else "fd"),
                                      h=h, analytic=self.df)


def const_spinor(c: Quat = ONE) -> SpinorField:
    """Gauge component identically c; Killing with constant +1/2."""
    zero = Quat(0.0, 0.0, 0.0, 0.0)
    return SpinorField(f=lambda g: c, df=lambda g, x: zero,
                       family="const", params=(c,))


def inverse_spinor() -> SpinorField:
    """f(g) = g^-1; Killing with constant -1/2."""
    return SpinorField(
        f=lambda g: g.inverse(),
        df=lambda g, x: -(x * g.inverse()),
        family="inverse",
    )


def conj_spinor(b: ImQuat) -> SpinorField:
    """f(g) = g^-1 b g; a genuine generalized Killing spinor."""
    if b.norm() < F_MIN:
        raise DomainError("conjugation parameter must be nonzero")

    def f(g: UnitQuat) -> Quat:
        return g.inverse() * b * g

    def df(g: UnitQuat, x: ImQuat) -> Quat:
        fg = f(g)
        return fg * x - x * fg

    return SpinorField(f=f, df=df, family="conjb", params=(b,))


def b_inverse_spinor(b: ImQuat) -> SpinorField:
    """f(g) = b g^-1; a genuine generalized Killing spinor."""
    if b.norm() < F_MIN:
        raise DomainError("parameter must be nonzero")
    bq = b.to_quat()
    return SpinorField(
        f=lambda g: bq * g.inverse(),
        df=lambda g, x: -(bq * x * g.inverse()),
        family="binverse",
        params=(b,),
    )


def identity_spinor() -> SpinorField:
    """f(g) = g: constant length but NOT generalized Killing."""
    return SpinorField(f=lambda g: g, df=lambda g, x: g * x, family="identity")


def random_poly_spinor(seed: int, *, reject_below: float = 0.1,
                       probe_n: int = 128) -> SpinorField:
    """Normalized random quadratic f = p/|p|, p(g) = c0 + c1 g + c2 g^2.

    Smooth, generically non-Killing, with the analytic differential from
    the product rule.  Coefficient draws whose |p| dips below
    reject_below on a probe sample are redrawn deterministically.
    """
    from .sampling import uniform_s3
    probe = uniform_s3((seed ^ 0x9E3779B9) & 0xFFFFFFFFFFFFFFFF, probe_n)
    for attempt in range(64):
        gen = np.random.Generator(np.random.Philox(key=int(seed),
                                                   counter=attempt << 64))
        c = [Quat.from_array(gen.standard_normal(4)) for _ in range(3)]

        def p(g: UnitQuat, c=c) -> Quat:
            return c[0] + c[1] * g + c[2] * (g * g)

        if min(p(g).norm() for g in probe) >= reject_below:
            break
    else:  # pragma: no cover
        raise DegeneracyError("could not draw a bounded-below polynomial spinor")

    def dp(g: UnitQuat, x: ImQuat, c=c) -> Quat:
        gx = g * x
        return c[1] * gx + c[2] * (gx * g + g * gx)

    def f(g: UnitQuat) -> Quat:
        v = p(g)
        return v / v.norm()

    def df(g: UnitQuat, x: ImQuat) -> Quat:
        v = p(g)
        dv = dp(g, x)
        n = v.norm()
        return dv / n - v * (v.dot4(dv) / (n * n * n))

    return SpinorField(f=f, df=df, family="randpoly", params=(seed,))


def clifford_action(x: ImQuat, f_val: Quat) -> Quat:
    """Action of the tangent vector g x on the gauge component: x . f."""
    return x * f_val


def spinor_covariant_derivative(psi: SpinorField, g: UnitQuat, x: ImQuat, *,
                                mode: str | None = None,
                                h: float = DEFAULT_FD_STEP) -> Quat:
    """Gauge component of nabla_{g x} Psi: X(f) + (1/2) x . f."""
    return psi.diff(g, x, mode, h) + 0.5 * (x * psi.f(g))


def xi_field(psi: SpinorField, a: ImQuat, *, f_min: float = F_MIN) -> VectorFieldS3:
    """The unit field defined by xi_a . Psi = Psi a: component f a f^-1."""

    def y(g: UnitQuat) -> ImQuat:
        fg = psi.f(g)
        if fg.norm() < f_min:
            raise DegeneracyError(f"|f| = {fg.norm():.2e} too small at {g}")
        return (fg * a * fg.inverse()).im

    dy = None
    if psi.df is not None:
        def dy(g: UnitQuat, x: ImQuat) -> ImQuat:
            fg = psi.f(g)
            if fg.norm() < f_min:
                raise DegeneracyError(f"|f| = {fg.norm():.2e} too small at {g}")
            fi = fg.inverse()
            fs = psi.df(g, x)
            return (fs * a * fi - fg * a * (fi * fs * fi)).im

    return VectorFieldS3(y=y, dy=dy, name=f"xi[{a.x:g},{a.y:g},{a.z:g}]")


def m_matrix(psi: SpinorField, g: UnitQuat, *, mode: str | None = None,
             h: float = DEFAULT_FD_STEP, f_min: float = F_MIN) -> np.ndarray:
    """Matrix of x -> Im(f_*(g x) f(g)^-1) in the basis (i, j, k).

    Symmetric exactly when all xi_a are divergence-free; the real parts
    of the columns vanish when |f| is constant.
    """
    fg = psi.f(g)
    if fg.norm() < f_min:
        raise DegeneracyError(f"|f| = {fg.norm():.2e} too small at {g}")
    fi = fg.inverse()
    cols = [(psi.diff(g, e, mode, h) * fi).im.as_array() for e in IM_BASIS]
    return np.column_stack(cols)


def gk_columns(psi: SpinorField, g: UnitQuat, *, mode: str | None = None,
               h: float = DEFAULT_FD_STEP, f_min: float = F_MIN) -> list[Quat]:
    """Quaternion solutions a_j of a_j . f = e_j(f) + (1/2) e_j . f.

    Their imaginary parts are the columns of the derivative endomorphism;
    the real parts measure how far the spinor is from constant length.
    """
    fg = psi.f(g)
    if fg.norm() < f_min:
        raise DegeneracyError(f"|f| = {fg.norm():.2e} too small at {g}")
    fi = fg.inverse()
    return [(psi.diff(g, e, mode, h) + 0.5 * (e * fg)) * fi for e in IM_BASIS]


def gk_endomorphism(psi: SpinorField, g: UnitQuat, *, mode: str | None = None,
                    h: float = DEFAULT_FD_STEP,
                    re_tol: float | None = 1e-6) -> np.ndarray:
    """The endomorphism A of nabla_X Psi = A(X) . Psi, in the frame.

    Only well defined as a tangent endomorphism when |f| is constant;
    re_tol guards the residual real parts (None disables the guard).
    """
    cols = gk_columns(psi, g, mode=mode, h=h)
    worst = max(abs(c.w) for c in cols)
    if re_tol is not None and worst > re_tol:
        raise ConsistencyError(
            f"real part {worst:.3e} exceeds {re_tol:.1e}; the spinor does "
            "not have constant length at this point")
    return np.column_stack([c.im.as_array() for c in cols])


@dataclass(frozen=True)
class GKReport:
    """Residual summary of a generalized-Killing test over a sample set."""

    family: str
    n: int
    a_matrices: np.ndarray        # (n, 3, 3)
    skew_residual: float          # max |A - A^T| entry over samples
    max_divergence: float         # max |delta xi_a|, a in {i, j, k}
    length_residual: float        # stdev of |f| over samples
    re_part_residual: float       # max |Re a_j|
    div_identity_residual: float  # 2-route divergence identity mismatch
    killing_constant: float       # least-squares lambda for A = lambda I
    killing_residual: float       # rms Frobenius misfit of the lambda fit
    tol: float
    killing_tol: float

    @property
    def passed(self) -> bool:
        return max(self.skew_residual, self.max_divergence,
                   self.length_residual, self.re_part_residual,
                   self.div_identity_residual) <= self.tol

    @property
    def is_killing(self) -> bool:
        return self.killing_residual <= self.killing_tol


def gk_check(psi: SpinorField, samples: SampleSet, tol: float = 1e-8, *,
             mode: str | None = None, h: float | None = None,
             killing_tol: float = 1e-6) -> GKReport:
    """Test the generalized Killing property over a sample set.

    All failures are report fields, never exceptions: negative controls
    flow through and come out with passed == False.

    The divergence column is deliberately two-route: max_divergence uses
    the divergence operator on the xi fields (product-rule or FD path),
    while the identity column rebuilds the same numbers from the
    derivative matrix M = A - (1/2)I via
    delta xi_a = -2 sum_i det(e_i, M e_i, b), b = f a f^-1.
    """
    h = samples.h if h is None else h
    xi = [xi_field(psi, a) for a in IM_BASIS]

    def per_sample(g: UnitQuat):
        fg = psi.f(g)
        cols = gk_columns(psi, g, mode=mode, h=h)
        a_mat = np.column_stack([c.im.as_array() for c in cols])
        re_res = max(abs(c.w) for c in cols)
        m_mat = a_mat - 0.5 * np.eye(3)
        m_cols = [ImQuat(*m_mat[:, i]) for i in range(3)]
        fi = fg.inverse()
        div_res = 0.0
        ident_res = 0.0
        for a, field in zip(IM_BASIS, xi):
            d = divergence(field, g, mode=mode, h=h)
            b = (fg * a * fi).im
            s = sum(det_triple(e, mc, b) for e, mc in zip(IM_BASIS, m_cols))
            div_res = max(div_res, abs(d))
            ident_res = max(ident_res, abs(d + 2.0 * s))
        return fg.norm(), a_mat, re_res, div_res, ident_res

    rows = parallel_map(per_sample, samples.points)
    lengths = np.array([r[0] for r in rows])
    a_mats = np.stack([r[1] for r in rows])
    skew = float(np.max(np.abs(a_mats - np.transpose(a_mats, (0, 2, 1)))))
    lam = float(np.mean(a_mats[:, range(3), range(3)]))
    misfit = a_mats - lam * np.eye(3)
    killing_residual = float(np.sqrt(np.mean(np.sum(misfit ** 2, axis=(1, 2)))))
    return GKReport(
        family=psi.family,
        n=samples.n,
        a_matrices=a_mats,
        skew_residual=skew,
        max_divergence=max(r[3] for r in rows),
        length_residual=float(np.std(lengths)),
        re_part_residual=max(r[2] for r in rows),
        div_identity_residual=max(r[4] for r in rows),
        killing_constant=lam,
        killing_residual=killing_residual,
        tol=tol,
        killing_tol=killing_tol,
    )


@dataclass(frozen=True)
class VAlphaDecomposition:
    """Split of a spinor against the reference Killing spinor f = 1.

    Psi = V . Phi + alpha Phi translates to alpha = Re f and V having
    frame component Im f; for unit spinors alpha^2 + |V|^2 = 1 pointwise.
    """

    v: VectorFieldS3
    alpha: ScalarFieldS3
    psi: SpinorField


def decompose_valpha(psi: SpinorField) -> VAlphaDecomposition:
    dv = (lambda g, x: psi.df(g, x).im) if psi.df is not None else None
    da = (lambda g, x: psi.df(g, x).w) if psi.df is not None else None
    v = VectorFieldS3(y=lambda g: psi.f(g).im, dy=dv, name="V")
    alpha = ScalarFieldS3(value=lambda g: psi.f(g).w, dvalue=da, name="alpha")
    return VAlphaDecomposition(v=v, alpha=alpha, psi=psi)


def system_residuals(d: VAlphaDecomposition, samples: SampleSet, *,
                     mode: str | None = None,
                     h: float | None = None) -> np.ndarray:
    """Residuals of the three coupled equations characterizing GKS.

      (i)   alpha^2 + |V|^2 - 1                               (scalar)
      (ii)  -V -| * nabla_V V - V(alpha) V + alpha nabla_V V + d alpha
                                                          (Im H norm)
      (iii) alpha *(V ^ dV) + (2 alpha - delta V)(1 - alpha^2)
            + alpha V(alpha)                                  (scalar)

    Returns an (n, 3) array; rows are samples.
    """
    h = samples.h if h is None else h

    def per_sample(g: UnitQuat):
        from .s3calc import TangentS3
        v = d.v.y(g)
        al = d.alpha.value(g)
        r1 = al * al + v.norm2() - 1.0

        w = covariant_derivative(d.v, TangentS3(g, v), mode=mode, h=h).lie
        va = d.alpha.diff(g, v, mode, h)
        grad = gradient(d.alpha, g, mode=mode, h=h).lie
        r2 = -hodge_contract(v, w) - va * v + al * w + grad

        z = exterior_derivative_dual(d.v, g, mode=mode, h=h).dual()
        delta = divergence(d.v, g, mode=mode, h=h)
        r3 = al * dot(v, z) + (2.0 * al - delta) * (1.0 - al * al) + al * va
        return (r1, r2.norm(), r3)

    return np.array(parallel_map(per_sample, samples.points))


def frame_from_spinor(psi: SpinorField) -> OrthoFrame:
    """The oriented orthonormal frame (xi_i, xi_j, xi_k) of a unit spinor."""
    return OrthoFrame(*(xi_field(psi, a) for a in IM_BASIS))


def spinor_from_frame(frame: OrthoFrame, samples: SampleSet, *,
                      ortho_tol: float = 1e-8,
                      div_tol: float | None = None,
                      mode: str | None = None,
                      h: float | None = None) -> SpinorField:
    """Invert the frame correspondence, up to one global sign.

    Pointwise the gauge component is recovered from the rotation
    x -> f x f^-1 = [v1 v2 v3]; the pointwise sign convention is then
    smoothed by a greedy nearest-neighbour walk over the sample graph so
    that the reconstruction is continuous, leaving a single global sign
    ambiguity.
    """
    h = samples.h if h is None else h
    if div_tol is not None:
        worst = max(abs(divergence(f, g, mode=mode, h=h))
                    for f in frame.fields for g in samples)
        if worst > div_tol:
            raise DomainError(f"frame fields are not divergence-free: "
                              f"max |delta| = {worst:.3e} > {div_tol:.1e}")

    raw = []
    for g in samples:
        try:
            raw.append(rotation_to_unit_quat(frame.matrix_at(g), tol=ortho_tol))
        except DomainError as exc:
            raise DomainError(f"frame is not oriented orthonormal at {g}: {exc}")

    coords = np.array([[g.w, g.x, g.y, g.z] for g in samples])
    n = samples.n
    aligned: list[UnitQuat | None] = [None] * n
    aligned[0] = raw[0]
    dist = np.linalg.norm(coords - coords[0], axis=1)
    parent = np.zeros(n, dtype=int)
    visited = np.zeros(n, dtype=bool)
    visited[0] = True
    for _ in range(n - 1):
        dist_masked = np.where(visited, np.inf, dist)
        u = int(np.argmin(dist_masked))
        q = raw[u]
        ref = aligned[parent[u]]
        if q.dot4(ref) < 0.0:
            q = -q
        aligned[u] = q
        visited[u] = True
        du = np.linalg.norm(coords - coords[u], axis=1)
        closer = du < dist
        dist = np.where(closer, du, dist)
        parent = np.where(closer, u, parent)

    table = np.array([[q.w, q.x, q.y, q.z] for q in aligned])

    def f(g: UnitQuat) -> Quat:
        q = rotation_to_unit_quat(frame.matrix_at(g), tol=ortho_tol)
        p = np.array([g.w, g.x, g.y, g.z])
        j = int(np.argmin(np.linalg.norm(coords - p, axis=1)))
        if q.w * table[j, 0] + q.x * table[j, 1] + q.y * table[j, 2] + q.z * table[j, 3] < 0.0:
            q = -q
        return q

    return SpinorField(f=f, df=None, family="reconstructed")


def max_deviation_up_to_global_sign(psi1: SpinorField, psi2: SpinorField,
                                    samples: SampleSet) -> float:
    """max_g |s f2(g) - f1(g)| minimized over one global sign s."""
    worst = {1.0: 0.0, -1.0: 0.0}
    for g in samples:
        f1 = psi1.f(g)
        f2 = psi2.f(g)
        worst[1.0] = max(worst[1.0], (f2 - f1).norm())
        worst[-1.0] = max(worst[-1.0], (f2 + f1).norm())
    return min(worst.values())
