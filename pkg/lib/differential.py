"""The real differential of a slice regular function, its rank and the singularity test.

At x = alpha + J*beta the differential acts as v1 -> v1 df/dx(x) on C_J and as
v2 -> v2 d_s f(x) on the orthogonal complement C_J^perp.
"""

from dataclasses import asdict, dataclass
from enum import IntEnum

import numpy as np

import config
from lib import quaternions as qt
from lib.calculus import (
    conj_slice_derivative,
    expansion_coefficients,
    slice_derivative,
    spherical_derivative,
    spherical_derivative_function,
)
from lib.errors import NotApplicable, RealAxisError


class RankClass(IntEnum):
    RANK0 = 0
    RANK2 = 2
    RANK4 = 4


def adapted_basis(J, tol=config.DEFAULT_TOL):
    """Rows (1, J, K, JK) with K the first of i, j, k not parallel to J, orthogonalized against J."""
    J = qt.imaginary_unit(J)
    for e in (qt.I, qt.J, qt.K):
        if abs(qt.scalar_product(e, J)) < 1.0 - tol:
            K = e - qt.scalar_product(e, J) * J
            K = K / qt.norm(K)
            break
    return np.array([qt.ONE, J, K, qt.quat_mul(J, K)])


@dataclass
class RealDifferential:
    point: np.ndarray
    basis: np.ndarray
    matrix: np.ndarray
    rank_class: RankClass

    def apply(self, v):
        """Image of a vector given in standard components."""
        return self.matrix @ (self.basis @ np.asarray(v, dtype=float))

    def svd_rank(self, tol=config.RANK_TOL):
        sv = np.linalg.svd(self.matrix, compute_uv=False)
        if sv[0] == 0.0:
            return 0
        return int(np.sum(sv > tol * sv[0]))

    def to_dict(self):
        return {
            "point": self.point.tolist(),
            "basis": self.basis.tolist(),
            "matrix": self.matrix.tolist(),
            "rank": int(self.rank_class),
        }


def in_orthogonal_slice(p, J, tol=config.RANK_TOL):
    """p in C_J^perp: |Re p| and |g(Im p, J)| below tol*(1 + |p|). Broadcasts."""
    p = np.asarray(p, dtype=float)
    bound = tol * (1.0 + qt.norm(p))
    return (np.abs(p[..., 0]) <= bound) & (np.abs(qt.scalar_product(qt.im(p), J)) <= bound)


def _classify(D, s, J, real):
    """Rank classes from df/dx = D and d_s f = s, broadcast over leading axes."""
    tol = config.DEGENERATE_TOL
    D_zero = qt.norm(D) <= tol
    s_zero = qt.norm(s) <= tol
    safe = np.where(s_zero[..., None], qt.ONE, s)
    p = qt.quat_mul(D, qt.quat_inverse(safe))
    off_real = np.where(
        s_zero,
        np.where(D_zero, RankClass.RANK0, RankClass.RANK2),
        np.where(in_orthogonal_slice(p, J), RankClass.RANK2, RankClass.RANK4),
    )
    on_real = np.where(s_zero, RankClass.RANK0, RankClass.RANK4)
    return np.where(real, on_real, off_real)


def _derivatives(f, x):
    x = qt.as_quaternion(x)
    _, beta, J = qt.slice_split(x)
    return x, slice_derivative(f, x), spherical_derivative(f, x), J, beta == 0.0


def real_differential(f, x):
    """4x4 matrix of df at x in the basis (1, J, K, JK); columns hold standard components."""
    x, D, s, J, real = _derivatives(f, x)
    basis = adapted_basis(J)
    if real:
        columns = [qt.quat_mul(b, D) for b in basis]
    else:
        columns = [qt.quat_mul(basis[0], D), qt.quat_mul(basis[1], D),
                   qt.quat_mul(basis[2], s), qt.quat_mul(basis[3], s)]
    rank = RankClass(int(_classify(D, s, J, real)))
    return RealDifferential(x, basis, np.array(columns).T, rank)


def fd_step(x):
    """FD_STEP * max(1, |x|), times min(1, beta) off the real axis so the stencil stays inside its half slice."""
    x = qt.as_quaternion(x)
    _, beta, _ = qt.slice_split(x)
    shrink = min(1.0, float(beta)) if beta > 0.0 else 1.0
    return config.FD_STEP * max(1.0, float(qt.norm(x))) * shrink


def finite_difference_matrix(f, x, basis, t=None):
    """Central differences of f along each basis row, as columns."""
    x = qt.as_quaternion(x)
    t = fd_step(x) if t is None else t
    return np.array([(f(x + t * b) - f(x - t * b)) / (2 * t) for b in basis]).T


def rank_classify(f, x):
    x, D, s, J, real = _derivatives(f, x)
    out = _classify(D, s, J, real)
    return RankClass(int(out)) if np.ndim(out) == 0 else out


def singular_mask(f, x):
    """Vectorized is_singular via the anticommutation residual |pJ + Jp| with p = df/dx (d_s f)^-1."""
    x, D, s, J, real = _derivatives(f, x)
    tol = config.DEGENERATE_TOL
    s_zero = qt.norm(s) <= tol
    safe = np.where(s_zero[..., None], qt.ONE, s)
    p = qt.quat_mul(D, qt.quat_inverse(safe))
    anti = qt.norm(qt.quat_mul(p, J) + qt.quat_mul(J, p))
    off_real = np.where(s_zero, True, anti <= 2.0 * config.RANK_TOL * (1.0 + qt.norm(p)))
    return np.where(real, s_zero, off_real)


def is_singular(f, x):
    return bool(singular_mask(f, x))


def directional_derivative_residual(f, x, v, t=None):
    """|FD derivative of f at x along v - (v s_1 + (x v - v x^c) s_2)|.

    s_1, s_2 come from the spherical expansion at x; closure stems use d_s f(x) and
    (d/dx d_s f)(x), which coincide with them.
    """
    x = qt.as_quaternion(x)
    v = qt.as_quaternion(v)
    if qt.is_real(x, 0.0):
        raise RealAxisError(f"{x.tolist()} lies on the real axis")
    try:
        s1, s2 = expansion_coefficients(f, x, 2).coeffs[1:3]
    except NotApplicable:
        s1 = spherical_derivative(f, x)
        s2 = slice_derivative(spherical_derivative_function(f), x)
    t = fd_step(x) if t is None else t
    fd = (f(x + t * v) - f(x - t * v)) / (2 * t)
    formula = qt.quat_mul(v, s1) + qt.quat_mul(qt.quat_mul(x, v) - qt.quat_mul(v, qt.conj(x)), s2)
    return float(qt.norm(fd - formula))


@dataclass
class SliceFormValue:
    """Coefficients of d_sl f = d_sl x df/dx + d_sl x^c df/dx^c and d_sp f = d_sp x d_s f at a point."""
    point: np.ndarray
    unit: np.ndarray
    beta: float
    slice_coeff: np.ndarray
    conj_coeff: np.ndarray
    spherical_coeff: np.ndarray

    def slice_action(self, dalpha, dbeta):
        dx = dalpha * qt.ONE + dbeta * self.unit
        dxc = dalpha * qt.ONE - dbeta * self.unit
        return qt.quat_mul(dx, self.slice_coeff) + qt.quat_mul(dxc, self.conj_coeff)

    def spherical_action(self, v2):
        """Image of a tangent vector v2 in C_J^perp."""
        return qt.quat_mul(qt.as_quaternion(v2), self.spherical_coeff)


def slice_spherical_forms(f, x):
    x = qt.as_quaternion(x)
    alpha, beta, unit = qt.slice_split(x)
    if beta == 0.0:
        raise RealAxisError(f"{x.tolist()} lies on the real axis")
    return SliceFormValue(
        x, unit, float(beta),
        slice_derivative(f, x), conj_slice_derivative(f, x), spherical_derivative(f, x),
    )


def slice_action_fd(f, x, dalpha, dbeta, t=None):
    """Central difference of f(alpha + J*beta) along (dalpha, dbeta) inside the slice of x."""
    t = fd_step(x) if t is None else t
    alpha, beta, unit = qt.slice_split(qt.as_quaternion(x))
    plus = f.at(alpha + t * dalpha, beta + t * dbeta, unit)
    minus = f.at(alpha - t * dalpha, beta - t * dbeta, unit)
    return (plus - minus) / (2 * t)


@dataclass
class DifferentialSweep:
    """Worst agreement figures over a sample of points.

    matrix_gap and directional_gap are scaled by max(1, max |df|), the size of the
    differential at the point, so both stay comparable near the real axis where df grows like 1/beta.
    """
    samples: int
    matrix_gap: float
    rank_disagreements: int
    directional_gap: float

    def to_dict(self):
        return asdict(self)


def differential_sweep(f, points, directions):
    """Compare the closed-form differential with central differences and SVD rank at each point."""
    matrix_gap, disagreements, directional_gap = 0.0, 0, 0.0
    for x, v in zip(qt.as_quaternion(points), qt.as_quaternion(directions)):
        d = real_differential(f, x)
        scale = max(1.0, float(np.max(np.abs(d.matrix))))
        gap = np.max(np.abs(d.matrix - finite_difference_matrix(f, x, d.basis)))
        matrix_gap = max(matrix_gap, float(gap) / scale)
        disagreements += int(d.svd_rank() != int(d.rank_class))
        directional = directional_derivative_residual(f, x, v) / (scale * max(1.0, float(qt.norm(v))))
        directional_gap = max(directional_gap, directional)
    return DifferentialSweep(len(points), matrix_gap, disagreements, directional_gap)
