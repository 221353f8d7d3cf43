"""The quaternion algebra H, its complexification H_C, imaginary units and slice coordinates.

Quaternions are numpy arrays whose last axis holds (w, x, y, z), the components along
1, i, j, k; every operation broadcasts over leading axes so whole grids are evaluated at
once. A complexified quaternion p + sqrt(-1) q is an array of shape (..., 2, 4) holding
p in [..., 0, :] and q in [..., 1, :].
"""

from dataclasses import dataclass

import numpy as np

import config
from lib.errors import DomainError, PoleError, RealAxisError

Quaternion = np.ndarray

ONE, I, J, K = np.eye(4)
_CONJ = np.array([1.0, -1.0, -1.0, -1.0])


def quaternion(w=0.0, x=0.0, y=0.0, z=0.0):
    return np.array([w, x, y, z], dtype=float)


def as_quaternion(value):
    """Coerce a real scalar, a [w, x, y, z] list or an (..., 4) array to a float array."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 0:
        return float(arr) * ONE
    if arr.shape[-1] != 4:
        raise DomainError(f"expected 4 quaternion components, got shape {arr.shape}")
    return arr


def quat_mul(p, q):
    """Hamilton product p*q, broadcast over leading axes."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    w1, v1 = p[..., 0], p[..., 1:]
    w2, v2 = q[..., 0], q[..., 1:]
    w = w1 * w2 - np.sum(v1 * v2, axis=-1)
    v = w1[..., None] * v2 + w2[..., None] * v1 + np.cross(v1, v2)
    return np.concatenate([w[..., None], v], axis=-1)


def conj(p):
    """The usual conjugation x -> x^c."""
    return np.asarray(p, dtype=float) * _CONJ


def norm(p):
    return np.linalg.norm(p, axis=-1)


def re(p):
    return np.asarray(p, dtype=float)[..., 0]


def im(p):
    out = np.array(p, dtype=float, copy=True)
    out[..., 0] = 0.0
    return out


def scalar_product(p, q):
    """Euclidean inner product g(p, q) of the R^4 components."""
    return np.sum(np.asarray(p, dtype=float) * np.asarray(q, dtype=float), axis=-1)


def quat_inverse(p):
    p = np.asarray(p, dtype=float)
    n2 = np.sum(p * p, axis=-1)
    if np.any(n2 == 0.0):
        raise DomainError("cannot invert the zero quaternion")
    return conj(p) / n2[..., None]


def is_real(p, tol=config.DEFAULT_TOL):
    return norm(im(p)) <= tol


## Imaginary units and slice coordinates

def imaginary_unit(u, tol=config.DEFAULT_TOL):
    """Validate u in S (Re u = 0, |u| = 1) and return it with roundoff cleaned."""
    u = as_quaternion(u)
    if abs(u[0]) > tol or abs(norm(u) - 1.0) > tol:
        raise DomainError(f"{u.tolist()} is not an imaginary unit")
    v = im(u)
    return v / norm(v)


def sphere_unit(theta, phi):
    """I = (sin(theta)cos(phi), sin(theta)sin(phi), cos(theta)) as a pure quaternion."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, dtype=float), np.asarray(phi, dtype=float))
    return np.stack([
        np.zeros_like(theta),
        np.sin(theta) * np.cos(phi),
        np.sin(theta) * np.sin(phi),
        np.cos(theta),
    ], axis=-1)


def random_units(rng, n):
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1)[:, None]
    return np.concatenate([np.zeros((n, 1)), v], axis=1)


def random_quaternions(rng, n, scale=1.0):
    return scale * rng.standard_normal((n, 4))


@dataclass(frozen=True, eq=False)
class SliceCoordinates:
    """x = alpha + unit*beta with beta > 0; (alpha, -beta, -unit) is normalized on construction."""
    alpha: float
    beta: float
    unit: np.ndarray

    def __post_init__(self):
        unit = imaginary_unit(self.unit)
        if self.beta < 0:
            object.__setattr__(self, "beta", -float(self.beta))
            unit = -unit
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "unit", unit)

    def to_quaternion(self):
        return from_slice_coords(self.alpha, self.beta, self.unit)


def slice_split(x):
    """Vectorized (alpha, beta, unit) with beta >= 0; real points get the unit i."""
    x = as_quaternion(x)
    alpha = x[..., 0]
    beta = np.linalg.norm(x[..., 1:], axis=-1)
    safe = np.where(beta > 0.0, beta, 1.0)
    unit = np.where((beta > 0.0)[..., None], im(x) / safe[..., None], I)
    return alpha, beta, unit


def to_slice_coords(p):
    p = as_quaternion(p)
    alpha, beta, unit = slice_split(p)
    if beta == 0.0:
        raise RealAxisError(f"{p.tolist()} lies on the real axis")
    return SliceCoordinates(alpha, beta, unit)


def from_slice_coords(alpha, beta, unit):
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    return alpha[..., None] * ONE + beta[..., None] * np.asarray(unit, dtype=float)


## Complexified quaternions H_C

def hc(p, q=None):
    p = as_quaternion(p)
    q = np.zeros_like(p) if q is None else as_quaternion(q)
    p, q = np.broadcast_arrays(p, q)
    return np.stack([p, q], axis=-2)


def hc_mul(a, b):
    """(x + sqrt(-1)y)(z + sqrt(-1)w) = xz - yw + sqrt(-1)(xw + yz)."""
    x, y = a[..., 0, :], a[..., 1, :]
    z, w = b[..., 0, :], b[..., 1, :]
    return np.stack([quat_mul(x, z) - quat_mul(y, w), quat_mul(x, w) + quat_mul(y, z)], axis=-2)


def hc_conj(a):
    """x^c applied to both quaternion parts."""
    return np.asarray(a, dtype=float) * _CONJ


def hc_bar(a):
    """Complex conjugation p + sqrt(-1)q -> p - sqrt(-1)q."""
    return np.asarray(a, dtype=float) * np.array([[1.0], [-1.0]])


def hc_scale(lam, a):
    """Complex scalar lam times a complexified quaternion."""
    lam = np.asarray(lam, dtype=complex)
    re_, im_ = lam.real[..., None], lam.imag[..., None]
    p, q = a[..., 0, :], a[..., 1, :]
    return np.stack([re_ * p - im_ * q, re_ * q + im_ * p], axis=-2)


## Characteristic polynomial and the Cassini pseudometric

def characteristic_poly(y):
    """Coefficients (c0, c1, c2) of x^2 - x(y + y^c) + y y^c, lowest degree first."""
    y = as_quaternion(y)
    return np.array([np.sum(y * y), -2.0 * y[0], 1.0])


def eval_real_poly(coeffs, x):
    """Evaluate a real-coefficient polynomial (lowest degree first) at quaternions x."""
    x = as_quaternion(x)
    out = np.broadcast_to(coeffs[-1] * ONE, x.shape).copy()
    for c in coeffs[-2::-1]:
        out = quat_mul(out, x)
        out[..., 0] += c
    return out


def cassini_u(x, y):
    return np.sqrt(norm(eval_real_poly(characteristic_poly(y), x)))


def stereographic_project(x, x0):
    """Psi(x) = (x - x0)(x - x0^c)^-1, mapping the sphere of x0 onto C_J^perp."""
    x = as_quaternion(x)
    x0 = as_quaternion(x0)
    to_slice_coords(x0)
    if np.any(cassini_u(x, x0) ** 2 > config.SPHERE_TOL):
        raise DomainError(f"{x.tolist()} is not on the sphere of {x0.tolist()}")
    x0c = conj(x0)
    if np.any(norm(x - x0c) <= config.SPHERE_TOL):
        raise PoleError(f"{x.tolist()} is the projection pole")
    return quat_mul(x - x0, quat_inverse(x - x0c))
