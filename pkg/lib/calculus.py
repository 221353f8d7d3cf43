"""Slice and spherical derivatives, spherical expansions, multiplicity and valence."""

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as P

import config
import scan_config as sc
from lib import quaternions as qt
from lib import slicefn as sf
from lib.errors import DomainError, NotApplicable, RealAxisError


def _coords(f, x):
    x = qt.as_quaternion(x)
    alpha, beta, unit = qt.slice_split(x)
    if not np.all(f.domain.contains_coords(alpha, beta)):
        raise DomainError(f"point outside the domain of {f.name}")
    return x, alpha, beta, unit


def slice_derivative(f, x):
    """df/dx = I(dF/dz), i.e. 1/2(d/dalpha - J d/dbeta) of the restriction to C_J."""
    x, alpha, beta, unit = _coords(f, x)
    D1, D2 = f.stem.derivative_components(alpha + 1j * beta)
    return D1 + qt.quat_mul(unit, D2)


def conj_slice_derivative(f, x):
    x, alpha, beta, unit = _coords(f, x)
    D1, D2 = f.stem.conj_derivative_components(alpha + 1j * beta)
    return D1 + qt.quat_mul(unit, D2)


def spherical_derivative(f, x):
    """d_s f(x) = F2(z)/Im(z); at real points the limit, which equals df/dx there."""
    x, alpha, beta, unit = _coords(f, x)
    _, F2 = f.stem.components(alpha + 1j * beta)
    real = beta == 0.0
    out = F2 / np.where(real, 1.0, beta)[..., None]
    if np.any(real):
        D1, _ = f.stem.derivative_components(alpha + 0j)
        out = np.where(real[..., None], D1, out)
    return out


def spherical_derivative_defining(f, x):
    """1/2 Im(x)^-1 (f(x) - f(x^c)) evaluated literally."""
    x = qt.as_quaternion(x)
    if np.any(qt.is_real(x, 0.0)):
        raise RealAxisError(f"{x.tolist()} lies on the real axis")
    return 0.5 * qt.quat_mul(qt.quat_inverse(qt.im(x)), f(x) - f(qt.conj(x)))


def spherical_derivative_function(f):
    """d_s f as a slice function: stem (F2/beta, 0), with analytic partials away from beta = 0."""
    stem = f.stem
    small = config.FD_STEP

    def G1(a, b):
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        z = a + 1j * b
        _, F2 = stem.components(z)
        near = np.abs(b) < small
        _, _, _, F2b = stem.partials(z) if np.any(near) else (None, None, None, F2)
        return np.where(near[..., None], F2b, F2 / np.where(near, 1.0, b)[..., None])

    def G2(a, b):
        return np.zeros(np.shape(a) + (4,))

    def partials(a, b):
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        z = a + 1j * b
        near = np.abs(b) < small
        safe = np.where(near, 1.0, b)[..., None]
        _, F2 = stem.components(z)
        _, _, F2a, F2b = stem.partials(z)
        G1a = F2a / safe
        G1b = F2b / safe - F2 / safe ** 2
        if np.any(near):
            fa, fb, _, _ = sf.finite_difference_partials(G1, G2, z)
            G1a = np.where(near[..., None], fa, G1a)
            G1b = np.where(near[..., None], fb, G1b)
        zero = np.zeros_like(G1a)
        return G1a, G1b, zero, zero

    ds = sf.ClosureStem(G1, G2, partials, reaches_real=stem.reaches_real, check_parity=False)
    return sf.SliceFunction(ds, f.domain, name=f"d_s({f.name})")


def mixed_derivative_identity_residual(f, x):
    """|df/dx(x) - 2Im(x) (d/dx d_s f)(x) - d_s f(x)|."""
    x = qt.as_quaternion(x)
    lhs = slice_derivative(f, x)
    mixed = slice_derivative(spherical_derivative_function(f), x)
    rhs = 2.0 * qt.quat_mul(qt.im(x), mixed) + spherical_derivative(f, x)
    return qt.norm(lhs - rhs)


## Spherical expansions

def _quat_power(p, m):
    out = np.broadcast_to(qt.ONE, p.shape).copy()
    for _ in range(m):
        out = qt.quat_mul(out, p)
    return out


def spherical_monomial(y, n, x):
    """S_(y,2m)(x) = Delta_y(x)^m and S_(y,2m+1)(x) = Delta_y(x)^m (x - y)."""
    y = qt.as_quaternion(y)
    x = qt.as_quaternion(x)
    out = _quat_power(qt.eval_real_poly(qt.characteristic_poly(y), x), n // 2)
    if n % 2:
        out = qt.quat_mul(out, x - y)
    return out


@dataclass
class SphericalExpansion:
    center: np.ndarray
    coeffs: np.ndarray
    method: str = "division"
    notes: dict = field(default_factory=dict)

    @property
    def order(self):
        return len(self.coeffs) - 1

    def __call__(self, x):
        return evaluate_expansion(self, x)

    def to_dict(self):
        return {"center": self.center.tolist(), "coeffs": self.coeffs.tolist()}


def _pad(c, n):
    c = np.asarray(c)
    return np.concatenate([c, np.zeros(n - len(c), dtype=c.dtype)]) if len(c) < n else c[:n]


def _division_coefficients(a, y, N):
    delta = qt.characteristic_poly(y)
    out = []
    while len(out) <= N:
        quo, rem = [], []
        for k in range(4):
            q_k, r_k = P.polydiv(a[:, k], delta)
            quo.append(q_k)
            rem.append(_pad(r_k, 2))
        width = max(len(q_k) for q_k in quo)
        rem = np.array(rem).T
        out.append(rem[0] + qt.quat_mul(y, rem[1]))
        out.append(rem[1])
        a = np.array([_pad(q_k, width) for q_k in quo]).T
    return np.array(out[:N + 1])


def _taylor_coefficients(stem, y, N):
    """Germ recursion at w = alpha0 + i*beta0 for H_C coefficients stored as complex 4-vectors."""
    coords = qt.to_slice_coords(y)
    J, beta0 = coords.unit, coords.beta
    w = coords.alpha + 1j * beta0
    delta = 2j * beta0
    length = N + 3
    c = stem.p + 1j * stem.q
    germ = np.zeros((length, 4), dtype=complex)
    for k in range(min(length, len(c))):
        germ[k] = P.polyval(w, P.polyder(c, k, axis=0)) / math.factorial(k)
    out = []
    while len(out) <= N:
        p, q = germ[0].real, germ[0].imag
        s_odd = q / beta0
        out.append(p + qt.quat_mul(J, q))
        out.append(s_odd)
        H = germ[1:].copy()
        H[0] -= s_odd
        Q = np.zeros_like(H)
        Q[0] = H[0] / delta
        for k in range(1, len(H)):
            Q[k] = (H[k] - Q[k - 1]) / delta
        germ = Q
    return np.array(out[:N + 1])


def expansion_coefficients(f, y, N, method=None):
    """Right coefficients s_0..s_N of f(x) = sum S_(y,n)(x) s_n.

    Quaternionic polynomial stems use long division by Delta_y ("division"); stems with
    H_C coefficients use the Taylor germ recursion at the point of D+ over y ("taylor").
    """
    y = qt.as_quaternion(y)
    if qt.is_real(y, 0.0):
        raise RealAxisError(f"expansion center {y.tolist()} lies on the real axis")
    if not isinstance(f.stem, sf.PolynomialStem):
        raise NotApplicable(f"{f.name} does not have a polynomial stem")
    if N < 0:
        raise ValueError("N must be non-negative")
    method = method or ("division" if f.stem.is_quaternionic else "taylor")
    if method == "division":
        if not f.stem.is_quaternionic:
            raise NotApplicable("long division needs quaternion coefficients")
        coeffs = _division_coefficients(f.stem.p.copy(), y, N)
    elif method == "taylor":
        coeffs = _taylor_coefficients(f.stem, y, N)
    else:
        raise ValueError(f"unknown expansion method {method!r}")
    return SphericalExpansion(y, coeffs, method)


def evaluate_expansion(e, x):
    x = qt.as_quaternion(x)
    delta = qt.eval_real_poly(qt.characteristic_poly(e.center), x)
    shift = x - e.center
    power = np.broadcast_to(qt.ONE, x.shape).copy()
    out = np.zeros(x.shape)
    for n, s in enumerate(e.coeffs):
        if n % 2:
            out += qt.quat_mul(qt.quat_mul(power, shift), s)
            power = qt.quat_mul(power, delta)
        else:
            out += qt.quat_mul(power, s)
    return out


def s2_display_value(f, y):
    """1/2 Im(y)^-2 (2Im(y) df/dx(y) - f(y) + f(y^c)), the closed-form display for s_2."""
    y = qt.as_quaternion(y)
    imy = qt.im(y)
    inner = 2.0 * qt.quat_mul(imy, slice_derivative(f, y)) - f(y) + f(qt.conj(y))
    return 0.5 * qt.quat_mul(qt.quat_inverse(qt.quat_mul(imy, imy)), inner)


def coefficient_relations(f, y, e=None):
    """Residuals of s_0 = f(y), s_1 = d_s f(y), s_1 + 2Im(y)s_2 = df/dx(y), s_2 = (d/dx d_s f)(y)."""
    y = qt.as_quaternion(y)
    e = e or expansion_coefficients(f, y, 2)
    s = e.coeffs
    mixed = slice_derivative(spherical_derivative_function(f), y)
    return {
        "value": float(qt.norm(s[0] - f(y))),
        "spherical": float(qt.norm(s[1] - spherical_derivative(f, y))),
        "slice": float(qt.norm(s[1] + 2.0 * qt.quat_mul(qt.im(y), s[2]) - slice_derivative(f, y))),
        "mixed": float(qt.norm(s[2] - mixed)),
        "display": float(qt.norm(s[2] - s2_display_value(f, y))),
    }


## Multiplicity and valence of holomorphic maps

def as_polynomial(g):
    return g if isinstance(g, Polynomial) else Polynomial(np.asarray(g, dtype=complex))


def holomorphic_multiplicity(g, x, tol=config.MULTIPLICITY_TOL):
    """Smallest k >= 1 with g^(k)(x) != 0; math.inf when g is locally constant."""
    g = as_polynomial(g)
    for k in range(1, g.degree() + 1):
        if abs(g.deriv(k)(x)) > tol:
            return k
    return math.inf


def newton_polish(g, z, steps=sc.NEWTON_STEPS):
    dg = g.deriv()
    for _ in range(steps):
        d = dg(z)
        if d == 0:
            break
        z_new = z - g(z) / d
        if abs(g(z_new)) > abs(g(z)):
            break
        z = z_new
    return z


def root_clusters(g, radius, steps=sc.NEWTON_STEPS):
    """Roots of g polished by Newton and merged within radius*max(1, |z|).

    Returns a list of (root, cluster size); the size is the multiplicity.
    """
    g = as_polynomial(g)
    clusters = []
    for r in sorted(g.roots(), key=lambda z: (round(z.real, 6), round(z.imag, 6))):
        r = newton_polish(g, complex(r), steps)
        for c in clusters:
            if abs(c[0] - r) <= radius * max(1.0, abs(r)):
                c[1].append(r)
                c[0] = np.mean(c[1])
                break
        else:
            clusters.append([r, [r]])
    return [(complex(c), len(members)) for c, members in clusters]


def _region_predicate(region):
    if region is None:
        return lambda z: True
    if isinstance(region, sf.CircularDomain):
        return lambda z: bool(region.contains_coords(z.real, z.imag))
    return region


def valence(g, w, region=None, tol=config.MULTIPLICITY_TOL):
    """Number of solutions of g(z) = w in the region counted with multiplicity.

    `region` is a CircularDomain (its slice, both half planes), a predicate on complex z,
    or None for the whole plane. math.inf when g is constantly w.
    """
    h = as_polynomial(g) - w
    if np.all(np.abs(h.coef) <= tol):
        return math.inf
    if h.degree() == 0:
        return 0
    inside = _region_predicate(region)
    return sum(size for z, size in root_clusters(h, 1e-4) if inside(z))
