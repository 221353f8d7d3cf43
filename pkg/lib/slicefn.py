"""Stem functions, circular domains and the slice functions they induce.

A stem is evaluated at complex points z = alpha + i*beta and returns the pair (F1, F2)
of quaternion arrays; the induced slice function is f(alpha + I*beta) = F1(z) + I*F2(z).
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, replace

import numpy as np

import config
from lib import quaternions as qt
from lib.errors import (
    DegeneratePairError,
    DomainError,
    NonRealNormal,
    NotApplicable,
    ParityError,
    SliceRegError,
)


@dataclass(frozen=True)
class CircularDomain:
    """The rectangle D+ = alpha_range x beta_range; Omega_D is its circularization."""
    alpha_range: tuple = config.DEFAULT_ALPHA
    beta_range: tuple = config.DEFAULT_BETA
    intersects_real: bool = None

    def __post_init__(self):
        a0, a1 = (float(v) for v in self.alpha_range)
        b0, b1 = (float(v) for v in self.beta_range)
        if a1 <= a0 or b1 <= b0:
            raise DomainError(f"empty rectangle {self.alpha_range} x {self.beta_range}")
        if b0 < 0:
            raise DomainError(f"beta lower bound must be >= 0, got {b0}")
        object.__setattr__(self, "alpha_range", (a0, a1))
        object.__setattr__(self, "beta_range", (b0, b1))
        if self.intersects_real is None:
            object.__setattr__(self, "intersects_real", b0 == 0.0)
        elif self.intersects_real and b0 > 0.0:
            raise DomainError("a rectangle with beta lower bound > 0 cannot meet the real axis")

    def punctured(self):
        """Same rectangle with the real axis removed."""
        return replace(self, intersects_real=False)

    def contains_coords(self, alpha, beta):
        alpha = np.asarray(alpha, dtype=float)
        beta = np.abs(np.asarray(beta, dtype=float))
        (a0, a1), (b0, b1) = self.alpha_range, self.beta_range
        tol = config.DEFAULT_TOL
        inside = (alpha >= a0 - tol) & (alpha <= a1 + tol) & (beta >= b0 - tol) & (beta <= b1 + tol)
        if not self.intersects_real:
            inside &= beta > 0.0
        return inside

    def contains(self, x):
        alpha, beta, _ = qt.slice_split(x)
        return self.contains_coords(alpha, beta)

    def alpha_nodes(self, n):
        a0, a1 = self.alpha_range
        return a0 + np.arange(n) * (a1 - a0) / n

    def beta_nodes(self, n):
        b0, b1 = self.beta_range
        return b0 + (np.arange(n) + 1) * (b1 - b0) / n

    def random_coords(self, rng, n):
        """Uniform (alpha, beta) draws with beta strictly positive."""
        (a0, a1), (b0, b1) = self.alpha_range, self.beta_range
        alpha = rng.uniform(a0, a1, n)
        beta = rng.uniform(b0, b1, n)
        beta = np.where(beta > 0.0, beta, 0.5 * (b0 + b1))
        return alpha, beta

    def random_points(self, rng, n):
        alpha, beta = self.random_coords(rng, n)
        return qt.from_slice_coords(alpha, beta, qt.random_units(rng, n))

    def to_dict(self):
        return {"alpha": list(self.alpha_range), "beta": list(self.beta_range)}


def _split(z):
    z = np.asarray(z, dtype=complex)
    return z.real, z.imag


def finite_difference_partials(F1, F2, z):
    """Central differences of both components in alpha and beta, step FD_STEP*max(1, |z|)."""
    alpha, beta = _split(z)
    h = (config.FD_STEP * np.maximum(1.0, np.abs(z)))[..., None]
    hs = h[..., 0]
    F1a = (F1(alpha + hs, beta) - F1(alpha - hs, beta)) / (2 * h)
    F1b = (F1(alpha, beta + hs) - F1(alpha, beta - hs)) / (2 * h)
    F2a = (F2(alpha + hs, beta) - F2(alpha - hs, beta)) / (2 * h)
    F2b = (F2(alpha, beta + hs) - F2(alpha, beta - hs)) / (2 * h)
    return F1a, F1b, F2a, F2b


class StemFunction(ABC):
    """F = F1 + sqrt(-1) F2 with F1 even and F2 odd in Im(z)."""

    @abstractmethod
    def components(self, z):
        """Return (F1(z), F2(z)) as quaternion arrays of shape z.shape + (4,)."""

    @abstractmethod
    def partials(self, z):
        """Return (dF1/dalpha, dF1/dbeta, dF2/dalpha, dF2/dbeta)."""

    @abstractmethod
    def conjugate(self):
        pass

    @abstractmethod
    def derivative(self):
        """Stem of dF/dz."""

    @abstractmethod
    def shifted(self, q):
        """Stem of F - q."""

    @property
    def reaches_real(self):
        """Whether the stem may be evaluated on the real axis."""
        return True

    def values(self, z):
        F1, F2 = self.components(z)
        return np.stack([F1, F2], axis=-2)

    def derivative_components(self, z):
        """dF/dz = (1/2(F1a + F2b), 1/2(F2a - F1b))."""
        F1a, F1b, F2a, F2b = self.partials(z)
        return 0.5 * (F1a + F2b), 0.5 * (F2a - F1b)

    def conj_derivative_components(self, z):
        """dF/dz-bar = (1/2(F1a - F2b), 1/2(F2a + F1b))."""
        F1a, F1b, F2a, F2b = self.partials(z)
        return 0.5 * (F1a - F2b), 0.5 * (F2a + F1b)


class PolynomialStem(StemFunction):
    """F(z) = sum z^n c_n with c_n = p_n + sqrt(-1) q_n in H_C.

    Plain quaternion coefficients (q_n = 0) give an entire stem. With some q_n != 0 the
    polynomial is used on the upper half plane and extended below by F(z-bar) = F(z)-bar,
    so the induced function lives off the real axis.
    """

    def __init__(self, coeffs):
        c = np.asarray(coeffs, dtype=float)
        if c.ndim == 1:
            c = c[None, :]
        if c.ndim == 2:
            c = qt.hc(c)
        if c.ndim != 3 or c.shape[1:] != (2, 4):
            raise SliceRegError(f"polynomial coefficients must have shape (n, 4) or (n, 2, 4), got {c.shape}")
        nonzero = np.flatnonzero(np.any(c != 0.0, axis=(1, 2)))
        top = nonzero[-1] + 1 if len(nonzero) else 1
        self.coeffs = c[:top].copy()
        self.coeffs.setflags(write=False)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def p(self):
        return self.coeffs[:, 0, :]

    @property
    def q(self):
        return self.coeffs[:, 1, :]

    @property
    def is_quaternionic(self):
        return not np.any(self.q)

    @property
    def reaches_real(self):
        return self.is_quaternionic

    def _upper(self, z):
        z = np.asarray(z, dtype=complex)
        lower = z.imag < 0
        sign = np.where(lower, -1.0, 1.0)[..., None]
        return np.where(lower, z.conj(), z), sign

    def _raw(self, z):
        powers = z[..., None] ** np.arange(len(self.coeffs))
        F1 = powers.real @ self.p - powers.imag @ self.q
        F2 = powers.real @ self.q + powers.imag @ self.p
        return F1, F2

    def components(self, z):
        zu, sign = self._upper(z)
        F1, F2 = self._raw(zu)
        return F1, sign * F2

    def partials(self, z):
        zu, sign = self._upper(z)
        D1, D2 = self.derivative()._raw(zu)
        return D1, -sign * D2, sign * D2, D1

    def conjugate(self):
        return PolynomialStem(qt.hc_conj(self.coeffs))

    def derivative(self):
        n = np.arange(1, len(self.coeffs))[:, None, None]
        return PolynomialStem(n * self.coeffs[1:] if len(n) else np.zeros((1, 2, 4)))

    def shifted(self, q):
        c = self.coeffs.copy()
        c[0, 0] -= qt.as_quaternion(q)
        return PolynomialStem(c)

    def convolve(self, other):
        """Coefficients sum_m a_m b_(n-m), left factor multiplied on the left."""
        a, b = self.coeffs, other.coeffs
        out = np.zeros((len(a) + len(b) - 1, 2, 4))
        for m in range(len(a)):
            out[m:m + len(b)] += qt.hc_mul(a[m], b)
        return PolynomialStem(out)

    def complex_coefficients(self, tol=config.DEFAULT_TOL):
        """Coefficients p_n[0] + i q_n[0] of a stem whose H_C coefficients are all complex numbers."""
        scale = max(1.0, float(np.abs(self.coeffs).max()))
        if np.any(np.abs(self.coeffs[:, :, 1:]) > tol * scale):
            raise SliceRegError("stem coefficients are not complex numbers")
        return self.p[:, 0] + 1j * self.q[:, 0]

    def __repr__(self):
        return f"PolynomialStem(degree={self.degree}, quaternionic={self.is_quaternionic})"


class TwoSliceStem(PolynomialStem):
    """Stem determined by two polynomial semislice maps g_J on C_J+ and g_K on C_K+.

    g_J(alpha + J*beta) = sum (alpha + J*beta)^n a_n and likewise for g_K with b_n. The
    stem is carried coefficientwise by q_n = (J - K)^-1 (a_n - b_n), p_n = a_n - J q_n.
    """

    def __init__(self, J, K, gJ, gK):
        J = qt.imaginary_unit(J)
        K = qt.imaginary_unit(K)
        if qt.norm(J - K) <= config.DEFAULT_TOL:
            raise DegeneratePairError(f"J and K coincide: {J.tolist()}")
        a = np.atleast_2d(qt.as_quaternion(gJ))
        b = np.atleast_2d(qt.as_quaternion(gK))
        n = max(len(a), len(b))
        a = np.vstack([a, np.zeros((n - len(a), 4))])
        b = np.vstack([b, np.zeros((n - len(b), 4))])
        q = qt.quat_mul(qt.quat_inverse(J - K), a - b)
        p = a - qt.quat_mul(J, q)
        super().__init__(qt.hc(p, q))
        self.J, self.K, self.gJ, self.gK = J, K, a, b

    @property
    def reaches_real(self):
        return False

    def __repr__(self):
        return f"TwoSliceStem(J={self.J.tolist()}, K={self.K.tolist()}, degree={self.degree})"


class ClosureStem(StemFunction):
    """Stem given by vectorized callables F1(alpha, beta), F2(alpha, beta).

    `partials`, when given, returns (F1a, F1b, F2a, F2b) at (alpha, beta); otherwise
    central finite differences are used. Parity is spot-checked at PARITY_PROBES points.
    """

    def __init__(self, F1, F2, partials=None, reaches_real=True, check_parity=True, probe_domain=None):
        self._F1 = F1
        self._F2 = F2
        self._partials = partials
        self._reaches_real = reaches_real
        if check_parity:
            self.check_parity(probe_domain or CircularDomain())

    def _eval(self, fn, alpha, beta):
        out = np.asarray(fn(alpha, beta), dtype=float)
        return np.broadcast_to(out, np.shape(alpha) + (4,)).copy()

    def F1(self, alpha, beta):
        return self._eval(self._F1, alpha, beta)

    def F2(self, alpha, beta):
        return self._eval(self._F2, alpha, beta)

    @property
    def reaches_real(self):
        return self._reaches_real

    @property
    def has_partials(self):
        return self._partials is not None

    def check_parity(self, domain, tol=config.PARITY_TOL):
        rng = np.random.default_rng(0)
        alpha, beta = domain.random_coords(rng, config.PARITY_PROBES)
        even = qt.norm(self.F1(alpha, -beta) - self.F1(alpha, beta))
        odd = qt.norm(self.F2(alpha, -beta) + self.F2(alpha, beta))
        worst = float(max(even.max(), odd.max()))
        if worst > tol:
            raise ParityError(f"stem parity residual {worst:.3g} exceeds {tol}")

    def components(self, z):
        alpha, beta = _split(z)
        return self.F1(alpha, beta), self.F2(alpha, beta)

    def partials(self, z):
        if self._partials is None:
            return finite_difference_partials(self.F1, self.F2, z)
        alpha, beta = _split(z)
        return tuple(np.broadcast_to(np.asarray(d, dtype=float), np.shape(alpha) + (4,))
                     for d in self._partials(alpha, beta))

    def conjugate(self):
        partials = None
        if self._partials is not None:
            partials = lambda a, b: tuple(qt.conj(d) for d in self._partials(a, b))
        return ClosureStem(
            lambda a, b: qt.conj(self.F1(a, b)),
            lambda a, b: qt.conj(self.F2(a, b)),
            partials, self._reaches_real, check_parity=False,
        )

    def derivative(self):
        def D1(a, b):
            return self.derivative_components(a + 1j * np.asarray(b))[0]

        def D2(a, b):
            return self.derivative_components(a + 1j * np.asarray(b))[1]

        return ClosureStem(D1, D2, None, self._reaches_real, check_parity=False)

    def shifted(self, q):
        q = qt.as_quaternion(q)
        return ClosureStem(lambda a, b: self.F1(a, b) - q, self.F2, self._partials,
                           self._reaches_real, check_parity=False)


def product_stem(F, G):
    """Stem of FG = F1G1 - F2G2 + sqrt(-1)(F1G2 + F2G1); the product rule gives the partials."""
    if isinstance(F, PolynomialStem) and isinstance(G, PolynomialStem):
        return F.convolve(G)

    def mul(a, b):
        return qt.hc_mul(a, b)

    def values(alpha, beta):
        z = alpha + 1j * np.asarray(beta)
        return mul(F.values(z), G.values(z))

    def partials(alpha, beta):
        z = alpha + 1j * np.asarray(beta)
        Fv, Gv = F.values(z), G.values(z)
        F1a, F1b, F2a, F2b = F.partials(z)
        G1a, G1b, G2a, G2b = G.partials(z)
        da = mul(np.stack([F1a, F2a], axis=-2), Gv) + mul(Fv, np.stack([G1a, G2a], axis=-2))
        db = mul(np.stack([F1b, F2b], axis=-2), Gv) + mul(Fv, np.stack([G1b, G2b], axis=-2))
        return da[..., 0, :], db[..., 0, :], da[..., 1, :], db[..., 1, :]

    return ClosureStem(
        lambda a, b: values(a, b)[..., 0, :],
        lambda a, b: values(a, b)[..., 1, :],
        partials,
        F.reaches_real and G.reaches_real,
        check_parity=False,
    )


class SliceFunction:
    """f = I(F) on the circularization of a rectangle."""

    def __init__(self, stem, domain=None, name=None):
        domain = domain or CircularDomain()
        if not stem.reaches_real and domain.intersects_real:
            domain = domain.punctured()
        self.stem = stem
        self.domain = domain
        self.name = name or type(stem).__name__

    def __call__(self, x):
        return evaluate(self, x)

    def at(self, alpha, beta, unit):
        """Evaluate at alpha + unit*beta without normalizing the sign of beta."""
        alpha = np.asarray(alpha, dtype=float)
        beta = np.asarray(beta, dtype=float)
        if not np.all(self.domain.contains_coords(alpha, beta)):
            raise DomainError(f"point outside the domain of {self.name}")
        F1, F2 = self.stem.components(alpha + 1j * beta)
        return F1 + qt.quat_mul(unit, F2)

    @property
    def is_polynomial(self):
        return isinstance(self.stem, PolynomialStem)

    def __repr__(self):
        return f"SliceFunction({self.name}, {self.stem!r}, {self.domain.to_dict()})"


def evaluate(f, x):
    """f(alpha + J*beta) = F1(alpha + i*beta) + J*F2(alpha + i*beta)."""
    x = qt.as_quaternion(x)
    alpha, beta, unit = qt.slice_split(x)
    inside = f.domain.contains_coords(alpha, beta)
    if not np.all(inside):
        bad = x[~inside] if x.ndim > 1 else x
        raise DomainError(f"{np.atleast_2d(bad)[0].tolist()} is outside the domain of {f.name}")
    F1, F2 = f.stem.components(alpha + 1j * beta)
    return F1 + qt.quat_mul(unit, F2)


def representation_reconstruct(vJ, vK, J, K, target):
    """Value at alpha + I*beta from the values at alpha + J*beta and alpha + K*beta.

    (I - K)(J - K)^-1 vJ - (I - J)(J - K)^-1 vK, where I is the unit of `target`
    (a SliceCoordinates or a bare imaginary unit).
    """
    J = qt.imaginary_unit(J)
    K = qt.imaginary_unit(K)
    if qt.norm(J - K) <= config.DEFAULT_TOL:
        raise DegeneratePairError(f"J and K coincide: {J.tolist()}")
    I = target.unit if isinstance(target, qt.SliceCoordinates) else qt.imaginary_unit(target)
    inv = qt.quat_inverse(J - K)
    return (qt.quat_mul(qt.quat_mul(I - K, inv), vJ)
            - qt.quat_mul(qt.quat_mul(I - J, inv), vK))


def _same_domain(f, g):
    if f.domain.alpha_range != g.domain.alpha_range or f.domain.beta_range != g.domain.beta_range:
        raise DomainError(f"domain mismatch: {f.domain.to_dict()} vs {g.domain.to_dict()}")
    return f.domain if f.domain.intersects_real and g.domain.intersects_real else f.domain.punctured()


def slice_product(f, g):
    domain = _same_domain(f, g)
    return SliceFunction(product_stem(f.stem, g.stem), domain, name=f"({f.name})*({g.name})")


def conjugate(f):
    return SliceFunction(f.stem.conjugate(), f.domain, name=f"({f.name})^c")


def normal(f):
    """N(f) = f * f^c. Polynomial stems come back with their coefficients cleaned to C."""
    nf = slice_product(f, conjugate(f))
    if isinstance(nf.stem, PolynomialStem):
        c = nf.stem.coeffs
        scale = max(1.0, float(np.abs(c).max()))
        if np.any(np.abs(c[:, :, 1:]) > 1e-9 * scale):
            raise NonRealNormal(f"N({f.name}) has non-real stem coefficients")
        clean = np.zeros_like(c)
        clean[:, :, 0] = c[:, :, 0]
        nf = SliceFunction(PolynomialStem(clean), nf.domain, name=f"N({f.name})")
    else:
        nf.name = f"N({f.name})"
    return nf


def normal_stem_values(f, z):
    """Complex stem n(z) = |F1|^2 - |F2|^2 + 2i g(F1, F2) of N(f)."""
    F1, F2 = f.stem.components(z)
    return (np.sum(F1 * F1, axis=-1) - np.sum(F2 * F2, axis=-1)
            + 2j * np.sum(F1 * F2, axis=-1))


def splitting_decompose(f, J, K, tol=config.DEFAULT_TOL):
    """Holomorphic f1, f2 on C_J with f(alpha + J*beta) = f1(z) + f2(z)K.

    Both are returned as callables on complex z = alpha + i*beta, identifying C_J with C.
    """
    J = qt.imaginary_unit(J)
    K = qt.imaginary_unit(K)
    if abs(qt.scalar_product(J, K)) > tol:
        raise DegeneratePairError(f"K={K.tolist()} is not orthogonal to J={J.tolist()}")

    def restrict(z):
        z = np.asarray(z, dtype=complex)
        return f.at(z.real, z.imag, J)

    def f1(z):
        v = restrict(z)
        return v[..., 0] + 1j * qt.scalar_product(v, J)

    def f2(z):
        v = restrict(z)
        rest = v - (v[..., :1] * qt.ONE + qt.scalar_product(v, J)[..., None] * J)
        w = -qt.quat_mul(rest, K)
        return w[..., 0] + 1j * qt.scalar_product(w, J)

    return f1, f2


def cauchy_riemann_residual(fn, z, step=config.FD_STEP):
    """|dg/dbeta - i dg/dalpha| by central differences for a complex map g."""
    z = np.asarray(z, dtype=complex)
    h = step * np.maximum(1.0, np.abs(z))
    ga = (fn(z + h) - fn(z - h)) / (2 * h)
    gb = (fn(z + 1j * h) - fn(z - 1j * h)) / (2 * h)
    return np.abs(gb - 1j * ga)


def prodcomp_check(f, g, x, tol=config.DEFAULT_TOL):
    """|(f*g)(x) - f(x) g(f(x)^-1 x f(x))|."""
    x = qt.as_quaternion(x)
    fx = f(x)
    if qt.norm(fx) <= tol:
        raise NotApplicable(f"f vanishes at {x.tolist()}")
    y = qt.quat_mul(qt.quat_mul(qt.quat_inverse(fx), x), fx)
    lhs = slice_product(f, g)(x)
    return float(qt.norm(lhs - qt.quat_mul(fx, g(y))))


def _probe_coords(f, n=config.PREDICATE_PROBES):
    alpha, beta = f.domain.random_coords(np.random.default_rng(1), n)
    return alpha + 1j * beta


def is_real(f, tol=config.DEFAULT_TOL):
    """Both stem components real-valued."""
    if isinstance(f.stem, PolynomialStem):
        return bool(np.all(np.abs(f.stem.coeffs[:, :, 1:]) <= tol))
    F1, F2 = f.stem.components(_probe_coords(f))
    return bool(np.all(np.abs(F1[..., 1:]) <= tol) and np.all(np.abs(F2[..., 1:]) <= tol))


def is_slice_constant(f, tol=config.DEFAULT_TOL):
    """df/dx vanishes identically."""
    if isinstance(f.stem, PolynomialStem):
        return f.stem.degree == 0
    D1, D2 = f.stem.derivative_components(_probe_coords(f))
    return bool(np.all(qt.norm(D1) <= tol) and np.all(qt.norm(D2) <= tol))


def subtract_constant(f, q):
    return SliceFunction(f.stem.shifted(q), f.domain, name=f"{f.name} - {qt.as_quaternion(q).tolist()}")


## Constructors

def polynomial(coeffs, domain=None, name=None):
    """f(x) = sum x^n a_n for quaternion a_n, or H_C coefficients of shape (n, 2, 4)."""
    return SliceFunction(PolynomialStem(coeffs), domain, name=name or "polynomial")


def twoslice(J, K, gJ, gK, domain=None, name=None):
    return SliceFunction(TwoSliceStem(J, K, gJ, gK), domain, name=name or "twoslice")


def closure(F1, F2, partials=None, domain=None, reaches_real=True, name=None):
    domain = domain or CircularDomain()
    stem = ClosureStem(F1, F2, partials, reaches_real=reaches_real, probe_domain=domain)
    return SliceFunction(stem, domain, name=name or "closure")


def constant(value, domain=None):
    return polynomial([qt.as_quaternion(value)], domain, name=f"const {qt.as_quaternion(value).tolist()}")


def identity(domain=None):
    return polynomial([qt.quaternion(), qt.ONE], domain, name="x")
