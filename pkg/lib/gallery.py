# Worked-example functions and their closed forms, shared by lib/verify.py and the tests

import numpy as np

from lib import quaternions as qt
from lib import slicefn as sf


def slice_constant_example(domain=None):
    """Constant 2 on C_i+ and 0 on C_-i+, i.e. f(alpha + I*beta) = 1 - Ii."""
    return sf.twoslice(qt.I, -qt.I, 2.0, 0.0, domain, name="1-Ii")


def product_example(domain=None, perturb=0.0):
    """h = (x + j) * (1 - Ii); `perturb` shifts the constant stem coefficient along k."""
    f = sf.polynomial([qt.J, qt.ONE], domain, name="x+j")
    h = sf.slice_product(f, slice_constant_example(domain))
    if perturb:
        c = np.array(h.stem.coeffs)
        c[0, 0] += perturb * qt.K
        h = sf.SliceFunction(sf.PolynomialStem(c), h.domain)
    h.name = "h"
    return h


def injective_example(J=qt.J, domain=None):
    """f(alpha + I*beta) = x(1 - IJ): 2x on C_J+, 0 on C_-J+."""
    J = qt.imaginary_unit(J)
    return sf.twoslice(J, -J, [qt.quaternion(), 2.0 * qt.ONE], 0.0, domain, name="x(1-IJ)")


def square(domain=None):
    return sf.polynomial([qt.quaternion(), qt.quaternion(), qt.ONE], domain, name="x^2")


def cubic_plus_xk(domain=None):
    return sf.polynomial([qt.quaternion(), qt.K, qt.quaternion(), qt.ONE], domain, name="x^3+xk")


def factored_quadratic(domain=None):
    """(x - a) * (x - b) with a = 0.3 + 0.5i + 0.2j and b = -0.7 + 0.9k; zeros on the spheres over 0.3 + sqrt(0.29)i and -0.7 + 0.9i, one of them a itself."""
    a = qt.quaternion(0.3, 0.5, 0.2, 0.0)
    b = qt.quaternion(-0.7, 0.0, 0.0, 0.9)
    f = sf.slice_product(sf.polynomial([-a, qt.ONE], domain), sf.polynomial([-b, qt.ONE], domain))
    f.name = "(x-a)*(x-b)"
    return f


def characteristic(y, domain=None):
    """Delta_y as a slice function."""
    c = qt.characteristic_poly(y)
    return sf.polynomial([c[0] * qt.ONE, c[1] * qt.ONE, qt.ONE], domain, name=f"Delta_{qt.as_quaternion(y).tolist()}")


def conjugate_variable(domain=None):
    """The non-regular stem F(z) = z-bar, F1 = alpha, F2 = -beta."""
    def partials(a, b):
        a = np.asarray(a, dtype=float)
        one = np.broadcast_to(qt.ONE, a.shape + (4,))
        zero = np.zeros(a.shape + (4,))
        return one, zero, zero, -one

    return sf.closure(
        lambda a, b: np.asarray(a, dtype=float)[..., None] * qt.ONE,
        lambda a, b: -np.asarray(b, dtype=float)[..., None] * qt.ONE,
        partials, domain, name="z-bar",
    )


def random_polynomial(rng, degree, domain=None, scale=1.0):
    return sf.polynomial(qt.random_quaternions(rng, degree + 1, scale), domain, name=f"random degree {degree}")


## Closed forms

def product_closed_form(alpha, beta, unit):
    """h(alpha + I*beta) = alpha + beta*i + j + I(beta - alpha*i + k)."""
    alpha = np.asarray(alpha, dtype=float)[..., None]
    beta = np.asarray(beta, dtype=float)[..., None]
    F1 = alpha * qt.ONE + beta * qt.I + qt.J
    F2 = beta * qt.ONE - alpha * qt.I + qt.K
    return F1 + qt.quat_mul(unit, F2)


def product_zero_unit(alpha, beta):
    """The surface S_h: I(z) = (-(alpha^2 + beta^2 - 1)i - 2*beta*j + 2*alpha*k)/(alpha^2 + beta^2 + 1)."""
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    r = alpha ** 2 + beta ** 2
    return np.stack([np.zeros_like(r), -(r - 1.0), -2.0 * beta, 2.0 * alpha], axis=-1) / (r + 1.0)[..., None]


def product_slice_derivative(unit):
    """dh/dx = 1 - Ii."""
    return qt.ONE - qt.quat_mul(unit, qt.I)


def product_spherical_derivative(alpha, beta):
    """d_s h = 1 - (alpha/beta)i + k/beta."""
    alpha = np.asarray(alpha, dtype=float)[..., None]
    beta = np.asarray(beta, dtype=float)[..., None]
    return qt.ONE - (alpha / beta) * qt.I + qt.K / beta


def injective_slice_derivative(unit, J=qt.J):
    return qt.ONE - qt.quat_mul(unit, J)


def injective_spherical_derivative(alpha, beta, J=qt.J):
    """(beta - alpha*J)/beta."""
    alpha = np.asarray(alpha, dtype=float)[..., None]
    beta = np.asarray(beta, dtype=float)[..., None]
    return (beta * qt.ONE - alpha * J) / beta
