import numpy as np
import pytest

from lib import gallery
from lib import quaternions as qt
from lib import slicefn as sf
from lib.errors import DegeneratePairError, DomainError, NonRealNormal, ParityError


def direct_polynomial(coeffs, x):
    """sum x^n a_n by repeated quaternion products."""
    out = np.zeros_like(x)
    power = np.broadcast_to(qt.ONE, x.shape).copy()
    for a in coeffs:
        out += qt.quat_mul(power, a)
        power = qt.quat_mul(power, x)
    return out


def test_x_plus_j_at_i():
    f = sf.polynomial([qt.J, qt.ONE])
    assert np.allclose(f(qt.I), qt.I + qt.J)


def test_polynomial_matches_direct_evaluation(rng):
    coeffs = qt.random_quaternions(rng, 4)
    f = sf.polynomial(coeffs)
    x = f.domain.random_points(rng, 50)
    assert np.allclose(f(x), direct_polynomial(coeffs, x), atol=1e-10)


def test_polynomial_on_the_real_axis():
    f = gallery.square()
    assert np.allclose(f(np.array([[1.5, 0, 0, 0]])), [[2.25, 0, 0, 0]])


def test_trailing_zero_coefficients_are_trimmed():
    stem = sf.PolynomialStem([qt.ONE, qt.I, qt.quaternion()])
    assert stem.degree == 1
    assert stem.is_quaternionic


def test_slice_constant_values(rng, slice_constant):
    alpha, beta = slice_constant.domain.random_coords(rng, 30)
    units = qt.random_units(rng, 30)
    values = slice_constant(qt.from_slice_coords(alpha, beta, units))
    assert np.allclose(values, qt.ONE - qt.quat_mul(units, qt.I))
    assert np.allclose(slice_constant.at(alpha, beta, np.broadcast_to(qt.I, units.shape)), 2.0 * qt.ONE)
    assert np.allclose(slice_constant.at(alpha, beta, np.broadcast_to(-qt.I, units.shape)), 0.0)


def test_two_slice_stems_avoid_the_real_axis(slice_constant):
    assert not slice_constant.domain.intersects_real
    with pytest.raises(DomainError):
        slice_constant(qt.ONE)


def test_two_slice_needs_distinct_units():
    with pytest.raises(DegeneratePairError):
        sf.twoslice(qt.J, qt.J, 1.0, 0.0)


def test_twoslice_restricts_to_its_semislice_maps(rng):
    J, K = qt.J, qt.imaginary_unit([0.0, 0.6, 0.0, 0.8])
    a, b = qt.random_quaternions(rng, 3), qt.random_quaternions(rng, 2)
    f = sf.twoslice(J, K, a, b)
    alpha, beta = f.domain.random_coords(rng, 10)
    xJ = qt.from_slice_coords(alpha, beta, np.broadcast_to(J, (10, 4)))
    xK = qt.from_slice_coords(alpha, beta, np.broadcast_to(K, (10, 4)))
    assert np.allclose(f(xJ), direct_polynomial(a, xJ), atol=1e-10)
    assert np.allclose(f(xK), direct_polynomial(b, xK), atol=1e-10)


def test_representation_formula(rng):
    f = gallery.random_polynomial(rng, 3)
    J, K = qt.random_units(rng, 2)
    x = f.domain.random_points(rng, 1)[0]
    coords = qt.to_slice_coords(x)
    vJ = f.at(coords.alpha, coords.beta, J)
    vK = f.at(coords.alpha, coords.beta, K)
    assert np.allclose(sf.representation_reconstruct(vJ, vK, J, K, coords), f(x), atol=1e-9)
    with pytest.raises(DegeneratePairError):
        sf.representation_reconstruct(vJ, vJ, J, J, coords)


def test_outside_the_domain():
    f = gallery.square()
    with pytest.raises(DomainError):
        f(qt.quaternion(5.0, 0.0, 1.0, 0.0))


def test_closure_parity_is_checked():
    with pytest.raises(ParityError):
        sf.closure(lambda a, b: np.asarray(b)[..., None] * qt.ONE, lambda a, b: np.zeros(np.shape(a) + (4,)))


def test_closure_finite_difference_partials_match_analytic():
    f = gallery.conjugate_variable()
    stem = sf.ClosureStem(f.stem.F1, f.stem.F2)
    z = np.array([0.3 + 0.7j, -1.1 + 0.2j])
    for fd, exact in zip(stem.partials(z), f.stem.partials(z)):
        assert np.allclose(fd, exact, atol=1e-6)


def test_slice_product_of_quaternion_polynomials(rng):
    a, b = qt.random_quaternions(rng, 2), qt.random_quaternions(rng, 3)
    product = sf.slice_product(sf.polynomial(a), sf.polynomial(b))
    expected = np.zeros((4, 4))
    for m in range(2):
        for n in range(3):
            expected[m + n] += qt.quat_mul(a[m], b[n])
    assert np.allclose(product.stem.p, expected)


def test_product_formula(rng):
    f, g = gallery.random_polynomial(rng, 2), gallery.random_polynomial(rng, 2)
    for x in f.domain.random_points(rng, 5):
        assert sf.prodcomp_check(f, g, x) < 1e-9


def test_product_with_a_closure_stem(rng, square):
    f = sf.slice_product(square, gallery.conjugate_variable())
    x = f.domain.random_points(rng, 5)
    assert isinstance(f.stem, sf.ClosureStem)
    F1, F2 = f.stem.components(np.array([0.4 + 0.9j]))
    G = square.stem.values(np.array([0.4 + 0.9j]))
    Z = gallery.conjugate_variable().stem.values(np.array([0.4 + 0.9j]))
    assert np.allclose(np.stack([F1, F2], axis=-2), qt.hc_mul(G, Z))
    assert f(x).shape == (5, 4)


def test_normal_function_of_x_plus_j():
    n = sf.normal(sf.polynomial([qt.J, qt.ONE]))
    assert np.allclose(n.stem.complex_coefficients(), [1.0, 0.0, 1.0])


def test_normal_function_of_the_slice_constant_example(slice_constant):
    assert np.allclose(sf.normal(slice_constant).stem.coeffs, 0.0)


def test_normal_rejects_non_real_coefficients(monkeypatch):
    monkeypatch.setattr(sf, "product_stem", lambda f, g: sf.PolynomialStem([qt.I, qt.ONE]))
    with pytest.raises(NonRealNormal):
        sf.normal(sf.polynomial([qt.J, qt.ONE]))


def test_normal_stem_values_match_the_normal_function(rng):
    f = gallery.random_polynomial(rng, 2)
    z = np.array([0.2 + 0.5j, -0.7 + 1.3j])
    n = sf.normal(f).stem.complex_coefficients()
    assert np.allclose(sf.normal_stem_values(f, z), np.polynomial.polynomial.polyval(z, n))


def test_conjugate():
    f = sf.polynomial([qt.J, qt.ONE])
    assert np.allclose(sf.conjugate(f)(qt.I), qt.I - qt.J)


def test_splitting_components_are_holomorphic(rng):
    f = gallery.cubic_plus_xk()
    f1, f2 = sf.splitting_decompose(f, qt.I, qt.J)
    z = np.array([0.3 + 0.4j, -0.5 + 1.2j])
    assert np.all(sf.cauchy_riemann_residual(f1, z) < 1e-6)
    assert np.all(sf.cauchy_riemann_residual(f2, z) < 1e-6)
    value = f.at(z.real, z.imag, np.broadcast_to(qt.I, (2, 4)))
    f1z, f2z = f1(z), f2(z)
    rebuilt = (np.stack([f1z.real, f1z.imag, 0 * f1z.real, 0 * f1z.real], axis=-1)
               + qt.quat_mul(np.stack([f2z.real, f2z.imag, 0 * f2z.real, 0 * f2z.real], axis=-1), qt.J))
    assert np.allclose(rebuilt, value)
    with pytest.raises(DegeneratePairError):
        sf.splitting_decompose(f, qt.I, qt.imaginary_unit([0, 0.6, 0.8, 0]))


def test_conjugate_variable_fails_cauchy_riemann():
    f = gallery.conjugate_variable()
    f1, _ = sf.splitting_decompose(f, qt.I, qt.J)
    assert np.all(sf.cauchy_riemann_residual(f1, np.array([0.3 + 0.4j])) > 1.0)


def test_predicates(square, slice_constant):
    assert sf.is_real(square)
    assert not sf.is_real(sf.polynomial([qt.J, qt.ONE]))
    assert sf.is_slice_constant(slice_constant)
    assert not sf.is_slice_constant(square)
    assert sf.is_slice_constant(sf.closure(lambda a, b: np.broadcast_to(qt.J, np.shape(a) + (4,)),
                                           lambda a, b: np.zeros(np.shape(a) + (4,))))


def test_subtract_constant(rng, square):
    g = sf.subtract_constant(square, qt.K)
    x = square.domain.random_points(rng, 5)
    assert np.allclose(g(x), square(x) - qt.K)


def test_constructors():
    assert np.allclose(sf.identity()(qt.J), qt.J)
    assert np.allclose(sf.constant(qt.K)(qt.I), qt.K)


def test_normal_is_multiplicative(rng):
    f, g = gallery.random_polynomial(rng, 2), gallery.random_polynomial(rng, 3)
    lhs = sf.normal(sf.slice_product(f, g)).stem.coeffs
    rhs = sf.slice_product(sf.normal(f), sf.normal(g)).stem.coeffs
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_conjugate_reverses_products(rng):
    f, g = gallery.random_polynomial(rng, 2), gallery.random_polynomial(rng, 2)
    lhs = sf.conjugate(sf.slice_product(f, g)).stem.coeffs
    rhs = sf.slice_product(sf.conjugate(g), sf.conjugate(f)).stem.coeffs
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_zeros_of_a_factor_are_zeros_of_the_product(rng):
    f = sf.polynomial([qt.J, qt.ONE])
    g = gallery.random_polynomial(rng, 3)
    assert np.allclose(sf.slice_product(f, g)(-qt.J), 0.0, atol=1e-12)


def test_normal_vanishes_on_the_whole_zero_sphere(rng):
    n = sf.normal(sf.polynomial([qt.J, qt.ONE]))
    assert np.allclose(n(qt.random_units(rng, 10)), 0.0, atol=1e-12)


def relative(value, expected):
    return np.max(qt.norm(value - expected)) / max(1.0, np.max(qt.norm(expected)))


@pytest.fixture
def product_sample(rng):
    f, g = gallery.factored_quadratic(), gallery.random_polynomial(rng, 2)
    return f, g, f.domain.random_points(rng, 1000)


def test_representation_formula_over_a_thousand_points(rng, product_sample):
    f, g, _ = product_sample
    fg = sf.slice_product(f, g)
    for _ in range(10):
        alpha, beta = fg.domain.random_coords(rng, 100)
        I, J, K = qt.random_units(rng, 3)
        rebuilt = sf.representation_reconstruct(fg.at(alpha, beta, J), fg.at(alpha, beta, K), J, K, I)
        assert relative(rebuilt, fg.at(alpha, beta, I)) < 1e-9


def test_normal_is_pointwise_multiplicative(product_sample):
    f, g, x = product_sample
    lhs = sf.normal(sf.slice_product(f, g))(x)
    assert relative(lhs, qt.quat_mul(sf.normal(f)(x), sf.normal(g)(x))) < 1e-10


def test_conjugate_reverses_products_pointwise(product_sample):
    f, g, x = product_sample
    lhs = sf.conjugate(sf.slice_product(f, g))(x)
    assert relative(lhs, sf.slice_product(sf.conjugate(g), sf.conjugate(f))(x)) < 1e-10


def test_real_factor_multiplies_pointwise(product_sample):
    _, g, x = product_sample
    r = sf.polynomial([0.3 * qt.ONE, -0.5 * qt.ONE, qt.ONE])
    assert relative(sf.slice_product(r, g)(x), qt.quat_mul(r(x), g(x))) < 1e-10


@pytest.mark.parametrize("make", [gallery.product_example, gallery.factored_quadratic, gallery.injective_example])
def test_values_do_not_depend_on_the_sign_of_beta(rng, make):
    f = make()
    alpha, beta = f.domain.random_coords(rng, 1000)
    units = qt.random_units(rng, 1000)
    assert relative(f.at(alpha, -beta, -units), f.at(alpha, beta, units)) < 1e-12
