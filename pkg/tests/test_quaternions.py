import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lib import quaternions as qt
from lib.errors import DomainError, PoleError, RealAxisError

quats = arrays(np.float64, (4,), elements=st.floats(min_value=-10.0, max_value=10.0))


@pytest.mark.parametrize("p, q, expected", [
    (qt.I, qt.J, qt.K),
    (qt.J, qt.K, qt.I),
    (qt.K, qt.I, qt.J),
    (qt.J, qt.I, -qt.K),
    (qt.I, qt.I, -qt.ONE),
])
def test_basis_products(p, q, expected):
    assert np.allclose(qt.quat_mul(p, q), expected)


@given(quats, quats, quats)
def test_multiplication_is_associative(p, q, r):
    left = qt.quat_mul(qt.quat_mul(p, q), r)
    right = qt.quat_mul(p, qt.quat_mul(q, r))
    assert np.allclose(left, right, atol=1e-9 * (1 + np.abs(left).max()))


@given(quats, quats)
def test_norm_is_multiplicative(p, q):
    assert np.isclose(qt.norm(qt.quat_mul(p, q)), qt.norm(p) * qt.norm(q), rtol=1e-12, atol=1e-12)


@given(quats, quats)
def test_conjugation_reverses_products(p, q):
    lhs = qt.conj(qt.quat_mul(p, q))
    rhs = qt.quat_mul(qt.conj(q), qt.conj(p))
    assert np.allclose(lhs, rhs, atol=1e-9)


@given(quats)
def test_inverse(p):
    if qt.norm(p) < 1e-3:
        return
    assert np.allclose(qt.quat_mul(p, qt.quat_inverse(p)), qt.ONE, atol=1e-9)


def test_broadcasting(rng):
    p = qt.random_quaternions(rng, 5)
    out = qt.quat_mul(p, qt.I)
    assert out.shape == (5, 4)
    assert np.allclose(out[2], qt.quat_mul(p[2], qt.I))


def test_zero_has_no_inverse():
    with pytest.raises(DomainError):
        qt.quat_inverse(qt.quaternion())


def test_as_quaternion():
    assert np.array_equal(qt.as_quaternion(2.0), [2.0, 0.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        qt.as_quaternion([1.0, 2.0, 3.0])


def test_imaginary_unit_validation():
    assert np.allclose(qt.imaginary_unit([0.0, 0.0, 1.0, 0.0]), qt.J)
    with pytest.raises(DomainError):
        qt.imaginary_unit([0.0, 2.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        qt.imaginary_unit([0.5, 0.0, 0.0, np.sqrt(0.75)])


def test_units_square_to_minus_one(rng):
    u = qt.random_units(rng, 50)
    assert np.allclose(qt.quat_mul(u, u), -qt.ONE)


def test_slice_coordinates_round_trip(rng):
    x = qt.random_quaternions(rng, 20)
    alpha, beta, unit = qt.slice_split(x)
    assert np.all(beta >= 0)
    assert np.allclose(qt.from_slice_coords(alpha, beta, unit), x)


def test_real_points_split_with_unit_i():
    alpha, beta, unit = qt.slice_split(np.array([[3.0, 0, 0, 0]]))
    assert alpha[0] == 3.0 and beta[0] == 0.0
    assert np.array_equal(unit[0], qt.I)
    with pytest.raises(RealAxisError):
        qt.to_slice_coords(3.0)


def test_negative_beta_is_normalized():
    c = qt.SliceCoordinates(1.0, -2.0, qt.J)
    assert c.beta == 2.0
    assert np.allclose(c.unit, -qt.J)
    assert np.allclose(c.to_quaternion(), [1.0, 0.0, -2.0, 0.0])


def test_sphere_unit_hits_coordinate_axes():
    assert np.allclose(qt.sphere_unit(0.0, 0.0), qt.K)
    assert np.allclose(qt.sphere_unit(np.pi / 2, 0.0), qt.I)
    assert np.allclose(qt.sphere_unit(np.pi / 2, np.pi), -qt.I)


def test_complexified_product_matches_complex_numbers():
    a = qt.hc(2.0 * qt.ONE, 3.0 * qt.ONE)
    b = qt.hc(-1.0 * qt.ONE, 0.5 * qt.ONE)
    c = (2 + 3j) * (-1 + 0.5j)
    out = qt.hc_mul(a, b)
    assert np.allclose(out[0], c.real * qt.ONE)
    assert np.allclose(out[1], c.imag * qt.ONE)
    assert np.allclose(qt.hc_scale(2 + 3j, qt.hc(qt.ONE)), a)
    assert np.allclose(qt.hc_bar(a)[1], -3.0 * qt.ONE)


def test_characteristic_polynomial_vanishes_on_the_sphere(rng):
    y = qt.random_quaternions(rng, 1)[0]
    alpha, beta, _ = qt.slice_split(y)
    others = qt.from_slice_coords(alpha, beta, qt.random_units(rng, 10))
    delta = qt.characteristic_poly(y)
    assert np.allclose(qt.eval_real_poly(delta, y), 0.0, atol=1e-9)
    assert np.allclose(qt.eval_real_poly(delta, qt.conj(y)), 0.0, atol=1e-9)
    assert np.allclose(qt.cassini_u(others, y), 0.0, atol=1e-6)


def test_stereographic_projection():
    assert np.allclose(qt.stereographic_project(qt.J, qt.I), qt.K)
    with pytest.raises(PoleError):
        qt.stereographic_project(-qt.I, qt.I)
    with pytest.raises(DomainError):
        qt.stereographic_project(2.0 * qt.J, qt.I)
    with pytest.raises(RealAxisError):
        qt.stereographic_project(qt.ONE, qt.ONE)


def test_stereographic_image_is_orthogonal_to_the_slice(rng):
    alpha, beta, J = 0.4, 1.1, qt.random_units(rng, 1)[0]
    x0 = qt.from_slice_coords(alpha, beta, J)
    units = qt.random_units(rng, 1000)
    units = units[qt.norm(units + J) > 1e-3]
    p = qt.stereographic_project(qt.from_slice_coords(alpha, beta, units), x0)
    assert np.allclose(p[:, 0], 0.0, atol=1e-12)
    assert np.allclose(qt.scalar_product(p, J), 0.0, atol=1e-12 * (1.0 + np.max(qt.norm(p))))
