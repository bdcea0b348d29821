import math
import warnings

import numpy as np
import pytest

from src import quaternion as quat
from src.errors import DegenerateInputError, InvalidRotationError
from src.phcore import axis_quadratic_differential, solve_axis_quadratic


def test_basis_products():
    assert np.allclose(quat.mul(quat.I, quat.J), quat.K)
    assert np.allclose(quat.mul(quat.J, quat.I), -quat.K)
    assert np.allclose(quat.mul(quat.I, quat.I), -quat.ONE)
    assert np.allclose(quat.mul(quat.K, quat.K), -quat.ONE)


def test_mul_broadcasts_and_is_associative(rng):
    a, b, c = rng.normal(size=(3, 50, 4))
    left = quat.mul(quat.mul(a, b), c)
    right = quat.mul(a, quat.mul(b, c))
    assert np.allclose(left, right, atol=1e-13)
    single = quat.mul(a, quat.I)
    assert single.shape == (50, 4)
    assert np.allclose(single[3], quat.mul(a[3], quat.I))


def test_modulus_and_conjugate(rng):
    a, b = rng.normal(size=(2, 4))
    assert math.isclose(quat.modulus(quat.mul(a, b)), quat.modulus(a) * quat.modulus(b), rel_tol=1e-14)
    assert np.allclose(quat.conjugate(quat.mul(a, b)), quat.mul(quat.conjugate(b), quat.conjugate(a)))
    assert math.isclose(quat.inner4(a, b), quat.scalar(quat.mul(a, quat.conjugate(b))), rel_tol=1e-13, abs_tol=1e-14)


def test_sandwich_is_pure_and_symmetric_part(rng):
    a, b = rng.normal(size=(2, 4))
    assert abs(quat.scalar(quat.sandwich_i(a))) < 1e-14
    both = quat.sandwich_i(a, b) + quat.sandwich_i(b, a)
    assert abs(quat.scalar(both)) < 1e-14
    assert np.allclose(quat.symmetric_i(a, b), quat.vector(both))
    # |a i a*| = |a|^2
    assert math.isclose(np.linalg.norm(quat.sandwich_i(a)), quat.inner4(a, a), rel_tol=1e-14)


def test_exp_i_commutes_with_i():
    for theta in (0.0, 0.3, math.pi, 5.0):
        e = quat.exp_i(theta)
        assert np.allclose(quat.sandwich_i(e), quat.I)
    assert quat.exp_i(np.zeros((2, 3))).shape == (2, 3, 4)


def test_rotate_quarter_turn_about_z():
    q = quat.quaternion(math.cos(math.pi / 4), 0.0, 0.0, math.sin(math.pi / 4))
    assert np.allclose(quat.rotate(q, [1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-15)
    assert np.allclose(quat.rotation_matrix(q) @ np.array([1.0, 2.0, 3.0]), quat.rotate(q, [1.0, 2.0, 3.0]))


def test_rotate_rejects_non_unit():
    with pytest.raises(InvalidRotationError):
        quat.rotate(quat.quaternion(2.0), [1.0, 0.0, 0.0])


def _residual(r, phi=0.0):
    v = solve_axis_quadratic(r, phi)
    return np.linalg.norm(quat.vector(quat.sandwich_i(v)) - r, axis=-1) / np.linalg.norm(r, axis=-1)


def test_axis_quadratic_random_right_hand_sides(rng):
    r = rng.normal(size=(990, 3)) * rng.uniform(1e-3, 1e3, size=(990, 1))
    near = -np.array([1.0, 0.0, 0.0]) + rng.normal(size=(10, 3)) * np.logspace(-14, -6, 10)[:, None]
    r = np.concatenate([r, near * 3.0])
    assert np.max(_residual(r)) <= 1e-12


def test_axis_quadratic_antiparallel_gives_k():
    v = solve_axis_quadratic(np.array([-1.0, 0.0, 0.0]))
    assert np.allclose(v, quat.K)
    assert np.allclose(solve_axis_quadratic(np.array([1.0, 0.0, 0.0])), quat.I)


def test_axis_quadratic_phase_family(rng):
    r = rng.normal(size=3)
    for phi in (0.0, 1.0, 2.5, -4.0):
        v = solve_axis_quadratic(r, phi)
        assert _residual(r, phi) <= 1e-12
        assert math.isclose(quat.modulus(v), math.sqrt(np.linalg.norm(r)), rel_tol=1e-14)


def test_axis_quadratic_rejects_zero():
    with pytest.raises(DegenerateInputError):
        solve_axis_quadratic(np.zeros(3))


def test_axis_quadratic_along_i_is_quiet():
    r = np.array([[2.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        v = solve_axis_quadratic(r)
    assert np.allclose(v[0], math.sqrt(2.0) * quat.I)
    assert np.allclose(v[1], quat.K)
    assert np.max(_residual(r)) <= 1e-15


def test_axis_quadratic_differential_matches_finite_differences(rng):
    step = 1e-6
    for _ in range(20):
        r = rng.normal(size=3)
        dr = rng.normal(size=(2, 3))
        dv = axis_quadratic_differential(r, dr)
        assert dv.shape == (2, 4)
        assert np.all(quat.scalar(dv) == 0.0)
        for k in range(2):
            fd = (solve_axis_quadratic(r + step * dr[k]) - solve_axis_quadratic(r - step * dr[k])) / (2.0 * step)
            assert np.linalg.norm(fd - dv[k]) <= 1e-7 * max(1.0, np.linalg.norm(dv[k]))


def test_axis_quadratic_differential_rejects_antiparallel():
    with pytest.raises(DegenerateInputError):
        axis_quadratic_differential(np.array([-1.0, 0.0, 0.0]), np.eye(3))
