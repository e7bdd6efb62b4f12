import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multilandau import KernelSpec
from multilandau.kernel import eval_kernel, eval_kernel_pair

finite = st.floats(-10, 10, allow_nan=False)


def test_maxwell_unit_axis():
    np.testing.assert_array_equal(eval_kernel([1.0, 0.0], 0.0, 1.0, 1.0), [[0, 0], [0, 1]])


def test_coulomb_hand_value():
    np.testing.assert_allclose(eval_kernel([2.0, 0.0], -3.0, 1.0, 1.0), [[0, 0], [0, 0.5]], rtol=1e-15)


def test_mass_divides():
    np.testing.assert_array_equal(eval_kernel([0.0, 1.0], 0.0, 0.5, 2.0), [[0.25, 0], [0, 0]])


@pytest.mark.parametrize("gamma", [0.0, 1.0, -1.0, -3.0, -4.0])
def test_zero_relative_velocity_gives_zero(gamma):
    for z in ([0.0, 0.0], [1e-13, 0.0], [0.0, 0.0, 0.0]):
        A = eval_kernel(z, gamma, 1.0, 1.0)
        assert np.all(A == 0) and np.all(np.isfinite(A))


@settings(max_examples=200, deadline=None)
@given(st.lists(finite, min_size=3, max_size=3), st.sampled_from([0.0, -3.0, 1.0, -1.5]))
def test_symmetric_psd_nullspace(z, gamma):
    z = np.array(z)
    A = eval_kernel(z, gamma, 0.7, 1.3)
    np.testing.assert_array_equal(A, A.T)
    nrm = np.linalg.norm(A)
    assert np.linalg.eigvalsh(A).min() >= -1e-14 * max(nrm, 1e-300)
    assert np.linalg.norm(A @ z) <= 1e-12 * nrm * np.linalg.norm(z) + 1e-300


def test_maxwell_quadratic_scaling(rng):
    for _ in range(100):
        z = rng.normal(size=2)
        c = rng.uniform(0.1, 10)
        np.testing.assert_allclose(eval_kernel(c * z, 0.0, 1.0, 1.0), c**2 * eval_kernel(z, 0.0, 1.0, 1.0),
                                   rtol=1e-13, atol=1e-13 * c**2 * (z @ z))


def test_reciprocity_bitwise(rng):
    kernel = KernelSpec(-3.0, [[1 / 8, 1 / 16], [1 / 16, 1 / 16]])
    masses = np.array([2.0, 1.0])
    for _ in range(200):
        z = rng.normal(size=2)
        # eval_kernel_pair(z, ..., i, j) is A_ji; A_ij = (m_i / m_j) A_ji
        A_10 = eval_kernel_pair(z, kernel, masses, 0, 1)
        A_01 = eval_kernel_pair(z, kernel, masses, 1, 0)
        assert np.array_equal(A_01, (masses[0] / masses[1]) * A_10)
        np.testing.assert_allclose(A_10, (masses[1] / masses[0]) * A_01, rtol=1e-15, atol=0)


def test_same_species_even_in_z(rng):
    kernel = KernelSpec(0.0, [[1.0]])
    for _ in range(50):
        z = rng.normal(size=3)
        assert np.array_equal(eval_kernel_pair(z, kernel, [1.5], 0, 0), eval_kernel_pair(-z, kernel, [1.5], 0, 0))
