import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from weakhyp.errors import InvalidParameterError
from weakhyp.symmetrisers import (block_symmetriser, build_symmetriser,
                                  intertwining_nullspace,
                                  normalised_companion,
                                  vandermonde_product_squared,
                                  verify_quadratic_bounds)


def test_two_root_example_matches_constrained_solve_oracle():
    sym = build_symmetriser([-1.0, 1.0])
    assert np.allclose(sym.matrix, 2.0 * np.eye(2))
    assert sym.det_value == pytest.approx(4.0)
    # oracle: nullspace of S A - A^T S on symmetric matrices contains S
    basis = intertwining_nullspace([-1.0, 1.0])
    flat = sym.matrix.ravel()
    stack = basis.reshape(basis.shape[0], -1).T
    coeff, *_ = np.linalg.lstsq(stack, flat, rcond=None)
    assert np.linalg.norm(stack @ coeff - flat) <= 1e-10 * np.linalg.norm(flat)


def test_coincident_roots_give_singular_psd():
    sym = build_symmetriser([0.0, 0.0])
    assert sym.det_value == 0.0
    eig = np.linalg.eigvalsh(sym.matrix)
    assert eig[0] >= -1e-12 * max(eig[-1], 1.0)


def test_three_root_determinant_brute_force():
    sym = build_symmetriser([1.0, 2.0, 3.0])
    assert sym.det_value == pytest.approx(4.0, rel=1e-12)
    assert vandermonde_product_squared([1.0, 2.0, 3.0]) == pytest.approx(4.0)


def test_symmetry_is_exact_by_construction():
    sym = build_symmetriser([-0.7, 0.1, 0.4, 1.3])
    assert np.array_equal(sym.matrix, sym.matrix.T)


def test_intertwining_identity():
    sym = build_symmetriser([-0.7, 0.1, 0.4, 1.3])
    assert sym.intertwining_residual() <= 1e-10


def test_quadratic_bounds_scalar_matrix():
    sym = build_symmetriser([-1.0, 1.0])
    report = verify_quadratic_bounds(sym, 100, np.random.default_rng(0))
    assert report.min_form == pytest.approx(2.0, abs=1e-12)
    assert report.max_form == pytest.approx(2.0, abs=1e-12)
    assert not report.violations


def test_det_floor_with_declared_spacing():
    sym = build_symmetriser([0.0, 0.1])
    report = verify_quadratic_bounds(sym, 20, np.random.default_rng(1),
                                     omega=0.1)
    assert report.det_floor == pytest.approx(0.01)
    assert sym.det_value >= report.det_floor - 1e-15
    assert not report.violations


def test_det_floor_three_roots_example():
    sym = build_symmetriser([0.0, 0.1, 0.2])
    assert sym.det_value == pytest.approx(4e-6, rel=1e-10)
    report = verify_quadratic_bounds(sym, 20, np.random.default_rng(2),
                                     omega=0.1)
    assert report.det_floor == pytest.approx(1e-6)
    assert not report.violations


def test_block_symmetriser_examples():
    block = block_symmetriser([-1.0, 1.0], 2)
    assert np.allclose(block.matrix, 2.0 * np.eye(4))
    assert block.det_value == pytest.approx(16.0)
    single = block_symmetriser([0.5, 1.5], 1)
    assert np.allclose(single.matrix, build_symmetriser([0.5, 1.5]).matrix)
    coincident = block_symmetriser([0.3, 0.3], 3)
    eig = np.linalg.eigvalsh(coincident.matrix)
    assert eig[0] >= -1e-12 * max(eig[-1], 1.0)
    with pytest.raises(InvalidParameterError):
        block_symmetriser([0.0, 1.0], 0)


def test_entry_bound_polynomial_in_root_bound():
    # rows hold elementary symmetric combos of m-1 roots bounded by c, so
    # |W_ik| <= binom(m-1, k) c^(m-1-k) and |S| <= m max|W|^2
    rng = np.random.default_rng(3)
    c = 2.0
    for _ in range(200):
        m = int(rng.integers(2, 5))
        mu = np.sort(rng.uniform(-c, c, m))
        sym = build_symmetriser(mu)
        import math
        w_bound = max(math.comb(m - 1, k) * c ** (m - 1 - k)
                      for k in range(m))
        assert np.max(np.abs(sym.matrix)) <= m * w_bound ** 2 + 1e-12


def test_lower_bound_chain():
    rng = np.random.default_rng(4)
    for _ in range(100):
        m = int(rng.integers(2, 5))
        mu = np.sort(rng.uniform(-2.0, 2.0, m))
        for i in range(1, m):
            mu[i] = max(mu[i], mu[i - 1] + 0.1)
        sym = build_symmetriser(mu)
        eig = np.linalg.eigvalsh(sym.matrix)
        floor = sym.det_value / eig[-1] ** (m - 1)
        assert eig[0] >= floor - 1e-10 * eig[-1]
        assert sym.det_value >= 0.1 ** (m * m - m) * (1.0 - 1e-12)


@given(st.integers(min_value=2, max_value=4), st.integers(min_value=0))
@settings(max_examples=40, deadline=None)
def test_intertwining_random_roots(m, seed):
    rng = np.random.default_rng(seed)
    mu = np.sort(rng.uniform(-3.0, 3.0, m))
    sym = build_symmetriser(mu)
    a = normalised_companion(mu)
    residual = np.linalg.norm(sym.matrix @ a - a.T @ sym.matrix, 2)
    scale = np.linalg.norm(sym.matrix, 2) * np.linalg.norm(a, 2)
    assert residual <= 1e-10 * max(scale, 1e-300)
