import numpy as np
import pytest

from weakhyp.errors import (ConfigurationError, HyperbolicityError,
                            InvalidParameterError, UnsupportedError)
from weakhyp.mollifiers import friedrichs_mollifier
from weakhyp.recovery import recover_coefficients
from weakhyp.reduction import (FirstOrderSystem, ForcingPart, InitialData,
                               LowerOrderPart, LowerTerm, PolynomialPrincipal,
                               RootValuePrincipal, build_companion,
                               cofactor_matrix,
                               companion_matrix_from_coefficients,
                               random_hyperbolic_system, to_block_sylvester)
from weakhyp.roots import (constant_roots, constant_scale, linear_scale,
                           regularise_roots, wave_speed_roots)
from weakhyp.profiles import heaviside_profile


@pytest.fixture(scope="module")
def phi():
    return friedrichs_mollifier()


def _wave_system(ghat0=None, ghat1=None):
    principal = PolynomialPrincipal(
        order=2, coefficients={1: lambda t: np.zeros(np.shape(t)),
                               2: lambda t: np.ones(np.shape(t))})
    data = None
    if ghat0 is not None:
        data = InitialData((ghat0, ghat1))
    return build_companion(principal, data=data)


def test_companion_wave_structure_and_eigenvalues():
    system = _wave_system()
    xi = 3.0
    br = np.sqrt(1.0 + xi * xi)
    a = system.A(0.2, xi)
    assert a[0, 1] == pytest.approx(br)
    assert a[0, 0] == 0.0 and a[1, 1] == 0.0
    assert a[1, 0] == pytest.approx(xi * xi / br)
    eig = np.sort(np.linalg.eigvals(a).real)
    assert np.allclose(eig, [-xi, xi], atol=1e-12)


def test_companion_sparsity_pattern():
    principal = PolynomialPrincipal(
        order=4,
        coefficients={d: (lambda t: np.ones(np.shape(t))) for d in range(1, 5)})
    system = build_companion(principal)
    a = system.A(0.0, 2.0)
    br = np.sqrt(5.0)
    for i in range(3):
        assert a[i, i + 1] == pytest.approx(br)
        for j in range(4):
            if j != i + 1:
                assert a[i, j] == 0.0


def test_transport_companion_is_scalar_symbol():
    principal = PolynomialPrincipal(
        order=1, coefficients={1: lambda t: 2.0 * np.ones(np.shape(t))})
    system = build_companion(principal)
    assert system.A(0.0, 3.0)[0, 0] == pytest.approx(6.0)


def test_zero_data_and_forcing_vanish():
    system = _wave_system(lambda xi: np.zeros_like(xi, dtype=complex),
                          lambda xi: np.zeros_like(xi, dtype=complex))
    xi = np.linspace(-5.0, 5.0, 11)
    assert np.all(system.V0(xi) == 0.0)
    assert np.all(system.F(0.3, xi) == 0.0)


def test_missing_degree_raises_configuration_error():
    with pytest.raises(ConfigurationError):
        PolynomialPrincipal(order=2,
                            coefficients={2: lambda t: np.ones(np.shape(t))})


def test_data_length_validated():
    principal = PolynomialPrincipal(
        order=2, coefficients={1: lambda t: np.zeros(np.shape(t)),
                               2: lambda t: np.ones(np.shape(t))})
    with pytest.raises(ConfigurationError):
        build_companion(principal,
                        data=InitialData((lambda xi: np.ones_like(xi),)))


def test_lower_order_block_only_last_row():
    lower = LowerOrderPart(order=2, terms=(
        LowerTerm(0, 2, lambda t: 1.5 * np.ones(np.shape(t))),))
    principal = PolynomialPrincipal(
        order=2, coefficients={1: lambda t: np.zeros(np.shape(t)),
                               2: lambda t: np.ones(np.shape(t))})
    system = build_companion(principal, lower=lower)
    b = system.B(0.1, 2.0)
    assert np.all(b[0, :] == 0.0)
    br = np.sqrt(5.0)
    # nu=0, j=2 lands in column k = m - j + 1 = 1 with weight <xi>^(k-m)
    assert b[1, 0] == pytest.approx(1.5 / br)
    assert b[1, 1] == 0.0


def test_root_value_principal_matches_regularised_roots(phi):
    speed = heaviside_profile(0.5, 1.0, 4.0, (0.0, 1.0))
    reg = regularise_roots(wave_speed_roots(speed), phi, constant_scale(0.1))
    principal = RootValuePrincipal(reg, epsilon=0.5)
    system = build_companion(principal)
    for t in (0.2, 0.5, 0.9):
        for xi in (1.0, -4.0, 16.0):
            eig = system.eigenvalues(t, xi)
            expected = np.sort([float(reg.value(j, t, xi, 0.5))
                                for j in (1, 2)])
            scale = max(1.0, float(np.max(np.abs(expected))))
            assert np.max(np.abs(eig - expected)) / scale <= 1e-9


def test_polynomial_principal_matches_recovered_sets(phi):
    reg = regularise_roots(constant_roots([-1.0, 1.0]), phi,
                           constant_scale(1e-9))
    sets = {j: recover_coefficients(reg, j, 1, epsilon=0.5) for j in (1, 2)}
    principal = PolynomialPrincipal.from_coefficient_sets(sets)
    system = build_companion(principal)
    eig = system.eigenvalues(0.4, 5.0)
    assert np.allclose(eig, [-5.0, 5.0], atol=1e-7)


# -- companion matrix helper -----------------------------------------------------


def test_companion_matrix_from_coefficients():
    mat = companion_matrix_from_coefficients([1.0, -6.0, 11.0, -6.0])
    eig = np.sort(np.linalg.eigvals(mat).real)
    assert np.allclose(eig, [1.0, 2.0, 3.0], atol=1e-10)
    with pytest.raises(InvalidParameterError):
        companion_matrix_from_coefficients([2.0, 1.0])


# -- adjugate matrices --------------------------------------------------------------


def test_cofactor_one_by_one():
    poly = cofactor_matrix(lambda t, xi: np.array([[2.0 * xi]]), 1)
    coeffs = poly.coefficients(0.0, 3.0)
    assert coeffs[0, 0, 0] == pytest.approx(1.0)
    delta = poly.delta_coefficients(0.0, 3.0)
    assert np.allclose(delta.real, [1.0, -6.0])
    assert poly.verify(0.0, 3.0) <= 1e-12


def test_cofactor_two_by_two_adjugate():
    # A = [[0, xi], [xi, 0]]: adj(tau I - A) = [[tau, xi], [xi, tau]]
    poly = cofactor_matrix(
        lambda t, xi: np.array([[0.0, xi], [xi, 0.0]]), 2)
    xi = 2.5
    coeffs = poly.coefficients(0.0, xi)
    assert np.allclose(coeffs[..., 1].real, np.eye(2))
    assert np.allclose(coeffs[..., 0].real, [[0.0, xi], [xi, 0.0]])
    delta = poly.delta_coefficients(0.0, xi)
    assert np.allclose(delta.real, [1.0, 0.0, -xi * xi])
    assert poly.verify(0.0, xi) <= 1e-12


def test_cofactor_random_three_by_three_identity():
    rng = np.random.default_rng(5)
    system = random_hyperbolic_system(rng, 3)
    poly = cofactor_matrix(system.a_symbol, 3)
    assert poly.verify(0.3, 2.0) <= 1e-9


def test_cofactor_caps_order():
    with pytest.raises(UnsupportedError):
        cofactor_matrix(lambda t, xi: np.eye(5), 5)


# -- block reduction ----------------------------------------------------------------


def test_block_reduction_one_by_one_is_identity():
    b0 = np.array([[0.5 + 0.0j]])
    system = FirstOrderSystem(order=1, a1=lambda t: np.array([[2.0]]),
                              b=lambda t: b0)
    block_form = to_block_sylvester(system)
    xi = 3.0
    assert block_form.block(0.2, xi)[0, 0] == pytest.approx(2.0 * xi)
    assert block_form.lower_matrix(0.2, xi)[0, 0] == pytest.approx(-0.5)


def test_block_reduction_constant_two_by_two_eigenvalues():
    basis = np.array([[1.0, 1.0], [0.0, 1.0]])
    a1 = basis @ np.diag([-1.0, 2.0]) @ np.linalg.inv(basis)
    system = FirstOrderSystem(order=2, a1=lambda t: a1)
    block_form = to_block_sylvester(system)
    xi = 4.0
    eig = block_form.block_eigenvalues(0.5, xi)
    assert np.allclose(eig, [-xi, 2.0 * xi], atol=1e-10)
    full = block_form.full_principal(0.5, xi)
    assert full.shape == (4, 4)
    assert np.allclose(full[:2, :2], full[2:, 2:])


def test_block_reduction_random_three_by_three_eigenvalues():
    rng = np.random.default_rng(13)
    system = random_hyperbolic_system(rng, 3)
    block_form = to_block_sylvester(system)
    for xi in (1.0, 5.0):
        eig = block_form.block_eigenvalues(0.3, xi)
        direct = np.sort(np.linalg.eigvals(system.a_symbol(0.3, xi)).real)
        scale = max(1.0, float(np.max(np.abs(direct))))
        assert np.max(np.abs(eig - direct)) / scale <= 1e-9


def test_block_reduction_rejects_non_real_spectrum():
    rotation = np.array([[0.0, -1.0], [1.0, 0.0]])
    system = FirstOrderSystem(order=2, a1=lambda t: rotation)
    with pytest.raises(HyperbolicityError):
        to_block_sylvester(system)


@pytest.mark.parametrize("size", [2, 3])
def test_block_lower_matrix_against_manufactured_solution(size):
    # time-dependent triangular A(t) and full B(t): the reduced scalar set
    # delta(D_t)u = sum_q W_q D_t^q u + L F must hold for any smooth u with
    # F defined as (D_t - A - B)u; this exercises every Leibniz term
    rng = np.random.default_rng(size)
    xi = 2.0
    t0 = 0.4
    # matrix polynomials in t: M(t) = M0 + M1 t + M2 t^2
    a_coeffs = [np.triu(rng.uniform(-0.5, 0.5, (size, size))) for _ in range(3)]
    a_coeffs[0] += np.diag(np.arange(size))  # separate the eigenvalues
    b_coeffs = [rng.uniform(-0.3, 0.3, (size, size)) for _ in range(3)]

    def mat(coeffs, t, derivative=0):
        if derivative == 0:
            return coeffs[0] + coeffs[1] * t + coeffs[2] * t * t
        if derivative == 1:
            return coeffs[1] + 2.0 * coeffs[2] * t
        if derivative == 2:
            return 2.0 * coeffs[2]
        return np.zeros_like(coeffs[0])

    alpha = rng.uniform(-0.5, 0.5, size) + 1j * rng.uniform(0.5, 1.5, size)

    def u_dt(q, t):
        return (-1j * alpha) ** q * np.exp(alpha * t)

    def f_dt(q, t):
        # D_t^q of F = D_t u - xi A(t) u - B(t) u, via Leibniz in d/dt
        import math as _math
        total = u_dt(q + 1, t)
        for i in range(q + 1):
            coeff = _math.comb(q, i) * (-1j) ** i
            du = u_dt(q - i, t)
            total = total - coeff * (xi * mat(a_coeffs, t, i)) @ du
            total = total - coeff * mat(b_coeffs, t, i) @ du
        return total

    system = FirstOrderSystem(order=size,
                              a1=lambda t: mat(a_coeffs, t),
                              b=lambda t: mat(b_coeffs, t))
    block_form = to_block_sylvester(system, fd_step=1e-3)
    delta = block_form.delta_coefficients(t0, xi)
    lhs = sum(delta[k] * u_dt(size - k, t0) for k in range(size + 1))
    weights = block_form._tau_weights(t0, xi)
    adjugate = cofactor_matrix(system.a_symbol, size).coefficients(t0, xi)
    rhs = np.zeros(size, dtype=complex)
    for q in range(size):
        rhs = rhs + weights[q] @ u_dt(q, t0)
        rhs = rhs + adjugate[..., q] @ f_dt(q, t0)
    scale = max(1.0, float(np.max(np.abs(lhs))))
    assert np.max(np.abs(lhs - rhs)) / scale <= 1e-8


def test_block_transformed_data_recursion():
    # m=2, A = diag(1, -1) xi, no lower terms, data ghat = (1, 1):
    # D_t u(0) = A u(0), so U0 = (<xi> g, (A g)_p) blockwise
    a1 = np.diag([1.0, -1.0])
    system = FirstOrderSystem(
        order=2, a1=lambda t: a1,
        data=(lambda xi: np.ones_like(xi, dtype=complex),
              lambda xi: np.ones_like(xi, dtype=complex)))
    block_form = to_block_sylvester(system)
    xi = 2.0
    br = np.sqrt(5.0)
    u0 = block_form.transformed_data(xi)
    assert u0[0] == pytest.approx(br)          # <xi> u_1(0)
    assert u0[1] == pytest.approx(xi)          # D_t u_1(0) = xi
    assert u0[2] == pytest.approx(br)
    assert u0[3] == pytest.approx(-xi)
