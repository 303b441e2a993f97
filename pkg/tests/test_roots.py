import numpy as np
import pytest

from weakhyp.errors import InsufficientDataError, InvalidParameterError
from weakhyp.mollifiers import friedrichs_mollifier
from weakhyp.profiles import heaviside_profile, hoelder_profile
from weakhyp.roots import (ModeratenessSample, RootFamily, bracket,
                           certify_moderateness, constant_roots,
                           constant_scale, linear_scale, logarithmic_scale,
                           regularise_roots, roots_from_linear_forms,
                           transport_roots, wave_speed_roots)
from weakhyp.profiles import piecewise_constant_profile


@pytest.fixture(scope="module")
def phi():
    return friedrichs_mollifier()


def test_constant_roots_regularised_values(phi):
    reg = regularise_roots(constant_roots([-1.0, 1.0]), phi, linear_scale())
    xi, eps = 3.0, 0.25
    w = reg.omega_of(eps)
    br = float(bracket(np.array(xi)))
    assert abs(float(reg.value(1, 0.5, xi, eps)) - (-xi + w * br)) < 1e-12
    assert abs(float(reg.value(2, 0.5, xi, eps)) - (xi + 2 * w * br)) < 1e-12


def test_double_root_spacing_is_exact(phi):
    reg = regularise_roots(constant_roots([0.0, 0.0]), phi, linear_scale())
    xi, eps = 5.0, 0.125
    gap = float(reg.value(2, 0.4, xi, eps) - reg.value(1, 0.4, xi, eps))
    assert gap == pytest.approx(reg.omega_of(eps) * float(bracket(np.array(xi))),
                                rel=1e-14)


def test_heaviside_roots_smooth_and_separated(phi):
    speed = heaviside_profile(0.5, 1.0, 4.0, (0.0, 1.0))
    reg = regularise_roots(wave_speed_roots(speed), phi, constant_scale(0.1))
    t = np.linspace(0.0, 1.0, 101)
    for xi in (1.0, 10.0):
        lam1 = np.asarray(reg.value(1, t, xi, 0.5), dtype=float)
        lam2 = np.asarray(reg.value(2, t, xi, 0.5), dtype=float)
        gap = lam2 - lam1
        assert np.min(gap) >= 0.1 * float(bracket(np.array(xi))) - 1e-10
        # smooth: second difference bounded by the mollification scale
        d2 = np.diff(lam2, 2)
        assert np.all(np.isfinite(d2))


def test_unordered_family_rejected(phi):
    fam = constant_roots([1.0, -1.0])
    assert not fam.ordered
    with pytest.raises(InvalidParameterError):
        regularise_roots(fam, phi, linear_scale())


def test_transport_roots_are_odd():
    fam = transport_roots(2.0)
    assert float(fam.evaluate(1, 0.5, 3.0)) == pytest.approx(6.0)
    assert float(fam.evaluate(1, 0.5, -3.0)) == pytest.approx(-6.0)


def test_homogeneity_of_pure_part(phi):
    speed = heaviside_profile(0.5, 1.0, 4.0, (0.0, 1.0))
    reg = regularise_roots(wave_speed_roots(speed), phi, linear_scale())
    lam2 = float(reg.pure_value(2, 0.3, 2.0, 0.25))
    lam6 = float(reg.pure_value(2, 0.3, 6.0, 0.25))
    assert lam6 == pytest.approx(3.0 * lam2, rel=1e-13)


def test_linf_convergence_continuous_profiles(phi):
    a = hoelder_profile(0.5, 0.5, 1.0, 1.0, (0.0, 1.0))
    fam = wave_speed_roots(a)
    reg = regularise_roots(fam, phi, linear_scale())
    t = np.linspace(0.0, 1.0, 201)
    target = fam.evaluate(2, t, 4.0)
    sups = []
    for eps in (0.2, 0.1, 0.05):
        vals = np.asarray(reg.pure_value(2, t, 4.0, eps), dtype=float)
        sups.append(float(np.max(np.abs(vals - target))))
    assert sups[0] > sups[1] > sups[2]


def test_moderateness_constant_roots_slope_zero(phi):
    reg = regularise_roots(constant_roots([-1.0, 1.0]), phi, linear_scale())
    fits = certify_moderateness(
        reg, 1, ModeratenessSample(epsilons=(0.25, 0.125, 0.0625), xi=8.0))
    for fit in fits:
        assert abs(fit.n_fitted) <= 0.2


def test_moderateness_heaviside_exponents(phi):
    speed = heaviside_profile(0.5, 1.0, 4.0, (0.0, 1.0))
    reg = regularise_roots(wave_speed_roots(speed), phi, linear_scale())
    sample = ModeratenessSample(epsilons=(0.25, 0.125, 0.0625, 0.03125),
                                xi=8.0)
    fits = {(f.j, f.k): f for f in certify_moderateness(reg, 2, sample)}
    for j in (1, 2):
        assert fits[(j, 1)].n_fitted == pytest.approx(1.0, abs=0.2)
        assert fits[(j, 2)].n_fitted == pytest.approx(2.0, abs=0.3)


def test_moderateness_guards(phi):
    reg = regularise_roots(constant_roots([0.0]), phi, linear_scale())
    with pytest.raises(InvalidParameterError):
        certify_moderateness(reg, 5, ModeratenessSample((0.5, 0.25, 0.125)))
    with pytest.raises(InsufficientDataError):
        certify_moderateness(reg, 1, ModeratenessSample((0.5, 0.25)))


def test_scale_validation():
    with pytest.raises(InvalidParameterError):
        linear_scale(0.0)
    with pytest.raises(InvalidParameterError):
        constant_scale(1.5)
    scale = linear_scale()
    with pytest.raises(InvalidParameterError):
        scale(0.0)
    with pytest.raises(InvalidParameterError):
        scale(2.0)
    log = logarithmic_scale(1, 2)
    assert 0.0 < log(2.0 ** -9) < log(2.0 ** -3) < 1.0


def test_linear_form_family_ordered_on_positive_orthant():
    profiles = [[piecewise_constant_profile([0.0, 0.5, 1.0], [1.0, 1.2],
                                            (0.0, 1.0)),
                 piecewise_constant_profile([0.0, 1.0], [1.1], (0.0, 1.0))],
                [piecewise_constant_profile([0.0, 1.0], [2.0], (0.0, 1.0)),
                 piecewise_constant_profile([0.0, 1.0], [2.3], (0.0, 1.0))]]
    fam = roots_from_linear_forms(profiles)
    t = np.linspace(0.0, 1.0, 33)
    for d in ((1.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 2.0)):
        gap = fam.check_ordered(t, [d])
        assert gap > 0.0
