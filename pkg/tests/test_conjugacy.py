import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwtails import kernels
from gwtails.conjugacy import (
    IterationConfig,
    auto_kappa_scale,
    phi_eval,
    phi_inverse_coeffs,
    phi_inverse_eval,
    pi_derivative,
    pi_eval,
    pi_eval_with_derivative,
    pi_inverse,
    principal_preimage,
)
from gwtails.errors import Divergence, PoleOfG
from gwtails.pgf import eval_g
from gwtails.presets import get_preset

from oracles import INVERSE, KAPPA, kappa_example1, kappa_sympy, pi_naive

NAMES = ["example1", "example2", "example3"]


@pytest.fixture(params=NAMES)
def model(request):
    return get_preset(request.param).model()


def test_normalisation(model):
    assert pi_eval(model, z=0.0) == 1
    assert pi_derivative(model, z=0.0) == pytest.approx(1.0, abs=1e-14)
    h = 1e-5
    d = (phi_eval(model, z=h) - phi_eval(model, z=-h)) / (2 * h)
    assert phi_eval(model, z=0.0) == 0
    assert d == pytest.approx(1.0, abs=1e-9)


def test_pi_matches_plain_composition(model):
    z = np.array([0.5j, -0.7 + 0.2j, 1.1j, -1.5, 40j, -25 + 3j])
    ref = np.array([pi_naive(model.p_coeffs, model.q_coeffs, model.E, zz) for zz in z])
    np.testing.assert_allclose(pi_eval(model, z=z), ref, rtol=1e-13, atol=1e-15)


def test_pi_derivative_finite_difference(model):
    z = np.array([3j, -2 + 1j, -0.5 - 4j])
    _, d = pi_eval_with_derivative(model, z=z)
    h = 1e-5
    fd = (pi_eval(model, z=z + h) - pi_eval(model, z=z - h)) / (2 * h)
    np.testing.assert_allclose(d, fd, rtol=1e-7)


def test_conjugate_symmetry(model):
    y = np.linspace(0.1, 300, 50)
    np.testing.assert_allclose(pi_eval(model, z=-1j * y), np.conj(pi_eval(model, z=1j * y)), rtol=1e-14)


def test_laplace_transform_on_negative_axis(model):
    # Pi(-s) = E exp(-s W) lies in (0, 1) and decreases for s > 0
    s = np.linspace(0.05, 20, 40)
    v = pi_eval(model, z=-s)
    assert np.all(np.abs(v.imag) < 1e-15)
    assert np.all((v.real > 0) & (v.real < 1)) and np.all(np.diff(v.real) < 0)


def test_converged_in_t_max(model):
    z = np.array([50j, -30 + 2j])
    a = pi_eval(model, IterationConfig(t_max=150), z)
    b = pi_eval(model, IterationConfig(t_max=300), z)
    np.testing.assert_allclose(a, b, rtol=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(NAMES), st.floats(-10, 0), st.floats(-10, 10))
def test_poincare_equation(name, x, y):
    m = get_preset(name).model()
    z = complex(x, y)
    lhs = eval_g(m, pi_eval(m, z=z))[0]
    assert abs(lhs - pi_eval(m, z=m.E * z)) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(NAMES), st.floats(0, 0.95), st.floats(0, 2 * np.pi))
def test_schroeder_equation(name, rho, ang):
    m = get_preset(name).model()
    z = rho * cmath.exp(1j * ang)
    assert abs(phi_eval(m, z=eval_g(m, z)[0]) - m.r * phi_eval(m, z=z)) <= 1e-12


def test_phi_divergence_outside_basin():
    m = get_preset("example1").model()
    with pytest.raises(Divergence):
        phi_eval(m, z=100.0)


def test_pi_blows_up_at_first_pole():
    m = get_preset("example1").model()
    omega = m.E * pi_inverse(m, w=3.0)
    assert omega.real > 0 and abs(omega.imag) < 1e-12
    # at a float pole the cascade either overflows to a huge value or lands on the pole of G
    try:
        assert abs(pi_eval(m, z=omega)) > 1e10
    except PoleOfG:
        pass
    h = 1e-6 * abs(omega)
    assert abs(pi_eval(m, z=omega + h)) < 1e8


def test_cascade_hitting_pole_of_g_raises():
    # with a single cascade step the value is G(1 + 4/2) = G(3), a pole of G
    m = get_preset("example1").model()
    with pytest.raises(PoleOfG):
        pi_eval(m, IterationConfig(t_max=1), 2.0 * 2.0)


@pytest.mark.parametrize("name", NAMES)
def test_principal_branch_matches_closed_form(name):
    m = get_preset(name).model()
    w = 1 + 0.4 * np.exp(1j * np.linspace(0, 2 * np.pi, 13))
    ours, _ = principal_preimage(m, w)
    ref = np.array([INVERSE[name](complex(x))[0] for x in w])
    np.testing.assert_allclose(ours, ref, rtol=1e-12)


def test_conjugate_tie_takes_upper_root():
    # example2 at w = -3: both preimages are equally far from the predictor
    m = get_preset("example2").model()
    ours, _ = principal_preimage(m, np.array([-3.0]))
    assert ours[0] == pytest.approx(complex(-2, 23**0.5), rel=1e-12)
    assert ours[0] == pytest.approx(INVERSE["example2"](-3.0 + 0j)[0], rel=1e-12)


def test_pi_inverse_roundtrip(model):
    w = np.array([1.2, 0.6 + 0.3j, 1.05 - 0.2j, 2.0 + 1.0j])
    u = pi_inverse(model, w=w)
    np.testing.assert_allclose(pi_eval(model, z=u), w, rtol=1e-12)


def test_pi_inverse_branch_identity(model):
    w = 1 + 0.3 * np.exp(1j * np.linspace(0.1, 6.0, 17))
    g0, _ = principal_preimage(model, w)
    np.testing.assert_allclose(model.E * pi_inverse(model, w=g0), pi_inverse(model, w=w), atol=1e-13)


def test_backends_agree(model):
    if "c" not in kernels.available_backends():
        pytest.skip("compiled kernels not built")
    z = 1j * np.linspace(0, 2e4, 2001) - 0.3
    a = pi_eval_with_derivative(model, IterationConfig(backend="c"), z)
    b = pi_eval_with_derivative(model, IterationConfig(backend="python"), z)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(a[1], b[1], rtol=1e-12, atol=1e-14)
    u = 0.4 * np.exp(1j * np.linspace(0, 6, 31))
    np.testing.assert_allclose(phi_eval(model, IterationConfig(backend="c"), u),
                               phi_eval(model, IterationConfig(backend="python"), u), rtol=1e-13)


@pytest.mark.parametrize("name", NAMES)
def test_kappa_against_exact_recursion(name):
    pr = get_preset(name)
    m = pr.model()
    a = Fraction(pr.kappa_scale)
    exact = KAPPA[name](30)
    tab = phi_inverse_coeffs(m, 30, float(a))
    for k in range(1, 31):
        ref = float(exact[k] * a**k)
        assert tab.scaled_coeffs[k] == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("name", NAMES)
def test_kappa_against_sympy(name):
    m = get_preset(name).model()
    ref = kappa_sympy(m.p_coeffs.tolist(), m.q_coeffs.tolist(), Fraction(m.r).limit_denominator(100), 6)
    tab = phi_inverse_coeffs(m, 6, 1.0)
    np.testing.assert_allclose(tab.scaled_coeffs[1:], [float(x) for x in ref[1:]], rtol=1e-13)


def test_example1_first_coefficients_exact():
    tab = phi_inverse_coeffs(get_preset("example1").model(), 3)
    assert tab.kappa(2) == pytest.approx(-2.0, rel=1e-15)
    assert tab.kappa(3) == pytest.approx(5.5, rel=1e-15)


def test_alternative_prefactor_variant_differs():
    # the variant with (3^(N-1) - 1)^-1 does not solve the defining equation
    lit = kappa_example1(4, literal=True)
    good = kappa_example1(4)
    assert lit[2] == Fraction(-2, 3) and good[2] == -2


def test_series_inverts_phi(model):
    a = auto_kappa_scale(model, 40)
    tab = phi_inverse_coeffs(model, 40, a)
    z = 0.05 * np.exp(1j * np.linspace(0, 6, 9))
    np.testing.assert_allclose(phi_inverse_eval(tab, phi_eval(model, z=z)), z, rtol=1e-12)


def test_auto_scale_tames_growth(model):
    a = auto_kappa_scale(model, 40)
    tab = phi_inverse_coeffs(model, 40, a)
    assert np.max(np.abs(tab.scaled_coeffs[1:])) <= 10.0
    raw = phi_inverse_coeffs(model, 40, 1.0)
    np.testing.assert_allclose(tab.scaled_coeffs, raw.scaled_coeffs * a ** np.arange(41), rtol=1e-12)


def test_config_validation():
    with pytest.raises(ValueError):
        IterationConfig(t_max=0)
    with pytest.raises(ValueError):
        phi_inverse_coeffs(get_preset("example1").model(), 0)
