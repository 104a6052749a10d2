from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwtails.errors import MultipleZero, NegativeCoefficient, PoleOfG, ValidationError
from gwtails.pgf import (
    RationalPGF,
    aux_g0,
    aux_g1,
    eval_g,
    load_model,
    offspring_taylor,
    preimages,
    preimages_batch,
    q_zeros,
    validate,
)
from gwtails.presets import get_preset

from oracles import INVERSE, taylor_division


def ex(n):
    return get_preset(f"example{n}").model()


def test_example1_value_and_slope_at_one():
    v, d = eval_g(ex(1), 1.0)
    assert v == pytest.approx(1.0, abs=1e-15)
    assert d == pytest.approx(2.0, abs=1e-14)


def test_value_and_slope_at_zero(models):
    for m in models.values():
        v, d = eval_g(m, 0.0)
        assert v == 0
        assert d == pytest.approx(m.r, abs=1e-15)


def test_example2_r():
    assert eval_g(ex(2), 0.0)[1] == pytest.approx(4 / 9, abs=1e-15)


def test_derived_constants():
    m1, m2, m3 = ex(1), ex(2), ex(3)
    assert (m1.r, m1.E, m1.deg_gap) == (pytest.approx(1 / 3), pytest.approx(2.0), 1)
    assert (m2.r, m2.E, m2.deg_gap) == (pytest.approx(4 / 9), pytest.approx(1.75), 0)
    assert (m3.r, m3.E, m3.deg_gap) == (pytest.approx(1 / 3), pytest.approx(2.5), -1)


def test_g2_matches_finite_difference(models):
    for m in models.values():
        h = 1e-4
        fd = (eval_g(m, 1 + h)[0] - 2 * eval_g(m, 1.0)[0] + eval_g(m, 1 - h)[0]) / h**2
        assert m.g2 == pytest.approx(fd.real, rel=1e-6)


def test_eval_g_derivative_vs_finite_difference(models):
    z = np.array([0.3 + 0.2j, -1.5 + 0.7j, 4.0 - 2.0j])
    h = 1e-6
    for m in models.values():
        _, d = eval_g(m, z)
        fd = (eval_g(m, z + h)[0] - eval_g(m, z - h)[0]) / (2 * h)
        np.testing.assert_allclose(d, fd, rtol=1e-7)


def test_eval_g_pole():
    with pytest.raises(PoleOfG):
        eval_g(ex(1), 3.0)


def test_offspring_example1_first_three():
    np.testing.assert_allclose(offspring_taylor(ex(1), 3), [1 / 3, 4 / 9, 4 / 27], rtol=1e-15)


def test_offspring_example1_closed_form():
    p = offspring_taylor(ex(1), 40)
    k = np.arange(2, 41)
    np.testing.assert_allclose(p[1:], 4.0 * 3.0 ** -k, rtol=1e-13)
    assert p.sum() == pytest.approx(1.0, abs=1e-12)


def test_offspring_matches_exact_division(models):
    for m in models.values():
        exact = taylor_division([Fraction(x) for x in m.p_coeffs.tolist()],
                                [Fraction(x) for x in m.q_coeffs.tolist()], 25)
        np.testing.assert_allclose(offspring_taylor(m, 25), [float(x) for x in exact[1:]], rtol=1e-13)
        assert offspring_taylor(m, 1)[0] == pytest.approx(m.r)


def test_q_zeros():
    np.testing.assert_allclose(q_zeros(ex(1)), [3.0], atol=1e-13)
    np.testing.assert_allclose(q_zeros(ex(2)), [-3.0, 3.0], atol=1e-13)
    np.testing.assert_allclose(q_zeros(ex(3)), [2.0, 3.0], atol=1e-13)


def test_q_zeros_multiple():
    # Q = (2 - z)^2 has a double zero; G(1) = 1 still holds
    m = RationalPGF.from_coeffs([0, 1], [4, -4, 1], check=False)
    with pytest.raises(MultipleZero):
        q_zeros(m)


def test_q_zeros_against_numpy():
    m = RationalPGF.from_coeffs([0, 0.2, 0.1], [1.0, -0.5, 0.1, -0.3], check=False)
    ours = q_zeros(m)
    ref = np.roots(m.q_coeffs[::-1])
    ref = ref[np.lexsort((ref.imag, ref.real))]
    np.testing.assert_allclose(ours, ref, atol=1e-12)


@pytest.mark.parametrize("name", ["example1", "example2", "example3"])
def test_preimages_against_closed_form(name):
    m = get_preset(name).model()
    for z in [0.5, 2.0 + 1.0j, -7.0 + 0.3j, 40.0]:
        ours = np.sort_complex(preimages(m, z))
        ref = np.sort_complex(np.array(INVERSE[name](z)))
        np.testing.assert_allclose(ours, ref, rtol=1e-12, atol=1e-13)
        for w in ours:
            assert eval_g(m, w)[0] == pytest.approx(z, rel=1e-11, abs=1e-12)


def test_preimages_degree_drop():
    # example2: P - zQ has leading coefficient 4 + z, which vanishes at z = -4
    w, dropped = preimages(ex(2), -4.0, return_dropped=True)
    assert dropped == 1 and w.size == 1
    assert eval_g(ex(2), w[0])[0] == pytest.approx(-4.0)
    row = preimages_batch(ex(2), [-4.0, 1.0])
    assert np.isnan(row[0]).sum() == 1 and not np.isnan(row[1]).any()


def test_aux_remainders(models):
    z = np.array([0.2 + 0.1j, 1.3 - 0.4j, -0.7 + 1.1j])
    for m in models.values():
        g = eval_g(m, z)[0]
        np.testing.assert_allclose(aux_g1(m, z), (g - 1 - m.E * (z - 1)) / (z - 1) ** 2, rtol=1e-11)
        np.testing.assert_allclose(aux_g0(m, z), (g - m.r * z) / z**2, rtol=1e-11)
        assert aux_g1(m, 1.0) == pytest.approx(m.g2 / 2)


def test_validate_rejects_with_all_reasons():
    bad = RationalPGF.from_coeffs([0.1, 0.4, 0.5], [1, 0], check=False)
    rep = validate(bad)
    assert not rep["valid"]
    assert any("p_0" in v for v in rep["violations"])
    assert any("deg Q" in v for v in rep["violations"])
    with pytest.raises(ValidationError):
        RationalPGF.from_coeffs([0.1, 0.4, 0.5], [1, 0])


def test_validate_flags():
    # G(1) != 1
    rep = validate(RationalPGF.from_coeffs([0, 1, 1], [3, -0.5], check=False))
    assert any("G(1)" in v for v in rep["violations"])
    # example1 numerator and denominator both multiplied by (2 - z)
    shared = RationalPGF.from_coeffs([0, 2, 1, -1], [6, -5, 1], check=False)
    assert any("share" in v for v in validate(shared)["violations"])


def test_negative_taylor_coefficient():
    # p_2 < 0 although G(1) = 1
    m = RationalPGF.from_coeffs([0, 1.0, -2.0, 2.0], [1.0, 0.0, 0.0, 0.0, 1e-9], check=False)
    assert any("negative" in v for v in validate(m)["violations"])
    with pytest.raises(NegativeCoefficient):
        offspring_taylor(m, 5)


def test_load_model(tmp_path):
    f = tmp_path / "m.json"
    f.write_text('{"p": [0, 1, 1], "q": [3, -1]}')
    m = load_model(f)
    assert m.name == "m" and m.E == pytest.approx(2.0)
    assert m.model_hash() == ex(1).model_hash()


@st.composite
def ex1_family(draw):
    # G = (a z + b z^2) / (c - d z) with G(1) = 1: c = a + b + d
    a = draw(st.floats(0.2, 3.0))
    b = draw(st.floats(0.2, 3.0))
    d = draw(st.floats(0.05, 2.0))
    return RationalPGF.from_coeffs([0, a, b], [a + b + d, -d], check=False)


@settings(max_examples=60, deadline=None)
@given(ex1_family())
def test_family_constants_are_consistent(m):
    rep = validate(m)
    assert rep["valid"]
    h = 1e-6
    fd = (eval_g(m, 1 + h)[0] - eval_g(m, 1 - h)[0]) / (2 * h)
    assert m.E == pytest.approx(fd.real, rel=1e-7)
    p = offspring_taylor(m, 400)
    assert p[0] == pytest.approx(m.r)
    assert (p >= -1e-15).all()
    # mean of the offspring law is E
    assert np.dot(np.arange(1, 401), p) == pytest.approx(m.E, rel=1e-6)
