import math

import mpmath as mp
import numpy as np
import pytest
from scipy.special import loggamma

from gwtails import left_tail as lt
from gwtails.errors import HypothesisViolation, NonConvergence
from gwtails.pgf import RationalPGF
from gwtails.presets import get_preset

from shared import fourier_samples_for

NAMES = ["example1", "example2", "example3"]


def cheap_config(pr):
    return lt.LeftTailConfig(20, 40, pr.y_shift, pr.kappa_scale, nodes=1 << 16)


@pytest.fixture(scope="module", params=NAMES)
def setup(request):
    pr = get_preset(request.param)
    m = pr.model()
    return pr, m, lt.build_tables(m, lcfg=cheap_config(pr))


def test_exponents():
    a, b = lt.exponents(get_preset("example1").model())
    assert b == pytest.approx(math.log(3) / math.log(2))
    assert a == pytest.approx(b - 1)
    a3, b3 = lt.exponents(get_preset("example3").model())
    assert b3 == pytest.approx(math.log(3) / math.log(2.5))


def test_scipy_loggamma_against_mpmath():
    z = np.array([0.3 + 40j, 12.7 - 300j, 45.0 + 1e3j])
    for v, ref in zip(loggamma(z), (mp.loggamma(mp.mpc(x)) for x in z)):
        assert abs(v - complex(ref)) <= 1e-11 * max(1.0, abs(complex(ref)))


def test_term_ratio_against_high_precision(setup):
    pr, m, tabs = setup
    lnE = mp.log(mp.mpf(m.E))
    beta = -mp.log(mp.mpf(m.r)) / lnE
    a = mp.mpf(tabs.kappa.a)
    y = mp.mpf(tabs.theta.y_shift)
    with mp.workdps(30):
        for mm, n in [(1, 0), (3, 5), (10, 25), (20, 40), (7, -12)]:
            kap = mp.mpf(float(tabs.kappa.scaled_coeffs[mm])) / a**mm
            tv = tabs.theta.values[mm, abs(n)]
            tv = mp.mpc(tv.real, tv.imag if n >= 0 else -tv.imag)
            theta = tv * mp.exp(-2 * mp.pi * abs(n) * y)
            ref = kap * theta / mp.gamma(mm * beta - 2j * mp.pi * n / lnE)
            got = lt.term_log_ratio(m, tabs.kappa, tabs.theta, mm, n)
            # compare exp of both sides: the log branch of the oracle is arbitrary
            assert abs(complex(mp.exp(mp.mpc(got.real, got.imag)) / ref) - 1) <= 1e-9


def test_matches_fourier_integral(setup):
    pr, m, tabs = setup
    x = np.array([0.2, 0.5, 1.0, 2.0])
    res = lt.density_left(m, tabs, x, strict=False)
    ref = fourier_samples_for(pr.name).density(x)
    np.testing.assert_allclose(res.density, ref, atol=5e-4)


def test_leading_term_dominates_near_zero(setup):
    _, m, tabs = setup
    x = np.array([1e-4, 1e-3])
    res = lt.density_left(m, tabs, x, strict=False)
    assert np.all(res.density > 0)
    rel = res.term_magnitudes[1:].sum(axis=0) / res.term_magnitudes[0]
    assert np.all(rel < 1e-2)


def test_terms_shrink_with_m(setup):
    _, m, tabs = setup
    res = lt.density_left(m, tabs, [0.3], strict=False)
    mags = res.term_magnitudes[:, 0]
    assert mags[-1] < 1e-6 * mags[0]


def test_strict_mode_flags_too_few_terms(setup):
    _, m, tabs = setup
    with pytest.raises(NonConvergence):
        lt.density_left(m, tabs, [3.0], M_terms=2, strict=True)


def test_v_m_sign_and_log(setup):
    _, m, tabs = setup
    x = np.array([0.1, 0.7])
    s, lv = lt.v_m(m, tabs, 1, x)
    L, S = lt._harmonic_sum(m, tabs, 1, np.log(x))
    np.testing.assert_allclose(s * np.exp(lv), np.exp(L) * S, rtol=1e-13)


def test_hypothesis_violation():
    # r E > 1: the left-tail exponent would be negative
    m = RationalPGF.from_coeffs([0, 0.9, 0, 0, 0, 0, 0, 0, 0.1], [1.1, -0.1])
    with pytest.raises(HypothesisViolation):
        lt.build_tables(m, lcfg=lt.LeftTailConfig(4, 4, 0.0, None, nodes=64))


def test_rejects_nonpositive_x(setup):
    _, m, tabs = setup
    with pytest.raises(ValueError):
        lt.density_left(m, tabs, [0.0, 1.0])
