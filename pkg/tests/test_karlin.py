import math

import numpy as np
import pytest

from gwtails import dynamics, karlin
from gwtails.errors import StripViolation
from gwtails.presets import get_preset

NAMES = ["example1", "example2", "example3"]


@pytest.fixture(scope="module", params=NAMES)
def model(request):
    return get_preset(request.param).model()


def test_k_is_one_periodic_and_real(model):
    x = np.linspace(0, 1, 11)
    a = karlin.k_eval(model, z=x)
    b = karlin.k_eval(model, z=x + 1)
    np.testing.assert_allclose(a, b, rtol=1e-12)
    assert np.max(np.abs(a.imag)) <= 1e-13 * np.max(np.abs(a))


def test_plain_coefficients_conjugate_symmetric(model):
    c, _ = karlin.plain_coefficients(model, n_max=10, nodes=4096)
    np.testing.assert_allclose(c[:10][::-1], np.conj(c[11:]), atol=1e-15)


def test_fft_equals_trapezoid_sum(model):
    nodes = 512
    tab = karlin.theta_star(model, m_max=2, n_max=4, y_shift=1.0, nodes=nodes)
    x = np.arange(nodes) / nodes
    k = karlin.k_eval(model, z=x - 1.0j)
    for m in (1, 2):
        for n in range(5):
            ref = np.mean(k**m * np.exp(-2j * np.pi * n * x))
            assert tab.values[m, n] == pytest.approx(ref, rel=1e-12, abs=1e-15)


def test_shifted_line_matches_real_line(model):
    # K(x - iy) = sum theta_n e^(2 pi i n x) e^(2 pi n y): moving the line rescales the coefficients
    # theta_n on the real line falls to rounding noise by n = 2, so compare n = 0, 1
    y = 1.0
    plain, _ = karlin.plain_coefficients(model, n_max=1, nodes=1 << 14)
    tab = karlin.theta_star(model, m_max=1, n_max=1, y_shift=y, nodes=1 << 14)
    assert tab.values[1, 0] == pytest.approx(plain[1], rel=1e-13)
    assert tab.values[1, 1] == pytest.approx(plain[2] * math.exp(2 * math.pi * y), rel=1e-5)


def test_parseval(model):
    gap, lhs, _ = karlin.parseval_gap(model, n_max=40, nodes=1 << 14)
    assert gap <= 1e-8 * max(lhs, 1.0)


def test_coefficients_decay_exponentially(model):
    c, _ = karlin.plain_coefficients(model, n_max=40, nodes=1 << 14)
    rate = karlin.decay_rate(c[40:])
    assert rate > 0
    # decay width is set by the strip: at least pi/lnE-ish for these models
    assert rate > 2 * math.pi * karlin.strip_bounds(model, math.pi)[0] * 0.5


def test_strip_bounds_and_auto_shift(model):
    theta = dynamics.critical_angle_estimate(model).theta
    lo, hi = karlin.strip_bounds(model, theta)
    assert lo == pytest.approx(math.pi / (2 * math.log(model.E)))
    assert hi > lo
    y = karlin.auto_y_shift(model, theta)
    assert lo < y < hi


def test_auto_shift_requires_wide_angle(model):
    with pytest.raises(StripViolation):
        karlin.auto_y_shift(model, math.pi)


def test_k_off_strip_raises():
    m = get_preset("example1").model()
    with pytest.raises(StripViolation):
        karlin.k_eval(m, z=np.linspace(0, 1, 64) - 3.8j)


def test_theta_table_guards(model):
    with pytest.raises(ValueError):
        karlin.theta_star(model, m_max=1, n_max=10, nodes=32)
    with pytest.raises(ValueError):
        karlin.theta_star(model, m_max=1, n_max=1, y_shift=-1.0, nodes=64)


def test_theta_csv(tmp_path):
    m = get_preset("example3").model()
    tab = karlin.theta_star(m, m_max=2, n_max=3, y_shift=0.5, nodes=256)
    f = tmp_path / "t.csv"
    tab.to_csv(f, header=["hello"])
    lines = f.read_text().splitlines()
    assert lines[0] == "# hello" and lines[1] == "m,n,Re,Im,y_shift"
    assert len(lines) == 2 + 2 * 4
    m_, n_, re, im, y = lines[2 + 5].split(",")
    assert (int(m_), int(n_)) == (2, 1)
    assert complex(float(re), float(im)) == tab.values[2, 1]
