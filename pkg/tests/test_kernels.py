import numpy as np
import pytest

from gwtails import _pykernels, kernels
from gwtails.pgf import _polyder
from gwtails.presets import get_preset

from shared import NAMES

needs_c = pytest.mark.skipif("c" not in kernels.available_backends(), reason="compiled kernels not built")


@pytest.fixture(params=NAMES)
def model(request):
    return get_preset(request.param).model()


def both():
    return kernels.get_backend("c"), kernels.get_backend("python")


def test_mixer_matches_reference_splitmix64():
    # first two outputs of splitmix64 started from state 0
    s = np.array([1, 2], dtype=np.uint64) * _pykernels.GAMMA
    with np.errstate(over="ignore"):
        out = _pykernels._mix64(s)
    assert [int(v) for v in out] == [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4]


def test_uniforms_in_unit_interval():
    keys = _pykernels.path_keys(1, np.arange(1000))
    u = _pykernels.uniforms(np.repeat(keys, 50), np.tile(np.arange(50), 1000))
    assert u.min() >= 0.0 and u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.005


def test_backend_selection(monkeypatch):
    assert kernels.get_backend("python") is _pykernels
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")
    monkeypatch.setenv("GWTAILS_BACKEND", "python")
    assert kernels.get_backend() is _pykernels
    monkeypatch.setenv("GWTAILS_THREADS", "3")
    assert kernels.worker_count() == 3


def test_map_chunks_order_independent_of_workers():
    def f(lo, hi):
        return (np.arange(lo, hi) ** 2,)

    a = kernels.concat(kernels.map_chunks(f, 1000, chunk=7, workers=1))[0]
    b = kernels.concat(kernels.map_chunks(f, 1000, chunk=7, workers=4))[0]
    np.testing.assert_array_equal(a, np.arange(1000) ** 2)
    np.testing.assert_array_equal(a, b)


@needs_c
def test_pi_cascade_parity(model):
    c, py = both()
    z = np.ascontiguousarray(1j * np.linspace(0, 5e3, 3001) - 0.2)
    num, den = model.g1_num, model.g1_den
    skip = abs(num[0] / den[0]) + 1.0
    args = (num, den, _polyder(num), _polyder(den), model.E, 150, True, skip)
    rc, rp = c.pi_cascade(z, *args), py.pi_cascade(z, *args)
    for a, b in zip(rc[:2], rp[:2]):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-14)


@needs_c
def test_phi_iterate_parity(model):
    c, py = both()
    z = np.ascontiguousarray(0.5 * np.exp(1j * np.linspace(0, 6, 101)))
    args = (model.g0_num, model.g0_den, model.r, 600, 1e-15, 1e6)
    np.testing.assert_allclose(c.phi_iterate(z, *args)[0], py.phi_iterate(z, *args)[0], rtol=1e-13)


@needs_c
def test_julia_status_parity(model):
    c, py = both()
    rng = np.random.default_rng(2)
    z = np.ascontiguousarray(rng.uniform(-4, 4, 2000) + 1j * rng.uniform(-3, 3, 2000))
    args = (model.p_coeffs, model.q_coeffs, 300, 1e-3, 1e8)
    sc, tc = c.julia_status(z, *args)
    sp, tp = py.julia_status(z, *args)
    np.testing.assert_array_equal(sc, sp)
    np.testing.assert_array_equal(tc, tp)


@needs_c
def test_fourier_sum_parity():
    c, py = both()
    k = np.arange(20001)
    vals = np.ascontiguousarray(np.exp(-1j * 0.01 * k) / (1 + 0.01 * k))
    x = np.linspace(0.1, 3.0, 7)
    np.testing.assert_allclose(c.fourier_sum(vals, 0.01, x), py.fourier_sum(vals, 0.01, x), rtol=1e-11)


def test_fourier_sum_against_closed_form():
    # trapezoid of cos(k h x) over k = 0..n-1 with end weights 1/2
    n, h, x = 1001, 0.003, np.array([0.7, 2.0])
    vals = np.ones(n, dtype=complex)
    ref = [np.sum(np.cos(np.arange(n) * h * xi)) - 0.5 - 0.5 * np.cos((n - 1) * h * xi) for xi in x]
    for name in kernels.available_backends():
        np.testing.assert_allclose(kernels.get_backend(name).fourier_sum(vals, h, x), ref, rtol=1e-12)
