import numpy as np
import pytest
from hypothesis import given, strategies as st

from fqm.core import (FqmParams, GridMismatchError, Potential, WaveFunction, fft_forward,
                      fft_inverse, gaussian, inner_product, make_grid, plane_wave, to_momentum,
                      to_position)


def test_params_domain():
    FqmParams(2.0)
    for bad in (1.0, 0.5, 2.01):
        with pytest.raises(ValueError):
            FqmParams(bad)
    with pytest.raises(ValueError):
        FqmParams(1.5, d_alpha=0.0)
    with pytest.raises(ValueError):
        FqmParams(1.5, hbar=-1.0)
    assert FqmParams.standard(mass=2.0).d_alpha == 0.25
    with pytest.raises(ValueError):
        FqmParams(1.5).mass


def test_grid_samples():
    g = make_grid(8, 8.0)
    assert np.array_equal(g.x, np.arange(-4.0, 4.0))
    assert np.allclose(g.p(), 2 * np.pi / 8 * np.arange(-4, 4))
    g = make_grid(1024, 40.0)
    assert g.dx == pytest.approx(40 / 1024)
    assert g.p_nyquist() == pytest.approx(np.pi * 1024 / 40)
    with pytest.raises(ValueError):
        make_grid(7, 8.0)


def test_gaussian_transform_width():
    # |phi(p)| of a Gaussian with sigma is a Gaussian with hbar/sigma (analytic Fourier pair)
    g = make_grid(512, 40.0)
    sigma, hbar = 1.3, 0.7
    psi = gaussian(g, 0.0, sigma, hbar=hbar)
    phi = to_momentum(psi).values
    p = g.p(hbar)
    expected = (2 * np.pi * hbar**2 / (np.pi * (hbar / sigma) ** 2 / 2)) ** 0.25 * \
        np.sqrt(1.0) * np.exp(-(p * sigma / hbar) ** 2 / 2)
    # normalization: int |phi|^2 dp / (2 pi hbar) = 1
    expected *= np.sqrt(1 / (np.sum(expected**2) * g.dp(hbar) / (2 * np.pi * hbar)))
    assert np.max(np.abs(np.abs(phi) - expected)) < 1e-10


def test_plane_wave_single_mode():
    g = make_grid(64, 10.0)
    pw = plane_wave(g, 5, 1 / np.sqrt(g.length))
    phi = np.abs(to_momentum(pw).values)
    k = np.argmax(phi)
    assert g.p()[k] == pytest.approx(g.dp() * 5)
    assert np.max(np.delete(phi, k)) < 1e-12 * phi[k]


@given(st.integers(0, 2**31 - 1), st.sampled_from([0.5, 1.0, 2.0]))
def test_roundtrip_and_parseval(seed, hbar):
    g = make_grid(128, 12.0, x_center=0.3)
    rng = np.random.default_rng(seed)
    psi = WaveFunction(rng.standard_normal(128) + 1j * rng.standard_normal(128), g)
    back = to_position(to_momentum(psi)).values
    assert np.max(np.abs(back - psi.values)) < 1e-12 * np.max(np.abs(psi.values))
    phi = fft_forward(psi.values, g)
    lhs = np.sum(np.abs(psi.values) ** 2) * g.dx
    rhs = np.sum(np.abs(phi) ** 2) * g.dp(hbar) / (2 * np.pi * hbar)
    assert rhs == pytest.approx(lhs, rel=1e-12)


def test_fft_axis():
    g = make_grid(32, 5.0)
    a = np.random.default_rng(1).standard_normal((32, 3))
    cols = np.stack([fft_forward(a[:, i], g) for i in range(3)], axis=1)
    assert np.allclose(fft_forward(a, g, axis=0), cols)
    assert np.allclose(fft_inverse(fft_forward(a, g, axis=0), g, axis=0), a)


@given(st.integers(0, 10**6))
def test_inner_product_hermitian(seed):
    g = make_grid(64, 8.0)
    rng = np.random.default_rng(seed)
    a = WaveFunction(rng.standard_normal(64) + 1j * rng.standard_normal(64), g)
    b = WaveFunction(rng.standard_normal(64) + 1j * rng.standard_normal(64), g)
    assert inner_product(a, b) == pytest.approx(np.conj(inner_product(b, a)), rel=1e-12)
    # same value in either representation; mixing them is an error
    assert inner_product(to_momentum(a), to_momentum(b)) == pytest.approx(inner_product(a, b),
                                                                         rel=1e-12)
    with pytest.raises(ValueError):
        inner_product(to_momentum(a), b)


def test_inner_product_normalization_and_mismatch():
    g = make_grid(256, 20.0)
    psi = gaussian(g, 0.0, 1.0, momentum=2.0)
    assert inner_product(psi, psi).real == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(GridMismatchError):
        inner_product(psi, gaussian(make_grid(128, 20.0)))


def test_well_eigenfunctions_orthogonal():
    from fqm.spectra import infinite_well_eigenfunction
    g = make_grid(2048, 2.0)   # grid exactly covers [-a, a] with a = 1
    phis = [infinite_well_eigenfunction(n, 1.0, g) for n in range(1, 5)]
    for m in range(4):
        for n in range(m + 1, 4):
            assert abs(inner_product(phis[m], phis[n])) < 1e-10


def test_potential_validation_and_sampling():
    g = make_grid(64, 8.0)
    with pytest.raises(ValueError):
        Potential("nope")
    with pytest.raises(ValueError):
        Potential("infinite_well", a=-1)
    with pytest.raises(ValueError):
        Potential("tabulated")
    well = Potential("infinite_well", a=1.0).on_grid(g)
    assert set(np.unique(well)) == {0.0, 1e6}
    delta = Potential("delta_well", gamma=2.0).on_grid(g)
    assert np.sum(delta) * g.dx == pytest.approx(-2.0, rel=1e-7)  # width-dx Gaussian, Riemann sum
    h = Potential.harmonic(0.5)
    assert np.allclose(h.on_grid(g), 0.5 * g.x**2)
    with pytest.raises(GridMismatchError):
        Potential("tabulated", table=np.zeros(10)).on_grid(g)
    assert not Potential("tabulated", table=1j * np.ones(64)).is_real
