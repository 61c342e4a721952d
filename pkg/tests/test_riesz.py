import numpy as np
import pytest
from hypothesis import given, strategies as st

from fqm.core import FqmParams, Potential, WaveFunction, gaussian, inner_product, make_grid, plane_wave
from fqm.riesz import (apply_hamiltonian, apply_riesz, current_density, group_velocity,
                       hermiticity_defect, parity_classify, reflect)

ALPHAS = [1.2, 1.5, 1.8, 2.0]
alpha_st = st.floats(1.05, 2.0)


def _random_state(g, seed, smooth=True):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(g.n_points) + 1j * rng.standard_normal(g.n_points)
    if smooth:
        v = np.convolve(np.tile(v, 3), np.hanning(9), "same")[g.n_points:2 * g.n_points]
    return WaveFunction(v, g)


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("k", [-7, -1, 3, 12])
def test_plane_wave_eigenrelation(alpha, k):
    g = make_grid(64, 9.0)
    p = FqmParams(alpha, hbar=0.8)
    pw = plane_wave(g, k)
    out = apply_riesz(pw, p).values
    pk = g.dp(p.hbar) * k
    assert np.max(np.abs(out + abs(pk) ** alpha * pw.values)) < 1e-12 * max(1, abs(pk) ** alpha)
    h = apply_hamiltonian(pw, Potential(), FqmParams(alpha, 1.7, 0.8)).values
    assert np.allclose(h, 1.7 * abs(pk) ** alpha * pw.values, atol=1e-11)


def test_constant_is_annihilated():
    g = make_grid(64, 9.0)
    out = apply_riesz(WaveFunction(np.ones(64), g), FqmParams(1.5)).values
    assert np.max(np.abs(out)) < 1e-13


def test_alpha2_is_second_derivative():
    # hbar^2 psi'' against the central second difference; the FD error is O(dx^2)
    hbar = 0.9
    errs = []
    for n in (256, 512):
        g = make_grid(n, 30.0)
        psi = gaussian(g, 0.3, 1.2, hbar=hbar).values
        fd = (np.roll(psi, -1) - 2 * psi + np.roll(psi, 1)) / g.dx**2
        out = apply_riesz(WaveFunction(psi, g), FqmParams(2.0, hbar=hbar)).values
        errs.append(np.max(np.abs(out - hbar**2 * fd)))
    assert errs[1] < 0.3 * errs[0]
    assert errs[1] < 1e-3


def test_hamiltonian_alpha2_harmonic_matches_analytic():
    # Gaussian exp(-x^2/2): -D psi'' + q2 x^2 psi analytically
    g = make_grid(512, 30.0)
    d, q2 = 0.5, 0.7
    x = g.x
    psi = np.exp(-x**2 / 2)
    expected = -d * (x**2 - 1) * psi + q2 * x**2 * psi
    out = apply_hamiltonian(WaveFunction(psi, g), Potential.harmonic(q2), FqmParams(2.0, d)).values
    assert np.max(np.abs(out - expected)) < 1e-10


def test_hamiltonian_rejects_infinite_well():
    g = make_grid(64, 9.0)
    with pytest.raises(ValueError):
        apply_hamiltonian(gaussian(g), Potential("infinite_well"), FqmParams(1.5))


@given(st.integers(0, 10**6), alpha_st)
def test_expectation_real_and_positive(seed, alpha):
    g = make_grid(128, 16.0)
    psi = _random_state(g, seed)
    p = FqmParams(alpha)
    e = inner_product(psi, apply_hamiltonian(psi, Potential.harmonic(0.4), p))
    assert abs(e.imag) < 1e-12 * max(1.0, abs(e.real))
    kin = -inner_product(psi, apply_riesz(psi, p))
    assert kin.real >= -1e-12 * psi.norm2()


@given(st.integers(0, 10**6), alpha_st)
def test_reflection_commutes(seed, alpha):
    g = make_grid(128, 16.0, x_center=1.5)
    psi = _random_state(g, seed, smooth=False)
    p = FqmParams(alpha)
    a = reflect(apply_riesz(psi, p)).values
    b = apply_riesz(reflect(psi), p).values
    assert np.max(np.abs(a - b)) < 1e-12 * max(1.0, np.max(np.abs(a)))


@given(st.integers(0, 10**6), alpha_st, st.complex_numbers(max_magnitude=5, allow_nan=False,
                                                            allow_infinity=False))
def test_linearity(seed, alpha, c):
    g = make_grid(64, 8.0)
    a, b = _random_state(g, seed), _random_state(g, seed + 1)
    p = FqmParams(alpha)
    lhs = apply_riesz(a.with_values(a.values + c * b.values), p).values
    rhs = apply_riesz(a, p).values + c * apply_riesz(b, p).values
    assert np.allclose(lhs, rhs, atol=1e-10 * (1 + abs(c)) * np.max(np.abs(lhs) + 1))


@pytest.mark.parametrize("alpha", ALPHAS)
def test_hermiticity(alpha):
    g = make_grid(256, 20.0)
    assert hermiticity_defect(Potential(), FqmParams(alpha), g, trials=20) < 1e-12
    table = np.cos(g.x) + 0.1 * g.x**2
    assert hermiticity_defect(Potential("tabulated", table=table), FqmParams(alpha), g) < 1e-12


def test_complex_potential_is_flagged():
    g = make_grid(256, 20.0)
    v = Potential("tabulated", table=0.5j * np.ones(256))
    assert hermiticity_defect(v, FqmParams(1.5), g) > 0.1


@pytest.mark.parametrize("alpha", [1.3, 1.5, 2.0])
def test_unit_current(alpha):
    g = make_grid(256, 30.0)
    p = FqmParams(alpha, 0.8, 1.1)
    k = 6
    v = group_velocity(g.dp(p.hbar) * k, p)
    psi = plane_wave(g, k, np.sqrt(alpha / (2 * v)))
    assert np.max(np.abs(current_density(psi, p).j - 1.0)) < 1e-10


def test_real_state_has_no_current():
    g = make_grid(256, 30.0)
    j = current_density(gaussian(g, 0.5, 1.0), FqmParams(1.5)).j
    assert np.max(np.abs(j)) < 1e-14


def test_alpha2_current_textbook():
    # (hbar/m) Im(psi* psi') for a moving Gaussian, derivative taken analytically
    g = make_grid(512, 40.0)
    m, hbar, p0, s = 1.3, 0.9, 1.7, 1.1
    x = g.x
    psi = np.exp(-x**2 / (4 * s * s) + 1j * p0 * x / hbar)
    dpsi = (-x / (2 * s * s) + 1j * p0 / hbar) * psi
    expected = hbar / m * np.imag(np.conj(psi) * dpsi)
    j = current_density(WaveFunction(psi, g), FqmParams.standard(m, hbar)).j
    assert np.max(np.abs(j - expected)) < 1e-10


def test_group_velocity():
    assert group_velocity(4.0, FqmParams(1.5)) == pytest.approx(3.0)
    assert group_velocity(0.0, FqmParams(1.5)) == 0.0
    m = 2.5
    assert group_velocity(-1.3, FqmParams.standard(m)) == pytest.approx(-1.3 / m)
    assert np.allclose(group_velocity(np.array([-2.0, 2.0]), FqmParams(1.8)),
                       [-group_velocity(2.0, FqmParams(1.8)), group_velocity(2.0, FqmParams(1.8))])


def test_parity():
    g = make_grid(128, 8.0)
    c = WaveFunction(np.cos(np.pi * g.x / 4), g)
    s = WaveFunction(np.sin(np.pi * g.x / 4), g)
    assert parity_classify(c) == "even"
    assert parity_classify(s) == "odd"
    assert parity_classify(c.with_values(c.values + s.values)) == "mixed"
