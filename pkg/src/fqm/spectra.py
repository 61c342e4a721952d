"""Closed-form and quantization-condition spectra of the solvable models.

Each model reduces to its textbook counterpart at alpha = 2 with D = 1/(2m).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import mpmath as mp
import numpy as np
from scipy import integrate, optimize

from . import foxh
from .core import FqmParams, Grid1D, WaveFunction

CLOSED_FORM = "closed_form"
ROOT_FINDING = "root_finding"
NUMERICAL = "numerical"


@dataclass(frozen=True)
class Spectrum:
    """Ordered (n, E_n) pairs with the model label and how they were obtained."""

    levels: tuple
    model: str
    method: str = CLOSED_FORM
    params_used: dict = field(default_factory=dict)

    def __post_init__(self):
        levels = tuple((int(n), float(e)) for n, e in self.levels)
        object.__setattr__(self, "levels", levels)
        e = np.array([lv[1] for lv in levels])
        # numerical spectra may carry degenerate levels
        ok = np.diff(e) >= 0 if self.method == NUMERICAL else np.diff(e) > 0
        if e.size > 1 and not np.all(ok):
            raise ValueError(f"{self.model}: energies are not increasing")

    @property
    def energies(self) -> np.ndarray:
        return np.array([e for _, e in self.levels])

    @property
    def quantum_numbers(self) -> list:
        return [n for n, _ in self.levels]

    def energy(self, n: int) -> float:
        for k, e in self.levels:
            if k == n:
                return e
        raise KeyError(n)

    def to_dict(self) -> dict:
        return {"model": self.model, "method": self.method, "params": self.params_used,
                "levels": [{"n": n, "energy": e} for n, e in self.levels]}


def _pdict(params: FqmParams, **extra) -> dict:
    d = {"alpha": params.alpha, "d_alpha": params.d_alpha, "hbar": params.hbar}
    d.update(extra)
    return d


# ------------------------------------------------------------- infinite well

def infinite_well_levels(a: float, n_max: int, params: FqmParams) -> Spectrum:
    """E_n = D (n pi hbar / 2a)^alpha, n = 1..n_max, for the well |x| < a.

    Odd n come from the even branch k = (2m+1) pi / 2a and even n from the
    odd branch k = m pi / a.  The tempting all-n form D (pi hbar / a)^alpha n^alpha
    is off by 2^alpha; this one agrees with the ground state and with alpha = 2.
    """
    if not a > 0:
        raise ValueError("a must be positive")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    n = np.arange(1, n_max + 1)
    e = params.d_alpha * (n * math.pi * params.hbar / (2 * a)) ** params.alpha
    return Spectrum(tuple(zip(n, e)), "infinite_well", CLOSED_FORM, _pdict(params, a=a))


def infinite_well_eigenfunction(n: int, a: float, grid: Grid1D) -> WaveFunction:
    """cos(n pi x / 2a)/sqrt(a) for odd n, sin(n pi x / 2a)/sqrt(a) for even n, 0 outside."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lo = grid.x_center - grid.length / 2
    hi = grid.x_center + grid.length / 2
    if lo > -a or hi < a:
        raise ValueError(f"grid [{lo:g}, {hi:g}) does not cover the well [-{a:g}, {a:g}]")
    x = grid.x
    k = n * math.pi / (2 * a)
    f = np.cos(k * x) if n % 2 else np.sin(k * x)
    vals = np.where(np.abs(x) < a, f / math.sqrt(a), 0.0)
    return WaveFunction(vals, grid)


# ---------------------------------------------------------------- Bohr atom

@dataclass(frozen=True)
class BohrAtom:
    params: FqmParams
    z: float
    e2: float
    a0: float
    e0: float
    n_max: int

    @property
    def exponent(self) -> float:
        return self.params.alpha / (self.params.alpha - 1)

    def radius(self, n: int) -> float:
        return self.a0 * n ** self.exponent

    def energy(self, n: int) -> float:
        return (1 - self.params.alpha) * self.e0 * n ** (-self.exponent)

    @property
    def radii(self) -> list:
        return [self.radius(n) for n in range(1, self.n_max + 1)]

    @property
    def energies(self) -> list:
        return [self.energy(n) for n in range(1, self.n_max + 1)]

    def kinetic(self, n: int) -> float:
        return self.params.d_alpha * (n * self.params.hbar / self.radius(n)) ** self.params.alpha

    def potential(self, n: int) -> float:
        return -self.z * self.e2 / self.radius(n)

    def transition(self, m: int, n: int) -> float:
        """Angular frequency for the jump m -> n: (E_n - E_m) / hbar."""
        k = self.exponent
        return (1 - self.params.alpha) * self.e0 / self.params.hbar * (n ** -k - m ** -k)

    def spectrum(self) -> Spectrum:
        return Spectrum(tuple((n, self.energy(n)) for n in range(1, self.n_max + 1)),
                        "bohr_atom", CLOSED_FORM, _pdict(self.params, Z=self.z, e2=self.e2))


def bohr_atom(z: float, e2: float, n_max: int, params: FqmParams) -> BohrAtom:
    """Fractional Bohr orbits from p a_n = n hbar and the virial relation alpha E_kin = -V."""
    a = params.alpha
    if not a > 1:
        raise ValueError("the Bohr construction needs alpha > 1")
    if not z * e2 > 0:
        raise ValueError("Z e^2 must be positive")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    ze2 = z * e2
    a0 = (a * params.d_alpha * params.hbar**a / ze2) ** (1 / (a - 1))
    e0 = (ze2**a / (a**a * params.d_alpha * params.hbar**a)) ** (1 / (a - 1))
    return BohrAtom(params, z, e2, a0, e0, n_max)


# -------------------------------------------------------------- oscillator

def oscillator_levels_semiclassical(q2: float, beta_exp: float, n_max: int,
                                    params: FqmParams) -> Spectrum:
    """Bohr-Sommerfeld levels of H = D |p|^alpha + q^2 |x|^beta, n = 0..n_max."""
    a, b = params.alpha, beta_exp
    if not (1 < b <= 2):
        raise ValueError(f"beta_exp must lie in (1, 2], got {b}")
    if not q2 > 0:
        raise ValueError("q2 must be positive")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    q = math.sqrt(q2)
    bb = foxh.beta_function(1 / b, 1 / a + 1)
    base = math.pi * params.hbar * b * params.d_alpha ** (1 / a) * q ** (2 / b) / (2 * bb)
    power = a * b / (a + b)
    n = np.arange(0, n_max + 1)
    e = (base * (n + 0.5)) ** power
    return Spectrum(tuple(zip(n, e)), "oscillator_semiclassical", CLOSED_FORM,
                    _pdict(params, q2=q2, beta_exp=b))


# ------------------------------------------------------------------ delta well

@dataclass(frozen=True)
class DeltaWellState:
    energy: float
    psi: WaveFunction
    kinetic: float
    potential: float

    def __iter__(self):
        # unpack as (energy, psi)
        return iter((self.energy, self.psi))


def delta_well_energy(gamma: float, params: FqmParams) -> float:
    """E = -[gamma B(1/alpha, 1 - 1/alpha) / (pi hbar alpha D^(1/alpha))]^(alpha/(alpha-1))."""
    a = params.alpha
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    if not a > 1:
        raise ValueError("alpha = 1 is outside the domain (B(1, 0) diverges)")
    b = foxh.beta_function(1 / a, 1 - 1 / a)
    return -(gamma * b / (math.pi * params.hbar * a * params.d_alpha ** (1 / a))) ** (a / (a - 1))


def _power_moment(s: float, n: int, d: float, a: float, eps: float) -> float:
    """int_0^inf p^(s-1) / (d p^a + eps)^n dp in closed form (Beta function)."""
    return (d ** (-s / a) * eps ** (s / a - n) / a) * foxh.beta_function(s / a, n - s / a)


def delta_well_profile(x, gamma: float, params: FqmParams) -> np.ndarray:
    """Unnormalized psi(x) = (1/pi hbar) int_0^inf cos(p x / hbar) / (D p^alpha + |E|) dp."""
    a, d, hbar = params.alpha, params.d_alpha, params.hbar
    eps = -delta_well_energy(gamma, params)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(x.shape)
    zero = _power_moment(1.0, 1, d, a, eps) / (math.pi * hbar)
    for i, xi in enumerate(x):
        out[i] = zero if xi == 0.0 else _cos_transform(xi / hbar, d, a, eps) / (math.pi * hbar)
    return out


def _cos_power_tail(s: float, w: float, p0: float) -> float:
    # int_p0^inf cos(w p) p^(-s) dp = Re[(-i w)^(s-1) Gamma(1 - s, -i w p0)]
    with mp.workdps(20):
        return float(mp.re((-1j * w) ** (s - 1) * mp.gammainc(1 - s, -1j * w * p0)))


def _cos_transform(w: float, d: float, a: float, eps: float, p0: Optional[float] = None) -> float:
    """int_0^inf cos(w p) / (d p^a + eps) dp.

    Past p0 the integrand decays only like p^(-a), which defeats QUADPACK's
    Fourier rule at small w.  There the first two terms of the expansion in
    eps / (d p^a) are integrated exactly and only the remainder
    eps^2 / (A^2 (A + eps)), A = d p^a, goes to quadrature.
    """
    w = abs(w)
    if p0 is None:
        p0 = max(1.0, 2.0 * (eps / d) ** (1 / a))

    def f(p):
        return 1.0 / (d * p**a + eps)

    def rest(p):
        big = d * p**a
        return eps * eps / (big * big * (big + eps))

    with warnings.catch_warnings():
        # QUADPACK flags roundoff near 1e-15; the oracle comparisons bound the error
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, _ = integrate.quad(f, 0.0, p0, weight="cos", wvar=w,
                                 epsabs=1e-15, epsrel=1e-12, limit=200)
        if w >= 0.01:
            tail, _ = integrate.quad(rest, p0, np.inf, weight="cos", wvar=w,
                                     epsabs=1e-15, limlst=200)
        else:
            # QAWF fails at tiny w; cut where the remainder's tail is below 1e-17
            pmax = (eps * eps / (d**3 * (3 * a - 1) * 1e-17)) ** (1 / (3 * a - 1))
            pmax = max(pmax, 2 * p0)
            tail, _ = integrate.quad(rest, p0, pmax, weight="cos", wvar=w,
                                     epsabs=1e-16, epsrel=1e-12, limit=5000)
    tail += _cos_power_tail(a, w, p0) / d - eps * _cos_power_tail(2 * a, w, p0) / d**2
    return head + tail


def _delta_norm_and_kinetic(gamma: float, params: FqmParams):
    a, d, hbar = params.alpha, params.d_alpha, params.hbar
    eps = -delta_well_energy(gamma, params)
    # phi(p) = 1 / (D |p|^alpha + eps) is the Fourier transform of the profile
    norm2 = 2 * _power_moment(1.0, 2, d, a, eps) / (2 * math.pi * hbar)
    kin = 2 * d * _power_moment(a + 1.0, 2, d, a, eps) / (2 * math.pi * hbar)
    return norm2, kin / norm2


def delta_well_bound_state(gamma: float, params: FqmParams, grid: Grid1D) -> DeltaWellState:
    """Single bound state of V = -gamma delta(x).

    The profile is evaluated by quadrature of its momentum integral and
    normalized over the whole line (not the grid), so the grid values are
    exact samples.  ``kinetic`` and ``potential`` are the exact expectation
    values; they add up to ``energy``.
    """
    e = delta_well_energy(gamma, params)
    norm2, kin = _delta_norm_and_kinetic(gamma, params)
    prof = delta_well_profile(grid.x - grid.x_center, gamma, params) / math.sqrt(norm2)
    psi0 = delta_well_profile(0.0, gamma, params)[0] / math.sqrt(norm2)
    return DeltaWellState(e, WaveFunction(prof, grid), kin, -gamma * psi0**2)


def delta_well_levels(gamma: float, params: FqmParams) -> Spectrum:
    return Spectrum(((1, delta_well_energy(gamma, params)),), "delta_well", CLOSED_FORM,
                    _pdict(params, gamma=gamma))


# ----------------------------------------------------------- linear potential

def linear_length(force: float, params: FqmParams) -> float:
    """Length scale l = hbar (D / (F hbar))^(1/(alpha+1)) of the linear problem."""
    return params.hbar * (params.d_alpha / (force * params.hbar)) ** (1 / (params.alpha + 1))


def linear_energy_scale(force: float, params: FqmParams) -> float:
    """E_n / lambda_n = (F hbar)^(alpha/(alpha+1)) D^(1/(alpha+1))."""
    a = params.alpha
    return (force * params.hbar) ** (a / (a + 1)) * params.d_alpha ** (1 / (a + 1))


def gen_airy_zeros(alpha: float, n_max: int, ctl: foxh.SeriesControl = foxh.DEFAULT_CONTROL,
                   step: Optional[float] = None, xtol: float = 1e-12) -> np.ndarray:
    """First n_max zeros lambda of z -> Ai_alpha(-z), by scan and bracketing."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")

    def f(z):
        return foxh.gen_airy(-z, alpha, ctl)

    # a quarter of the smallest Airy-zero spacing
    step = 0.25 * 1.2 if step is None else step
    zeros = []
    lo, flo = 0.0, f(0.0)
    limit = 10.0 + 6.0 * n_max
    while len(zeros) < n_max:
        hi = lo + step
        if hi > limit:
            raise RuntimeError(f"bracketing failed: found {len(zeros)} zeros on [0, {limit:g}]")
        fhi = f(hi)
        if flo == 0.0:
            zeros.append(lo)
        elif flo * fhi < 0:
            zeros.append(optimize.brentq(f, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))
        lo, flo = hi, fhi
    return np.array(zeros[:n_max])


def linear_potential_levels(force: float, n_max: int, params: FqmParams,
                            ctl: foxh.SeriesControl = foxh.DEFAULT_CONTROL) -> Spectrum:
    """E_n = lambda_n (F hbar)^(alpha/(alpha+1)) D^(1/(alpha+1)) for V = F x, x > 0, wall at 0."""
    if not force > 0:
        raise ValueError("F must be positive")
    lam = gen_airy_zeros(params.alpha, n_max, ctl)
    e = lam * linear_energy_scale(force, params)
    return Spectrum(tuple(zip(range(1, n_max + 1), e)), "linear_potential", ROOT_FINDING,
                    _pdict(params, F=force))


def linear_potential_eigenfunction(n: int, force: float, grid: Grid1D, params: FqmParams,
                                   ctl: foxh.SeriesControl = foxh.DEFAULT_CONTROL) -> WaveFunction:
    """psi_n(x) ~ Ai_alpha(x / l - lambda_n) on x >= 0, zero for x < 0, unit grid norm."""
    lam = gen_airy_zeros(params.alpha, n, ctl)[-1]
    ell = linear_length(force, params)
    x = grid.x
    vals = np.array([foxh.gen_airy(xi / ell - lam, params.alpha, ctl) if xi >= 0 else 0.0
                     for xi in x])
    return WaveFunction(vals, grid).normalized()


def count_nodes(values: np.ndarray, rel_tol: float = 1e-6) -> int:
    """Sign changes of a real profile, ignoring entries below rel_tol of the maximum."""
    v = np.real(values)
    v = v[np.abs(v) > rel_tol * np.max(np.abs(v))]
    return int(np.sum(np.sign(v[1:]) != np.sign(v[:-1])))
