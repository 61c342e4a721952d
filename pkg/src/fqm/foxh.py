"""The specific Fox H-function instances used by fractional QM.

Everything free-particle reduces to the symmetric stable density

    f_a(u) = (1/pi) int_0^inf dq cos(q u) exp(-q^a),   1 < a <= 2,

continued analytically to complex u.  Two expansions are used:

* the residue (power) series, convergent for every finite u,
      f_a(u) = sum_n (-1)^n Gamma((2n+1)/a) u^(2n) / ((2n)! pi a)
* the algebraic tail, asymptotic for large |u|,
      f_a(u) ~ sum_k (-1)^(k+1) Gamma(k a + 1) sin(k pi a / 2) u^(-k a - 1) / (k! pi)

On the real axis the tail is the whole function once |u| is past a
per-alpha crossover.  Off the real axis (real-time kernels) the tail misses
an oscillatory saddle contribution, so only the power series is used there
and the tail is exposed separately for callers that want the smooth part.
"""

from __future__ import annotations

import math
import threading
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import mpmath as mp
import numpy as np
from scipy import integrate, special

from .core import FqmParams

PI = math.pi
GAUSS_SWITCH = 12.0


class SeriesError(ArithmeticError):
    """Series did not converge within the allowed number of terms."""

    def __init__(self, message: str, partial=None, terms: int = 0):
        super().__init__(message)
        self.partial = partial
        self.terms = terms


@dataclass(frozen=True)
class SeriesControl:
    rel_tol: float = 1e-12
    max_terms: int = 400
    crossover: Optional[float] = None  # None -> calibrated per alpha

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_terms < 10:
            raise ValueError("max_terms must be >= 10")


DEFAULT_CONTROL = SeriesControl()


@dataclass(frozen=True)
class KernelValue:
    value: complex
    abs_error_estimate: float
    regime: str  # power_series | asymptotic | quadrature

    def __complex__(self):
        return complex(self.value)

    def __float__(self):
        return float(np.real(self.value))


def _check_alpha(alpha: float):
    if not (1.0 < alpha <= 2.0):
        raise ValueError(f"alpha must lie in (1, 2], got {alpha}")


# ---------------------------------------------------------------- power series

_coeff_lock = threading.Lock()
_coeff_cache: dict = {}


def _mp_coeffs(alpha: float, n: int, prec: int) -> list:
    key = (float(alpha), prec)
    with _coeff_lock:
        lst = _coeff_cache.setdefault(key, [])
        if len(lst) < n:
            with mp.workprec(prec):
                a = mp.mpf(alpha)
                for m in range(len(lst), n):
                    c = mp.gamma((2 * m + 1) / a) / (mp.factorial(2 * m) * mp.pi * a)
                    lst.append(c if m % 2 == 0 else -c)
        return lst[:n]


def _log_terms(alpha: float, logz: float, n: int) -> np.ndarray:
    m = np.arange(n)
    return (special.gammaln((2 * m + 1) / alpha) - special.gammaln(2 * m + 1)
            - math.log(PI * alpha) + m * logz)


def _series_extent(alpha: float, absu: float, drop: float, max_terms: int):
    """Peak log-term and number of terms until terms fall ``drop`` e-folds below it."""
    logz = 2.0 * math.log(absu) if absu > 0 else -np.inf
    n = 64
    while True:
        lt = _log_terms(alpha, logz, n)
        peak = int(np.argmax(lt))
        below = np.nonzero(lt[peak:] < lt[peak] - drop)[0]
        if below.size:
            return lt[peak], peak + int(below[0]) + 1
        if n > 4 * max_terms + 64:
            return lt[peak], n
        n *= 2


def _power_series(u: complex, alpha: float, ctl: SeriesControl, deriv: bool = False):
    """Return (f, f' or None, abs_err) by the residue series."""
    u = complex(u)
    absu = abs(u)
    if absu == 0.0:
        f0 = math.gamma(1.0 / alpha) / (PI * alpha)
        return f0, (0.0 if deriv else None), 1e-16 * f0
    logM, n_end = _series_extent(alpha, absu, 60.0, ctl.max_terms)
    if n_end > ctl.max_terms:
        raise SeriesError(
            f"power series needs {n_end} terms at |u|={absu:.4g} (max_terms={ctl.max_terms})",
            partial=None, terms=n_end)
    z = u * u
    m = np.arange(n_end)
    logc = _log_terms(alpha, 0.0, n_end)
    # float attempt: valid when the cancellation ratio M/|f| is mild
    # u*u may underflow to 0 for denormal u; log(0) then gives exact zeros
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        terms = np.exp(logc + m * np.log(z)) * np.where(m % 2 == 0, 1.0, -1.0)
    M = math.exp(logM)
    if np.all(np.isfinite(terms)):
        s = complex(np.sum(terms))
        err = 4e-16 * M * math.sqrt(n_end) + 1e-16 * abs(s)
        if err <= ctl.rel_tol * abs(s):
            d = None
            if deriv:
                d = complex(np.sum(2 * m[1:] * terms[1:]) / u)
            return s, d, err
        ratio = M / max(abs(s), 1e-300)
    else:
        ratio = 1e300
    # the float sum may be pure noise, so never assume |f| above 1
    ratio = max(ratio, M)
    # extended precision: enough digits to absorb the cancellation
    dps = max(30, int(math.ceil(math.log10(max(ratio, 1.0)))) + int(-math.log10(ctl.rel_tol)) + 10)
    for _ in range(6):
        # widen the tail if the answer is much smaller than the peak term
        _, n_end2 = _series_extent(alpha, absu, 60.0 + math.log(max(ratio, 1.0)), ctl.max_terms)
        if n_end2 > ctl.max_terms:
            raise SeriesError(
                f"power series needs {n_end2} terms at |u|={absu:.4g}", terms=n_end2)
        prec = int(dps * 3.33) + 16
        prec = (prec + 63) // 64 * 64
        coeffs = _mp_coeffs(alpha, n_end2, prec)
        with mp.workprec(prec):
            zz = mp.mpc(u) ** 2
            zn = mp.mpc(1)
            s_mp = mp.mpc(0)
            d_mp = mp.mpc(0)
            for k in range(n_end2):
                t = coeffs[k] * zn
                s_mp += t
                if deriv and k:
                    d_mp += 2 * k * t
                zn *= zz
            s = complex(s_mp)
            d = complex(d_mp / mp.mpc(u)) if deriv else None
        err = M * 10.0 ** (-dps) * math.sqrt(n_end2) + 1e-16 * abs(s)
        if err <= ctl.rel_tol * abs(s):
            return s, d, err
        # the answer is smaller than the precision assumed; retry with more digits
        ratio = max(M / max(abs(s), 1e-300), ratio * 1e3)
        dps = int(math.ceil(math.log10(ratio))) + int(-math.log10(ctl.rel_tol)) + 10
    raise SeriesError(f"power series did not reach rel_tol at |u|={absu:.4g}",
                      partial=s, terms=n_end2)


# ------------------------------------------------------------- algebraic tail

def _tail_log_envelope(alpha: float, logu: float, kmax: int) -> np.ndarray:
    k = np.arange(1, kmax + 1)
    return special.gammaln(k * alpha + 1) - special.gammaln(k + 1) - math.log(PI) - (k * alpha + 1) * logu


def _algebraic(u: complex, alpha: float, rel_tol: float = 1e-15, deriv: bool = False,
               kmax: int = 2000):
    """Optimally truncated tail series at u (Re u > 0).  Returns (f, f', err)."""
    u = complex(u)
    if u.real < 0:
        u = -u
    logu = math.log(abs(u))
    env = _tail_log_envelope(alpha, logu, kmax)
    k = np.arange(1, kmax + 1)
    sines = np.sin(k * PI * alpha / 2)
    # drop exact zeros (alpha = 2) and truncate before the envelope starts to grow
    kstar = int(np.argmin(env))
    stop = kstar + 1
    target = env[0] + math.log(rel_tol * 1e-3)
    small = np.nonzero(env[: kstar + 1] < target)[0]
    if small.size:
        stop = int(small[0]) + 1
    kk = k[:stop]
    mag = np.exp(env[:stop] + (kk * alpha + 1) * logu)  # |coefficient|
    coef = np.where(kk % 2 == 1, 1.0, -1.0) * mag * sines[:stop]
    s_pow = kk * alpha + 1
    upow = np.exp(-s_pow * np.log(u))
    f = complex(np.sum(coef * upow))
    d = complex(np.sum(-s_pow * coef * upow / u)) if deriv else None
    nxt = env[stop] if stop < kmax else env[-1]
    err = math.exp(nxt) * (abs(sines[stop]) if stop < kmax else 1.0)
    if alpha == 2.0:
        err = 0.0 if abs(u.imag) < 1e-300 else err
    err = max(err, 1e-16 * abs(f))
    return f, d, err


def algebraic_coefficients(alpha: float, kmax: int) -> np.ndarray:
    """a_k with f ~ sum_k a_k u^(-k alpha - 1), k = 1..kmax."""
    k = np.arange(1, kmax + 1)
    mag = np.exp(special.gammaln(k * alpha + 1) - special.gammaln(k + 1) - math.log(PI))
    return np.where(k % 2 == 1, 1.0, -1.0) * mag * np.sin(k * PI * alpha / 2)


@lru_cache(maxsize=256)
def calibrated_crossover(alpha: float, rel_tol: float = 1e-12) -> float:
    """Smallest real |u| past which the tail series alone meets ``rel_tol``.

    Found by scanning a geometric grid and requiring agreement between the
    two expansions at three consecutive points.  Returns inf at alpha = 2
    (the tail vanishes identically there).
    """
    _check_alpha(alpha)
    if alpha >= 2.0 - 1e-12:
        return math.inf
    ctl = SeriesControl(rel_tol=rel_tol * 1e-2, max_terms=20000)
    grid = np.geomspace(1.0, 200.0, 120)
    run = 0
    for i, u in enumerate(grid):
        fa, _, ea = _algebraic(u, alpha, rel_tol=rel_tol * 1e-3)
        ok = ea <= 0.1 * rel_tol * abs(fa)
        if ok:
            try:
                fp, _, ep = _power_series(u, alpha, ctl)
            except SeriesError:
                return float(grid[max(i - run, 0)])
            ok = abs(fp - fa) <= rel_tol * abs(fp) + ep
        run = run + 1 if ok else 0
        if run == 3:
            return float(grid[i - 2])
    return math.inf


# ------------------------------------------------------------ public kernels

def _crossover(alpha: float, ctl: SeriesControl) -> float:
    if ctl.crossover is not None:
        return ctl.crossover
    return calibrated_crossover(float(alpha), max(ctl.rel_tol, 1e-14))


def _eval(u: complex, alpha: float, ctl: SeriesControl, deriv: bool):
    _check_alpha(alpha)
    u = complex(u)
    if u.real < 0 or (u.real == 0 and u.imag < 0):
        u = -u
        sign = -1.0  # f is even, f' is odd
    else:
        sign = 1.0
    on_axis = u.imag == 0.0
    if on_axis and alpha == 2.0 and u.real > GAUSS_SWITCH:
        # alpha = 2 has no algebraic tail and the series cancels badly far
        # out on the real axis; the Gaussian closed form takes over there
        x = u.real
        f = complex(math.exp(-x * x / 4) / (2 * math.sqrt(PI)))
        d = -0.5 * x * f if deriv else None
        err, regime = 1e-16 * abs(f), "asymptotic"
    elif on_axis and u.real >= _crossover(alpha, ctl):
        f, d, err = _algebraic(u, alpha, rel_tol=ctl.rel_tol, deriv=deriv)
        regime = "asymptotic"
    else:
        f, d, err = _power_series(u, alpha, ctl, deriv=deriv)
        regime = "power_series"
    if deriv:
        d = sign * d
    return f, d, err, regime


def stable_kernel(u, alpha: float, ctl: SeriesControl = DEFAULT_CONTROL) -> KernelValue:
    """f_alpha(u); real for real u."""
    f, _, err, regime = _eval(u, alpha, ctl, deriv=False)
    if np.isreal(u):
        f = f.real
    return KernelValue(f, err, regime)


def stable_kernel_derivative(u, alpha: float, ctl: SeriesControl = DEFAULT_CONTROL) -> KernelValue:
    """d f_alpha / du from the term-wise differentiated expansion."""
    u = complex(u)
    _, d, err, regime = _eval(u, alpha, ctl, deriv=True)
    if u.imag == 0:
        d = d.real
    return KernelValue(d, max(err, 1e-16 * abs(d)), regime)


def stable_kernel_tail(u, alpha: float, rel_tol: float = 1e-15) -> KernelValue:
    """Smooth (algebraic) part of f_alpha at complex u, without saddle terms."""
    _check_alpha(alpha)
    f, _, err = _algebraic(complex(u), alpha, rel_tol=rel_tol)
    return KernelValue(f, err, "asymptotic")


def real_time_scale(t, params: FqmParams) -> complex:
    """sigma_t = hbar^(1-1/alpha) (i D t)^(1/alpha), principal branch.

    Complex t is allowed: t = -i hbar beta gives the thermal scale.
    """
    a = params.alpha
    return params.hbar ** (1 - 1 / a) * complex(1j * params.d_alpha * t) ** (1 / a)


def thermal_scale(beta: float, params: FqmParams) -> float:
    """sigma_beta = hbar (beta D)^(1/alpha)."""
    return params.hbar * (beta * params.d_alpha) ** (1 / params.alpha)


def free_kernel_1d(x: float, t, params: FqmParams, ctl: SeriesControl = DEFAULT_CONTROL) -> KernelValue:
    """K0(x, t) = f_alpha(x / sigma_t) / sigma_t."""
    if t == 0:
        raise ValueError("the kernel at t = 0 is a delta distribution")
    sigma = real_time_scale(t, params)
    kv = stable_kernel(complex(x) / sigma, params.alpha, ctl)
    return KernelValue(complex(kv.value) / sigma, kv.abs_error_estimate / abs(sigma), kv.regime)


def free_density_matrix_1d(x: float, beta: float, params: FqmParams,
                           ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """rho0(x, beta) = f_alpha(x / sigma_beta) / sigma_beta."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    s = thermal_scale(beta, params)
    return float(stable_kernel(x / s, params.alpha, ctl).value) / s


def free_kernel_3d(r: float, t, params: FqmParams, ctl: SeriesControl = DEFAULT_CONTROL) -> KernelValue:
    """K3(r, t) = -(1/(2 pi r)) d/dx K0(x, t) at x = r."""
    if not r > 0:
        raise ValueError("r must be positive")
    if t == 0:
        raise ValueError("the kernel at t = 0 is a delta distribution")
    sigma = real_time_scale(t, params)
    kv = stable_kernel_derivative(complex(r) / sigma, params.alpha, ctl)
    val = -complex(kv.value) / (2 * PI * r * sigma * sigma)
    return KernelValue(val, kv.abs_error_estimate / (2 * PI * r * abs(sigma) ** 2), kv.regime)


def free_density_matrix_3d_radial(r: float, beta: float, params: FqmParams,
                                  ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """rho3(r, beta) = -(1/(2 pi r)) d/dx rho0(x, beta) at x = r."""
    if not r > 0:
        raise ValueError("r must be positive")
    if not beta > 0:
        raise ValueError("beta must be positive")
    s = thermal_scale(beta, params)
    d = float(stable_kernel_derivative(r / s, params.alpha, ctl).value)
    return -d / (2 * PI * r * s * s)


def periodic_image_tail(y, length: float, sigma: complex, alpha: float,
                        rel_tol: float = 1e-15) -> np.ndarray:
    """sum_{n != 0} K_tail(y + n L) for |y| <= L/2, K_tail(y) = f_tail(|y|/sigma)/sigma.

    Term k of the tail contributes a_k sigma^(k alpha) |y|^-(k alpha + 1); the
    image sums are Hurwitz zeta values.
    """
    y = np.abs(np.asarray(y, dtype=float))
    if np.any(y > length / 2 * (1 + 1e-12)):
        raise ValueError("lags must satisfy |y| <= L/2")
    umin = length / (2 * abs(sigma))
    _, _, _ = _algebraic(complex(umin), alpha, rel_tol)  # validates the regime
    env = _tail_log_envelope(alpha, math.log(umin), 400)
    kstar = int(np.argmin(env))
    target = env[0] + math.log(rel_tol)
    small = np.nonzero(env[: kstar + 1] < target)[0]
    stop = int(small[0]) + 1 if small.size else kstar + 1
    a = algebraic_coefficients(alpha, stop)
    out = np.zeros(y.shape, dtype=complex)
    logsig = np.log(complex(sigma))
    for k in range(1, stop + 1):
        if a[k - 1] == 0.0:
            continue
        s = k * alpha + 1
        zsum = special.zeta(s, 1 + y / length) + special.zeta(s, 1 - y / length)
        out += a[k - 1] * np.exp((s - 1) * logsig) * length ** (-s) * zsum
    return out


# --------------------------------------------------------------- other functions

def beta_function(u: float, v: float) -> float:
    """Euler Beta B(u, v) = Gamma(u) Gamma(v) / Gamma(u + v)."""
    if not (u > 0 and v > 0):
        raise ValueError("beta_function needs positive arguments")
    return float(special.beta(u, v))


def gen_airy(z: float, alpha: float, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Ai_alpha(z) = (1/pi) int_0^inf cos(z t + t^(alpha+1)/(alpha+1)) dt.

    The phase phi(t) = z t + t^(alpha+1)/(alpha+1) is integrated along the real
    axis up to T, beyond its stationary point |z|^(1/alpha), and then along the
    ray T + s exp(i theta), theta = pi/(2(alpha+1)), on which |exp(i phi)|
    decreases monotonically.  For z >= 0 the ray starts at T = 0.
    """
    _check_alpha(alpha)
    z = float(z)
    a1 = alpha + 1.0
    theta = PI / (2 * a1)
    e1 = complex(math.cos(theta), math.sin(theta))
    big_t = 0.0 if z >= 0 else (2.0 * abs(z)) ** (1 / alpha) + 1.0

    def ray(s):
        t = big_t + s * e1
        return (e1 * np.exp(1j * (z * t + t**a1 / a1))).real

    # far along the ray |integrand| ~ exp(-s^a1 / a1); 60 e-folds suffice
    smax = 1.5 * (60 * a1) ** (1 / a1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(ray, 0.0, smax, epsabs=1e-15, epsrel=1e-13, limit=400)
        if big_t > 0:
            n_osc = int((abs(z) * big_t + big_t**a1 / a1) / (2 * PI)) + 1
            v2, e2 = integrate.quad(lambda t: math.cos(z * t + t**a1 / a1), 0.0, big_t,
                                    epsabs=1e-14, epsrel=1e-13, limit=max(200, 20 * n_osc))
            val, err = val + v2, err + e2
    if err > max(1e-9, 1e-7 * abs(val)):
        raise SeriesError(f"gen_airy quadrature error {err:.3g} too large", partial=val / PI)
    return val / PI
