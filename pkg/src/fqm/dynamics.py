"""Real-time propagation: exact free evolution, Strang split-step, and the
independent kernel-convolution route, plus trajectory consistency checks."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import special

from . import foxh
from .core import MOMENTUM, FqmParams, Grid1D, Potential, WaveFunction, fft_forward, fft_inverse
from .riesz import current_density, kinetic_multiplier

BOUNDARY_TOL = 1e-8


class BoundaryMassWarning(RuntimeWarning):
    """Probability has reached the edge of the periodic box."""


def _check_boundary(psi: WaveFunction, width: int = 5) -> WaveFunction:
    mass = psi.boundary_mass(width)
    if mass > BOUNDARY_TOL:
        warnings.warn(f"boundary mass {mass:.2e} exceeds {BOUNDARY_TOL:g}; periodic images "
                      "may contaminate the solution", BoundaryMassWarning, stacklevel=3)
    return psi


def free_phase(grid: Grid1D, t: float, params: FqmParams) -> np.ndarray:
    return np.exp(-1j * kinetic_multiplier(grid, params) * t / params.hbar)


def evolve_free(psi0: WaveFunction, t: float, params: FqmParams) -> WaveFunction:
    """phi(p, t) = exp(-i D |p|^alpha t / hbar) phi0(p), exact on the grid."""
    phi = psi0.momentum().values * free_phase(psi0.grid, t, params)
    out = WaveFunction(phi, psi0.grid, MOMENTUM, psi0.time + t)
    out = out if psi0.representation == MOMENTUM else out.position()
    return _check_boundary(out)


def evolve_splitstep(psi0: WaveFunction, v: Potential, t: float, n_steps: int,
                     params: FqmParams) -> WaveFunction:
    """Strang splitting exp(-iV dt/2h) exp(-iT dt/h) exp(-iV dt/2h), repeated n_steps times."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if not v.is_real:
        raise ValueError("split-step propagation needs a real potential")
    grid = psi0.grid
    dt = t / n_steps
    hbar = params.hbar
    vx = v.on_grid(grid)
    half = np.exp(-0.5j * vx * dt / hbar)
    kin = free_phase(grid, dt, params)
    psi = psi0.position().values * half
    for step in range(n_steps):
        psi = fft_inverse(kin * fft_forward(psi, grid), grid)
        # merge the two adjacent half potential steps except at the end
        psi = psi * (half if step == n_steps - 1 else half * half)
    return _check_boundary(WaveFunction(psi, grid, time=psi0.time + t))


# ------------------------------------------------------------ kernel route

@dataclass(frozen=True)
class KernelWindow:
    """Blend between the full kernel and its algebraic tail, in lag units.

    w(y) = erfc((|y| - center) / width) / 2, forced to 1 below center - 6 width.
    """

    center: float
    width: float
    p_center: float
    bandwidth: float

    def weight(self, y: np.ndarray) -> np.ndarray:
        y = np.abs(y)
        w = 0.5 * special.erfc((y - self.center) / self.width)
        w[y < self.center - 6 * self.width] = 1.0
        w[y > self.center + 6 * self.width] = 0.0
        return w


def bandwidth(psi: WaveFunction, hbar: float = 1.0, rel: float = 1e-15) -> float:
    """Largest |p| at which |phi(p)| exceeds ``rel`` times its maximum."""
    phi = np.abs(psi.momentum().values)
    p = np.abs(psi.grid.p(hbar))
    return float(np.max(p[phi > rel * phi.max()]))


def kernel_window(grid: Grid1D, t: float, params: FqmParams, p_band: float,
                  p_fraction: float = 0.5) -> KernelWindow:
    """Place the blend where the kernel's local momentum reaches ``p_fraction`` of Nyquist.

    At lag y the stationary-phase momentum of the free kernel is
    p*(y) = (|y| / (alpha D |t|))^(1/(alpha-1)).  A state with no weight above
    ``p_band`` does not see the kernel beyond the lag where p* exceeds it, so
    the oscillatory part may be rolled off there.  The erfc width makes the
    roll-off leak below exp(-36) into momenta under ``p_band``.
    """
    a, d, hbar = params.alpha, params.d_alpha, params.hbar
    p_mid = p_fraction * grid.p_nyquist(hbar)
    gap = max(p_mid - p_band, 0.25 * p_mid)
    width = 12.0 * hbar / gap
    center = a * d * abs(t) * p_mid ** (a - 1)
    # keep the unit plateau around the origin where the tail is singular
    width = min(width, center / 7.0)
    return KernelWindow(center, width, p_mid, p_band)


def kernel_column(grid: Grid1D, t: float, params: FqmParams, window: KernelWindow,
                  ctl: Optional[foxh.SeriesControl] = None) -> np.ndarray:
    """Periodized, band-adapted free kernel on the circular lags m dx, m = 0..N-1.

    Inside the window the Fox-H series value K0(y, t) is used; outside it only
    the algebraic tail, and images y + nL (n != 0) are summed with Hurwitz
    zeta functions.
    """
    if t == 0:
        raise ValueError("t = 0 is the identity; the kernel is a delta")
    ctl = ctl or foxh.SeriesControl(max_terms=4000)
    a = params.alpha
    n = grid.n_points
    y = grid.dx * np.arange(n // 2 + 1)
    sigma = foxh.real_time_scale(t, params)
    if window.center + 6 * window.width > grid.length / 2:
        warnings.warn("the kernel's resolved oscillation reaches the box edge; enlarge the box "
                      "or shorten t", BoundaryMassWarning, stacklevel=2)
    w = window.weight(y)
    col = np.zeros(y.size, dtype=complex)
    for i, yi in enumerate(y):
        u = complex(yi) / sigma
        if w[i] > 0.0:
            col[i] += w[i] * complex(foxh.stable_kernel(u, a, ctl).value)
        if w[i] < 1.0 and a < 2.0:
            col[i] += (1.0 - w[i]) * complex(foxh.stable_kernel_tail(u, a).value)
    col /= sigma
    if a < 2.0:
        col += foxh.periodic_image_tail(y, grid.length, sigma, a)
    return np.concatenate([col, col[1:n // 2][::-1]])


def propagate_with_kernel(psi0: WaveFunction, t: float, params: FqmParams,
                          ctl: Optional[foxh.SeriesControl] = None,
                          p_fraction: float = 0.5) -> WaveFunction:
    """psi(x, t) = int dx' K0(x - x', t) psi0(x') as a circular sum over the grid.

    The circulant sum is carried out with FFTs; the kernel values come from
    the Fox-H series only, never from the momentum-space phase.
    """
    if t == 0:
        raise ValueError("t must be nonzero")
    grid = psi0.grid
    psi = psi0.position()
    win = kernel_window(grid, t, params, bandwidth(psi, params.hbar), p_fraction)
    col = kernel_column(grid, t, params, win, ctl)
    out = np.fft.ifft(np.fft.fft(col) * np.fft.fft(psi.values)) * grid.dx
    return _check_boundary(WaveFunction(out, grid, time=psi0.time + t))


def l2_distance(a: WaveFunction, b: WaveFunction) -> float:
    a, b = a.position(), b.position()
    return float(np.sqrt(np.sum(np.abs(a.values - b.values) ** 2) * a.grid.dx))


def composition_residual(psi0: WaveFunction, t1: float, t2: float, params: FqmParams,
                         ctl: Optional[foxh.SeriesControl] = None) -> float:
    """|| P(t2) P(t1) psi0 - P(t1 + t2) psi0 || with P the kernel propagator."""
    two = propagate_with_kernel(propagate_with_kernel(psi0, t1, params, ctl), t2, params, ctl)
    one = propagate_with_kernel(psi0, t1 + t2, params, ctl)
    return l2_distance(two, one)


# ------------------------------------------------------------ diagnostics

def scaling_check(psi_family: Optional[Callable] = None, lam: float = 2.0,
                  params: FqmParams = FqmParams(alpha=1.5), xs=None, t: float = 1.0,
                  exponent: Optional[float] = None) -> float:
    """Max relative defect of F(lam^(1/alpha) x, lam t) = lam^exponent F(x, t).

    ``psi_family`` maps (x, t) to a complex amplitude; the default is the free
    kernel, whose amplitude exponent is -1/alpha.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    a = params.alpha
    if psi_family is None:
        def psi_family(x, tt):
            return complex(foxh.free_kernel_1d(x, tt, params).value)
    if exponent is None:
        exponent = -1.0 / a
    xs = np.linspace(-3.0, 3.0, 25) if xs is None else np.asarray(xs, dtype=float)
    s = lam ** (1.0 / a)
    worst = 0.0
    for x in xs:
        lhs = psi_family(s * x, lam * t)
        rhs = lam ** exponent * psi_family(x, t)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
    return worst


def _dx_spectral(f: np.ndarray, grid: Grid1D) -> np.ndarray:
    k = grid.p(1.0)
    mult = 1j * k
    mult[0] = 0.0  # Nyquist mode carries no derivative
    return fft_inverse(mult * fft_forward(f, grid), grid).real


def continuity_defect(psi0: WaveFunction, t: float, n_steps: int, params: FqmParams,
                      v: Optional[Potential] = None) -> float:
    """L2 norm over (x, t) of d rho/dt + dj/dx along a trajectory.

    Frames are exact free evolutions (or split-step ones when ``v`` is given);
    d rho/dt uses centred differences over the interior frames.
    """
    if n_steps < 2:
        raise ValueError("n_steps must be >= 2")
    grid = psi0.grid
    dt = t / n_steps
    frames = [psi0.position()]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BoundaryMassWarning)
        for _ in range(n_steps):
            if v is None or v.kind == "free":
                frames.append(evolve_free(frames[-1], dt, params).position())
            else:
                frames.append(evolve_splitstep(frames[-1], v, dt, 1, params))
    rho = np.array([np.abs(f.values) ** 2 for f in frames])
    total = 0.0
    for k in range(1, n_steps):
        drho = (rho[k + 1] - rho[k - 1]) / (2 * dt)
        dj = _dx_spectral(current_density(frames[k], params).j, grid)
        total += np.sum((drho + dj) ** 2) * grid.dx * dt
    return math.sqrt(total)


def centroid(psi: WaveFunction) -> float:
    psi = psi.position()
    rho = np.abs(psi.values) ** 2
    return float(np.sum(psi.grid.x * rho) / np.sum(rho))
