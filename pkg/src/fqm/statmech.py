"""Fractional statistical mechanics: density matrices, Bloch evolution, partition functions."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import integrate

from . import foxh
from .core import FqmParams, Grid1D, Potential, fft_forward, fft_inverse
from .riesz import kinetic_multiplier


@dataclass(frozen=True)
class DensityMatrix:
    """rho(x_j, x_k; beta) sampled on the grid (units of 1/length)."""

    kernel: np.ndarray
    beta: float
    grid: Grid1D

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=float)
        n = self.grid.n_points
        if k.shape != (n, n):
            raise ValueError(f"kernel must be {n}x{n}, got {k.shape}")
        if not self.beta > 0:
            raise ValueError("beta must be positive")
        k.setflags(write=False)
        object.__setattr__(self, "kernel", k)

    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.kernel - self.kernel.T)))

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the operator (kernel times dx)."""
        sym = 0.5 * (self.kernel + self.kernel.T) * self.grid.dx
        return float(np.linalg.eigvalsh(sym)[0])

    def compose(self, other: "DensityMatrix") -> "DensityMatrix":
        """rho(beta1) rho(beta2) as an integral operator product."""
        if other.grid != self.grid:
            raise ValueError("density matrices live on different grids")
        return DensityMatrix(self.kernel @ other.kernel * self.grid.dx,
                             self.beta + other.beta, self.grid)

    def ground_state_fidelity(self, psi0: np.ndarray) -> float:
        """<psi0| rho |psi0> / Tr rho for a real normalized grid state psi0."""
        dx = self.grid.dx
        v = np.real(np.asarray(psi0))
        return float(v @ self.kernel @ v * dx * dx / partition_function(self))


def thermal_length(beta: float, params: FqmParams) -> float:
    """hbar (beta D)^(1/alpha)."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return foxh.thermal_scale(beta, params)


def _lag_values(y: np.ndarray, beta: float, params: FqmParams) -> np.ndarray:
    s = foxh.thermal_scale(beta, params)
    return np.array([float(foxh.stable_kernel(abs(yi) / s, params.alpha).value) for yi in y]) / s


def free_density_matrix(grid: Grid1D, beta: float, params: FqmParams,
                        periodic: bool = False) -> DensityMatrix:
    """rho(x, x') = rho0(x - x', beta) from the series.

    ``periodic=True`` sums the periodic images rho0(x - x' + nL), which is what
    any Bloch evolution on the periodic box converges to.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    n, dx = grid.n_points, grid.dx
    if periodic:
        y = dx * np.arange(n // 2 + 1)
        col = _lag_values(y, beta, params) + _image_sum(y, grid.length, beta, params)
        col = np.concatenate([col, col[1:n // 2][::-1]])
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        return DensityMatrix(col[idx], beta, grid)
    lags = _lag_values(dx * np.arange(n), beta, params)
    idx = np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    return DensityMatrix(lags[idx], beta, grid)


def _image_sum(y: np.ndarray, length: float, beta: float, params: FqmParams) -> np.ndarray:
    s = foxh.thermal_scale(beta, params)
    if params.alpha < 2.0:
        umin = length / (2 * s)
        if umin < foxh.calibrated_crossover(params.alpha):
            raise ValueError("box too small for the algebraic image sum; enlarge L or lower beta")
        return foxh.periodic_image_tail(y, length, s, params.alpha).real
    # Gaussian images: a few terms are exhaustive
    out = np.zeros_like(y)
    for k in (1, 2, 3):
        out += _lag_values(y + k * length, beta, params) + _lag_values(y - k * length, beta, params)
    return out


def bloch_propagate(v: Potential, grid: Grid1D, beta: float, n_steps: int, params: FqmParams,
                    rho0: Optional[DensityMatrix] = None) -> DensityMatrix:
    """Solve -d rho / d beta = H rho column by column with Strang steps.

    Starts from delta(x - x') (or from ``rho0``, continuing its beta).  No
    renormalization: the trace is the partition function.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    vx = v.on_grid(grid)
    if np.iscomplexobj(vx):
        raise ValueError("Bloch evolution needs a real potential")
    db = beta / n_steps
    half = np.exp(-0.5 * vx * db)[:, None]
    kin = np.exp(-kinetic_multiplier(grid, params) * db)[:, None]
    if rho0 is None:
        rho = np.eye(grid.n_points) / grid.dx
        beta0 = 0.0
    else:
        rho, beta0 = np.array(rho0.kernel), rho0.beta
    rho = rho.astype(complex)
    with np.errstate(over="raise", invalid="raise"):
        try:
            for _ in range(n_steps):
                rho = half * fft_inverse(kin * fft_forward(half * rho, grid, axis=0), grid, axis=0)
        except FloatingPointError as exc:
            raise OverflowError("density matrix overflowed; V too negative for this beta") from exc
    if not np.all(np.isfinite(rho)):
        raise OverflowError("density matrix overflowed; V too negative for this beta")
    return DensityMatrix(rho.real, beta0 + beta, grid)


def partition_function(rho: DensityMatrix) -> float:
    """Z = sum_j rho(x_j, x_j) dx."""
    return float(np.trace(rho.kernel) * rho.grid.dx)


def free_partition_function(omega: float, beta: float, params: FqmParams) -> float:
    """Omega Gamma(1/alpha) / (pi alpha hbar (beta D)^(1/alpha)) = Omega rho0(0, beta)."""
    a = params.alpha
    return omega * math.gamma(1 / a) / (math.pi * a * thermal_length(beta, params))


def classical_partition_function(v: Potential, beta: float, params: FqmParams,
                                 x_range: Optional[Tuple[float, float]] = None) -> float:
    """int dx dp / (2 pi hbar) exp(-beta (D |p|^alpha + V(x))).

    The momentum integral is done exactly, leaving
    Gamma(1/alpha) / (pi alpha hbar (beta D)^(1/alpha)) * int exp(-beta V) dx.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    lo, hi = x_range if x_range is not None else (-np.inf, np.inf)
    if v.kind == "infinite_well":
        lo, hi = max(lo, v.center - v.a), min(hi, v.center + v.a)
    elif v.kind == "linear":
        lo = max(lo, v.center)
    if v.kind in ("free", "infinite_well", "delta_well") and not (np.isfinite(lo) and np.isfinite(hi)):
        raise ValueError("configurational integral diverges; give a finite x_range")
    if v.kind == "delta_well":
        raise ValueError("the classical limit of a delta well is not defined")
    if v.kind in ("free", "infinite_well"):
        config = hi - lo
    else:
        def boltz(x):
            return math.exp(-beta * float(v(x)))
        pts = [v.center] if lo < v.center < hi else None
        if np.isfinite(lo) and np.isfinite(hi):
            config, err = integrate.quad(boltz, lo, hi, points=pts, epsabs=0, epsrel=1e-12, limit=200)
        else:
            # split at the potential centre; infinite ranges cannot take break points
            config, err = 0.0, 0.0
            for a, b in ((lo, v.center), (v.center, hi)):
                if a < b:
                    c, e = integrate.quad(boltz, a, b, epsabs=0, epsrel=1e-12, limit=200)
                    config, err = config + c, err + e
        if not np.isfinite(config) or err > 1e-6 * abs(config):
            raise ValueError("configurational integral did not converge")
    return free_partition_function(config, beta, params)


def free_density_matrix_3d_radial(r: float, beta: float, params: FqmParams) -> float:
    """rho3(r, beta) = -(1/(2 pi r)) d rho0/dx at x = r."""
    return foxh.free_density_matrix_3d_radial(r, beta, params)


def momentum_diagonal(rho: DensityMatrix) -> np.ndarray:
    """F rho F^-1 in centred momentum order; for a free periodic rho this is diagonal."""
    g = rho.grid
    a = fft_forward(rho.kernel, g, axis=0)
    # right multiplication by F^-1 = conjugate transform along the second axis
    return np.conj(fft_forward(np.conj(a).T, g, axis=0)).T / g.length
