"""Parameters, grids, wave functions and the discrete Fourier pairing.

Conventions
-----------
Position samples are ``x_j = x_center - L/2 + j*dx`` for ``j = 0..N-1``.
Momentum samples are ``p_k = 2*pi*hbar*k/L`` for ``k = -N/2..N/2-1`` and are
stored in that (centred) order.  The transform pair approximates

    phi(p) = int dx exp(-i p x / hbar) psi(x)
    psi(x) = 1/(2 pi hbar) int dp exp(i p x / hbar) phi(p)

so that ``sum |psi|^2 dx == sum |phi|^2 dp / (2 pi hbar)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

POSITION = "position"
MOMENTUM = "momentum"


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class FqmParams:
    """Fractional kinematics: Levy index, generalized diffusion constant, hbar."""

    alpha: float = 2.0
    d_alpha: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if not (1.0 < self.alpha <= 2.0):
            raise ValueError(f"alpha must lie in (1, 2], got {self.alpha}")
        if not self.d_alpha > 0:
            raise ValueError(f"d_alpha must be positive, got {self.d_alpha}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")

    @classmethod
    def standard(cls, mass: float = 1.0, hbar: float = 1.0) -> "FqmParams":
        """Standard quantum mechanics: alpha = 2, D_2 = 1/(2m)."""
        return cls(alpha=2.0, d_alpha=1.0 / (2.0 * mass), hbar=hbar)

    @property
    def mass(self) -> float:
        if self.alpha != 2.0:
            raise ValueError("a mass is only defined at alpha = 2")
        return 1.0 / (2.0 * self.d_alpha)

    def with_alpha(self, alpha: float) -> "FqmParams":
        return replace(self, alpha=alpha)


@dataclass(frozen=True)
class Grid1D:
    n_points: int
    length: float
    x_center: float = 0.0

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 8 or self.n_points % 2:
            raise ValueError(f"n_points must be an even integer >= 8, got {self.n_points}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return self.x_center - self.length / 2 + self.dx * np.arange(self.n_points)

    @property
    def k(self) -> np.ndarray:
        """Integer mode numbers in centred order."""
        n = self.n_points
        return np.arange(-n // 2, n // 2)

    def dp(self, hbar: float = 1.0) -> float:
        return 2.0 * np.pi * hbar / self.length

    def p(self, hbar: float = 1.0) -> np.ndarray:
        return self.dp(hbar) * self.k

    def p_nyquist(self, hbar: float = 1.0) -> float:
        return np.pi * hbar / self.dx

    def reflect_index(self) -> np.ndarray:
        """Index map j -> j' with x_j' = 2*x_center - x_j (periodic)."""
        n = self.n_points
        return (n - np.arange(n)) % n


def make_grid(n_points: int, length: float, x_center: float = 0.0) -> Grid1D:
    return Grid1D(n_points, length, x_center)


@dataclass(frozen=True)
class WaveFunction:
    values: np.ndarray
    grid: Grid1D
    representation: str = POSITION
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.n_points,):
            raise ValueError(
                f"values must have shape ({self.grid.n_points},), got {vals.shape}")
        if self.representation not in (POSITION, MOMENTUM):
            raise ValueError(f"unknown representation {self.representation!r}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def norm2(self, hbar: float = 1.0) -> float:
        if self.representation == POSITION:
            return float(np.sum(np.abs(self.values) ** 2) * self.grid.dx)
        return float(np.sum(np.abs(self.values) ** 2) * self.grid.dp(hbar) / (2 * np.pi * hbar))

    def normalized(self) -> "WaveFunction":
        return replace(self, values=self.values / np.sqrt(self.norm2()))

    def with_values(self, values, time: Optional[float] = None) -> "WaveFunction":
        return replace(self, values=values, time=self.time if time is None else time)

    def boundary_mass(self, width: int = 5) -> float:
        """Probability within ``width`` samples of either box edge."""
        psi = self.position().values
        w = np.abs(psi[:width]) ** 2 + np.abs(psi[-width:]) ** 2
        return float(np.sum(w) * self.grid.dx)

    def position(self) -> "WaveFunction":
        return self if self.representation == POSITION else to_position(self)

    def momentum(self) -> "WaveFunction":
        return self if self.representation == MOMENTUM else to_momentum(self)


def _phase(grid: Grid1D) -> np.ndarray:
    # exp(-i p_k x_0 / hbar); hbar cancels since p_k x_0/hbar = 2 pi k x_0 / L
    x0 = grid.x_center - grid.length / 2
    return np.exp(-2j * np.pi * grid.k * x0 / grid.length)


def fft_forward(values: np.ndarray, grid: Grid1D, axis: int = 0) -> np.ndarray:
    """Position samples -> centred momentum samples (works along ``axis``)."""
    out = np.fft.fftshift(np.fft.fft(values, axis=axis), axes=axis) * grid.dx
    shape = [1] * np.ndim(values)
    shape[axis] = grid.n_points
    return out * _phase(grid).reshape(shape)


def fft_inverse(values: np.ndarray, grid: Grid1D, axis: int = 0) -> np.ndarray:
    shape = [1] * np.ndim(values)
    shape[axis] = grid.n_points
    v = values * np.conj(_phase(grid)).reshape(shape)
    return np.fft.ifft(np.fft.ifftshift(v, axes=axis), axis=axis) / grid.dx


def to_momentum(psi: WaveFunction) -> WaveFunction:
    if psi.representation != POSITION:
        raise ValueError("to_momentum expects a position-representation wave function")
    return replace(psi, values=fft_forward(psi.values, psi.grid), representation=MOMENTUM)


def to_position(psi: WaveFunction) -> WaveFunction:
    if psi.representation != MOMENTUM:
        raise ValueError("to_position expects a momentum-representation wave function")
    return replace(psi, values=fft_inverse(psi.values, psi.grid), representation=POSITION)


def inner_product(phi: WaveFunction, chi: WaveFunction, hbar: float = 1.0) -> complex:
    """(phi, chi) = sum conj(phi) chi dx (or dp/(2 pi hbar) in momentum space)."""
    if phi.grid != chi.grid:
        raise GridMismatchError("wave functions live on different grids")
    if phi.representation != chi.representation:
        raise ValueError("representations differ")
    s = np.vdot(phi.values, chi.values)
    if phi.representation == POSITION:
        return complex(s * phi.grid.dx)
    return complex(s * phi.grid.dp(hbar) / (2 * np.pi * hbar))


def gaussian(grid: Grid1D, center: float = 0.0, width: float = 1.0,
             momentum: float = 0.0, hbar: float = 1.0) -> WaveFunction:
    """Normalized Gaussian packet  (pi w^2)^(-1/4) exp(-(x-c)^2/2w^2 + i p0 x/hbar)."""
    x = grid.x
    vals = (np.pi * width**2) ** -0.25 * np.exp(
        -((x - center) ** 2) / (2 * width**2) + 1j * momentum * x / hbar)
    return WaveFunction(vals, grid)


def plane_wave(grid: Grid1D, k: int, amplitude: complex = 1.0) -> WaveFunction:
    """exp(i p_k x / hbar) for the integer grid mode ``k`` (independent of hbar)."""
    return WaveFunction(amplitude * np.exp(2j * np.pi * k * grid.x / grid.length), grid)


POTENTIAL_KINDS = ("free", "infinite_well", "delta_well", "linear", "power_law", "tabulated")


@dataclass(frozen=True)
class Potential:
    """Static potential V(x).

    Singular kinds are regularized when sampled on a grid: the infinite wall
    becomes a finite step of height ``wall`` and the delta well a normalized
    Gaussian of width ``width`` (default: one grid spacing) and area ``gamma``.
    The linear potential has its wall on x < 0.
    """

    kind: str = "free"
    a: float = 1.0
    gamma: float = 1.0
    force: float = 1.0
    q2: float = 1.0
    beta_exp: float = 2.0
    wall: float = 1.0e6
    width: Optional[float] = None
    center: float = 0.0
    table: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "infinite_well" and not self.a > 0:
            raise ValueError("infinite_well needs a > 0")
        if self.kind == "delta_well" and not self.gamma > 0:
            raise ValueError("delta_well needs gamma > 0")
        if self.kind == "linear" and not self.force > 0:
            raise ValueError("linear potential needs F > 0")
        if self.kind == "power_law" and not self.q2 > 0:
            raise ValueError("power_law needs q2 > 0")
        if self.kind == "tabulated" and self.table is None:
            raise ValueError("tabulated potential needs a table")

    @classmethod
    def harmonic(cls, q2: float, center: float = 0.0) -> "Potential":
        return cls(kind="power_law", q2=q2, beta_exp=2.0, center=center)

    @property
    def is_real(self) -> bool:
        return self.kind != "tabulated" or not np.iscomplexobj(self.table) or bool(
            np.all(np.imag(self.table) == 0))

    @property
    def is_singular(self) -> bool:
        return self.kind in ("infinite_well", "delta_well", "linear")

    def on_grid(self, grid: Grid1D) -> np.ndarray:
        x = grid.x - self.center
        if self.kind == "free":
            return np.zeros_like(x)
        if self.kind == "infinite_well":
            return np.where(np.abs(x) <= self.a, 0.0, self.wall)
        if self.kind == "delta_well":
            w = grid.dx if self.width is None else self.width
            return -self.gamma * np.exp(-x**2 / (2 * w * w)) / (np.sqrt(2 * np.pi) * w)
        if self.kind == "linear":
            return np.where(x >= 0, self.force * x, self.wall)
        if self.kind == "power_law":
            return self.q2 * np.abs(x) ** self.beta_exp
        table = np.asarray(self.table)
        if table.shape != (grid.n_points,):
            raise GridMismatchError("tabulated potential does not match the grid")
        if np.iscomplexobj(table) and np.all(np.imag(table) == 0):
            table = table.real
        return table

    def __call__(self, x):
        """Pointwise values for the smooth kinds (used by quadrature routines)."""
        x = np.asarray(x, dtype=float) - self.center
        if self.kind == "free":
            return np.zeros_like(x)
        if self.kind == "power_law":
            return self.q2 * np.abs(x) ** self.beta_exp
        if self.kind == "infinite_well":
            return np.where(np.abs(x) <= self.a, 0.0, np.inf)
        if self.kind == "linear":
            return np.where(x >= 0, self.force * x, np.inf)
        raise ValueError(f"pointwise evaluation not available for {self.kind!r}")
