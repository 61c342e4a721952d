"""Numerical stationary states of H = D |p|^alpha + V(x) on the periodic grid."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from .core import FqmParams, Grid1D, Potential, WaveFunction, fft_forward, fft_inverse, gaussian
from .riesz import kinetic_multiplier, parity_classify
from .spectra import NUMERICAL, Spectrum


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class HamiltonianMatrix:
    matrix: np.ndarray
    grid: Grid1D
    params: FqmParams
    potential: Potential

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def kinetic_matrix(grid: Grid1D, params: FqmParams) -> np.ndarray:
    """F^-1 diag(D |p_k|^alpha) F as a real symmetric circulant."""
    m = np.fft.ifftshift(kinetic_multiplier(grid, params))
    col = np.fft.ifft(m)
    # |p|^alpha is even on the discrete circle (the Nyquist mode is its own
    # mirror), so the column is real and symmetric up to roundoff
    col = col.real
    col[1:] = 0.5 * (col[1:] + col[1:][::-1])
    return linalg.circulant(col)


def build_hamiltonian_matrix(v: Potential, grid: Grid1D, params: FqmParams) -> HamiltonianMatrix:
    """Dense H in the position basis; the infinite wall enters as its finite step."""
    vx = v.on_grid(grid)
    if np.iscomplexobj(vx):
        raise ValueError("the Hamiltonian matrix needs a real potential")
    if not np.all(np.isfinite(vx)):
        raise ValueError("potential has non-finite entries on the grid")
    h = kinetic_matrix(grid, params)
    h[np.diag_indices_from(h)] += vx
    return HamiltonianMatrix(h, grid, params, v)


@dataclass(frozen=True)
class EigenResult:
    spectrum: Spectrum
    states: list
    parities: list

    def __iter__(self):
        return iter((self.spectrum, self.states))


def eigenstates(h: HamiltonianMatrix, k: int, parity_tol: float = 1e-6) -> EigenResult:
    """Lowest k eigenpairs, ascending, with unit grid norm and a fixed sign convention."""
    grid = h.grid
    if not 1 <= k <= grid.n_points:
        raise ValueError(f"k must lie in [1, {grid.n_points}]")
    try:
        w, vecs = linalg.eigh(h.matrix, subset_by_index=[0, k - 1])
    except linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigendecomposition failed: {exc}") from exc
    states, parities = [], []
    for i in range(k):
        vec = vecs[:, i] / np.sqrt(grid.dx)
        # sign: largest-magnitude sample positive
        j = np.argmax(np.abs(vec))
        vec = vec * np.sign(vec[j].real)
        psi = WaveFunction(vec, grid)
        states.append(psi)
        parities.append(parity_classify(psi, parity_tol))
    p = h.params
    spec = Spectrum(tuple(zip(range(k), w)), f"matrix:{h.potential.kind}", NUMERICAL,
                    {"alpha": p.alpha, "d_alpha": p.d_alpha, "hbar": p.hbar,
                     "n_points": grid.n_points, "length": grid.length})
    return EigenResult(spec, states, parities)


def energy_expectation(psi: WaveFunction, vx: np.ndarray, params: FqmParams) -> float:
    """<psi, H psi> / <psi, psi> with the potential given by its grid samples."""
    psi = psi.position()
    grid = psi.grid
    kin = fft_inverse(kinetic_multiplier(grid, params) * fft_forward(psi.values, grid), grid)
    num = np.vdot(psi.values, kin + vx * psi.values).real * grid.dx
    return float(num / psi.norm2())


@dataclass(frozen=True)
class RelaxationResult:
    energy: float
    psi: WaveFunction
    energies: np.ndarray
    converged: bool

    def __iter__(self):
        return iter((self.energy, self.psi))


def imaginary_time_ground_state(v: Potential, grid: Grid1D, params: FqmParams,
                                beta_max: float, n_steps: int,
                                psi0: Optional[WaveFunction] = None,
                                tol: float = 1e-12) -> RelaxationResult:
    """Relax to the ground state with renormalized Strang steps of exp(-d beta H).

    The energy is the Rayleigh quotient of the exact grid Hamiltonian.  Raises
    ConvergenceError (carrying the result) when the last step still changes
    the energy by more than ``tol`` relative.
    """
    if not beta_max > 0 or n_steps < 2:
        raise ValueError("need beta_max > 0 and n_steps >= 2")
    vx = v.on_grid(grid)
    if np.iscomplexobj(vx):
        raise ValueError("relaxation needs a real potential")
    db = beta_max / n_steps
    # imaginary time t = -i hbar beta turns exp(-i H t / hbar) into exp(-beta H)
    vshift = vx - vx.min()  # shift keeps the half steps <= 1
    half = np.exp(-0.5 * vshift * db)
    kin = np.exp(-kinetic_multiplier(grid, params) * db)
    if psi0 is None:
        psi0 = gaussian(grid, grid.x_center, grid.length / 20)
    psi = psi0.position().values.astype(complex)
    energies = np.empty(n_steps + 1)
    energies[0] = energy_expectation(WaveFunction(psi, grid), vx, params)
    for s in range(n_steps):
        psi = half * fft_inverse(kin * fft_forward(half * psi, grid), grid)
        psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx)
        energies[s + 1] = energy_expectation(WaveFunction(psi, grid), vx, params)
    out = WaveFunction(psi, grid).normalized()
    change = abs(energies[-1] - energies[-2])
    result = RelaxationResult(float(energies[-1]), out, energies,
                              change <= tol * max(1.0, abs(energies[-1])))
    if not result.converged:
        raise ConvergenceError(f"energy still changing by {change:.2e} at beta_max", result)
    return result
