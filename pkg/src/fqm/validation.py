"""Acceptance checks 1-9, shared by the test-suite and ``fqm validate``.

Each check returns a CriterionResult whose ``line()`` is a one-line report
with the measured numbers next to the tolerance.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import mpmath as mp
import numpy as np
from scipy import integrate, special

from . import dynamics, eigensolve, foxh, riesz, spectra, statmech
from .core import FqmParams, Potential, gaussian, make_grid, plane_wave


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: Dict[str, float] = field(default_factory=dict)
    details: List[str] = field(default_factory=list)
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = "; ".join(self.details)
        return f"[{status}] criterion {self.number}: {self.title} -- {parts}"

    def to_dict(self) -> dict:
        return {"number": self.number, "title": self.title, "passed": self.passed,
                "measured": {k: float(v) for k, v in self.measured.items()},
                "details": self.details}


def _rel(a, b) -> float:
    return float(abs(a - b) / abs(b))


# ---------------------------------------------------------------- 1

def criterion_1() -> CriterionResult:
    """alpha = 2 reductions of every closed form, 1e-6 relative (1e-3 for Airy roots)."""
    m, hbar = 1.3, 0.9
    p = FqmParams.standard(mass=m, hbar=hbar)
    res = {}
    # free kernel vs Feynman
    worst = 0.0
    for x, t in [(1.0, 1.0), (0.4, 0.3), (2.5, 1.7), (-1.2, 0.8)]:
        k = complex(foxh.free_kernel_1d(x, t, p).value)
        feyn = np.sqrt(m / (2j * np.pi * hbar * t)) * np.exp(1j * m * x * x / (2 * hbar * t))
        worst = max(worst, _rel(k, feyn))
    res["feynman_kernel"] = worst
    # density matrix vs the Gaussian
    worst = 0.0
    for x, beta in [(0.0, 1.0), (1.1, 0.5), (3.0, 2.0), (0.7, 0.1)]:
        rho = foxh.free_density_matrix_1d(x, beta, p)
        gauss = math.sqrt(m / (2 * math.pi * hbar**2 * beta)) * math.exp(-m * x * x / (2 * hbar**2 * beta))
        worst = max(worst, _rel(rho, gauss))
    res["density_matrix"] = worst
    # infinite well, a = 0.8
    a = 0.8
    e = spectra.infinite_well_levels(a, 5, p).energies
    n = np.arange(1, 6)
    res["well"] = float(np.max(np.abs(e / (np.pi**2 * hbar**2 * n**2 / (8 * m * a * a)) - 1)))
    # Bohr atom
    z, e2 = 1.0, 1.7
    atom = spectra.bohr_atom(z, e2, 5, p)
    ry = m * e2**2 / (2 * hbar**2)
    res["bohr"] = max(float(np.max(np.abs(np.array(atom.energies) / (-ry / n**2) - 1))),
                      _rel(atom.a0, hbar**2 / (m * e2)), _rel((p.alpha - 1) * atom.e0, ry))
    # oscillator, V = q^2 x^2, omega = q sqrt(2/m)
    q2 = 0.6
    osc = spectra.oscillator_levels_semiclassical(q2, 2.0, 5, p).energies
    omega = math.sqrt(q2) * math.sqrt(2 / m)
    res["oscillator"] = float(np.max(np.abs(osc / (hbar * omega * (np.arange(6) + 0.5)) - 1)))
    # delta well
    gamma = 0.75
    res["delta_well"] = _rel(spectra.delta_well_energy(gamma, p), -m * gamma**2 / (2 * hbar**2))
    # linear potential vs Airy zeros
    force = 1.4
    lin = spectra.linear_potential_levels(force, 3, p).energies
    airy = -special.ai_zeros(3)[0] * (force**2 * hbar**2 / (2 * m)) ** (1 / 3)
    res["linear_airy"] = float(np.max(np.abs(lin / airy - 1)))
    ok = all(v < 1e-6 for k, v in res.items() if k != "linear_airy") and res["linear_airy"] < 1e-3
    details = [f"{k} {v:.1e}" for k, v in res.items()]
    return CriterionResult(1, "alpha=2 reductions (tol 1e-6, Airy 1e-3)", ok, res, details)


# ---------------------------------------------------------------- 2

def _quiet_quad(f, lo, hi):
    with warnings.catch_warnings():
        # roundoff warnings on pieces whose integral is ~1e-17 of the total
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, lo, hi, epsabs=1e-17, epsrel=1e-13, limit=200)[0]


def _oracle_stable(u: float, alpha: float) -> float:
    # direct adaptive quadrature of (1/pi) int_0^Q cos(q u) exp(-q^alpha) dq
    qmax = 45.0 ** (1 / alpha)
    pieces = max(8, int(u * qmax / np.pi) + 1)
    edges = np.linspace(0.0, qmax, pieces + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += _quiet_quad(lambda q: math.cos(q * u) * math.exp(-q**alpha), lo, hi)
    return total / math.pi


def _oracle_density(x: float, beta: float, p: FqmParams) -> float:
    # rho0(x, beta) = (1/(pi hbar)) int_0^inf cos(p x / hbar) exp(-beta D p^alpha) dp
    scale = (45.0 / (beta * p.d_alpha)) ** (1 / p.alpha)
    w = x / p.hbar
    pieces = max(8, int(w * scale / np.pi) + 1)
    edges = np.linspace(0.0, scale, pieces + 1)
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        total += _quiet_quad(lambda q: math.cos(q * w) * math.exp(-beta * p.d_alpha * q**p.alpha),
                             lo, hi)
    return total / (math.pi * p.hbar)


def _oracle_airy(z: float, alpha: float) -> float:
    a1 = alpha + 1
    with mp.workdps(20):
        v = mp.quadosc(lambda t: mp.cos(z * t + t**a1 / a1), [0, mp.inf],
                       zeros=lambda n: (a1 * n * mp.pi) ** (1 / a1))
        return float(v / mp.pi)


def criterion_2(alphas=(1.2, 1.5, 1.8), n_points: int = 20) -> CriterionResult:
    """Special functions vs independent adaptive quadrature, 20 points per alpha."""
    res = {}
    p0 = dict(d_alpha=1.3, hbar=0.9)
    for a in alphas:
        us = np.linspace(0.0, 25.0, n_points)
        res[f"kernel a={a}"] = max(abs(foxh.stable_kernel(u, a).value - _oracle_stable(u, a))
                                   for u in us)
        p = FqmParams(a, **p0)
        xs = np.linspace(0.0, 12.0, n_points)
        res[f"density a={a}"] = max(abs(foxh.free_density_matrix_1d(x, 0.8, p)
                                        - _oracle_density(x, 0.8, p)) for x in xs)
        zs = np.linspace(-12.0, 4.0, n_points)
        res[f"gen_airy a={a}"] = max(abs(foxh.gen_airy(z, a) - _oracle_airy(z, a)) for z in zs)
    ok = all(v < (1e-6 if k.startswith("gen_airy") else 1e-8) for k, v in res.items())
    details = [f"max abs err {k} {v:.1e}" for k, v in res.items()]
    return CriterionResult(2, "oracle equivalence (1e-8 abs, gen_airy 1e-6)", ok, res, details)


# ---------------------------------------------------------------- 3

def _packet_grid():
    return make_grid(2048, 80.0)


def criterion_3() -> CriterionResult:
    """evolve_free vs propagate_with_kernel, alpha = 1.5, t = 0.5."""
    g = _packet_grid()
    p = FqmParams(1.5)
    psi = gaussian(g, 0.0, 1.0, momentum=1.0)
    d = dynamics.l2_distance(dynamics.evolve_free(psi, 0.5, p),
                             dynamics.propagate_with_kernel(psi, 0.5, p))
    return CriterionResult(3, "two-route propagation (L2 < 1e-6)", d < 1e-6, {"l2": d},
                           [f"L2 difference {d:.2e} (N=2048, L=80)"])


# ---------------------------------------------------------------- 4

def criterion_4(alphas=(1.2, 1.5, 1.8, 2.0)) -> CriterionResult:
    """Split-step unitarity over 1000 steps and hermiticity over 50 random pairs."""
    g = make_grid(512, 40.0)
    v = Potential.harmonic(0.3)
    res = {}
    for a in alphas:
        p = FqmParams(a)
        psi = gaussian(g, 1.0, 1.0, momentum=0.5)
        out = dynamics.evolve_splitstep(psi, v, 5.0, 1000, p)
        res[f"norm drift a={a}"] = abs(out.norm2() - psi.norm2())
        res[f"hermiticity a={a}"] = max(riesz.hermiticity_defect(v, p, g, trials=50, seed=7),
                                        riesz.hermiticity_defect(Potential(), p, g, trials=50,
                                                                 seed=8))
    ok = all(v < (1e-12 if k.startswith("norm") else 1e-10) for k, v in res.items())
    worst_n = max(v for k, v in res.items() if k.startswith("norm"))
    worst_h = max(v for k, v in res.items() if k.startswith("herm"))
    return CriterionResult(4, "unitarity (1e-12) and hermiticity (1e-10)", ok, res,
                           [f"worst norm drift {worst_n:.1e}", f"worst hermiticity {worst_h:.1e}"])


# ---------------------------------------------------------------- 5

def well_matrix_levels(alpha: float, n_points: int, a: float = 1.0, k: int = 3) -> np.ndarray:
    """Regularized-wall eigenvalues; the walls sit midway between samples."""
    length = 4.0 * a
    g = make_grid(n_points, length, x_center=0.5 * length / n_points)
    h = eigensolve.build_hamiltonian_matrix(Potential("infinite_well", a=a), g, FqmParams(alpha))
    return eigensolve.eigenstates(h, k).spectrum.energies


def delta_matrix_levels(alpha: float, n_points: int, gamma: float = 1.0) -> np.ndarray:
    g = make_grid(n_points, 16.0)
    h = eigensolve.build_hamiltonian_matrix(Potential("delta_well", gamma=gamma), g,
                                            FqmParams(alpha))
    return eigensolve.eigenstates(h, 1).spectrum.energies


def linear_matrix_levels(alpha: float, n_points: int, force: float = 1.0, k: int = 3) -> np.ndarray:
    """Odd states of V = F |x|: at alpha = 2 exactly the wall problem, with no wall to regularize."""
    g = make_grid(n_points, 24.0)
    h = eigensolve.build_hamiltonian_matrix(Potential("power_law", q2=force, beta_exp=1.0), g,
                                            FqmParams(alpha))
    r = eigensolve.eigenstates(h, 2 * k + 1)
    odd = [e for e, par in zip(r.spectrum.energies, r.parities) if par == "odd"]
    return np.array(odd[:k])


def criterion_5(alphas=(1.5, 2.0), grids=(512, 1024, 2048)) -> CriterionResult:
    """Matrix eigensolve vs closed forms: well and delta 1%, linear 0.1%, improving with N."""
    res, details, ok = {}, [], True
    for a in alphas:
        p = FqmParams(a)
        exact = {"well": spectra.infinite_well_levels(1.0, 3, p).energies,
                 "delta": np.array([spectra.delta_well_energy(1.0, p)]),
                 "linear": spectra.linear_potential_levels(1.0, 3, p).energies}
        solvers = {"well": well_matrix_levels, "delta": delta_matrix_levels,
                   "linear": linear_matrix_levels}
        tols = {"well": 1e-2, "delta": 1e-2, "linear": 1e-3}
        for model, solve in solvers.items():
            errs = [float(np.max(np.abs(solve(a, n) / exact[model] - 1))) for n in grids]
            improving = all(e2 <= e1 * (1 + 1e-9) for e1, e2 in zip(errs, errs[1:]))
            good = errs[-1] < tols[model] and (improving or errs[-1] < 1e-8)
            ok = ok and good
            res[f"{model} a={a}"] = errs[-1]
            details.append(f"{model} a={a}: rel err {errs[-1]:.2e} "
                           f"({'improving' if improving else 'not improving'}) "
                           f"{'ok' if good else 'FAIL'}")
    return CriterionResult(5, "eigen-spectra cross-validation", ok, res, details)


# ---------------------------------------------------------------- 6

def criterion_6() -> CriterionResult:
    g = _packet_grid()
    p = FqmParams(1.5)
    psi = gaussian(g, 0.0, 1.0, momentum=1.0)
    r = dynamics.composition_residual(psi, 0.3, 0.7, p)
    return CriterionResult(6, "kernel composition 0.3 + 0.7 (L2 < 1e-6)", r < 1e-6,
                           {"residual": r}, [f"L2 residual {r:.2e}"])


# ---------------------------------------------------------------- 7

def criterion_7() -> CriterionResult:
    res = {}
    for a in (1.5, 1.8):
        for lam in (2.0, 3.0):
            res[f"a={a} lam={lam}"] = dynamics.scaling_check(None, lam, FqmParams(a))
    ok = all(v < 1e-8 for v in res.values())
    return CriterionResult(7, "kernel scaling law (pointwise 1e-8)", ok, res,
                           [f"max rel defect {max(res.values()):.1e} over 4 cases"])


# ---------------------------------------------------------------- 8

def criterion_8() -> CriterionResult:
    res, details = {}, []
    p = FqmParams(1.5)
    g = make_grid(1024, 40.0)
    # free trace
    rho = statmech.free_density_matrix(g, 1.0, p)
    z = statmech.partition_function(rho)
    z_formula = statmech.free_partition_function(g.length, 1.0, p)
    res["trace"] = _rel(z, z_formula)
    details.append(f"trace rel err {res['trace']:.1e}")
    # Bloch vs free on the periodic box
    bloch = statmech.bloch_propagate(Potential(), g, 1.0, 4, p)
    free_per = statmech.free_density_matrix(g, 1.0, p, periodic=True)
    res["bloch_vs_free"] = float(np.max(np.abs(bloch.kernel - free_per.kernel)))
    details.append(f"Bloch vs free {res['bloch_vs_free']:.1e}")
    # ground-state fidelity, harmonic alpha = 1.5
    g2 = make_grid(256, 16.0)
    v = Potential.harmonic(1.0)
    ground = eigensolve.eigenstates(eigensolve.build_hamiltonian_matrix(v, g2, p), 1).states[0]
    rho_big = statmech.bloch_propagate(v, g2, 12.0, 1200, p)
    res["fidelity"] = rho_big.ground_state_fidelity(ground.values.real)
    details.append(f"fidelity {res['fidelity']:.6f}")
    # classical limit
    devs = []
    for beta in (2.0, 1.0, 0.5, 0.25, 0.125):
        zb = statmech.partition_function(statmech.bloch_propagate(v, g, beta, 40, p))
        zc = statmech.classical_partition_function(v, beta, p)
        devs.append(abs(zb - zc) / zc)
    mono = all(b < a for a, b in zip(devs, devs[1:]))
    res["classical_dev_smallest_beta"] = devs[-1]
    details.append("classical deviation " + ", ".join(f"{d:.1e}" for d in devs)
                   + (" monotone" if mono else " NOT monotone"))
    ok = (res["trace"] < 1e-8 and res["bloch_vs_free"] < 1e-6 and res["fidelity"] > 0.999 and mono)
    return CriterionResult(8, "statistical mechanics", ok, res, details)


# ---------------------------------------------------------------- 9

def continuity_order(alpha: float, steps=(10, 20, 40, 80)) -> List[float]:
    g = _packet_grid()
    psi = gaussian(g, 0.0, 1.0, momentum=2.0)
    return [dynamics.continuity_defect(psi, 1.0, n, FqmParams(alpha)) for n in steps]


def criterion_9() -> CriterionResult:
    res, details = {}, []
    ok = True
    for a in (2.0, 1.5):
        d = continuity_order(a)
        order = math.log2(d[-2] / d[-1])
        res[f"order a={a}"] = order
        good = order >= 1.0
        ok = ok and good
        details.append(f"continuity a={a}: residuals {d[0]:.2e}..{d[-1]:.2e}, order {order:.2f}"
                       f" {'ok' if good else 'FAIL'}")
    g = make_grid(512, 40.0)
    worst = 0.0
    for a in (1.5, 2.0):
        p = FqmParams(a)
        k = 9
        v = riesz.group_velocity(g.dp(p.hbar) * k, p)
        pw = plane_wave(g, k, math.sqrt(a / (2 * v)))
        worst = max(worst, float(np.max(np.abs(riesz.current_density(pw, p).j - 1.0))))
    res["unit_current"] = worst
    ok = ok and worst < 1e-10
    details.append(f"plane-wave current |j-1| {worst:.1e}")
    return CriterionResult(9, "continuity order >= 1 and unit current (1e-10)", ok, res, details)


CRITERIA: Dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1, 2: criterion_2, 3: criterion_3, 4: criterion_4, 5: criterion_5,
    6: criterion_6, 7: criterion_7, 8: criterion_8, 9: criterion_9,
}


def run_criterion(number: int) -> CriterionResult:
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", dynamics.BoundaryMassWarning)
        result = CRITERIA[number]()
    result.seconds = time.perf_counter() - t0
    return result


def run_all(selected: Optional[List[int]] = None) -> List[CriterionResult]:
    return [run_criterion(n) for n in (selected or sorted(CRITERIA))]
