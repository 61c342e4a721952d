"""Command-line front end: ``fqm <subcommand> --config run.toml [--out dir] [--workers N]``.

Config is TOML with sections ``[physics]``, ``[grid]``, ``[potential]`` and
one section named after the subcommand; see ``docs/config.md`` for the
schema.  ``physics.alpha`` may be a list, in which case every value is an
independent job of the sweep.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
import tomli
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import __version__, dynamics, eigensolve, foxh, riesz, spectra, statmech, validation
from .core import FqmParams, Potential, gaussian, make_grid

SCHEMA_VERSION = 1
SUBCOMMANDS = ("evolve", "kernel", "spectra", "eigen", "statmech", "validate")

EXIT_OK, EXIT_FAILED, EXIT_CONFIG, EXIT_DOMAIN, EXIT_RUNTIME = 0, 1, 2, 3, 4


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PhysicsConfig(_Section):
    alpha: Union[float, List[float]] = 1.5
    d_alpha: float = Field(1.0, gt=0)
    hbar: float = Field(1.0, gt=0)


class GridConfig(_Section):
    n_points: int = Field(1024, ge=8)
    length: float = Field(40.0, gt=0)
    x_center: float = 0.0


class PotentialConfig(_Section):
    kind: Literal["free", "infinite_well", "delta_well", "linear", "power_law"] = "free"
    a: float = Field(1.0, gt=0)
    gamma: float = Field(1.0, gt=0)
    force: float = Field(1.0, gt=0)
    q2: float = Field(1.0, gt=0)
    beta_exp: float = Field(2.0, gt=0)
    wall: float = Field(1.0e6, gt=0)
    width: Optional[float] = Field(None, gt=0)
    center: float = 0.0

    def build(self) -> Potential:
        return Potential(**self.model_dump())


class EvolveConfig(_Section):
    method: Literal["spectral", "splitstep", "kernel"] = "spectral"
    center: float = 0.0
    width: float = Field(1.0, gt=0)
    momentum: float = 1.0
    t_final: float = Field(1.0, gt=0)
    n_frames: int = Field(4, ge=1)
    steps_per_frame: int = Field(100, ge=1)


class KernelConfig(_Section):
    quantity: Literal["real_time", "density", "density_3d", "stable", "gen_airy"] = "density"
    x: List[float] = Field(default_factory=lambda: [0.0, 0.5, 1.0, 2.0, 4.0])
    t: float = Field(1.0, gt=0)
    beta: float = Field(1.0, gt=0)
    rel_tol: float = Field(1e-12, gt=0)


class SpectraConfig(_Section):
    models: List[Literal["infinite_well", "bohr_atom", "oscillator", "delta_well", "linear"]] = \
        Field(default_factory=lambda: ["infinite_well", "bohr_atom", "oscillator", "delta_well",
                                       "linear"])
    n_levels: int = Field(3, ge=1)
    a: float = Field(1.0, gt=0)
    z: float = Field(1.0, gt=0)
    e2: float = Field(1.0, gt=0)
    q2: float = Field(1.0, gt=0)
    beta_exp: float = Field(2.0, gt=0)
    gamma: float = Field(1.0, gt=0)
    force: float = Field(1.0, gt=0)


class EigenConfig(_Section):
    n_states: int = Field(3, ge=1)
    write_states: bool = True


class StatmechConfig(_Section):
    beta: List[float] = Field(default_factory=lambda: [0.25, 0.5, 1.0, 2.0])
    steps_per_unit_beta: int = Field(40, ge=1)
    ground_state_fidelity: bool = True


class ValidateConfig(_Section):
    criteria: List[int] = Field(default_factory=lambda: sorted(validation.CRITERIA))


class RunConfig(_Section):
    physics: PhysicsConfig = Field(default_factory=PhysicsConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    potential: PotentialConfig = Field(default_factory=PotentialConfig)
    evolve: EvolveConfig = Field(default_factory=EvolveConfig)
    kernel: KernelConfig = Field(default_factory=KernelConfig)
    spectra: SpectraConfig = Field(default_factory=SpectraConfig)
    eigen: EigenConfig = Field(default_factory=EigenConfig)
    statmech: StatmechConfig = Field(default_factory=StatmechConfig)
    validate_: ValidateConfig = Field(default_factory=ValidateConfig, alias="validate")
    workers: Optional[int] = Field(None, ge=1)

    @property
    def alphas(self) -> List[float]:
        a = self.physics.alpha
        return list(a) if isinstance(a, list) else [a]

    def resolved(self) -> dict:
        return self.model_dump(by_alias=True)


class CliError(Exception):
    def __init__(self, kind: str, errors: list, code: int):
        super().__init__(kind)
        self.kind, self.errors, self.code = kind, errors, code


# ---------------------------------------------------------------- config


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = tomli.load(fh)
    except OSError as exc:
        raise CliError("io", [{"loc": "config", "msg": str(exc)}], EXIT_CONFIG) from exc
    except tomli.TOMLDecodeError as exc:
        raise CliError("parse", [{"loc": "config", "msg": str(exc)}], EXIT_CONFIG) from exc
    try:
        cfg = RunConfig.model_validate(raw)
    except ValidationError as exc:
        errs = [{"loc": ".".join(str(p) for p in e["loc"]), "msg": e["msg"]} for e in exc.errors()]
        raise CliError("schema", errs, EXIT_CONFIG) from exc
    check_domain(cfg)
    return cfg


def check_domain(cfg: RunConfig) -> None:
    """Physics-domain checks, done before any computation."""
    errs = []
    for i, a in enumerate(cfg.alphas):
        if not 1.0 < a <= 2.0:
            loc = "physics.alpha" if not isinstance(cfg.physics.alpha, list) else f"physics.alpha.{i}"
            errs.append({"loc": loc, "msg": f"alpha = {a} lies outside (1, 2]"})
    bad = [c for c in cfg.validate_.criteria if c not in validation.CRITERIA]
    if bad:
        errs.append({"loc": "validate.criteria", "msg": f"unknown criteria {bad}"})
    if errs:
        raise CliError("domain", errs, EXIT_DOMAIN)


def resolve_workers(flag: Optional[int], cfg: RunConfig) -> int:
    if flag is not None:
        return max(1, flag)
    if cfg.workers is not None:
        return cfg.workers
    env = os.environ.get("FQM_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise CliError("environment", [{"loc": "FQM_WORKERS", "msg": f"not an integer: {env!r}"}],
                           EXIT_CONFIG) from None
    return 1


# ---------------------------------------------------------------- jobs
# Each job returns {"json": payload or None, "csv": (header, rows) or None}.


def _params(cfg: RunConfig, alpha: float) -> FqmParams:
    return FqmParams(alpha, cfg.physics.d_alpha, cfg.physics.hbar)


def _grid(cfg: RunConfig):
    return make_grid(cfg.grid.n_points, cfg.grid.length, cfg.grid.x_center)


def job_evolve(cfg: RunConfig, alpha: float) -> dict:
    p, g, ev = _params(cfg, alpha), _grid(cfg), cfg.evolve
    v = cfg.potential.build()
    psi = gaussian(g, ev.center, ev.width, momentum=ev.momentum, hbar=p.hbar)
    if ev.method in ("spectral", "kernel") and v.kind != "free":
        raise ValueError(f"method {ev.method!r} is free evolution; use 'splitstep' with a potential")
    rows, dt = [], ev.t_final / ev.n_frames
    norms = []
    for k in range(ev.n_frames + 1):
        t = k * dt
        if k == 0:
            cur = psi
        elif ev.method == "spectral":
            cur = dynamics.evolve_free(psi, t, p)
        elif ev.method == "kernel":
            cur = dynamics.propagate_with_kernel(psi, t, p)
        else:
            cur = dynamics.evolve_splitstep(cur, v, dt, ev.steps_per_frame, p)
        rho = np.abs(cur.values) ** 2
        j = riesz.current_density(cur, p).j
        norms.append(cur.norm2())
        rows.extend((t, x, r, jj) for x, r, jj in zip(g.x, rho, j))
    summary = {"frames": ev.n_frames + 1, "norm": [float(n) for n in norms]}
    return {"json": summary, "csv": (["t", "x", "rho", "j"], rows)}


def job_kernel(cfg: RunConfig, alpha: float) -> dict:
    p, kc = _params(cfg, alpha), cfg.kernel
    ctl = foxh.SeriesControl(rel_tol=kc.rel_tol)
    out = []
    for x in kc.x:
        if kc.quantity == "real_time":
            kv = foxh.free_kernel_1d(x, kc.t, p, ctl)
            out.append({"x": x, "re": float(np.real(kv.value)), "im": float(np.imag(kv.value)),
                        "abs_error_estimate": float(kv.abs_error_estimate), "regime": kv.regime})
        elif kc.quantity == "density":
            out.append({"x": x, "value": float(foxh.free_density_matrix_1d(x, kc.beta, p, ctl))})
        elif kc.quantity == "density_3d":
            out.append({"r": x, "value": float(foxh.free_density_matrix_3d_radial(x, kc.beta, p, ctl))})
        elif kc.quantity == "stable":
            kv = foxh.stable_kernel(x, alpha, ctl)
            out.append({"u": x, "value": float(np.real(kv.value)),
                        "abs_error_estimate": float(kv.abs_error_estimate), "regime": kv.regime})
        else:
            out.append({"z": x, "value": float(foxh.gen_airy(x, alpha, ctl))})
    return {"json": {"quantity": kc.quantity, "t": kc.t, "beta": kc.beta, "values": out},
            "csv": None}


def job_spectra(cfg: RunConfig, alpha: float) -> dict:
    p, sc = _params(cfg, alpha), cfg.spectra
    n = sc.n_levels
    table = {}
    for model in sc.models:
        if model == "infinite_well":
            s = spectra.infinite_well_levels(sc.a, n, p)
        elif model == "bohr_atom":
            s = spectra.bohr_atom(sc.z, sc.e2, n, p).spectrum()
        elif model == "oscillator":
            s = spectra.oscillator_levels_semiclassical(sc.q2, sc.beta_exp, n - 1, p)
        elif model == "delta_well":
            s = spectra.delta_well_levels(sc.gamma, p)
        else:
            s = spectra.linear_potential_levels(sc.force, n, p)
        table[model] = s.to_dict()
    return {"json": {"models": table}, "csv": None}


def job_eigen(cfg: RunConfig, alpha: float) -> dict:
    p, g = _params(cfg, alpha), _grid(cfg)
    h = eigensolve.build_hamiltonian_matrix(cfg.potential.build(), g, p)
    res = eigensolve.eigenstates(h, cfg.eigen.n_states)
    payload = {"spectrum": res.spectrum.to_dict(), "parities": list(res.parities),
               "hermiticity_defect": h.hermiticity_defect()}
    table = None
    if cfg.eigen.write_states:
        rows = [(n, x, float(v)) for n, st in enumerate(res.states)
                for x, v in zip(g.x, st.values.real)]
        table = (["n", "x", "psi"], rows)
    return {"json": payload, "csv": table}


def job_statmech(cfg: RunConfig, alpha: float) -> dict:
    p, g, sc = _params(cfg, alpha), _grid(cfg), cfg.statmech
    v = cfg.potential.build()
    rows = []
    for beta in sorted(sc.beta):
        steps = max(1, int(np.ceil(beta * sc.steps_per_unit_beta)))
        rho = statmech.bloch_propagate(v, g, beta, steps, p)
        entry = {"beta": beta, "n_steps": steps, "Z": statmech.partition_function(rho),
                 "symmetry_defect": rho.symmetry_defect()}
        if v.kind == "free":
            entry["Z_free_formula"] = statmech.free_partition_function(g.length, beta, p)
        elif v.kind in ("power_law", "linear", "infinite_well"):
            entry["Z_classical"] = statmech.classical_partition_function(v, beta, p)
        if sc.ground_state_fidelity and v.kind != "free":
            ground = eigensolve.eigenstates(eigensolve.build_hamiltonian_matrix(v, g, p), 1).states[0]
            entry["ground_state_fidelity"] = rho.ground_state_fidelity(ground.values.real)
        rows.append(entry)
    return {"json": {"betas": rows}, "csv": None}


def job_validate(cfg: RunConfig, number: int) -> dict:
    r = validation.run_criterion(number)
    print(r.line(), flush=True)
    return {"json": r.to_dict(), "csv": None}


JOBS = {"evolve": job_evolve, "kernel": job_kernel, "spectra": job_spectra, "eigen": job_eigen,
        "statmech": job_statmech, "validate": job_validate}


def _run_job(sub: str, cfg: RunConfig, key) -> dict:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            res = JOBS[sub](cfg, key)
        except Exception as exc:  # reported per job, never swallowed
            return {"error": {"type": type(exc).__name__, "msg": str(exc)}}
    res["warnings"] = sorted({f"{w.category.__name__}: {w.message}" for w in caught})
    return res


# ---------------------------------------------------------------- output


def _header(sub: str, cfg: RunConfig, key) -> dict:
    return {"schema_version": SCHEMA_VERSION, "code_version": __version__, "subcommand": sub,
            "job": key, "config": cfg.resolved()}


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _job_name(sub: str, key) -> str:
    return f"{sub}_criterion{key}" if sub == "validate" else f"{sub}_alpha{key:g}"


def write_outputs(sub: str, cfg: RunConfig, keys: list, results: list, out: Path) -> List[str]:
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for key, res in zip(keys, results):
        name = _job_name(sub, key)
        if res.get("csv"):
            header, rows = res["csv"]
            path = out / f"{name}.csv"
            with open(path, "w", newline="") as fh:
                fh.write("# " + json.dumps(_header(sub, cfg, key), sort_keys=True) + "\n")
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows([[repr(float(c)) if isinstance(c, (float, np.floating)) else c
                              for c in row] for row in rows])
            files.append(path.name)
    summary = _header(sub, cfg, None)
    summary["jobs"] = [{"job": k, "name": _job_name(sub, k),
                        **{f: r[f] for f in ("json", "error", "warnings") if f in r}}
                       for k, r in zip(keys, results)]
    path = out / f"{sub}.json"
    path.write_text(_dump(summary))
    files.append(path.name)
    return files


def _error_report(exc: CliError, out: Optional[Path]) -> None:
    report = {"schema_version": SCHEMA_VERSION, "code_version": __version__, "status": "error",
              "error_type": exc.kind, "errors": exc.errors}
    text = _dump(report)
    sys.stderr.write(text)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(text)
        except OSError:
            pass


# ---------------------------------------------------------------- entry points


def run(sub: str, config_path, out_dir=None, workers: Optional[int] = None) -> int:
    """Run one subcommand; returns the process exit code."""
    out = Path(out_dir) if out_dir is not None else None
    try:
        if sub not in JOBS:
            raise CliError("usage", [{"loc": "subcommand", "msg": f"unknown {sub!r}"}], EXIT_CONFIG)
        cfg = load_config(config_path)
        out = out or Path("fqm_out")
        n_workers = resolve_workers(workers, cfg)
        keys = cfg.validate_.criteria if sub == "validate" else cfg.alphas
        if n_workers > 1 and len(keys) > 1:
            with ProcessPoolExecutor(max_workers=min(n_workers, len(keys))) as pool:
                results = list(pool.map(_run_job, [sub] * len(keys), [cfg] * len(keys), keys))
        else:
            results = [_run_job(sub, cfg, k) for k in keys]
        files = write_outputs(sub, cfg, keys, results, out)
        failed = [k for k, r in zip(keys, results) if "error" in r]
        if failed:
            raise CliError("runtime", [{"loc": f"job.{k}", **r["error"]}
                                       for k, r in zip(keys, results) if "error" in r], EXIT_RUNTIME)
    except CliError as exc:
        _error_report(exc, out)
        return exc.code
    for f in files:
        print(out / f)
    if sub == "validate" and not all(r["json"]["passed"] for r in results):
        return EXIT_FAILED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fqm", description="Fractional quantum mechanics toolkit.")
    ap.add_argument("--version", action="version", version=f"fqm {__version__}")
    subs = ap.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sp = subs.add_parser(name)
        sp.add_argument("--config", required=True, help="TOML run configuration")
        sp.add_argument("--out", default="fqm_out", help="output directory (default fqm_out)")
        sp.add_argument("--workers", type=int, default=None,
                        help="parallel jobs (default: config, then $FQM_WORKERS, then 1)")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return run(args.subcommand, args.config, args.out, args.workers)


if __name__ == "__main__":
    sys.exit(main())
