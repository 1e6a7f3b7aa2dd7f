"""Run orchestration: single runs, eps sweeps, checkpoint diagnostics, manifests.

A run is deterministic: dt is fixed up front, checkpoints land on fixed step
indices, and all outputs serialize with fixed precision, so identical configs
produce byte-identical artifacts. Sweep runs are independent and may execute
in a process pool; outputs go to per-eps subdirectories.
"""

from __future__ import annotations

import math
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import barriers as bar
from . import diagnostics as diag
from .config import C_DISC, FORMAT_VERSIONS, RunConfig, XI_SUP_STRIDE
from .geometry import ForcingField, Grid
from .initial_data import build_u0
from .potential import DoubleWellPotential, Profile, sigma as sigma_of
from .snapshots import write_diagnostics_csv, write_snapshot
from .solver import PhaseState, advance, forcing_dt_cap, stable_dt


@dataclass
class RunResult:
    eps: float
    records: list
    final_state: PhaseState
    sup_abs_u: float
    flagged_cells: int
    dt: float
    n_steps: int
    collar_clean: bool
    mu0: float
    xi_sup_run: float = float("nan")
    outdir: Path | None = None
    csv_path: Path | None = None


@dataclass
class RunSetup:
    cfg: RunConfig
    eps: float
    geom: object
    grid: Grid
    forcing: ForcingField
    state0: PhaseState
    dt: float
    n_steps: int
    checkpoint_steps: list[int]
    barrier_specs: list = field(default_factory=list)
    pot: DoubleWellPotential = field(default_factory=DoubleWellPotential)
    profile: Profile = field(default_factory=Profile)

    @property
    def sigma(self) -> float:
        return sigma_of(self.pot)


def prepare_run(cfg: RunConfig, eps: float, t_end: float | None = None) -> RunSetup:
    geom = cfg.geometry()
    grid = cfg.grid_for(eps)
    pot = DoubleWellPotential()
    profile = Profile()
    forcing = ForcingField.build(grid, geom, eps)
    spec = cfg.initial_spec(eps)
    spec.validate_against(geom.obstacles_plus, geom.obstacles_minus)
    state0 = build_u0(grid, spec, profile)
    state0.check_max_principle()

    t_end = cfg.t_end if t_end is None else t_end
    dt_max = stable_dt(eps, grid.h, pot, cfg.s_cfl)
    dt_max = min(dt_max, forcing_dt_cap(eps, forcing.c1, pot, cfg.s_cfl))
    if t_end > 0.0:
        n_steps = max(1, math.ceil(t_end / dt_max - 1e-12))
        dt = t_end / n_steps
    else:
        n_steps, dt = 0, dt_max

    if cfg.checkpoint_every is not None:
        every = max(1, cfg.checkpoint_every)
    else:
        every = max(1, n_steps // 24) if n_steps else 1
    checkpoints = list(range(every, n_steps + 1, every))
    if n_steps and (not checkpoints or checkpoints[-1] != n_steps):
        checkpoints.append(n_steps)

    specs = bar.barrier_specs_for(geom, eps, cfg.beta_star, cfg.c_star_star, pot) \
        if cfg.barriers_enabled else []
    return RunSetup(cfg, eps, geom, grid, forcing, state0, dt, n_steps,
                    checkpoints, specs, pot, profile)


def _record_for(setup: RunSetup, state: PhaseState,
                ut2: float) -> diag.DiagnosticsRecord:
    cfg, pot, prof = setup.cfg, setup.pot, setup.profile
    sig = setup.sigma
    u, eps, h = state.u, state.eps, state.h
    g = setup.forcing.values
    mu_total = diag.measure_mu(u, eps, h, sig, pot)
    xi_signed, xi_abs, xi_sup = diag.measure_xi(u, eps, h, sig, pot)
    en = diag.energy_lyapunov(u, eps, h, g, pot)
    gsup = diag.grad_sup(u, eps, h)
    geom = setup.geom
    dens = diag.density_ratio(u, eps, setup.grid, sig, pot, geom.c4, geom.domain,
                              cfg.density_stride, cfg.density_radii)
    _, length, _ = diag.extract_interface(u, setup.grid)
    residual = diag.mass_balance_residual(u, setup.state0.u, ut2, eps, h, g,
                                          sig, pot)

    rec = diag.DiagnosticsRecord(
        t=state.t, energy=en, mu_total=mu_total, xi_total_abs=xi_abs,
        xi_sup=xi_sup, grad_sup=gsup, density_ratio_max=dens,
        interface_length=length, mass_balance_residual=residual)

    if geom.obstacles_plus:
        d0 = geom.obstacles_plus[0]
        mask = diag.ball_mask(setup.grid, d0.cx, d0.cy, 0.8 * geom.r0)
        rec.obstacle_mass = diag.measure_mu(u, eps, h, sig, pot, mask)
    dev = math.nan
    for spec in setup.barrier_specs:
        gap = bar.barrier_gap(state, spec, prof)
        if spec.kind == "sub":
            rec.min_gap_sub = gap if math.isnan(rec.min_gap_sub) \
                else min(rec.min_gap_sub, gap)
        else:
            rec.min_gap_super = gap if math.isnan(rec.min_gap_super) \
                else min(rec.min_gap_super, gap)
        d = bar.obstacle_convergence_check(state, spec, 0.8 * spec.r0)
        dev = d if math.isnan(dev) else max(dev, d)
    rec.obstacle_dev = dev
    return rec


def run_single(cfg: RunConfig, eps: float, outdir: str | Path | None = None,
               t_end: float | None = None,
               dissipation: str = "simpson") -> RunResult:
    """Advance one eps to t_end, emitting records and snapshots at checkpoints."""
    setup = prepare_run(cfg, eps, t_end)
    sig = setup.sigma
    pot = setup.pot
    g = setup.forcing.values
    h = setup.grid.h
    mu0 = diag.measure_mu(setup.state0.u, eps, h, sig, pot)

    out = Path(outdir) if outdir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    records = [_record_for(setup, setup.state0, 0.0)]
    if out is not None and cfg.write_snapshots:
        write_snapshot(out / "snapshot_000000.pfob", setup.state0.u, h, eps, 0.0)

    def on_checkpoint(state: PhaseState, ut2: float) -> None:
        records.append(_record_for(setup, state, ut2))
        if out is not None and cfg.write_snapshots:
            write_snapshot(out / f"snapshot_{state.step_index:06d}.pfob",
                           state.u, h, eps, state.t)

    result = advance(setup.state0, setup.forcing, setup.dt, setup.n_steps,
                     pot, on_checkpoint, set(setup.checkpoint_steps),
                     dissipation=dissipation, xi_sup_stride=XI_SUP_STRIDE)

    rr = RunResult(eps=eps, records=records, final_state=result.state,
                   sup_abs_u=result.sup_abs_u, flagged_cells=result.flagged_cells,
                   dt=setup.dt, n_steps=setup.n_steps,
                   collar_clean=setup.forcing.collar_clean, mu0=mu0,
                   xi_sup_run=result.xi_sup_max)
    if out is not None:
        csv_path = out / "diagnostics.csv"
        write_diagnostics_csv(csv_path, records)
        write_manifest(out / "manifest.yaml", cfg, setup, rr, dissipation)
        rr.outdir, rr.csv_path = out, csv_path
    return rr


def git_describe() -> str:
    try:
        return subprocess.run(["git", "describe", "--always", "--dirty"],
                              capture_output=True, text=True, timeout=10,
                              check=True).stdout.strip()
    except Exception:
        return "unknown"


def write_manifest(path: Path, cfg: RunConfig, setup: RunSetup,
                   result: RunResult, dissipation: str = "simpson") -> None:
    geom = setup.geom
    manifest = {
        "config": cfg.to_dict(),
        "derived": {
            "eps": setup.eps,
            "c1": setup.forcing.c1,
            "c4": geom.c4,
            "grid": {"nx": setup.grid.nx, "ny": setup.grid.ny, "h": setup.grid.h},
            "dt": setup.dt,
            "n_steps": setup.n_steps,
            "checkpoint_steps": list(setup.checkpoint_steps),
            "forcing_collar_clean": setup.forcing.collar_clean,
            "forcing_lipschitz_bound": setup.forcing.lipschitz_bound,
            "xi_sup_stride": XI_SUP_STRIDE,
            "dissipation_quadrature": dissipation,
            "sup_abs_u": result.sup_abs_u,
            "flagged_cells": result.flagged_cells,
        },
        "tolerances": {
            "comparison_c_disc": C_DISC,
            "comparison_base_tol": 1e-6,
            "max_principle_flag": 1e-12,
        },
        "formats": FORMAT_VERSIONS,
        "git": git_describe(),
    }
    path.write_text(yaml.safe_dump(manifest, sort_keys=False))


# --- sweeps ---------------------------------------------------------------------

SWEEP_COLUMNS = [
    "eps", "status", "mu0", "mu_final", "xi_time_integral", "xi_sup_max",
    "xi_sup_sqrt_eps", "density_ratio_max", "grad_sup_max", "energy_monotone",
    "mass_balance_final", "min_gap_sub", "min_gap_super", "obstacle_mass_final",
    "obstacle_dev_final", "sup_abs_u", "semidec_rate",
]


@dataclass
class SweepSummary:
    rows: list[dict]
    slope: float

    def by_eps(self, eps: float) -> dict:
        for row in self.rows:
            if row["eps"] == eps:
                return row
        raise KeyError(eps)


def _sweep_row(result: RunResult) -> dict:
    recs = result.records
    t = np.array([r.t for r in recs])
    xi_abs = np.array([r.xi_total_abs for r in recs])
    mu = np.array([r.mu_total for r in recs])
    en = np.array([r.energy for r in recs])
    rises = np.diff(en)
    monotone = bool(np.all(rises <= 1e-10 * abs(en[0])))
    semidec = 0.0
    if len(t) > 1:
        slopes = np.diff(mu) / np.diff(t)
        semidec = float(max(0.0, np.max(slopes)))
    row = {
        "eps": result.eps,
        "status": "ok",
        "mu0": result.mu0,
        "mu_final": recs[-1].mu_total,
        "xi_time_integral": float(np.trapezoid(xi_abs, t)) if len(t) > 1 else 0.0,
        "xi_sup_max": result.xi_sup_run,
        "xi_sup_sqrt_eps": result.xi_sup_run * math.sqrt(result.eps),
        "density_ratio_max": float(np.max([r.density_ratio_max for r in recs])),
        "grad_sup_max": float(np.max([r.grad_sup for r in recs])),
        "energy_monotone": monotone,
        "mass_balance_final": recs[-1].mass_balance_residual,
        "min_gap_sub": _nanmin([r.min_gap_sub for r in recs]),
        "min_gap_super": _nanmin([r.min_gap_super for r in recs]),
        "obstacle_mass_final": recs[-1].obstacle_mass,
        "obstacle_dev_final": recs[-1].obstacle_dev,
        "sup_abs_u": result.sup_abs_u,
        "semidec_rate": semidec,
    }
    return row


def _nanmin(vals) -> float:
    arr = np.asarray(vals, dtype=float)
    return float(np.nanmin(arr)) if not np.all(np.isnan(arr)) else math.nan


def _run_for_sweep(args):
    cfg, eps, outdir = args
    return _sweep_row(run_single(cfg, eps, outdir))


def run_sweep(cfg: RunConfig, outdir: str | Path, threads: int = 1) -> SweepSummary:
    """One run per eps (strictly decreasing, at least 3), plus the fitted decay law."""
    eps_list = list(cfg.eps_list)
    if len(eps_list) < 3:
        raise ValueError("a sweep needs at least 3 eps values")
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(cfg, eps, out / f"eps_{eps:g}") for eps in eps_list]

    def failed_row(eps, exc):
        return {c: math.nan for c in SWEEP_COLUMNS} \
            | {"eps": eps, "status": f"failed: {exc}"}

    rows = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_for_sweep, job) for job in jobs]
            for job, fut in zip(jobs, futures):
                try:
                    rows.append(fut.result())
                except Exception as exc:  # record the failure, keep sweeping
                    rows.append(failed_row(job[1], exc))
    else:
        for job in jobs:
            try:
                rows.append(_run_for_sweep(job))
            except Exception as exc:
                rows.append(failed_row(job[1], exc))
    slope = fit_loglog_slope([r["eps"] for r in rows if r["status"] == "ok"],
                             [r["xi_time_integral"] for r in rows
                              if r["status"] == "ok"])
    _write_sweep_csv(out / "sweep.csv", rows, slope)
    return SweepSummary(rows, slope)


def fit_loglog_slope(eps_vals, integrals) -> float:
    """Least-squares slope of log(integral) against log(eps); positive = decay."""
    eps_vals = [e for e, v in zip(eps_vals, integrals) if v > 0.0]
    vals = [v for v in integrals if v > 0.0]
    if len(vals) < 2:
        return math.nan
    return float(np.polyfit(np.log(eps_vals), np.log(vals), 1)[0])


def _write_sweep_csv(path: Path, rows, slope: float) -> None:
    from .snapshots import format_value
    lines = [",".join(SWEEP_COLUMNS)]
    for row in rows:
        cells = []
        for c in SWEEP_COLUMNS:
            v = row[c]
            if isinstance(v, bool):
                cells.append("1" if v else "0")
            elif isinstance(v, str):
                cells.append(v.replace(",", ";"))
            else:
                cells.append(format_value(v))
        lines.append(",".join(cells))
    lines.append(f"# loglog_slope,{format_value(slope)}")
    path.write_text("\n".join(lines) + "\n")
