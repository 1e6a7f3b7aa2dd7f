"""Verification suites behind the verify-* and benchmark CLI subcommands.

Each suite returns a report of named checks with measured margins; the CLI
exits nonzero if any check fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import barriers as bar
from . import diagnostics as diag
from .config import RunConfig
from .geometry import ForcingField, validate_assumptions
from .initial_data import build_u0, verify_initial_properties
from .potential import DoubleWellPotential, Profile, sigma as sigma_of
from .runner import run_single


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    message: str


@dataclass
class VerifyReport:
    title: str
    checks: list[Check]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        out = [f"== {self.title} =="]
        for c in self.checks:
            out.append(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.message}")
        out.append(f"=> {'all passed' if self.all_passed else 'FAILURES PRESENT'}")
        return out


def verify_initial(cfg: RunConfig, eps: float | None = None) -> VerifyReport:
    """Well-preparedness of the initial datum at the finest (or given) eps."""
    eps = eps if eps is not None else min(cfg.eps_list)
    geom = cfg.geometry()
    grid = cfg.grid_for(eps)
    spec = cfg.initial_spec(eps)
    spec.validate_against(geom.obstacles_plus, geom.obstacles_minus)
    state = build_u0(grid, spec)
    report = verify_initial_properties(state, spec, grid, geometry=geom)
    checks = [Check(c.name, c.passed, c.value, c.message) for c in report.checks]
    assumptions = validate_assumptions(geom, cfg.m0())
    for c in assumptions.checks:
        checks.append(Check(c.name, c.passed,
                            c.margin if c.margin is not None else math.nan,
                            c.message))
    return VerifyReport(f"initial data at eps = {eps:g}", checks)


def verify_barriers(cfg: RunConfig) -> VerifyReport:
    """Static barrier checks: algebra, gradient threshold, residual sign per eps."""
    geom = cfg.geometry()
    assumptions = validate_assumptions(geom, cfg.m0())
    if not assumptions.all_passed:
        raise ValueError("geometry/initial-interface assumptions fail:\n"
                         + "\n".join(assumptions.lines()))
    pot = DoubleWellPotential()
    profile = Profile()
    checks: list[Check] = []
    passing_eps: list[float] = []
    for eps in cfg.eps_list:
        grid = cfg.grid_for(eps)
        forcing = ForcingField.build(grid, geom, eps)
        specs = bar.barrier_specs_for(geom, eps, cfg.beta_star, cfg.c_star_star, pot)
        if not specs:
            raise ValueError("no obstacles, so no barriers to verify")
        eps_ok = True
        for spec in specs:
            tag = f"eps={eps:g} {spec.kind}@({spec.y[0]:g},{spec.y[1]:g})"
            rho0 = spec.r0
            val = float(bar.barrier_r_minus(rho0, spec))
            ok = abs(val - spec.s_gamma) <= 1e-12
            checks.append(Check(f"level-balance {tag}", ok, val,
                                f"r(R0) = {val:.3e} vs s_gamma = {spec.s_gamma:.3e}"))
            rim_val = float(bar.barrier_r_minus(spec.rim * (1 - 1e-6), spec))
            checks.append(Check(f"rim-blowup {tag}", rim_val < -1e3, rim_val,
                                f"r near rim = {rim_val:.3e} (should be < -1e3)"))
            rr = np.linspace(1e-6, spec.rim * (1 - 1e-6), 10000)
            gsq = bar.barrier_grad_sq(rr, spec)
            inside, outside = rr < spec.r0, rr > spec.r0
            thr_ok = bool(np.all(gsq[inside] < 1.0)
                          and np.all(gsq[outside] >= 1.0 - 1e-12))
            checks.append(Check(f"gradient-threshold {tag}", thr_ok,
                                float(np.max(gsq[inside])),
                                "|grad r| crosses 1 exactly at R0 "
                                f"(max inside = {np.sqrt(np.max(gsq[inside])):.6f})"))
            res = bar.barrier_residual(spec, grid, forcing.values, pot, profile)
            checks.append(Check(f"residual-sign {tag}", res.passes,
                                res.max_residual,
                                f"max residual {res.max_residual:.4g} over "
                                f"{res.n_samples} samples (needs <= 0)"))
            eps_ok = eps_ok and res.passes
        if eps_ok:
            passing_eps.append(eps)
        # gap against the prepared initial datum: the interpolated barrier at
        # t = 0 must sit below (above) it
        spec0 = cfg.initial_spec(eps)
        state0 = build_u0(grid, spec0, profile)
        for spec in specs:
            gap = bar.barrier_gap(state0, spec, profile)
            checks.append(Check(f"initial-ordering eps={eps:g} {spec.kind}",
                                gap >= -1e-12, gap,
                                f"t=0 barrier gap = {gap:.3e} (needs >= 0)"))
    gate = max(passing_eps) if passing_eps else math.nan
    checks.append(Check("eps1-gate", bool(passing_eps), gate,
                        f"largest eps with residual sign certified: {gate:g}"
                        if passing_eps else "no eps in the sweep passes"))
    return VerifyReport("barrier suite", checks)


@dataclass
class ComparisonResult:
    eps: float
    t_static: float
    times: list
    gaps_sub: list          # min over sub barriers at each sampled time
    gaps_super: list
    min_gap_static_sub: float    # over sampled times with t >= eps^{beta*}
    min_gap_static_super: float
    min_gap_interp_sub: float    # over sampled times with t < eps^{beta*}
    min_gap_interp_super: float
    sup_abs_u: float


def verify_comparison(cfg: RunConfig, eps: float, t_factor: float = 1.05,
                      n_checks: int = 16) -> ComparisonResult:
    """Evolve past t = eps^{beta*} and track the barrier gaps along the way.

    The interpolated barrier bounds the solution from t = 0; the static barrier
    takes over at eps^{beta*}. Gaps are evaluated at ~n_checks times, always
    including the handover time and the final time. Lighter than run_single:
    no per-checkpoint measures, just the comparison.
    """
    from .runner import prepare_run
    from .solver import advance

    t_static = eps ** cfg.beta_star
    t_end = t_factor * t_static
    setup = prepare_run(cfg, eps, t_end=t_end)
    if not setup.barrier_specs:
        raise ValueError("config has no obstacles, nothing to compare against")
    n_static = math.ceil(t_static / setup.dt)
    marks = sorted(set(
        [max(1, round(k * setup.n_steps / n_checks)) for k in range(1, n_checks + 1)]
        + [min(n_static, setup.n_steps), setup.n_steps]))

    times, gaps_sub, gaps_super = [0.0], [], []
    subs = [s for s in setup.barrier_specs if s.kind == "sub"]
    sups = [s for s in setup.barrier_specs if s.kind == "super"]

    def eval_gaps(state):
        gs = min(bar.barrier_gap(state, s, setup.profile) for s in subs) \
            if subs else math.nan
        gp = min(bar.barrier_gap(state, s, setup.profile) for s in sups) \
            if sups else math.nan
        gaps_sub.append(gs)
        gaps_super.append(gp)

    eval_gaps(setup.state0)
    state = setup.state0
    sup_abs = 0.0
    prev = 0
    for mark in marks:
        res = advance(state, setup.forcing, setup.dt, mark - prev, setup.pot,
                      dissipation="rect")
        state, prev = res.state, mark
        sup_abs = max(sup_abs, res.sup_abs_u)
        times.append(state.t)
        eval_gaps(state)

    times_arr = np.asarray(times)
    static_mask = times_arr >= t_static * (1.0 - 1e-9)
    interp_mask = ~static_mask

    def masked_min(vals, mask):
        arr = np.asarray(vals, dtype=float)[mask]
        arr = arr[~np.isnan(arr)]
        return float(np.min(arr)) if arr.size else math.nan

    return ComparisonResult(
        eps, t_static, times, gaps_sub, gaps_super,
        masked_min(gaps_sub, static_mask), masked_min(gaps_super, static_mask),
        masked_min(gaps_sub, interp_mask), masked_min(gaps_super, interp_mask),
        sup_abs)


def benchmark_circle(cfg: RunConfig, eps: float | None = None,
                     t_end: float = 0.02, rel_tol: float = 0.03) -> VerifyReport:
    """Shrinking-circle law: extracted radius vs sqrt(r0^2 - 2t), no forcing."""
    import copy

    eps = eps if eps is not None else min(cfg.eps_list)
    cfg = copy.deepcopy(cfg)
    cfg.obstacles_plus, cfg.obstacles_minus = [], []
    cfg.barriers_enabled = False
    cfg.m0_kind = "circle"
    r0 = cfg.m0_radius
    if r0 * r0 <= 2.0 * t_end:
        raise ValueError("circle vanishes before t_end; shorten the run")
    result = run_single(cfg, eps, None, t_end=t_end)
    polylines, _, closed = diag.extract_interface(result.final_state.u,
                                                  result.final_state.grid)
    checks = []
    if not polylines:
        checks.append(Check("interface-extracted", False, 0.0,
                            "no zero level set found"))
        return VerifyReport("shrinking-circle benchmark", checks)
    longest = max(polylines, key=len)
    cx, cy = cfg.m0_center
    radii = np.hypot(longest[:, 0] - cx, longest[:, 1] - cy)
    r_mean = float(np.mean(radii))
    r_exact = math.sqrt(r0 * r0 - 2.0 * t_end)
    rel = abs(r_mean - r_exact) / r_exact
    checks.append(Check("interface-extracted", True, float(len(longest)),
                        f"{len(polylines)} polyline(s), longest has "
                        f"{len(longest)} vertices"))
    checks.append(Check("radius-law", rel <= rel_tol, r_mean,
                        f"radius {r_mean:.5f} vs exact {r_exact:.5f} "
                        f"(rel dev {100 * rel:.2f}%, tol {100 * rel_tol:g}%)"))
    checks.append(Check("max-principle", result.sup_abs_u < 1.0, result.sup_abs_u,
                        f"sup |u| = {result.sup_abs_u:.17g}"))
    return VerifyReport(f"shrinking-circle benchmark at eps = {eps:g}", checks)
