import math

import numpy as np
import pytest

from pfob import barriers as bar
from pfob.config import default_config
from pfob.geometry import ForcingField, Grid, Rectangle
from pfob.initial_data import CircleInterface, InitialDataSpec, build_u0
from pfob.potential import DoubleWellPotential, Profile
from pfob.runner import prepare_run

POT = DoubleWellPotential()
UNIT = Rectangle(0.0, 1.0, 0.0, 1.0)


def desk_spec(eps=0.02, kind="sub"):
    return bar.BarrierSpec.build((0.5, 0.5), kind, 0.1, 0.05, eps)


def test_constants_for_unit_example():
    spec = bar.BarrierSpec.build((0.0, 0.0), "sub", 1.0, 1.0, 0.1)
    assert spec.c14 == pytest.approx(4.5)
    assert spec.c15 == pytest.approx(1.5)
    assert float(bar.barrier_r_minus(0.0, spec)) == pytest.approx(0.375)


def test_level_balance_at_r0():
    for eps in (0.08, 0.02):
        spec = desk_spec(eps)
        assert abs(float(bar.barrier_r_minus(spec.r0, spec)) - spec.s_gamma) < 1e-12


def test_rim_blowup_and_domain_error():
    spec = desk_spec()
    val = float(bar.barrier_r_minus(spec.rim * (1 - 1e-6), spec))
    assert val < -1e3
    with pytest.raises(bar.BarrierDomainError):
        bar.barrier_r_minus(spec.rim, spec)
    with pytest.raises(bar.BarrierDomainError):
        bar.barrier_r_minus(spec.rim + 0.01, spec)


def test_monotone_decreasing_in_radius():
    spec = desk_spec()
    rr = np.linspace(0.0, spec.rim * (1 - 1e-9), 5000)
    vals = bar.barrier_r_minus(rr, spec)
    assert np.all(np.diff(vals) < 0.0)


def test_gradient_crosses_one_at_r0():
    spec = desk_spec()
    rr = np.linspace(1e-9, spec.rim * (1 - 1e-9), 10000)
    gsq = bar.barrier_grad_sq(rr, spec)
    assert np.all(gsq[rr < spec.r0] < 1.0)
    assert np.all(gsq[rr > spec.r0] >= 1.0 - 1e-12)
    assert float(bar.barrier_grad_sq(spec.r0, spec)) == pytest.approx(1.0, rel=1e-12)


def test_barrier_u_values():
    spec = desk_spec(0.02)
    # on |x-y| = R0 the barrier sits at the level crossing q(s_gamma) = gamma
    assert float(bar.barrier_u(0.5 + spec.r0, 0.5, spec)) == pytest.approx(0.0, abs=1e-13)
    near_rim = 0.5 + spec.rim * (1 - 1e-5)
    assert float(bar.barrier_u(near_rim, 0.5, spec)) == pytest.approx(-1.0, abs=1e-9)
    # super barrier is the mirror image for the symmetric well
    sup = desk_spec(0.02, "super")
    xs = 0.5 + np.linspace(0.0, spec.rim * 0.98, 200)
    u_minus = bar.barrier_u(xs, 0.5, spec)
    u_plus = bar.barrier_u(xs, 0.5, sup)
    assert np.max(np.abs(u_plus + u_minus)) < 1e-12


def test_residual_sign_all_desk_eps():
    cfg = default_config()
    geom = cfg.geometry()
    for eps in (0.08, 0.04, 0.02):
        grid = cfg.grid_for(eps)
        forcing = ForcingField.build(grid, geom, eps)
        spec = desk_spec(eps)
        rep = bar.barrier_residual(spec, grid, forcing.values)
        assert rep.passes, f"eps={eps}: max residual {rep.max_residual}"
        sup = desk_spec(eps, "super")
        # the lone obstacle is positive, so feed the super barrier the
        # sign-mirrored field it would see around a negative obstacle
        rep2 = bar.barrier_residual(sup, grid, -forcing.values)
        assert rep2.passes


def test_residual_interior_bound_vs_c1():
    # inside the plateau the Laplacian term alone must stay below c1
    cfg = default_config()
    geom = cfg.geometry()
    spec = desk_spec(0.02)
    rr = np.linspace(0.0, spec.r0, 2000)
    lap = bar.barrier_laplacian(rr, spec)
    assert float(np.max(-lap)) <= geom.c1()


def test_clamp_phi0():
    spec = desk_spec(0.02)
    level = spec.clamp_level
    r = np.array([-1.0, 0.0, 0.5 * level, level])
    assert np.array_equal(bar.clamp_phi0(r, spec), r)
    r_over = np.linspace(level, 60 * level, 500)
    vals = bar.clamp_phi0(r_over, spec)
    assert np.all(np.diff(vals) >= 0.0)
    assert np.all(vals <= 2.0 * level * (1 + 1e-12))  # 2 level = (2/3) c** eps^b*
    assert np.max(vals) == pytest.approx(2.0 * level, rel=1e-6)


def test_time_interpolation_endpoints():
    spec = desk_spec(0.02)
    xs = 0.5 + np.linspace(0.0, spec.rim * 0.98, 300)
    ys = np.full_like(xs, 0.5)
    static = bar.barrier_r_minus(np.abs(xs - 0.5), spec)
    at_end = bar.time_interpolated_barrier_r(xs, ys, spec.t_static, spec)
    assert np.max(np.abs(at_end - static)) == 0.0
    at_zero = bar.time_interpolated_barrier_r(xs, ys, 0.0, spec)
    cap23 = (2.0 / 3.0) * spec.c_star_star * spec.eps ** spec.beta_star
    assert np.all(at_zero <= cap23 * (1 + 1e-12))
    low = static <= spec.clamp_level
    assert np.array_equal(at_zero[low], static[low])
    with pytest.raises(bar.BarrierDomainError):
        bar.time_interpolated_barrier_r(xs, ys, 2 * spec.t_static, spec)
    with pytest.raises(bar.BarrierDomainError):
        bar.time_interpolated_barrier_r(xs, ys, -0.1, spec)


def test_initial_gap_nonnegative():
    cfg = default_config()
    for eps in (0.08, 0.02):
        setup = prepare_run(cfg, eps, t_end=0.0)
        spec = desk_spec(eps)
        gap = bar.barrier_gap(setup.state0, spec)
        assert gap >= 0.0


def test_comparison_precondition():
    cfg = default_config()
    setup = prepare_run(cfg, 0.08, t_end=0.0)
    spec = desk_spec(0.08)
    with pytest.raises(bar.BarrierDomainError, match="eps\\^b"):
        bar.comparison_check(setup.state0, spec)


def test_gap_detector_flags_violation():
    cfg = default_config()
    setup = prepare_run(cfg, 0.08, t_end=0.0)
    spec = desk_spec(0.08)
    u_bad = setup.state0.u.copy()
    xx, yy = setup.grid.meshgrid()
    inside = np.hypot(xx - 0.5, yy - 0.5) < spec.r0
    u_bad[inside] = -0.9  # push the field below the sub barrier
    from pfob.solver import PhaseState
    state = PhaseState(u_bad, 0.08, 0.0, 0, setup.grid.h, setup.grid)
    assert bar.barrier_gap(state, spec) < 0.0


def test_obstacle_convergence_initial_value():
    cfg = default_config()
    eps = 0.04
    setup = prepare_run(cfg, eps, t_end=0.0)
    spec = desk_spec(eps)
    dev = bar.obstacle_convergence_check(setup.state0, spec, 0.8 * spec.r0)
    bound = abs(1.0 - math.tanh((2.0 / 3.0) * 0.2 * eps ** 0.25 / eps))
    assert dev == pytest.approx(bound, rel=1e-10)
    with pytest.raises(bar.BarrierDomainError):
        bar.obstacle_convergence_check(setup.state0, spec, spec.r0)
