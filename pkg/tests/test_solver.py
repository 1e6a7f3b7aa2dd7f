import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

import pfob.solver as solver_mod
from pfob.config import default_config
from pfob.diagnostics import energy_lyapunov
from pfob.geometry import Grid, Rectangle
from pfob.potential import DoubleWellPotential
from pfob.runner import prepare_run
from pfob.solver import (MaxPrincipleError, PhaseState, advance, laplacian,
                         rhs, stable_dt, step)

POT = DoubleWellPotential()
UNIT = Rectangle(0.0, 1.0, 0.0, 1.0)


def make_state(u, eps, domain=UNIT):
    ny, nx = u.shape
    h = domain.width / nx
    grid = Grid(domain, nx, ny, h)
    return PhaseState(u=u, eps=eps, t=0.0, step_index=0, h=h, grid=grid)


def test_stable_dt_printed_value():
    got = stable_dt(0.04, 0.008, POT, 0.4)
    assert got == pytest.approx(0.4 * min(1.6e-5, 4e-4), rel=1e-12)
    assert got == pytest.approx(6.4e-6, rel=1e-12)


def test_stable_dt_scalings():
    assert stable_dt(0.04, 0.008, POT, 1.0) == pytest.approx(
        2 * stable_dt(0.04, 0.008, POT, 0.5))
    # halving h quarters the diffusion bound (reaction bound not binding here)
    a = stable_dt(1.0, 0.008, POT, 1.0)
    b = stable_dt(1.0, 0.004, POT, 1.0)
    assert a == pytest.approx(4 * b)


def test_constant_zero_is_fixed_point():
    u = np.zeros((20, 20))
    state = make_state(u, 0.1)
    out = step(state, 0.0, stable_dt(0.1, state.h, POT, 0.4))
    assert np.all(out.u == 0.0)


def test_constant_field_matches_scalar_ode():
    # u identically c evolves by du/dt = -W'(u)/eps^2; diffusion drops out
    eps, c = 0.1, 0.3
    u = np.full((16, 16), c)
    state = make_state(u, eps)
    dt = 1e-5
    n = 2000
    res = advance(state, 0.0, dt, n, POT, dissipation="rect")
    vals = np.unique(res.state.u)
    assert vals.size == 1
    ivp = solve_ivp(lambda t, y: -POT.dw(y) / eps**2, (0.0, n * dt), [c],
                    rtol=1e-10, atol=1e-12)
    assert vals[0] == pytest.approx(ivp.y[0, -1], abs=5e-3)
    assert c < vals[0] < 1.0


def test_near_well_stays_inside():
    eps = 0.1
    u = np.full((8, 8), 1.0 - 1e-9)
    state = make_state(u, eps)
    dt = stable_dt(eps, state.h, POT, 0.4)
    res = advance(state, 0.0, dt, 500, POT, dissipation="rect")
    assert float(np.max(res.state.u)) < 1.0
    assert float(np.min(res.state.u)) > 1.0 - 1e-9 - 1e-15


def test_one_step_matches_naive_stencil():
    rng = np.random.default_rng(7)
    u = rng.uniform(-0.8, 0.8, (12, 15))
    eps, h, dt = 0.1, 0.02, 1e-6
    g = rng.uniform(-2.0, 2.0, u.shape)
    fast = u + dt * rhs(u, eps, h, g, POT)

    ny, nx = u.shape
    slow = np.empty_like(u)
    for j in range(ny):
        for i in range(nx):
            jm, jp = max(j - 1, 0), min(j + 1, ny - 1)
            im, ip = max(i - 1, 0), min(i + 1, nx - 1)
            lap = (u[j, im] + u[j, ip] + u[jm, i] + u[jp, i] - 4 * u[j, i]) / h**2
            s = u[j, i]
            slow[j, i] = s + dt * (lap - (2 * s**3 - 2 * s) / eps**2
                                   + g[j, i] * abs(1 - s * s) / eps)
    assert np.max(np.abs(fast - slow)) < 1e-14


def test_fused_and_numpy_paths_agree():
    if not solver_mod._HAVE_NUMBA:
        pytest.skip("numba unavailable")
    cfg = default_config()
    setup = prepare_run(cfg, 0.08, t_end=5e-4)
    a = advance(setup.state0, setup.forcing, setup.dt, setup.n_steps, setup.pot)
    solver_mod._HAVE_NUMBA = False
    try:
        b = advance(setup.state0, setup.forcing, setup.dt, setup.n_steps,
                    setup.pot)
    finally:
        solver_mod._HAVE_NUMBA = True
    assert float(np.max(np.abs(a.state.u - b.state.u))) < 1e-13
    assert a.ut2_integral == pytest.approx(b.ut2_integral, rel=1e-12)


def test_max_principle_error_reports_location():
    u = np.zeros((5, 5))
    u[2, 3] = 1.0
    state = make_state(u, 0.1)
    with pytest.raises(MaxPrincipleError) as exc:
        state.check_max_principle()
    assert exc.value.location == (2, 3)
    assert exc.value.value == 1.0


def test_determinism_bitwise():
    cfg = default_config()
    setup = prepare_run(cfg, 0.08, t_end=2e-4)
    a = advance(setup.state0, setup.forcing, setup.dt, setup.n_steps, setup.pot)
    b = advance(setup.state0, setup.forcing, setup.dt, setup.n_steps, setup.pot)
    assert np.array_equal(a.state.u, b.state.u)
    assert a.ut2_integral == b.ut2_integral


def test_symmetry_preservation():
    # concentric circle and obstacle: dihedral symmetry survives 1000 steps
    cfg = default_config()
    setup = prepare_run(cfg, 0.08, t_end=1.0)  # dt fixed; steps capped below
    res = advance(setup.state0, setup.forcing, setup.dt, 1000, setup.pot,
                  dissipation="rect")
    u = res.state.u
    for sym in (np.flipud, np.fliplr, np.transpose):
        assert float(np.max(np.abs(u - sym(u)))) < 1e-12


def test_energy_decreases_along_run():
    cfg = default_config()
    setup = prepare_run(cfg, 0.08, t_end=5e-3)
    g = setup.forcing.values
    energies = [energy_lyapunov(setup.state0.u, 0.08, setup.grid.h, g, setup.pot)]

    def on_cp(state, ut2):
        energies.append(energy_lyapunov(state.u, 0.08, state.h, g, setup.pot))

    marks = set(range(25, setup.n_steps + 1, 25))
    advance(setup.state0, setup.forcing, setup.dt, setup.n_steps, setup.pot,
            on_checkpoint=on_cp, checkpoint_steps=marks, dissipation="rect")
    rises = np.diff(energies)
    assert np.all(rises <= 1e-10 * abs(energies[0]))


def test_laplacian_of_constant_is_zero():
    u = np.full((9, 7), 0.37)
    assert np.max(np.abs(laplacian(u, 0.01))) == 0.0


def test_forcing_dt_cap_applies_at_coarse_eps():
    cfg = default_config()
    setup = prepare_run(cfg, 0.08)
    spec_dt = stable_dt(0.08, setup.grid.h, POT, cfg.s_cfl)
    assert setup.dt < spec_dt  # the saturation cap binds at eps = 0.08
    cap = cfg.s_cfl * 0.08 / (setup.forcing.c1 * 2.0)
    assert setup.dt <= cap * (1 + 1e-12)
