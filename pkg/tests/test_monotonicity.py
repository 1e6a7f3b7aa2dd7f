import numpy as np
import pytest

from pfob import diagnostics as diag
from pfob.config import default_config
from pfob.geometry import Grid, Rectangle
from pfob.initial_data import InitialDataSpec, SegmentInterface, build_u0
from pfob.potential import DoubleWellPotential, sigma
from pfob.runner import prepare_run
from pfob.solver import advance

POT = DoubleWellPotential()
SIG = sigma(POT)


def test_boundary_probe_adds_reflected_kernel():
    # chord interface hitting the wall: a collar probe sees extra image mass
    eps = 0.05
    tau = 5e-5
    domain = Rectangle(0.0, 1.0, 0.0, 1.0)
    grid = Grid.for_resolution(domain, eps / 5.0)
    m0 = SegmentInterface(domain, "x", 0.5, "upper")
    state = build_u0(grid, InitialDataSpec(m0, eps))
    probe_b = diag.KernelProbe((0.5, 0.005), tau, 0.1, "boundary")
    val_b = diag.heat_kernel_functional(state, probe_b, SIG, POT)
    # the same kernel without the image term, via a plain evaluation
    xx, yy = grid.meshgrid()
    mass = diag.energy_density(state.u, eps, grid.h, POT) * grid.h**2 / SIG
    d2 = (xx - 0.5) ** 2 + (yy - 0.005) ** 2
    rho1 = diag._kernel_cutoff(np.sqrt(d2), 0.1) * diag.backward_heat_kernel(d2, tau)
    val_plain = float(np.sum(rho1 * mass))
    # the image term is strictly positive but below the plain one: the image
    # cells sit farther from the probe by twice the wall distance
    assert val_b > val_plain > 0.0
    assert 1.1 < val_b / val_plain < 2.05


def test_monotonicity_report_on_forced_run():
    cfg = default_config()
    setup = prepare_run(cfg, 0.08, t_end=2e-3)
    states = [setup.state0]

    def on_cp(state, ut2):
        states.append(state)

    marks = set(range(20, setup.n_steps + 1, 20))
    advance(setup.state0, setup.forcing, setup.dt, setup.n_steps, setup.pot,
            on_checkpoint=on_cp, checkpoint_steps=marks, dissipation="rect")
    probe = diag.KernelProbe((0.5, 0.8), states[-1].t + 5e-4, 0.1, "interior")
    rep = diag.monotonicity_report(states, probe, SIG, POT)
    assert len(rep.values) == len(states)
    assert all(np.isfinite(v) for v in rep.values)
    assert np.isfinite(rep.fitted_constant) and rep.fitted_constant >= 0.0


def test_monotonicity_report_needs_two_states():
    cfg = default_config()
    setup = prepare_run(cfg, 0.08, t_end=0.0)
    probe = diag.KernelProbe((0.5, 0.8), 1.0, 0.1, "interior")
    with pytest.raises(ValueError):
        diag.monotonicity_report([setup.state0], probe, SIG, POT)
