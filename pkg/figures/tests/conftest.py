import struct

import numpy as np
import pytest

DIAG_HEADER = ("t,energy,mu_total,xi_total_abs,xi_sup,grad_sup,"
               "density_ratio_max,interface_length,mass_balance_residual,"
               "obstacle_mass,min_gap_sub,min_gap_super,obstacle_dev")

SWEEP_HEADER = ("eps,status,mu0,mu_final,xi_time_integral,xi_sup_max,"
                "xi_sup_sqrt_eps,density_ratio_max,grad_sup_max,"
                "energy_monotone,mass_balance_final,min_gap_sub,"
                "min_gap_super,obstacle_mass_final,obstacle_dev_final,"
                "sup_abs_u,semidec_rate")


def make_diagnostics_csv(path, energies, density=None):
    rows = [DIAG_HEADER]
    density = density if density is not None else [1.0] * len(energies)
    for i, (e, d) in enumerate(zip(energies, density)):
        t = 0.01 * i
        rows.append(f"{t},{e},2.0,0.5,0.1,1.0,{d},1.9,0.0,nan,nan,nan,nan")
    path.write_text("\n".join(rows) + "\n")
    return path


def make_sweep_csv(path, eps_vals, integrals, slope=1.2):
    rows = [SWEEP_HEADER]
    for e, v in zip(eps_vals, integrals):
        rows.append(f"{e},ok,2.0,1.5,{v},5.0,1.0,1.2,0.9,1,0.001,"
                    f"0.1,nan,1e-20,1e-12,0.999,0.0")
    rows.append(f"# loglog_slope,{slope}")
    path.write_text("\n".join(rows) + "\n")
    return path


def make_snapshot(path, nx=40, ny=30, h=0.025, eps=0.05, t=0.1):
    x = (np.arange(nx) + 0.5) * h
    y = (np.arange(ny) + 0.5) * h
    xx, yy = np.meshgrid(x, y)
    u = np.tanh((0.3 - np.hypot(xx - 0.5, yy - 0.4)) / eps)
    header = struct.pack("<4sIIIddd", b"PFOB", 1, nx, ny, h, eps, t)
    path.write_bytes(header + u.astype("<f8").tobytes())
    return path
