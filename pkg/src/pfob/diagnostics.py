"""Measurable quantities: surface measures, energy, density ratios, kernels, interface.

All diagnostics are pure functions of a field snapshot. Gradients use centered
differences with mirrored ghosts; ball masses are exact sums over cell centers
(computed for all centers at once by FFT convolution with a disk stencil).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .geometry import Grid, Rectangle, nearest_edge
from .potential import DoubleWellPotential


def centered_gradient(u: np.ndarray, h: float):
    """Centered differences with mirrored ghosts (zero normal slope at walls)."""
    p = np.pad(u, 1, mode="edge")
    gx = (p[1:-1, 2:] - p[1:-1, :-2]) / (2.0 * h)
    gy = (p[2:, 1:-1] - p[:-2, 1:-1]) / (2.0 * h)
    return gx, gy


def neumann_residual(u: np.ndarray) -> float:
    """Max |one-sided normal difference| at the walls under ghost mirroring.

    The ghost value is defined to equal the adjacent interior value, so this
    is identically zero; kept as an explicit check of that construction.
    """
    p = np.pad(u, 1, mode="edge")
    res = max(
        float(np.max(np.abs(p[0, 1:-1] - u[0, :]))),
        float(np.max(np.abs(p[-1, 1:-1] - u[-1, :]))),
        float(np.max(np.abs(p[1:-1, 0] - u[:, 0]))),
        float(np.max(np.abs(p[1:-1, -1] - u[:, -1]))),
    )
    return res


def energy_density(u: np.ndarray, eps: float, h: float,
                   pot: DoubleWellPotential) -> np.ndarray:
    """Pointwise eps |grad u|^2 / 2 + W(u) / eps."""
    gx, gy = centered_gradient(u, h)
    return eps * (gx * gx + gy * gy) / 2.0 + pot.w(u) / eps


def discrepancy_density(u: np.ndarray, eps: float, h: float,
                        pot: DoubleWellPotential) -> np.ndarray:
    """Pointwise eps |grad u|^2 / 2 - W(u) / eps (the equipartition defect)."""
    gx, gy = centered_gradient(u, h)
    return eps * (gx * gx + gy * gy) / 2.0 - pot.w(u) / eps


def measure_mu(u: np.ndarray, eps: float, h: float, sigma: float,
               pot: DoubleWellPotential, region_mask: np.ndarray | None = None) -> float:
    """Surface measure mu(region) = (1/sigma) sum of the energy density times h^2."""
    dens = energy_density(u, eps, h, pot)
    if region_mask is not None:
        dens = dens[region_mask]
    return float(np.sum(dens)) * h * h / sigma


def measure_xi(u: np.ndarray, eps: float, h: float, sigma: float,
               pot: DoubleWellPotential):
    """Discrepancy totals: (signed, absolute, pointwise sup of the raw density)."""
    dens = discrepancy_density(u, eps, h, pot)
    cell = h * h / sigma
    return (float(np.sum(dens)) * cell,
            float(np.sum(np.abs(dens))) * cell,
            float(np.max(dens)))


def energy(u: np.ndarray, eps: float, h: float, g, sigma: float,
           pot: DoubleWellPotential) -> float:
    """Free energy sigma mu(Omega) - sum g k(u) h^2 (decreasing along the flow)."""
    mu = measure_mu(u, eps, h, sigma, pot)
    forcing_term = float(np.sum(np.asarray(g) * pot.k(u))) * h * h
    return sigma * mu - forcing_term


def energy_lyapunov(u: np.ndarray, eps: float, h: float, g,
                    pot: DoubleWellPotential) -> float:
    """Edge-quadrature free energy: the exact Lyapunov functional of the scheme.

    The forward-difference Dirichlet form is the one whose gradient is the
    discrete update, so this quantity decreases at every step (for stable dt),
    while the centered-difference form of energy() drifts by O(h^2) quadrature
    bias as the profile moves across cells. Used for monotonicity checks and
    the diagnostics CSV.
    """
    dx = u[:, 1:] - u[:, :-1]
    dy = u[1:, :] - u[:-1, :]
    grad_term = eps * (float(np.sum(dx * dx)) + float(np.sum(dy * dy))) / 2.0
    wells = float(np.sum(pot.w(u) / eps - np.asarray(g) * pot.k(u))) * h * h
    return grad_term + wells


def grad_sup(u: np.ndarray, eps: float, h: float) -> float:
    """sup eps |grad u|; stays O(1) across an eps sweep."""
    gx, gy = centered_gradient(u, h)
    return eps * float(np.max(np.sqrt(gx * gx + gy * gy)))


def ball_mask(grid: Grid, cx: float, cy: float, r: float) -> np.ndarray:
    xx, yy = grid.meshgrid()
    return (xx - cx) ** 2 + (yy - cy) ** 2 < r * r


def mass_balance_residual(u_final: np.ndarray, u_initial: np.ndarray,
                          ut2_integral: float, eps: float, h: float, g,
                          sigma: float, pot: DoubleWellPotential) -> float:
    """Defect of the mass identity

        mu_T(Omega) + (1/sigma) int_0^T int eps u_t^2
            = mu_0(Omega) + (1/sigma) int g (k(u_T) - k(u_0)).

    Exactly zero for a zero-step run; O(dt + h^2) along a resolved trajectory.
    """
    mu_t = measure_mu(u_final, eps, h, sigma, pot)
    mu_0 = measure_mu(u_initial, eps, h, sigma, pot)
    k_term = float(np.sum(np.asarray(g) * (pot.k(u_final) - pot.k(u_initial)))) \
        * h * h / sigma
    return (mu_t + ut2_integral / sigma) - (mu_0 + k_term)


# --- density ratio ------------------------------------------------------------

def _disk_kernel(r: float, h: float) -> np.ndarray:
    n = int(math.floor(r / h))
    offs = np.arange(-n, n + 1) * h
    return ((offs[:, None] ** 2 + offs[None, :] ** 2) < r * r).astype(float)


def density_ratio(u: np.ndarray, eps: float, grid: Grid, sigma: float,
                  pot: DoubleWellPotential, c4: float, domain: Rectangle,
                  stride: int = 4, n_radii: int = 8) -> float:
    """Sampled sup over centers and radii of mu(B_r(y)) / (2r).

    Centers on every stride-th cell; radii log-spaced in (2h, c4). Centers in
    the c4/2 boundary collar use mu(B_r) + mu(reflected ball): padding the
    mass field symmetrically across the walls and convolving computes exactly
    that sum (the mirror of a cell center is a padded cell center). Corner-zone
    centers are skipped, matching the reflection diagnostics.
    """
    h = grid.h
    if c4 <= 2.0 * h:
        raise ValueError(f"c4 = {c4:g} leaves no admissible radii above 2h = {2 * h:g}")
    cell_mass = energy_density(u, eps, h, pot) * (h * h / sigma)
    radii = np.exp(np.linspace(math.log(2.0 * h * 1.0001),
                               math.log(c4 * 0.9999), n_radii))
    xx, yy = grid.meshgrid()
    wall = domain.dist_to_boundary(xx, yy)
    interior = wall >= c4 / 2.0
    near_v = np.minimum(xx - domain.x_min, domain.x_max - xx)
    near_h = np.minimum(yy - domain.y_min, domain.y_max - yy)
    corner = (near_v < c4) & (near_h < c4)
    collar = (~interior) & (~corner)
    sub = (slice(None, None, stride), slice(None, None, stride))
    interior_sub = interior[sub]
    collar_sub = collar[sub]

    best = 0.0
    for r in radii:
        kern = _disk_kernel(r, h)
        mass = np.maximum(fftconvolve(cell_mass, kern, mode="same"), 0.0)
        if np.any(interior_sub):
            best = max(best, float(np.max(mass[sub][interior_sub])) / (2.0 * r))
        if np.any(collar_sub):
            w = kern.shape[0] // 2 + 1
            padded = np.pad(cell_mass, w, mode="symmetric")
            both = fftconvolve(padded, kern, mode="same")[w:-w, w:-w]
            both = np.maximum(both, 0.0)
            best = max(best, float(np.max(both[sub][collar_sub])) / (2.0 * r))
    return best


# --- heat kernel functionals ---------------------------------------------------

@dataclass(frozen=True)
class KernelProbe:
    """A backward-heat-kernel evaluation point (y, s) with the c4 cutoff.

    kind "interior" uses the truncated kernel alone (valid for centers beyond
    c4/2 from the wall); kind "boundary" adds the reflected kernel.
    """

    y: tuple[float, float]
    s: float
    c4: float
    kind: str = "interior"

    def validate(self, domain: Rectangle) -> None:
        wall = float(domain.dist_to_boundary(self.y[0], self.y[1]))
        if self.kind == "interior" and wall <= self.c4 / 2.0:
            raise ValueError("interior probe center lies in the boundary collar")
        if self.kind == "boundary":
            if wall > self.c4 / 2.0:
                raise ValueError("boundary probe center lies outside the collar")
            # raises ReflectionError in corner zones
            nearest_edge(domain, self.y[0], self.y[1], self.c4)


def _kernel_cutoff(rho: np.ndarray, c4: float) -> np.ndarray:
    """C^2 bump: 1 on [0, c4/4], 0 from c4/2 on (descending quintic ramp)."""
    t = np.clip((rho - c4 / 4.0) / (c4 / 4.0), 0.0, 1.0)
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


def backward_heat_kernel(dist_sq, s_minus_t: float) -> np.ndarray:
    """(n-1)-dimensional backward kernel in the plane: (4 pi tau)^{-1/2} e^{-d^2/4tau}."""
    tau = s_minus_t
    return np.exp(-np.asarray(dist_sq) / (4.0 * tau)) / math.sqrt(4.0 * math.pi * tau)


def heat_kernel_functional(state, probe: KernelProbe, sigma: float,
                           pot: DoubleWellPotential) -> float:
    """integral of rho_1 (+ rho_2 for boundary probes) against d mu_t."""
    if probe.s <= state.t:
        raise ValueError("probe time s must exceed the state time t")
    grid: Grid = state.grid
    probe.validate(grid.domain)
    tau = probe.s - state.t
    xx, yy = grid.meshgrid()
    cell_mass = energy_density(state.u, state.eps, state.h, pot) \
        * (state.h * state.h / sigma)
    d2 = (xx - probe.y[0]) ** 2 + (yy - probe.y[1]) ** 2
    rho1 = _kernel_cutoff(np.sqrt(d2), probe.c4) * backward_heat_kernel(d2, tau)
    total = float(np.sum(rho1 * cell_mass))
    if probe.kind == "boundary":
        edge = nearest_edge(grid.domain, probe.y[0], probe.y[1], probe.c4)
        xm, ym = _mirror_coords(xx, yy, edge, grid.domain)
        d2m = (xm - probe.y[0]) ** 2 + (ym - probe.y[1]) ** 2
        rho2 = _kernel_cutoff(np.sqrt(d2m), probe.c4) * backward_heat_kernel(d2m, tau)
        total += float(np.sum(rho2 * cell_mass))
    return total


def _mirror_coords(xx, yy, edge: str, domain: Rectangle):
    """Reflect every cell across the probe's wall (method of images)."""
    if edge == "left":
        return 2.0 * domain.x_min - xx, yy
    if edge == "right":
        return 2.0 * domain.x_max - xx, yy
    if edge == "bottom":
        return xx, 2.0 * domain.y_min - yy
    return xx, 2.0 * domain.y_max - yy


def heat_kernel_xi_term(state, probe: KernelProbe, sigma: float,
                        pot: DoubleWellPotential) -> float:
    """integral of rho (+ reflected rho) / (2(s-t)) against d xi_t.

    This is the discrepancy-weighted source term of the kernel monotonicity
    inequality; its positive part is what limits the growth of the kernel
    functional along the flow.
    """
    if probe.s <= state.t:
        raise ValueError("probe time s must exceed the state time t")
    grid: Grid = state.grid
    probe.validate(grid.domain)
    tau = probe.s - state.t
    xx, yy = grid.meshgrid()
    xi_mass = discrepancy_density(state.u, state.eps, state.h, pot) \
        * (state.h * state.h / sigma)
    d2 = (xx - probe.y[0]) ** 2 + (yy - probe.y[1]) ** 2
    rho = _kernel_cutoff(np.sqrt(d2), probe.c4) * backward_heat_kernel(d2, tau)
    if probe.kind == "boundary":
        edge = nearest_edge(grid.domain, probe.y[0], probe.y[1], probe.c4)
        xm, ym = _mirror_coords(xx, yy, edge, grid.domain)
        d2m = (xm - probe.y[0]) ** 2 + (ym - probe.y[1]) ** 2
        rho = rho + _kernel_cutoff(np.sqrt(d2m), probe.c4) \
            * backward_heat_kernel(d2m, tau)
    return float(np.sum(rho * xi_mass)) / (2.0 * tau)


@dataclass
class MonotonicityReport:
    """Kernel monotonicity functional along checkpoints, with a fitted constant.

    The inequality bounds d/dt of the functional by the discrepancy term plus
    a constant; the constant is never pinned analytically, so the fitted value
    (the largest observed excess growth rate) is reported, not asserted.
    """

    times: list
    values: list
    xi_terms: list
    fitted_constant: float


def monotonicity_report(states, probe: KernelProbe, sigma: float,
                        pot: DoubleWellPotential) -> MonotonicityReport:
    states = list(states)
    if len(states) < 2:
        raise ValueError("need at least two checkpoints to fit a growth rate")
    ts, vals, xis = [], [], []
    for st in states:
        ts.append(st.t)
        vals.append(heat_kernel_functional(st, probe, sigma, pot))
        xis.append(heat_kernel_xi_term(st, probe, sigma, pot))
    fitted = 0.0
    for k in range(len(ts) - 1):
        dt = ts[k + 1] - ts[k]
        growth = (vals[k + 1] - vals[k]) / dt
        source = 0.5 * (xis[k] + xis[k + 1])
        fitted = max(fitted, growth - source)
    return MonotonicityReport(ts, vals, xis, fitted)


# --- interface extraction -------------------------------------------------------

def extract_interface(u: np.ndarray, grid: Grid, level: float = 0.0):
    """Marching squares on the cell-center lattice.

    Returns (polylines, total_length, closed_flags): each polyline is an array
    of (x, y) vertices; saddle cells are resolved by the cell-average sign.
    """
    x, y = grid.x, grid.y
    f = u.T - level  # f[i, j] indexed by (x index, y index)
    nx, ny = f.shape
    segments = []  # ((edge_key_a, point_a), (edge_key_b, point_b))

    neg = f < 0.0
    for i in range(nx - 1):
        for j in range(ny - 1):
            corners = (neg[i, j], neg[i + 1, j], neg[i + 1, j + 1], neg[i, j + 1])
            case = (corners[0] | corners[1] << 1 | corners[2] << 2 | corners[3] << 3)
            if case in (0, 15):
                continue
            crossings = _cell_crossings(f, x, y, i, j, case)
            segments.extend(crossings)

    return _assemble_polylines(segments)


def _interp(x, y, f, i1, j1, i2, j2):
    v1, v2 = f[i1, j1], f[i2, j2]
    t = v1 / (v1 - v2)
    return (x[i1] + t * (x[i2] - x[i1]), y[j1] + t * (y[j2] - y[j1]))


def _cell_crossings(f, x, y, i, j, case):
    """Segments for one cell; edge keys are lattice-global so neighbors share them."""
    pts = {}
    def edge(name):
        if name not in pts:
            if name == "b":
                pts[name] = (("h", i, j), _interp(x, y, f, i, j, i + 1, j))
            elif name == "t":
                pts[name] = (("h", i, j + 1), _interp(x, y, f, i, j + 1, i + 1, j + 1))
            elif name == "l":
                pts[name] = (("v", i, j), _interp(x, y, f, i, j, i, j + 1))
            else:
                pts[name] = (("v", i + 1, j), _interp(x, y, f, i + 1, j, i + 1, j + 1))
        return pts[name]

    table = {
        1: [("l", "b")], 2: [("b", "r")], 3: [("l", "r")], 4: [("r", "t")],
        6: [("b", "t")], 7: [("l", "t")], 8: [("t", "l")], 9: [("t", "b")],
        11: [("t", "r")], 12: [("r", "l")], 13: [("r", "b")], 14: [("b", "l")],
    }
    if case in (5, 10):
        avg = f[i, j] + f[i + 1, j] + f[i + 1, j + 1] + f[i, j + 1]
        if case == 5:  # opposite corners (0, 0) and (1, 1) negative
            pairs = [("l", "t"), ("b", "r")] if avg < 0 else [("l", "b"), ("t", "r")]
        else:          # opposite corners (1, 0) and (0, 1) negative
            pairs = [("b", "l"), ("r", "t")] if avg < 0 else [("b", "r"), ("t", "l")]
        return [(edge(a), edge(b)) for a, b in pairs]
    return [(edge(a), edge(b)) for a, b in table[case]]


def _assemble_polylines(segments):
    """Chain segments by shared lattice-edge keys into open/closed polylines.

    Each lattice edge hosts at most one crossing and is shared by at most two
    cells, so every key has degree 1 (a free end, at the domain boundary) or 2.
    Open chains are walked from free ends first; the remainder are cycles.
    """
    adjacency: dict = {}
    for idx, ((ka, _), (kb, _)) in enumerate(segments):
        adjacency.setdefault(ka, []).append(idx)
        adjacency.setdefault(kb, []).append(idx)

    used = [False] * len(segments)
    polylines, closed_flags = [], []

    def walk(idx, key):
        pts = []
        while True:
            used[idx] = True
            (ka, pa), (kb, pb) = segments[idx]
            if ka == key:
                pts.append(pa)
                key, endpoint = kb, pb
            else:
                pts.append(pb)
                key, endpoint = ka, pa
            nxt = [m for m in adjacency[key] if not used[m]]
            if not nxt:
                pts.append(endpoint)
                return pts, key
            idx = nxt[0]

    for key, incident in adjacency.items():
        if len(incident) == 1 and not used[incident[0]]:
            pts, _ = walk(incident[0], key)
            polylines.append(np.asarray(pts))
            closed_flags.append(False)
    for idx in range(len(segments)):
        if not used[idx]:
            (ka, _), _ = segments[idx]
            pts, end_key = walk(idx, ka)
            if end_key == ka:
                pts[-1] = pts[0]
            polylines.append(np.asarray(pts))
            closed_flags.append(end_key == ka)

    total = 0.0
    for poly in polylines:
        d = np.diff(poly, axis=0)
        total += float(np.sum(np.hypot(d[:, 0], d[:, 1])))
    return polylines, total, closed_flags


# --- record --------------------------------------------------------------------

CSV_COLUMNS = [
    "t", "energy", "mu_total", "xi_total_abs", "xi_sup", "grad_sup",
    "density_ratio_max", "interface_length", "mass_balance_residual",
    "obstacle_mass", "min_gap_sub", "min_gap_super", "obstacle_dev",
]


@dataclass
class DiagnosticsRecord:
    t: float
    energy: float
    mu_total: float
    xi_total_abs: float
    xi_sup: float
    grad_sup: float
    density_ratio_max: float
    interface_length: float
    mass_balance_residual: float
    obstacle_mass: float = math.nan
    min_gap_sub: float = math.nan
    min_gap_super: float = math.nan
    obstacle_dev: float = math.nan

    def row(self) -> list[float]:
        return [getattr(self, c) for c in CSV_COLUMNS]

    def __post_init__(self):
        mu = self.mu_total
        assert mu >= 0.0
        assert self.xi_total_abs <= mu * (1.0 + 1e-12) + 1e-15
