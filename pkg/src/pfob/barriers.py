"""Radial sub/supersolutions pinned to the obstacles, and their runtime checks.

The core object is the radial function
    r_minus(x) = -c14 / ((R0 + delta)^2 - |x - y|^2) + c15,
whose constants are balanced so that r_minus = s_gamma exactly on |x - y| = R0
and |grad r_minus| crosses 1 there. q(r_minus / eps) is then a subsolution on
B_{R0 + delta}(y) when B_{R0}(y) sits inside a positive obstacle (supersolution
with the sign flipped for negative obstacles). A time interpolation bridges
from the prepared initial data at t = 0 to the static barrier at t = eps^{b*}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Grid
from .potential import DoubleWellPotential, Profile, s_gamma_eps


class BarrierDomainError(ValueError):
    """Barrier evaluated outside its ball, or at an inadmissible time."""


@dataclass(frozen=True)
class BarrierSpec:
    """One sub- or supersolution instance centered at an obstacle ball."""

    y: tuple[float, float]
    kind: str                    # "sub" (positive obstacle) or "super" (negative)
    r0: float
    delta: float
    eps: float
    beta_star: float = 0.25
    c_star_star: float = 0.2
    s_gamma: float = 0.0

    def __post_init__(self):
        if self.kind not in ("sub", "super"):
            raise ValueError("barrier kind must be 'sub' or 'super'")

    @classmethod
    def build(cls, y, kind, r0, delta, eps, beta_star=0.25, c_star_star=0.2,
              pot: DoubleWellPotential | None = None) -> "BarrierSpec":
        pot = pot or DoubleWellPotential()
        return cls(tuple(y), kind, r0, delta, eps, beta_star, c_star_star,
                   s_gamma_eps(eps, pot))

    @property
    def rim(self) -> float:
        return self.r0 + self.delta

    @property
    def c14(self) -> float:
        return (self.rim ** 2 - self.r0 ** 2) ** 2 / (2.0 * self.r0)

    @property
    def c15(self) -> float:
        return (self.rim ** 2 - self.r0 ** 2) / (2.0 * self.r0) + self.s_gamma

    @property
    def t_static(self) -> float:
        """Time eps^{beta*} from which the static barrier bounds the solution."""
        return self.eps ** self.beta_star

    @property
    def clamp_level(self) -> float:
        """(1/3) c** eps^{beta*}: below this the time clamp is the identity."""
        return self.c_star_star * self.eps ** self.beta_star / 3.0


def barrier_r_minus(rho, spec: BarrierSpec):
    """The radial profile at distance rho from the center; pole at the rim."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho >= spec.rim):
        raise BarrierDomainError(
            f"barrier evaluated at |x-y| >= R0 + delta = {spec.rim:g}")
    return -spec.c14 / (spec.rim ** 2 - rho ** 2) + spec.c15


def barrier_grad_sq(rho, spec: BarrierSpec):
    """|grad r_minus|^2 = 4 c14^2 rho^2 / ((R0+delta)^2 - rho^2)^4 (analytic)."""
    rho = np.asarray(rho, dtype=float)
    den = spec.rim ** 2 - rho ** 2
    return 4.0 * spec.c14 ** 2 * rho ** 2 / den ** 4


def barrier_laplacian(rho, spec: BarrierSpec, n_dim: int = 2):
    """Laplacian of the radial profile: -2 c14 (n A + (4-n) rho^2) / (A - rho^2)^3."""
    rho = np.asarray(rho, dtype=float)
    a = spec.rim ** 2
    den = a - rho ** 2
    return -2.0 * spec.c14 * (n_dim * a + (4.0 - n_dim) * rho ** 2) / den ** 3


def barrier_u(x, y, spec: BarrierSpec, profile: Profile | None = None):
    """Barrier field value: q((r_minus)/eps) for sub, q((-r_minus + 2 s_gamma)/eps) for super."""
    profile = profile or Profile()
    rho = np.hypot(np.asarray(x) - spec.y[0], np.asarray(y) - spec.y[1])
    r = barrier_r_minus(rho, spec)
    if spec.kind == "super":
        r = -r + 2.0 * spec.s_gamma
    return profile.q_eps(r, spec.eps)


@dataclass
class ResidualReport:
    max_residual: float
    passes: bool
    n_samples: int


def barrier_residual(spec: BarrierSpec, grid: Grid, forcing_values: np.ndarray,
                     pot: DoubleWellPotential | None = None,
                     profile: Profile | None = None) -> ResidualReport:
    """Analytic barrier residual over the grid points of the barrier ball.

    Sub case: -Lap r - G(q(r/eps)) (|grad r|^2 - 1)/eps - g <= 0 is required at
    every sampled point (r = r_minus). Super case: the barrier argument is
    w = -r + 2 s_gamma and the sign-flipped inequality must hold; both are
    reported as a max residual that passes when <= 0. The rim annulus (2 cells)
    is excluded because the profile saturates there and the inequality is
    carried by asymptotics the sample cannot represent.
    """
    pot = pot or DoubleWellPotential()
    profile = profile or Profile()
    xx, yy = grid.meshgrid()
    rho = np.hypot(xx - spec.y[0], yy - spec.y[1])
    mask = rho < spec.rim - 2.0 * grid.h
    rho_s = rho[mask]
    g = np.asarray(forcing_values)[mask] if np.ndim(forcing_values) else forcing_values
    r = barrier_r_minus(rho_s, spec)
    lap = barrier_laplacian(rho_s, spec)
    grad_sq = barrier_grad_sq(rho_s, spec)
    if spec.kind == "sub":
        q_val = np.clip(profile.q_eps(r, spec.eps), -1.0 + 1e-15, 1.0 - 1e-15)
        resid = -lap - pot.g_ratio(q_val) * (grad_sq - 1.0) / spec.eps - g
    else:
        w = -r + 2.0 * spec.s_gamma
        q_val = np.clip(profile.q_eps(w, spec.eps), -1.0 + 1e-15, 1.0 - 1e-15)
        resid = -lap + pot.g_ratio(q_val) * (grad_sq - 1.0) / spec.eps + g
    worst = float(np.max(resid))
    return ResidualReport(worst, worst <= 0.0, int(mask.sum()))


def clamp_phi0(r, spec: BarrierSpec):
    """Initial-time clamp: identity below (1/3) c** eps^{b*}, tanh saturation above.

    C^2 at the junction; range bounded by (2/3) c** eps^{b*}.
    """
    r = np.asarray(r, dtype=float)
    level = spec.clamp_level
    over = np.clip((r - level) / level, 0.0, None)
    return np.where(r <= level, r, level * (1.0 + np.tanh(over)))


def time_interpolated_barrier_r(x, y, t: float, spec: BarrierSpec):
    """r~(x, t) = phi0(r_minus) + (t / eps^{b*}) (r_minus - phi0(r_minus)).

    Equals the prepared initial profile bound at t = 0 and the static barrier
    argument exactly at t = eps^{b*}.
    """
    if not 0.0 <= t <= spec.t_static * (1.0 + 1e-12):
        raise BarrierDomainError(
            f"interpolated barrier defined on [0, eps^b*] = [0, {spec.t_static:g}], "
            f"got t = {t:g}")
    rho = np.hypot(np.asarray(x) - spec.y[0], np.asarray(y) - spec.y[1])
    r = barrier_r_minus(rho, spec)
    p0 = clamp_phi0(r, spec)
    frac = min(t / spec.t_static, 1.0)
    return p0 + frac * (r - p0)


def barrier_gap(state, spec: BarrierSpec, profile: Profile | None = None) -> float:
    """Signed clearance between the solution and the barrier over the ball.

    Uses the time-interpolated barrier for t < eps^{b*} and the static barrier
    after; returns min(u - u_barrier) for sub, min(u_barrier - u) for super.
    Nonnegative (up to discretization) is the comparison-principle statement.
    """
    profile = profile or Profile()
    grid: Grid = state.grid
    xx, yy = grid.meshgrid()
    rho = np.hypot(xx - spec.y[0], yy - spec.y[1])
    mask = rho < spec.rim - 1e-12
    t_eff = min(state.t, spec.t_static)
    r = time_interpolated_barrier_r(xx[mask], yy[mask], t_eff, spec)
    if spec.kind == "sub":
        ub = profile.q_eps(r, spec.eps)
        return float(np.min(state.u[mask] - ub))
    ub = profile.q_eps(-r + 2.0 * spec.s_gamma, spec.eps)
    return float(np.min(ub - state.u[mask]))


def comparison_check(state, spec: BarrierSpec,
                     profile: Profile | None = None) -> float:
    """Static-barrier comparison, defined for t >= eps^{b*} (precondition error below)."""
    if state.t < spec.t_static * (1.0 - 1e-12):
        raise BarrierDomainError(
            f"comparison against the static barrier starts at t = eps^b* = "
            f"{spec.t_static:g}; state is at t = {state.t:g}")
    profile = profile or Profile()
    grid: Grid = state.grid
    xx, yy = grid.meshgrid()
    rho = np.hypot(xx - spec.y[0], yy - spec.y[1])
    mask = rho < spec.rim - 1e-12
    ub = barrier_u(xx[mask], yy[mask], spec, profile)
    if spec.kind == "sub":
        return float(np.min(state.u[mask] - ub))
    return float(np.min(ub - state.u[mask]))


def obstacle_convergence_check(state, spec: BarrierSpec, r: float) -> float:
    """sup over B_r(y) of |u - 1| (sub) or |u + 1| (super); r must stay inside R0."""
    if r >= spec.r0:
        raise BarrierDomainError(f"radius {r:g} must be below R0 = {spec.r0:g}")
    grid: Grid = state.grid
    xx, yy = grid.meshgrid()
    mask = (xx - spec.y[0]) ** 2 + (yy - spec.y[1]) ** 2 < r * r
    target = 1.0 if spec.kind == "sub" else -1.0
    return float(np.max(np.abs(state.u[mask] - target)))


def barrier_specs_for(geometry, eps: float, beta_star: float, c_star_star: float,
                      pot: DoubleWellPotential | None = None) -> list[BarrierSpec]:
    """One spec per obstacle disk: sub barriers on O+, super barriers on O-."""
    specs = []
    for disk in geometry.obstacles_plus:
        specs.append(BarrierSpec.build((disk.cx, disk.cy), "sub", geometry.r0,
                                       geometry.delta, eps, beta_star,
                                       c_star_star, pot))
    for disk in geometry.obstacles_minus:
        specs.append(BarrierSpec.build((disk.cx, disk.cy), "super", geometry.r0,
                                       geometry.delta, eps, beta_star,
                                       c_star_star, pot))
    return specs
