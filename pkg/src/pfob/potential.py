"""Double-well potential, the 1-D transition profile, and scalar functions built from them.

The default well is W(s) = (1 - s^2)^2 / 2 with wells at s = +-1, for which the
transition profile is q = tanh and every derived quantity has a closed form.
A user-supplied well must provide its own structural constants (alpha, beta,
gamma) and is validated by sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature cannot reach the requested tolerance."""


def _quartic_w(s):
    return (1.0 - s * s) ** 2 / 2.0


def _quartic_dw(s):
    return 2.0 * (s * s * s - s)


def _quartic_d2w(s):
    return 6.0 * s * s - 2.0


@dataclass(frozen=True)
class DoubleWellPotential:
    """A double well W with wells at +-1 and its structural constants.

    alpha, beta, gamma are the convexity/monotonicity constants: W'' >= beta on
    [-1, -alpha] u [alpha, 1], and W' changes sign only at gamma in (-1, 1).
    """

    w: Callable = _quartic_w
    dw: Callable = _quartic_dw
    d2w: Callable = _quartic_d2w
    alpha: float = 1.0 / math.sqrt(2.0)
    beta: float = 1.0
    gamma: float = 0.0
    name: str = "quartic"
    # closed-form values, None for user-supplied wells
    sigma_closed_form: float | None = 4.0 / 3.0
    k_closed_form: Callable | None = field(default=lambda s: s - s**3 / 3.0)

    @property
    def is_default_quartic(self) -> bool:
        return self.name == "quartic"

    def sqrt2w(self, s):
        """sqrt(2 W(s)), with the argument floored at 0 to absorb roundoff."""
        if self.is_default_quartic:
            s = np.asarray(s, dtype=float)
            return np.abs(1.0 - s * s)  # exact: 2W = (1 - s^2)^2
        return np.sqrt(np.maximum(2.0 * self.w(s), 0.0))

    def g_ratio(self, s):
        """G(s) = W'(s) / sqrt(2 W(s)), defined on (-1, 1) only."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(np.abs(s_arr) >= 1.0):
            raise ValueError("G(s) is defined only on (-1, 1)")
        return self.dw(s_arr) / self.sqrt2w(s_arr)

    def k(self, s):
        """k(s) = integral_0^s sqrt(2 W(a)) da (antiderivative of sqrt2w)."""
        if self.k_closed_form is not None:
            return self.k_closed_form(np.asarray(s, dtype=float))
        return _k_by_quadrature(self, s)

    def max_d2w(self) -> float:
        """max |W''| over [-1, 1]; the reaction stiffness constant."""
        if self.is_default_quartic:
            return 4.0
        samp = np.linspace(-1.0, 1.0, 4001)
        return float(np.max(np.abs(self.d2w(samp))))

    def max_abs_g(self) -> float:
        """sup of |G| on (-1, 1); bounds the forcing-term stiffness."""
        if self.is_default_quartic:
            return 2.0
        samp = np.linspace(-1.0 + 1e-9, 1.0 - 1e-9, 4001)
        return float(np.max(np.abs(self.g_ratio(samp))))


def _k_by_quadrature(pot: DoubleWellPotential, s):
    scalar = np.isscalar(s)
    vals = np.atleast_1d(np.asarray(s, dtype=float))
    out = np.empty_like(vals)
    for i, si in enumerate(vals):
        out[i], _ = integrate.quad(lambda a: float(pot.sqrt2w(a)), 0.0, si, limit=200)
    return float(out[0]) if scalar else out


def sigma(pot: DoubleWellPotential, tol: float = 1e-12) -> float:
    """Normalization constant: integral over [-1, 1] of sqrt(2 W(a)) da.

    Returns the closed form when the well ships one; otherwise adaptive
    quadrature, raising QuadratureError with the achieved tolerance if the
    estimate does not converge.
    """
    if pot.sigma_closed_form is not None:
        return pot.sigma_closed_form
    val, err = integrate.quad(lambda a: float(pot.sqrt2w(a)), -1.0, 1.0, limit=400)
    if err > max(tol, 1e-10 * abs(val)):
        raise QuadratureError(
            f"sigma quadrature did not converge: estimated error {err:.3e}"
        )
    return val


@dataclass(frozen=True)
class Profile:
    """The 1-D standing-wave profile q with q(0) = 0, q(+-inf) = +-1, q' = sqrt(2W(q)).

    For the default quartic well this is tanh; user wells must supply their own
    evaluators (the profile ODE is not solved here).
    """

    q: Callable = np.tanh
    dq: Callable = field(default=lambda s: 1.0 / np.cosh(s) ** 2)
    name: str = "tanh"

    def q_eps(self, s, eps: float):
        """Rescaled profile q(s / eps)."""
        return self.q(np.asarray(s, dtype=float) / eps)

    def dq_eps(self, s, eps: float):
        """d/ds of q(s / eps)."""
        return self.dq(np.asarray(s, dtype=float) / eps) / eps


def s_gamma_eps(eps: float, pot: DoubleWellPotential, profile: Profile | None = None,
                tol: float = 1e-14) -> float:
    """Level-crossing parameter: the unique root of q(s/eps) = gamma.

    Bisection; q is strictly increasing so the root is unique. O(eps) since
    gamma is fixed and q is invertible near 0.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    profile = profile or Profile()
    if pot.gamma == 0.0:
        return 0.0
    lo, hi = -1.0, 1.0
    f = lambda s: float(profile.q_eps(s, eps)) - pot.gamma
    while f(lo) > 0:
        lo *= 2.0
    while f(hi) < 0:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def validate_potential(pot: DoubleWellPotential, n_samples: int = 2001) -> list[str]:
    """Sampled structural checks on a well; returns a list of violations (empty = ok)."""
    problems = []
    s = np.linspace(-2.0, 2.0, n_samples)
    w = pot.w(s)
    if np.any(w < -1e-15):
        problems.append("W takes negative values on [-2, 2]")
    if abs(pot.w(1.0)) > 1e-14 or abs(pot.w(-1.0)) > 1e-14:
        problems.append("W does not vanish at s = +-1")
    interior = s[(np.abs(np.abs(s) - 1.0) > 1e-3) & (np.abs(s) < 2.0)]
    if np.any(pot.w(interior) <= 0.0):
        problems.append("W vanishes away from s = +-1")
    left = np.linspace(-1.0 + 1e-6, pot.gamma - 1e-6, 1000)
    right = np.linspace(pot.gamma + 1e-6, 1.0 - 1e-6, 1000)
    if np.any(pot.dw(left) <= 0.0):
        problems.append("W' is not positive on (-1, gamma)")
    if np.any(pot.dw(right) >= 0.0):
        problems.append("W' is not negative on (gamma, 1)")
    outer = np.concatenate([np.linspace(-1.0, -pot.alpha, 500),
                            np.linspace(pot.alpha, 1.0, 500)])
    if np.any(pot.d2w(outer) < pot.beta - 1e-12):
        problems.append("W'' < beta on [-1, -alpha] u [alpha, 1]")
    return problems
