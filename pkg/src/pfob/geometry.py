"""Domain, obstacles, obstacle forcing field, and boundary-reflection machinery.

The domain is an axis-aligned rectangle with homogeneous Neumann walls realized
by ghost-cell mirroring; corners are excluded from reflection-based
diagnostics. Obstacles are finite unions of equal-radius disks, so the interior
ball condition holds by construction and all distances are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ConfigError(ValueError):
    """Configuration violates a structural precondition."""


class ReflectionError(ValueError):
    """Reflection requested outside the boundary collar or in a corner zone."""


@dataclass(frozen=True)
class Disk:
    cx: float
    cy: float
    r: float


@dataclass(frozen=True)
class Rectangle:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def min_side(self) -> float:
        return min(self.width, self.height)

    @property
    def area(self) -> float:
        return self.width * self.height

    def dist_to_boundary(self, x, y):
        """Distance from interior points to the rectangle boundary."""
        return np.minimum(
            np.minimum(x - self.x_min, self.x_max - x),
            np.minimum(y - self.y_min, self.y_max - y),
        )

    def edge_distances(self, x: float, y: float) -> dict[str, float]:
        return {
            "left": x - self.x_min,
            "right": self.x_max - x,
            "bottom": y - self.y_min,
            "top": self.y_max - y,
        }


@dataclass(frozen=True)
class Grid:
    """Cell-centered uniform grid: node (i, j) sits at (x_min + (i+1/2)h, y_min + (j+1/2)h).

    No node lies on the boundary, so Neumann mirroring is symmetric.
    """

    domain: Rectangle
    nx: int
    ny: int
    h: float

    @classmethod
    def for_resolution(cls, domain: Rectangle, h_target: float) -> "Grid":
        """Largest uniform h <= h_target that tiles the rectangle exactly."""
        nx_min = max(2, math.ceil(domain.width / h_target - 1e-12))
        for nx in range(nx_min, 4 * nx_min + 1):
            h = domain.width / nx
            ny_f = domain.height / h
            ny = round(ny_f)
            if ny >= 2 and abs(ny_f - ny) < 1e-9 * max(ny_f, 1.0):
                return cls(domain, nx, ny, h)
        raise ConfigError(
            "domain sides are not commensurate at the requested resolution "
            f"(no h <= {h_target:.6g} tiles {domain.width:.6g} x {domain.height:.6g})"
        )

    @property
    def x(self) -> np.ndarray:
        return self.domain.x_min + (np.arange(self.nx) + 0.5) * self.h

    @property
    def y(self) -> np.ndarray:
        return self.domain.y_min + (np.arange(self.ny) + 0.5) * self.h

    def meshgrid(self):
        """(X, Y) arrays of shape (ny, nx): row index = y, column index = x."""
        return np.meshgrid(self.x, self.y)

    @property
    def cell_area(self) -> float:
        return self.h * self.h


def compute_c1(n: int, r0: float, delta: float) -> float:
    """Forcing amplitude: n (2 R0 + 3 delta/2)^4 / (delta R0 (R0 + 3 delta/4)^3)."""
    if n < 2 or r0 <= 0 or delta <= 0:
        raise ValueError("compute_c1 requires n >= 2, r0 > 0, delta > 0")
    val = n * (2.0 * r0 + 1.5 * delta) ** 4 / (delta * r0 * (r0 + 0.75 * delta) ** 3)
    assert val > 1.0
    return val


def dist_to_set(x, y, disks: tuple[Disk, ...] | list[Disk]):
    """Distance from (x, y) to a union of disks, 0 inside; exact for disjoint disks."""
    if not disks:
        raise ValueError("dist_to_set needs a nonempty disk list")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = np.full(np.broadcast(x, y).shape, np.inf)
    for disk in disks:
        d = np.minimum(d, np.hypot(x - disk.cx, y - disk.cy) - disk.r)
    return np.maximum(d, 0.0)


def smoothstep_chi(s):
    """Quintic step: 1 for s <= 1, 0 for s >= 2, C^2 monotone in between.

    Lipschitz constant 15/8, attained at the midpoint.
    """
    s = np.asarray(s, dtype=float)
    t = np.clip(s - 1.0, 0.0, 1.0)
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t))


@dataclass(frozen=True)
class GeometryConfig:
    domain: Rectangle
    obstacles_plus: tuple[Disk, ...]
    obstacles_minus: tuple[Disk, ...]
    r0: float
    delta: float
    r1: float = 0.0
    c4: float = field(default=0.0)  # 0 -> auto at build time

    @classmethod
    def build(cls, domain: Rectangle, plus_centers, minus_centers, r0: float,
              delta: float, r1: float = 0.0, c4: float | None = None) -> "GeometryConfig":
        plus = tuple(Disk(cx, cy, r0) for cx, cy in plus_centers)
        minus = tuple(Disk(cx, cy, r0) for cx, cy in minus_centers)
        clearance = _min_wall_clearance(domain, plus + minus)
        if c4 is None:
            c4 = 0.1 * domain.min_side
            if plus or minus:
                c4 = min(c4, 0.499 * clearance)
        cfg = cls(domain, plus, minus, r0, delta, r1, c4)
        cfg.validate()
        return cfg

    @property
    def all_obstacles(self) -> tuple[Disk, ...]:
        return self.obstacles_plus + self.obstacles_minus

    def validate(self) -> None:
        if self.delta <= 0:
            raise ConfigError("delta must be positive")
        if self.c4 <= 0:
            raise ConfigError("c4 must be positive")
        for disk in self.all_obstacles:
            clear = _wall_clearance(self.domain, disk)
            if clear <= self.delta:
                raise ConfigError(
                    f"obstacle at ({disk.cx}, {disk.cy}) has wall clearance "
                    f"{clear:.4g} <= delta {self.delta:.4g}"
                )
            if clear <= 2.0 * self.c4:
                raise ConfigError(
                    f"obstacle at ({disk.cx}, {disk.cy}) has wall clearance "
                    f"{clear:.4g} <= 2 c4 = {2 * self.c4:.4g}"
                )
        gap = self.obstacle_gap()
        if gap is not None and gap < self.r1:
            raise ConfigError(
                f"obstacle families are {gap:.4g} apart, below the required r1 {self.r1:.4g}"
            )

    def obstacle_gap(self) -> float | None:
        """Distance between the + and - obstacle unions, None when one is empty."""
        if not self.obstacles_plus or not self.obstacles_minus:
            return None
        gap = math.inf
        for a in self.obstacles_plus:
            for b in self.obstacles_minus:
                gap = min(gap, math.hypot(a.cx - b.cx, a.cy - b.cy) - a.r - b.r)
        return gap

    def c1(self, n: int = 2) -> float:
        return compute_c1(n, self.r0, self.delta)


def _wall_clearance(domain: Rectangle, disk: Disk) -> float:
    return min(
        disk.cx - disk.r - domain.x_min,
        domain.x_max - disk.cx - disk.r,
        disk.cy - disk.r - domain.y_min,
        domain.y_max - disk.cy - disk.r,
    )


def _min_wall_clearance(domain: Rectangle, disks) -> float:
    if not disks:
        return domain.min_side
    return min(_wall_clearance(domain, d) for d in disks)


@dataclass(frozen=True)
class ForcingField:
    """Grid-sampled obstacle forcing g^eps with its construction report.

    g = c1 where dist(x, O+) <= sqrt(eps), -c1 where dist(x, O-) <= sqrt(eps),
    0 where both distances are >= 2 sqrt(eps), with quintic-smoothstep
    transitions. collar_clean records whether g vanishes identically on the
    c4 boundary collar (it cannot at coarse eps in small domains; boundary
    kernel probes are disabled for such runs).
    """

    values: np.ndarray
    c1: float
    eps: float
    collar_clean: bool
    lipschitz_bound: float  # (15/8) c1 / sqrt(eps)

    @classmethod
    def build(cls, grid: Grid, cfg: GeometryConfig, eps: float) -> "ForcingField":
        c1 = cfg.c1() if cfg.all_obstacles else 0.0
        gap = cfg.obstacle_gap()
        root = math.sqrt(eps)
        if gap is not None and gap < 3.0 * root:
            raise ConfigError(
                f"opposite-sign forcing bands overlap: obstacle gap {gap:.4g} < "
                f"3 sqrt(eps) = {3 * root:.4g}; shrink eps or separate the obstacles"
            )
        xx, yy = grid.meshgrid()
        vals = np.zeros_like(xx)
        if cfg.obstacles_plus:
            vals += c1 * smoothstep_chi(dist_to_set(xx, yy, cfg.obstacles_plus) / root)
        if cfg.obstacles_minus:
            vals -= c1 * smoothstep_chi(dist_to_set(xx, yy, cfg.obstacles_minus) / root)
        _check_regions(vals, xx, yy, cfg, c1, root)
        collar = grid.domain.dist_to_boundary(xx, yy) < cfg.c4
        collar_clean = bool(np.all(vals[collar] == 0.0)) if cfg.all_obstacles else True
        return cls(vals, c1, eps, collar_clean, 1.875 * c1 / root if c1 else 0.0)


def _check_regions(vals, xx, yy, cfg: GeometryConfig, c1: float,
                   root: float) -> None:
    """Node-exact region check: +-c1 on the inner collars, 0 where both are far."""
    if not cfg.all_obstacles:
        return
    far = np.full(vals.shape, True)
    if cfg.obstacles_plus:
        d_plus = dist_to_set(xx, yy, cfg.obstacles_plus)
        assert np.all(vals[d_plus <= root] == c1)
        far &= d_plus >= 2.0 * root
    if cfg.obstacles_minus:
        d_minus = dist_to_set(xx, yy, cfg.obstacles_minus)
        assert np.all(vals[d_minus <= root] == -c1)
        far &= d_minus >= 2.0 * root
    assert np.all(vals[far] == 0.0)


def forcing_g(x, y, eps: float, cfg: GeometryConfig):
    """Pointwise forcing value; see ForcingField for the gridded version."""
    if not cfg.all_obstacles:
        return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    c1 = cfg.c1()
    root = math.sqrt(eps)
    out = 0.0
    if cfg.obstacles_plus:
        out = out + c1 * smoothstep_chi(dist_to_set(x, y, cfg.obstacles_plus) / root)
    if cfg.obstacles_minus:
        out = out - c1 * smoothstep_chi(dist_to_set(x, y, cfg.obstacles_minus) / root)
    return out


def nearest_edge(domain: Rectangle, x: float, y: float, c4: float) -> str:
    """The unique nearest edge for a collar point; raises in corner zones."""
    d = domain.edge_distances(x, y)
    if min(d.values()) >= c4:
        raise ReflectionError(f"point ({x}, {y}) lies outside the {c4}-collar")
    near_v = min(d["left"], d["right"])
    near_h = min(d["bottom"], d["top"])
    if near_v < c4 and near_h < c4:
        raise ReflectionError(
            f"point ({x}, {y}) is in a corner zone; reflection is undefined"
        )
    if near_v < near_h:
        return "left" if d["left"] < d["right"] else "right"
    return "bottom" if d["bottom"] < d["top"] else "top"


def reflection_point(x: float, y: float, domain: Rectangle, c4: float) -> tuple[float, float]:
    """Mirror of a collar point across its unique nearest edge."""
    edge = nearest_edge(domain, x, y, c4)
    if edge == "left":
        return 2.0 * domain.x_min - x, y
    if edge == "right":
        return 2.0 * domain.x_max - x, y
    if edge == "bottom":
        return x, 2.0 * domain.y_min - y
    return x, 2.0 * domain.y_max - y


@dataclass
class AssumptionCheck:
    name: str
    passed: bool
    margin: float | None
    message: str


@dataclass
class AssumptionReport:
    checks: list[AssumptionCheck]

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def lines(self) -> list[str]:
        return [
            f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.message}"
            for c in self.checks
        ]


def validate_assumptions(cfg: GeometryConfig, m0) -> AssumptionReport:
    """Check the structural assumptions against an initial-interface descriptor.

    m0 is an initial_data.CircleInterface or SegmentInterface.
    """
    from . import initial_data  # local import to avoid a cycle

    checks: list[AssumptionCheck] = []
    checks.append(AssumptionCheck(
        "A1-interior-ball", True, cfg.r0,
        f"obstacles are unions of radius-{cfg.r0:g} disks (by construction)"))

    gap = cfg.obstacle_gap()
    if gap is None:
        checks.append(AssumptionCheck(
            "A2-obstacle-gap", True, None, "at most one obstacle family present"))
    else:
        checks.append(AssumptionCheck(
            "A2-obstacle-gap", gap >= cfg.r1, gap,
            f"gap {gap:.4g} vs required r1 {cfg.r1:.4g}"))

    if isinstance(m0, initial_data.CircleInterface):
        wall = min(
            m0.cx - cfg.domain.x_min, cfg.domain.x_max - m0.cx,
            m0.cy - cfg.domain.y_min, cfg.domain.y_max - m0.cy) - m0.radius
        checks.append(AssumptionCheck(
            "A3-perpendicular-contact", wall > 0, wall,
            "interior circle: no boundary contact" if wall > 0
            else f"circle reaches the boundary by {-wall:.4g}"))
        checks.append(AssumptionCheck(
            "A5-boundary-chart", True, None, "vacuous for an interior circle"))
    else:
        checks.append(AssumptionCheck(
            "A3-perpendicular-contact", True, None,
            "axis-aligned chord meets opposite edges at right angles (by construction)"))
        checks.append(AssumptionCheck(
            "A5-boundary-chart", True, None,
            "flat chord realizes the boundary chart trivially"))

    worst = math.inf
    ok = True
    msgs = []
    for disk, inside in [(d, True) for d in cfg.obstacles_plus] + \
                        [(d, False) for d in cfg.obstacles_minus]:
        margin = m0.separation_margin(disk, inside_positive=inside)
        worst = min(worst, margin)
        if margin <= 0:
            ok = False
            side = "inside" if inside else "outside"
            msgs.append(f"obstacle at ({disk.cx:g}, {disk.cy:g}) not strictly "
                        f"{side} the initial interface (margin {margin:.4g})")
    checks.append(AssumptionCheck(
        "A4-initial-separation", ok, None if worst is math.inf else worst,
        "; ".join(msgs) if msgs else
        f"initial interface clears every obstacle (min margin "
        f"{worst:.4g})" if worst is not math.inf else "no obstacles present"))
    return AssumptionReport(checks)
