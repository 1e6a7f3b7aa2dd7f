"""Run configuration: a single YAML tree, validated before any compute.

Every physical quantity is in domain units. All numeric defaults flow into the
manifest so a run is reproducible from the manifest alone; the system is
deterministic (no RNG anywhere).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .geometry import ConfigError, GeometryConfig, Grid, Rectangle
from .initial_data import CircleInterface, InitialDataSpec, SegmentInterface

FORMAT_VERSIONS = {"snapshot": 1, "diagnostics_csv": 1, "sweep_csv": 1}

# discretization slack for the barrier comparison tolerance 1e-6 + C_DISC h^2,
# pinned once on the coarsest reference run and frozen
C_DISC = 50.0

# steps between in-run discrepancy-sup samples (transients are shorter than a
# checkpoint interval at coarse eps)
XI_SUP_STRIDE = 25


@dataclass
class RunConfig:
    domain: Rectangle = field(default_factory=lambda: Rectangle(0.0, 1.0, 0.0, 1.0))
    obstacle_r0: float = 0.1
    obstacles_plus: list = field(default_factory=lambda: [(0.5, 0.5)])
    obstacles_minus: list = field(default_factory=list)
    obstacle_r1: float = 0.0
    delta: float = 0.05
    c4: float | None = None
    potential_name: str = "quartic"
    m0_kind: str = "circle"
    m0_center: tuple = (0.5, 0.5)
    m0_radius: float = 0.3
    m0_axis: str = "x"
    m0_position: float = 0.5
    m0_positive_side: str = "upper"
    beta_star: float = 0.25
    c_star_star: float = 0.2
    eps_list: list = field(default_factory=lambda: [0.08, 0.04, 0.02])
    points_per_eps: float = 5.0     # h = eps / points_per_eps
    s_cfl: float = 0.4
    t_end: float = 0.1
    checkpoint_every: int | None = None
    density_stride: int = 4
    density_radii: int = 8
    barriers_enabled: bool = True
    write_snapshots: bool = True

    def geometry(self) -> GeometryConfig:
        return GeometryConfig.build(self.domain, self.obstacles_plus,
                                    self.obstacles_minus, self.obstacle_r0,
                                    self.delta, self.obstacle_r1, self.c4)

    def m0(self):
        if self.m0_kind == "circle":
            return CircleInterface(self.m0_center[0], self.m0_center[1],
                                   self.m0_radius)
        if self.m0_kind == "segment":
            return SegmentInterface(self.domain, self.m0_axis, self.m0_position,
                                    self.m0_positive_side)
        raise ConfigError(f"unknown m0 kind {self.m0_kind!r}")

    def initial_spec(self, eps: float) -> InitialDataSpec:
        return InitialDataSpec(self.m0(), eps, self.beta_star, self.c_star_star)

    def grid_for(self, eps: float) -> Grid:
        return Grid.for_resolution(self.domain, eps / self.points_per_eps)

    def validate(self) -> None:
        """Cross-section consistency, checked before any compute."""
        if len(set(self.eps_list)) != len(self.eps_list):
            raise ConfigError("eps_list entries must be distinct")
        if sorted(self.eps_list, reverse=True) != list(self.eps_list):
            raise ConfigError("eps_list must be strictly decreasing")
        if any(e <= 0 for e in self.eps_list):
            raise ConfigError("eps values must be positive")
        if self.points_per_eps < 5.0:
            raise ConfigError("grid must resolve the profile: need h <= eps/5")
        geom = self.geometry()
        m0 = self.m0()
        for eps in self.eps_list:
            spec = self.initial_spec(eps)
            spec.validate_against(geom.obstacles_plus, geom.obstacles_minus)
            self.grid_for(eps)  # raises if incommensurate
        from .geometry import validate_assumptions
        report = validate_assumptions(geom, m0)
        if not report.all_passed:
            raise ConfigError("assumption validation failed:\n"
                              + "\n".join(report.lines()))

    def to_dict(self) -> dict:
        return {
            "domain": {"x_min": self.domain.x_min, "x_max": self.domain.x_max,
                       "y_min": self.domain.y_min, "y_max": self.domain.y_max},
            "obstacles": {"r0": self.obstacle_r0,
                          "plus": [list(c) for c in self.obstacles_plus],
                          "minus": [list(c) for c in self.obstacles_minus],
                          "r1": self.obstacle_r1, "delta": self.delta,
                          "c4": self.c4},
            "potential": {"name": self.potential_name},
            "initial_data": self._m0_dict(),
            "solver": {"s_cfl": self.s_cfl, "t_end": self.t_end,
                       "checkpoint_every": self.checkpoint_every,
                       "points_per_eps": self.points_per_eps},
            "eps_list": list(self.eps_list),
            "diagnostics": {"density_stride": self.density_stride,
                            "density_radii": self.density_radii},
            "barriers": {"enabled": self.barriers_enabled},
            "output": {"snapshots": self.write_snapshots},
        }

    def _m0_dict(self) -> dict:
        d = {"m0": {"kind": self.m0_kind},
             "beta_star": self.beta_star, "c_star_star": self.c_star_star}
        if self.m0_kind == "circle":
            d["m0"].update(center=list(self.m0_center), radius=self.m0_radius)
        else:
            d["m0"].update(axis=self.m0_axis, position=self.m0_position,
                           positive_side=self.m0_positive_side)
        return d


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config not found: {path}")
    try:
        raw = yaml.safe_load(path.read_text()) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    cfg = config_from_dict(raw)
    cfg.validate()
    return cfg


def config_from_dict(raw: dict) -> RunConfig:
    cfg = RunConfig()
    if "domain" in raw:
        d = raw["domain"]
        cfg.domain = Rectangle(float(d["x_min"]), float(d["x_max"]),
                               float(d["y_min"]), float(d["y_max"]))
    obs = raw.get("obstacles", {})
    cfg.obstacle_r0 = float(obs.get("r0", cfg.obstacle_r0))
    if "plus" in obs:
        cfg.obstacles_plus = [tuple(map(float, c)) for c in obs["plus"]]
    if "minus" in obs:
        cfg.obstacles_minus = [tuple(map(float, c)) for c in obs["minus"]]
    cfg.obstacle_r1 = float(obs.get("r1", cfg.obstacle_r1))
    cfg.delta = float(obs.get("delta", cfg.delta))
    if obs.get("c4") is not None:
        cfg.c4 = float(obs["c4"])
    cfg.potential_name = raw.get("potential", {}).get("name", cfg.potential_name)
    if cfg.potential_name != "quartic":
        raise ConfigError("only the built-in quartic well is configurable; "
                          "custom wells go through the library API")
    ini = raw.get("initial_data", {})
    m0 = ini.get("m0", {})
    cfg.m0_kind = m0.get("kind", cfg.m0_kind)
    if cfg.m0_kind == "circle":
        if "center" in m0:
            cfg.m0_center = tuple(map(float, m0["center"]))
        cfg.m0_radius = float(m0.get("radius", cfg.m0_radius))
    else:
        cfg.m0_axis = m0.get("axis", cfg.m0_axis)
        cfg.m0_position = float(m0.get("position", cfg.m0_position))
        cfg.m0_positive_side = m0.get("positive_side", cfg.m0_positive_side)
    cfg.beta_star = float(ini.get("beta_star", cfg.beta_star))
    cfg.c_star_star = float(ini.get("c_star_star", cfg.c_star_star))
    sol = raw.get("solver", {})
    cfg.s_cfl = float(sol.get("s_cfl", cfg.s_cfl))
    cfg.t_end = float(sol.get("t_end", cfg.t_end))
    if sol.get("checkpoint_every") is not None:
        cfg.checkpoint_every = int(sol["checkpoint_every"])
    cfg.points_per_eps = float(sol.get("points_per_eps", cfg.points_per_eps))
    if "eps_list" in raw:
        cfg.eps_list = [float(e) for e in raw["eps_list"]]
    diag = raw.get("diagnostics", {})
    cfg.density_stride = int(diag.get("density_stride", cfg.density_stride))
    cfg.density_radii = int(diag.get("density_radii", cfg.density_radii))
    cfg.barriers_enabled = bool(raw.get("barriers", {}).get("enabled",
                                                            cfg.barriers_enabled))
    cfg.write_snapshots = bool(raw.get("output", {}).get("snapshots",
                                                         cfg.write_snapshots))
    return cfg


def default_config() -> RunConfig:
    """The desk-scale reference configuration."""
    return RunConfig()


def dump_config(cfg: RunConfig, path: str | Path) -> None:
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))
