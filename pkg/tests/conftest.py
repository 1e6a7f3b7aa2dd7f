import numpy as np
import pytest

from pfob.config import default_config
from pfob.geometry import Rectangle
from pfob.runner import run_single


def quick_config():
    """Small, fast configuration for unit tests (coarse eps, short horizon)."""
    cfg = default_config()
    cfg.eps_list = [0.1]
    cfg.t_end = 5e-4
    cfg.checkpoint_every = 20
    return cfg


@pytest.fixture(scope="session")
def desk_config():
    return default_config()


@pytest.fixture(scope="session")
def obstructed_sweep(tmp_path_factory):
    """The reference sweep with the obstacle, full horizon, all eps."""
    out = tmp_path_factory.mktemp("sweep_obstructed")
    cfg = default_config()
    results = {eps: run_single(cfg, eps, out / f"eps_{eps:g}")
               for eps in cfg.eps_list}
    return cfg, results, out


@pytest.fixture(scope="session")
def clean_sweep(tmp_path_factory):
    """The same desk sweep with forcing removed (free mean curvature flow)."""
    out = tmp_path_factory.mktemp("sweep_clean")
    cfg = default_config()
    cfg.obstacles_plus, cfg.obstacles_minus = [], []
    cfg.barriers_enabled = False
    results = {eps: run_single(cfg, eps, out / f"eps_{eps:g}")
               for eps in cfg.eps_list}
    return cfg, results, out


@pytest.fixture(scope="session")
def circle_benchmark():
    from pfob import verify
    return verify.benchmark_circle(default_config(), eps=0.02, t_end=0.02)


@pytest.fixture(scope="session")
def comparison_results():
    from pfob import verify
    cfg = default_config()
    return {eps: verify.verify_comparison(cfg, eps) for eps in cfg.eps_list}


@pytest.fixture(scope="session")
def variant_result():
    """Two-obstacle variant: wider box, opposite-sign obstacle to the right."""
    cfg = default_config()
    cfg.domain = Rectangle(0.0, 2.0, 0.0, 1.0)
    cfg.obstacles_minus = [(1.5, 0.5)]
    cfg.obstacle_r1 = 0.5
    cfg.eps_list = [0.04]
    cfg.validate()
    return cfg, run_single(cfg, 0.04, None)
