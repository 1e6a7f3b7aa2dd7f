"""Phase-field simulation of mean curvature flow around obstacles.

A forced Allen-Cahn equation on a Neumann rectangle drives an interface that
cannot penetrate prescribed obstacle disks; the package couples the explicit
solver with the geometric-measure diagnostics and barrier comparisons that
certify the run.
"""

from .config import RunConfig, default_config, load_config
from .geometry import (ConfigError, Disk, GeometryConfig, Grid, Rectangle,
                       compute_c1, dist_to_set, forcing_g, ForcingField,
                       reflection_point, validate_assumptions)
from .initial_data import (CircleInterface, InitialDataSpec, SegmentInterface,
                           build_r, build_u0, clamp_eta,
                           verify_initial_properties)
from .potential import (DoubleWellPotential, Profile, QuadratureError,
                        s_gamma_eps, sigma, validate_potential)
from .solver import (MaxPrincipleError, PhaseState, SolverConfig, advance,
                     laplacian, stable_dt, step)

__version__ = "0.1.0"
