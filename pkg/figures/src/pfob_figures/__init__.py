"""Figure generation from pfob run artifacts; rendering only, no physics."""

from .plots import (plot_density, plot_discrepancy_sweep, plot_energy,
                    plot_snapshot_overlay)
from .readers import (SchemaError, energy_monotone_verdict, read_diagnostics,
                      read_snapshot, read_sweep)

__version__ = "0.1.0"
