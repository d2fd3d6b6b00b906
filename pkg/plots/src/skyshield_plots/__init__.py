"""Figure rendering for skyshield sweep and scenario artifacts."""

from .artifacts import (ArtifactError, discover, load_cells,
                        load_grover_reports, load_scenario, load_sessions)
from .figures import (PlotSpec, plot_grover, plot_scenario, plot_scenarios,
                      plot_sweep, render_all, save_figure)

__version__ = "0.1.0"

__all__ = [
    "ArtifactError", "PlotSpec", "discover", "load_cells",
    "load_grover_reports", "load_scenario", "load_sessions", "plot_grover",
    "plot_scenario", "plot_scenarios", "plot_sweep", "render_all",
    "save_figure",
]
