"""Figure rendering for front files and comparison reports.

Consumes only the CSV/JSON artifacts emitted by the fairpareto CLI: front
files (model coordinates, objective columns f_1..f_m, diagnostic columns),
run manifests and comparison reports with per-metric profile CSVs.
"""

from fairplots.render import PlotError, PlotSpec, render

__version__ = "0.1.0"

__all__ = ["PlotError", "PlotSpec", "render", "__version__"]
