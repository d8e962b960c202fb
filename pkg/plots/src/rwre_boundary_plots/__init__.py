"""Figure generation for rwre-boundary experiment artifacts.

This package reads the CSV/JSON files written by the `rwre-boundary` CLI and
renders the standard views.  It never recomputes statistics: every plotted
number is a column or key present in the input files, so figures cannot
drift from the data.  Inputs are accepted only when the run's manifest.json
(adjacent to each data file) carries a recognized schema_version.
"""

from .schema import SCHEMA_VERSIONS_SUPPORTED, FigureSpec, SchemaError

__all__ = ["FigureSpec", "SchemaError", "SCHEMA_VERSIONS_SUPPORTED", "__version__"]
__version__ = "0.1.0"
