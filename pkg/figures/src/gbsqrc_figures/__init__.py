"""Figure rendering from gbsqrc experiment CSV outputs.

A pure function of the input files: no physics recomputation, no network,
and no imports from the experiment package -- the CSV + schema files are the
whole interface.
"""

from .loader import SchemaError, load_table
from .render import FIGURE_IDS, render

__version__ = "0.1.0"

__all__ = ["FIGURE_IDS", "SchemaError", "load_table", "render"]
