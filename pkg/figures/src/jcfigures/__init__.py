"""Figure rendering for jcsynth scenario CSV output.

This package never recomputes physics: it consumes the CSV column contract
(`t,target_w,coupling,reproduced_w,residual`, plus the fig3 delta columns)
and produces the six figure-style plots.
"""

__version__ = "0.1.0"

from .csvio import ColumnError, CsvData, EmptyDataError, MetadataError, read_csv
from .render import FigureSpec, render

__all__ = [
    "__version__",
    "ColumnError",
    "CsvData",
    "EmptyDataError",
    "MetadataError",
    "read_csv",
    "FigureSpec",
    "render",
]
