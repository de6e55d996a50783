"""Plotting companion for the MHD benchmark output formats."""

from .records import SchemaError, Series, read as read_records
from .render import plot_snapshot, plot_work_precision
from .snapfile import (FIELD_NAMES, Snapshot, SnapshotError, current_z,
                       div_b, field, read as read_snapshot)

__version__ = "0.1.0"

__all__ = [
    "SchemaError", "Series", "read_records", "plot_snapshot",
    "plot_work_precision", "FIELD_NAMES", "Snapshot", "SnapshotError",
    "current_z", "div_b", "field", "read_snapshot",
]
