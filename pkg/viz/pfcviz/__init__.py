"""Offline figures from pfcbench output files.

This package never imports the simulation code; it reads the documented
snapshot binary format and the benchmark/report CSV schemas and writes
PNG images.
"""

from .render import (
    SnapshotFormatError,
    SnapshotHandle,
    render_contour_overlay,
    render_costs,
    render_field,
)

__version__ = "0.1.0"

__all__ = [
    "SnapshotFormatError",
    "SnapshotHandle",
    "render_contour_overlay",
    "render_costs",
    "render_field",
]
