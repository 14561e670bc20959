"""Battery cycling data: vendor file conversion, per-cycle statistics, dQ/dV and GITT."""
import json
from pathlib import Path

from ._cyclebench import (
    CYCLE_COLUMNS,
    ROLLUP_COLUMNS,
    Dataset,
    Error,
    _stats_json,
    convert,
    detect_format,
    dqdv,
    format_ids,
    gitt,
    gitt_diffusivity,
    load_dataset,
    resolve_cycles,
)

__all__ = [
    "CYCLE_COLUMNS", "ROLLUP_COLUMNS", "Dataset", "Error", "convert", "convert_file", "cycle_stats",
    "detect_format", "dqdv", "format_ids", "gitt", "gitt_diffusivity", "load_dataset", "resolve_cycles",
]


def convert_file(path, format_id=None, malformed_tolerance=0.0):
    """Convert a vendor export; returns (format_id, [Dataset per channel])."""
    path = Path(path)
    return convert(path.read_bytes(), path.name, format_id, malformed_tolerance)


def cycle_stats(dataset, reference="first"):
    """Per-cycle rows keyed by the Cycles column names, plus the rollup over all cycles."""
    return json.loads(_stats_json(dataset, reference))
