"""Coarsest simulation preorder over labelled transition systems."""

from .errors import FormatError, SimrelError, ValidationError
from .lts import NormalizedLts, RawLts, RemapReport, normalize
from .oracle import StateRelation
from .partition import Partition, init_partition
from .sim import SimResult, Stats, Strategy, initial_refinement, run

__version__ = "0.1.0"

__all__ = [
    "FormatError", "SimrelError", "ValidationError",
    "NormalizedLts", "RawLts", "RemapReport", "normalize",
    "StateRelation", "Partition", "init_partition",
    "SimResult", "Stats", "Strategy", "initial_refinement", "run",
    "__version__",
]
