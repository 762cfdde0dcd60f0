"""Zone algebra (difference bound matrices)."""
from ._kernels import backend
from .dbm import (
    EMPTY,
    Bound,
    Dbm,
    Interval,
    ZoneError,
    canonicalize,
    constrain,
    covered_by,
    extrapolate,
    includes,
    intersect,
    render,
    reset,
    split_on_interval,
    subtract,
    time_elapse,
)

__all__ = [
    "EMPTY",
    "Bound",
    "Dbm",
    "Interval",
    "ZoneError",
    "backend",
    "canonicalize",
    "constrain",
    "covered_by",
    "extrapolate",
    "includes",
    "intersect",
    "render",
    "reset",
    "split_on_interval",
    "subtract",
    "time_elapse",
]
