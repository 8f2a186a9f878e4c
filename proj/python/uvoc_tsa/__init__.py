"""Python bindings for the uVOC transient-stability toolkit."""

from ._core import (
    ParseError,
    ValidationError,
    builtin_cases,
    clearing_sweep,
    describe_params,
    droop_sweep,
    equilibria,
    feasibility_bound,
    limit_cycle,
    simulate,
    thevenin_split,
)

__all__ = [
    "ParseError",
    "ValidationError",
    "builtin_cases",
    "clearing_sweep",
    "describe_params",
    "droop_sweep",
    "equilibria",
    "feasibility_bound",
    "limit_cycle",
    "simulate",
    "thevenin_split",
]
