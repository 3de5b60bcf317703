"""Exact solvers for Unsplittable Flow on capacitated graphs of bounded treewidth."""
from .core import (CapacitatedGraph, InputError, Instance, LimitExceeded, Routing, Task,
                   VerificationReport, edge_loads, parse_instance, parse_routing, serialize_instance,
                   serialize_routing, verify_routing)
from .oracle import OptimalResult, enumerate_paths, solve_exhaustive

__version__ = "0.1.0"

__all__ = [
    "CapacitatedGraph", "InputError", "Instance", "LimitExceeded", "OptimalResult", "Routing",
    "Task", "VerificationReport", "edge_loads", "enumerate_paths", "parse_instance", "parse_routing",
    "serialize_instance", "serialize_routing", "solve_exhaustive", "verify_routing",
]
