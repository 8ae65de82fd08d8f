"""Coarsest simulation preorders on finite transition systems."""

from .engine import EngineStats, SimEngine, run, run_with_stats
from .model import (InputError, InvariantViolation, PartitionRelationPair, TransitionSystem,
                    explicit_relation, init_refine, parse_problem, parse_result, quotient,
                    serialize_result, serialize_system)
from .partition import RefinablePartition

__all__ = [
    "EngineStats", "InputError", "InvariantViolation", "PartitionRelationPair",
    "RefinablePartition", "SimEngine", "TransitionSystem", "explicit_relation",
    "init_refine", "parse_problem", "parse_result", "quotient", "run", "run_with_stats",
    "serialize_result", "serialize_system",
]
