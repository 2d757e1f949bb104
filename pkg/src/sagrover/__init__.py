"""Hybrid simulated annealing with Grover subspace search for QUBO problems."""

from .annealing import SaConfig, SaResult, classical_sa, hybrid_sa, hybrid_step, select_free_bits
from .errors import (
    CapacityError,
    DimensionError,
    GateError,
    MarkedSetError,
    ParseError,
    PartitionError,
    SagroverError,
    SynthesisError,
)
from .grover import (
    CircuitBackend,
    SemanticBackend,
    diffusion,
    durr_hoyer_min,
    grover_search,
    optimal_iterations,
)
from .qubo import (
    PartialAssignment,
    QuboModel,
    ReducedQubo,
    brute_force_min,
    evaluate,
    five_variable_example,
    fix_variables,
    parse_model,
    random_instance,
    serialize_model,
)
from .runtime import (
    RuntimeParams,
    SpeedupRow,
    advantage_threshold,
    calibrate_tq,
    hybrid_runtime,
    saturation_q,
    speedup_table,
)
from .synthesis import resource_report, synthesize_cost_circuit, synthesize_threshold_oracle

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "CircuitBackend",
    "DimensionError",
    "GateError",
    "MarkedSetError",
    "ParseError",
    "PartialAssignment",
    "PartitionError",
    "QuboModel",
    "ReducedQubo",
    "RuntimeParams",
    "SaConfig",
    "SaResult",
    "SagroverError",
    "SemanticBackend",
    "SpeedupRow",
    "SynthesisError",
    "advantage_threshold",
    "brute_force_min",
    "calibrate_tq",
    "classical_sa",
    "diffusion",
    "durr_hoyer_min",
    "evaluate",
    "five_variable_example",
    "fix_variables",
    "grover_search",
    "hybrid_runtime",
    "hybrid_sa",
    "hybrid_step",
    "optimal_iterations",
    "parse_model",
    "random_instance",
    "resource_report",
    "saturation_q",
    "select_free_bits",
    "serialize_model",
    "speedup_table",
    "synthesize_cost_circuit",
    "synthesize_threshold_oracle",
]
