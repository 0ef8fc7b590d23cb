"""Discrete-time scattering processes and stability verification.

The package implements causal operators on a half-step time grid, the
alpha-passivity machinery, the iterated passive process with its a-priori
bound, and dual scattering channel (DSC / TLM) runs built on top of it.
"""
from .checks import CheckReport, Witness, check_causality, check_delimiting, check_passivity, probe_family
from .dsc import (
    DscTrace,
    PropagatingField,
    ScatteringMapPair,
    check_equivalence,
    composed_step_operator,
    lift_connection,
    lift_reflection,
    node_boundary,
    recover_h2,
    run_dsc,
)
from .functionals import DelimitingFunctional
from .iteration import (
    ExistenceError,
    InconsistencyError,
    IteratedProcess,
    StabilityReport,
    bound_value,
    iterate,
    verify_stability,
)
from .operators import (
    CausalOperator,
    compose,
    convolution_operator,
    delay,
    identity,
    lookahead,
    pointwise,
    scale,
    shift_operator,
    zero_operator,
)
from .timesignal import Excitation, Signal, StateSpace, TimeGrid, impulse, mu_sum, shift, truncate

__version__ = "0.1.0"

__all__ = [
    "CheckReport",
    "Witness",
    "check_causality",
    "check_delimiting",
    "check_passivity",
    "probe_family",
    "DscTrace",
    "PropagatingField",
    "ScatteringMapPair",
    "check_equivalence",
    "composed_step_operator",
    "lift_connection",
    "lift_reflection",
    "node_boundary",
    "recover_h2",
    "run_dsc",
    "DelimitingFunctional",
    "ExistenceError",
    "InconsistencyError",
    "IteratedProcess",
    "StabilityReport",
    "bound_value",
    "iterate",
    "verify_stability",
    "CausalOperator",
    "compose",
    "convolution_operator",
    "delay",
    "identity",
    "lookahead",
    "pointwise",
    "scale",
    "shift_operator",
    "zero_operator",
    "Excitation",
    "Signal",
    "StateSpace",
    "TimeGrid",
    "impulse",
    "mu_sum",
    "shift",
    "truncate",
]
