"""Exact-arithmetic simulator for a bilocal classical theory and its CT baseline."""

from .kernels import (
    Instrument,
    Kernel,
    apply,
    conditional_compose,
    is_atomic,
    is_deterministic,
    is_reversible,
    parallel_compose,
    sequential_compose,
    validate_instrument,
)
from .labels import LeafLabel, NodeLabel, PureLabel, enumerate_pure_labels
from .states import (
    EffectVector,
    GeneralizedVector,
    StateVector,
    apply_effect_at,
    is_separable,
    marginal,
    pair,
    pure_state,
    tensor_states,
    unit_effect,
)
from .systems import (
    ElementarySystem,
    SystemTree,
    TheoryMode,
    bibit,
    compose_systems,
    dimension,
    leaf,
    left_comb,
    trivial,
)

__all__ = [
    "EffectVector",
    "ElementarySystem",
    "GeneralizedVector",
    "Instrument",
    "Kernel",
    "LeafLabel",
    "NodeLabel",
    "PureLabel",
    "StateVector",
    "SystemTree",
    "TheoryMode",
    "apply",
    "apply_effect_at",
    "bibit",
    "compose_systems",
    "conditional_compose",
    "dimension",
    "enumerate_pure_labels",
    "is_atomic",
    "is_deterministic",
    "is_reversible",
    "is_separable",
    "leaf",
    "left_comb",
    "marginal",
    "pair",
    "parallel_compose",
    "pure_state",
    "sequential_compose",
    "tensor_states",
    "trivial",
    "unit_effect",
    "validate_instrument",
]

__version__ = "0.1.0"
