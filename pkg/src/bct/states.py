"""States, effects and generalized vectors over the pure-label basis.

Coefficients are exact rationals; nothing here ever renormalizes.  The null
state is the empty coefficient map.  Sub-normalized states are first-class
(they are what instrument branches produce).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .labels import (
    Move,
    NodeLabel,
    PureLabel,
    UNIT,
    apply_moves,
    enumerate_pure_labels,
    label_matches,
    move_system_sequence,
    regroup,
    subtree_system,
)
from .systems import Node as SysNode
from .systems import SystemTree, TheoryMode, Trivial, delete_at

ZERO = Fraction(0)
ONE = Fraction(1)
HALF = Fraction(1, 2)

Coeffs = Mapping[PureLabel, Fraction]


def _clean(coeffs: Coeffs) -> dict[PureLabel, Fraction]:
    return {label: Fraction(value) for label, value in coeffs.items() if value != 0}


@dataclass(frozen=True)
class GeneralizedVector:
    """A vector in the real span of the pure labels; no positivity constraint."""

    system: SystemTree
    coeffs: dict[PureLabel, Fraction] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _clean(self.coeffs))
        for label in self.coeffs:
            if not label_matches(self.system, label):
                raise ValueError(f"label {label} does not belong to the system")

    @property
    def weight(self) -> Fraction:
        return sum(self.coeffs.values(), ZERO)

    def __getitem__(self, label: PureLabel) -> Fraction:
        return self.coeffs.get(label, ZERO)


@dataclass(frozen=True)
class StateVector(GeneralizedVector):
    def __post_init__(self) -> None:
        super().__post_init__()
        for label, value in self.coeffs.items():
            if value < 0:
                raise ValueError(f"negative weight {value} at {label}")
        if self.weight > 1:
            raise ValueError(f"total weight {self.weight} exceeds 1")

    @property
    def is_deterministic(self) -> bool:
        return self.weight == 1


@dataclass(frozen=True)
class EffectVector(GeneralizedVector):
    def __post_init__(self) -> None:
        super().__post_init__()
        for label, value in self.coeffs.items():
            if not 0 <= value <= 1:
                raise ValueError(f"effect coefficient {value} outside [0,1] at {label}")


def null_state(system: SystemTree) -> StateVector:
    return StateVector(system, {})


def pure_state(system: SystemTree, label: PureLabel) -> StateVector:
    return StateVector(system, {label: ONE})


def scalar_state(mode: TheoryMode, value: Fraction) -> StateVector:
    return StateVector(Trivial(mode), {UNIT: Fraction(value)})


def unit_effect(system: SystemTree) -> EffectVector:
    return EffectVector(system, {label: ONE for label in enumerate_pure_labels(system)})


def point_effect(system: SystemTree, label: PureLabel) -> EffectVector:
    return EffectVector(system, {label: ONE})


def validate_effect(vector: GeneralizedVector) -> bool:
    """Effects of the theory are exactly the [0,1]-coefficient functionals."""
    return all(0 <= value <= 1 for value in vector.coeffs.values())


def scale(vector: GeneralizedVector, factor: Fraction) -> GeneralizedVector:
    return type(vector)(vector.system, {l: v * factor for l, v in vector.coeffs.items()})


def add_states(a: StateVector, b: StateVector) -> StateVector:
    if a.system != b.system:
        raise ValueError("system mismatch")
    out = dict(a.coeffs)
    for label, value in b.coeffs.items():
        out[label] = out.get(label, ZERO) + value
    return StateVector(a.system, out)


def tensor_states(rho: GeneralizedVector, sigma: GeneralizedVector) -> GeneralizedVector:
    """Parallel composition; |i>|j> = (1/2) sum_s (ij)_s in BCT, (ij) in CT."""
    if isinstance(rho, EffectVector) or isinstance(sigma, EffectVector):
        raise TypeError("effects compose with tensor_effects, not tensor_states")
    if rho.system.mode is not sigma.system.mode:
        raise ValueError("cannot compose states from different theory modes")
    mode = rho.system.mode
    system = _compose(rho.system, sigma.system)
    out: dict[PureLabel, Fraction] = {}
    for la, va in rho.coeffs.items():
        for lb, vb in sigma.coeffs.items():
            if isinstance(rho.system, Trivial):
                out[lb] = out.get(lb, ZERO) + va * vb
            elif isinstance(sigma.system, Trivial):
                out[la] = out.get(la, ZERO) + va * vb
            elif mode is TheoryMode.CT:
                key = NodeLabel(la, lb, 1)
                out[key] = out.get(key, ZERO) + va * vb
            else:
                for s in (-1, 1):
                    key = NodeLabel(la, lb, s)
                    out[key] = out.get(key, ZERO) + va * vb * HALF
    cls = StateVector if isinstance(rho, StateVector) and isinstance(sigma, StateVector) \
        else type(rho)
    return cls(system, out)


def _compose(a: SystemTree, b: SystemTree) -> SystemTree:
    from .systems import compose_systems

    return compose_systems(a, b)


def tensor_effects(a: EffectVector, b: EffectVector) -> EffectVector:
    """Product effect; <a|<b| pairs to a(i)*b(j) on every sign of (ij)."""
    if a.system.mode is not b.system.mode:
        raise ValueError("cannot compose effects from different theory modes")
    system = _compose(a.system, b.system)
    out: dict[PureLabel, Fraction] = {}
    signs = (1,) if a.system.mode is TheoryMode.CT else (-1, 1)
    for la, va in a.coeffs.items():
        for lb, vb in b.coeffs.items():
            if isinstance(a.system, Trivial):
                out[lb] = out.get(lb, ZERO) + va * vb
            elif isinstance(b.system, Trivial):
                out[la] = out.get(la, ZERO) + va * vb
            else:
                for s in signs:
                    out[NodeLabel(la, lb, s)] = va * vb
    return EffectVector(system, out)


def pair(effect: GeneralizedVector, rho: GeneralizedVector) -> Fraction:
    if effect.system != rho.system:
        raise ValueError("effect and state live on different systems")
    if len(effect.coeffs) < len(rho.coeffs):
        small, big = effect.coeffs, rho.coeffs
    else:
        small, big = rho.coeffs, effect.coeffs
    return sum((value * big[label] for label, value in small.items() if label in big), ZERO)


def apply_moves_to_vector(vector: GeneralizedVector, moves: list[Move]) -> GeneralizedVector:
    """Transport a vector along a move sequence (a bijective relabeling)."""
    system = move_system_sequence(vector.system, moves)
    out = {apply_moves(label, moves): value for label, value in vector.coeffs.items()}
    return type(vector)(system, out)


def apply_effect_at(effect: GeneralizedVector, rho: StateVector, at: str) -> StateVector:
    """Contract a local effect against the subtree at `at` (steering).

    The pairing sign of the regrouped two-factor form is discarded, matching
    the sign independence of local effects.  With `at` the whole tree the
    result is a scalar wrapped as a state of the trivial system.
    """
    part = subtree_system(rho.system, at)
    if effect.system != part:
        raise ValueError("effect system does not match the selected subtree")
    if at == "":
        return scalar_state(rho.system.mode, pair(effect, rho))
    moves = regroup(rho.system, at)
    remainder = delete_at(rho.system, at)
    out: dict[PureLabel, Fraction] = {}
    for label, value in rho.coeffs.items():
        moved = apply_moves(label, moves)
        assert isinstance(moved, NodeLabel)
        weight = effect.coeffs.get(moved.left, ZERO)
        if weight != 0:
            rest = moved.right
            out[rest] = out.get(rest, ZERO) + weight * value
    return StateVector(remainder, out)


def marginal(rho: StateVector, keep: str) -> StateVector:
    """Unit effect on the complement of `keep`; unique by causality."""
    part = subtree_system(rho.system, keep)
    if keep == "":
        return rho
    moves = regroup(rho.system, keep)
    out: dict[PureLabel, Fraction] = {}
    for label, value in rho.coeffs.items():
        moved = apply_moves(label, moves)
        assert isinstance(moved, NodeLabel)
        out[moved.left] = out.get(moved.left, ZERO) + value
    return StateVector(part, out)


def partial_pair_state(effect: GeneralizedVector, rho: StateVector) -> GeneralizedVector:
    """Pair a bipartite effect with a state of the left factor.

    Returns the functional on the right factor b |-> (effect | rho x b).
    """
    if not isinstance(effect.system, SysNode):
        raise ValueError("effect must live on a composite system")
    left = effect.system.left
    right = effect.system.right
    if rho.system != left:
        raise ValueError("state does not match the left factor")
    out: dict[PureLabel, Fraction] = {}
    for label in enumerate_pure_labels(right):
        value = pair(effect, tensor_states(rho, pure_state(right, label)))
        if value != 0:
            out[label] = value
    return GeneralizedVector(right, out)


def is_separable(rho: StateVector, part: str = "0") -> bool:
    """Separability across the bipartition (subtree at `part`, complement).

    A state is separable iff its regrouped coefficient table is symmetric
    under the pairing sign; in CT every state is separable.
    """
    if rho.system.mode is TheoryMode.CT:
        return True
    subtree_system(rho.system, part)
    if part == "":
        raise ValueError("bipartition selector must pick a proper subtree")
    moves = regroup(rho.system, part)
    table: dict[PureLabel, Fraction] = {}
    for label, value in rho.coeffs.items():
        moved = apply_moves(label, moves)
        table[moved] = table.get(moved, ZERO) + value
    for moved, value in table.items():
        assert isinstance(moved, NodeLabel)
        partner = NodeLabel(moved.left, moved.right, -moved.sign)
        if value != table.get(partner, ZERO):
            return False
    return True


def discriminating_instrument(system: SystemTree) -> list[EffectVector]:
    """The observation-instrument {<x|} jointly discriminating the pure states."""
    return [point_effect(system, label) for label in enumerate_pure_labels(system)]


def vectors_equal(a: GeneralizedVector, b: GeneralizedVector) -> bool:
    return a.system == b.system and a.coeffs == b.coeffs
