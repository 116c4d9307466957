"""Transformations as sign-flip kernels, instruments, and their calculus.

A kernel maps each input pure label to weighted (output label, tau) pairs,
tau in {-1,+1} being the sign flip exerted on whatever the system is paired
with.  Rows are sub-stochastic; a kernel is deterministic when every row
sums to one, atomic when it has a single nonzero entry, reversible when it
is a weight-one signed bijection of pure labels.

Applying a kernel at a subtree works through the regrouping calculus: bring
the subtree to the head of a bipartition, replace (a e)_u by (b e)_{tau*u},
and regroup back.  Effects (trivial output) discard the pairing sign;
preparations (trivial input) split it evenly, which is exactly the state
composition rule read as a kernel.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Sequence

from . import faults
from .labels import (
    Move,
    NodeLabel,
    PureLabel,
    UNIT,
    UnitLabel,
    apply_moves_tracked,
    enumerate_pure_labels,
    invert_moves,
    label_matches,
    regroup,
    subtree_system,
)
from .states import GeneralizedVector, StateVector, ZERO, ONE
from .systems import (
    SystemTree,
    TheoryMode,
    Trivial,
    compose_systems,
    dimension,
    replace_at,
    subtree_at,
)

Entry = tuple[PureLabel, int]


@dataclass(frozen=True)
class Kernel:
    in_system: SystemTree
    out_system: SystemTree
    rows: dict[PureLabel, dict[Entry, Fraction]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.in_system.mode is not self.out_system.mode:
            raise ValueError("kernel endpoints must share a theory mode")
        ct = self.in_system.mode is TheoryMode.CT
        out_trivial = isinstance(self.out_system, Trivial)
        clean: dict[PureLabel, dict[Entry, Fraction]] = {}
        for row_label, entries in self.rows.items():
            if not label_matches(self.in_system, row_label):
                raise ValueError(f"bad input label {row_label}")
            row: dict[Entry, Fraction] = {}
            total = ZERO
            for (out_label, tau), weight in entries.items():
                weight = Fraction(weight)
                if weight < 0:
                    raise ValueError("kernel weights must be non-negative")
                if weight == 0:
                    continue
                if tau not in (-1, 1):
                    raise ValueError("tau must be -1 or +1")
                if (ct or out_trivial) and tau != 1:
                    raise ValueError("tau is fixed +1 for effects and in CT mode")
                if not label_matches(self.out_system, out_label):
                    raise ValueError(f"bad output label {out_label}")
                row[(out_label, tau)] = row.get((out_label, tau), ZERO) + weight
                total += weight
            if total > 1:
                raise ValueError(f"row sum {total} exceeds 1 at {row_label}")
            if row:
                clean[row_label] = row
        object.__setattr__(self, "rows", clean)

    @property
    def mode(self) -> TheoryMode:
        return self.in_system.mode

    def row(self, label: PureLabel) -> dict[Entry, Fraction]:
        return self.rows.get(label, {})

    def row_sum(self, label: PureLabel) -> Fraction:
        return sum(self.row(label).values(), ZERO)


def kernels_equal(a: Kernel, b: Kernel) -> bool:
    return (a.in_system == b.in_system and a.out_system == b.out_system
            and a.rows == b.rows)


def identity_kernel(system: SystemTree) -> Kernel:
    rows = {label: {(label, 1): ONE} for label in enumerate_pure_labels(system)}
    return Kernel(system, system, rows)


def null_kernel(in_system: SystemTree, out_system: SystemTree) -> Kernel:
    return Kernel(in_system, out_system, {})


def scalar_kernel(mode: TheoryMode, value: Fraction) -> Kernel:
    t = Trivial(mode)
    if value == 0:
        return Kernel(t, t, {})
    return Kernel(t, t, {UNIT: {(UNIT, 1): Fraction(value)}})


def atomic_kernel(in_system: SystemTree, out_system: SystemTree, source: PureLabel,
                  target: PureLabel, tau: int = 1, weight: Fraction = ONE) -> Kernel:
    return Kernel(in_system, out_system, {source: {(target, tau): Fraction(weight)}})


def reversible_kernel(system_in: SystemTree, system_out: SystemTree,
                      perm: Mapping[PureLabel, PureLabel],
                      signs: Mapping[PureLabel, int] | None = None) -> Kernel:
    """Signed permutation of pure labels (the reversible transformations)."""
    rows: dict[PureLabel, dict[Entry, Fraction]] = {}
    for src, dst in perm.items():
        tau = 1 if signs is None else signs.get(src, 1)
        if system_in.mode is TheoryMode.CT:
            tau = 1
        rows[src] = {(dst, tau): ONE}
    kernel = Kernel(system_in, system_out, rows)
    if not is_reversible(kernel):
        raise ValueError("permutation table is not a reversible kernel")
    return kernel


def braid_kernel(a: SystemTree, b: SystemTree) -> Kernel:
    """The swap AB -> BA; flips the environment by the braided node's sign."""
    ab = compose_systems(a, b)
    ba = compose_systems(b, a)
    if isinstance(a, Trivial) or isinstance(b, Trivial):
        return identity_kernel(ab)
    rows: dict[PureLabel, dict[Entry, Fraction]] = {}
    for label in enumerate_pure_labels(ab):
        assert isinstance(label, NodeLabel)
        rows[label] = {(NodeLabel(label.right, label.left, label.sign), label.sign): ONE}
    return Kernel(ab, ba, rows)


def state_kernel(rho: StateVector) -> Kernel:
    """A state as a kernel from the trivial system.

    The tau of each entry is the fresh pairing sign toward the environment;
    preparing a pure label splits it evenly, matching state composition.
    """
    mode = rho.system.mode
    row: dict[Entry, Fraction] = {}
    for label, value in rho.coeffs.items():
        if isinstance(rho.system, Trivial):
            row[(label, 1)] = row.get((label, 1), ZERO) + value
        elif mode is TheoryMode.CT:
            row[(label, 1)] = row.get((label, 1), ZERO) + value
        else:
            for tau in (-1, 1):
                row[(label, tau)] = row.get((label, tau), ZERO) + value / 2
    return Kernel(Trivial(mode), rho.system, {UNIT: row} if row else {})


def effect_kernel(effect: GeneralizedVector) -> Kernel:
    """An effect as a kernel to the trivial system (tau fixed +1)."""
    rows = {label: {(UNIT, 1): value} for label, value in effect.coeffs.items()}
    return Kernel(effect.system, Trivial(effect.system.mode), rows)


# ---------------------------------------------------------------------------
# Composition


def sequential_compose(second: Kernel, first: Kernel) -> Kernel:
    """(second o first); internal signs flip independently, taus multiply."""
    if first.out_system != second.in_system:
        raise ValueError("systems do not chain")
    rows: dict[PureLabel, dict[Entry, Fraction]] = {}
    for a, row1 in first.rows.items():
        out: dict[Entry, Fraction] = {}
        for (b, tau1), w1 in row1.items():
            for (c, tau2), w2 in second.row(b).items():
                key = (c, tau1 * tau2)
                out[key] = out.get(key, ZERO) + w1 * w2
        if out:
            rows[a] = out
    return Kernel(first.in_system, second.out_system, rows)


def _extend_left(kernel: Kernel, other: SystemTree) -> Kernel:
    """kernel (x) I_other on compose(A, other): the flip reaches the environment."""
    a, b = kernel.in_system, kernel.out_system
    if isinstance(other, Trivial):
        return kernel
    in_sys = compose_systems(a, other)
    out_sys = compose_systems(b, other)
    rows: dict[PureLabel, dict[Entry, Fraction]] = {}
    drop_tau = faults.active_fault() == faults.PARALLEL_DROP_TAU
    if isinstance(a, Trivial):
        # preparation inserted on the left: fresh node sign = emitted flip
        prep = kernel.row(UNIT)
        for o in enumerate_pure_labels(other):
            out: dict[Entry, Fraction] = {}
            for (bl, tau), w in prep.items():
                key = ((o, 1) if isinstance(b, Trivial)
                       else (NodeLabel(bl, o, tau), tau))
                out[key] = out.get(key, ZERO) + w
            if out:
                rows[o] = out
        return Kernel(in_sys, out_sys, rows)
    for label in enumerate_pure_labels(in_sys):
        assert isinstance(label, NodeLabel)
        al, o, s = label.left, label.right, label.sign
        out = {}
        for (bl, tau), w in kernel.row(al).items():
            if isinstance(b, Trivial):
                key = (o, s if kernel.mode is TheoryMode.BCT else 1)
            else:
                node_sign = s if drop_tau else tau * s
                key = (NodeLabel(bl, o, node_sign), tau)
            out[key] = out.get(key, ZERO) + w
        if out:
            rows[label] = out
    return Kernel(in_sys, out_sys, rows)


def _extend_right(kernel: Kernel, other: SystemTree) -> Kernel:
    """I_other (x) kernel: the flip is absorbed by the composite node sign."""
    a, b = kernel.in_system, kernel.out_system
    if isinstance(other, Trivial):
        return kernel
    in_sys = compose_systems(other, a)
    out_sys = compose_systems(other, b)
    rows: dict[PureLabel, dict[Entry, Fraction]] = {}
    if isinstance(a, Trivial):
        prep = kernel.row(UNIT)
        for o in enumerate_pure_labels(other):
            out: dict[Entry, Fraction] = {}
            for (bl, tau), w in prep.items():
                key = ((o, 1) if isinstance(b, Trivial)
                       else (NodeLabel(o, bl, tau), 1))
                out[key] = out.get(key, ZERO) + w
            if out:
                rows[o] = out
        return Kernel(in_sys, out_sys, rows)
    for label in enumerate_pure_labels(in_sys):
        assert isinstance(label, NodeLabel)
        o, al, s = label.left, label.right, label.sign
        out = {}
        for (bl, tau), w in kernel.row(al).items():
            key = ((o, 1) if isinstance(b, Trivial)
                   else (NodeLabel(o, bl, tau * s), 1))
            out[key] = out.get(key, ZERO) + w
        if out:
            rows[label] = out
    return Kernel(in_sys, out_sys, rows)


def parallel_compose(k1: Kernel, k2: Kernel) -> Kernel:
    """k1 (x) k2, derived as (I (x) k2) o (k1 (x) I) through the braiding."""
    if k1.mode is not k2.mode:
        raise ValueError("cannot compose kernels from different theory modes")
    if isinstance(k1.in_system, Trivial) and isinstance(k1.out_system, Trivial):
        p = k1.row(UNIT).get((UNIT, 1), ZERO)
        return scale_kernel(k2, p) if not (isinstance(k2.in_system, Trivial)
                                           and isinstance(k2.out_system, Trivial)) \
            else scalar_kernel(k1.mode, p * k2.row(UNIT).get((UNIT, 1), ZERO))
    if isinstance(k2.in_system, Trivial) and isinstance(k2.out_system, Trivial):
        return scale_kernel(k1, k2.row(UNIT).get((UNIT, 1), ZERO))
    left = _extend_left(k1, k2.in_system)
    right = _extend_right(k2, k1.out_system)
    return sequential_compose(right, left)


def scale_kernel(kernel: Kernel, factor: Fraction) -> Kernel:
    rows = {a: {entry: w * factor for entry, w in row.items()}
            for a, row in kernel.rows.items()}
    return Kernel(kernel.in_system, kernel.out_system, rows)


def add_kernels(a: Kernel, b: Kernel) -> Kernel:
    if a.in_system != b.in_system or a.out_system != b.out_system:
        raise ValueError("system mismatch")
    rows: dict[PureLabel, dict[Entry, Fraction]] = {
        label: dict(row) for label, row in a.rows.items()
    }
    for label, row in b.rows.items():
        target = rows.setdefault(label, {})
        for entry, w in row.items():
            target[entry] = target.get(entry, ZERO) + w
    return Kernel(a.in_system, a.out_system, rows)


# ---------------------------------------------------------------------------
# Application


def extend_at(kernel: Kernel, system: SystemTree, at: str) -> Kernel:
    """The kernel acting on the subtree of `system` at `at`, as a kernel.

    Environment flips contributed by the regrouping braids and by the kernel
    itself are tracked exactly, so the result composes correctly.
    """
    part = subtree_at(system, at)
    if kernel.in_system != part:
        raise ValueError("kernel input does not match the selected subtree")
    if at == "":
        return kernel
    out_trivial = isinstance(kernel.out_system, Trivial)
    moves = regroup(system, at)
    back = invert_moves(moves)
    result_system = (compose_systems(Trivial(system.mode), _delete(system, at))
                     if out_trivial else replace_at(system, at, kernel.out_system))
    rows: dict[PureLabel, dict[Entry, Fraction]] = {}
    for label in enumerate_pure_labels(system):
        moved, flip_fwd = apply_moves_tracked(label, moves)
        assert isinstance(moved, NodeLabel)
        a, rest, u = moved.left, moved.right, moved.sign
        out: dict[Entry, Fraction] = {}
        for (b, tau), w in kernel.row(a).items():
            if out_trivial:
                # effect at head position: pairing sign becomes the flip
                key = (rest, flip_fwd * u if kernel.mode is TheoryMode.BCT else 1)
                out[key] = out.get(key, ZERO) + w
            else:
                replaced = NodeLabel(b, rest, tau * u)
                final, flip_back = apply_moves_tracked(replaced, back)
                key = (final, flip_fwd * tau * flip_back
                       if kernel.mode is TheoryMode.BCT else 1)
                out[key] = out.get(key, ZERO) + w
        if out:
            rows[label] = out
    return Kernel(system, result_system, rows)


def _delete(system: SystemTree, at: str) -> SystemTree:
    from .systems import delete_at

    return delete_at(system, at)


def apply(kernel: Kernel, rho: StateVector, at: str = "") -> StateVector:
    """Apply a kernel at a subtree of the state's system.

    On the full state environment flips are unobservable; when the output is
    trivial (an effect) the pairing sign is discarded, and when the whole
    tree is consumed tau is marginalized.
    """
    part = subtree_system(rho.system, at)
    if kernel.in_system != part:
        raise ValueError("kernel input does not match the selected subtree")
    out_trivial = isinstance(kernel.out_system, Trivial)
    out: dict[PureLabel, Fraction] = {}
    if at == "":
        result_system = kernel.out_system
        for label, value in rho.coeffs.items():
            for (b, _tau), w in kernel.row(label).items():
                out[b] = out.get(b, ZERO) + w * value
        return StateVector(result_system, out)
    moves = regroup(rho.system, at)
    back = invert_moves(moves)
    result_system = (_delete(rho.system, at) if out_trivial
                     else replace_at(rho.system, at, kernel.out_system))
    for label, value in rho.coeffs.items():
        moved, _ = apply_moves_tracked(label, moves)
        assert isinstance(moved, NodeLabel)
        a, rest, u = moved.left, moved.right, moved.sign
        for (b, tau), w in kernel.row(a).items():
            if out_trivial:
                out[rest] = out.get(rest, ZERO) + w * value
            else:
                replaced = NodeLabel(b, rest, tau * u)
                final, _ = apply_moves_tracked(replaced, back)
                out[final] = out.get(final, ZERO) + w * value
    return StateVector(result_system, out)


# ---------------------------------------------------------------------------
# Classification predicates


def is_deterministic(kernel: Kernel) -> bool:
    """Row sums all equal one (occurs with certainty on every input)."""
    basis = enumerate_pure_labels(kernel.in_system)
    return all(kernel.row_sum(label) == 1 for label in basis)


def is_atomic(kernel: Kernel) -> bool:
    """A single nonzero entry; preparations count distinct target labels."""
    entries = [(a, e) for a, row in kernel.rows.items() for e in row]
    if isinstance(kernel.in_system, Trivial):
        return len({out_label for _, (out_label, _) in entries}) == 1
    return len(entries) == 1


def is_reversible(kernel: Kernel, bound: int | None = None) -> bool:
    """Weight-one signed bijection of pure labels (the permutation form)."""
    if dimension(kernel.in_system) != dimension(kernel.out_system):
        return False
    targets: set[PureLabel] = set()
    for label in enumerate_pure_labels(kernel.in_system, bound):
        row = kernel.row(label)
        if len(row) != 1:
            return False
        ((out_label, _tau), weight), = row.items()
        if weight != 1 or out_label in targets:
            return False
        targets.add(out_label)
    return True


def invert_reversible(kernel: Kernel, bound: int | None = None) -> Kernel:
    """Inverse of a signed permutation; the same flips cancel on composition."""
    if not is_reversible(kernel, bound):
        raise ValueError("only reversible kernels invert")
    rows: dict[PureLabel, dict[Entry, Fraction]] = {}
    for a, row in kernel.rows.items():
        ((b, tau), _weight), = row.items()
        rows[b] = {(a, tau): ONE}
    return Kernel(kernel.out_system, kernel.in_system, rows)


def atomic_decomposition(kernel: Kernel) -> list[Kernel]:
    """Split into one atomic kernel per nonzero entry; parts re-sum exactly."""
    if isinstance(kernel.in_system, Trivial):
        raise ValueError("preparations do not decompose entrywise")
    parts = []
    for a in sorted(kernel.rows, key=_entry_sort_key_label):
        for (b, tau), w in sorted(kernel.rows[a].items(),
                                  key=lambda item: (_entry_sort_key_label(item[0][0]),
                                                    item[0][1])):
            parts.append(Kernel(kernel.in_system, kernel.out_system,
                                {a: {(b, tau): w}}))
    return parts


def _entry_sort_key_label(label: PureLabel):
    from .labels import label_sort_key

    return label_sort_key(label)


# ---------------------------------------------------------------------------
# Instruments


@dataclass(frozen=True)
class Instrument:
    branches: tuple[Kernel, ...]
    outcomes: tuple[Hashable, ...] = ()

    def __post_init__(self) -> None:
        if not self.branches:
            raise ValueError("an instrument needs at least one branch")
        first = self.branches[0]
        for k in self.branches:
            if k.in_system != first.in_system or k.out_system != first.out_system:
                raise ValueError("branches must share input and output systems")
        if not self.outcomes:
            object.__setattr__(self, "outcomes", tuple(range(len(self.branches))))
        elif len(self.outcomes) != len(self.branches):
            raise ValueError("one outcome label per branch")

    @property
    def in_system(self) -> SystemTree:
        return self.branches[0].in_system

    @property
    def out_system(self) -> SystemTree:
        return self.branches[0].out_system

    def total(self) -> Kernel:
        total = null_kernel(self.in_system, self.out_system)
        for k in self.branches:
            total = add_kernels(total, k)
        return total


def validate_instrument(branches: Sequence[Kernel] | Instrument) -> bool:
    """Branches are valid kernels whose sum is deterministic."""
    if isinstance(branches, Instrument):
        branches = branches.branches
    if not branches:
        return False
    first = branches[0]
    try:
        total = null_kernel(first.in_system, first.out_system)
        for k in branches:
            if k.in_system != first.in_system or k.out_system != first.out_system:
                return False
            total = add_kernels(total, k)
    except ValueError:
        return False
    return is_deterministic(total)


def coarse_grain(instrument: Instrument, partition: Sequence[Sequence[int]]) -> Instrument:
    """Merge outcome blocks by summing their kernels."""
    indices = [i for block in partition for i in block]
    if sorted(indices) != list(range(len(instrument.branches))):
        raise ValueError("partition must cover every outcome exactly once")
    branches = []
    outcomes = []
    for block in partition:
        merged = null_kernel(instrument.in_system, instrument.out_system)
        for i in block:
            merged = add_kernels(merged, instrument.branches[i])
        branches.append(merged)
        outcomes.append(tuple(instrument.outcomes[i] for i in block))
    return Instrument(tuple(branches), tuple(outcomes))


def conditional_compose(first: Instrument,
                        chooser: Callable[[Hashable], Instrument]) -> Instrument:
    """Outcome-dependent sequel: branches {B^(x)_y o A_x} labelled (x, y)."""
    branches: list[Kernel] = []
    outcomes: list[Hashable] = []
    for x, kx in zip(first.outcomes, first.branches):
        follow = chooser(x)
        if follow is None:
            raise ValueError(f"chooser undefined on outcome {x!r}")
        if follow.in_system != first.out_system:
            raise ValueError("conditioned instrument does not chain")
        for y, ky in zip(follow.outcomes, follow.branches):
            branches.append(sequential_compose(ky, kx))
            outcomes.append((x, y))
    return Instrument(tuple(branches), tuple(outcomes))


def discriminating_measurement(system: SystemTree) -> Instrument:
    """Measure-and-forget: one effect branch per pure label."""
    basis = enumerate_pure_labels(system)
    branches = tuple(Kernel(system, Trivial(system.mode), {label: {(UNIT, 1): ONE}})
                     for label in basis)
    return Instrument(branches, tuple(basis))


# ---------------------------------------------------------------------------
# Seeded random generators (documented test plumbing; dyadic weights)


def _dyadic_split(rng: random.Random, parts: int, grain: int = 16) -> list[Fraction]:
    """A dyadic probability vector of the given length summing to one."""
    cuts = sorted(rng.randrange(grain + 1) for _ in range(parts - 1))
    values = []
    previous = 0
    for c in cuts:
        values.append(Fraction(c - previous, grain))
        previous = c
    values.append(Fraction(grain - previous, grain))
    return values


def random_state(rng: random.Random, system: SystemTree,
                 deterministic: bool = True) -> StateVector:
    basis = enumerate_pure_labels(system)
    weights = _dyadic_split(rng, len(basis))
    if not deterministic:
        weights = [w * Fraction(rng.randrange(1, 17), 16) for w in weights]
    return StateVector(system, dict(zip(basis, weights)))


def random_deterministic_kernel(rng: random.Random, in_system: SystemTree,
                                out_system: SystemTree) -> Kernel:
    in_basis = enumerate_pure_labels(in_system)
    out_basis = enumerate_pure_labels(out_system)
    taus = (1,) if (in_system.mode is TheoryMode.CT
                    or isinstance(out_system, Trivial)) else (-1, 1)
    targets = [(b, t) for b in out_basis for t in taus]
    rows: dict[PureLabel, dict[Entry, Fraction]] = {}
    for a in in_basis:
        support = rng.sample(targets, k=min(len(targets), rng.randrange(1, 4)))
        rows[a] = dict(zip(support, _dyadic_split(rng, len(support))))
    return Kernel(in_system, out_system, rows)


def random_kernel(rng: random.Random, in_system: SystemTree,
                  out_system: SystemTree) -> Kernel:
    """Sub-stochastic in general; rows are scaled dyadic distributions."""
    base = random_deterministic_kernel(rng, in_system, out_system)
    rows = {}
    for a, row in base.rows.items():
        factor = Fraction(rng.randrange(0, 17), 16)
        if factor:
            rows[a] = {entry: w * factor for entry, w in row.items()}
    return Kernel(in_system, out_system, rows)


def random_reversible_kernel(rng: random.Random, system: SystemTree) -> Kernel:
    basis = enumerate_pure_labels(system)
    shuffled = list(basis)
    rng.shuffle(shuffled)
    signs = {a: (rng.choice((-1, 1)) if system.mode is TheoryMode.BCT else 1)
             for a in basis}
    return reversible_kernel(system, system, dict(zip(basis, shuffled)), signs)


def random_instrument(rng: random.Random, in_system: SystemTree,
                      out_system: SystemTree, branches: int = 2) -> Instrument:
    """Split a random channel's entries among branches; sum stays deterministic."""
    channel = random_deterministic_kernel(rng, in_system, out_system)
    rows_per_branch: list[dict[PureLabel, dict[Entry, Fraction]]] = \
        [{} for _ in range(branches)]
    for a, row in channel.rows.items():
        for entry, w in row.items():
            shares = _dyadic_split(rng, branches)
            for i, share in enumerate(shares):
                if share:
                    rows_per_branch[i].setdefault(a, {})[entry] = w * share
    kernels = tuple(Kernel(in_system, out_system, rows) for rows in rows_per_branch)
    return Instrument(kernels)
