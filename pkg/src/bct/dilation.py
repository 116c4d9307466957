"""Universal processor, channel decomposition, and instrument realisation.

Every channel A -> B decomposes greedily into deterministic function
channels i |-> (h(i), xi(i)): repeatedly subtract the minimum nonvanishing
row coefficient along a function hitting a nonzero entry in every row.  The
weights mu_{h,xi} program a single fixed reversible processor

    R: (B'' B) A -> (B'' A) B,
    ((sigma_{h,xi} k)_{s1} i)_{s3} |-> (((sigma_{h,xi} i)_{s1} h(i)+k)_{s3}, tau = xi(i))

with addition modulo D_B on the output register.  The program system B''
indexes every (h, xi) pair, so D_B'' = (2 D_B)^{D_A} and R is a bijection
on pure labels.  Arbitrary instruments are realised by the same processor
and program state, with one observation effect per branch built from the
branch/channel weight ratios.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .config import DILATION_MAX_DIM
from .kernels import (
    Instrument,
    Kernel,
    apply,
    is_deterministic,
    is_reversible,
)
from .labels import (
    Move,
    MoveKind,
    NodeLabel,
    PureLabel,
    enumerate_pure_labels,
)
from .states import (
    EffectVector,
    StateVector,
    add_states,
    apply_effect_at,
    apply_moves_to_vector,
    pure_state,
    scale,
    tensor_states,
    unit_effect,
    vectors_equal,
)
from .systems import (
    SystemTree,
    TheoryMode,
    Trivial,
    bibit,
    compose_systems,
    dimension,
    leaf,
)

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class FunctionLabel:
    """A deterministic function channel: input index i -> (h[i], xi[i])."""

    h: tuple[int, ...]
    xi: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.h) != len(self.xi):
            raise ValueError("h and xi must have the same arity")
        if any(s not in (-1, 1) for s in self.xi):
            raise ValueError("xi values must be -1 or +1")

    def sort_key(self) -> tuple:
        return self.h, tuple(0 if s == -1 else 1 for s in self.xi)


def enumerate_function_labels(d_in: int, d_out: int,
                              mode: TheoryMode) -> list[FunctionLabel]:
    """All (h, xi) pairs, h lexicographic then xi with - before +."""
    sign_choices: Sequence[tuple[int, ...]]
    if mode is TheoryMode.CT:
        sign_choices = [tuple([1] * d_in)]
    else:
        sign_choices = [tuple(s) for s in itertools.product((-1, 1), repeat=d_in)]
    out = []
    for h in itertools.product(range(1, d_out + 1), repeat=d_in):
        for xi in sorted(sign_choices):
            out.append(FunctionLabel(h, xi))
    out.sort(key=FunctionLabel.sort_key)
    return out


@dataclass(frozen=True)
class UniversalProcessor:
    a_system: SystemTree
    b_system: SystemTree
    program_system: SystemTree          # B''
    input_ancilla: SystemTree           # B' = B'' B
    output_ancilla: SystemTree          # A' = B'' A
    kernel: Kernel                      # reversible on (B'' B) A -> (B'' A) B
    program_index: dict[FunctionLabel, PureLabel] = field(default_factory=dict)

    @property
    def mode(self) -> TheoryMode:
        return self.a_system.mode


def _offset_add(m_index: int, k_index: int, d: int) -> int:
    return (m_index - 1 + k_index - 1) % d + 1


def build_processor(a: SystemTree, b: SystemTree,
                    bound: int = DILATION_MAX_DIM) -> UniversalProcessor:
    """Construct and verify the universal processor for A -> B."""
    if isinstance(a, Trivial) or isinstance(b, Trivial):
        raise ValueError("the processor needs non-trivial input and output systems")
    if a.mode is not b.mode:
        raise ValueError("systems must share a theory mode")
    mode = a.mode
    d_a, d_b = dimension(a), dimension(b)
    functions = enumerate_function_labels(d_a, d_b, mode)
    d_bpp = len(functions)
    program = leaf(d_bpp, mode, name="program")
    bprime = compose_systems(program, b)
    aprime = compose_systems(program, a)
    domain = compose_systems(bprime, a)
    if dimension(domain) > bound:
        raise ValueError(
            f"processor domain dimension {dimension(domain)} exceeds bound {bound}")
    a_labels = enumerate_pure_labels(a)
    b_labels = enumerate_pure_labels(b)
    a_index = {label: i + 1 for i, label in enumerate(a_labels)}
    b_index = {label: i + 1 for i, label in enumerate(b_labels)}
    program_labels = enumerate_pure_labels(program)
    program_index = dict(zip(functions, program_labels))

    signs = (1,) if mode is TheoryMode.CT else (-1, 1)
    rows: dict[PureLabel, dict[tuple[PureLabel, int], Fraction]] = {}
    for fl, sigma in program_index.items():
        for k_label in b_labels:
            k = b_index[k_label]
            for i_label in a_labels:
                i = a_index[i_label]
                m = _offset_add(fl.h[i - 1], k, d_b)
                tau = fl.xi[i - 1]
                for s1 in signs:
                    for s3 in signs:
                        source = NodeLabel(NodeLabel(sigma, k_label, s1), i_label, s3)
                        target = NodeLabel(NodeLabel(sigma, i_label, s1),
                                           b_labels[m - 1], s3)
                        rows[source] = {(target, tau): ONE}
    kernel = Kernel(domain, compose_systems(aprime, b), rows)
    if not is_reversible(kernel, bound):
        raise AssertionError("processor kernel failed the bijection check")
    return UniversalProcessor(a, b, program, bprime, aprime, kernel, program_index)


def decompose_channel(channel: Kernel) -> list[tuple[FunctionLabel, Fraction]]:
    """Greedy split of a channel into weighted deterministic function channels.

    Each step takes the minimum nonvanishing coefficient over all rows,
    assembles a function hitting a nonzero entry in every row (the smallest
    such target per row, the minimum cell anchoring its own row), subtracts,
    and records the weight.  Ties pick the lexicographically least (i, m,
    tau).  The parts re-sum to the channel and the weights sum to one.
    """
    if not is_deterministic(channel):
        raise ValueError("decompose_channel needs a deterministic kernel")
    mode = channel.mode
    a_labels = enumerate_pure_labels(channel.in_system)
    b_labels = enumerate_pure_labels(channel.out_system)
    b_index = {label: i + 1 for i, label in enumerate(b_labels)}
    d_a = len(a_labels)
    # remaining[i][(m, tau)] with m a 1-based output index
    remaining: list[dict[tuple[int, int], Fraction]] = []
    for a in a_labels:
        row: dict[tuple[int, int], Fraction] = {}
        for (b, tau), w in channel.row(a).items():
            row[(b_index[b], tau)] = row.get((b_index[b], tau), ZERO) + w
        remaining.append(row)

    out: list[tuple[FunctionLabel, Fraction]] = []
    guard = 0
    limit = 2 * d_a * len(b_labels)  # every step zeroes at least one cell
    while any(remaining):
        guard += 1
        if guard > limit:
            raise AssertionError("greedy decomposition failed to terminate")
        cells = [(i, m, tau)
                 for i, row in enumerate(remaining) for (m, tau) in sorted(row)]
        anchor = min(cells, key=lambda c: (remaining[c[0]][(c[1], c[2])],
                                           c[0], c[1], c[2]))
        i0, m0, tau0 = anchor
        lam0 = remaining[i0][(m0, tau0)]
        h, xi = [], []
        for i, row in enumerate(remaining):
            if i == i0:
                m, tau = m0, tau0
            else:
                m, tau = min(row)
            h.append(m)
            xi.append(tau)
            new = row[(m, tau)] - lam0
            if new:
                row[(m, tau)] = new
            else:
                del row[(m, tau)]
        out.append((FunctionLabel(tuple(h), tuple(xi)), lam0))
    merged: dict[FunctionLabel, Fraction] = {}
    for fl, mu in out:
        merged[fl] = merged.get(fl, ZERO) + mu
    return sorted(merged.items(), key=lambda item: item[0].sort_key())


def function_channel(fl: FunctionLabel, in_system: SystemTree,
                     out_system: SystemTree) -> Kernel:
    """The deterministic kernel i -> (h(i), xi(i)) with weight one."""
    a_labels = enumerate_pure_labels(in_system)
    b_labels = enumerate_pure_labels(out_system)
    rows = {a: {(b_labels[fl.h[i] - 1], fl.xi[i]): ONE}
            for i, a in enumerate(a_labels)}
    return Kernel(in_system, out_system, rows)


@dataclass(frozen=True)
class DilationResult:
    processor: UniversalProcessor
    sigma: StateVector                          # deterministic program state on B'
    observation: tuple[EffectVector, ...]       # one effect on A' per branch
    outcomes: tuple
    mu: dict[FunctionLabel, Fraction] = field(default_factory=dict)
    zeta: dict = field(default_factory=dict)
    verified: bool = False


def program_sigma(processor: UniversalProcessor,
                  mu: Sequence[tuple[FunctionLabel, Fraction]]) -> StateVector:
    """Sigma = sum mu_{h,xi} |sigma_{h,xi}> |0>, with |0> the first B label."""
    b_first = enumerate_pure_labels(processor.b_system)[0]
    total = None
    for fl, weight in mu:
        part = scale(
            tensor_states(pure_state(processor.program_system,
                                     processor.program_index[fl]),
                          pure_state(processor.b_system, b_first)),
            weight)
        part = StateVector(part.system, part.coeffs)
        total = part if total is None else add_states(total, part)
    assert total is not None
    return total


def dilated_apply(processor: UniversalProcessor, sigma: StateVector,
                  effect: EffectVector, rho: StateVector) -> StateVector:
    """Run the sandwich (Sigma, R, effect) on a state of A (x) E."""
    full = tensor_states(sigma, rho)
    full = StateVector(full.system, full.coeffs)
    full = apply_moves_to_vector(full, [Move(MoveKind.ASSOC_L, "")])
    full = StateVector(full.system, full.coeffs)
    staged = apply(processor.kernel, full, "0")
    return apply_effect_at(effect, staged, "00")


def realize_instrument(instrument: Instrument,
                       env: SystemTree | None = None,
                       processor: UniversalProcessor | None = None,
                       verify: bool = True) -> DilationResult:
    """Realise an instrument as (program state, processor, observation).

    All branches share one program state (the one programming their sum);
    each branch gets an observation effect built from the branch/channel
    weight ratios.  Whatever part of the program basis the channel never
    uses is absorbed into the first branch so the effects sum to the unit
    effect.
    """
    from .kernels import validate_instrument

    if not validate_instrument(instrument):
        raise ValueError("not a valid instrument (branch sum must be deterministic)")
    a, b = instrument.in_system, instrument.out_system
    if processor is None:
        processor = build_processor(a, b)
    channel = instrument.total()
    mu = decompose_channel(channel)
    mu_map = dict(mu)
    sigma = program_sigma(processor, mu)

    a_labels = enumerate_pure_labels(a)
    b_labels = enumerate_pure_labels(b)
    b_index = {label: i + 1 for i, label in enumerate(b_labels)}
    channel_cells: list[dict[tuple[int, int], Fraction]] = []
    for al in a_labels:
        cells: dict[tuple[int, int], Fraction] = {}
        for (bl, tau), w in channel.row(al).items():
            cells[(b_index[bl], tau)] = cells.get((b_index[bl], tau), ZERO) + w
        channel_cells.append(cells)

    signs = (1,) if processor.mode is TheoryMode.CT else (-1, 1)
    effects: list[EffectVector] = []
    zeta_tables: dict = {}
    for outcome, branch in zip(instrument.outcomes, instrument.branches):
        coeffs: dict[PureLabel, Fraction] = {}
        table: dict[tuple[FunctionLabel, int], Fraction] = {}
        for fl, _weight in mu:
            sigma_label = processor.program_index[fl]
            for i, al in enumerate(a_labels):
                cell = (fl.h[i], fl.xi[i])
                lam = channel_cells[i].get(cell, ZERO)
                gamma = ZERO
                for (bl, tau), w in branch.row(al).items():
                    if (b_index[bl], tau) == cell:
                        gamma += w
                z = gamma / lam if lam else ZERO
                if z:
                    table[(fl, i)] = z
                    for s1 in signs:
                        coeffs[NodeLabel(sigma_label, al, s1)] = z
        effects.append(EffectVector(processor.output_ancilla, coeffs))
        zeta_tables[outcome] = table

    # completion: absorb the program labels the channel never uses into the
    # first branch so the observation effects sum to the unit effect
    total = {}
    for e in effects:
        for label, value in e.coeffs.items():
            total[label] = total.get(label, ZERO) + value
    first = dict(effects[0].coeffs)
    for label in enumerate_pure_labels(processor.output_ancilla):
        missing = ONE - total.get(label, ZERO)
        if missing:
            first[label] = first.get(label, ZERO) + missing
    effects[0] = EffectVector(processor.output_ancilla, first)

    verified = True
    if verify:
        environment = bibit(processor.mode) if env is None else env
        ae = compose_systems(a, environment)
        for effect, branch in zip(effects, instrument.branches):
            for label in enumerate_pure_labels(ae):
                probe = pure_state(ae, label)
                direct = apply(branch, probe, "0")
                via = dilated_apply(processor, sigma, effect, probe)
                if not vectors_equal(direct, via):
                    verified = False
        unit = unit_effect(processor.output_ancilla)
        summed: dict[PureLabel, Fraction] = {}
        for e in effects:
            for label, value in e.coeffs.items():
                summed[label] = summed.get(label, ZERO) + value
        if summed != unit.coeffs or not sigma.is_deterministic:
            verified = False

    return DilationResult(processor, sigma, tuple(effects), instrument.outcomes,
                          mu_map, zeta_tables, verified)


def program_channel(channel: Kernel,
                    processor: UniversalProcessor | None = None
                    ) -> tuple[UniversalProcessor, StateVector]:
    """Program state realizing a channel through the fixed processor."""
    if not is_deterministic(channel):
        raise ValueError("program_channel needs a deterministic kernel")
    if processor is None:
        processor = build_processor(channel.in_system, channel.out_system)
    mu = decompose_channel(channel)
    return processor, program_sigma(processor, mu)


def extract_kernel(processor: UniversalProcessor, sigma: StateVector,
                   effect: EffectVector,
                   env: SystemTree | None = None) -> Kernel:
    """The kernel an arbitrary (sigma, R, effect) sandwich induces on A -> B.

    Works for any state of B' and any effect on A', not only program-shaped
    ones; the construction fails loudly if the sandwich does not define a
    valid classified kernel (it always does, which tests rely on).
    """
    a, b = processor.a_system, processor.b_system
    environment = bibit(processor.mode) if env is None else env
    ae = compose_systems(a, environment)
    e0 = enumerate_pure_labels(environment)[0]
    rows: dict[PureLabel, dict[tuple[PureLabel, int], Fraction]] = {}
    for i_label in enumerate_pure_labels(a):
        probe = pure_state(ae, NodeLabel(i_label, e0, 1))
        out = dilated_apply(processor, sigma, effect, probe)
        row: dict[tuple[PureLabel, int], Fraction] = {}
        for label, value in out.coeffs.items():
            assert isinstance(label, NodeLabel) and label.right == e0
            key = (label.left, label.sign)
            row[key] = row.get(key, ZERO) + value
        if row:
            rows[i_label] = row
    kernel = Kernel(a, b, rows)
    for label in enumerate_pure_labels(ae):
        probe = pure_state(ae, label)
        direct = apply(kernel, probe, "0")
        via = dilated_apply(processor, sigma, effect, probe)
        if not vectors_equal(direct, via):
            raise AssertionError("sandwich is not reproduced by its kernel form")
    return kernel
