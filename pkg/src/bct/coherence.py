"""The construction-consistency checks as an executable suite.

Every check is deterministic given its dimensions and seed, and a failing
check carries a replayable counterexample.  Transformation equalities are
always compared after appending one probe environment leaf, since equality
of transformations is equality of all their extensions.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from . import faults
from .kernels import (
    Instrument,
    Kernel,
    add_kernels,
    apply,
    braid_kernel,
    coarse_grain,
    extend_at,
    identity_kernel,
    kernels_equal,
    null_kernel,
    parallel_compose,
    random_instrument,
    random_kernel,
    random_state,
    scalar_kernel,
    sequential_compose,
    validate_instrument,
)
from .labels import Move, MoveKind, apply_moves_tracked, enumerate_pure_labels
from .states import StateVector, add_states, pair, point_effect
from .systems import (
    Node,
    SystemTree,
    TheoryMode,
    bibit,
    compose_systems,
    leaf,
    left_comb,
)


@dataclass(frozen=True)
class CheckReport:
    name: str
    params: dict
    passed: bool
    counterexample: dict | None = None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "params": self.params,
            "passed": self.passed,
            "counterexample": self.counterexample,
        }


def _label_str(label) -> str:
    from .serial import label_to_str

    return label_to_str(label)


def check_pentagon(dims: tuple[int, int, int, int],
                   mode: TheoryMode = TheoryMode.BCT) -> CheckReport:
    """((AB)C)D -> A(B(CD)) along the two reassociation paths."""
    a, b, c, d = (leaf(x, mode) for x in dims)
    tree = compose_systems(compose_systems(compose_systems(a, b), c), d)
    path1 = [Move(MoveKind.ASSOC_R, ""), Move(MoveKind.ASSOC_R, "")]
    path2 = [Move(MoveKind.ASSOC_R, "0"), Move(MoveKind.ASSOC_R, ""),
             Move(MoveKind.ASSOC_R, "1")]
    checked = 0
    for label in enumerate_pure_labels(tree):
        one = apply_moves_tracked(label, path1)
        two = apply_moves_tracked(label, path2)
        checked += 1
        if one != two:
            return CheckReport("pentagon", {"dims": list(dims), "mode": mode.value},
                               False, {"label": _label_str(label),
                                       "path1": _label_str(one[0]),
                                       "path2": _label_str(two[0])})
    return CheckReport("pentagon", {"dims": list(dims), "mode": mode.value,
                                    "labels_checked": checked}, True)


def check_hexagon(dims: tuple[int, int, int],
                  mode: TheoryMode = TheoryMode.BCT) -> CheckReport:
    """Single exchange of A past BC versus the two sequential exchanges."""
    a, b, c = (leaf(x, mode) for x in dims)
    tree = compose_systems(compose_systems(a, b), c)
    one = [Move(MoveKind.ASSOC_R, ""), Move(MoveKind.BRAID, "")]
    two = [Move(MoveKind.BRAID, "0"), Move(MoveKind.ASSOC_R, ""),
           Move(MoveKind.BRAID, "1"), Move(MoveKind.ASSOC_L, "")]
    checked = 0
    for label in enumerate_pure_labels(tree):
        lhs = apply_moves_tracked(label, one)
        rhs = apply_moves_tracked(label, two)
        checked += 1
        if lhs != rhs:
            return CheckReport("hexagon", {"dims": list(dims), "mode": mode.value},
                               False, {"label": _label_str(label),
                                       "one_step": _label_str(lhs[0]),
                                       "two_step": _label_str(rhs[0])})
    return CheckReport("hexagon", {"dims": list(dims), "mode": mode.value,
                                   "labels_checked": checked}, True)


def _extended_equal(k1: Kernel, k2: Kernel, env: SystemTree) -> bool:
    e1 = extend_at(k1, compose_systems(k1.in_system, env), "0")
    e2 = extend_at(k2, compose_systems(k2.in_system, env), "0")
    return kernels_equal(e1, e2)


def check_sliding(seed: int, dims: tuple[int, int, int, int] = (2, 2, 2, 2),
                  mode: TheoryMode = TheoryMode.BCT, pairs: int = 10) -> CheckReport:
    """Braiding naturality: S(k1 x k2) = (k2 x k1)S, with a probe environment."""
    rng = random.Random(seed)
    a, b, c, d = (leaf(x, mode) for x in dims)
    env = bibit(mode)
    for trial in range(pairs):
        k1 = random_kernel(rng, a, b)
        k2 = random_kernel(rng, c, d)
        lhs = sequential_compose(braid_kernel(b, d), parallel_compose(k1, k2))
        rhs = sequential_compose(parallel_compose(k2, k1), braid_kernel(a, c))
        if not _extended_equal(lhs, rhs, env):
            return CheckReport("sliding", {"dims": list(dims), "seed": seed,
                                           "mode": mode.value}, False,
                               {"trial": trial})
    return CheckReport("sliding", {"dims": list(dims), "seed": seed,
                                   "mode": mode.value, "pairs": pairs}, True)


def check_bifunctoriality(seed: int, dims: tuple[int, int] = (2, 2),
                          mode: TheoryMode = TheoryMode.BCT,
                          pairs: int = 10) -> CheckReport:
    """(k2 o k1) x (k4 o k3) = (k2 x k4) o (k1 x k3), with a probe environment."""
    rng = random.Random(seed)
    a = leaf(dims[0], mode)
    b = leaf(dims[1], mode)
    env = bibit(mode)
    for trial in range(pairs):
        k1 = random_kernel(rng, a, b)
        k2 = random_kernel(rng, b, a)
        k3 = random_kernel(rng, b, a)
        k4 = random_kernel(rng, a, b)
        lhs = parallel_compose(sequential_compose(k2, k1), sequential_compose(k4, k3))
        rhs = sequential_compose(parallel_compose(k2, k4), parallel_compose(k1, k3))
        if not _extended_equal(lhs, rhs, env):
            return CheckReport("bifunctoriality", {"dims": list(dims), "seed": seed,
                                                   "mode": mode.value}, False,
                               {"trial": trial})
    return CheckReport("bifunctoriality", {"dims": list(dims), "seed": seed,
                                           "mode": mode.value, "pairs": pairs}, True)


def check_probabilistic_compatibility(seed: int, dims: tuple[int, int] = (2, 2),
                                      mode: TheoryMode = TheoryMode.BCT
                                      ) -> CheckReport:
    """Probabilistic well-posedness: separation, scalars, null events,
    coarse-graining, and preservation of preparation-instruments."""
    rng = random.Random(seed)
    a = leaf(dims[0], mode)
    b = leaf(dims[1], mode)
    env = bibit(mode)
    params = {"dims": list(dims), "seed": seed, "mode": mode.value}

    # (i) effects separate states
    for _ in range(10):
        rho = random_state(rng, a)
        sigma = random_state(rng, a)
        if rho.coeffs == sigma.coeffs:
            continue
        separated = any(pair(point_effect(a, x), rho) != pair(point_effect(a, x), sigma)
                        for x in enumerate_pure_labels(a))
        if not separated:
            return CheckReport("probabilistic", params, False,
                               {"stage": "separation"})

    # (ii) scalars compose multiplicatively and trivial instruments are
    # probability distributions
    half = scalar_kernel(mode, Fraction(1, 2))
    third = scalar_kernel(mode, Fraction(1, 3))
    product = parallel_compose(half, third)
    from .labels import UNIT
    if product.row(UNIT).get((UNIT, 1)) != Fraction(1, 6):
        return CheckReport("probabilistic", params, False, {"stage": "scalars"})
    weights = [Fraction(1, 4), Fraction(1, 4), Fraction(1, 2)]
    trivial_instrument = Instrument(tuple(scalar_kernel(mode, w) for w in weights))
    if not validate_instrument(trivial_instrument):
        return CheckReport("probabilistic", params, False,
                           {"stage": "trivial-instrument"})

    # (iii) the null transformation joins instruments freely
    inst = random_instrument(rng, a, b, branches=2)
    with_null = Instrument(inst.branches + (null_kernel(a, b),))
    if not validate_instrument(with_null):
        return CheckReport("probabilistic", params, False, {"stage": "null"})

    # (iv) coarse-graining is well-posed and pairing-additive
    inst3 = random_instrument(rng, a, b, branches=3)
    merged = coarse_grain(inst3, [[0, 2], [1]])
    if not validate_instrument(merged):
        return CheckReport("probabilistic", params, False, {"stage": "coarse"})
    rho = random_state(rng, a)
    for x in enumerate_pure_labels(b):
        direct = sum((pair(point_effect(b, x), apply(inst3.branches[i], rho, ""))
                      for i in (0, 2)), Fraction(0))
        if direct != pair(point_effect(b, x), apply(merged.branches[0], rho, "")):
            return CheckReport("probabilistic", params, False,
                               {"stage": "coarse-additivity"})

    # (v) extended instruments map preparation-instruments to
    # preparation-instruments
    ae = compose_systems(a, env)
    be = compose_systems(b, env)
    preparation = [random_state(rng, ae, deterministic=False) for _ in range(3)]
    deficit = Fraction(1) - sum((p.weight for p in preparation), Fraction(0))
    if deficit < 0:
        preparation = [StateVector(ae, {}) for _ in range(3)]
        deficit = Fraction(1)
    basis = enumerate_pure_labels(ae)
    preparation.append(StateVector(ae, {basis[0]: deficit}))
    for branch in inst.branches:
        ext = extend_at(branch, ae, "0")
        outputs = [apply(ext, p, "") for p in preparation]
        for out in outputs:
            if any(v < 0 for v in out.coeffs.values()) or out.weight > 1:
                return CheckReport("probabilistic", params, False,
                                   {"stage": "extension-positivity"})
    totals = None
    for branch in inst.branches:
        ext = extend_at(branch, ae, "0")
        summed = None
        for p in preparation:
            o = apply(ext, p, "")
            summed = o if summed is None else add_states(summed, o)
        totals = summed if totals is None else add_states(totals, summed)
    assert totals is not None
    if not totals.is_deterministic:
        return CheckReport("probabilistic", params, False,
                           {"stage": "extension-normalization"})

    return CheckReport("probabilistic", params, True)


DEFAULT_PENTAGON_DIMS = tuple(itertools.product((2, 3), repeat=4))
DEFAULT_HEXAGON_DIMS = tuple(itertools.product((2, 3), repeat=3))


@dataclass(frozen=True)
class SuiteConfig:
    mode: TheoryMode = TheoryMode.BCT
    seed: int = 0
    fault: str | None = None
    pentagon_dims: tuple = DEFAULT_PENTAGON_DIMS
    hexagon_dims: tuple = DEFAULT_HEXAGON_DIMS
    kernel_pairs: int = 100


def run_suite(config: SuiteConfig = SuiteConfig()) -> list[CheckReport]:
    reports: list[CheckReport] = []
    with faults.inject_fault(config.fault):
        for dims in config.pentagon_dims:
            reports.append(check_pentagon(dims, config.mode))
        for dims in config.hexagon_dims:
            reports.append(check_hexagon(dims, config.mode))
        reports.append(check_sliding(config.seed, mode=config.mode,
                                     pairs=config.kernel_pairs))
        reports.append(check_bifunctoriality(config.seed, mode=config.mode,
                                             pairs=config.kernel_pairs))
        reports.append(check_probabilistic_compatibility(config.seed,
                                                         mode=config.mode))
    reports.sort(key=lambda r: (r.name, str(r.params)))
    return reports
