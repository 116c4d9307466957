"""Exact-rational rank computations and the dimension-excess quantities.

delta2(A,B) = D_AB - D_A*D_B measures how far product states fall short of
spanning the bipartite space; delta3 is the tripartite analogue relative to
the four biseparable classes.  Bilocal tomography holds iff delta3 vanishes
and the tripartite dimension identity balances.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .labels import (
    LeafLabel,
    Move,
    MoveKind,
    NodeLabel,
    enumerate_pure_labels,
    label_sort_key,
)
from .states import (
    GeneralizedVector,
    StateVector,
    apply_moves_to_vector,
    discriminating_instrument,
    pure_state,
    tensor_states,
)
from .systems import (
    Node,
    SystemTree,
    TheoryMode,
    Trivial,
    compose_systems,
    dimension,
)

ZERO = Fraction(0)


def rank(vectors: Sequence[GeneralizedVector]) -> int:
    """Rank of the coefficient matrix, by exact sparse Gaussian elimination."""
    if not vectors:
        return 0
    system = vectors[0].system
    index: dict = {}
    pivots: dict[int, dict[int, Fraction]] = {}
    r = 0
    for vector in vectors:
        if vector.system != system:
            raise ValueError("vectors must share a system")
        row: dict[int, Fraction] = {}
        for label, value in vector.coeffs.items():
            col = index.setdefault(label, len(index))
            row[col] = value
        while row:
            col = min(row)
            pivot = pivots.get(col)
            if pivot is None:
                pivots[col] = row
                r += 1
                break
            factor = row[col] / pivot[col]
            for c, v in pivot.items():
                nv = row.get(c, ZERO) - factor * v
                if nv:
                    row[c] = nv
                else:
                    row.pop(c, None)
    return r


def _product_states(a: SystemTree, b: SystemTree) -> list[GeneralizedVector]:
    out = []
    for la in enumerate_pure_labels(a):
        for lb in enumerate_pure_labels(b):
            out.append(tensor_states(pure_state(a, la), pure_state(b, lb)))
    return out


def delta2(a: SystemTree, b: SystemTree) -> int:
    """Dimension excess of AB over the span of the separable states.

    The arithmetic value D_AB - D_A*D_B is cross-checked against the rank of
    the product-state family, which spans the separable subspace.
    """
    if isinstance(a, Trivial) or isinstance(b, Trivial):
        raise ValueError("delta2 needs two non-trivial systems")
    ab = compose_systems(a, b)
    arithmetic = dimension(ab) - dimension(a) * dimension(b)
    separable_rank = rank(_product_states(a, b))
    by_rank = dimension(ab) - separable_rank
    if arithmetic != by_rank:
        raise AssertionError(
            f"separable span rank {separable_rank} disagrees with the dimension rule")
    return arithmetic


def verify_strict_bilocality(a: SystemTree, b: SystemTree) -> bool:
    """Local tomography fails (delta2 > 0) yet bipartite effects span the dual."""
    ab = compose_systems(a, b)
    effect_rank = rank(discriminating_instrument(ab))
    if a.mode is TheoryMode.CT:
        return delta2(a, b) == 0 and effect_rank == dimension(ab)
    return delta2(a, b) > 0 and effect_rank == dimension(ab)


def _tripartite_families(a: SystemTree, b: SystemTree, c: SystemTree
                         ) -> dict[str, list[GeneralizedVector]]:
    """Spanning families for the four biseparable classes, on ((AB)C)."""
    ab = compose_systems(a, b)
    bc = compose_systems(b, c)
    ac = compose_systems(a, c)
    families: dict[str, list[GeneralizedVector]] = {}
    families["products"] = [
        tensor_states(tensor_states(pure_state(a, la), pure_state(b, lb)),
                      pure_state(c, lc))
        for la in enumerate_pure_labels(a)
        for lb in enumerate_pure_labels(b)
        for lc in enumerate_pure_labels(c)
    ]
    families["ab_c"] = [
        tensor_states(pure_state(ab, lab), pure_state(c, lc))
        for lab in enumerate_pure_labels(ab)
        for lc in enumerate_pure_labels(c)
    ]
    # A x (BC), reassociated onto ((AB)C)
    families["a_bc"] = [
        apply_moves_to_vector(
            tensor_states(pure_state(a, la), pure_state(bc, lbc)),
            [Move(MoveKind.ASSOC_L, "")])
        for la in enumerate_pure_labels(a)
        for lbc in enumerate_pure_labels(bc)
    ]
    # (AC) x B, braided and reassociated onto ((AB)C)
    to_abc = [Move(MoveKind.ASSOC_R, ""), Move(MoveKind.BRAID, "1"),
              Move(MoveKind.ASSOC_L, "")]
    families["ac_b"] = [
        apply_moves_to_vector(
            tensor_states(pure_state(ac, lac), pure_state(b, lb)), to_abc)
        for lac in enumerate_pure_labels(ac)
        for lb in enumerate_pure_labels(b)
    ]
    return families


@dataclass(frozen=True)
class SpanReport:
    dims: tuple[int, ...]
    mode: str
    d_systems: tuple[int, ...]
    d_composite: int
    delta2_pairs: dict[str, int] = field(default_factory=dict)
    delta3: int = 0
    class_ranks: dict[str, int] = field(default_factory=dict)
    bilocal_identity_holds: bool = True

    def to_json(self) -> dict:
        return {
            "dims": list(self.dims),
            "mode": self.mode,
            "d_systems": list(self.d_systems),
            "d_composite": self.d_composite,
            "delta2": dict(self.delta2_pairs),
            "delta3": self.delta3,
            "class_ranks": dict(self.class_ranks),
            "bilocal_identity_holds": self.bilocal_identity_holds,
        }


def delta3(a: SystemTree, b: SystemTree, c: SystemTree) -> int:
    return span_report(a, b, c).delta3


def span_report(a: SystemTree, b: SystemTree, c: SystemTree) -> SpanReport:
    abc = compose_systems(compose_systems(a, b), c)
    d_abc = dimension(abc)
    families = _tripartite_families(a, b, c)
    union: list[GeneralizedVector] = []
    class_ranks: dict[str, int] = {}
    for name, family in families.items():
        class_ranks[name] = rank(family)
        union.extend(family)
    r = rank(union)
    class_ranks["union"] = r
    da, db, dc = dimension(a), dimension(b), dimension(c)
    d2 = {
        "AB": dimension(compose_systems(a, b)) - da * db,
        "BC": dimension(compose_systems(b, c)) - db * dc,
        "AC": dimension(compose_systems(a, c)) - da * dc,
    }
    rhs = da * db * dc + d2["AB"] * dc + d2["BC"] * da + d2["AC"] * db
    return SpanReport(
        dims=(da, db, dc),
        mode=a.mode.value,
        d_systems=(da, db, dc),
        d_composite=d_abc,
        delta2_pairs=d2,
        delta3=d_abc - r,
        class_ranks=class_ranks,
        bilocal_identity_holds=(d_abc == rhs),
    )


def verify_theorem_bilocal(a: SystemTree, b: SystemTree, c: SystemTree) -> bool:
    """Bilocal discriminability: delta3 = 0 and the dimension identity balances."""
    report = span_report(a, b, c)
    return report.delta3 == 0 and report.bilocal_identity_holds


def corollary_nab(a: SystemTree, b: SystemTree) -> tuple[int, int]:
    """(n, l): pure labels per product support, labels missed by all products.

    Strict bilocality corresponds to n = 2 and l = 0; local tomography (CT)
    to n = 1 and l = 0.  Raises if the support sizes are not uniform.
    """
    ab = compose_systems(a, b)
    covered: set = set()
    sizes: set[int] = set()
    for la in enumerate_pure_labels(a):
        for lb in enumerate_pure_labels(b):
            support = set(tensor_states(pure_state(a, la), pure_state(b, lb)).coeffs)
            sizes.add(len(support))
            covered |= support
    if len(sizes) != 1:
        raise AssertionError(f"non-uniform product supports: {sizes}")
    l = dimension(ab) - len(covered)
    return sizes.pop(), l


def verify_corollary_nab(a: SystemTree, b: SystemTree) -> bool:
    n, l = corollary_nab(a, b)
    if a.mode is TheoryMode.CT:
        return n == 1 and l == 0
    return n == 2 and l == 0
