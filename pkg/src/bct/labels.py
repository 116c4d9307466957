"""Pure-state labels and the associator/braiding rewriting calculus.

A pure label mirrors its system tree: leaves carry a 1-based index, inner
nodes carry a sign in {-1, +1}.  The composite basis of a BCT system AB is
{(ij)_-, (ij)_+}, so label count equals system dimension.  CT labels use the
same shapes with every sign fixed +1.

Rewriting moves:

  assoc right   ((x y)_{s1} z)_{s2}  ->  (x (y z)_{s1*s2})_{s1}
  assoc left    (x (y z)_{v})_{w}    ->  ((x y)_{w} z)_{v*w}
  braid         (x y)_{s}            ->  (y x)_{s}

Associator moves rewrite a node in place.  A braid additionally emits the
braided node's sign as a flip that travels toward the root: every ancestor
reached through a left-child link is flipped and the climb continues; the
first ancestor reached through a right-child link is flipped and absorbs
the climb.  A flip that leaves the root altogether is returned as an
environment flip (it lands on whatever the label is later paired with).
The same propagation rule governs kernel sign flips; coherence of the whole
calculus (pentagon, hexagon, path independence) is enforced by tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator

from . import faults
from .config import max_dim
from .systems import Leaf, Node, SystemTree, TheoryMode, Trivial, dimension

MINUS = -1
PLUS = 1
SIGNS = (MINUS, PLUS)


@dataclass(frozen=True)
class PureLabel:
    pass


@dataclass(frozen=True)
class UnitLabel(PureLabel):
    pass


@dataclass(frozen=True)
class LeafLabel(PureLabel):
    index: int


@dataclass(frozen=True)
class NodeLabel(PureLabel):
    left: PureLabel = field(default=None)  # type: ignore[assignment]
    right: PureLabel = field(default=None)  # type: ignore[assignment]
    sign: int = PLUS

    def __post_init__(self) -> None:
        if self.sign not in SIGNS:
            raise ValueError(f"sign must be -1 or +1, got {self.sign}")


UNIT = UnitLabel()


def label_matches(system: SystemTree, label: PureLabel) -> bool:
    """Shape/index/sign validity of `label` for `system`."""
    if isinstance(system, Trivial):
        return isinstance(label, UnitLabel)
    if isinstance(system, Leaf):
        return isinstance(label, LeafLabel) and 1 <= label.index <= system.system.dim
    assert isinstance(system, Node)
    if isinstance(system.left, Trivial):
        return label_matches(system.right, label)
    if isinstance(system.right, Trivial):
        return label_matches(system.left, label)
    if not isinstance(label, NodeLabel):
        return False
    if system.mode is TheoryMode.CT and label.sign != PLUS:
        return False
    return label_matches(system.left, label.left) and label_matches(system.right, label.right)


def enumerate_pure_labels(system: SystemTree, bound: int | None = None) -> list[PureLabel]:
    """All pure labels of `system` in canonical order.

    Canonical order sorts by the left-to-right tuple of leaf indices, then by
    the pre-order tuple of node signs with - before +.
    """
    limit = max_dim() if bound is None else bound
    dim = dimension(system)
    if dim > limit:
        raise ValueError(f"dimension {dim} exceeds enumeration bound {limit}")
    out = list(_enumerate(system))
    out.sort(key=label_sort_key)
    return out


def _enumerate(system: SystemTree) -> Iterator[PureLabel]:
    if isinstance(system, Trivial):
        yield UNIT
        return
    if isinstance(system, Leaf):
        for i in range(1, system.system.dim + 1):
            yield LeafLabel(i)
        return
    assert isinstance(system, Node)
    if isinstance(system.left, Trivial):
        yield from _enumerate(system.right)
        return
    if isinstance(system.right, Trivial):
        yield from _enumerate(system.left)
        return
    signs = (PLUS,) if system.mode is TheoryMode.CT else SIGNS
    for l in _enumerate(system.left):
        for r in _enumerate(system.right):
            for s in signs:
                yield NodeLabel(l, r, s)


def label_sort_key(label: PureLabel) -> tuple[tuple[int, ...], tuple[int, ...]]:
    leaves: list[int] = []
    signs: list[int] = []

    def walk(l: PureLabel) -> None:
        if isinstance(l, LeafLabel):
            leaves.append(l.index)
        elif isinstance(l, NodeLabel):
            signs.append(l.sign)
            walk(l.left)
            walk(l.right)

    walk(label)
    return tuple(leaves), tuple(signs)


# ---------------------------------------------------------------------------
# Moves


class MoveKind(Enum):
    ASSOC_L = "assoc_l"
    ASSOC_R = "assoc_r"
    BRAID = "braid"


@dataclass(frozen=True)
class Move:
    kind: MoveKind
    path: str = ""


def invert_move(move: Move) -> Move:
    if move.kind is MoveKind.ASSOC_L:
        return Move(MoveKind.ASSOC_R, move.path)
    if move.kind is MoveKind.ASSOC_R:
        return Move(MoveKind.ASSOC_L, move.path)
    return move


def invert_moves(moves: list[Move]) -> list[Move]:
    return [invert_move(m) for m in reversed(moves)]


def _assoc_r(label: PureLabel) -> tuple[PureLabel, int]:
    if not isinstance(label, NodeLabel) or not isinstance(label.left, NodeLabel):
        raise ValueError("assoc right needs shape ((x y) z)")
    inner = label.left
    new_inner_sign = label.sign if faults.active_fault() == faults.ASSOC_SIGN \
        else inner.sign * label.sign
    return NodeLabel(inner.left, NodeLabel(inner.right, label.right, new_inner_sign),
                     inner.sign), PLUS


def _assoc_l(label: PureLabel) -> tuple[PureLabel, int]:
    if not isinstance(label, NodeLabel) or not isinstance(label.right, NodeLabel):
        raise ValueError("assoc left needs shape (x (y z))")
    inner = label.right
    new_outer_sign = inner.sign if faults.active_fault() == faults.ASSOC_SIGN \
        else inner.sign * label.sign
    return NodeLabel(NodeLabel(label.left, inner.left, label.sign), inner.right,
                     new_outer_sign), PLUS


def _braid(label: PureLabel) -> tuple[PureLabel, int]:
    if not isinstance(label, NodeLabel):
        raise ValueError("braid needs a node")
    sign = label.sign
    new_sign = -sign if faults.active_fault() == faults.BRAID_SIGN else sign
    return NodeLabel(label.right, label.left, new_sign), sign


def flip_sign_at(label: PureLabel, path: str, tau: int) -> tuple[PureLabel, int]:
    """Propagate a sign flip from the subtree at `path` toward the root.

    Ancestors reached through left-child links are flipped and the climb
    continues; the first right-child link flips its node and absorbs the
    flip.  Returns (new label, environment flip).
    """
    if tau == PLUS:
        return label, PLUS
    if path == "":
        return label, tau

    def _walk(l: PureLabel, p: str) -> tuple[PureLabel, int]:
        if p == "":
            return l, tau
        assert isinstance(l, NodeLabel)
        if p[0] == "0":
            new_child, escaping = _walk(l.left, p[1:])
            return NodeLabel(new_child, l.right, l.sign * escaping), escaping
        new_child, escaping = _walk(l.right, p[1:])
        # a flip crossing a right-child link is absorbed at this node
        return NodeLabel(l.left, new_child, l.sign * escaping), PLUS

    return _walk(label, path)


def apply_move_tracked(label: PureLabel, move: Move) -> tuple[PureLabel, int]:
    """Apply one move; returns (new label, environment flip in {-1,+1})."""
    rewriter: Callable[[PureLabel], tuple[PureLabel, int]]
    if move.kind is MoveKind.ASSOC_R:
        rewriter = _assoc_r
    elif move.kind is MoveKind.ASSOC_L:
        rewriter = _assoc_l
    else:
        rewriter = _braid

    def _walk(l: PureLabel, p: str) -> tuple[PureLabel, int]:
        if p == "":
            new, flip = rewriter(l)
            return new, flip
        if not isinstance(l, NodeLabel):
            raise ValueError(f"move path {move.path!r} leaves the label")
        if p[0] == "0":
            new_child, escaping = _walk(l.left, p[1:])
            return NodeLabel(new_child, l.right, l.sign * escaping), escaping
        new_child, escaping = _walk(l.right, p[1:])
        return NodeLabel(l.left, new_child, l.sign * escaping), PLUS

    return _walk(label, move.path)


def apply_move(label: PureLabel, move: Move) -> PureLabel:
    return apply_move_tracked(label, move)[0]


def apply_moves_tracked(label: PureLabel, moves: list[Move]) -> tuple[PureLabel, int]:
    flip = PLUS
    for move in moves:
        label, f = apply_move_tracked(label, move)
        flip *= f
    return label, flip


def apply_moves(label: PureLabel, moves: list[Move]) -> PureLabel:
    return apply_moves_tracked(label, moves)[0]


def assoc_move(label: PureLabel, direction: str, path: str = "") -> PureLabel:
    """Associator step at `path`; direction 'right' for ((x y) z) -> (x (y z))."""
    if direction not in ("left", "right"):
        raise ValueError("direction must be 'left' or 'right'")
    kind = MoveKind.ASSOC_R if direction == "right" else MoveKind.ASSOC_L
    return apply_move(label, Move(kind, path))


def braid_move(label: PureLabel, path: str = "") -> PureLabel:
    return apply_move(label, Move(MoveKind.BRAID, path))


def move_system(system: SystemTree, move: Move) -> SystemTree:
    """Shape transport: the system tree a move carries labels onto."""

    def _rewrite(t: SystemTree, p: str) -> SystemTree:
        if p == "":
            if move.kind is MoveKind.BRAID:
                if not isinstance(t, Node):
                    raise ValueError("braid needs a node")
                return Node(t.mode, t.right, t.left)
            if move.kind is MoveKind.ASSOC_R:
                if not isinstance(t, Node) or not isinstance(t.left, Node):
                    raise ValueError("assoc right needs shape ((x y) z)")
                return Node(t.mode, t.left.left, Node(t.mode, t.left.right, t.right))
            if not isinstance(t, Node) or not isinstance(t.right, Node):
                raise ValueError("assoc left needs shape (x (y z))")
            return Node(t.mode, Node(t.mode, t.left, t.right.left), t.right.right)
        if not isinstance(t, Node):
            raise ValueError(f"move path {move.path!r} leaves the tree")
        if p[0] == "0":
            return Node(t.mode, _rewrite(t.left, p[1:]), t.right)
        return Node(t.mode, t.left, _rewrite(t.right, p[1:]))

    return _rewrite(system, move.path)


def move_system_sequence(system: SystemTree, moves: list[Move]) -> SystemTree:
    for move in moves:
        system = move_system(system, move)
    return system


def regroup(system: SystemTree, target: str) -> list[Move]:
    """Moves bringing the subtree at `target` to the head of a bipartition.

    After the sequence every label of `system` has the two-factor shape
    (a e)_s with a on the target subtree and e on the complement, where the
    complement keeps the original arrangement with the target deleted.  The
    sequence depends only on tree shapes.
    """
    if target == "":
        raise ValueError("cannot regroup the full tree against nothing")
    if not isinstance(subtree_system(system, target), SystemTree):  # pragma: no cover
        raise ValueError("bad selector")

    def _regroup(t: SystemTree, p: str, prefix: str) -> list[Move]:
        assert isinstance(t, Node), "selector must address a proper subtree"
        if p == "0":
            return []
        if p == "1":
            return [Move(MoveKind.BRAID, prefix)]
        if p[0] == "0":
            inner = _regroup(t.left, p[1:], prefix + "0")
            return inner + [Move(MoveKind.ASSOC_R, prefix)]
        inner = _regroup(t.right, p[1:], prefix + "1")
        return inner + [
            Move(MoveKind.ASSOC_L, prefix),
            Move(MoveKind.BRAID, prefix + "0"),
            Move(MoveKind.ASSOC_R, prefix),
        ]

    return _regroup(system, target, "")


def subtree_system(system: SystemTree, path: str) -> SystemTree:
    node = system
    for step in path:
        if not isinstance(node, Node):
            raise ValueError(f"selector {path!r} leaves the tree")
        node = node.left if step == "0" else node.right
    return node
