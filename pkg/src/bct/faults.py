"""Fault-injection hooks for the consistency suite (test plumbing only).

Each documented mutation breaks one leg of the coherence structure so the
suite can demonstrate it has power.  Faults are process-global; they are
meant to be toggled around a single suite run, never during normal use.
"""

from __future__ import annotations

from contextlib import contextmanager

ASSOC_SIGN = "assoc-sign"        # associator inner sign s1*s2 replaced by s2
BRAID_SIGN = "braid-sign"        # braid flips the swapped node's own sign
PARALLEL_DROP_TAU = "parallel-drop-tau"  # left extension drops tau from the node sign

KNOWN_FAULTS = (ASSOC_SIGN, BRAID_SIGN, PARALLEL_DROP_TAU)

_active: str | None = None


def active_fault() -> str | None:
    return _active


@contextmanager
def inject_fault(name: str | None):
    global _active
    if name is not None and name not in KNOWN_FAULTS:
        raise ValueError(f"unknown fault {name!r}; known: {KNOWN_FAULTS}")
    previous = _active
    _active = name
    try:
        yield
    finally:
        _active = previous
