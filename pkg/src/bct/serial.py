"""Text and JSON formats: systems, labels, rationals, states, kernels.

System syntax:  `2`, `(2*3)`, `((2*2)*2)`; `1` is the trivial system.
Label syntax:   leaf `3`, node `(x y)+` / `(x y)-`, unit `*`.
Rationals are strings in lowest terms (`1/2`, `3`); `2/4` normalizes on
input.  Parse failures raise ParseError with a machine-readable code.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from .kernels import Instrument, Kernel
from .labels import LeafLabel, NodeLabel, PureLabel, UNIT, UnitLabel, label_matches
from .states import EffectVector, GeneralizedVector, StateVector
from .systems import (
    Leaf,
    Node,
    SystemTree,
    TheoryMode,
    Trivial,
    leaf,
    trivial,
)

E_RATIONAL = "E_RATIONAL"
E_LABEL_SYNTAX = "E_LABEL_SYNTAX"
E_LABEL_RANGE = "E_LABEL_RANGE"
E_SYSTEM_SYNTAX = "E_SYSTEM_SYNTAX"
E_MODE = "E_MODE"
E_SCHEMA = "E_SCHEMA"


class ParseError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code


# ---------------------------------------------------------------------------
# Rationals


def fraction_to_str(value: Fraction) -> str:
    value = Fraction(value)
    return str(value)


def parse_fraction(text: str) -> Fraction:
    if not isinstance(text, str):
        raise ParseError(E_RATIONAL, f"rational must be a string, got {text!r}")
    try:
        value = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(E_RATIONAL, f"bad rational {text!r}") from exc
    return value


# ---------------------------------------------------------------------------
# Systems


def system_to_str(system: SystemTree) -> str:
    if isinstance(system, Trivial):
        return "1"
    if isinstance(system, Leaf):
        return str(system.system.dim)
    assert isinstance(system, Node)
    return f"({system_to_str(system.left)}*{system_to_str(system.right)})"


def parse_system(text: str, mode: TheoryMode = TheoryMode.BCT) -> SystemTree:
    text = text.strip()
    pos = 0

    def fail(message: str):
        raise ParseError(E_SYSTEM_SYNTAX, f"{message} at position {pos} in {text!r}")

    def parse_term() -> SystemTree:
        nonlocal pos
        if pos >= len(text):
            fail("unexpected end")
        if text[pos] == "(":
            pos += 1
            left = parse_term()
            if pos >= len(text) or text[pos] != "*":
                fail("expected '*'")
            pos += 1
            right = parse_term()
            if pos >= len(text) or text[pos] != ")":
                fail("expected ')'")
            pos += 1
            from .systems import compose_systems

            return compose_systems(left, right)
        start = pos
        while pos < len(text) and text[pos].isdigit():
            pos += 1
        if start == pos:
            fail("expected a dimension")
        dim = int(text[start:pos])
        if dim == 1:
            return trivial(mode)
        return leaf(dim, mode)

    tree = parse_term()
    if pos != len(text):
        fail("trailing input")
    return tree


# ---------------------------------------------------------------------------
# Labels


def label_to_str(label: PureLabel) -> str:
    if isinstance(label, UnitLabel):
        return "*"
    if isinstance(label, LeafLabel):
        return str(label.index)
    assert isinstance(label, NodeLabel)
    sign = "+" if label.sign == 1 else "-"
    return f"({label_to_str(label.left)} {label_to_str(label.right)}){sign}"


def parse_label(text: str, system: SystemTree | None = None) -> PureLabel:
    raw = text
    text = text.strip()
    pos = 0

    def fail(message: str):
        raise ParseError(E_LABEL_SYNTAX, f"{message} at position {pos} in {raw!r}")

    def parse_term() -> PureLabel:
        nonlocal pos
        if pos >= len(text):
            fail("unexpected end")
        if text[pos] == "*":
            pos += 1
            return UNIT
        if text[pos] == "(":
            pos += 1
            left = parse_term()
            if pos >= len(text) or text[pos] != " ":
                fail("expected ' '")
            pos += 1
            right = parse_term()
            if pos >= len(text) or text[pos] != ")":
                fail("expected ')'")
            pos += 1
            if pos >= len(text) or text[pos] not in "+-":
                fail("expected a sign")
            sign = 1 if text[pos] == "+" else -1
            pos += 1
            return NodeLabel(left, right, sign)
        start = pos
        while pos < len(text) and text[pos].isdigit():
            pos += 1
        if start == pos:
            fail("expected an index")
        return LeafLabel(int(text[start:pos]))

    label = parse_term()
    if pos != len(text):
        fail("trailing input")
    if system is not None and not label_matches(system, label):
        raise ParseError(E_LABEL_RANGE,
                         f"label {raw!r} is not a pure label of {system_to_str(system)}")
    return label


# ---------------------------------------------------------------------------
# Vectors, kernels, instruments


def _mode_to_json(mode: TheoryMode) -> str:
    return mode.value


def parse_mode(text: str) -> TheoryMode:
    try:
        return TheoryMode(text)
    except ValueError as exc:
        raise ParseError(E_MODE, f"unknown mode {text!r}") from exc


def vector_to_json(vector: GeneralizedVector) -> dict:
    coeffs = {label_to_str(label): fraction_to_str(value)
              for label, value in vector.coeffs.items()}
    return {
        "mode": _mode_to_json(vector.system.mode),
        "system": system_to_str(vector.system),
        "coeffs": dict(sorted(coeffs.items())),
    }


def _vector_from_json(doc: dict, cls):
    _require(doc, ("system", "coeffs"))
    mode = parse_mode(doc.get("mode", "BCT"))
    system = parse_system(doc["system"], mode)
    if not isinstance(doc["coeffs"], dict):
        raise ParseError(E_SCHEMA, "coeffs must be an object")
    coeffs = {parse_label(k, system): parse_fraction(v)
              for k, v in doc["coeffs"].items()}
    try:
        return cls(system, coeffs)
    except ValueError as exc:
        raise ParseError(E_SCHEMA, str(exc)) from exc


def state_from_json(doc: dict) -> StateVector:
    return _vector_from_json(doc, StateVector)


def effect_from_json(doc: dict) -> EffectVector:
    return _vector_from_json(doc, EffectVector)


def kernel_to_json(kernel: Kernel) -> dict:
    rows: dict[str, list] = {}
    for a, row in kernel.rows.items():
        entries = [{"to": label_to_str(b), "tau": tau, "w": fraction_to_str(w)}
                   for (b, tau), w in row.items()]
        entries.sort(key=lambda e: (e["to"], e["tau"]))
        rows[label_to_str(a)] = entries
    return {
        "mode": _mode_to_json(kernel.mode),
        "in": system_to_str(kernel.in_system),
        "out": system_to_str(kernel.out_system),
        "rows": dict(sorted(rows.items())),
    }


def kernel_from_json(doc: dict) -> Kernel:
    _require(doc, ("in", "out", "rows"))
    mode = parse_mode(doc.get("mode", "BCT"))
    in_system = parse_system(doc["in"], mode)
    out_system = parse_system(doc["out"], mode)
    if not isinstance(doc["rows"], dict):
        raise ParseError(E_SCHEMA, "rows must be an object")
    rows: dict[PureLabel, dict] = {}
    for a_text, entries in doc["rows"].items():
        a = parse_label(a_text, in_system)
        row: dict = {}
        if not isinstance(entries, list):
            raise ParseError(E_SCHEMA, "row entries must be a list")
        for entry in entries:
            if not isinstance(entry, dict) or set(entry) != {"to", "tau", "w"}:
                raise ParseError(E_SCHEMA, f"bad row entry {entry!r}")
            b = parse_label(entry["to"], out_system)
            tau = entry["tau"]
            if tau not in (-1, 1):
                raise ParseError(E_SCHEMA, f"tau must be -1 or 1, got {tau!r}")
            key = (b, tau)
            row[key] = row.get(key, Fraction(0)) + parse_fraction(entry["w"])
        rows[a] = row
    try:
        return Kernel(in_system, out_system, rows)
    except ValueError as exc:
        raise ParseError(E_SCHEMA, str(exc)) from exc


def instrument_to_json(instrument: Instrument) -> dict:
    return {
        "mode": _mode_to_json(instrument.in_system.mode),
        "branches": [kernel_to_json(k) for k in instrument.branches],
        "outcomes": [o if isinstance(o, (int, str)) else str(o)
                     for o in instrument.outcomes],
    }


def instrument_from_json(doc: dict) -> Instrument:
    _require(doc, ("branches",))
    if not isinstance(doc["branches"], list) or not doc["branches"]:
        raise ParseError(E_SCHEMA, "branches must be a non-empty list")
    mode = doc.get("mode", "BCT")
    branches = tuple(kernel_from_json({**b, "mode": b.get("mode", mode)})
                     for b in doc["branches"])
    outcomes = tuple(doc.get("outcomes", ()))
    if outcomes and len(outcomes) != len(branches):
        raise ParseError(E_SCHEMA, "outcomes must match branches")
    try:
        return Instrument(branches, outcomes)
    except ValueError as exc:
        raise ParseError(E_SCHEMA, str(exc)) from exc


def _require(doc: Any, keys: tuple[str, ...]) -> None:
    if not isinstance(doc, dict):
        raise ParseError(E_SCHEMA, f"expected an object, got {type(doc).__name__}")
    for key in keys:
        if key not in doc:
            raise ParseError(E_SCHEMA, f"missing required key {key!r}")


def dumps(doc: Any) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Published schema (subset of JSON Schema, enforced by validate_document)


def schema() -> dict:
    rational = {"type": "string", "pattern": "rational p/q in lowest terms"}
    label = {"type": "string", "pattern": "label: index, '*', or '(x y)+/-'"}
    system = {"type": "string", "pattern": "system: dim, '1', or '(a*b)'"}
    mode = {"type": "string", "enum": ["BCT", "CT"]}
    return {
        "state": {
            "type": "object",
            "required": ["system", "coeffs"],
            "properties": {"mode": mode, "system": system,
                           "coeffs": {"type": "object", "values": rational,
                                      "keys": label}},
        },
        "kernel": {
            "type": "object",
            "required": ["in", "out", "rows"],
            "properties": {
                "mode": mode, "in": system, "out": system,
                "rows": {"type": "object", "keys": label,
                         "values": {"type": "array",
                                    "items": {"type": "object",
                                              "required": ["to", "tau", "w"],
                                              "properties": {"to": label,
                                                             "tau": {"type": "integer",
                                                                     "enum": [-1, 1]},
                                                             "w": rational}}}},
            },
        },
        "instrument": {
            "type": "object",
            "required": ["branches"],
            "properties": {"mode": mode,
                           "branches": {"type": "array", "items": {"$ref": "kernel"}},
                           "outcomes": {"type": "array",
                                        "items": {"type": ["string", "integer"]}}},
        },
        "dilation_result": {
            "type": "object",
            "required": ["verified", "sigma", "observation", "mu"],
            "properties": {"verified": {"type": "boolean"},
                           "sigma": {"$ref": "state"},
                           "observation": {"type": "array",
                                           "items": {"$ref": "state"}},
                           "outcomes": {"type": "array",
                                        "items": {"type": ["string", "integer"]}},
                           "mu": {"type": "object", "values": rational}},
        },
        "check_report": {
            "type": "object",
            "required": ["name", "params", "passed"],
            "properties": {"name": {"type": "string"},
                           "params": {"type": "object"},
                           "passed": {"type": "boolean"},
                           "counterexample": {"type": ["object", "null"]}},
        },
        "protocol_report": {
            "type": "object",
            "required": ["protocol", "inputs", "outcomes", "success"],
            "properties": {"protocol": {"type": "string"},
                           "inputs": {"type": "object"},
                           "outcomes": {"type": "array"},
                           "success": {"type": "boolean"},
                           "notes": {"type": "string"}},
        },
        "span_report": {
            "type": "object",
            "required": ["dims", "mode", "d_composite"],
            "properties": {"dims": {"type": "array"},
                           "mode": mode,
                           "d_systems": {"type": "array"},
                           "d_composite": {"type": "integer"},
                           "delta2": {"type": "object"},
                           "delta3": {"type": "integer"},
                           "class_ranks": {"type": "object"},
                           "bilocal_identity_holds": {"type": "boolean"}},
        },
    }


_TYPES = {"object": dict, "array": list, "string": str,
          "integer": int, "boolean": bool, "null": type(None)}


def validate_document(doc: Any, kind: str) -> None:
    """Check a document against the published schema; raises ParseError."""
    schemas = schema()
    if kind not in schemas:
        raise ParseError(E_SCHEMA, f"unknown document kind {kind!r}")

    def check(node: Any, spec: dict, where: str) -> None:
        if "$ref" in spec:
            check(node, schemas[spec["$ref"]], where)
            return
        expected = spec.get("type")
        if expected is not None:
            allowed = expected if isinstance(expected, list) else [expected]
            if not any(isinstance(node, _TYPES[t]) and not
                       (t == "integer" and isinstance(node, bool))
                       for t in allowed):
                raise ParseError(E_SCHEMA, f"{where}: expected {expected}")
        if "enum" in spec and node not in spec["enum"]:
            raise ParseError(E_SCHEMA, f"{where}: {node!r} not in {spec['enum']}")
        if isinstance(node, dict):
            for key in spec.get("required", ()):
                if key not in node:
                    raise ParseError(E_SCHEMA, f"{where}: missing {key!r}")
            for key, sub in spec.get("properties", {}).items():
                if key in node:
                    check(node[key], sub, f"{where}.{key}")
            if "values" in spec:
                for key, value in node.items():
                    check(value, spec["values"], f"{where}.{key}")
        if isinstance(node, list) and "items" in spec:
            for i, item in enumerate(node):
                check(item, spec["items"], f"{where}[{i}]")

    check(doc, schemas[kind], kind)
