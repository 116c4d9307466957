"""Command-line harness: coherence suite, tomography, dilations, protocols.

Exit codes: 0 all checks pass, 1 at least one check failed, 2 usage or IO
error.  All reports are canonical JSON (sorted keys), byte-stable for a
fixed configuration and seed.  A flat key=value config file can seed any
flag; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import serial
from .coherence import SuiteConfig, run_suite
from .dilation import realize_instrument
from .faults import KNOWN_FAULTS
from .protocols import (
    capacity_report,
    clone_state,
    dense_coding,
    entanglement_swapping,
    hypersignaling_report,
    monogamy_demo,
)
from .serial import ParseError, dumps
from .systems import TheoryMode, leaf
from .tomography import span_report, verify_corollary_nab, verify_strict_bilocality

USAGE_ERROR = 2
CHECK_FAILED = 1


def _parse_mode(text: str) -> TheoryMode:
    try:
        return TheoryMode(text.upper())
    except ValueError:
        raise SystemExit(USAGE_ERROR)


def _emit(doc, out: str | None, quiet: bool, summary: str) -> None:
    text = dumps(doc)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if not quiet and out:
        print(summary)


def _load_config(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    values: dict[str, str] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError(serial.E_SCHEMA, f"bad config line {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _dims_list(text: str) -> list[tuple[int, ...]]:
    groups = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if chunk:
            groups.append(tuple(int(x) for x in chunk.split(",")))
    return groups


def cmd_coherence(args) -> int:
    mode = _parse_mode(args.mode)
    kwargs = {}
    if args.dims_matrix:
        tuples = _dims_list(args.dims_matrix)
        kwargs["pentagon_dims"] = tuple(t for t in tuples if len(t) == 4) or \
            SuiteConfig.pentagon_dims
        kwargs["hexagon_dims"] = tuple(t for t in tuples if len(t) == 3) or \
            SuiteConfig.hexagon_dims
    fault = None if args.fault in (None, "none") else args.fault
    config = SuiteConfig(mode=mode, seed=args.seed, fault=fault,
                         kernel_pairs=args.pairs, **kwargs)
    reports = run_suite(config)
    passed = all(r.passed for r in reports)
    doc = {"config": {"mode": mode.value, "seed": args.seed,
                      "fault": fault or "none"},
           "passed": passed,
           "reports": [r.to_json() for r in reports]}
    for entry in doc["reports"]:
        serial.validate_document(entry, "check_report")
    _emit(doc, args.out, args.quiet,
          f"coherence: {sum(r.passed for r in reports)}/{len(reports)} checks pass")
    return 0 if passed else CHECK_FAILED


def cmd_verify_dims(args) -> int:
    mode = _parse_mode(args.mode)
    reports = []
    ok = True
    for dims in _dims_list(args.triples):
        if len(dims) != 3:
            raise ParseError(serial.E_SCHEMA, f"need dim triples, got {dims}")
        rep = span_report(*(leaf(d, mode) for d in dims))
        ok &= rep.delta3 == 0 and rep.bilocal_identity_holds
        serial.validate_document(rep.to_json(), "span_report")
        reports.append(rep.to_json())
    _emit(reports, args.out, args.quiet, f"verify-dims: {len(reports)} triples")
    return 0 if ok else CHECK_FAILED


def cmd_tomography(args) -> int:
    from .systems import compose_systems, dimension

    mode = _parse_mode(args.mode)
    reports = []
    ok = True
    for dims in _dims_list(args.pairs):
        if len(dims) != 2:
            raise ParseError(serial.E_SCHEMA, f"need dim pairs, got {dims}")
        a, b = (leaf(d, mode) for d in dims)
        strict = verify_strict_bilocality(a, b)
        corollary = verify_corollary_nab(a, b)
        d_ab = dimension(compose_systems(a, b))
        reports.append({
            "dims": list(dims),
            "mode": mode.value,
            "d_ab": d_ab,
            "delta2": d_ab - dimension(a) * dimension(b),
            "strict_bilocality": strict,
            "corollary_nab": corollary,
        })
        ok &= strict and corollary
    _emit(reports, args.out, args.quiet, f"tomography: {len(reports)} pairs")
    return 0 if ok else CHECK_FAILED


def cmd_dilate(args) -> int:
    doc = json.loads(Path(args.instrument).read_text(encoding="utf-8"))
    serial.validate_document(doc, "instrument")
    instrument = serial.instrument_from_json(doc)
    result = realize_instrument(instrument)
    out_doc = {
        "verified": result.verified,
        "sigma": serial.vector_to_json(result.sigma),
        "observation": [serial.vector_to_json(e) for e in result.observation],
        "outcomes": [o if isinstance(o, (int, str)) else str(o)
                     for o in result.outcomes],
        "mu": {f"h={','.join(map(str, fl.h))};"
               f"xi={','.join('+' if s == 1 else '-' for s in fl.xi)}":
               serial.fraction_to_str(w) for fl, w in result.mu.items()},
    }
    serial.validate_document(out_doc, "dilation_result")
    _emit(out_doc, args.out, args.quiet,
          f"dilate: verified={result.verified}")
    return 0 if result.verified else CHECK_FAILED


def cmd_protocol(args) -> int:
    mode = _parse_mode(args.mode)
    name = args.name
    if name == "dense-coding":
        report = dense_coding(mode)
    elif name == "swap":
        report = entanglement_swapping(args.i, args.j, args.s, args.k, args.l,
                                       args.t)
    elif name == "clone":
        if not args.state:
            raise ParseError(serial.E_SCHEMA, "clone needs --state FILE")
        doc = json.loads(Path(args.state).read_text(encoding="utf-8"))
        report = clone_state(serial.state_from_json(doc))
    elif name == "monogamy":
        report = monogamy_demo(mode)
    elif name == "hypersignal":
        dims = tuple(int(x) for x in args.dims.split(","))
        if len(dims) != 2:
            raise ParseError(serial.E_SCHEMA, f"--dims needs a pair, got {args.dims!r}")
        report = hypersignaling_report(leaf(dims[0], mode), leaf(dims[1], mode))
    elif name == "capacity":
        report = capacity_report(args.n, mode)
    else:  # pragma: no cover - argparse restricts choices
        return USAGE_ERROR
    doc = report.to_json()
    serial.validate_document(doc, "protocol_report")
    _emit(doc, args.out, args.quiet, f"protocol {name}: success={report.success}")
    return 0 if report.success else CHECK_FAILED


def cmd_schema(args) -> int:
    _emit(serial.schema(), args.out, args.quiet, "schema written")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bct",
        description="Exact checks and protocols for a bilocal classical theory.")
    parser.add_argument("--config", help="flat key=value file mirroring flags")
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--mode", default="BCT", choices=["BCT", "CT", "bct", "ct"])
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--quiet", action="store_true",
                       help="suppress the human-readable summary")

    p = sub.add_parser("coherence", help="run the consistency suite")
    common(p)
    p.add_argument("--dims-matrix", help="semicolon-separated dim tuples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pairs", type=int, default=100,
                   help="seeded kernel pairs per kernel-level check")
    p.add_argument("--fault", default="none", choices=["none", *KNOWN_FAULTS])
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("verify-dims", help="tripartite dimension identities")
    common(p)
    p.add_argument("--triples", required=True,
                   help='e.g. "2,2,2;2,2,3;3,3,2"')
    p.set_defaults(func=cmd_verify_dims)

    p = sub.add_parser("tomography", help="bipartite dimension excess reports")
    common(p)
    p.add_argument("--pairs", required=True, help='e.g. "2,2;2,3"')
    p.set_defaults(func=cmd_tomography)

    p = sub.add_parser("dilate", help="realize an instrument on the processor")
    common(p)
    p.add_argument("instrument", help="path to an instrument JSON document")
    p.set_defaults(func=cmd_dilate)

    p = sub.add_parser("protocol", help="run an information-theoretic protocol")
    common(p)
    p.add_argument("name", choices=["dense-coding", "swap", "clone", "monogamy",
                                    "hypersignal", "capacity"])
    p.add_argument("--i", type=int, default=1)
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--s", default="+")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--l", type=int, default=1)
    p.add_argument("--t", default="+")
    p.add_argument("--n", type=int, default=1, help="carriers for capacity")
    p.add_argument("--dims", default="2,2", help="pair dims for hypersignal")
    p.add_argument("--state", help="state JSON path for clone")
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("schema", help="print the JSON schemas")
    common(p)
    p.set_defaults(func=cmd_schema)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        preliminary, _ = parser.parse_known_args(argv)
    except SystemExit:
        return USAGE_ERROR
    try:
        defaults = _load_config(getattr(preliminary, "config", None))
    except (OSError, ParseError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    if defaults:
        merged: list[str] = []
        commands = {"coherence", "verify-dims", "tomography", "dilate",
                    "protocol", "schema"}
        for key, value in defaults.items():
            flag = f"--{key.replace('_', '-')}"
            if flag not in argv:
                merged.extend([flag, value])
        # config flags go after the subcommand so argparse scopes them
        at = next((i for i, a in enumerate(argv) if a in commands), None)
        if at is not None:
            argv = argv[:at + 1] + merged + argv[at + 1:]
    try:
        args = parser.parse_args(argv)
    except SystemExit:
        return USAGE_ERROR
    if not getattr(args, "command", None):
        parser.print_usage()
        return USAGE_ERROR
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error {exc.code}: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
