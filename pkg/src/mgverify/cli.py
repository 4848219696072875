"""Command line interface: ``mgverify verify|analyze|behavior|diff|emit``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import prover as pv
from .analysis import dependency_graph, gate, is_tight, positive_cycle, private_recursion_witness
from .oracle import (Counterexample, check_equivalence, external_behavior, format_behavior,
                     guide_inputs)
from .reduction import DIRECTION_TITLES, build_specification, goal_from_specification
from .syntax import ParseError, Program, parse_facts, parse_precomputed, parse_program
from .userguide import GuideError, GuideInput, UserGuide, merge_helpers, parse_helper, \
    parse_user_guide

EXIT_OK, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2
SPEC_FILE = "specification.spec"


class CliError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CliError(f"{path}: {e.strerror or e}") from e


def _load(path: str, parser):
    text = _read(path)
    try:
        return parser(text)
    except (ParseError, GuideError) as e:
        raise CliError(f"{path}:{e}") from e


def load_program(path: str) -> Program:
    return _load(path, parse_program)


def load_guide(path: str) -> UserGuide:
    return _load(path, parse_user_guide)


def _window(text: str | None):
    if text is None:
        return None
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError as e:
        raise CliError(f"bad window {text!r}: expected LO:HI") from e
    return lo, hi


def _emit(args, payload: dict, lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print("\n".join(lines))


# ---------------------------------------------------------------------------
# verify and emit
# ---------------------------------------------------------------------------


def _prepare(args):
    p1, p2 = load_program(args.program1), load_program(args.program2)
    guide = load_guide(args.guide)
    helper = merge_helpers(_load(h, parse_helper) for h in args.helper)
    diags = gate(p1, p2, guide)
    return p1, p2, guide, helper, diags


def _artifacts(p1, p2, guide, helper, timeout):
    spec = build_specification(p1, guide, p2, check=False)
    goal = goal_from_specification(spec, p2, guide)
    tasks = pv.plan_tasks(goal, helper, timeout)
    return spec, tasks


def _write_artifacts(directory: str, spec, tasks) -> list[Path]:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    (out / SPEC_FILE).write_text(spec.to_text())
    return [out / SPEC_FILE] + pv.write_tasks(tasks, out)


def cmd_emit(args) -> int:
    p1, p2, guide, helper, diags = _prepare(args)
    if diags:
        _emit(args, {"diagnostics": [str(d) for d in diags]}, [str(d) for d in diags])
        return EXIT_ERROR
    spec, tasks = _artifacts(p1, p2, guide, helper, args.timeout)
    paths = _write_artifacts(args.output, spec, tasks)
    _emit(args, {"files": [str(p) for p in paths]}, [str(p) for p in paths])
    return EXIT_OK


def cmd_verify(args) -> int:
    p1, p2, guide, helper, diags = _prepare(args)
    text = [f"gating: {'ok' if not diags else 'failed'}"] + [f"  {d}" for d in diags]
    report = {"diagnostics": [str(d) for d in diags]}
    if diags:
        report["verdict"] = pv.Verdict.ERROR.value
        _emit(args, report, text + ["verdict: Error"])
        return EXIT_ERROR
    spec, tasks = _artifacts(p1, p2, guide, helper, args.timeout)
    report["specification"] = spec.to_text()
    report["tasks"] = [t.name for t in tasks]
    text += ["specification:"] + ["  " + s for s in spec.to_text().splitlines()]
    text += ["tasks:"] + [f"  {t.name} ({t.role}, {DIRECTION_TITLES[t.direction]})"
                          for t in tasks]
    if args.emit_only:
        paths = _write_artifacts(args.emit_only, spec, tasks)
        report["files"] = [str(p) for p in paths]
        report["verdict"] = pv.Verdict.UNKNOWN.value
        text += [f"wrote {len(paths)} files to {args.emit_only}", "verdict: Unknown (not run)"]
        _emit(args, report, text)
        return EXIT_UNKNOWN
    exe = args.prover or pv.default_prover()
    if exe is None:
        raise CliError("no prover configured: pass --prover or set MGVERIFY_PROVER")
    config = pv.ProverConfig(exe, args.prover_args, args.timeout, args.parallel)
    try:
        outcome = pv.run_tasks(tasks, config)
    except pv.ProverNotFound as e:
        raise CliError(str(e)) from e
    report["results"] = [{"task": r.task.name, "status": r.status.value, "detail": r.detail,
                          "seconds": round(r.seconds, 3)} for r in outcome.results]
    report["verdict"] = outcome.overall.value
    text += ["results:"] + [f"  {r.task.name}: {r.status.value} ({r.detail}, {r.seconds:.1f}s)"
                            for r in outcome.results]
    text.append(f"verdict: {outcome.overall.value}")
    _emit(args, report, text)
    return {pv.Verdict.EQUIVALENT: EXIT_OK, pv.Verdict.UNKNOWN: EXIT_UNKNOWN}.get(
        outcome.overall, EXIT_ERROR)


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> int:
    guide = load_guide(args.guide) if args.guide else UserGuide()
    report, text = [], []
    for path in args.programs:
        prog = load_program(path)
        g = dependency_graph(prog)
        edges = g.edge_list()
        cycle = positive_cycle(prog)
        why = private_recursion_witness(prog, guide.inputs, guide.outputs)
        report.append({
            "program": path,
            "edges": [{"rule": i, "from": str(h), "to": str(b), "positive": pos}
                      for i, h, b, pos in edges],
            "tight": is_tight(prog),
            "private_recursion": why is not None,
            "private_recursion_detail": why,
        })
        text.append(f"{path}:")
        text.append(f"  edges: {len(edges)} ({sum(not e[3] for e in edges)} non-positive)")
        text += [f"    rule {i}: {h} -> {b} {'+' if pos else '-'}" for i, h, b, pos in edges]
        text.append("  tight: " + ("yes" if cycle is None else
                                   "no (" + " -> ".join(map(str, cycle + cycle[:1])) + ")"))
        text.append(f"  private recursion: {'no' if why is None else 'yes (' + why + ')'}")
    _emit(args, {"programs": report}, text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle commands
# ---------------------------------------------------------------------------


def _guide_input(args, guide: UserGuide) -> GuideInput:
    valuation = {}
    for item in args.value:
        name, sep, term = item.partition("=")
        if not sep:
            raise CliError(f"bad --value {item!r}: expected NAME=TERM")
        try:
            valuation[name.strip()] = parse_precomputed(term.strip())
        except ParseError as e:
            raise CliError(f"--value {item}: {e}") from e
    atoms = set()
    for path in args.facts:
        atoms |= set(_load(path, parse_facts))
    gi = GuideInput(valuation, frozenset(atoms))
    try:
        gi.validate(guide)
    except GuideError as e:
        raise CliError(str(e)) from e
    return gi


def cmd_behavior(args) -> int:
    prog, guide = load_program(args.program), load_guide(args.guide)
    gi = _guide_input(args, guide)
    b = external_behavior(prog, guide, gi, _window(args.window), args.guard)
    models = sorted(sorted(str(a) for a in m) for m in b)
    _emit(args, {"input": gi.describe(), "behavior": models}, [format_behavior(b)])
    return EXIT_OK


def cmd_diff(args) -> int:
    p1, p2 = load_program(args.program1), load_program(args.program2)
    guide = load_guide(args.guide)
    window = _window(args.window)
    constants = [c for c in args.constants.split(",") if c] if args.constants else []
    inputs = guide_inputs(guide, range(args.min_int, args.max_int + 1), constants,
                          args.max_facts, window)
    result = check_equivalence(p1, p2, guide, inputs, window, args.guard, args.workers)
    if isinstance(result, Counterexample):
        b1, b2 = format_behavior(result.behavior1), format_behavior(result.behavior2)
        _emit(args, {"counterexample": result.input.describe(), "behavior1": b1,
                     "behavior2": b2, "tested": result.n_tested},
              [f"counterexample: {result.input.describe()}",
               f"  {args.program1}: {b1}", f"  {args.program2}: {b2}"])
        return EXIT_UNKNOWN
    _emit(args, {"counterexample": None, "tested": result.n_tested},
          [f"no counterexample among {result.n_tested} inputs"])
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mgverify", description=(
        "Check equivalence of mini-gringo programs with respect to a user guide."))
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("text", "json"), default="text")

    def proof_inputs(p):
        p.add_argument("program1")
        p.add_argument("program2")
        p.add_argument("guide")
        p.add_argument("--helper", action="append", default=[],
                       help="file with lemma/induction statements (repeatable)")
        p.add_argument("--timeout", type=float, default=pv.DEFAULT_TIMEOUT,
                       help="seconds per prover task")

    p = sub.add_parser("verify", help="prove equivalence with an external prover")
    proof_inputs(p)
    common(p)
    p.add_argument("--prover", help="prover executable (default: $MGVERIFY_PROVER or vampire)")
    p.add_argument("--prover-args", default=pv.DEFAULT_ARGS,
                   help="argument template with {file} and {timeout}")
    p.add_argument("--parallel", type=int, default=2)
    p.add_argument("--emit-only", metavar="DIR", help="write the tasks and stop")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("emit", help="write the specification and TPTP tasks")
    proof_inputs(p)
    common(p)
    p.add_argument("-o", "--output", default="mgverify-out")
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser("analyze", help="dependency graph, tightness, private recursion")
    p.add_argument("programs", nargs="+")
    p.add_argument("--guide")
    common(p)
    p.set_defaults(func=cmd_analyze)

    def oracle_opts(p):
        p.add_argument("--window", help="integer window LO:HI for grounding")
        p.add_argument("--guard", type=int, default=24,
                       help="max undecided ground atoms in the stable-model search")

    p = sub.add_parser("behavior", help="external behavior for one input")
    p.add_argument("program")
    p.add_argument("guide")
    p.add_argument("--value", action="append", default=[], metavar="NAME=TERM")
    p.add_argument("--facts", action="append", default=[], metavar="FILE")
    oracle_opts(p)
    common(p)
    p.set_defaults(func=cmd_behavior)

    p = sub.add_parser("diff", help="search for a counterexample to equivalence")
    p.add_argument("program1")
    p.add_argument("program2")
    p.add_argument("guide")
    p.add_argument("--min-int", type=int, default=0)
    p.add_argument("--max-int", type=int, default=3)
    p.add_argument("--constants", default="", help="comma-separated constant pool")
    p.add_argument("--max-facts", type=int, default=2)
    p.add_argument("--workers", type=int, default=1)
    oracle_opts(p)
    common(p)
    p.set_defaults(func=cmd_diff)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
    except Exception as e:  # every failure maps to exit code 2
        if args.verbose:
            raise
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
