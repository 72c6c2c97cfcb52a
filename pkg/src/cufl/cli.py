"""命令行入口：``check``、``run``、``quote``、``emulate``、``enumerate``、``consistency``。"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from . import bounds as bd
from .checker import CheckReport, Status, check_claim, infer, resolve_bounds
from .config import CHECK_CONFIG, EMULATION_CONFIG, EVAL_CONFIG, LOGGING_CONFIG
from .encoder import quote_term
from .emulation.loops import compile_loop, load_loop_program, run_loop_direct, width_for
from .emulation.search import count_inhabitants, enumerate_inhabitants, search_for_bottom
from .emulation.turing import compile_tm, load_tm, run_tm_direct
from .errors import BoundError, CuflError, FuelExhausted
from .evaluator import normalize, verify_bounds
from .parser import Definition, Program, parse_program, parse_term, parse_type
from .syntax import EMPTY_CONTEXT, format_term, format_type

logger = logging.getLogger(__name__)

ERROR, WARNING = "error", "warning"


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass
class Result:
    name: str
    type: str
    alpha: str
    beta: str
    status: str
    cost: Optional[int] = None
    depth: Optional[int] = None


@dataclass
class Diagnostic:
    severity: str
    message: str
    line: Optional[int] = None
    col: Optional[int] = None


@dataclass
class Report:
    command: str
    results: List[Result] = field(default_factory=list)
    diagnostics: List[Diagnostic] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def error(self, message: str, line: Optional[int] = None, col: Optional[int] = None) -> None:
        self.diagnostics.append(Diagnostic(ERROR, message, line, col))

    def warn(self, message: str, line: Optional[int] = None, col: Optional[int] = None) -> None:
        self.diagnostics.append(Diagnostic(WARNING, message, line, col))

    def exit_code(self, strict: bool = False) -> int:
        failing = {ERROR, WARNING} if strict else {ERROR}
        if any(d.severity in failing for d in self.diagnostics):
            return 1
        if any(r.status == Status.INVALID.value for r in self.results):
            return 1
        if strict and any(r.status == Status.VALID_WITH_UNKNOWN_LEQ.value for r in self.results):
            return 1
        return 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), ensure_ascii=False, indent=2, sort_keys=True)

    def to_text(self) -> str:
        marks = {Status.VALID.value: "✅", Status.VALID_WITH_UNKNOWN_LEQ.value: "⚠️", Status.INVALID.value: "❌"}
        lines = [f"cufl {self.command}"]
        for result in self.results:
            line = f"{marks.get(result.status, '•')} {result.name} : {result.type}  [alpha={result.alpha}; beta={result.beta}]"
            if result.cost is not None:
                line += f"  cost={result.cost} depth={result.depth}"
            lines.append(line)
        lines.extend(f"  {note}" for note in self.notes)
        for diagnostic in self.diagnostics:
            where = f" (line {diagnostic.line}, col {diagnostic.col})" if diagnostic.line is not None else ""
            lines.append(f"{diagnostic.severity}: {diagnostic.message}{where}")
        return "\n".join(lines)


def _result(name: str, report: CheckReport, **measured: Any) -> Result:
    judgement = report.judgement
    return Result(
        name=name,
        type=format_type(judgement.ty),
        alpha=bd.render_bound(judgement.alpha),
        beta=bd.render_bound(judgement.beta),
        status=report.status.value,
        **measured,
    )


def _failed(name: str, status: str = Status.INVALID.value) -> Result:
    return Result(name=name, type="?", alpha="?", beta="?", status=status)


# ---------------------------------------------------------------------------
# file commands
# ---------------------------------------------------------------------------

def _load(path: str, report: Report) -> Optional[Program]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        report.error(f"cannot read {path}: {exc.strerror or exc}")
        return None
    try:
        return parse_program(text)
    except CuflError as exc:
        report.error(exc.message, exc.line, exc.col)
        return None


def _targets(program: Program, kind: str, report: Report) -> List[Definition]:
    """Definitions named by ``#kind`` directives, or every definition when there are none."""
    directives = [d for d in program.directives if d.kind == kind]
    if not directives:
        return list(program.definitions.values())
    chosen: List[Definition] = []
    for directive in directives:
        definition = program.definitions.get(directive.name)
        if definition is None:
            report.error(f"#{kind} names unknown definition {directive.name!r}", directive.line, directive.col)
            continue
        chosen.append(definition)
    return chosen


def _check_definition(definition: Definition, grid: int, report: Report) -> Optional[CheckReport]:
    alpha, beta = definition.claim if definition.claim else (None, None)
    try:
        checked = check_claim(EMPTY_CONTEXT, definition.term, definition.ty, alpha, beta, grid)
    except CuflError as exc:
        report.results.append(_failed(definition.name))
        report.error(f"{definition.name}: {exc}", definition.line, definition.col)
        return None
    if checked.unknown_leqs:
        report.warn(
            f"{definition.name}: {checked.unknown_leqs} bound comparison(s) left undecided",
            definition.line,
            definition.col,
        )
    if checked.status is Status.INVALID:
        report.error(f"{definition.name}: {checked.reason}", definition.line, definition.col)
    return checked


def _apply_limit(definition: Definition, checked: CheckReport, limit: Optional[int], report: Report) -> None:
    if limit is None:
        return
    try:
        resolution = resolve_bounds(checked.judgement, {}, limit)
    except BoundError as exc:
        logger.debug("%s: bounds not closed (%s), limit not applied", definition.name, exc)
        return
    if not resolution.within_limit:
        report.error(
            f"{definition.name}: alpha {resolution.alpha} exceeds the limit {limit}",
            definition.line,
            definition.col,
        )


def cmd_check(args: argparse.Namespace) -> Report:
    report = Report("check")
    program = _load(args.file, report)
    if program is None:
        return report
    for definition in _targets(program, "check", report):
        checked = _check_definition(definition, args.grid, report)
        if checked is None:
            continue
        report.results.append(_result(definition.name, checked))
        _apply_limit(definition, checked, args.limit, report)
    return report


def _run_one(definition: Definition, args: argparse.Namespace, report: Report) -> None:
    checked = _check_definition(definition, args.grid, report)
    if checked is None:
        return
    try:
        trace = normalize(definition.term, args.fuel)
    except FuelExhausted as exc:
        report.results.append(_result(definition.name, checked))
        report.error(f"{definition.name}: {exc.message}", definition.line, definition.col)
        return
    except CuflError as exc:
        report.results.append(_result(definition.name, checked))
        report.error(f"{definition.name}: {exc}", definition.line, definition.col)
        return

    result = _result(definition.name, checked, cost=trace.total_cost, depth=trace.normal_depth)
    report.results.append(result)
    report.notes.append(f"{definition.name} => {format_term(trace.normal_form)}")
    if args.trace:
        report.notes.extend(f"{definition.name} {line}" for line in trace.lines())

    if checked.ok and not definition.term.free:
        try:
            verified = verify_bounds(definition.term, checked, trace=trace)
        except BoundError as exc:
            report.warn(f"{definition.name}: bounds not closed, not verified ({exc})", definition.line, definition.col)
        else:
            report.notes.append(
                f"{definition.name} verify {'ok' if verified.ok else 'FAILED'}: "
                f"cost {verified.measured_cost} <= {verified.alpha_bound}, "
                f"depth {verified.measured_depth} <= {verified.beta_bound}"
            )
            if not verified.ok:
                result.status = Status.INVALID.value
                report.error(f"{definition.name}: measured run exceeds its derived bounds", definition.line, definition.col)
    _apply_limit(definition, checked, args.limit, report)


def cmd_run(args: argparse.Namespace) -> Report:
    report = Report("run")
    if args.expr is not None:
        try:
            program = Program({"expr": Definition("expr", parse_term(args.expr), line=1, col=1)})
        except CuflError as exc:
            report.error(exc.message, exc.line, exc.col)
            return report
    elif args.file is not None:
        program = _load(args.file, report)
        if program is None:
            return report
    else:
        report.error("run needs a FILE or --expr TERM")
        return report
    for definition in _targets(program, "run", report):
        _run_one(definition, args, report)
    return report


def cmd_quote(args: argparse.Namespace) -> Report:
    report = Report("quote")
    program = _load(args.file, report)
    if program is None:
        return report
    for definition in _targets(program, "quote", report):
        try:
            quoted = quote_term(definition.term)
            checked = infer(EMPTY_CONTEXT, quoted, grid=args.grid)
        except CuflError as exc:
            report.results.append(_failed(definition.name))
            report.error(f"{definition.name}: {exc}", definition.line, definition.col)
            continue
        report.results.append(_result(definition.name, checked))
        report.notes.append(f"{definition.name} = {format_term(quoted)}")
    return report


# ---------------------------------------------------------------------------
# emulation and search
# ---------------------------------------------------------------------------

def _emulate_tm(args: argparse.Namespace, report: Report) -> None:
    tm = load_tm(args.spec)
    raw = " ".join(args.inputs)
    word = raw.split() if " " in raw.strip() else list(raw.strip())
    direct, steps = run_tm_direct(tm, word)
    step_bound = args.steps if args.steps is not None else max(1, len(word) + 1)
    compiled = compile_tm(tm, word, step_bound)
    checked = compiled.report
    trace = normalize(compiled.term, args.fuel or EMULATION_CONFIG["emulate_fuel"])
    emulated = compiled.decode(trace.normal_form)
    verified = verify_bounds(compiled.term, checked, trace=trace)

    agree = emulated.normalized(tm.blank) == direct.normalized(tm.blank)
    result = _result(tm.name, checked, cost=trace.total_cost, depth=trace.normal_depth)
    result.type = f"{tm.name} configuration"
    if not (agree and verified.ok):
        result.status = Status.INVALID.value
    report.results.append(result)
    report.notes.append(f"direct:   state={direct.state} tape={direct.tape(tm.blank)!r} steps={steps}")
    report.notes.append(f"compiled: state={emulated.state} tape={emulated.tape(tm.blank)!r} step_bound={step_bound}")
    report.notes.append(f"agreement: {'yes' if agree else 'no'}; verify {'ok' if verified.ok else 'FAILED'}")
    if not agree:
        report.error(f"{tm.name}: compiled run disagrees with the direct simulation")
    if not verified.ok:
        report.error(f"{tm.name}: measured run exceeds its derived bounds")


def _emulate_loop(args: argparse.Namespace, report: Report) -> None:
    program = load_loop_program(args.spec)
    try:
        values = [int(value) for value in args.inputs]
    except ValueError:
        report.error(f"loop inputs must be integers, got {args.inputs}")
        return
    direct = run_loop_direct(program, values)
    compiled = compile_loop(program, width_for(program, max(values, default=0)))
    checked = compiled.check(values)
    term = compiled.apply(values)
    trace = normalize(term, args.fuel or EMULATION_CONFIG["emulate_fuel"])
    value = compiled.decode(trace.normal_form)
    verified = verify_bounds(term, checked, trace=trace)

    agree = value == direct.result
    result = _result(program.name, checked, cost=trace.total_cost, depth=trace.normal_depth)
    if not (agree and verified.ok):
        result.status = Status.INVALID.value
    report.results.append(result)
    report.notes.append(f"direct: {direct.result}; compiled: {value}; width {compiled.width}")
    params = ", ".join(program.params)
    report.notes.append(f"alpha({params}) <= {bd.render_bound(compiled.bounds.alpha)}")
    report.notes.append(f"agreement: {'yes' if agree else 'no'}; verify {'ok' if verified.ok else 'FAILED'}")
    if not agree:
        report.error(f"{program.name}: compiled result {value} differs from {direct.result}")
    if not verified.ok:
        report.error(f"{program.name}: measured run exceeds its derived bounds")


def cmd_emulate(args: argparse.Namespace) -> Report:
    report = Report(f"emulate {args.kind}")
    if not Path(args.spec).exists():
        report.error(f"no such file: {args.spec}")
        return report
    try:
        (_emulate_tm if args.kind == "tm" else _emulate_loop)(args, report)
    except CuflError as exc:
        report.error(str(exc))
    return report


def cmd_enumerate(args: argparse.Namespace) -> Report:
    report = Report("enumerate")
    try:
        ty = parse_type(args.type)
        values = list(enumerate_inhabitants(ty, args.depth))
        for value in values:
            checked = infer(EMPTY_CONTEXT, value, ty)
            report.results.append(_result(format_term(value), checked, depth=value.depth))
        report.notes.append(f"{len(values)} of {count_inhabitants(ty, args.depth)} inhabitants with depth <= {args.depth}")
    except CuflError as exc:
        report.error(str(exc), exc.line, exc.col)
    return report


def cmd_consistency(args: argparse.Namespace) -> Report:
    report = Report("consistency")
    found = search_for_bottom(args.max_size)
    if found is None:
        report.results.append(Result("consistency", "Bot", "-", "-", Status.VALID.value))
        report.notes.append(f"no inhabitant of Bot found up to size {args.max_size}")
    else:
        report.results.append(Result(format_term(found), "Bot", "-", "-", Status.INVALID.value))
        report.error(f"closed term of type Bot: {format_term(found)}")
    return report


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

COMMANDS: Dict[str, Callable[[argparse.Namespace], Report]] = {
    "check": cmd_check,
    "run": cmd_run,
    "quote": cmd_quote,
    "emulate": cmd_emulate,
    "enumerate": cmd_enumerate,
    "consistency": cmd_consistency,
}


def _global_options(parser: argparse.ArgumentParser, suppress: bool = False) -> None:
    """Options shared by every subcommand; subparsers only override what is given."""
    def default(value: object) -> object:
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--report", choices=("text", "json"), default=default("text"), help="Report format on stdout")
    parser.add_argument("--strict", action="store_true", default=default(False), help="Treat undecided bound comparisons as failures")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False), help="Debug logging on stderr")
    parser.add_argument("--grid", type=int, default=default(CHECK_CONFIG["grid"]), help="Sampling grid for bound comparisons")
    parser.add_argument("--fuel", type=int, default=default(None), help="Reduction step budget")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)

    parser = argparse.ArgumentParser(prog="cufl", description="Bound-carrying proof checker and interpreter")
    _global_options(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", parents=[common], help="Check definitions against their claims")
    check.add_argument("file")
    check.add_argument("--limit", type=int, default=None, help="Reject closed proofs whose alpha exceeds N")

    run = sub.add_parser("run", parents=[common], help="Normalize definitions and verify their bounds")
    run.add_argument("file", nargs="?")
    run.add_argument("-e", "--expr", default=None, help="Run a single term instead of a file")
    run.add_argument("--trace", action="store_true", help="Print the reduction log")
    run.add_argument("--limit", type=int, default=None, help="Reject closed proofs whose alpha exceeds N")

    quote = sub.add_parser("quote", parents=[common], help="Print quotations of definitions")
    quote.add_argument("file")

    emulate = sub.add_parser("emulate", parents=[common], help="Compile and run a loop program or Turing machine")
    emulate.add_argument("kind", choices=("tm", "loop"))
    emulate.add_argument("spec", help=".tm or .loop file")
    emulate.add_argument("inputs", nargs="*", help="Tape word, or integer arguments")
    emulate.add_argument("--steps", type=int, default=None, help="Step bound for tm (default |input| + 1)")

    enumerate_ = sub.add_parser("enumerate", parents=[common], help="List inhabitants of a first-order type")
    enumerate_.add_argument("type")
    enumerate_.add_argument("--depth", type=int, default=EMULATION_CONFIG["enumerate_depth"])

    consistency = sub.add_parser("consistency", parents=[common], help="Search small closed terms for a proof of Bot")
    consistency.add_argument("--max-size", type=int, default=EMULATION_CONFIG["consistency_max_size"])
    return parser


def setup_logging(verbose: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else LOGGING_CONFIG["level"],
        format=LOGGING_CONFIG["format"],
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    if args.fuel is None and args.command == "run":
        args.fuel = EVAL_CONFIG["fuel"]
    try:
        report = COMMANDS[args.command](args)
    except Exception as exc:  # noqa: BLE001
        logger.exception("unexpected failure in %s", args.command)
        report = Report(args.command)
        report.error(f"internal error: {exc}")
    print(report.to_json() if args.report == "json" else report.to_text())
    code = report.exit_code(args.strict)
    logger.info("%s finished with exit status %d", args.command, code)
    return code


if __name__ == "__main__":
    sys.exit(main())
