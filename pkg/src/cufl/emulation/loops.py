"""有界循环程序：解析器、参照解释器与到 CUFL 的编译器。

程序变量存放在由饱和数码 ``Nat_K`` 组成的右嵌套元组里。每条语句编译为作用于该元组的带注解 lambda，
``loop c { ... }`` 编译为 ``rec body (get s c) s``，迭代次数即计数变量数码的深度。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .. import bounds as bd
from ..bounds import BoundExpr, Mode, SizeVar
from ..checker import CheckReport, infer
from ..config import EMULATION_CONFIG
from ..encoder import ZERO, decode_nat, encode_nat, unfold_nat_type
from ..errors import IllFormedLoop, RewriteBudgetExceeded, StepLimitExceeded
from ..parser import TokenStream
from ..syntax import (
    EMPTY_CONTEXT,
    UNIT,
    App,
    Case,
    Inr,
    Lam,
    Pair,
    Prl,
    Prod,
    Prr,
    Rec,
    Term,
    Type,
    UnitVal,
    Var,
    app,
    ascribe,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# programs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Zero:
    pass


@dataclass(frozen=True)
class Succ:
    source: str


@dataclass(frozen=True)
class Copy:
    source: str


Expr = Union[Zero, Succ, Copy]


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr


@dataclass(frozen=True)
class Loop:
    counter: str
    body: Tuple["Statement", ...]


Statement = Union[Assign, Loop]


@dataclass(frozen=True)
class LoopProgram:
    name: str
    params: Tuple[str, ...]
    body: Tuple[Statement, ...]
    result: str

    @property
    def variables(self) -> Tuple[str, ...]:
        seen: List[str] = list(self.params)

        def visit(statements: Sequence[Statement]) -> None:
            for statement in statements:
                names = [statement.target] if isinstance(statement, Assign) else [statement.counter]
                if isinstance(statement, Assign) and not isinstance(statement.value, Zero):
                    names.append(statement.value.source)
                for name in names:
                    if name not in seen:
                        seen.append(name)
                if isinstance(statement, Loop):
                    visit(statement.body)

        visit(self.body)
        if self.result not in seen:
            seen.append(self.result)
        return tuple(seen)


def _assigned(statements: Sequence[Statement]) -> set:
    out = set()
    for statement in statements:
        if isinstance(statement, Assign):
            out.add(statement.target)
        else:
            out |= _assigned(statement.body)
    return out


def validate(program: LoopProgram) -> LoopProgram:
    if len(set(program.params)) != len(program.params):
        raise IllFormedLoop(f"{program.name}: duplicate parameter")

    def visit(statements: Sequence[Statement]) -> None:
        for statement in statements:
            if isinstance(statement, Loop):
                if statement.counter in _assigned(statement.body):
                    raise IllFormedLoop(
                        f"{program.name}: loop counter {statement.counter!r} is assigned inside its own loop"
                    )
                visit(statement.body)

    visit(program.body)
    return program


def _statements(stream: TokenStream, program: str) -> Tuple[Tuple[Statement, ...], Optional[str]]:
    body: List[Statement] = []
    result: Optional[str] = None
    while not stream.at("}"):
        if stream.accept("return"):
            result = stream.ident("result variable")
            stream.accept(";")
            break
        if stream.accept("loop"):
            counter = stream.ident("loop counter")
            stream.expect("{")
            inner, nested_result = _statements(stream, program)
            if nested_result is not None:
                raise IllFormedLoop(f"{program}: return inside a loop body")
            stream.expect("}")
            body.append(Loop(counter, inner))
        else:
            target = stream.ident("variable")
            stream.expect(":=")
            if stream.accept("zero") or stream.accept("0"):
                value: Expr = Zero()
            elif stream.accept("succ"):
                value = Succ(stream.ident("variable"))
            else:
                value = Copy(stream.ident("variable"))
            body.append(Assign(target, value))
        if not stream.accept(";"):
            break
    return tuple(body), result


def parse_loop_program(text: str) -> LoopProgram:
    """``prog add(x, y) { r := x; loop y { r := succ r }; return r }``"""
    stream = TokenStream(text)
    stream.expect("prog")
    name = stream.ident("program name")
    stream.expect("(")
    params: List[str] = []
    while not stream.at(")"):
        params.append(stream.ident("parameter"))
        if not stream.accept(","):
            break
    stream.expect(")")
    stream.expect("{")
    body, result = _statements(stream, name)
    stream.expect("}")
    stream.finish()
    if result is None:
        raise IllFormedLoop(f"{name}: missing return statement")
    return validate(LoopProgram(name, tuple(params), body, result))


def load_loop_program(path: Union[str, Path]) -> LoopProgram:
    return parse_loop_program(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# reference interpreter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LoopRun:
    result: int
    peak: int
    iterations: int


def run_loop_direct(program: LoopProgram, args: Sequence[int], max_iterations: Optional[int] = None) -> LoopRun:
    if len(args) != len(program.params):
        raise IllFormedLoop(f"{program.name} takes {len(program.params)} arguments, got {len(args)}")
    limit = max_iterations if max_iterations is not None else EMULATION_CONFIG["loop_fuel"]
    env: Dict[str, int] = {name: 0 for name in program.variables}
    env.update(zip(program.params, args))
    peak = max(env.values(), default=0)
    iterations = 0

    def execute(statements: Sequence[Statement]) -> None:
        nonlocal peak, iterations
        for statement in statements:
            if isinstance(statement, Loop):
                for _ in range(env[statement.counter]):
                    iterations += 1
                    if iterations > limit:
                        raise StepLimitExceeded(f"{program.name}: more than {limit} loop iterations")
                    execute(statement.body)
                continue
            value = statement.value
            if isinstance(value, Zero):
                env[statement.target] = 0
            elif isinstance(value, Succ):
                env[statement.target] = env[value.source] + 1
            else:
                env[statement.target] = env[value.source]
            peak = max(peak, env[statement.target])

    execute(program.body)
    return LoopRun(env[program.result], peak, iterations)


# ---------------------------------------------------------------------------
# compiler
# ---------------------------------------------------------------------------

def saturating_zero(width: int) -> Term:
    return UNIT if width == 0 else ZERO


def saturating_succ(e: Term, width: int) -> Term:
    """Successor on ``Nat_width``; the top element is a fixed point."""
    if width == 0:
        return e
    return Case(
        e,
        "u",
        Inr(saturating_zero(width - 1)),
        "y",
        Inr(saturating_succ(Var("y"), width - 1)),
    )


@dataclass(frozen=True)
class LoopBounds:
    """Cost and depth bounds of a run, over size variables named after the parameters."""

    params: Tuple[str, ...]
    alpha: BoundExpr
    beta: BoundExpr

    def at(self, args: Sequence[int]) -> Tuple[int, int]:
        """Numeric bounds for numeral arguments ``args``; a numeral ``n`` has depth ``n + 2``."""
        valuation = {name: value + 2 for name, value in zip(self.params, args)}
        return bd.eval_bound(self.alpha, valuation), bd.eval_bound(self.beta, valuation)


def _loosened(e: BoundExpr) -> BoundExpr:
    try:
        return bd.simplify(e, Mode.LOOSEN)
    except RewriteBudgetExceeded:
        logger.debug("bound of %d nodes kept unsimplified", e.size)
        return e


@dataclass(frozen=True)
class CompiledLoop:
    program: LoopProgram
    term: Term
    width: int
    numeral: Type
    state: Type

    def apply(self, args: Sequence[int]) -> Term:
        return app(self.term, *(encode_nat(value) for value in args))

    def decode(self, t: Term) -> int:
        """Numeral value of a result; the saturated top element reads as ``width``."""
        count = 0
        current = t
        while isinstance(current, Inr):
            count += 1
            current = current.body
        if isinstance(current, UnitVal) and count == self.width:
            return count
        return decode_nat(t)

    def check(self, args: Optional[Sequence[int]] = None) -> CheckReport:
        """Inferred bounds of the program, or of its application to ``args``."""
        target = self.term if args is None else self.apply(args)
        return infer(EMPTY_CONTEXT, target, self.numeral if args is not None else None)

    @cached_property
    def bounds(self) -> LoopBounds:
        """Per-parameter bounds: the program applied to arguments of depths ``x, y, ...``."""
        params = self.program.params
        ctx = EMPTY_CONTEXT
        for name in params:
            ctx = ctx.extend(f"arg_{name}", self.numeral, bd.var(name))
        target = app(self.term, *(Var(f"arg_{name}") for name in params))
        judgement = infer(ctx, target, self.numeral).judgement
        return LoopBounds(params, _loosened(judgement.alpha), _loosened(judgement.beta))


class _LoopCompiler:
    def __init__(self, program: LoopProgram, width: int) -> None:
        self.program = program
        self.width = width
        self.variables = program.variables
        self.numeral = unfold_nat_type(width)
        self.state = self._state_type(len(self.variables))

    def _state_type(self, n: int) -> Type:
        out = self.numeral
        for _ in range(n - 1):
            out = Prod(self.numeral, out)
        return out

    def get(self, s: Term, name: str) -> Term:
        index = self.variables.index(name)
        out = s
        for _ in range(index):
            out = Prr(out)
        return out if index == len(self.variables) - 1 else Prl(out)

    def tuple_of(self, components: Sequence[Term]) -> Term:
        out = components[-1]
        for component in reversed(components[:-1]):
            out = Pair(component, out)
        return out

    def statement(self, statement: Statement) -> Term:
        s = Var("s")
        if isinstance(statement, Loop):
            body = self.block(statement.body)
            return Lam("s", SizeVar("w"), Rec(body, self.get(s, statement.counter), s), self.state)
        value = statement.value
        if isinstance(value, Zero):
            new = ascribe(saturating_zero(self.width), self.numeral)
        elif isinstance(value, Succ):
            new = ascribe(saturating_succ(self.get(s, value.source), self.width), self.numeral)
        else:
            new = self.get(s, value.source)
        components = [new if name == statement.target else self.get(s, name) for name in self.variables]
        return Lam("s", SizeVar("w"), self.tuple_of(components), self.state)

    def block(self, statements: Sequence[Statement]) -> Term:
        """``\\s. stmt_n (... (stmt_1 s))``"""
        out: Term = Var("s")
        for statement in statements:
            out = App(self.statement(statement), out)
        return Lam("s", SizeVar("w"), out, self.state)

    def program_term(self) -> Term:
        initial = self.tuple_of(
            [Var(name) if name in self.program.params else saturating_zero(self.width) for name in self.variables]
        )
        run: Term = initial
        for statement in self.program.body:
            run = App(self.statement(statement), run)
        body: Term = App(Lam("s", SizeVar("w"), self.get(Var("s"), self.program.result), self.state), run)
        for index, name in reversed(list(enumerate(self.program.params))):
            body = Lam(name, SizeVar(f"n{index}"), body, self.numeral)
        return body


def compile_loop(program: LoopProgram, width: int) -> CompiledLoop:
    """Compile ``program`` over numerals ``0 .. width-1``; larger values saturate."""
    if width < 1:
        raise IllFormedLoop("numeral width must be positive")
    validate(program)
    compiler = _LoopCompiler(program, width)
    term = compiler.program_term()
    logger.debug("compiled %s: %d nodes at width %d", program.name, term.size, width)
    return CompiledLoop(program, term, width, compiler.numeral, compiler.state)


def width_for(program: LoopProgram, max_input: int) -> int:
    """Smallest width at which no argument vector bounded by ``max_input`` saturates.

    Loop programs are monotone in their inputs, so the run on ``max_input``
    everywhere reaches the largest register value of the whole range.
    """
    if max_input < 0:
        raise IllFormedLoop("inputs are natural numbers")
    return run_loop_direct(program, [max_input] * len(program.params)).peak + 1
