"""有界图灵机：规格文件、参照模拟器与 CUFL 编码。

状态与符号都是平衡的二元和类型，检查其一只需对数深度的 case 级联。纸带是一对有界列表，
读写头所在格位于右侧列表顶端；整次运行即 ``rec step n init``。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from ..bounds import BoundExpr, SizeVar
from ..checker import CheckReport, infer
from ..config import EMULATION_CONFIG
from ..encoder import encode_nat
from ..errors import AlphabetTooLarge, IllFormedMachine, StepLimitExceeded
from ..syntax import (
    EMPTY_CONTEXT,
    UNIT,
    UNIT_TYPE,
    App,
    Case,
    Inl,
    Inr,
    Lam,
    Pair,
    Prl,
    Prod,
    Prr,
    Rec,
    Sum,
    Term,
    Type,
    UnitVal,
    Var,
    ascribe,
)

logger = logging.getLogger(__name__)

LEFT, RIGHT = "L", "R"


# ---------------------------------------------------------------------------
# machines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TMSpec:
    states: Tuple[str, ...]
    alphabet: Tuple[str, ...]
    transitions: Dict[Tuple[str, str], Tuple[str, str, str]]
    start: str
    halting: frozenset
    name: str = "tm"
    stops: frozenset = frozenset()

    @property
    def blank(self) -> str:
        return self.alphabet[0]

    def halts(self, state: str, symbol: str) -> bool:
        return state in self.halting or (state, symbol) in self.stops

    def validate(self) -> "TMSpec":
        if not self.alphabet:
            raise AlphabetTooLarge(f"{self.name}: empty alphabet")
        if self.start not in self.states:
            raise IllFormedMachine(f"{self.name}: unknown start state {self.start!r}")
        unknown = set(self.halting) - set(self.states)
        if unknown:
            raise IllFormedMachine(f"{self.name}: unknown halting states {sorted(unknown)}")
        for (state, symbol), (target, write, move) in self.transitions.items():
            if state not in self.states or target not in self.states:
                raise IllFormedMachine(f"{self.name}: transition mentions an unknown state")
            if symbol not in self.alphabet or write not in self.alphabet:
                raise IllFormedMachine(f"{self.name}: transition mentions an unknown symbol")
            if move not in (LEFT, RIGHT):
                raise IllFormedMachine(f"{self.name}: move must be L or R, got {move!r}")
        for state, symbol in self.stops:
            if state not in self.states or symbol not in self.alphabet:
                raise IllFormedMachine(f"{self.name}: halt entry mentions an unknown state or symbol")
            if (state, symbol) in self.transitions:
                raise IllFormedMachine(f"{self.name}: ({state}, {symbol}) both moves and halts")
        for state in self.states:
            if state in self.halting:
                continue
            for symbol in self.alphabet:
                if (state, symbol) not in self.transitions and (state, symbol) not in self.stops:
                    raise IllFormedMachine(f"{self.name}: no transition for ({state}, {symbol})")
        return self


def parse_tm(text: str, name: str = "tm") -> TMSpec:
    """Line format: ``states:``, ``alphabet:``, ``start:``, ``halt:`` then ``s0 1 -> s1 0 R``.

    ``s0 _ -> halt`` stops the machine in ``s0`` when it reads ``_``.
    """
    headers: Dict[str, List[str]] = {"states": [], "alphabet": [], "start": [], "halt": []}
    transitions: Dict[Tuple[str, str], Tuple[str, str, str]] = {}
    stops: Set[Tuple[str, str]] = set()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" in line and "->" not in line:
            key, _, rest = line.partition(":")
            key = key.strip()
            if key not in headers:
                raise IllFormedMachine(f"{name}: unknown header {key!r}", number, 1)
            headers[key].extend(rest.split())
            continue
        lhs, arrow, rhs = line.partition("->")
        source, target = lhs.split(), rhs.split()
        if not arrow or len(source) != 2 or (target != ["halt"] and len(target) != 3):
            raise IllFormedMachine(f"{name}: malformed transition {line!r}", number, 1)
        key = (source[0], source[1])
        if key in transitions or key in stops:
            raise IllFormedMachine(f"{name}: duplicate transition for {key}", number, 1)
        if target == ["halt"]:
            stops.add(key)
            continue
        transitions[key] = (target[0], target[1], target[2].upper())
    if len(headers["start"]) != 1:
        raise IllFormedMachine(f"{name}: exactly one start state is required")
    spec = TMSpec(
        states=tuple(headers["states"]),
        alphabet=tuple(headers["alphabet"]),
        transitions=transitions,
        start=headers["start"][0],
        halting=frozenset(headers["halt"]),
        name=name,
        stops=frozenset(stops),
    )
    return spec.validate()


def load_tm(path: Union[str, Path]) -> TMSpec:
    path = Path(path)
    return parse_tm(path.read_text(encoding="utf-8"), name=path.stem)


@dataclass(frozen=True)
class TapeConfig:
    """``left`` holds the cells left of the head, nearest first; ``right[0]`` is the head cell."""

    left: Tuple[str, ...]
    right: Tuple[str, ...]
    state: str

    def normalized(self, blank: str) -> "TapeConfig":
        left = list(self.left)
        while left and left[-1] == blank:
            left.pop()
        right = list(self.right)
        while len(right) > 1 and right[-1] == blank:
            right.pop()
        return TapeConfig(tuple(left), tuple(right or [blank]), self.state)

    def tape(self, blank: str) -> str:
        cells = list(reversed(self.left)) + list(self.right)
        return "".join(cells).strip(blank)


def initial_config(tm: TMSpec, word: Sequence[str]) -> TapeConfig:
    unknown = [symbol for symbol in word if symbol not in tm.alphabet]
    if unknown:
        raise IllFormedMachine(f"{tm.name}: input symbols {unknown} are not in the alphabet")
    return TapeConfig((), tuple(word) or (tm.blank,), tm.start)


def run_tm_direct(tm: TMSpec, word: Sequence[str], max_steps: Optional[int] = None) -> Tuple[TapeConfig, int]:
    limit = max_steps if max_steps is not None else EMULATION_CONFIG["tm_max_steps"]
    config = initial_config(tm, word)
    steps = 0
    while not tm.halts(config.state, config.right[0]):
        if steps == limit:
            raise StepLimitExceeded(f"{tm.name}: no halting state within {limit} steps", config)
        target, write, move = tm.transitions[(config.state, config.right[0])]
        rest = config.right[1:]
        if move == RIGHT:
            config = TapeConfig((write,) + config.left, rest or (tm.blank,), target)
        else:
            under = config.left[0] if config.left else tm.blank
            config = TapeConfig(config.left[1:], (under, write) + rest, target)
        steps += 1
    logger.debug("%s halted in %s after %d steps", tm.name, config.state, steps)
    return config, steps


# ---------------------------------------------------------------------------
# balanced finite sets
# ---------------------------------------------------------------------------

def balanced_type(n: int) -> Type:
    if n < 1:
        raise AlphabetTooLarge("cannot encode an empty set")
    if n == 1:
        return UNIT_TYPE
    half = (n + 1) // 2
    return Sum(balanced_type(half), balanced_type(n - half))


def encode_index(i: int, n: int) -> Term:
    if not 0 <= i < n:
        raise ValueError(f"index {i} outside 0..{n - 1}")
    if n == 1:
        return UNIT
    half = (n + 1) // 2
    return Inl(encode_index(i, half)) if i < half else Inr(encode_index(i - half, n - half))


def decode_index(t: Term, n: int) -> int:
    offset = 0
    while n > 1:
        half = (n + 1) // 2
        if isinstance(t, Inl):
            n = half
        elif isinstance(t, Inr):
            offset += half
            n -= half
        else:
            raise IllFormedMachine(f"not a balanced-sum value: {t}")
        t = t.body
    if not isinstance(t, UnitVal):
        raise IllFormedMachine(f"not a balanced-sum value: {t}")
    return offset


def dispatch(scrutinee: Term, n: int, leaf: Callable[[int], Term], stem: str, offset: int = 0, level: int = 0) -> Term:
    """Case cascade selecting ``leaf(i)`` for the encoded index ``i``."""
    if n == 1:
        return leaf(offset)
    half = (n + 1) // 2
    binder = f"{stem}{level}"
    return Case(
        scrutinee,
        binder,
        dispatch(Var(binder), half, leaf, stem, offset, level + 1),
        binder,
        dispatch(Var(binder), n - half, leaf, stem, offset + half, level + 1),
    )


def log2_ceil(n: int) -> int:
    return max(1, (n - 1).bit_length())


# ---------------------------------------------------------------------------
# bounded lists
# ---------------------------------------------------------------------------

def list_type(j: int, element: Type) -> Type:
    out: Type = UNIT_TYPE
    for _ in range(j):
        out = Sum(UNIT_TYPE, Prod(element, out))
    return out


def nil(j: int) -> Term:
    return UNIT if j == 0 else Inl(UNIT)


def encode_list(items: Sequence[Term], j: int) -> Term:
    if len(items) > j:
        raise ValueError(f"{len(items)} items do not fit a list of capacity {j}")
    out = nil(j - len(items))
    for item in reversed(items):
        out = Inr(Pair(item, out))
    return out


def decode_list(t: Term) -> List[Term]:
    items: List[Term] = []
    while isinstance(t, Inr) and isinstance(t.body, Pair):
        items.append(t.body.left)
        t = t.body.right
    if not (isinstance(t, UnitVal) or (isinstance(t, Inl) and isinstance(t.body, UnitVal))):
        raise IllFormedMachine(f"not a bounded list: {t}")
    return items


def truncate(e: Term, j: int) -> Term:
    """``List_{j+1} -> List_j``; drops the last cell of a full list."""
    if j == 0:
        return UNIT
    return Case(e, "nil_", Inl(UNIT), "cell", Inr(Pair(Prl(Var("cell")), truncate(Prr(Var("cell")), j - 1))))


def extend(e: Term, j: int) -> Term:
    """``List_{j-1} -> List_j``."""
    if j == 1:
        return Inl(UNIT)
    return Case(e, "nil_", Inl(UNIT), "cell", Inr(Pair(Prl(Var("cell")), extend(Prr(Var("cell")), j - 1))))


# ---------------------------------------------------------------------------
# compiler
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CompiledTM:
    tm: TMSpec
    term: Term
    capacity: int
    step_bound: int
    config_type: Type
    initial: TapeConfig

    @cached_property
    def report(self) -> CheckReport:
        return infer(EMPTY_CONTEXT, self.term, self.config_type)

    @property
    def alpha(self) -> BoundExpr:
        return self.report.judgement.alpha

    def decode(self, t: Term) -> TapeConfig:
        return decode_config(t, self.tm)


class _TMCompiler:
    def __init__(self, tm: TMSpec, capacity: int) -> None:
        self.tm = tm
        self.capacity = capacity
        self.state_count = len(tm.states)
        self.symbol_count = len(tm.alphabet)
        self.state_type = balanced_type(self.state_count)
        self.symbol_type = balanced_type(self.symbol_count)
        self.list_type = list_type(capacity, self.symbol_type)
        self.config_type = Prod(self.state_type, Prod(self.list_type, self.list_type))
        self.move_type = Sum(UNIT_TYPE, UNIT_TYPE)
        self.action_type = Sum(UNIT_TYPE, Prod(self.state_type, Prod(self.symbol_type, self.move_type)))

    def state(self, name: str) -> Term:
        return encode_index(self.tm.states.index(name), self.state_count)

    def symbol(self, name: str) -> Term:
        return encode_index(self.tm.alphabet.index(name), self.symbol_count)

    # tape operations ------------------------------------------------------
    def cons(self, head: Term, rest: Term) -> Term:
        return ascribe(Inr(Pair(head, truncate(rest, self.capacity - 1))), self.list_type)

    def tail(self, cells: Term) -> Term:
        body = Case(cells, "nil_", Inl(UNIT), "cell", extend(Prr(Var("cell")), self.capacity))
        return ascribe(body, self.list_type)

    def head(self, cells: Term) -> Term:
        body = Case(cells, "nil_", self.symbol(self.tm.blank), "cell", Prl(Var("cell")))
        return ascribe(body, self.symbol_type)

    # one machine step -----------------------------------------------------
    def action(self, state_index: int, symbol_index: int) -> Term:
        state, symbol = self.tm.states[state_index], self.tm.alphabet[symbol_index]
        if self.tm.halts(state, symbol):
            return Inl(UNIT)
        target, write, move = self.tm.transitions[(state, symbol)]
        direction = Inl(UNIT) if move == LEFT else Inr(UNIT)
        return Inr(Pair(self.state(target), Pair(self.symbol(write), direction)))

    def lookup(self, state: Term, symbol: Term) -> Term:
        def by_state(q: int) -> Term:
            if self.tm.states[q] in self.tm.halting:
                return self.action(q, 0)
            return dispatch(symbol, self.symbol_count, lambda s: self.action(q, s), "sy")

        return ascribe(dispatch(state, self.state_count, by_state, "st"), self.action_type)

    def apply(self, c: Term, a: Term) -> Term:
        left, right = Prl(Prr(c)), Prr(Prr(c))
        target, write = Prl(a), Prl(Prr(a))
        move_left = Pair(target, Pair(self.tail(left), self.cons(self.head(left), self.cons(write, self.tail(right)))))
        move_right = Pair(target, Pair(self.cons(write, left), self.tail(right)))
        moved = Case(Prr(Prr(a)), "mv", move_left, "mv", move_right)
        return Case(Var("act"), "halt", c, "a", moved)

    def step_function(self) -> Term:
        c = Var("c")
        read = self.head(Prr(Prr(c)))
        decide = App(Lam("h", SizeVar("y"), self.lookup(Prl(c), Var("h")), self.symbol_type), read)
        body = App(Lam("act", SizeVar("z"), self.apply(c, Var("a")), self.action_type), decide)
        return Lam("c", SizeVar("w"), body, self.config_type)

    def initial(self, config: TapeConfig) -> Term:
        cells = Pair(
            encode_list([self.symbol(s) for s in config.left], self.capacity),
            encode_list([self.symbol(s) for s in config.right], self.capacity),
        )
        return ascribe(Pair(self.state(config.state), cells), self.config_type)


def compile_tm(tm: TMSpec, word: Sequence[str], step_bound: int) -> CompiledTM:
    """``rec step (encode_nat step_bound) init`` for ``tm`` started on ``word``."""
    if step_bound < 1:
        raise ValueError("step_bound must be positive")
    tm.validate()
    config = initial_config(tm, word)
    capacity = len(word) + step_bound + 1
    compiler = _TMCompiler(tm, capacity)
    term = Rec(compiler.step_function(), encode_nat(step_bound), compiler.initial(config))
    logger.debug("compiled %s on %r: %d nodes, capacity %d", tm.name, "".join(word), term.size, capacity)
    return CompiledTM(tm, term, capacity, step_bound, compiler.config_type, config)


def decode_config(t: Term, tm: TMSpec) -> TapeConfig:
    """Read a normalized configuration term back into a :class:`TapeConfig`."""
    if not (isinstance(t, Pair) and isinstance(t.right, Pair)):
        raise IllFormedMachine(f"not a machine configuration: {t}")
    state = tm.states[decode_index(t.left, len(tm.states))]
    left = [tm.alphabet[decode_index(cell, len(tm.alphabet))] for cell in decode_list(t.right.left)]
    right = [tm.alphabet[decode_index(cell, len(tm.alphabet))] for cell in decode_list(t.right.right)]
    return TapeConfig(tuple(left), tuple(right) or (tm.blank,), state)


# ---------------------------------------------------------------------------
# cost shape
# ---------------------------------------------------------------------------

def step_weight(tm: TMSpec) -> int:
    """Per-step examination depth: symbol lookup plus state lookup."""
    return log2_ceil(len(tm.alphabet)) + log2_ceil(len(tm.states))


@dataclass(frozen=True)
class CostFit:
    slope: float
    intercept: float
    residual: float

    def predict(self, x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        return self.slope * np.asarray(x, dtype=float) + self.intercept


def fit_linear_cost(features: Sequence[float], costs: Sequence[float]) -> CostFit:
    """Least-squares ``cost ~ slope * feature + intercept``."""
    x = np.asarray(features, dtype=float)
    y = np.asarray(costs, dtype=float)
    if x.shape != y.shape or x.size < 2:
        raise ValueError("need at least two (feature, cost) pairs of equal length")
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    residual = float(np.max(np.abs(design @ np.array([slope, intercept]) - y)))
    return CostFit(float(slope), float(intercept), residual)
