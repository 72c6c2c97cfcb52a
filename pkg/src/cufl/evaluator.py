"""带代价计量的小步归约与运行期上界校验。

策略：最左、弱（不进入 lambda 内部）、按值调用。beta 与 case 步骤的代价是被绑定变量的出现次数，
投影代价为一；``rec`` 展开本身不计费，只对它产生的应用计费。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

from . import bounds as bd
from .checker import CheckReport
from .config import EVAL_CONFIG
from .errors import FuelExhausted, StuckTerm
from .syntax import (
    App,
    Case,
    Inl,
    Inr,
    Judgement,
    Lam,
    Pair,
    Prl,
    Prr,
    Rec,
    Term,
    format_term,
    occurs,
    subst_term,
)

logger = logging.getLogger(__name__)

Path = Tuple[int, ...]


@dataclass(frozen=True)
class Step:
    term: Term
    cost: int
    rule: str
    path: Path = ()


@dataclass(frozen=True)
class StepRecord:
    rule: str
    cost: int
    path: Path

    @property
    def position(self) -> str:
        return ".".join(str(i) for i in self.path) or "root"


@dataclass
class EvalTrace:
    steps: List[StepRecord] = field(default_factory=list)
    total_cost: int = 0
    normal_form: Optional[Term] = None
    normal_depth: int = 0

    def lines(self) -> List[str]:
        return [
            f"#{index} rule={record.rule} cost={record.cost} at={record.position}"
            for index, record in enumerate(self.steps, start=1)
        ]


def _inside(step: Optional[Step], wrap, index: int) -> Optional[Step]:
    if step is None:
        return None
    return Step(wrap(step.term), step.cost, step.rule, (index,) + step.path)


def step(t: Term) -> Optional[Step]:
    """One reduction step, or ``None`` when ``t`` is a normal form."""
    match t:
        case Inl(body):
            return _inside(step(body), Inl, 0)
        case Inr(body):
            return _inside(step(body), Inr, 0)
        case Pair(left, right):
            if not left.is_value:
                return _inside(step(left), lambda e: Pair(e, right), 0)
            return _inside(step(right), lambda e: Pair(left, e), 1)
        case App(fn, arg):
            if not fn.is_value:
                return _inside(step(fn), lambda e: App(e, arg), 0)
            if not isinstance(fn, Lam):
                raise StuckTerm(f"cannot apply {format_term(fn)}")
            if not arg.is_value:
                return _inside(step(arg), lambda e: App(fn, e), 1)
            return Step(subst_term(fn.body, fn.binder, arg), occurs(fn.binder, fn.body), "eval-app")
        case Case(scrutinee, lb, left, rb, right):
            if not scrutinee.is_value:
                return _inside(step(scrutinee), lambda e: Case(e, lb, left, rb, right), 0)
            if isinstance(scrutinee, Inl):
                return Step(subst_term(left, lb, scrutinee.body), occurs(lb, left), "eval-case-left")
            if isinstance(scrutinee, Inr):
                return Step(subst_term(right, rb, scrutinee.body), occurs(rb, right), "eval-case-right")
            raise StuckTerm(f"case on {format_term(scrutinee)}")
        case Prl(body) | Prr(body):
            if isinstance(body, Pair):
                if isinstance(t, Prl):
                    return Step(body.left, 1, "eval-prl")
                return Step(body.right, 1, "eval-prr")
            if not body.is_value:
                return _inside(step(body), type(t), 0)
            raise StuckTerm(f"projection from {format_term(body)}")
        case Rec(f, k, a):
            if not f.is_value:
                return _inside(step(f), lambda e: Rec(e, k, a), 0)
            if not k.is_value:
                return _inside(step(k), lambda e: Rec(f, e, a), 1)
            if not a.is_value:
                return _inside(step(a), lambda e: Rec(f, k, e), 2)
            unrolled = a
            for _ in range(max(0, k.depth - 2)):
                unrolled = App(f, unrolled)
            return Step(unrolled, 0, "rec-unroll")
    return None


def normalize(t: Term, fuel: Optional[int] = None) -> EvalTrace:
    budget = fuel if fuel is not None else EVAL_CONFIG["fuel"]
    if budget < 1:
        raise ValueError("fuel must be positive")
    trace = EvalTrace()
    current = t
    while True:
        result = step(current)
        if result is None:
            break
        if len(trace.steps) == budget:
            trace.normal_form = current
            trace.normal_depth = current.depth
            raise FuelExhausted(f"no normal form within {budget} steps", trace)
        trace.steps.append(StepRecord(result.rule, result.cost, result.path))
        trace.total_cost += result.cost
        current = result.term
        logger.debug("%s cost=%d", result.rule, result.cost)
    trace.normal_form = current
    trace.normal_depth = current.depth
    return trace


@dataclass(frozen=True)
class VerifyReport:
    alpha_bound: int
    beta_bound: int
    measured_cost: int
    measured_depth: int

    @property
    def ok(self) -> bool:
        return self.measured_cost <= self.alpha_bound and self.measured_depth <= self.beta_bound


def verify_bounds(
    t: Term,
    report: Union[CheckReport, Judgement],
    fuel: Optional[int] = None,
    trace: Optional[EvalTrace] = None,
) -> VerifyReport:
    """Normalize a closed term and compare cost and depth with its derived bounds."""
    judgement = report.judgement if isinstance(report, CheckReport) else report
    alpha = bd.eval_bound(judgement.alpha, {})
    beta = bd.eval_bound(judgement.beta, {})
    run = trace if trace is not None else normalize(t, fuel)
    outcome = VerifyReport(alpha, beta, run.total_cost, run.normal_depth)
    if not outcome.ok:
        logger.error(
            "bound violated: cost %d (alpha %d), depth %d (beta %d)",
            run.total_cost,
            alpha,
            run.normal_depth,
            beta,
        )
    return outcome
