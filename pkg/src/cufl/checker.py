"""携带上界的类型推断与检查。

``infer`` 按十条推断规则对项做结构递归，合成 ``ctx |-[alpha; beta] term : type``。
期望类型自上而下传递，注入、lambda 与 case 分支可以对照注解检查。
``check`` 在每个包含步骤上用 ``leq_bounds`` 比较推断出的判断与声明的判断。
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from . import bounds as bd
from .bounds import BoundExpr, SizeVar
from .config import CHECK_CONFIG
from .errors import (
    BoundError,
    BoundViolation,
    NonArrowApplied,
    PeelError,
    RecShapeError,
    TypeCheckError,
    TypeMismatch,
    UnboundVariable,
)
from .syntax import (
    BOTTOM,
    UNIT_TYPE,
    App,
    Arrow,
    Bottom,
    Case,
    Context,
    Inl,
    Inr,
    Judgement,
    Lam,
    Pair,
    Prl,
    Prod,
    Prr,
    Rec,
    Sum,
    Term,
    TVar,
    Type,
    UnitVal,
    Var,
    format_type,
    occurs,
    skeleton_equal,
    types_equal,
)

logger = logging.getLogger(__name__)

DEFAULT_DOMAIN = TVar("A")


class Status(str, enum.Enum):
    VALID = "Valid"
    VALID_WITH_UNKNOWN_LEQ = "ValidWithUnknownLeq"
    INVALID = "Invalid"


@dataclass(frozen=True)
class RuleStep:
    rule: str
    term: Term
    alpha: BoundExpr
    beta: BoundExpr
    premises: Tuple[int, ...] = ()


@dataclass
class CheckReport:
    judgement: Judgement
    status: Status
    rule_trace: List[RuleStep] = field(default_factory=list)
    reason: Optional[str] = None
    violation: Optional[BoundViolation] = None
    unknown_leqs: int = 0

    @property
    def ok(self) -> bool:
        return self.status is not Status.INVALID

    def raise_if_invalid(self) -> None:
        if self.violation is not None:
            raise self.violation
        if self.status is Status.INVALID:
            raise TypeCheckError(self.reason or "judgement is invalid")


@dataclass(frozen=True)
class _Derived:
    ty: Type
    alpha: BoundExpr
    beta: BoundExpr
    index: int


def _max(a: BoundExpr, b: BoundExpr) -> BoundExpr:
    return a if a is b or a == b else bd.Max(a, b)


def _plus(a: BoundExpr, b: BoundExpr) -> BoundExpr:
    if isinstance(a, bd.Lit) and isinstance(b, bd.Lit):
        return bd.Lit(a.value + b.value)
    return bd.Add(a, b)


def _succ(a: BoundExpr) -> BoundExpr:
    return _plus(a, bd.ONE)


def peel(beta: BoundExpr) -> BoundExpr:
    """Depth bound of the component under one constructor of depth ``beta``.

    Literals and syntactic ``e + n`` shapes lose one; a max peels both sides.
    Any other symbolic bound is kept as is: the component is no deeper than
    the whole, and ``beta - 1`` would fail to evaluate on branches that can
    never be taken.
    """
    match beta:
        case bd.Lit(value=n) if n >= 2:
            return bd.Lit(n - 1)
        case bd.Lit():
            raise PeelError(f"depth bound {beta.value} leaves no room for a constructor")
        case bd.Add(inner, bd.Lit(value=1)):
            return inner
        case bd.Add(inner, bd.Lit(value=n)):
            return bd.Add(inner, bd.Lit(n - 1))
        case bd.Max(left, right):
            return _max(_peel_or_keep(left), _peel_or_keep(right))
    if not beta.ambient:
        try:
            value = bd.eval_bound(beta, {})
        except BoundError as exc:
            raise PeelError(f"cannot peel depth bound: {exc}") from exc
        if value < 2:
            raise PeelError(f"depth bound {value} leaves no room for a constructor")
        return bd.Lit(value - 1)
    return beta


def _peel_or_keep(beta: BoundExpr) -> BoundExpr:
    # inside a max one side may be too shallow for the constructor; that side is not taken
    try:
        return peel(beta)
    except PeelError:
        return beta


def _size_vars_in_scope(ctx: Context) -> FrozenSet[str]:
    names: FrozenSet[str] = frozenset()
    for entry in ctx.entries:
        names |= entry.beta.ambient
    return names


def _fresh_size_var(base: SizeVar, taken: FrozenSet[str]) -> SizeVar:
    index = 1
    while f"{base.name}_{index}" in taken:
        index += 1
    return SizeVar(f"{base.name}_{index}")


def instantiate_type(ty: Type, variable: SizeVar, replacement: BoundExpr) -> Type:
    """Apply ``[variable := replacement]`` to the bounds carried by arrows in ``ty``."""
    match ty:
        case Sum(left, right):
            return Sum(instantiate_type(left, variable, replacement), instantiate_type(right, variable, replacement))
        case Prod(left, right):
            return Prod(instantiate_type(left, variable, replacement), instantiate_type(right, variable, replacement))
        case Arrow(domain, size_var, alpha, beta, codomain):
            domain = instantiate_type(domain, variable, replacement)
            codomain = instantiate_type(codomain, variable, replacement)
            if size_var == variable:
                return Arrow(domain, size_var, alpha, beta, codomain)
            if size_var.name in replacement.ambient:
                renamed = _fresh_size_var(size_var, replacement.ambient | alpha.ambient | beta.ambient)
                alpha = bd.substitute(alpha, size_var, bd.Var(renamed))
                beta = bd.substitute(beta, size_var, bd.Var(renamed))
                size_var = renamed
            return Arrow(
                domain,
                size_var,
                bd.instantiate(alpha, variable, replacement),
                bd.instantiate(beta, variable, replacement),
                codomain,
            )
    return ty


def _accounted(x: str, t: Term) -> int:
    """Occurrences of ``x`` the alpha bound of ``t`` charges for: one branch of each case."""
    memo: Dict[int, int] = {}

    def go(e: Term) -> int:
        if x not in e.free:
            return 0
        hit = memo.get(id(e))
        if hit is not None:
            return hit
        match e:
            case Var():
                count = 1
            case Case(scrutinee, lb, left, rb, right):
                count = go(scrutinee) + max(0 if lb == x else go(left), 0 if rb == x else go(right))
            case _:
                count = sum(go(child) for child in e.children())
        memo[id(e)] = count
        return count

    return go(t)


def _excess(x: str, t: Term) -> int:
    return max(0, occurs(x, t) - _accounted(x, t))


def _surcharge(alpha: BoundExpr, excess: int) -> BoundExpr:
    return _plus(alpha, bd.Lit(excess)) if excess else alpha


def _structural_depth(t: Term, ctx: Context) -> BoundExpr:
    """Depth bound of ``t`` itself when its free variables stand for values of their declared depth."""
    def go(e: Term, local: FrozenSet[str]) -> Tuple[int, Dict[BoundExpr, int]]:
        match e:
            case Var(name) if name in local:
                return 1, {}
            case Var(name):
                entry = ctx.lookup(name)
                return (1, {}) if entry is None else (0, {entry.beta: 0})
            case UnitVal():
                return 1, {}
            case Lam(binder=binder, body=body):
                parts = [go(body, local | {binder})]
            case Case(scrutinee, lb, left, rb, right):
                parts = [go(scrutinee, local), go(left, local | {lb}), go(right, local | {rb})]
            case _:
                parts = [go(child, local) for child in e.children()]
        constant = 0
        merged: Dict[BoundExpr, int] = {}
        for c, symbolic in parts:
            constant = max(constant, c)
            for key, offset in symbolic.items():
                merged[key] = max(merged.get(key, 0), offset)
        return constant + 1, {key: offset + 1 for key, offset in merged.items()}

    constant, symbolic = go(t, frozenset())
    result: Optional[BoundExpr] = bd.Lit(constant) if constant else None
    for key in sorted(symbolic, key=bd.format_bound):
        term = key if symbolic[key] == 0 else bd.Add(key, bd.Lit(symbolic[key]))
        result = term if result is None else _max(result, term)
    return result if result is not None else bd.ONE


class _Inference:
    def __init__(self, grid: int) -> None:
        self.grid = grid
        self.trace: List[RuleStep] = []
        self.unknown = 0

    def _emit(self, rule: str, term: Term, ty: Type, alpha: BoundExpr, beta: BoundExpr, *premises: _Derived) -> _Derived:
        self.trace.append(RuleStep(rule, term, alpha, beta, tuple(p.index for p in premises)))
        return _Derived(ty, alpha, beta, len(self.trace) - 1)

    # subsumption ---------------------------------------------------------
    def conforms(self, actual: Type, wanted: Type) -> Optional[BoundViolation]:
        """``actual`` may stand where ``wanted`` is expected.

        ``Bot`` stands for any type; arrow payloads compare by leq.
        """
        if actual is wanted or types_equal(actual, wanted) or isinstance(actual, Bottom):
            return None
        match actual, wanted:
            case (Sum(), Sum()) | (Prod(), Prod()) if type(actual) is type(wanted):
                return self.conforms(actual.left, wanted.left) or self.conforms(actual.right, wanted.right)
            case Arrow(), Arrow() if skeleton_equal(actual.domain, wanted.domain):
                alpha = bd.substitute(actual.alpha, actual.size_var, bd.Var(wanted.size_var))
                beta = bd.substitute(actual.beta, actual.size_var, bd.Var(wanted.size_var))
                for which, mine, theirs in (("alpha", alpha, wanted.alpha), ("beta", beta, wanted.beta)):
                    violation = self.leq(mine, theirs, f"arrow {which}")
                    if violation is not None:
                        return violation
                return self.conforms(actual.codomain, wanted.codomain)
        raise TypeMismatch(f"expected {format_type(wanted)}, got {format_type(actual)}")

    def leq(self, lhs: BoundExpr, rhs: BoundExpr, what: str) -> Optional[BoundViolation]:
        verdict = bd.leq_bounds(lhs, rhs, self.grid)
        if isinstance(verdict, bd.Refuted):
            return BoundViolation(
                f"{what} bound {bd.render_bound(lhs)} exceeds {bd.render_bound(rhs)}",
                dict(verdict.witness),
            )
        if isinstance(verdict, bd.Unknown):
            self.unknown += 1
            logger.warning(
                "undecided %s bound: %s <= %s after %d samples",
                what,
                bd.render_bound(lhs),
                bd.render_bound(rhs),
                verdict.samples_checked,
            )
        return None

    def require(self, actual: Type, wanted: Type, error: type = TypeMismatch) -> None:
        try:
            violation = self.conforms(actual, wanted)
        except TypeMismatch as exc:
            raise error(str(exc)) from exc
        if violation is not None:
            raise error(str(violation))

    # rules ---------------------------------------------------------------
    def infer(
        self,
        ctx: Context,
        t: Term,
        expected: Optional[Type] = None,
        domain_hint: Optional[Type] = None,
        codomain_hint: Optional[Type] = None,
    ) -> _Derived:
        match t:
            case Var(name):
                entry = ctx.lookup(name)
                if entry is None:
                    raise UnboundVariable(name)
                return self._emit("var", t, entry.ty, bd.ONE, entry.beta)

            case UnitVal():
                return self._emit("unit", t, UNIT_TYPE, bd.ONE, bd.ONE)

            case Inl(body) | Inr(body):
                is_left = isinstance(t, Inl)
                side = None
                if isinstance(expected, Sum):
                    side = expected.left if is_left else expected.right
                inner = self.infer(ctx, body, side)
                if is_left:
                    ty = Sum(inner.ty, expected.right if isinstance(expected, Sum) else BOTTOM)
                else:
                    ty = Sum(expected.left if isinstance(expected, Sum) else BOTTOM, inner.ty)
                return self._emit("inj", t, ty, _succ(inner.alpha), _succ(inner.beta), inner)

            case Pair(left, right):
                hints = (expected.left, expected.right) if isinstance(expected, Prod) else (None, None)
                first = self.infer(ctx, left, hints[0])
                second = self.infer(ctx, right, hints[1])
                return self._emit(
                    "pair",
                    t,
                    Prod(first.ty, second.ty),
                    _succ(_plus(first.alpha, second.alpha)),
                    _succ(_max(first.beta, second.beta)),
                    first,
                    second,
                )

            case Prl(body) | Prr(body):
                inner = self.infer(ctx, body)
                if not isinstance(inner.ty, Prod):
                    raise TypeMismatch(f"projection from non-product {format_type(inner.ty)}")
                ty = inner.ty.left if isinstance(t, Prl) else inner.ty.right
                return self._emit("prj", t, ty, _succ(inner.alpha), peel(inner.beta), inner)

            case Case():
                return self._case(ctx, t, expected)

            case Lam():
                return self._abs(ctx, t, expected, domain_hint, codomain_hint)

            case App(fn, arg):
                if isinstance(fn, Lam):
                    argument = self.infer(ctx, arg, fn.annotation)
                    function = self.infer(ctx, fn, None, domain_hint=argument.ty, codomain_hint=expected)
                else:
                    function = self.infer(ctx, fn)
                    wanted = function.ty.domain if isinstance(function.ty, Arrow) else None
                    argument = self.infer(ctx, arg, wanted)
                arrow = function.ty
                if not isinstance(arrow, Arrow):
                    raise NonArrowApplied(f"cannot apply a term of type {format_type(arrow)}")
                self.require(argument.ty, arrow.domain)
                v = arrow.size_var
                alpha = _plus(_plus(function.alpha, bd.instantiate(arrow.alpha, v, argument.beta)), argument.alpha)
                beta = bd.instantiate(arrow.beta, v, argument.beta)
                ty = instantiate_type(arrow.codomain, v, argument.beta)
                return self._emit("app", t, ty, alpha, beta, function, argument)

            case Rec(f, k, a):
                return self._rec(ctx, t, f, k, a, expected)

        raise TypeError(f"not a term: {t!r}")

    def _case(self, ctx: Context, t: Case, expected: Optional[Type]) -> _Derived:
        scrutinee = self.infer(ctx, t.scrutinee)
        if not isinstance(scrutinee.ty, Sum):
            raise TypeMismatch(f"case on non-sum {format_type(scrutinee.ty)}")
        inner_beta = peel(scrutinee.beta)
        left_ctx = ctx.extend(t.left_binder, scrutinee.ty.left, inner_beta)
        right_ctx = ctx.extend(t.right_binder, scrutinee.ty.right, inner_beta)

        mark = len(self.trace)
        left = self.infer(left_ctx, t.left, expected)
        right = self.infer(right_ctx, t.right, expected or left.ty)
        try:
            ty = self._join(left.ty, right.ty)
        except TypeMismatch:
            if expected is not None:
                raise
            del self.trace[mark:]
            left = self.infer(left_ctx, t.left, right.ty)
            right = self.infer(right_ctx, t.right, left.ty)
            ty = self._join(left.ty, right.ty)

        left_cost = _surcharge(left.alpha, _excess(t.left_binder, t.left))
        right_cost = _surcharge(right.alpha, _excess(t.right_binder, t.right))
        alpha = _succ(_plus(scrutinee.alpha, _max(left_cost, right_cost)))
        beta = _max(left.beta, right.beta)
        return self._emit("case", t, ty, alpha, beta, scrutinee, left, right)

    def _join(self, a: Type, b: Type) -> Type:
        """Least type both branch types conform to: ``Bot`` yields, arrow payloads join by max."""
        if a is b or types_equal(a, b) or isinstance(b, Bottom):
            return a
        if isinstance(a, Bottom):
            return b
        match a, b:
            case Sum(), Sum():
                return Sum(self._join(a.left, b.left), self._join(a.right, b.right))
            case Prod(), Prod():
                return Prod(self._join(a.left, b.left), self._join(a.right, b.right))
            case Arrow(), Arrow() if skeleton_equal(a.domain, b.domain):
                alpha = bd.substitute(b.alpha, b.size_var, bd.Var(a.size_var))
                beta = bd.substitute(b.beta, b.size_var, bd.Var(a.size_var))
                return Arrow(
                    a.domain, a.size_var, _max(a.alpha, alpha), _max(a.beta, beta), self._join(a.codomain, b.codomain)
                )
        raise TypeMismatch(f"case branches disagree: {format_type(a)} vs {format_type(b)}")

    def _abs(
        self,
        ctx: Context,
        t: Lam,
        expected: Optional[Type],
        domain_hint: Optional[Type],
        codomain_hint: Optional[Type],
    ) -> _Derived:
        if t.annotation is not None:
            domain = t.annotation
        elif isinstance(expected, Arrow):
            domain = expected.domain
        elif domain_hint is not None:
            domain = domain_hint
        else:
            domain = DEFAULT_DOMAIN

        v = t.size_var
        in_scope = _size_vars_in_scope(ctx)
        if v.name in in_scope:
            v = _fresh_size_var(v, in_scope)
        body_ctx = ctx.extend(t.binder, domain, bd.Var(v))
        body = self.infer(body_ctx, t.body, expected.codomain if isinstance(expected, Arrow) else codomain_hint)

        payload_alpha = _surcharge(body.alpha, _excess(t.binder, t.body))
        alpha = _succ(bd.instantiate(payload_alpha, v, bd.ONE))
        beta = _succ(bd.instantiate(body.beta, v, bd.ONE))
        if not t.body.is_value:
            beta = _max(beta, _structural_depth(t, ctx))
        ty = Arrow(domain, v, payload_alpha, body.beta, body.ty)
        return self._emit("abs", t, ty, alpha, beta, body)

    def _rec(self, ctx: Context, t: Rec, f: Term, k: Term, a: Term, expected: Optional[Type]) -> _Derived:
        start = self.infer(ctx, a, expected)
        step = self.infer(ctx, f, None, domain_hint=start.ty, codomain_hint=expected or start.ty)
        arrow = step.ty
        if not isinstance(arrow, Arrow):
            raise RecShapeError(f"rec expects a function, got {format_type(arrow)}")
        self.require(start.ty, arrow.domain, RecShapeError)
        self.require(arrow.codomain, arrow.domain, RecShapeError)
        carrier = self._join(start.ty, arrow.codomain)
        count = self.infer(ctx, k)

        v = arrow.size_var
        if v.name in count.beta.ambient:
            renamed = _fresh_size_var(v, count.beta.ambient | arrow.alpha.ambient | arrow.beta.ambient)
            arrow = Arrow(
                arrow.domain,
                renamed,
                bd.substitute(arrow.alpha, v, bd.Var(renamed)),
                bd.substitute(arrow.beta, v, bd.Var(renamed)),
                arrow.codomain,
            )
            v = renamed
        # depth after n unrolled applications, starting from the depth of a
        final_depth = bd.Subst(bd.Iter(_max(bd.Var(v), arrow.beta), count.beta, v), v, start.beta)
        per_step = _plus(step.alpha, bd.instantiate(arrow.alpha, v, final_depth))
        alpha = _plus(_plus(_plus(step.alpha, count.alpha), start.alpha), bd.Mul(count.beta, per_step))
        return self._emit("rec", t, carrier, alpha, final_depth, step, count, start)


def _report(ctx: Context, t: Term, derived: _Derived, engine: _Inference) -> CheckReport:
    status = Status.VALID_WITH_UNKNOWN_LEQ if engine.unknown else Status.VALID
    return CheckReport(
        judgement=Judgement(ctx, derived.alpha, derived.beta, t, derived.ty),
        status=status,
        rule_trace=engine.trace,
        unknown_leqs=engine.unknown,
    )


def infer(
    ctx: Context,
    t: Term,
    expected: Optional[Type] = None,
    grid: Optional[int] = None,
) -> CheckReport:
    engine = _Inference(grid if grid is not None else CHECK_CONFIG["grid"])
    derived = engine.infer(ctx, t, expected)
    logger.debug("inferred %s : %s", t, format_type(derived.ty))
    return _report(ctx, t, derived, engine)


def check_claim(
    ctx: Context,
    t: Term,
    ty: Optional[Type],
    alpha: Optional[BoundExpr] = None,
    beta: Optional[BoundExpr] = None,
    grid: Optional[int] = None,
) -> CheckReport:
    """Infer ``t`` against ``ty`` and subsume to the claimed bounds when given."""
    engine = _Inference(grid if grid is not None else CHECK_CONFIG["grid"])
    derived = engine.infer(ctx, t, ty)
    report = _report(ctx, t, derived, engine)

    try:
        violation = engine.conforms(derived.ty, ty) if ty is not None else None
    except TypeMismatch as exc:
        report.status = Status.INVALID
        report.reason = str(exc)
        return report
    if violation is None and alpha is not None:
        violation = engine.leq(derived.alpha, alpha, "alpha")
    if violation is None and beta is not None:
        violation = engine.leq(derived.beta, beta, "beta")

    report.unknown_leqs = engine.unknown
    if violation is not None:
        report.status = Status.INVALID
        report.reason = str(violation)
        report.violation = violation
    elif engine.unknown:
        report.status = Status.VALID_WITH_UNKNOWN_LEQ
    if ty is not None or alpha is not None or beta is not None:
        report.judgement = Judgement(
            ctx,
            alpha if alpha is not None else derived.alpha,
            beta if beta is not None else derived.beta,
            t,
            ty if ty is not None else derived.ty,
        )
    return report


def check(ctx: Context, t: Term, claimed: Judgement, grid: Optional[int] = None) -> CheckReport:
    return check_claim(ctx, t, claimed.ty, claimed.alpha, claimed.beta, grid)


@dataclass(frozen=True)
class Resolution:
    alpha: int
    beta: int
    limit: Optional[int] = None

    @property
    def within_limit(self) -> bool:
        return self.limit is None or self.alpha <= self.limit


def resolve_bounds(judgement: Judgement, valuation: Optional[bd.Valuation] = None, limit: Optional[int] = None) -> Resolution:
    """Numeric alpha and beta of a judgement once every size variable is fixed."""
    values = dict(valuation or {})
    return Resolution(bd.eval_bound(judgement.alpha, values), bd.eval_bound(judgement.beta, values), limit)
