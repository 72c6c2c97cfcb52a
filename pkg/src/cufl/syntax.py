"""CUFL 的抽象语法：类型、证明项、上下文与判断。

另含规则用到的结构度量（深度、出现次数、自由变量）、避免捕获的代换、alpha 等价与具体语法打印。
解析见 :mod:`cufl.parser`。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Optional, Set, Tuple

from . import bounds as bd
from .bounds import BoundExpr, SizeVar
from .errors import RewriteBudgetExceeded

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

class Type:
    def __str__(self) -> str:
        return format_type(self)


@dataclass(frozen=True)
class TVar(Type):
    name: str


@dataclass(frozen=True)
class Sum(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class Prod(Type):
    left: Type
    right: Type


@dataclass(frozen=True)
class Arrow(Type):
    """``domain ->[size_var; alpha; beta] codomain``; size_var scopes over alpha and beta."""

    domain: Type
    size_var: SizeVar
    alpha: BoundExpr
    beta: BoundExpr
    codomain: Type


@dataclass(frozen=True)
class Bottom(Type):
    pass


@dataclass(frozen=True)
class UnitType(Type):
    pass


UNIT_TYPE = UnitType()
BOTTOM = Bottom()


# ---------------------------------------------------------------------------
# terms
# ---------------------------------------------------------------------------

class Term:
    def children(self) -> Tuple["Term", ...]:
        return ()

    def rebuild(self, children: Tuple["Term", ...]) -> "Term":
        return self

    @cached_property
    def free(self) -> FrozenSet[str]:
        out: FrozenSet[str] = frozenset()
        for child in self.children():
            out |= child.free
        return out

    @cached_property
    def depth(self) -> int:
        return 1 + max((child.depth for child in self.children()), default=0)

    @cached_property
    def size(self) -> int:
        return 1 + sum(child.size for child in self.children())

    @cached_property
    def is_value(self) -> bool:
        """Normal under weak reduction: no redex outside lambda bodies."""
        return False

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True)
class Var(Term):
    name: str

    @cached_property
    def free(self) -> FrozenSet[str]:
        return frozenset({self.name})

    @cached_property
    def is_value(self) -> bool:
        return True


@dataclass(frozen=True)
class UnitVal(Term):
    @cached_property
    def is_value(self) -> bool:
        return True


UNIT = UnitVal()


@dataclass(frozen=True)
class Lam(Term):
    binder: str
    size_var: SizeVar
    body: Term
    annotation: Optional[Type] = field(default=None, compare=False)

    def children(self) -> Tuple[Term, ...]:
        return (self.body,)

    def rebuild(self, children: Tuple[Term, ...]) -> Term:
        return Lam(self.binder, self.size_var, children[0], self.annotation)

    @cached_property
    def free(self) -> FrozenSet[str]:
        return self.body.free - {self.binder}

    @cached_property
    def is_value(self) -> bool:
        return True


@dataclass(frozen=True)
class _Unary(Term):
    body: Term

    def children(self) -> Tuple[Term, ...]:
        return (self.body,)

    def rebuild(self, children: Tuple[Term, ...]) -> Term:
        return type(self)(children[0])


@dataclass(frozen=True)
class Inl(_Unary):
    @cached_property
    def is_value(self) -> bool:
        return self.body.is_value


@dataclass(frozen=True)
class Inr(_Unary):
    @cached_property
    def is_value(self) -> bool:
        return self.body.is_value


@dataclass(frozen=True)
class Prl(_Unary):
    pass


@dataclass(frozen=True)
class Prr(_Unary):
    pass


@dataclass(frozen=True)
class Pair(Term):
    left: Term
    right: Term

    def children(self) -> Tuple[Term, ...]:
        return (self.left, self.right)

    def rebuild(self, children: Tuple[Term, ...]) -> Term:
        return Pair(children[0], children[1])

    @cached_property
    def is_value(self) -> bool:
        return self.left.is_value and self.right.is_value


@dataclass(frozen=True)
class App(Term):
    fn: Term
    arg: Term

    def children(self) -> Tuple[Term, ...]:
        return (self.fn, self.arg)

    def rebuild(self, children: Tuple[Term, ...]) -> Term:
        return App(children[0], children[1])


@dataclass(frozen=True)
class Case(Term):
    scrutinee: Term
    left_binder: str
    left: Term
    right_binder: str
    right: Term

    def children(self) -> Tuple[Term, ...]:
        return (self.scrutinee, self.left, self.right)

    def rebuild(self, children: Tuple[Term, ...]) -> Term:
        return Case(children[0], self.left_binder, children[1], self.right_binder, children[2])

    @cached_property
    def free(self) -> FrozenSet[str]:
        return (
            self.scrutinee.free
            | (self.left.free - {self.left_binder})
            | (self.right.free - {self.right_binder})
        )


@dataclass(frozen=True)
class Rec(Term):
    f: Term
    k: Term
    a: Term

    def children(self) -> Tuple[Term, ...]:
        return (self.f, self.k, self.a)

    def rebuild(self, children: Tuple[Term, ...]) -> Term:
        return Rec(children[0], children[1], children[2])


def app(fn: Term, *args: Term) -> Term:
    out = fn
    for arg in args:
        out = App(out, arg)
    return out


def ascribe(t: Term, ty: Type, binder: str = "it") -> Term:
    """`(\\it^z : ty. it) t`: pins the type inferred for `t`."""
    return App(Lam(binder, SizeVar("z"), Var(binder), ty), t)


# ---------------------------------------------------------------------------
# contexts and judgements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContextEntry:
    name: str
    ty: Type
    beta: BoundExpr


@dataclass(frozen=True)
class Context:
    entries: Tuple[ContextEntry, ...] = ()

    def extend(self, name: str, ty: Type, beta: BoundExpr) -> "Context":
        kept = tuple(entry for entry in self.entries if entry.name != name)
        return Context(kept + (ContextEntry(name, ty, beta),))

    def lookup(self, name: str) -> Optional[ContextEntry]:
        for entry in reversed(self.entries):
            if entry.name == name:
                return entry
        return None

    @property
    def names(self) -> FrozenSet[str]:
        return frozenset(entry.name for entry in self.entries)

    def __str__(self) -> str:
        return ", ".join(f"{e.name} : {format_type(e.ty)} @ {bd.format_bound(e.beta)}" for e in self.entries)


EMPTY_CONTEXT = Context()


@dataclass(frozen=True)
class Judgement:
    ctx: Context
    alpha: BoundExpr
    beta: BoundExpr
    term: Term
    ty: Type

    def __str__(self) -> str:
        return (
            f"{self.ctx} |-[{bd.format_bound(self.alpha)}; {bd.format_bound(self.beta)}] "
            f"{format_term(self.term)} : {format_type(self.ty)}"
        )


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def depth(t: Term) -> int:
    return t.depth


def free_vars(t: Term) -> Set[str]:
    return set(t.free)


def occurs(x: str, t: Term) -> int:
    """Number of free occurrences of ``x`` in ``t``."""
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
            case Lam(body=body):
                count = go(body)
            case Case(scrutinee, lb, left, rb, right):
                count = go(scrutinee) + (0 if lb == x else go(left)) + (0 if rb == x else go(right))
            case _:
                count = sum(go(child) for child in e.children())
        memo[id(e)] = count
        return count

    return go(t)


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    taken = set(avoid)
    stem = base.rstrip("0123456789_") or base
    index = 1
    while f"{stem}_{index}" in taken:
        index += 1
    return f"{stem}_{index}"


def subst_term(t: Term, x: str, v: Term) -> Term:
    """Capture-avoiding ``t[x := v]``; binders that would capture are renamed."""
    memo: Dict[int, Term] = {}

    def under(binder: str, body: Term) -> Tuple[str, Term]:
        if binder == x:
            return binder, body
        if binder in v.free and x in body.free:
            renamed = fresh_name(binder, v.free | body.free | {x})
            body = subst_term(body, binder, Var(renamed))
            binder = renamed
        return binder, go(body)

    def go(e: Term) -> Term:
        if x not in e.free:
            return e
        hit = memo.get(id(e))
        if hit is not None:
            return hit
        match e:
            case Var():
                out: Term = v
            case Lam(binder, size_var, body, annotation):
                binder, body = under(binder, body)
                out = Lam(binder, size_var, body, annotation)
            case Case(scrutinee, lb, left, rb, right):
                lb, left = under(lb, left)
                rb, right = under(rb, right)
                out = Case(go(scrutinee), lb, left, rb, right)
            case _:
                out = e.rebuild(tuple(go(child) for child in e.children()))
        memo[id(e)] = out
        return out

    return go(t)


# ---------------------------------------------------------------------------
# equivalence
# ---------------------------------------------------------------------------

def alpha_equal(a: Term, b: Term) -> bool:
    """Equality up to renaming of term and size binders; lambda annotations must agree."""
    return _alpha(a, b, {}, {}, {}, {}, 0)


def _alpha(
    a: Term,
    b: Term,
    la: Dict[str, int],
    lb: Dict[str, int],
    sa: Dict[str, int],
    sb: Dict[str, int],
    level: int,
) -> bool:
    if a is b and not la and not lb and not sa and not sb:
        return True
    if type(a) is not type(b):
        return False
    match a:
        case Var(name):
            ia, ib = la.get(name), lb.get(b.name)
            if ia is None and ib is None:
                return name == b.name
            return ia == ib
        case Lam(binder=binder, size_var=sv, body=body, annotation=annotation):
            if (annotation is None) != (b.annotation is None):
                return False
            if annotation is not None and _canonical(annotation, sa, level) != _canonical(b.annotation, sb, level):
                return False
            return _alpha(
                body,
                b.body,
                {**la, binder: level},
                {**lb, b.binder: level},
                {**sa, sv.name: level},
                {**sb, b.size_var.name: level},
                level + 1,
            )
        case Case(scrutinee, lbind, left, rbind, right):
            return (
                _alpha(scrutinee, b.scrutinee, la, lb, sa, sb, level)
                and _alpha(left, b.left, {**la, lbind: level}, {**lb, b.left_binder: level}, sa, sb, level + 1)
                and _alpha(right, b.right, {**la, rbind: level}, {**lb, b.right_binder: level}, sa, sb, level + 1)
            )
    return all(_alpha(x, y, la, lb, sa, sb, level) for x, y in zip(a.children(), b.children()))


def _canonical(ty: Type, sizes: Dict[str, int], level: int) -> Type:
    """``ty`` with every bound size variable renamed after the level of its binder."""
    match ty:
        case Sum(left, right):
            return Sum(_canonical(left, sizes, level), _canonical(right, sizes, level))
        case Prod(left, right):
            return Prod(_canonical(left, sizes, level), _canonical(right, sizes, level))
        case Arrow(domain, size_var, alpha, beta, codomain):
            inner = {**sizes, size_var.name: level}
            return Arrow(
                _canonical(domain, sizes, level),
                SizeVar(f"#{level}"),
                _level_names(alpha, inner),
                _level_names(beta, inner),
                _canonical(codomain, sizes, level),
            )
    return ty


def _level_names(e: BoundExpr, sizes: Dict[str, int]) -> BoundExpr:
    for name, level in sizes.items():
        e = bd.substitute(e, name, bd.Var(SizeVar(f"#{level}")))
    return e


def bounds_equal(a: BoundExpr, b: BoundExpr) -> bool:
    if a is b or a == b:
        return True
    try:
        return bd.simplify(a) == bd.simplify(b)
    except RewriteBudgetExceeded:
        return False


def types_equal(s: Type, t: Type) -> bool:
    """Structural equality; arrow size binders are compared up to renaming."""
    if s is t:
        return True
    match s, t:
        case (Sum(), Sum()) | (Prod(), Prod()):
            if type(s) is not type(t):
                return False
            return types_equal(s.left, t.left) and types_equal(s.right, t.right)
        case Arrow(), Arrow():
            alpha = bd.substitute(t.alpha, t.size_var, bd.Var(s.size_var))
            beta = bd.substitute(t.beta, t.size_var, bd.Var(s.size_var))
            return (
                types_equal(s.domain, t.domain)
                and types_equal(s.codomain, t.codomain)
                and bounds_equal(s.alpha, alpha)
                and bounds_equal(s.beta, beta)
            )
    return s == t


def skeleton_equal(s: Type, t: Type) -> bool:
    """Type equality that ignores the bounds carried by arrows."""
    match s, t:
        case (Sum(), Sum()) | (Prod(), Prod()):
            if type(s) is not type(t):
                return False
            return skeleton_equal(s.left, t.left) and skeleton_equal(s.right, t.right)
        case Arrow(), Arrow():
            return skeleton_equal(s.domain, t.domain) and skeleton_equal(s.codomain, t.codomain)
    return s == t


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

# term levels: 0 binder forms, 1 application, 2 prefix operators, 3 atoms
_PREFIX = {Inl: "inl", Inr: "inr", Prl: "prl", Prr: "prr"}


def _term(t: Term, context: int) -> str:
    match t:
        case Var(name):
            text, level = name, 3
        case UnitVal():
            text, level = "unit", 3
        case Pair(left, right):
            text, level = f"({_term(left, 0)}, {_term(right, 0)})", 3
        case Inl(body) | Inr(body) | Prl(body) | Prr(body):
            text, level = f"{_PREFIX[type(t)]} {_term(body, 2)}", 2
        case App(fn, arg):
            text, level = f"{_term(fn, 1)} {_term(arg, 3)}", 1
        case Lam(binder, size_var, body, annotation):
            head = f"\\{binder}^{size_var.name}"
            if annotation is not None:
                head += f" : {format_type(annotation, simplified=False)}"
            text, level = f"{head}. {_term(body, 0)}", 0
        case Case(scrutinee, lb, left, rb, right):
            text = f"case {_term(scrutinee, 1)} of inl {lb} => {_term(left, 1)} | inr {rb} => {_term(right, 0)}"
            level = 0
        case Rec(f, k, a):
            text, level = f"rec {_term(f, 3)} {_term(k, 3)} {_term(a, 3)}", 0
        case _:
            raise TypeError(f"not a term: {t!r}")
    return f"({text})" if level < context else text


def format_term(t: Term) -> str:
    return _term(t, 0)


def _shown(e: BoundExpr, simplified: bool) -> str:
    if simplified:
        try:
            e = bd.simplify(e)
        except RewriteBudgetExceeded:
            pass
    return bd.format_bound(e)


# type levels: 0 arrow, 1 sum, 2 product, 3 atoms
def _type(t: Type, context: int, simplified: bool = True) -> str:
    match t:
        case UnitType():
            text, level = "Unit", 3
        case Bottom():
            text, level = "Bot", 3
        case TVar(name):
            text, level = name, 3
        case Prod(left, right):
            text, level = f"{_type(left, 3, simplified)} * {_type(right, 2, simplified)}", 2
        case Sum(left, right):
            text, level = f"{_type(left, 2, simplified)} + {_type(right, 1, simplified)}", 1
        case Arrow(domain, size_var, alpha, beta, codomain):
            text = (
                f"{_type(domain, 1, simplified)} ->[{size_var.name}; {_shown(alpha, simplified)}; "
                f"{_shown(beta, simplified)}] {_type(codomain, 0, simplified)}"
            )
            level = 0
        case _:
            raise TypeError(f"not a type: {t!r}")
    return f"({text})" if level < context else text


def format_type(t: Type, simplified: bool = True) -> str:
    """Concrete syntax of ``t``; arrow bounds print after exact simplification unless ``simplified`` is off."""
    return _type(t, 0, simplified)
