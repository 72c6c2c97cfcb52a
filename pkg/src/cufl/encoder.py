"""自然数、上界、类型与证明项的自编码，结果仍是 CUFL 数据。

每个引用都是由 ``unit``、注入与序对构成的一阶项；绑定变量换成以数码书写的 de Bruijn 下标。

注入路径（``l`` = inl，``r`` = inr，由外向内）：

    bounds  Var lll  Lit llr  Sub lrl.l  Max lrl.r  Add lrr
            Mul rll  Pow rlr  Iter rrl   Subst rrr
    types   Sum ll   Prod lr  Arrow rl   Unit rr.unit
            Bot rr.(inl unit)  TVar rr.(inr name-bits)
    terms   Var llll  unit llrl  inl llrr  inr lrll  prl lrlr  prr lrrl
            pair lrrr  app rlll  abs rllr  rec rlrl  case rlrr

abs 的载荷是 ``((项下标, 尺寸下标), (注解, 体))``；无注解记作 ``inl unit``，
有注解记作 ``inr`` 加类型引用，注解只看得到外层的尺寸绑定。
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Tuple

from . import bounds as bd
from .bounds import BoundExpr
from .errors import MalformedNumeral, UnboundSizeVar, UnboundVariable
from .syntax import (
    UNIT,
    UNIT_TYPE,
    App,
    Arrow,
    Bottom,
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
    TVar,
    Type,
    UnitType,
    UnitVal,
    Var,
)

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# naturals
# ---------------------------------------------------------------------------

ZERO = Inl(UNIT)


def encode_nat(n: int) -> Term:
    if n < 0:
        raise ValueError(f"numerals are nonnegative, got {n}")
    out: Term = ZERO
    for _ in range(n):
        out = Inr(out)
    return out


def decode_nat(t: Term) -> int:
    count = 0
    current = t
    while isinstance(current, Inr):
        count += 1
        current = current.body
    if not (isinstance(current, Inl) and isinstance(current.body, UnitVal)):
        raise MalformedNumeral(f"not a numeral: expected inr...(inl unit), found {current}")
    return count


def unfold_nat_type(beta: int) -> Type:
    """``Unit + (Unit + ... (Unit + Unit))`` with ``beta`` sums; holds numerals 0..beta-1."""
    if beta < 1:
        raise ValueError("Nat types are indexed by positive integers")
    out: Type = UNIT_TYPE
    for _ in range(beta):
        out = Sum(UNIT_TYPE, out)
    return out


# ---------------------------------------------------------------------------
# de Bruijn indices
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeBruijnMap:
    """Binder names, innermost last; the innermost binder has index 1."""

    binders: Tuple[str, ...] = ()

    @classmethod
    def of(cls, *outer_to_inner: str) -> "DeBruijnMap":
        return cls(tuple(outer_to_inner))

    def push(self, name: str) -> "DeBruijnMap":
        return DeBruijnMap(self.binders + (name,))

    def index(self, name: str) -> int:
        for offset, binder in enumerate(reversed(self.binders), start=1):
            if binder == name:
                return offset
        raise KeyError(name)

    def __contains__(self, name: object) -> bool:
        return name in self.binders


EMPTY_MAP = DeBruijnMap()


def _inject(path: str, payload: Term) -> Term:
    out = payload
    for side in reversed(path):
        out = Inl(out) if side == "l" else Inr(out)
    return out


def _bits(name: str) -> Iterable[int]:
    for byte in name.encode("utf-8"):
        for shift in range(7, -1, -1):
            yield (byte >> shift) & 1


def _bit_list(name: str) -> Term:
    out: Term = Inl(UNIT)
    for bit in reversed(list(_bits(name))):
        out = Inr(Pair(Inr(UNIT) if bit else Inl(UNIT), out))
    return out


# ---------------------------------------------------------------------------
# quotation
# ---------------------------------------------------------------------------

def quote_bound(e: BoundExpr, env: DeBruijnMap = EMPTY_MAP) -> Term:
    match e:
        case bd.Var(var=sv):
            if sv.name not in env:
                raise UnboundSizeVar(sv.name)
            return _inject("lll", encode_nat(env.index(sv.name)))
        case bd.Lit(value=value):
            return _inject("llr", encode_nat(value))
        case bd.Sub(left, right):
            return _inject("lrll", Pair(quote_bound(left, env), quote_bound(right, env)))
        case bd.Max(left, right):
            return _inject("lrlr", Pair(quote_bound(left, env), quote_bound(right, env)))
        case bd.Add(left, right):
            return _inject("lrr", Pair(quote_bound(left, env), quote_bound(right, env)))
        case bd.Mul(left, right):
            return _inject("rll", Pair(quote_bound(left, env), quote_bound(right, env)))
        case bd.Pow(base, exp):
            return _inject("rlr", Pair(quote_bound(base, env), quote_bound(exp, env)))
        case bd.Iter(body, count, sv):
            return _inject("rrl", Pair(quote_bound(body, env.push(sv.name)), quote_bound(count, env)))
        case bd.Subst(target, sv, replacement):
            return _inject("rrr", Pair(quote_bound(target, env.push(sv.name)), quote_bound(replacement, env)))
    raise TypeError(f"not a bound expression: {e!r}")


def quote_type(t: Type, env: DeBruijnMap = EMPTY_MAP) -> Term:
    match t:
        case Sum(left, right):
            return _inject("ll", Pair(quote_type(left, env), quote_type(right, env)))
        case Prod(left, right):
            return _inject("lr", Pair(quote_type(left, env), quote_type(right, env)))
        case Arrow(domain, size_var, alpha, beta, codomain):
            inner = env.push(size_var.name)
            payload = Pair(
                quote_type(domain, env),
                Pair(quote_type(codomain, env), Pair(quote_bound(alpha, inner), quote_bound(beta, inner))),
            )
            return _inject("rl", payload)
        case UnitType():
            return _inject("rr", UNIT)
        case Bottom():
            return _inject("rr", Inl(UNIT))
        case TVar(name):
            return _inject("rr", Inr(_bit_list(name)))
    raise TypeError(f"not a type: {t!r}")


def quote_term(e: Term, env: DeBruijnMap = EMPTY_MAP, sizes: DeBruijnMap = EMPTY_MAP) -> Term:
    """Quote a term; ``sizes`` indexes the size binders of enclosing lambdas."""
    match e:
        case Var(name):
            if name not in env:
                raise UnboundVariable(name)
            return _inject("llll", encode_nat(env.index(name)))
        case UnitVal():
            return _inject("llrl", UNIT)
        case Inl(body):
            return _inject("llrr", quote_term(body, env, sizes))
        case Inr(body):
            return _inject("lrll", quote_term(body, env, sizes))
        case Prl(body):
            return _inject("lrlr", quote_term(body, env, sizes))
        case Prr(body):
            return _inject("lrrl", quote_term(body, env, sizes))
        case Pair(left, right):
            return _inject("lrrr", Pair(quote_term(left, env, sizes), quote_term(right, env, sizes)))
        case App(fn, arg):
            return _inject("rlll", Pair(quote_term(fn, env, sizes), quote_term(arg, env, sizes)))
        case Lam(binder, size_var, body, annotation):
            inner, inner_sizes = env.push(binder), sizes.push(size_var.name)
            indices = Pair(encode_nat(inner.index(binder)), encode_nat(inner_sizes.index(size_var.name)))
            # the annotation sees the enclosing size binders only
            domain = Inl(UNIT) if annotation is None else Inr(quote_type(annotation, sizes))
            return _inject("rllr", Pair(indices, Pair(domain, quote_term(body, inner, inner_sizes))))
        case Rec(f, k, a):
            head = Pair(quote_term(f, env, sizes), quote_term(k, env, sizes))
            return _inject("rlrl", Pair(head, quote_term(a, env, sizes)))
        case Case(scrutinee, lb, left, rb, right):
            branches = Pair(quote_term(left, env.push(lb), sizes), quote_term(right, env.push(rb), sizes))
            return _inject("rlrr", Pair(quote_term(scrutinee, env, sizes), branches))
    raise TypeError(f"not a term: {e!r}")
