"""尺寸变量上的符号上界表达式。

上界把求值代价（alpha）与范式深度（beta）写成输入深度的函数，所有取值都是正整数。
这套代数支持按赋值求值、即时与延迟代换、迭代复合、放宽/精确重写表，
以及 ``lhs <= rhs`` 的半判定过程。
"""
from __future__ import annotations

import enum
import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Tuple, Union

import sympy

from .config import CHECK_CONFIG
from .errors import BoundError, NonPositive, Overflow, RewriteBudgetExceeded, UnboundSizeVar

logger = logging.getLogger(__name__)

# size-variable name -> positive integer
Valuation = Mapping[str, int]


@dataclass(frozen=True)
class SizeVar:
    name: str

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("size variable names must be nonempty")

    def __str__(self) -> str:
        return self.name


def _coerce(value: Union["BoundExpr", int]) -> "BoundExpr":
    if isinstance(value, BoundExpr):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Lit(value)
    raise TypeError(f"cannot use {value!r} as a bound expression")


class BoundExpr:
    """Base class of the bound language; instances are immutable."""

    def children(self) -> Tuple["BoundExpr", ...]:
        return ()

    def rebuild(self, children: Tuple["BoundExpr", ...]) -> "BoundExpr":
        return self

    # operator sugar so tests and the checker can write ``2 * x + 1``
    def __add__(self, other: Union["BoundExpr", int]) -> "BoundExpr":
        return Add(self, _coerce(other))

    def __radd__(self, other: Union["BoundExpr", int]) -> "BoundExpr":
        return Add(_coerce(other), self)

    def __sub__(self, other: Union["BoundExpr", int]) -> "BoundExpr":
        return Sub(self, _coerce(other))

    def __rsub__(self, other: Union["BoundExpr", int]) -> "BoundExpr":
        return Sub(_coerce(other), self)

    def __mul__(self, other: Union["BoundExpr", int]) -> "BoundExpr":
        return Mul(self, _coerce(other))

    def __rmul__(self, other: Union["BoundExpr", int]) -> "BoundExpr":
        return Mul(_coerce(other), self)

    def __pow__(self, other: Union["BoundExpr", int]) -> "BoundExpr":
        return Pow(self, _coerce(other))

    def __rpow__(self, other: Union["BoundExpr", int]) -> "BoundExpr":
        return Pow(_coerce(other), self)

    @cached_property
    def free(self) -> FrozenSet[str]:
        """Names of free size variables (Iter and Subst bind their variable)."""
        out: FrozenSet[str] = frozenset()
        for child in self.children():
            out |= child.free
        return out

    @cached_property
    def ambient(self) -> FrozenSet[str]:
        """Names a valuation must provide for evaluation to succeed."""
        out: FrozenSet[str] = frozenset()
        for child in self.children():
            out |= child.ambient
        return out

    @cached_property
    def binders(self) -> FrozenSet[str]:
        out: FrozenSet[str] = frozenset()
        for child in self.children():
            out |= child.binders
        return out

    @cached_property
    def iter_vars(self) -> FrozenSet[str]:
        out: FrozenSet[str] = frozenset()
        for child in self.children():
            out |= child.iter_vars
        return out

    @cached_property
    def size(self) -> int:
        return 1 + sum(child.size for child in self.children())

    def __str__(self) -> str:
        return format_bound(self)


@dataclass(frozen=True, eq=True, repr=True)
class Var(BoundExpr):
    var: SizeVar

    @property
    def name(self) -> str:
        return self.var.name

    @cached_property
    def free(self) -> FrozenSet[str]:
        return frozenset({self.var.name})

    @cached_property
    def ambient(self) -> FrozenSet[str]:
        return frozenset({self.var.name})


@dataclass(frozen=True)
class Lit(BoundExpr):
    value: int

    def __post_init__(self) -> None:
        if isinstance(self.value, bool) or not isinstance(self.value, int) or self.value < 1:
            raise ValueError(f"bound literals are positive integers, got {self.value!r}")


@dataclass(frozen=True)
class _Binary(BoundExpr):
    left: BoundExpr
    right: BoundExpr

    def children(self) -> Tuple[BoundExpr, ...]:
        return (self.left, self.right)

    def rebuild(self, children: Tuple[BoundExpr, ...]) -> BoundExpr:
        return type(self)(children[0], children[1])


@dataclass(frozen=True)
class Add(_Binary):
    pass


@dataclass(frozen=True)
class Sub(_Binary):
    pass


@dataclass(frozen=True)
class Mul(_Binary):
    pass


@dataclass(frozen=True)
class Max(_Binary):
    pass


@dataclass(frozen=True)
class Pow(BoundExpr):
    base: BoundExpr
    exp: BoundExpr

    def children(self) -> Tuple[BoundExpr, ...]:
        return (self.base, self.exp)

    def rebuild(self, children: Tuple[BoundExpr, ...]) -> BoundExpr:
        return Pow(children[0], children[1])


@dataclass(frozen=True)
class Iter(BoundExpr):
    """``body`` composed with itself ``count`` times on the ambient value of ``var``."""

    body: BoundExpr
    count: BoundExpr
    var: SizeVar

    def children(self) -> Tuple[BoundExpr, ...]:
        return (self.body, self.count)

    def rebuild(self, children: Tuple[BoundExpr, ...]) -> BoundExpr:
        return Iter(children[0], children[1], self.var)

    @cached_property
    def free(self) -> FrozenSet[str]:
        return (self.body.free - {self.var.name}) | self.count.free

    @cached_property
    def ambient(self) -> FrozenSet[str]:
        return (self.body.ambient - {self.var.name}) | self.count.ambient | {self.var.name}

    @cached_property
    def binders(self) -> FrozenSet[str]:
        return self.body.binders | self.count.binders | {self.var.name}

    @cached_property
    def iter_vars(self) -> FrozenSet[str]:
        return self.body.iter_vars | self.count.iter_vars | {self.var.name}


@dataclass(frozen=True)
class Subst(BoundExpr):
    """Deferred substitution: ``target`` evaluated with ``var`` bound to ``replacement``."""

    target: BoundExpr
    var: SizeVar
    replacement: BoundExpr

    def children(self) -> Tuple[BoundExpr, ...]:
        return (self.target, self.replacement)

    def rebuild(self, children: Tuple[BoundExpr, ...]) -> BoundExpr:
        return Subst(children[0], self.var, children[1])

    @cached_property
    def free(self) -> FrozenSet[str]:
        return (self.target.free - {self.var.name}) | self.replacement.free

    @cached_property
    def ambient(self) -> FrozenSet[str]:
        return (self.target.ambient - {self.var.name}) | self.replacement.ambient

    @cached_property
    def binders(self) -> FrozenSet[str]:
        return self.target.binders | self.replacement.binders | {self.var.name}


def var(name: str) -> Var:
    return Var(SizeVar(name))


def lit(value: int) -> Lit:
    return Lit(value)


ONE = Lit(1)


def _name_of(variable: Union[SizeVar, str]) -> str:
    return variable.name if isinstance(variable, SizeVar) else variable


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

class _BoundEvaluator:
    def __init__(self, max_bits: int, max_iterations: int) -> None:
        self.max_bits = max_bits
        self.max_iterations = max_iterations
        self._memo: Dict[Tuple[int, int], int] = {}
        # environments created during evaluation stay referenced so ids are stable
        self._frames: List[Dict[str, int]] = []

    def _guard(self, value: int) -> int:
        if value.bit_length() > self.max_bits:
            raise Overflow(f"bound value exceeds {self.max_bits} bits")
        return value

    def run(self, e: BoundExpr, env: Dict[str, int]) -> int:
        key = (id(e), id(env))
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        value = self._compute(e, env)
        self._memo[key] = value
        return value

    def _frame(self, env: Dict[str, int], name: str, value: int) -> Dict[str, int]:
        inner = dict(env)
        inner[name] = value
        self._frames.append(inner)
        return inner

    def _compute(self, e: BoundExpr, env: Dict[str, int]) -> int:
        match e:
            case Lit(value=value):
                return value
            case Var(var=sv):
                try:
                    return env[sv.name]
                except KeyError:
                    raise UnboundSizeVar(sv.name) from None
            case Add(left, right):
                return self._guard(self.run(left, env) + self.run(right, env))
            case Sub(left, right):
                value = self.run(left, env) - self.run(right, env)
                if value < 1:
                    raise NonPositive(f"subtraction yields {value}, bounds must stay positive")
                return value
            case Mul(left, right):
                return self._guard(self.run(left, env) * self.run(right, env))
            case Max(left, right):
                return max(self.run(left, env), self.run(right, env))
            case Pow(base, exp):
                b = self.run(base, env)
                n = self.run(exp, env)
                if b == 1:
                    return 1
                if (b.bit_length() - 1) * n > self.max_bits:
                    raise Overflow(f"{b}^{n} exceeds {self.max_bits} bits")
                return self._guard(b ** n)
            case Iter(body, count, sv):
                n = self.run(count, env)
                if n > self.max_iterations:
                    raise Overflow(f"iteration count {n} exceeds {self.max_iterations}")
                if sv.name not in env:
                    raise UnboundSizeVar(sv.name)
                current = env[sv.name]
                for _ in range(n):
                    following = self.run(body, self._frame(env, sv.name, current))
                    if following == current:
                        break
                    current = following
                return current
            case Subst(target, sv, replacement):
                value = self.run(replacement, env)
                return self.run(target, self._frame(env, sv.name, value))
        raise TypeError(f"not a bound expression: {e!r}")


def eval_bound(
    e: BoundExpr,
    val: Optional[Valuation] = None,
    *,
    max_bits: Optional[int] = None,
    max_iterations: Optional[int] = None,
) -> int:
    env: Dict[str, int] = {}
    for name, value in (val or {}).items():
        key = _name_of(name)
        if isinstance(value, bool) or not isinstance(value, int) or value < 1:
            raise NonPositive(f"size variable {key!r} must be a positive integer, got {value!r}")
        env[key] = value
    evaluator = _BoundEvaluator(
        max_bits if max_bits is not None else CHECK_CONFIG["max_bits"],
        max_iterations if max_iterations is not None else CHECK_CONFIG["max_iterations"],
    )
    return evaluator.run(e, env)


# ---------------------------------------------------------------------------
# substitution and free variables
# ---------------------------------------------------------------------------

def free_size_vars(e: BoundExpr) -> FrozenSet[SizeVar]:
    return frozenset(SizeVar(name) for name in e.free)


def _fresh(base: SizeVar, taken: FrozenSet[str]) -> SizeVar:
    index = 1
    while f"{base.name}_{index}" in taken:
        index += 1
    return SizeVar(f"{base.name}_{index}")


def substitute(target: BoundExpr, variable: Union[SizeVar, str], replacement: BoundExpr) -> BoundExpr:
    """Eager capture-avoiding substitution.

    Occurrences bound by an inner Iter/Subst of the same name stay.  A binder
    that would capture a variable of ``replacement`` is renamed first; a
    renamed Iter keeps reading its start value from the old name.
    """
    name = _name_of(variable)
    memo: Dict[int, BoundExpr] = {}
    renamed_bodies: List[BoundExpr] = []
    avoid = replacement.ambient | replacement.binders

    def go(e: BoundExpr) -> BoundExpr:
        if name not in e.free:
            return e
        hit = memo.get(id(e))
        if hit is not None:
            return hit
        match e:
            case Var():
                out: BoundExpr = replacement
            case Iter(body, count, sv) if sv.name == name:
                out = Iter(body, go(count), sv)
            case Iter(body, count, sv) if sv.name in replacement.ambient and name in body.free:
                renamed = _fresh(sv, avoid | e.ambient | e.binders)
                inner = substitute(body, sv, Var(renamed))
                renamed_bodies.append(inner)
                out = Subst(Iter(go(inner), go(count), renamed), renamed, Var(sv))
            case Iter(body, count, sv):
                out = Iter(go(body), go(count), sv)
            case Subst(inner, sv, repl) if sv.name == name:
                out = Subst(inner, sv, go(repl))
            case Subst(inner, sv, repl) if sv.name in replacement.ambient and name in inner.free:
                renamed = _fresh(sv, avoid | e.ambient | e.binders)
                inner = substitute(inner, sv, Var(renamed))
                renamed_bodies.append(inner)
                out = Subst(go(inner), renamed, go(repl))
            case Subst(inner, sv, repl):
                out = Subst(go(inner), sv, go(repl))
            case _:
                out = e.rebuild(tuple(go(child) for child in e.children()))
        memo[id(e)] = out
        return out

    return go(target)


def _inline_is_exact(target: BoundExpr, name: str, replacement: BoundExpr) -> bool:
    return name not in target.iter_vars and not (target.binders & replacement.ambient)


def instantiate(target: BoundExpr, variable: Union[SizeVar, str], replacement: BoundExpr) -> BoundExpr:
    """``target[v := replacement]`` as the inference rules use it.

    Atomic replacements are substituted eagerly; anything else becomes a
    deferred Subst node so a large replacement is shared, not copied.
    """
    name = _name_of(variable)
    if name not in target.ambient:
        return target
    if isinstance(replacement, (Var, Lit)) and _inline_is_exact(target, name, replacement):
        return substitute(target, name, replacement)
    return Subst(target, SizeVar(name), replacement)


# ---------------------------------------------------------------------------
# simplification
# ---------------------------------------------------------------------------

class Mode(enum.Enum):
    EXACT = "exact"
    LOOSEN = "loosen"


def _fits(value: int) -> bool:
    return value.bit_length() <= CHECK_CONFIG["max_bits"]


def _exact_rule(node: BoundExpr) -> BoundExpr:
    match node:
        case Add(Lit(value=a), Lit(value=b)) if _fits(a + b):
            return Lit(a + b)
        case Mul(Lit(value=a), Lit(value=b)) if _fits(a * b):
            return Lit(a * b)
        case Mul(Lit(value=1), other) | Mul(other, Lit(value=1)):
            return other
        case Pow(base, Lit(value=1)):
            return base
        case Pow(Lit(value=1), _):
            return ONE
        case Pow(Lit(value=a), Lit(value=b)) if (a.bit_length() - 1) * b <= CHECK_CONFIG["max_bits"]:
            return Lit(a ** b)
        case Sub(Lit(value=a), Lit(value=b)) if a - b >= 1:
            return Lit(a - b)
        case Max(Lit(value=a), Lit(value=b)):
            return Lit(max(a, b))
        case Max(left, right) if _dominates(right, left):
            return right
        case Max(left, right) if _dominates(left, right):
            return left
        case Iter(body, Lit(value=1), _):
            return body
        case Iter(Var(var=sv), _, bound) if sv == bound:
            return Var(bound)
        case Iter(body, count, bound):
            return _iter_closed_form(node, body, count, bound)
        case Subst(target, sv, replacement):
            if sv.name not in target.ambient:
                return target
            if _inline_is_exact(target, sv.name, replacement):
                return substitute(target, sv.name, replacement)
    return node


def _floor(e: BoundExpr) -> int:
    """Least value of ``e`` over positive valuations, or 1 when unknown."""
    match e:
        case Lit(value=value):
            return value
        case Add(left, right):
            return _floor(left) + _floor(right)
        case Mul(left, right):
            return _floor(left) * _floor(right)
        case Max(left, right):
            return max(_floor(left), _floor(right))
        case Pow(base, _):
            return _floor(base)
    return 1


def _dominates(big: BoundExpr, small: BoundExpr) -> bool:
    """``big >= small`` at every positive valuation, read off the syntax."""
    if big == small:
        return True
    if isinstance(small, Lit) and _floor(big) >= small.value:
        return True
    match big:
        case Add(left, right) | Mul(left, right) | Max(left, right):
            return _dominates(left, small) or _dominates(right, small)
        case Pow(base, _):
            return _dominates(base, small)
    return False


def _rebuild_sum(terms: List[BoundExpr]) -> BoundExpr:
    out = terms[0]
    for term in terms[1:]:
        out = Add(out, term)
    return out


def _rebuild_product(factors: List[BoundExpr]) -> BoundExpr:
    out = factors[0]
    for factor in factors[1:]:
        out = Mul(out, factor)
    return out


def _split_off(parts: List[BoundExpr], x: str) -> Optional[List[BoundExpr]]:
    """The parts other than a single ``Var(x)``, when none of them mentions ``x``."""
    hits = [i for i, part in enumerate(parts) if isinstance(part, Var) and part.name == x]
    if len(hits) != 1 or len(parts) < 2:
        return None
    rest = parts[: hits[0]] + parts[hits[0] + 1:]
    if any(x in part.ambient for part in rest):
        return None
    return rest


def _iter_closed_form(node: BoundExpr, body: BoundExpr, count: BoundExpr, bound: SizeVar) -> BoundExpr:
    x = bound.name
    match body:
        # iter{x+a}{e}{x} = x + a*e
        case Add():
            rest = _split_off(_summands(body), x)
            if rest is not None:
                return Add(Var(bound), Mul(_rebuild_sum(rest), count))
        # iter{a*x}{e}{x} = a^e * x
        case Mul():
            rest = _split_off(_factors(body), x)
            if rest is not None:
                return Mul(Pow(_rebuild_product(rest), count), Var(bound))
        # iter{x^e}{g}{x} = x^(e^g)
        case Pow(Var(var=sv), e) if sv == bound and x not in e.ambient:
            return Pow(Var(bound), Pow(e, count))
    return node


def _summands(e: BoundExpr) -> List[BoundExpr]:
    if isinstance(e, Add):
        return _summands(e.left) + _summands(e.right)
    return [e]


def _factors(e: BoundExpr) -> List[BoundExpr]:
    if isinstance(e, Mul):
        return _factors(e.left) + _factors(e.right)
    return [e]


Monomial = Tuple[int, Dict[str, BoundExpr]]


def _monomial(e: BoundExpr) -> Optional[Monomial]:
    coefficient = 1
    exponents: Dict[str, BoundExpr] = {}
    for factor in _factors(e):
        match factor:
            case Lit(value=value):
                coefficient *= value
            case Var(var=sv) if sv.name not in exponents:
                exponents[sv.name] = ONE
            case Pow(Var(var=sv), exp) if sv.name not in exponents:
                exponents[sv.name] = exp
            case _:
                return None
    return coefficient, exponents


def _exponent_leq(a: BoundExpr, b: BoundExpr) -> bool:
    if a == b:
        return True
    return isinstance(a, Lit) and isinstance(b, Lit) and a.value <= b.value


def _monomial_leq(small: Monomial, large: Monomial) -> bool:
    if small[1].keys() != large[1].keys():
        return False
    return all(_exponent_leq(small[1][name], large[1][name]) for name in small[1])


def _build_monomial(coefficient: int, exponents: Dict[str, BoundExpr]) -> BoundExpr:
    product: Optional[BoundExpr] = None
    for name in sorted(exponents):
        exp = exponents[name]
        factor = var(name) if exp == ONE else Pow(var(name), exp)
        product = factor if product is None else Mul(product, factor)
    if product is None:
        return Lit(coefficient)
    if coefficient == 1:
        return product
    return Mul(Lit(coefficient), product)


def _loosen_rule(node: BoundExpr) -> BoundExpr:
    """Merge a*x^e*y^g + b*x^f*y^h into (a+b)*x^f*y^h when e<=f, g<=h; widen iterated maxima."""
    match node:
        # iterating max(c, e) stays below iterating e + c when e is monotone
        case Iter(Max(Lit() as floor, body), count, sv) | Iter(Max(body, Lit() as floor), count, sv) if _monotone(body):
            return Iter(Add(body, floor), count, sv)
    if not isinstance(node, Add):
        return node
    terms = _summands(node)
    monomials = [_monomial(term) for term in terms]
    changed = False
    merged = True
    while merged:
        merged = False
        for i, j in itertools.combinations(range(len(terms)), 2):
            mi, mj = monomials[i], monomials[j]
            if mi is None or mj is None:
                continue
            if _monomial_leq(mi, mj):
                combined: Monomial = (mi[0] + mj[0], mj[1])
            elif _monomial_leq(mj, mi):
                combined = (mi[0] + mj[0], mi[1])
            else:
                continue
            terms[i] = _build_monomial(*combined)
            monomials[i] = combined
            del terms[j]
            del monomials[j]
            merged = changed = True
            break
    if not changed:
        return node
    result = terms[0]
    for term in terms[1:]:
        result = Add(result, term)
    return result


class _Rewriter:
    def __init__(self, mode: Mode) -> None:
        self.mode = mode
        self._memo: Dict[int, BoundExpr] = {}
        self._keep: List[BoundExpr] = []

    def visit(self, e: BoundExpr) -> BoundExpr:
        hit = self._memo.get(id(e))
        if hit is not None:
            return hit
        children = e.children()
        rewritten = tuple(self.visit(child) for child in children)
        node = e if all(a is b for a, b in zip(children, rewritten)) else e.rebuild(rewritten)
        node = _exact_rule(node)
        if self.mode is Mode.LOOSEN:
            node = _loosen_rule(node)
        self._memo[id(e)] = node
        self._keep.append(e)
        return node


def simplify(e: BoundExpr, mode: Mode = Mode.EXACT, budget: Optional[int] = None) -> BoundExpr:
    limit = budget if budget is not None else CHECK_CONFIG["rewrite_budget"]
    current = e
    for step in range(limit):
        rewritten = _Rewriter(mode).visit(current)
        if rewritten is current or rewritten == current:
            return current
        logger.debug("simplify[%s] pass %d", mode.value, step + 1)
        current = rewritten
    raise RewriteBudgetExceeded(f"no fixed point within {limit} rewrite passes")


def _try_simplify(e: BoundExpr, mode: Mode = Mode.EXACT) -> BoundExpr:
    try:
        return simplify(e, mode)
    except RewriteBudgetExceeded:
        logger.debug("simplifier budget exhausted; keeping the expression as is")
        return e


# ---------------------------------------------------------------------------
# inequality
# ---------------------------------------------------------------------------

class LeqVerdict:
    pass


@dataclass(frozen=True)
class Proven(LeqVerdict):
    pass


@dataclass(frozen=True)
class Refuted(LeqVerdict):
    witness: Mapping[str, int]


@dataclass(frozen=True)
class Unknown(LeqVerdict):
    samples_checked: int


class _NotPolynomial(Exception):
    pass


def _to_sympy(e: BoundExpr, upper: bool, pick_left: bool) -> sympy.Expr:
    match e:
        case Lit(value=value):
            return sympy.Integer(value)
        case Var(var=sv):
            return sympy.Symbol(sv.name)
        case Add(left, right):
            return _to_sympy(left, upper, pick_left) + _to_sympy(right, upper, pick_left)
        case Mul(left, right):
            return _to_sympy(left, upper, pick_left) * _to_sympy(right, upper, pick_left)
        case Pow(base, Lit(value=n)) if n <= CHECK_CONFIG["max_poly_exponent"]:
            return _to_sympy(base, upper, pick_left) ** n
        case Max(left, right) if upper:
            # max(a, b) <= a + b for positive a, b
            return _to_sympy(left, upper, pick_left) + _to_sympy(right, upper, pick_left)
        case Max(left, right):
            return _to_sympy(left if pick_left else right, upper, pick_left)
        case Sub(left, _) if upper:
            return _to_sympy(left, upper, pick_left)
    raise _NotPolynomial


def _nonnegative_on_positive_integers(expr: sympy.Expr) -> bool:
    symbols = sorted(expr.free_symbols, key=lambda s: s.name)
    shifted = sympy.expand(expr.subs({s: s + 1 for s in symbols}, simultaneous=True))
    if not shifted.free_symbols:
        return bool(shifted >= 0)
    poly = sympy.Poly(shifted, *symbols)
    return all(coefficient >= 0 for coefficient in poly.coeffs())


def _polynomial_leq(lhs: BoundExpr, rhs: BoundExpr) -> bool:
    if lhs.size + rhs.size > 2 * CHECK_CONFIG["render_limit"]:
        return False
    try:
        upper = _to_sympy(lhs, True, True)
    except _NotPolynomial:
        return False
    for pick_left in (True, False):
        try:
            lower = _to_sympy(rhs, False, pick_left)
        except _NotPolynomial:
            return False
        if _nonnegative_on_positive_integers(sympy.expand(lower - upper)):
            return True
    return False


def _closed_leq(lhs: BoundExpr, rhs: BoundExpr) -> Optional[bool]:
    try:
        return eval_bound(lhs, {}) <= eval_bound(rhs, {})
    except BoundError:
        return None


def _monotone(e: BoundExpr, depth: int = 0) -> bool:
    """Non-decreasing in every size variable: no Sub, and every Iter body grows."""
    match e:
        case Sub():
            return False
        case Iter(body, count, sv):
            return _monotone(count, depth) and _grows(body, sv, depth)
    return all(_monotone(child, depth) for child in e.children())


def _grows(body: BoundExpr, bound: SizeVar, depth: int) -> bool:
    # iterating a monotone body with x <= body is monotone in the count too
    return _monotone(body, depth) and _prove_leq(Var(bound), body, depth + 1)


def _prove_leq(lhs: BoundExpr, rhs: BoundExpr, depth: int = 0) -> bool:
    if depth > 8:
        return False
    if lhs == rhs:
        return True
    if not lhs.ambient and not rhs.ambient:
        return bool(_closed_leq(lhs, rhs))
    if isinstance(lhs, Max):
        return _prove_leq(lhs.left, rhs, depth + 1) and _prove_leq(lhs.right, rhs, depth + 1)
    if isinstance(rhs, Max) and (_prove_leq(lhs, rhs.left, depth + 1) or _prove_leq(lhs, rhs.right, depth + 1)):
        return True
    # rule (3): iter{e}{g}{x} <= iter{f}{h}{x} when e <= f and g <= h,
    # provided f is monotone and x <= f
    if isinstance(lhs, Iter) and isinstance(rhs, Iter) and lhs.var == rhs.var and _grows(rhs.body, rhs.var, depth):
        if _prove_leq(lhs.body, rhs.body, depth + 1) and _prove_leq(lhs.count, rhs.count, depth + 1):
            return True
    if isinstance(lhs, Subst) and isinstance(rhs, Subst) and lhs.var == rhs.var and _monotone(rhs.target, depth):
        if _prove_leq(lhs.target, rhs.target, depth + 1) and _prove_leq(lhs.replacement, rhs.replacement, depth + 1):
            return True
    if type(lhs) is type(rhs) and isinstance(lhs, (Add, Mul)):
        if _prove_leq(lhs.left, rhs.left, depth + 1) and _prove_leq(lhs.right, rhs.right, depth + 1):
            return True
    if _polynomial_leq(lhs, rhs):
        return True
    loosened = _try_simplify(lhs, Mode.LOOSEN)
    if loosened != lhs:
        return _prove_leq(loosened, rhs, depth + 1)
    return False


def _grid(names: List[str], grid: int) -> Iterator[Dict[str, int]]:
    for values in itertools.product(range(1, grid + 1), repeat=len(names)):
        yield dict(zip(names, values))


def leq_bounds(lhs: BoundExpr, rhs: BoundExpr, grid: Optional[int] = None) -> LeqVerdict:
    """Semi-decide ``lhs <= rhs`` at every valuation of positive naturals."""
    grid = grid if grid is not None else CHECK_CONFIG["grid"]
    left = _try_simplify(lhs)
    right = _try_simplify(rhs)
    # sampling runs on the given expressions so witnesses re-evaluate on them
    names = sorted(lhs.ambient | rhs.ambient)
    if not names:
        closed = _closed_leq(lhs, rhs)
        if closed is None:
            return Unknown(0)
        return Proven() if closed else Refuted({})
    proven = _prove_leq(left, right)
    if proven and left.size + right.size > 2 * CHECK_CONFIG["render_limit"]:
        return Proven()
    witness, checked = _worst_violation(lhs, rhs, names, grid)
    if witness is not None:
        if proven:
            logger.warning("symbolic proof of %s <= %s contradicted at %s", left, right, witness)
        return Refuted(witness)
    if proven:
        logger.debug("leq proven symbolically: %s <= %s", left, right)
        return Proven()
    logger.debug("leq unknown after %d samples", checked)
    return Unknown(checked)


def _worst_violation(
    left: BoundExpr, right: BoundExpr, names: List[str], grid: int
) -> Tuple[Optional[Dict[str, int]], int]:
    checked = 0
    witness: Optional[Dict[str, int]] = None
    worst = 0
    for point in _grid(names, grid):
        try:
            margin = eval_bound(left, point) - eval_bound(right, point)
        except BoundError:
            continue
        checked += 1
        if margin > worst:
            worst = margin
            witness = point
    return witness, checked


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _fmt(e: BoundExpr, context: int) -> str:
    match e:
        case Lit(value=value):
            text, prec = str(value), 4
        case Var(var=sv):
            text, prec = sv.name, 4
        case Add(left, right):
            text, prec = f"{_fmt(left, 1)} + {_fmt(right, 2)}", 1
        case Sub(left, right):
            text, prec = f"{_fmt(left, 1)} - {_fmt(right, 2)}", 1
        case Mul(left, right):
            text, prec = f"{_fmt(left, 2)} * {_fmt(right, 3)}", 2
        case Pow(base, exp):
            text, prec = f"{_fmt(base, 4)}^{_fmt(exp, 3)}", 3
        case Iter(body, count, sv):
            text, prec = f"iter({_fmt(body, 0)}; {_fmt(count, 0)}; {sv.name})", 4
        case Max(left, right):
            text, prec = f"max({_fmt(left, 0)}, {_fmt(right, 0)})", 4
        case Subst(target, sv, replacement):
            text, prec = f"{_fmt(target, 4)}[{sv.name} := {_fmt(replacement, 0)}]", 4
        case _:
            raise TypeError(f"not a bound expression: {e!r}")
    return f"({text})" if prec < context else text


def format_bound(e: BoundExpr) -> str:
    return _fmt(e, 0)


def render_bound(e: BoundExpr, valuation: Optional[Valuation] = None) -> str:
    """Report rendering: closed bounds print as integers, others after Exact simplification."""
    if not e.ambient or (valuation and e.ambient <= set(valuation)):
        try:
            return str(eval_bound(e, valuation or {}))
        except BoundError as exc:
            logger.debug("rendering unevaluable bound: %s", exc)
    simplified = _try_simplify(e) if e.size <= 20 * CHECK_CONFIG["render_limit"] else e
    if simplified.size > CHECK_CONFIG["render_limit"]:
        return f"<bound with {simplified.size} nodes>"
    return format_bound(simplified)
