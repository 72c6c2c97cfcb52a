"""枚举搜索：有界居民、穷举判定与一致性搜索。"""
from __future__ import annotations

import logging
from functools import lru_cache
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from ..bounds import SizeVar
from ..checker import infer
from ..config import EMULATION_CONFIG, EVAL_CONFIG
from ..errors import CuflError, UnsupportedType
from ..evaluator import normalize
from ..syntax import (
    EMPTY_CONTEXT,
    UNIT,
    App,
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
    Type,
    UnitType,
    Var,
    format_type,
)

logger = logging.getLogger(__name__)

TRUE = Inl(UNIT)


# ---------------------------------------------------------------------------
# first-order inhabitants
# ---------------------------------------------------------------------------

def enumerate_inhabitants(ty: Type, max_depth: int) -> Iterator[Term]:
    """Normal forms of ``ty`` with depth at most ``max_depth``, ``inl`` before ``inr``."""
    if max_depth < 1:
        return
    match ty:
        case UnitType():
            yield UNIT
        case Sum(left, right):
            for value in enumerate_inhabitants(left, max_depth - 1):
                yield Inl(value)
            for value in enumerate_inhabitants(right, max_depth - 1):
                yield Inr(value)
        case Prod(left, right):
            rights = list(enumerate_inhabitants(right, max_depth - 1))
            for first in enumerate_inhabitants(left, max_depth - 1):
                for second in rights:
                    yield Pair(first, second)
        case _:
            raise UnsupportedType(f"cannot enumerate values of {format_type(ty)}")


@lru_cache(maxsize=None)
def count_inhabitants(ty: Type, max_depth: int) -> int:
    if max_depth < 1:
        return 0
    match ty:
        case UnitType():
            return 1
        case Sum(left, right):
            return count_inhabitants(left, max_depth - 1) + count_inhabitants(right, max_depth - 1)
        case Prod(left, right):
            return count_inhabitants(left, max_depth - 1) * count_inhabitants(right, max_depth - 1)
    raise UnsupportedType(f"cannot count values of {format_type(ty)}")


def find_counterexample(
    pred: Term,
    domain: Type,
    max_depth: Optional[int] = None,
    fuel: Optional[int] = None,
) -> Optional[Term]:
    """First enumerated input on which ``pred`` does not normalize to ``inl unit``."""
    depth = max_depth if max_depth is not None else EMULATION_CONFIG["enumerate_depth"]
    budget = fuel if fuel is not None else EVAL_CONFIG["fuel"]
    checked = 0
    for value in enumerate_inhabitants(domain, depth):
        checked += 1
        result = normalize(App(pred, value), budget).normal_form
        if result != TRUE:
            logger.info("counterexample after %d inputs: %s", checked, value)
            return value
    logger.info("predicate holds on all %d inputs", checked)
    return None


def decide_proposition(
    pred: Term,
    domain: Type,
    max_depth: Optional[int] = None,
    fuel: Optional[int] = None,
) -> bool:
    return find_counterexample(pred, domain, max_depth, fuel) is None


# ---------------------------------------------------------------------------
# raw term enumeration
# ---------------------------------------------------------------------------

def binder_name(level: int) -> str:
    return f"x{level}"


def size_var_name(level: int) -> SizeVar:
    return SizeVar(f"v{level}")


class TermEnumerator:
    """All terms of a given node count over binders ``x0 .. x{scope-1}``.

    Binders are named by nesting level, so two enumerated terms are distinct
    exactly when they differ up to alpha-renaming.
    """

    def __init__(self) -> None:
        self._memo: Dict[Tuple[int, int], List[Term]] = {}

    def terms(self, size: int, scope: int = 0) -> List[Term]:
        key = (size, scope)
        cached = self._memo.get(key)
        if cached is None:
            cached = list(self._build(size, scope))
            self._memo[key] = cached
        return cached

    def _splits(self, total: int, parts: int) -> Iterator[Tuple[int, ...]]:
        if parts == 1:
            if total >= 1:
                yield (total,)
            return
        for first in range(1, total - parts + 2):
            for rest in self._splits(total - first, parts - 1):
                yield (first,) + rest

    def _build(self, size: int, scope: int) -> Iterator[Term]:
        if size < 1:
            return
        if size == 1:
            yield UNIT
            for level in range(scope):
                yield Var(binder_name(level))
            return
        inner = size - 1
        unary: Tuple[Callable[[Term], Term], ...] = (Inl, Inr, Prl, Prr)
        for wrap in unary:
            for body in self.terms(inner, scope):
                yield wrap(body)
        for body in self.terms(inner, scope + 1):
            yield Lam(binder_name(scope), size_var_name(scope), body)
        for a, b in self._splits(inner, 2):
            for left in self.terms(a, scope):
                for right in self.terms(b, scope):
                    yield Pair(left, right)
                    yield App(left, right)
        for a, b, c in self._splits(inner, 3):
            for f in self.terms(a, scope):
                for k in self.terms(b, scope):
                    for start in self.terms(c, scope):
                        yield Rec(f, k, start)
            binder = binder_name(scope)
            for scrutinee in self.terms(a, scope):
                for left in self.terms(b, scope + 1):
                    for right in self.terms(c, scope + 1):
                        yield Case(scrutinee, binder, left, binder, right)


def enumerate_terms(size: int, enumerator: Optional[TermEnumerator] = None) -> List[Term]:
    """Closed terms with exactly ``size`` AST nodes, typable or not."""
    return (enumerator or TermEnumerator()).terms(size, 0)


def search_for_bottom(
    max_size: Optional[int] = None,
    progress: Optional[Callable[[int, int], None]] = None,
) -> Optional[Term]:
    """First closed term up to ``max_size`` nodes whose inferred type is ``Bot``."""
    limit = max_size if max_size is not None else EMULATION_CONFIG["consistency_max_size"]
    enumerator = TermEnumerator()
    typed = 0
    for size in range(1, limit + 1):
        candidates = enumerate_terms(size, enumerator)
        for term in candidates:
            try:
                report = infer(EMPTY_CONTEXT, term)
            except CuflError:
                continue
            typed += 1
            if isinstance(report.judgement.ty, Bottom):
                logger.error("closed term of type Bot: %s", term)
                return term
        if progress is not None:
            progress(size, len(candidates))
        logger.info("size %d: %d candidates, %d typable so far", size, len(candidates), typed)
    return None
