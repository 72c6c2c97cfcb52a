"""上界、一阶类型与封闭良类型项的 Hypothesis 生成器。"""
from __future__ import annotations

from hypothesis import strategies as st
from hypothesis.strategies import DrawFn, composite

from cufl import bounds as bd
from cufl.bounds import SizeVar
from cufl.encoder import encode_nat
from cufl.syntax import (
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
    UnitType,
    Var,
    ascribe,
)

SIZE_VARS = ("x", "y")


def bound_exprs(max_leaves: int = 6) -> st.SearchStrategy[bd.BoundExpr]:
    """Sub-free bounds over ``x`` and ``y``."""
    leaves = st.one_of(
        st.integers(min_value=1, max_value=4).map(bd.Lit),
        st.sampled_from(SIZE_VARS).map(bd.var),
    )

    def extend(inner: st.SearchStrategy[bd.BoundExpr]) -> st.SearchStrategy[bd.BoundExpr]:
        return st.one_of(
            st.builds(bd.Add, inner, inner),
            st.builds(bd.Mul, inner, inner),
            st.builds(bd.Max, inner, inner),
            st.builds(bd.Pow, inner, st.integers(min_value=1, max_value=3).map(bd.Lit)),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


valuations = st.fixed_dictionaries(
    {name: st.integers(min_value=1, max_value=4) for name in SIZE_VARS}
)

BINDER = SizeVar("z")


def binding_bound_exprs(max_leaves: int = 6) -> st.SearchStrategy[bd.BoundExpr]:
    """Bounds over ``x``, ``y`` and ``z`` with Sub, and Iter/Subst binding ``z``."""
    leaves = st.one_of(
        st.integers(min_value=1, max_value=3).map(bd.Lit),
        st.sampled_from(SIZE_VARS + (BINDER.name,)).map(bd.var),
    )
    counts = st.integers(min_value=1, max_value=3).map(bd.Lit)

    def extend(inner: st.SearchStrategy[bd.BoundExpr]) -> st.SearchStrategy[bd.BoundExpr]:
        return st.one_of(
            st.builds(bd.Add, inner, inner),
            st.builds(bd.Sub, inner, inner),
            st.builds(bd.Mul, inner, inner),
            st.builds(bd.Max, inner, inner),
            st.builds(bd.Iter, inner, counts, st.just(BINDER)),
            st.builds(bd.Subst, inner, st.just(BINDER), inner),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


binding_valuations = st.fixed_dictionaries(
    {name: st.integers(min_value=1, max_value=4) for name in SIZE_VARS + (BINDER.name,)}
)


def first_order_types(max_leaves: int = 4) -> st.SearchStrategy[Type]:
    return st.recursive(
        st.just(UNIT_TYPE),
        lambda inner: st.one_of(st.builds(Sum, inner, inner), st.builds(Prod, inner, inner)),
        max_leaves=max_leaves,
    )


@composite
def values(draw: DrawFn, ty: Type) -> Term:
    if isinstance(ty, UnitType):
        return UNIT
    if isinstance(ty, Sum):
        if draw(st.booleans()):
            return Inl(draw(values(ty.left)))
        return Inr(draw(values(ty.right)))
    assert isinstance(ty, Prod)
    return Pair(draw(values(ty.left)), draw(values(ty.right)))


@composite
def closed_terms(draw: DrawFn, ty: Type, fuel: int = 3) -> Term:
    """A closed term of type ``ty`` mixing projections, cases, recursion and annotated redexes."""
    shapes = ["value", "prl", "prr", "case", "let", "rec", "apply", "twice"]
    if isinstance(ty, Prod) and ty.left == ty.right:
        shapes.append("dup")
    shape = draw(st.sampled_from(shapes)) if fuel > 0 else "value"
    smaller = fuel - 1

    if shape == "prl":
        other = draw(first_order_types(2))
        pair = Pair(draw(closed_terms(ty, smaller)), draw(closed_terms(other, smaller)))
        return Prl(ascribe(pair, Prod(ty, other)))
    if shape == "prr":
        other = draw(first_order_types(2))
        pair = Pair(draw(closed_terms(other, smaller)), draw(closed_terms(ty, smaller)))
        return Prr(ascribe(pair, Prod(other, ty)))
    if shape == "case":
        left_ty = draw(st.one_of(st.just(ty), first_order_types(2)))
        right_ty = draw(st.one_of(st.just(ty), first_order_types(2)))
        scrutinee = ascribe(draw(closed_terms(Sum(left_ty, right_ty), smaller)), Sum(left_ty, right_ty))
        left = Var("x") if left_ty == ty and draw(st.booleans()) else draw(closed_terms(ty, smaller))
        right = Var("y") if right_ty == ty and draw(st.booleans()) else draw(closed_terms(ty, smaller))
        return Case(scrutinee, "x", ascribe(left, ty), "y", ascribe(right, ty))
    if shape == "let":
        return App(Lam("x", SizeVar("v"), Var("x"), ty), draw(closed_terms(ty, smaller)))
    if shape == "dup":
        assert isinstance(ty, Prod)
        body = Pair(Var("x"), Var("x"))
        return App(Lam("x", SizeVar("v"), body, ty.left), draw(closed_terms(ty.left, smaller)))
    if shape == "rec":
        count = encode_nat(draw(st.integers(min_value=0, max_value=3)))
        start = ascribe(draw(closed_terms(ty, smaller)), ty)
        return Rec(draw(step_functions(ty, smaller)), count, start)
    if shape in ("apply", "twice"):
        arg = ascribe(draw(closed_terms(ty, smaller)), ty)
        call = App(Var("f"), arg)
        if shape == "twice":
            call = App(Var("f"), call)
        return App(Lam("f", SizeVar("u"), call), draw(step_functions(ty, smaller)))
    return draw(values(ty))


@composite
def step_functions(draw: DrawFn, ty: Type, fuel: int = 1) -> Term:
    """An annotated ``ty -> ty`` lambda: identity, constant, rebuilding case or swap."""
    kinds = ["identity", "constant"]
    if isinstance(ty, Sum):
        kinds.append("rebuild")
        if ty.left == ty.right:
            kinds.append("swap")
    kind = draw(st.sampled_from(kinds))
    if kind == "constant":
        body = ascribe(draw(closed_terms(ty, fuel)), ty)
    elif kind == "rebuild":
        body = ascribe(Case(Var("b"), "x", Inl(Var("x")), "y", Inr(Var("y"))), ty)
    elif kind == "swap":
        body = ascribe(Case(Var("b"), "x", Inr(Var("x")), "y", Inl(Var("y"))), ty)
    else:
        body = Var("b")
    return Lam("b", SizeVar("w"), body, ty)


@composite
def typed_terms(draw: DrawFn, fuel: int = 3) -> tuple:
    ty = draw(first_order_types())
    return draw(closed_terms(ty, fuel)), ty
