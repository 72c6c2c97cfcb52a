import pytest
from hypothesis import given

from cufl import bounds as bd
from cufl.bounds import SizeVar
from cufl.syntax import (
    EMPTY_CONTEXT,
    UNIT,
    UNIT_TYPE,
    App,
    Arrow,
    Case,
    Inl,
    Inr,
    Lam,
    Pair,
    Prl,
    Prod,
    Sum,
    Var,
    alpha_equal,
    ascribe,
    depth,
    format_term,
    format_type,
    free_vars,
    occurs,
    skeleton_equal,
    subst_term,
    types_equal,
)

from strategies import closed_terms, first_order_types

V = SizeVar("v")


def test_depth():
    assert depth(UNIT) == 1
    assert depth(Inr(Inr(Inl(UNIT)))) == 4
    assert depth(Pair(UNIT, Inl(UNIT))) == 3
    assert depth(Lam("x", V, Pair(Var("x"), UNIT))) == 3


def test_occurs():
    x = Var("x")
    assert occurs("x", Pair(x, x)) == 2
    assert occurs("x", Lam("x", V, x)) == 0
    assert occurs("x", Case(x, "x", x, "y", Var("y"))) == 1


def test_free_vars():
    assert free_vars(Case(Var("z"), "x", Var("x"), "y", Var("w"))) == {"z", "w"}
    assert free_vars(Lam("x", V, App(Var("x"), Var("f")))) == {"f"}


def test_subst_replaces_variable():
    assert subst_term(Var("x"), "x", UNIT) == UNIT


def test_subst_avoids_capture():
    out = subst_term(Lam("y", V, Var("x")), "x", Var("y"))
    assert isinstance(out, Lam)
    assert out.binder != "y"
    assert out.body == Var("y")


def test_subst_respects_shadowing():
    term = Case(Var("x"), "x", Var("x"), "y", Var("x"))
    out = subst_term(term, "x", UNIT)
    assert out == Case(UNIT, "x", Var("x"), "y", UNIT)


def test_alpha_equal():
    assert alpha_equal(Lam("x", V, Var("x")), Lam("y", SizeVar("w"), Var("y")))
    assert not alpha_equal(Lam("x", V, Var("y")), Lam("y", V, Var("y")))
    assert alpha_equal(
        Case(UNIT, "a", Var("a"), "b", UNIT),
        Case(UNIT, "c", Var("c"), "d", UNIT),
    )


def test_values():
    assert Pair(UNIT, Inl(UNIT)).is_value
    assert Lam("x", V, App(Var("x"), Var("x"))).is_value
    assert not Pair(UNIT, Prl(Pair(UNIT, UNIT))).is_value
    assert not App(Lam("x", V, Var("x")), UNIT).is_value


def test_arrow_equality_up_to_size_binder():
    a = Arrow(UNIT_TYPE, V, bd.var("v"), bd.ONE, UNIT_TYPE)
    b = Arrow(UNIT_TYPE, SizeVar("w"), bd.var("w"), bd.ONE, UNIT_TYPE)
    c = Arrow(UNIT_TYPE, SizeVar("w"), bd.var("w") + 1, bd.ONE, UNIT_TYPE)
    assert types_equal(a, b)
    assert not types_equal(a, c)
    assert skeleton_equal(a, c)


def test_context_shadowing():
    ctx = EMPTY_CONTEXT.extend("x", UNIT_TYPE, bd.ONE).extend("x", Sum(UNIT_TYPE, UNIT_TYPE), bd.lit(2))
    entry = ctx.lookup("x")
    assert entry is not None and entry.beta == bd.lit(2)
    assert len(ctx.entries) == 1
    assert ctx.lookup("y") is None


def test_ascription_is_an_annotated_identity_redex():
    out = ascribe(Inl(UNIT), Sum(UNIT_TYPE, UNIT_TYPE))
    assert isinstance(out, App) and isinstance(out.fn, Lam)
    assert out.fn.annotation == Sum(UNIT_TYPE, UNIT_TYPE)
    assert out.arg == Inl(UNIT)


def test_printing():
    lam = Lam("x", V, Pair(Var("x"), Var("x")))
    assert format_term(lam) == "\\x^v. (x, x)"
    assert format_term(App(Var("f"), App(Var("g"), Var("x")))) == "f (g x)"
    assert format_term(Inr(Inl(UNIT))) == "inr inl unit"
    assert format_type(Prod(Sum(UNIT_TYPE, UNIT_TYPE), UNIT_TYPE)) == "(Unit + Unit) * Unit"
    assert format_type(Arrow(UNIT_TYPE, V, bd.ONE, bd.var("v"), UNIT_TYPE)) == "Unit ->[v; 1; v] Unit"


def test_arrow_bounds_print_simplified():
    alpha = bd.Add(bd.Max(bd.Lit(2), bd.Add(bd.Lit(2), bd.Lit(1))), bd.ONE)
    beta = bd.Iter(bd.Add(bd.var("v"), bd.Lit(2)), bd.Lit(3), V)
    arrow = Arrow(UNIT_TYPE, V, alpha, beta, UNIT_TYPE)
    assert format_type(arrow) == "Unit ->[v; 4; v + 6] Unit"
    assert format_type(arrow, simplified=False) != format_type(arrow)
    # annotations keep their written bounds
    assert format_term(Lam("f", V, Var("f"), arrow)) == f"\\f^v : {format_type(arrow, simplified=False)}. f"


@given(first_order_types().flatmap(closed_terms))
def test_generated_terms_are_closed(term):
    assert not term.free
    assert term.depth <= term.size


def test_package_exports_resolve_lazily():
    import cufl
    from cufl.checker import infer

    assert cufl.infer is infer
    with pytest.raises(AttributeError):
        cufl.no_such_export
