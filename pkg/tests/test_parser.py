import pytest
from hypothesis import given, settings

from cufl import bounds as bd
from cufl.bounds import SizeVar
from cufl.errors import ParseError
from cufl.parser import parse_bound, parse_program, parse_term, parse_type, tokenize
from cufl.syntax import (
    UNIT,
    UNIT_TYPE,
    App,
    Arrow,
    Case,
    Inl,
    Lam,
    Pair,
    Prod,
    Rec,
    Sum,
    TVar,
    Var,
    alpha_equal,
    ascribe,
    format_term,
)

from strategies import typed_terms


class TestTerms:
    def test_unit(self):
        assert parse_term("unit") == UNIT

    def test_case(self):
        parsed = parse_term("case inl unit of inl x => x | inr y => y")
        assert parsed == Case(Inl(UNIT), "x", Var("x"), "y", Var("y"))

    def test_lambda(self):
        parsed = parse_term("\\x^v. (x, x)")
        assert parsed == Lam("x", SizeVar("v"), Pair(Var("x"), Var("x")))

    def test_annotated_lambda(self):
        parsed = parse_term("\\p^v : Unit * Unit. prl p")
        assert isinstance(parsed, Lam)
        assert parsed.annotation == Prod(UNIT_TYPE, UNIT_TYPE)

    def test_application_is_left_associative(self):
        assert parse_term("f x y") == App(App(Var("f"), Var("x")), Var("y"))

    def test_rec_takes_three_atoms(self):
        assert parse_term("rec f (inl unit) a") == Rec(Var("f"), Inl(UNIT), Var("a"))

    def test_ascription(self):
        ty = Sum(UNIT_TYPE, UNIT_TYPE)
        assert parse_term("(inl unit : Unit + Unit)") == ascribe(Inl(UNIT), ty)

    @pytest.mark.parametrize(
        "text",
        [
            "\\x^v. (x, x)",
            "case b of inl x => inr unit | inr y => inl unit",
            "prl (unit, unit)",
            "f (g x)",
            "rec f k a",
            "inr inr inl unit",
        ],
    )
    def test_printing_reparses(self, text):
        assert format_term(parse_term(text)) == text

    @given(typed_terms())
    @settings(max_examples=500, deadline=None)
    def test_printed_terms_parse_back(self, sample):
        term = sample[0]
        text = format_term(term)
        parsed = parse_term(text)
        assert alpha_equal(parsed, term)
        assert format_term(parsed) == text

    def test_errors_carry_positions(self):
        with pytest.raises(ParseError) as info:
            parse_term("(unit")
        assert info.value.line == 1

    def test_unexpected_character(self):
        with pytest.raises(ParseError):
            tokenize("unit @ unit")

    def test_trailing_input(self):
        with pytest.raises(ParseError):
            parse_term("unit )")


class TestTypesAndBounds:
    def test_product_binds_tighter_than_sum(self):
        assert parse_type("Unit * Unit + Unit") == Sum(Prod(UNIT_TYPE, UNIT_TYPE), UNIT_TYPE)

    def test_arrow(self):
        parsed = parse_type("A ->[v; 1; v] A")
        assert parsed == Arrow(TVar("A"), SizeVar("v"), bd.ONE, bd.var("v"), TVar("A"))

    def test_bound_precedence(self):
        x = bd.var("x")
        assert parse_bound("2 * x ^ 2 + 1") == bd.Add(bd.Mul(bd.lit(2), bd.Pow(x, bd.lit(2))), bd.ONE)

    def test_bound_forms(self):
        x = bd.var("x")
        assert parse_bound("iter(x + 1; n; x)") == bd.Iter(x + 1, bd.var("n"), SizeVar("x"))
        assert parse_bound("max(x, 1)") == bd.Max(x, bd.ONE)
        assert parse_bound("x[x := 2]") == bd.Subst(x, SizeVar("x"), bd.lit(2))

    def test_zero_literal_is_rejected(self):
        with pytest.raises(ParseError):
            parse_bound("0")


class TestPrograms:
    def test_sample_file(self, samples_dir):
        program = parse_program((samples_dir / "basics.cufl").read_text(encoding="utf-8"))
        assert "dup" in program.definitions
        first = program.definitions["first"]
        assert first.ty == UNIT_TYPE
        assert first.claim == (bd.lit(4), bd.ONE)
        assert [d.kind for d in program.directives].count("quote") == 2

    def test_earlier_definitions_are_inlined(self):
        program = parse_program("def id = \\x^v. x;\ndef use = id unit;")
        assert program.definitions["use"].term == App(Lam("x", SizeVar("v"), Var("x")), UNIT)
        assert program.definitions["use"].line == 2

    def test_duplicate_definition(self):
        with pytest.raises(ParseError):
            parse_program("def a = unit; def a = unit;")

    def test_unknown_directive(self):
        with pytest.raises(ParseError):
            parse_program("def a = unit;\n#explain a")
