import pytest
from hypothesis import given, settings, strategies as st

from cufl import bounds as bd
from cufl.bounds import SizeVar
from cufl.checker import infer
from cufl.encoder import (
    EMPTY_MAP,
    ZERO,
    DeBruijnMap,
    decode_nat,
    encode_nat,
    quote_bound,
    quote_term,
    quote_type,
    unfold_nat_type,
)
from cufl.errors import MalformedNumeral, UnboundSizeVar, UnboundVariable
from cufl.evaluator import step
from cufl.syntax import (
    EMPTY_CONTEXT,
    UNIT,
    UNIT_TYPE,
    Arrow,
    Inl,
    Inr,
    Lam,
    Pair,
    Sum,
    Var,
    alpha_equal,
    depth,
)

from strategies import binding_bound_exprs, first_order_types, typed_terms


class TestNumerals:
    def test_encode(self):
        assert encode_nat(0) == ZERO == Inl(UNIT)
        assert encode_nat(2) == Inr(Inr(Inl(UNIT)))

    def test_decode(self):
        assert decode_nat(Inr(Inl(UNIT))) == 1

    def test_malformed(self):
        with pytest.raises(MalformedNumeral):
            decode_nat(Inr(UNIT))
        with pytest.raises(ValueError):
            encode_nat(-1)

    def test_nat_types(self):
        assert unfold_nat_type(1) == Sum(UNIT_TYPE, UNIT_TYPE)
        assert unfold_nat_type(2) == Sum(UNIT_TYPE, Sum(UNIT_TYPE, UNIT_TYPE))
        with pytest.raises(ValueError):
            unfold_nat_type(0)

    @given(st.integers(min_value=0, max_value=200))
    def test_numeral_depth(self, value):
        assert depth(encode_nat(value)) == value + 2
        assert decode_nat(encode_nat(value)) == value


class TestQuotation:
    def test_bound_variable(self):
        env = DeBruijnMap.of("v")
        assert quote_bound(bd.var("v"), env) == Inl(Inl(Inl(encode_nat(1))))

    def test_bound_literal(self):
        assert quote_bound(bd.lit(2)) == Inl(Inl(Inr(encode_nat(2))))

    def test_bound_sum(self):
        env = DeBruijnMap.of("v")
        quoted = quote_bound(bd.var("v") + 1, env)
        assert quoted == Inl(Inr(Inr(Pair(quote_bound(bd.var("v"), env), quote_bound(bd.ONE)))))

    def test_de_bruijn_indices_count_from_innermost(self):
        env = DeBruijnMap.of("u", "v")
        assert env.index("v") == 1
        assert env.index("u") == 2
        assert env.push("u").index("u") == 1

    def test_types(self):
        unit = quote_type(UNIT_TYPE)
        assert unit == Inr(Inr(UNIT))
        assert quote_type(Sum(UNIT_TYPE, UNIT_TYPE)) == Inl(Inl(Pair(unit, unit)))

    def test_unit_term(self):
        assert quote_term(UNIT) == Inl(Inl(Inr(Inl(UNIT))))

    def test_lambda_records_indices(self):
        quoted = quote_term(Lam("x", SizeVar("v"), Var("x")))
        body = Inl(Inl(Inl(Inl(encode_nat(1)))))
        payload = Pair(Pair(encode_nat(1), encode_nat(1)), Pair(Inl(UNIT), body))
        assert quoted == Inr(Inl(Inl(Inr(payload))))

    def test_lambda_annotations_are_quoted(self):
        plain = Lam("x", SizeVar("v"), Var("x"))
        narrow = Lam("x", SizeVar("v"), Var("x"), UNIT_TYPE)
        wide = Lam("x", SizeVar("v"), Var("x"), Sum(UNIT_TYPE, UNIT_TYPE))
        quotes = {quote_term(plain), quote_term(narrow), quote_term(wide)}
        assert len(quotes) == 3
        assert not alpha_equal(narrow, wide)

    def test_size_binders_are_indexed(self):
        def outer(name, payload):
            hook = Arrow(UNIT_TYPE, SizeVar("u"), payload, bd.ONE, UNIT_TYPE)
            return Lam("x", SizeVar(name), Lam("f", SizeVar("w"), Var("f"), hook))

        same = outer("v", bd.var("v")), outer("t", bd.var("t"))
        assert quote_term(same[0]) == quote_term(same[1])
        assert alpha_equal(*same)
        other = outer("v", bd.ONE)
        assert quote_term(other) != quote_term(same[0])
        assert not alpha_equal(other, same[0])

    def test_unbound_names(self):
        with pytest.raises(UnboundVariable):
            quote_term(Var("x"), EMPTY_MAP)
        with pytest.raises(UnboundSizeVar):
            quote_bound(bd.var("v"))

    @given(typed_terms(), typed_terms())
    @settings(max_examples=1000, deadline=None)
    def test_injective_up_to_alpha(self, first, second):
        a, b = first[0], second[0]
        assert (quote_term(a) == quote_term(b)) == alpha_equal(a, b)

    @given(typed_terms())
    @settings(max_examples=200, deadline=None)
    def test_quotations_are_checkable_values(self, sample):
        quoted = quote_term(sample[0])
        assert step(quoted) is None
        assert infer(EMPTY_CONTEXT, quoted).ok

    @given(binding_bound_exprs(), binding_bound_exprs())
    @settings(max_examples=1000, deadline=None)
    def test_bound_quotation_is_injective(self, first, second):
        env = DeBruijnMap.of("x", "y", "z")
        assert (quote_bound(first, env) == quote_bound(second, env)) == (first == second)

    @given(first_order_types(6), first_order_types(6))
    @settings(max_examples=1000, deadline=None)
    def test_type_quotation_is_injective(self, first, second):
        assert (quote_type(first) == quote_type(second)) == (first == second)

    @given(binding_bound_exprs(), first_order_types(6))
    @settings(max_examples=200, deadline=None)
    def test_bound_and_type_quotations_are_checkable_values(self, bound, ty):
        for quoted in (quote_bound(bound, DeBruijnMap.of("x", "y", "z")), quote_type(ty)):
            assert step(quoted) is None
            assert infer(EMPTY_CONTEXT, quoted).ok
