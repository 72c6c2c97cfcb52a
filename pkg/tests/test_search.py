import pytest
from hypothesis import given

from cufl import bounds as bd
from cufl.bounds import SizeVar
from cufl.emulation.search import (
    TRUE,
    TermEnumerator,
    count_inhabitants,
    decide_proposition,
    enumerate_inhabitants,
    enumerate_terms,
    find_counterexample,
    search_for_bottom,
)
from cufl.encoder import decode_nat, unfold_nat_type
from cufl.errors import MalformedNumeral, UnsupportedType
from cufl.evaluator import normalize
from cufl.parser import parse_term
from cufl.syntax import BOTTOM, UNIT, UNIT_TYPE, App, Arrow, Inl, Inr, Lam, Pair, Prod, Sum, TVar, Var

from strategies import first_order_types

BOOL = Sum(UNIT_TYPE, UNIT_TYPE)

ALWAYS = Lam("x", SizeVar("v"), TRUE)
IS_INL = parse_term("\\x^v. case x of inl a => inl unit | inr b => inr unit")
IS_EVEN = parse_term(
    "\\x^v. case x of inl a => inl unit | inr p => "
    "case p of inl b => inr unit | inr q => "
    "case q of inl c => inl unit | inr d => inr unit"
)


NOT = "(\\n^u. case n of inl a => inr unit | inr b => inl unit)"

PROPOSITIONS = [
    ("always", ALWAYS, BOOL, 2, True),
    ("is_inl", IS_INL, BOOL, 2, False),
    ("never", parse_term("\\x^v. inr unit"), UNIT_TYPE, 1, False),
    ("vacuous", IS_INL, BOOL, 1, True),
    (
        "first_component_total",
        parse_term("\\p^v. case prl p of inl a => inl unit | inr b => inl unit"),
        Prod(BOOL, UNIT_TYPE),
        3,
        True,
    ),
    (
        "nested_total",
        parse_term("\\x^v. case x of inl a => inl unit | inr b => case b of inl c => inl unit | inr d => inl unit"),
        Sum(UNIT_TYPE, BOOL),
        3,
        True,
    ),
    (
        "double_negation",
        parse_term(f"\\x^v. case x of inl a => {NOT} ({NOT} x) | inr b => {NOT} ({NOT} ({NOT} x))"),
        BOOL,
        2,
        True,
    ),
    ("excluded_middle", parse_term(f"\\x^v. case x of inl a => inl unit | inr b => {NOT} x"), BOOL, 2, True),
    ("contradiction", parse_term(f"\\x^v. case x of inl a => {NOT} x | inr b => inr unit"), BOOL, 2, False),
    ("is_even", IS_EVEN, unfold_nat_type(3), 4, False),
    (
        "components_agree",
        parse_term(
            "\\p^v. case prl p of inl a => (case prr p of inl b => inl unit | inr c => inr unit) "
            "| inr d => (case prr p of inl e => inr unit | inr f => inl unit)"
        ),
        Prod(BOOL, BOOL),
        3,
        False,
    ),
    (
        "zero_or_successor",
        parse_term("\\x^v. case x of inl a => inl unit | inr b => inl unit"),
        unfold_nat_type(3),
        4,
        True,
    ),
]


class TestInhabitants:
    def test_bool(self):
        assert list(enumerate_inhabitants(BOOL, 2)) == [Inl(UNIT), Inr(UNIT)]

    def test_unit(self):
        assert list(enumerate_inhabitants(UNIT_TYPE, 1)) == [UNIT]

    def test_product(self):
        ty = Prod(UNIT_TYPE, BOOL)
        assert list(enumerate_inhabitants(ty, 3)) == [Pair(UNIT, Inl(UNIT)), Pair(UNIT, Inr(UNIT))]

    def test_depth_cuts_off(self):
        assert list(enumerate_inhabitants(BOOL, 1)) == []

    @pytest.mark.parametrize("ty", [BOTTOM, TVar("A"), Arrow(UNIT_TYPE, SizeVar("v"), bd.ONE, bd.ONE, UNIT_TYPE)])
    def test_unsupported(self, ty):
        with pytest.raises(UnsupportedType):
            list(enumerate_inhabitants(ty, 3))

    @given(first_order_types(max_leaves=6))
    def test_count_matches_enumeration(self, ty):
        for depth in range(1, 5):
            values = list(enumerate_inhabitants(ty, depth))
            assert len(values) == count_inhabitants(ty, depth)
            assert len(set(values)) == len(values)
            assert all(value.depth <= depth for value in values)


class TestDecision:
    def test_constant_true(self):
        assert decide_proposition(ALWAYS, BOOL, 2)

    def test_is_inl_fails_on_inr(self):
        assert not decide_proposition(IS_INL, BOOL, 2)
        assert find_counterexample(IS_INL, BOOL, 2) == Inr(UNIT)

    @pytest.mark.parametrize(
        "pred,domain,depth,expected",
        [entry[1:] for entry in PROPOSITIONS],
        ids=[entry[0] for entry in PROPOSITIONS],
    )
    def test_known_propositions(self, pred, domain, depth, expected):
        assert decide_proposition(pred, domain, depth) is expected
        witness = find_counterexample(pred, domain, depth)
        if expected:
            assert witness is None
        else:
            assert normalize(App(pred, witness)).normal_form != TRUE

    def test_first_disagreeing_pair(self):
        _, pred, domain, depth, _ = PROPOSITIONS[10]
        assert find_counterexample(pred, domain, depth) == Pair(Inl(UNIT), Inr(UNIT))

    def test_parity_of_small_numerals(self):
        domain = unfold_nat_type(3)
        for value in enumerate_inhabitants(domain, 4):
            try:
                number = decode_nat(value)
            except MalformedNumeral:
                continue
            verdict = normalize(App(IS_EVEN, value)).normal_form == TRUE
            assert verdict == (number % 2 == 0)
        assert find_counterexample(IS_EVEN, domain, 4) == Inr(Inl(UNIT))


class TestConsistencySearch:
    def test_size_one(self):
        assert enumerate_terms(1) == [UNIT]

    def test_size_two(self):
        terms = enumerate_terms(2)
        assert len(terms) == 6
        assert Lam("x0", SizeVar("v0"), Var("x0")) in terms

    def test_open_terms_use_scope(self):
        enumerator = TermEnumerator()
        assert enumerator.terms(1, 2) == [UNIT, Var("x0"), Var("x1")]

    def test_no_bottom_up_to_size_three(self):
        seen = []
        assert search_for_bottom(3, progress=lambda size, count: seen.append(size)) is None
        assert seen == [1, 2, 3]

    @pytest.mark.slow
    def test_no_bottom_up_to_size_seven(self):
        assert search_for_bottom(7) is None
