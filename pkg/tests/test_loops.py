import itertools

import pytest

from cufl import bounds as bd
from cufl.config import EMULATION_CONFIG
from cufl.emulation.loops import (
    Assign,
    Copy,
    Loop,
    Succ,
    Zero,
    compile_loop,
    load_loop_program,
    parse_loop_program,
    run_loop_direct,
    saturating_succ,
    width_for,
)
from cufl.encoder import encode_nat
from cufl.errors import IllFormedLoop, StepLimitExceeded
from cufl.evaluator import normalize, verify_bounds
from cufl.syntax import Arrow

FUEL = EMULATION_CONFIG["emulate_fuel"]


@pytest.fixture(scope="module")
def add(loops_dir):
    return load_loop_program(loops_dir / "add.loop")


@pytest.fixture(scope="module")
def mul(loops_dir):
    return load_loop_program(loops_dir / "mul.loop")


def run_compiled(program, args):
    width = width_for(program, max(args, default=0))
    compiled = compile_loop(program, width)
    trace = normalize(compiled.apply(args), FUEL)
    return compiled, trace


class TestParsing:
    def test_add(self, add):
        assert add.name == "add"
        assert add.params == ("x", "y")
        assert add.body == (Assign("r", Copy("x")), Loop("y", (Assign("r", Succ("r")),)))
        assert add.result == "r"

    def test_zero_literal(self, mul):
        assert mul.body[0] == Assign("r", Zero())

    def test_variables_keep_parameters_first(self, mul):
        assert mul.variables == ("x", "y", "r")

    def test_counter_assigned_in_own_loop(self):
        with pytest.raises(IllFormedLoop):
            parse_loop_program("prog bad(x) { loop x { x := succ x }; return x }")

    def test_missing_return(self):
        with pytest.raises(IllFormedLoop):
            parse_loop_program("prog bad(x) { r := x }")

    def test_duplicate_parameter(self):
        with pytest.raises(IllFormedLoop):
            parse_loop_program("prog bad(x, x) { return x }")


class TestReferenceInterpreter:
    def test_arithmetic(self, add, mul):
        assert run_loop_direct(add, [2, 3]).result == 5
        assert run_loop_direct(mul, [2, 3]).result == 6

    def test_peak_and_iterations(self, mul):
        run = run_loop_direct(mul, [2, 3])
        assert run.peak == 6
        assert run.iterations == 3 + 3 * 2

    def test_arity(self, add):
        with pytest.raises(IllFormedLoop):
            run_loop_direct(add, [1])

    def test_iteration_limit(self, mul):
        with pytest.raises(StepLimitExceeded):
            run_loop_direct(mul, [5, 5], max_iterations=10)


class TestCompiler:
    def test_add(self, add):
        compiled, trace = run_compiled(add, [2, 3])
        assert compiled.decode(trace.normal_form) == 5

    @pytest.mark.parametrize("n", [0, 1, 4])
    def test_add_zero_is_identity(self, add, n):
        compiled, trace = run_compiled(add, [0, n])
        assert compiled.decode(trace.normal_form) == n

    def test_mul_within_inferred_bounds(self, mul):
        compiled, trace = run_compiled(mul, [2, 3])
        assert compiled.decode(trace.normal_form) == 6
        outcome = verify_bounds(compiled.apply([2, 3]), compiled.check([2, 3]), trace=trace)
        assert outcome.ok

    def test_program_type_is_an_arrow(self, add):
        report = compile_loop(add, 4).check()
        assert isinstance(report.judgement.ty, Arrow)

    def test_per_parameter_bounds_cover_a_run(self, mul):
        compiled, trace = run_compiled(mul, [2, 3])
        bounds = compiled.bounds
        assert bounds.params == ("x", "y")
        assert bounds.alpha.ambient | bounds.beta.ambient <= {"x", "y"}
        # numerals 2 and 3 have depths 4 and 5
        assert trace.total_cost <= bd.eval_bound(bounds.alpha, {"x": 4, "y": 5})
        assert trace.normal_depth <= bd.eval_bound(bounds.beta, {"x": 4, "y": 5})
        assert bounds.at([2, 3]) == (
            bd.eval_bound(bounds.alpha, {"x": 4, "y": 5}),
            bd.eval_bound(bounds.beta, {"x": 4, "y": 5}),
        )

    @pytest.mark.parametrize("x,y", [(0, 0), (1, 2), (3, 1)])
    def test_add_bounds_cover_runs(self, add, x, y):
        compiled, trace = run_compiled(add, [x, y])
        alpha, beta = compiled.bounds.at([x, y])
        assert trace.total_cost <= alpha
        assert trace.normal_depth <= beta

    def test_width_covers_the_input_range(self, mul):
        assert width_for(mul, 3) == 10
        for x, y in itertools.product(range(4), repeat=2):
            assert run_loop_direct(mul, [x, y]).peak < width_for(mul, 3)
        with pytest.raises(IllFormedLoop):
            width_for(mul, -1)

    def test_saturation(self, add):
        compiled = compile_loop(add, 3)
        result = normalize(compiled.apply([2, 2]), FUEL).normal_form
        assert compiled.decode(result) == 3

    def test_saturating_succ_keeps_top(self):
        top = saturating_succ(encode_nat(0), 1)
        assert normalize(saturating_succ(normalize(top).normal_form, 1)).normal_form == normalize(top).normal_form

    def test_width_must_be_positive(self, add):
        with pytest.raises(IllFormedLoop):
            compile_loop(add, 0)

    @pytest.mark.parametrize("x,y", list(itertools.product(range(3), repeat=2)))
    def test_agrees_with_interpreter(self, add, mul, x, y):
        for program in (add, mul):
            compiled, trace = run_compiled(program, [x, y])
            assert compiled.decode(trace.normal_form) == run_loop_direct(program, [x, y]).result

    @pytest.mark.slow
    @pytest.mark.parametrize("x,y", list(itertools.product(range(6), repeat=2)))
    def test_agrees_with_interpreter_and_bounds(self, add, mul, x, y):
        for program in (add, mul):
            compiled, trace = run_compiled(program, [x, y])
            assert compiled.decode(trace.normal_form) == run_loop_direct(program, [x, y]).result
            assert verify_bounds(compiled.apply([x, y]), compiled.check([x, y]), trace=trace).ok
