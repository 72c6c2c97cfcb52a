"""循环程序与有界图灵机到 CUFL 的编译器，以及枚举搜索。"""
from .loops import CompiledLoop, LoopProgram, compile_loop, load_loop_program, parse_loop_program, run_loop_direct
from .search import count_inhabitants, decide_proposition, enumerate_inhabitants, search_for_bottom
from .turing import TapeConfig, TMSpec, compile_tm, decode_config, fit_linear_cost, load_tm, run_tm_direct

__all__ = [
    "CompiledLoop",
    "LoopProgram",
    "TMSpec",
    "TapeConfig",
    "compile_loop",
    "compile_tm",
    "count_inhabitants",
    "decide_proposition",
    "decode_config",
    "enumerate_inhabitants",
    "fit_linear_cost",
    "load_loop_program",
    "load_tm",
    "parse_loop_program",
    "run_loop_direct",
    "run_tm_direct",
    "search_for_bottom",
]
