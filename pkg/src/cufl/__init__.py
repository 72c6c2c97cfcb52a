"""cufl：携带上界的证明检查器与计费解释器。"""
from __future__ import annotations

import sys
from typing import Any

from .config import CHECK_CONFIG, DATA_CONFIG, EMULATION_CONFIG, EVAL_CONFIG, PROJECT_ROOT

# 项与上界都是深层递归结构
sys.setrecursionlimit(max(sys.getrecursionlimit(), EVAL_CONFIG["recursion_limit"]))

__all__ = [
    "PROJECT_ROOT",
    "DATA_CONFIG",
    "CHECK_CONFIG",
    "EVAL_CONFIG",
    "EMULATION_CONFIG",
    "infer",
    "check",
    "normalize",
    "verify_bounds",
    "parse_term",
    "parse_program",
]

_LAZY = {
    "infer": ("checker", "infer"),
    "check": ("checker", "check"),
    "normalize": ("evaluator", "normalize"),
    "verify_bounds": ("evaluator", "verify_bounds"),
    "parse_term": ("parser", "parse_term"),
    "parse_program": ("parser", "parse_program"),
}


def __getattr__(name: str) -> Any:
    if name in _LAZY:
        from importlib import import_module

        module, attr = _LAZY[name]
        return getattr(import_module(f".{module}", __name__), attr)
    raise AttributeError(f"module 'cufl' has no attribute {name!r}")
