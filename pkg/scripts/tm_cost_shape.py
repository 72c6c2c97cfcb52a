#!/usr/bin/env python3
"""测量编译后图灵机的代价并拟合每步代价直线。"""
from __future__ import annotations

import argparse
import itertools
import logging
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

import pandas as pd
from tqdm import tqdm

from cufl.config import DATA_CONFIG, EMULATION_CONFIG, LOGGING_CONFIG
from cufl.emulation.turing import compile_tm, fit_linear_cost, load_tm, run_tm_direct, step_weight
from cufl.evaluator import normalize


def measure(machine: Path, max_length: int) -> pd.DataFrame:
    tm = load_tm(machine)
    symbols = [s for s in tm.alphabet if s != tm.blank]
    rows = []
    words = [w for n in range(max_length + 1) for w in itertools.product(symbols, repeat=n)]
    for word in tqdm(words, desc=tm.name, unit="word"):
        config, steps = run_tm_direct(tm, word)
        compiled = compile_tm(tm, word, len(word) + 1)
        trace = normalize(compiled.term, EMULATION_CONFIG["emulate_fuel"])
        rows.append(
            {
                "machine": tm.name,
                "word": "".join(word),
                "length": len(word),
                "steps": steps,
                "step_bound": compiled.step_bound,
                "feature": step_weight(tm) * compiled.step_bound,
                "cost": trace.total_cost,
                "agrees": compiled.decode(trace.normal_form).normalized(tm.blank) == config.normalized(tm.blank),
            }
        )
    return pd.DataFrame(rows)


def main() -> int:
    parser = argparse.ArgumentParser(description="Per-step cost shape of compiled Turing machines")
    parser.add_argument("--machine", type=Path, default=DATA_CONFIG["machines"] / "parity.tm")
    parser.add_argument("--max-length", type=int, default=6)
    parser.add_argument("--fit-length", type=int, default=3, help="Fit on words up to this length")
    parser.add_argument("--output", type=Path, default=DATA_CONFIG["reports"] / "tm_cost_shape.csv")
    args = parser.parse_args()
    logging.basicConfig(level=LOGGING_CONFIG["level"], format=LOGGING_CONFIG["format"])

    df = measure(args.machine, args.max_length)
    train = df[df["length"] <= args.fit_length]
    fit = fit_linear_cost(train["feature"], train["cost"])
    df["predicted"] = fit.predict(df["feature"])
    df["ratio"] = df["cost"] / df["predicted"]

    args.output.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(args.output, index=False)
    print(f"📊 cost ≈ {fit.slope:.2f} · feature + {fit.intercept:.2f} (max residual {fit.residual:.2f})")
    print(df.groupby("length")[["cost", "predicted", "ratio"]].mean().round(2).to_string())
    print(f"📁 保存路径: {args.output}")
    held_out = df[df["length"] > args.fit_length]
    within = bool(((held_out["ratio"] >= 0.5) & (held_out["ratio"] <= 2.0)).all())
    print(("✅" if within and df["agrees"].all() else "❌") + f" held-out lengths within factor 2: {within}")
    return 0 if within and df["agrees"].all() else 1


if __name__ == "__main__":
    sys.exit(main())
