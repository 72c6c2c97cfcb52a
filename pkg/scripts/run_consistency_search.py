#!/usr/bin/env python3
"""穷举小型封闭项，搜索 Bot 的居民。"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

PROJECT_ROOT = Path(__file__).resolve().parents[1]
SRC_DIR = PROJECT_ROOT / "src"
if str(SRC_DIR) not in sys.path:
    sys.path.insert(0, str(SRC_DIR))

from tqdm import tqdm

from cufl.config import EMULATION_CONFIG, LOGGING_CONFIG
from cufl.emulation.search import search_for_bottom
from cufl.syntax import format_term


def main() -> int:
    parser = argparse.ArgumentParser(description="Consistency search over small closed terms")
    parser.add_argument("--max-size", type=int, default=EMULATION_CONFIG["consistency_max_size"])
    args = parser.parse_args()
    logging.basicConfig(level=LOGGING_CONFIG["level"], format=LOGGING_CONFIG["format"])

    print(f"🔍 枚举 AST 规模 ≤ {args.max_size} 的闭项...")
    with tqdm(total=args.max_size, unit="size") as bar:
        def advance(size: int, candidates: int) -> None:
            bar.set_postfix(size=size, terms=candidates)
            bar.update(1)

        found = search_for_bottom(args.max_size, progress=advance)

    if found is not None:
        print(f"❌ 找到 Bot 的证明: {format_term(found)}")
        return 1
    print(f"✅ no inhabitant of Bot found up to size {args.max_size}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
