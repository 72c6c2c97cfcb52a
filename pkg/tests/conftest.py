"""共享的测试夹具。"""
from __future__ import annotations

import sys
from pathlib import Path

import pytest

# 确保可以从 tests/ 直接导入 src 下的包
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT / "src") not in sys.path:
    sys.path.insert(0, str(ROOT / "src"))
if str(ROOT / "tests") not in sys.path:
    sys.path.insert(0, str(ROOT / "tests"))

from cufl.config import DATA_CONFIG  # noqa: E402


@pytest.fixture(scope="session")
def samples_dir() -> Path:
    return DATA_CONFIG["samples"]


@pytest.fixture(scope="session")
def machines_dir() -> Path:
    return DATA_CONFIG["machines"]


@pytest.fixture(scope="session")
def loops_dir() -> Path:
    return DATA_CONFIG["loops"]
