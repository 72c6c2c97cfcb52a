"""全局配置：路径、检查器与求值器参数。

数值参数可以通过环境变量或项目根目录下的 ``.env`` 覆盖（变量名见 README）。
"""
from __future__ import annotations

import os
from pathlib import Path

# 项目根目录（src/cufl/ -> src -> project）
PROJECT_ROOT = Path(__file__).resolve().parents[2]


def _load_env_file(env_path: Path) -> None:
    """读取 .env；已经存在的环境变量优先。"""
    if not env_path.exists():
        return
    try:
        from dotenv import load_dotenv
    except ImportError:
        # 没有 python-dotenv 时只解析 KEY=VALUE 行
        for raw in env_path.read_text(encoding="utf-8").splitlines():
            entry = raw.strip()
            if not entry or entry.startswith("#") or "=" not in entry:
                continue
            key, value = entry.split("=", 1)
            os.environ.setdefault(key.strip(), value.strip().strip("'\""))
    else:
        load_dotenv(env_path, override=False)


_load_env_file(PROJECT_ROOT / ".env")


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        return default
    return value if value > 0 else default


# 数据路径配置
DATA_CONFIG = {
    "samples": PROJECT_ROOT / "samples",
    "machines": PROJECT_ROOT / "samples" / "machines",
    "loops": PROJECT_ROOT / "samples" / "loops",
    "reports": PROJECT_ROOT / "reports",
}

# 上界代数与检查器配置
CHECK_CONFIG = {
    # leq_bounds 采样网格 {1..grid}^k
    "grid": _env_int("CUFL_GRID", 4),
    # 化简不动点的最大轮数
    "rewrite_budget": _env_int("CUFL_REWRITE_BUDGET", 256),
    # 上界取值的位宽上限（超过即 Overflow）
    "max_bits": _env_int("CUFL_MAX_BITS", 4096),
    # iter 的最大迭代次数
    "max_iterations": _env_int("CUFL_MAX_ITER", 100_000),
    # 多项式比较允许的最大字面指数
    "max_poly_exponent": 64,
    # 报告中渲染上界的最大节点数
    "render_limit": 400,
}

# 求值器配置
EVAL_CONFIG = {
    "fuel": _env_int("CUFL_FUEL", 10_000),
    # 深层项的递归上限
    "recursion_limit": _env_int("CUFL_RECURSION_LIMIT", 20_000),
}

# 仿真与探针配置
EMULATION_CONFIG = {
    "tm_max_steps": 10_000,
    "loop_fuel": 1_000_000,
    "consistency_max_size": 7,
    "enumerate_depth": 3,
    # 仿真命令的默认求值步数
    "emulate_fuel": _env_int("CUFL_EMULATE_FUEL", 1_000_000),
}

# 日志配置
LOGGING_CONFIG = {
    "level": os.getenv("CUFL_LOG_LEVEL", "WARNING").upper(),
    "format": "%(asctime)s - %(levelname)s - %(message)s",
}
