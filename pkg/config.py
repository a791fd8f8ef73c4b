import json
import logging
import os
from dataclasses import asdict, dataclass
from dataclasses import field as dc_field
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from errors import ValidationError

DEFAULT_SEED = 20240521
DEFAULT_ENUM_BUDGET = 10 ** 6

# 常用数域别名
FIELD_ALIASES = {
    "q": {"kind": "rational"},
    "q5": {"kind": "quadratic", "D": 5},
    "q2": {"kind": "quadratic", "D": 2},
    "q3": {"kind": "quadratic", "D": 3},
    "q13": {"kind": "quadratic", "D": 13},
    "qi": {"kind": "quadratic", "D": -1},
    "qw": {"kind": "quadratic", "D": -3},
}


def load_environment():
    """加载 .env 中的环境变量"""
    load_dotenv(override=True)


def setup_logging(level: str = "INFO", log_dir: Optional[str] = None):
    """设置日志配置

    Args:
        level: 日志级别名称
        log_dir: 日志目录，默认读取 HECKELAB_LOG_DIR

    Returns:
        HeckeLab 根日志器
    """
    numeric_level = getattr(logging, level.upper(), None)
    if not isinstance(numeric_level, int):
        raise ValidationError(f'无效的日志级别: {level}')

    log_dir = log_dir or os.getenv("HECKELAB_LOG_DIR", "logs")
    os.makedirs(log_dir, exist_ok=True)
    timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    log_file = os.path.join(log_dir, f'hecke_{timestamp}.log')

    logging.basicConfig(
        level=numeric_level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file, encoding='utf-8'),
            logging.StreamHandler()
        ],
        force=True
    )
    return logging.getLogger('HeckeLab')


def report_dir() -> Path:
    """报告输出目录（HECKELAB_REPORT_DIR 可覆盖）"""
    return Path(os.getenv("HECKELAB_REPORT_DIR", "reports"))


def default_workers() -> int:
    value = os.getenv("HECKELAB_WORKERS")
    if value:
        try:
            workers = int(value)
        except ValueError:
            raise ValidationError(f"HECKELAB_WORKERS 不是整数: {value}")
        if workers < 1:
            raise ValidationError(f"HECKELAB_WORKERS 必须为正: {value}")
        return workers
    return os.cpu_count() or 1


def default_seed() -> int:
    """属性测试的随机种子（HECKELAB_SEED 可覆盖）"""
    return _env_int("HECKELAB_SEED", DEFAULT_SEED, minimum=0)


def default_enum_budget() -> int:
    """格点枚举的候选点上限（HECKELAB_ENUM_BUDGET 可覆盖）"""
    return _env_int("HECKELAB_ENUM_BUDGET", DEFAULT_ENUM_BUDGET, minimum=1)


def _env_int(name: str, default: int, minimum: int) -> int:
    value = os.getenv(name)
    if not value:
        return default
    try:
        number = int(value)
    except ValueError:
        raise ValidationError(f"{name} 不是整数: {value}")
    if number < minimum:
        raise ValidationError(f"{name} 必须 ≥ {minimum}: {value}")
    return number


def load_json(path: str) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError:
        raise ValidationError(f"配置文件不存在: {path}")
    except json.JSONDecodeError as e:
        raise ValidationError(f"配置文件不是合法 JSON: {path}: {e}")


def load_field_spec(name: str) -> Dict[str, Any]:
    """解析数域描述

    Args:
        name: 别名（q5、qi、q）、整数 D（"-7"、"d:13"）或 JSON 文件路径

    Returns:
        形如 {"kind": "quadratic", "D": 5} 的字典
    """
    text = name.strip()
    key = text.lower()
    if key in FIELD_ALIASES:
        return dict(FIELD_ALIASES[key])
    if key.startswith("d:"):
        key = key[2:]
    try:
        return {"kind": "quadratic", "D": int(key)}
    except ValueError:
        pass
    if os.path.exists(text):
        spec = load_json(text)
        if spec.get("kind") not in ("quadratic", "rational", "custom"):
            raise ValidationError(f"未知的数域类型: {spec.get('kind')}")
        return spec
    raise ValidationError(f"无法识别的数域: {name}")


def parse_hyperplane(text: Optional[str], r: int):
    """解析超平面系数，默认 τ_{v0} = 0（α = (1, 0, ..., 0)）"""
    from fractions import Fraction
    if text is None or text.strip() == "":
        return tuple(Fraction(int(i == 0)) for i in range(r))
    try:
        alpha = tuple(Fraction(part.strip()) for part in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"超平面系数格式错误: {text}")
    if len(alpha) != r:
        raise ValidationError(f"超平面需要 {r} 个系数，得到 {len(alpha)} 个")
    return alpha


def parse_grid(text: str):
    """解析网格描述 log:a:b:n 或 lin:a:b:n 或逗号列表"""
    import numpy as np
    parts = text.split(":")
    try:
        if parts[0] == "log" and len(parts) == 4:
            return np.geomspace(float(parts[1]), float(parts[2]), int(parts[3]))
        if parts[0] == "lin" and len(parts) == 4:
            return np.linspace(float(parts[1]), float(parts[2]), int(parts[3]))
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise ValidationError(f"网格格式错误: {text}")


@dataclass
class RunConfig:
    """一次运行的完整配置，写入报告以便复现"""
    field: str = "q5"
    modulus: str = "1"
    T: float = 100.0
    hyperplane: Optional[str] = None
    v0: int = 0
    beta: float = 1.5
    Y: float = 0.3
    n: int = 1
    rs_path: Optional[str] = None
    tolerance: float = 1e-8
    enum_budget: int = dc_field(default_factory=default_enum_budget)
    out_dir: str = dc_field(default_factory=lambda: str(report_dir()))
    seed: int = dc_field(default_factory=default_seed)
    workers: int = dc_field(default_factory=default_workers)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        # 工作线程数与输出位置不影响结果
        data.pop("workers")
        data.pop("out_dir")
        return data

    @classmethod
    def from_json(cls, path: str) -> "RunConfig":
        data = load_json(path)
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        unknown = set(data) - set(known)
        if unknown:
            raise ValidationError(f"未知的配置项: {sorted(unknown)}")
        return cls(**known)
