import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

import numpy as np

# 浮点数统一保留的有效位数
FLOAT_DIGITS = 15


def _encode(value: Any) -> Any:
    """把 numpy 与复数值转换为可确定序列化的结构"""
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_encode(v) for v in value.tolist()]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": _encode(float(value.real)), "im": _encode(float(value.imag))}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if value != value or value in (float("inf"), float("-inf")):
            return repr(value)
        return float(f"{value:.{FLOAT_DIGITS}g}")
    if hasattr(value, "to_dict"):
        return _encode(value.to_dict())
    return value


def dumps(payload: Dict[str, Any]) -> str:
    return json.dumps(_encode(payload), sort_keys=True, indent=2, ensure_ascii=False)


class ReportWriter:
    """JSON / CSV 报告输出器

    同样的配置和种子产生逐字节相同的文件：键排序、无时间戳。
    """

    def __init__(self, out_dir: str):
        self.out_dir = Path(out_dir)
        self.logger = logging.getLogger('HeckeLab.Report')

    def _path(self, name: str, suffix: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / name
        if path.suffix != suffix:
            path = path.with_suffix(suffix)
        return path

    def write_json(self, name: str, payload: Dict[str, Any],
                   units: Optional[Dict[str, str]] = None,
                   config: Optional[Dict[str, Any]] = None) -> Path:
        """写出 JSON 报告

        Args:
            name: 文件名
            payload: 数值内容
            units: 每个数值字段的单位/归一化说明
            config: 运行配置（RunConfig.to_dict()）
        """
        document = {"result": payload, "units": units or {}}
        if config is not None:
            document["config"] = config
        path = self._path(name, ".json")
        path.write_text(dumps(document) + "\n", encoding="utf-8")
        self.logger.info(f"报告已保存: {path}")
        return path

    def write_csv(self, name: str, header: Sequence[str],
                  rows: Iterable[Sequence[Any]]) -> Path:
        path = self._path(name, ".csv")
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_csv_cell(v) for v in row])
        self.logger.info(f"报告已保存: {path}")
        return path


def _csv_cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.{FLOAT_DIGITS}g}"
    if isinstance(value, (np.integer,)):
        return int(value)
    return value
