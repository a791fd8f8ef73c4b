"""HeckeLab 异常层次

库代码只负责抛出异常，退出码的映射集中在 main.dispatch 中。
"""
from typing import Optional, Sequence

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3
EXIT_USAGE = 64


class HeckeLabError(Exception):
    """所有 HeckeLab 错误的基类"""
    exit_code = EXIT_FAILURE


class ValidationError(HeckeLabError, ValueError):
    """输入数据不合法（非无平方因子的 D、分歧素数出现在模数中等）"""
    exit_code = EXIT_VALIDATION


class UnsupportedFieldError(ValidationError):
    """当前数域不支持该操作（例如类数 h > 1 时的理想求值）"""


class DomainError(ValidationError):
    """理想与模数不互素"""


class PoleError(ValidationError):
    """在极点附近求值"""

    def __init__(self, message: str, point: complex = None):
        super().__init__(message)
        self.point = point


class InadmissibleHyperplaneError(ValidationError):
    """超平面不可容许：Σα = 0，矩阵 M_h 奇异"""

    def __init__(self, alpha: Sequence, det: float = 0.0):
        super().__init__(
            f"超平面不可容许: 系数 {list(alpha)} 之和为 0 (det = {det})")
        self.alpha = tuple(alpha)
        self.det = det


class BudgetError(HeckeLabError):
    """暴力枚举或求积超出预算"""
    exit_code = EXIT_BUDGET

    def __init__(self, message: str, needed: Optional[float] = None,
                 budget: Optional[float] = None, tail: Optional[float] = None):
        super().__init__(message)
        self.needed = needed
        self.budget = budget
        self.tail = tail


class BoundViolation(HeckeLabError):
    """数值验证的界（如 Deligne 界）不成立"""

    def __init__(self, message: str, value: float = None, bound: float = None):
        super().__init__(message)
        self.value = value
        self.bound = bound
