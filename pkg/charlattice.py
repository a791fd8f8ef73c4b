"""单位对数格、可容许超平面与平移格点枚举"""
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np
from scipy.linalg import null_space
from scipy.spatial import ConvexHull, HalfspaceIntersection

from errors import BudgetError, InadmissibleHyperplaneError, ValidationError
from numberfield import NumberField, Unit

logger = logging.getLogger('HeckeLab.Lattice')

TWO_PI = 2 * math.pi
COMPAT_TOL = 1e-9
ENUM_BUDGET = 10 ** 6


def principal_arg(z) -> np.ndarray:
    """主辐角，取值 (−π, π]"""
    a = np.angle(z)
    return np.where(a <= -math.pi + 1e-12, a + TWO_PI, a)


def wrap_2pi(x) -> np.ndarray:
    """x 到 2πZ 的距离（带符号，落在 (−π, π]）"""
    x = np.asarray(x, dtype=float)
    return x - TWO_PI * np.round(x / TWO_PI)


@dataclass(frozen=True)
class Hyperplane:
    """超平面 Σ α_v τ_v = 0"""
    alpha: Tuple[Fraction, ...]

    @classmethod
    def distinguished(cls, r: int, v0: int = 0) -> "Hyperplane":
        """τ_{v0} = 0"""
        if not 0 <= v0 < r:
            raise ValidationError(f"特殊位 v0 = {v0} 超出范围 [0, {r})")
        return cls(tuple(Fraction(int(i == v0)) for i in range(r)))

    @classmethod
    def trace_zero(cls, r: int) -> "Hyperplane":
        return cls(tuple(Fraction(1) for _ in range(r)))

    @property
    def admissible(self) -> bool:
        return sum(self.alpha) != 0

    def as_array(self) -> np.ndarray:
        return np.array([float(a) for a in self.alpha])

    def __str__(self):
        return ",".join(str(a) for a in self.alpha)


def admissibility_matrix(F: NumberField, h: Hyperplane) -> Tuple[np.ndarray, float]:
    """M_h：前 r−1 行为基本单位的对数向量，最后一行为 α

    Returns:
        (M_h, det M_h)

    Raises:
        InadmissibleHyperplaneError: Σα = 0
    """
    if len(h.alpha) != F.r:
        raise ValidationError(f"超平面需要 {F.r} 个系数，得到 {len(h.alpha)} 个")
    rows = [list(u.log_vector) for u in F.fundamental_units]
    rows.append(list(h.as_array()))
    M = np.array(rows, dtype=float)
    det = float(np.linalg.det(M))
    if not h.admissible:
        raise InadmissibleHyperplaneError(h.alpha, det)
    return M, det


@dataclass
class ShiftedLattice:
    """h 中的平移格 s₀ + L_h"""
    F: NumberField
    h: Hyperplane
    basis: np.ndarray            # r × (r−1)
    shift: np.ndarray            # r
    det: float
    feasible: bool = True
    constraints: List[Tuple[Tuple[float, ...], float]] = field(default_factory=list)

    @property
    def r(self) -> int:
        return self.F.r

    @property
    def covolume(self) -> float:
        """L_h 在 h 中的真实余体积 (2π)^{r−1}‖α‖/|det M_h|"""
        if self.r == 1:
            return 1.0
        gram = self.basis.T @ self.basis
        return math.sqrt(abs(float(np.linalg.det(gram))))

    def residuals(self, points: np.ndarray) -> np.ndarray:
        """每个点在每个单位约束上的 2πZ 残差"""
        if len(points) == 0 or not self.constraints:
            return np.zeros((len(points), 0))
        logs = np.array([c[0] for c in self.constraints])
        thetas = np.array([c[1] for c in self.constraints])
        return np.abs(wrap_2pi(points @ logs.T + thetas))


def shifted_lattice(F: NumberField, h: Hyperplane,
                    constraints: Sequence[Tuple[Unit, float]]) -> ShiftedLattice:
    """求解相容性条件 τ(log u) + arg δ(u) ∈ 2πZ 在 h 上的解集

    Args:
        F: 数域
        h: 可容许超平面
        constraints: (单位, arg δ(u)) 列表，须包含挠生成元和全部基本单位

    Returns:
        ShiftedLattice；挠单位上 arg δ(ζ) ∉ 2πZ 时 feasible = False
    """
    M, det = admissibility_matrix(F, h)
    r = F.r
    Minv = np.linalg.inv(M)
    stored = [(tuple(u.log_vector), float(theta)) for u, theta in constraints]

    for u, theta in constraints:
        if u.order and abs(wrap_2pi(theta)) > COMPAT_TOL:
            logger.debug(f"挠单位约束不可满足: arg δ(ζ) = {theta:.6f}")
            return ShiftedLattice(F, h, np.zeros((r, r - 1)), np.zeros(r), det,
                                  feasible=False, constraints=stored)

    thetas = np.zeros(r)
    fundamental = [(u, theta) for u, theta in constraints if not u.order]
    if len(fundamental) != r - 1:
        raise ValidationError(f"需要 {r - 1} 个基本单位约束，得到 {len(fundamental)} 个")
    # 约束顺序与 M_h 的行顺序一致
    for j, unit in enumerate(F.fundamental_units):
        for u, theta in fundamental:
            if u.log_vector == unit.log_vector:
                thetas[j] = theta
                break
    basis = TWO_PI * Minv[:, :r - 1]
    shift = Minv @ (-thetas)
    return ShiftedLattice(F, h, basis, shift, det, feasible=True, constraints=stored)


def box_bounds(F: NumberField, T: float) -> np.ndarray:
    """最大范数球 |τ_v| ≤ T^{1/[K_v:R]}"""
    return np.array([T ** (1.0 / d) for d in F.place_degrees])


def enumerate_points(L: ShiftedLattice, T: float, budget: int = ENUM_BUDGET) -> np.ndarray:
    """枚举盒子 B(0, T) 中的格点，按字典序排列

    Args:
        budget: 候选格点个数的上限

    Returns:
        形状 (N, r) 的数组；不可行时为空
    """
    r = L.r
    if T < 0:
        raise ValidationError("T 必须 ≥ 0")
    if not L.feasible:
        return np.zeros((0, r))
    bounds = box_bounds(L.F, T)
    if r == 1:
        pts = L.shift[None, :]
    else:
        P = np.linalg.pinv(L.basis)
        center = P @ (-L.shift)
        radius = np.abs(P) @ bounds
        ranges = [np.arange(math.floor(c - rad) - 1, math.ceil(c + rad) + 2)
                  for c, rad in zip(center, radius)]
        needed = math.prod(len(rg) for rg in ranges)
        if needed > budget:
            raise BudgetError(f"T = {T} 时需要检查 {needed} 个候选格点，超出预算 {budget}",
                              needed=needed, budget=budget)
        grids = np.meshgrid(*ranges, indexing="ij")
        ks = np.stack([g.ravel() for g in grids], axis=1).astype(float)
        pts = L.shift[None, :] + ks @ L.basis.T
    inside = np.all(np.abs(pts) <= bounds[None, :] + 1e-9, axis=1)
    pts = pts[inside]
    pts = np.where(np.abs(pts) < 1e-12, 0.0, pts)
    order = np.lexsort(pts.T[::-1])
    return pts[order]


def slice_volume(F: NumberField, h: Hyperplane, T: float) -> float:
    """vol(B(0, T) ∩ h)，(r−1) 维体积"""
    r = F.r
    if r == 1:
        return 1.0
    if T <= 0:
        return 0.0
    bounds = box_bounds(F, T)
    alpha = h.as_array()
    if r == 2:
        direction = np.array([alpha[1], -alpha[0]]) / np.linalg.norm(alpha)
        return 2 * min(b / abs(d) for b, d in zip(bounds, direction) if abs(d) > 1e-15)
    Q = null_space(alpha[None, :])
    halfspaces = np.vstack([np.hstack([Q, -bounds[:, None]]),
                            np.hstack([-Q, -bounds[:, None]])])
    hs = HalfspaceIntersection(halfspaces, np.zeros(r - 1))
    return float(ConvexHull(hs.intersections).volume)


def covolume_prediction(F: NumberField, h: Hyperplane, T: float) -> float:
    """渐近点数预测 vol(B(0,T) ∩ h) / covol(L_h)"""
    M, det = admissibility_matrix(F, h)
    covol = TWO_PI ** (F.r - 1) * float(np.linalg.norm(h.as_array())) / abs(det)
    if F.r == 1:
        covol = 1.0
    return slice_volume(F, h, T) / covol


def compare_hyperplanes(F: NumberField, hyperplanes: Sequence[Hyperplane], T: float) -> list:
    """比较不同超平面下的平凡 δ 格：点数、余体积、预测值"""
    rows = []
    for h in hyperplanes:
        constraints = [(u, 0.0) for u in F.units()]
        L = shifted_lattice(F, h, constraints)
        pts = enumerate_points(L, T)
        rows.append({
            "hyperplane": str(h),
            "det": L.det,
            "covolume": L.covolume,
            "points": len(pts),
            "predicted": covolume_prediction(F, h, T),
            "max_norm": float(np.max(np.abs(pts))) if len(pts) else 0.0,
        })
    return rows
