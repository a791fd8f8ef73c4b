import logging
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

if True:
    from charlattice import (Hyperplane, admissibility_matrix, compare_hyperplanes,
                             covolume_prediction, enumerate_points, shifted_lattice,
                             slice_volume)
    from errors import BudgetError, InadmissibleHyperplaneError, ValidationError
    from numberfield import make_quadratic, make_rational

logger = logging.getLogger('Test.CharLattice')

LOG_EPS = math.log((1 + math.sqrt(5)) / 2)


def _trivial_lattice(F, h):
    return shifted_lattice(F, h, [(u, 0.0) for u in F.units()])


@pytest.mark.trivial
def test_admissibility_determinant():
    """测试 τ_{v0} = 0 的可容许矩阵行列式为 log ε"""
    q5 = make_quadratic(5)
    _, det = admissibility_matrix(q5, Hyperplane.distinguished(2))
    assert abs(abs(det) - LOG_EPS) < 1e-9, f"|det M_h| 应为 log ε，得到 {det}"


@pytest.mark.trivial
def test_inadmissible_hyperplane():
    """测试系数和为 0 的超平面被拒绝"""
    q5 = make_quadratic(5)
    with pytest.raises(InadmissibleHyperplaneError):
        admissibility_matrix(q5, Hyperplane((1, -1)))
    with pytest.raises(ValidationError):
        Hyperplane.distinguished(2, 5)


@pytest.mark.trivial
def test_trivial_lattice_spacing():
    """测试平凡 δ 的格沿 τ_1 轴，间距 2π/log ε"""
    q5 = make_quadratic(5)
    L = _trivial_lattice(q5, Hyperplane.distinguished(2))
    points = enumerate_points(L, 100.0)
    spacing = 2 * math.pi / LOG_EPS
    assert np.all(points[:, 0] == 0), "τ_{v0} 分量应为 0"
    assert len(points) == 15, f"T = 100 时应有 15 个格点，得到 {len(points)}"
    gaps = np.diff(points[:, 1])
    assert np.allclose(gaps, spacing, atol=1e-9), "相邻格点的间距应为 2π/log ε"
    assert abs(L.covolume - spacing) < 1e-9, "余体积应等于间距"
    logger.info(f"间距 {spacing:.4f}")


@pytest.mark.trivial
def test_shifted_lattice_half_step():
    """测试 δ(ε) = −1 时格平移半个间距"""
    q5 = make_quadratic(5)
    eps = q5.fundamental_units[0]
    L = shifted_lattice(q5, Hyperplane.distinguished(2), [(q5.torsion, 0.0), (eps, math.pi)])
    points = enumerate_points(L, 100.0)
    smallest = float(np.min(np.abs(points[:, 1])))
    assert abs(smallest - math.pi / LOG_EPS) < 1e-9, f"最小 |τ_1| 应为 π/log ε，得到 {smallest}"
    assert np.all(L.residuals(points) < 1e-9), "格点应满足相容性条件"


@pytest.mark.trivial
def test_infeasible_torsion_constraint():
    """测试 δ(−1) = −1 的纤维为空"""
    q5 = make_quadratic(5)
    eps = q5.fundamental_units[0]
    L = shifted_lattice(q5, Hyperplane.distinguished(2), [(q5.torsion, math.pi), (eps, 0.0)])
    assert not L.feasible, "挠单位约束不可满足时纤维应不可行"
    assert len(enumerate_points(L, 100.0)) == 0, "不可行纤维不应有格点"


@pytest.mark.trivial
def test_slice_volume_and_prediction():
    """测试截面体积与点数预测"""
    q5 = make_quadratic(5)
    h = Hyperplane.distinguished(2)
    assert abs(slice_volume(q5, h, 100.0) - 200.0) < 1e-9, "τ_{v0} = 0 截面长度应为 2T"
    prediction = covolume_prediction(q5, h, 100.0)
    assert abs(prediction - 200 * LOG_EPS / (2 * math.pi)) < 1e-9, "点数预测应为 2T/间距"

    trace_zero = covolume_prediction(q5, Hyperplane.trace_zero(2), 100.0)
    assert abs(trace_zero - 2 * 100 * LOG_EPS / math.pi) < 1e-9, "迹零超平面的点数预测不对"


def test_compare_hyperplanes_counts_follow_prediction():
    """测试两种超平面下点数都接近预测"""
    q5 = make_quadratic(5)
    rows = compare_hyperplanes(q5, [Hyperplane.distinguished(2), Hyperplane.trace_zero(2)], 1000.0)
    for row in rows:
        ratio = row["points"] / row["predicted"]
        logger.info(f"{row['hyperplane']}: {row['points']} 点, 预测 {row['predicted']:.2f}")
        assert 0.9 < ratio < 1.1, f"{row['hyperplane']} 的点数与预测偏差过大"


@pytest.mark.trivial
def test_rank_one_fields():
    """测试 r = 1 时只有原点"""
    for F in (make_rational(), make_quadratic(-1)):
        L = _trivial_lattice(F, Hyperplane.distinguished(1))
        points = enumerate_points(L, 50.0)
        assert points.shape == (1, 1) and points[0, 0] == 0, f"{F.name} 只应有原点"


@pytest.mark.trivial
def test_enumeration_budget():
    """测试候选格点超出预算时报 BudgetError"""
    q5 = make_quadratic(5)
    L = _trivial_lattice(q5, Hyperplane.distinguished(2))
    with pytest.raises(BudgetError) as info:
        enumerate_points(L, 100.0, budget=5)
    assert info.value.needed > info.value.budget == 5, "错误应带上所需点数与预算"
    assert len(enumerate_points(L, 100.0, budget=info.value.needed)) == 15, "预算恰好够用时应正常枚举"


def main():
    """运行所有测试"""
    logging.basicConfig(level=logging.INFO)
    print("\n=== 运行特征格测试 ===")
    test_admissibility_determinant()
    test_trivial_lattice_spacing()
    test_shifted_lattice_half_step()
    test_slice_volume_and_prediction()
    test_compare_hyperplanes_counts_follow_prediction()
    test_enumeration_budget()


if __name__ == "__main__":
    main()
