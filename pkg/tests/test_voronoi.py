import logging
import math
import os
import sys

import mpmath
import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

if True:
    from archgamma import RankinSelbergData, TestFunctionSuite, g0
    from config import default_seed
    from errors import PoleError, UnsupportedFieldError, ValidationError
    from numberfield import make_quadratic, make_rational, parse_modulus
    from voronoi import (RadialTransform, evaluation_point, f0_hat, global_G, global_G_star,
                         h_hat, nonvanishing_average, rs_coefficients, verify_grid,
                         verify_summation)

logger = logging.getLogger('Test.Voronoi')


@pytest.mark.trivial
def test_evaluation_point():
    """测试 x_{v0} = Y^{1/d}，|x|_A = Y"""
    q5 = make_quadratic(5)
    assert evaluation_point(q5, 0.3) == (0.3, 1.0), "实位 x_{v0} = Y"
    qi = make_quadratic(-1)
    x = evaluation_point(qi, 0.25)
    assert abs(x[0] - 0.5) < 1e-15, "复位 x_{v0} = √Y"
    for Y in (0.0, 1.5, -0.2):
        with pytest.raises(ValidationError):
            evaluation_point(q5, Y)


@pytest.mark.trivial
def test_rs_coefficients():
    """测试 Rankin-Selberg 局部系数"""
    rs = RankinSelbergData.trivial()
    assert all(rs_coefficients(rs, "7", r) == 1.0 for r in range(5)), "平凡数据的系数恒为 1"
    with pytest.raises(ValidationError):
        rs_coefficients(rs, "7", -1)


@seed(default_seed())
@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(0.0, 2 * math.pi, allow_nan=False), min_size=1, max_size=3))
def test_rs_coefficients_are_nonnegative(angles):
    """测试酉 Satake 参数下 λ_{π×π̃}(p^r) ≥ 0，r ≤ 6"""
    satake = tuple(complex(math.cos(a), math.sin(a)) for a in angles)
    rs = RankinSelbergData(n=len(satake), default_satake=satake)
    values = [rs_coefficients(rs, "7", r) for r in range(7)]
    assert abs(values[0] - 1.0) < 1e-12
    assert abs(values[1] - abs(sum(satake)) ** 2) < 1e-9, "λ(p) = |Σα|²"
    assert all(v >= -1e-9 for v in values), f"Satake 参数 {satake} 给出负系数 {values}"


@pytest.mark.trivial
def test_transform_profiles():
    """测试 F₀ 与 ĥ 的基本性质"""
    mass = 2 * float(mpmath.quad(lambda w: g0(float(w)), [0, 0.25, 1]))
    assert abs(f0_hat(np.array([0.0]))[0] - mass) < 1e-7, "F₀(0) 应等于 2∫g₀"
    big, small = np.abs(f0_hat(np.array([400.0, 1.0])))
    assert big < 1e-3 * small, "F₀ 应快速衰减"
    with pytest.raises(PoleError):
        h_hat(np.array([1.0]), 1.0, 1)
    values = np.abs(h_hat(np.array([1.0, 200.0]), 1.5, 1))
    assert values[1] < 1e-3 * values[0], "ĥ 应快速衰减"


@pytest.mark.trivial
def test_radial_transform_spline():
    """测试样条表与精确值一致"""
    table = RadialTransform(f0_hat, 1e-10, "F₀")
    k = np.array([0.1, 3.3, 17.77, 40.05])
    assert np.allclose(table(k), f0_hat(k), atol=1e-8), "样条与精确变换不符"
    assert table(np.array([table.k_end + 10.0]))[0] == 0.0, "k_end 之外按 0 处理"


@pytest.mark.trivial
def test_global_G_positivity():
    """测试 G(x) 不小于 α = 1 的单项"""
    q5 = make_quadratic(5)
    rs = RankinSelbergData.trivial()
    for Y in (0.1, 0.3, 0.8):
        suite = TestFunctionSuite(q5, 0.9, 20.0)
        G = global_G(q5, Y, suite, rs)
        logger.info(f"Y = {Y}: G = {G['value']:.6f}, 单项 {G['identity_term']:.6f}")
        assert G["value"] >= G["identity_term"] * (1 - 1e-12), "G 应不小于恒等项"
        assert G["count"] >= 1


@pytest.mark.trivial
def test_G_star_needs_unit_modulus():
    """测试 Poisson 模式拒绝非平凡模数"""
    q5 = make_quadratic(5)
    suite = TestFunctionSuite(q5, 0.9, 20.0, 0, parse_modulus(q5, "7"))
    with pytest.raises(UnsupportedFieldError):
        global_G_star(q5, 0.3, suite, RankinSelbergData.trivial())
    with pytest.raises(ValidationError):
        global_G_star(q5, 0.3, TestFunctionSuite(q5, 0.9, 20.0), RankinSelbergData.trivial(), 0.0)


def test_summation_formula_rational():
    """测试 Q 上的求和公式"""
    Q = make_rational()
    for Y, beta in ((0.3, 0.9), (0.5, 1.5)):
        ev = verify_summation(Q, 10.0, Y, beta)
        logger.info(f"Q Y = {Y} β = {beta}: G = {ev.G:.10f}, 残差 {ev.residual:.2e}")
        assert ev.residual < 1e-4, f"Q 上 Y = {Y}, β = {beta} 的求和公式残差 {ev.residual:.2e} 过大"
        assert ev.counts["characters"] == 1, "Q 的谱展开只有平凡特征"


@pytest.mark.trivial
def test_summation_rejects_rankin_selberg_data():
    """测试 n ≥ 2 时拒绝数值验证"""
    rs = RankinSelbergData.from_dict({"n": 2})
    with pytest.raises(ValidationError):
        verify_summation(make_rational(), 10.0, 0.3, 0.9, rs=rs)


@pytest.mark.slow
@pytest.mark.parametrize("D", [5, -1])
def test_summation_formula_grid(D):
    """测试 Q(√5) 与 Q(i) 上 3×3 (Y, T) 网格的求和公式，β = 1.5"""
    F = make_quadratic(D)
    rows = verify_grid(F, [10.0, 20.0, 30.0], [0.3, 0.5, 0.7], 1.5, workers=2)
    assert len(rows) == 9
    for row in rows:
        logger.info(f"{F.name} T = {row['T']} Y = {row['Y']}: 残差 {row['residual']:.2e}")
        assert row["residual"] < 1e-3, f"{F.name} T = {row['T']}, Y = {row['Y']} 的残差过大"


@pytest.mark.slow
@pytest.mark.parametrize("D, T, Y, beta", [(5, 50.0, 0.3, 1.5), (-1, 50.0, 0.5, 1.3)])
def test_summation_formula_reference_points(D, T, Y, beta):
    """测试 Q(√5) 与 Q(i) 上 T = 50 的单点求和公式"""
    F = make_quadratic(D)
    ev = verify_summation(F, T, Y, beta, workers=2)
    logger.info(f"{F.name} T = {T} Y = {Y} β = {beta}: 残差 {ev.residual:.2e}")
    assert ev.residual < 1e-3, f"{F.name} 的求和公式残差 {ev.residual:.2e} 过大"
    assert isinstance(ev.R_beta, float), "R_β 应为 Python float"


def test_summation_formula_gaussian_small():
    """测试 Q(i) 上的求和公式可以计算"""
    ev = verify_summation(make_quadratic(-1), 10.0, 0.3, 1.5)
    assert isinstance(ev.R_beta, float) and isinstance(ev.R_1, float), "留数项应为 Python float"
    assert ev.counts["characters"] == 1, "Q(i) 的谱展开只有平凡特征"


@pytest.mark.trivial
def test_nonvanishing_beta_range():
    """测试 β 范围检查"""
    q5 = make_quadratic(5)
    for beta in (1.2, 1.0, -0.1):
        with pytest.raises(ValidationError):
            nonvanishing_average(q5, 200.0, beta)


@pytest.mark.slow
def test_nonvanishing_average_real_quadratic():
    """测试 Q(√5)、T = 200 的非消失平均"""
    q5 = make_quadratic(5)
    report = nonvanishing_average(q5, 200.0, 0.9, workers=2)
    logger.info(f"V = {report['V']:.3f}, 质量 {report['mass']:.3f}, 交叉检验 {report['cross_check']:.2e}")
    assert report["mode"] == "exact"
    assert abs(report["V"] - 30.6) < 0.1, f"V 应约为 30.6，得到 {report['V']:.3f}"
    assert abs(report["Y"] - 1 / report["V"]) < 1e-12, "n = 1 时 Y = V^{−1}"
    assert report["positivity"], "G 应不小于恒等项"
    assert report["count"] >= 1 and report["convexity_max"] is not None
    assert report["cross_check"] < 1e-3, f"两条路线的谱和相差 {report['cross_check']:.2e}"
    assert report["count_ok"], f"非零项 {report['count']} 少于 V^{{1/2 − ε}}"
    assert report["mass_ok"], f"质量 {report['mass']:.3f} 低于 V^{{0.95}} = {report['mass_target']:.3f}"
    assert report["family_members"] <= report["characters"], "族应是谱展开特征集的子集"


def main():
    """运行所有测试"""
    logging.basicConfig(level=logging.INFO)
    print("\n=== 运行求和公式测试 ===")
    test_evaluation_point()
    test_rs_coefficients()
    test_rs_coefficients_are_nonnegative()
    test_transform_profiles()
    test_global_G_positivity()
    test_summation_formula_rational()


if __name__ == "__main__":
    main()
