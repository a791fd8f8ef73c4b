import logging
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

if True:
    from archgamma import RankinSelbergData, TestFunctionSuite
    from errors import BudgetError, ValidationError
    from numberfield import make_quadratic, make_rational, parse_modulus
    from sadic import (GS_star_value, SIdele, SUnitIndex, bm_unit_sum, default_index,
                       family_scale, idele_of_size, scale_by_unit, verify_GS_corollary)

logger = logging.getLogger('Test.SAdic')


@pytest.mark.trivial
def test_bm_sum_rank_one():
    """测试 r = 1 时单位和为 w·min(1, |x|^{−A})"""
    qi = make_quadratic(-1)
    assert abs(bm_unit_sum(qi, 2.0, [2.0])["sum"] - 4 / 16) < 1e-15, "Q(i): |2|_C = 4"
    assert bm_unit_sum(qi, 2.0, [0.5])["sum"] == 4.0, "|x| < 1 时每项为 1"
    Q = make_rational()
    assert abs(bm_unit_sum(Q, 3.0, [-2.0])["sum"] - 2 / 8) < 1e-15, "Q: w = 2"


@pytest.mark.trivial
def test_bm_sum_real_quadratic():
    """测试 Q(√5) 上 x = (1, 1) 的几何级数"""
    q5 = make_quadratic(5)
    res = bm_unit_sum(q5, 2.0, [1.0, 1.0])
    phi = (1 + math.sqrt(5)) / 2
    expected = 2 * (1 + 2 / (phi ** 2 - 1))
    assert abs(res["sum"] - expected) < 1e-10, f"单位和应为 {expected:.10f}，得到 {res['sum']:.10f}"
    assert abs(expected - 2 * math.sqrt(5)) < 1e-12


@pytest.mark.trivial
def test_bm_sum_unit_invariance():
    """测试 x 乘以单位后单位和不变"""
    q5 = make_quadratic(5)
    eps = q5.fundamental_units[0].embeddings
    for x in ([3.0, 0.2], [0.01, 50.0]):
        base = bm_unit_sum(q5, 2.0, x)["sum"]
        shifted = bm_unit_sum(q5, 2.0, [x[0] * eps[0], x[1] * eps[1]])["sum"]
        assert abs(base - shifted) < 1e-10 * base, "单位和应在单位作用下不变"


@pytest.mark.trivial
def test_bm_sum_envelope_constant():
    """测试单位和被包络控制"""
    q5 = make_quadratic(5)
    constants = [bm_unit_sum(q5, 2.0, [s, 1.0])["C"] for s in np.geomspace(1e-3, 1e3, 13)]
    logger.info(f"包络常数最大值 {max(constants):.4f}")
    assert max(constants) < 20, "单位和与包络之比应有界"
    with pytest.raises(ValidationError):
        bm_unit_sum(q5, 0.5, [1.0, 1.0])
    with pytest.raises(ValidationError):
        bm_unit_sum(q5, 2.0, [1.0, 0.0])


@pytest.mark.trivial
def test_s_idele_size():
    """测试 |x|_S 的计算"""
    q5 = make_quadratic(5)
    label = parse_modulus(q5, "11.1").factors[0][0]
    x = SIdele((2.0 + 0j, 3.0 + 0j), ((label, 2, 1),))
    assert abs(x.abs_S(q5) - 6.0 / 121) < 1e-15, "|x|_S = ∏|x_v|·N(p)^{−v}"


@pytest.mark.trivial
def test_s_unit_index():
    """测试 S 单位枚举"""
    q5 = make_quadratic(5)
    label = parse_modulus(q5, "11.1").factors[0][0]
    index = SUnitIndex.build(q5, [label], 2, [(-1, 1)])
    exps = index.exponents()
    assert exps.shape == (2 * 5 * 3, 3), "指数向量个数应为 w·(2k+1)·(ℓ 范围)"
    assert np.all(index.valuations(exps, label) == exps[:, 2]), "p 进赋值应等于 ℓ"
    # 单位部分 u·ϖ^{−ℓ} 总是可逆
    codes = index.unit_codes(exps, label, 1)
    assert np.all(codes % 11 != 0), "单位部分在 O/p 中应可逆"
    with pytest.raises(BudgetError):
        SUnitIndex.build(q5, [], 10 ** 6, []).exponents()


@pytest.mark.trivial
def test_family_scale_and_idele():
    """测试 V = φ(c)T^{r−1} 与给定大小的理元"""
    q5 = make_quadratic(5)
    suite = TestFunctionSuite(q5, 0.9, 20.0, 0, parse_modulus(q5, "7"))
    assert family_scale(q5, suite) == 48 * 20.0, "V 应为 φ(c)·T"
    x = idele_of_size(q5, 37.0, suite)
    assert abs(x.abs_S(q5) - 37.0) < 1e-12, "理元大小不对"


def test_GS_star_torsion_invariance():
    """测试 Q(i) 上 G*_S 在单位根作用下不变"""
    qi = make_quadratic(-1)
    suite = TestFunctionSuite(qi, 0.9, 10.0)
    rs = RankinSelbergData.trivial()
    a = GS_star_value(qi, SIdele((2.0 + 0j,)), suite, rs)
    b = GS_star_value(qi, SIdele((2j,)), suite, rs)
    assert a["count"] == 4, "Q(i) 的 S 单位只有 4 个单位根"
    assert abs(a["value"] - b["value"]) < 1e-8 * max(abs(a["value"]), 1e-12), \
        "G*_S(ix) 应等于 G*_S(x)"


@pytest.mark.slow
def test_GS_star_unit_invariance():
    """测试 Q(√5) 上 G*_S(εx) = G*_S(x)"""
    q5 = make_quadratic(5)
    suite = TestFunctionSuite(q5, 0.9, 4.0)
    rs = RankinSelbergData.trivial()
    x = idele_of_size(q5, 3.0, suite)
    k_max = default_index(q5, x, suite, rs).k_max
    a = GS_star_value(q5, x, suite, rs, default_index(q5, x, suite, rs, k_max + 1))
    y = scale_by_unit(q5, x, 0, suite)
    b = GS_star_value(q5, y, suite, rs, default_index(q5, y, suite, rs, k_max + 1))
    logger.info(f"G*_S(x) = {a['value']:.6e}, G*_S(εx) = {b['value']:.6e}")
    slack = 1e-6 * max(abs(a["value"]), 1e-10) + 2 * (a["tail"] + b["tail"])
    assert abs(a["value"] - b["value"]) < slack, \
        "G*_S 应在单位作用下不变"


@pytest.mark.slow
def test_GS_corollary_rows():
    """测试包络检验的输出结构"""
    qi = make_quadratic(-1)
    suite = TestFunctionSuite(qi, 0.9, 10.0)
    sizes = [0.5, 2.0, 8.0, 64.0]
    rows = verify_GS_corollary(qi, suite, RankinSelbergData.trivial(), sizes)
    assert [row["size"] for row in rows] == sizes, "每个大小一行"
    assert max(row["decay"] for row in rows) == 1.0, "衰减按峰值归一化"
    assert all(np.isfinite(row["ratio"]) for row in rows), "比值应有限"


def main():
    """运行所有测试"""
    logging.basicConfig(level=logging.INFO)
    print("\n=== 运行 S 单位求和测试 ===")
    test_bm_sum_rank_one()
    test_bm_sum_real_quadratic()
    test_bm_sum_unit_invariance()
    test_s_unit_index()
    test_GS_star_torsion_invariance()


if __name__ == "__main__":
    main()
