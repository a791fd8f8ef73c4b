import logging
import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

if True:
    from archgamma import RankinSelbergData
    from errors import BudgetError, ValidationError
    from expsums import (a0_coefficient, characters_mod, finite_gamma,
                         gauss_kloosterman_identity, gauss_sum, gstar_finite, hyper_kloosterman,
                         uniformizer)
    from numberfield import make_quadratic, make_rational, parse_modulus, residue_unit_group

logger = logging.getLogger('Test.ExpSums')


def _prime(F, text):
    return parse_modulus(F, text).factors[0][0]


@pytest.mark.trivial
def test_character_group_size():
    """测试特征个数等于单位群的阶"""
    q5 = make_quadratic(5)
    for text, e in (("7", 1), ("11.1", 2)):
        label = _prime(q5, text)
        chars = characters_mod(q5, label, e)
        assert len(chars) == residue_unit_group(q5, label, e).order, f"{text}^{e} 的特征个数不对"
        assert sum(chi.is_trivial for chi in chars) == 1, "恰有一个平凡特征"


def test_gauss_sum_modulus():
    """测试本原特征的 |G(δ)| = N(p)^{r/2}"""
    cases = [(make_rational(), "7", 2), (make_rational(), "5", 3),
             (make_quadratic(5), "7", 2), (make_quadratic(5), "11.1", 2),
             (make_quadratic(-1), "3", 1), (make_quadratic(-1), "13.2", 2)]
    for F, text, e in cases:
        label = _prime(F, text)
        for chi in characters_mod(F, label, e):
            if chi.conductor == 0:
                continue
            G = gauss_sum(F, chi)
            expected = label.norm ** (chi.conductor / 2)
            assert abs(abs(G) - expected) < 1e-8 * expected, \
                f"{F.name} {text}^{chi.conductor}: |G| = {abs(G):.10f}, 期望 {expected:.10f}"
        logger.info(f"{F.name} {text}^{e}: Gauss 和模长检查通过")


@pytest.mark.trivial
def test_gauss_sum_level_checks():
    """测试层级小于导子时报错"""
    Q = make_rational()
    label = _prime(Q, "7")
    primitive = [chi for chi in characters_mod(Q, label, 2) if chi.conductor == 2]
    with pytest.raises(ValidationError):
        gauss_sum(Q, primitive[0], 1)


@pytest.mark.trivial
def test_kloosterman_sum_over_arguments():
    """测试 Σ_a Kl_m(a) = (−1)^m 与 Deligne 界"""
    for F, text in ((make_rational(), "7"), (make_quadratic(5), "11.1"), (make_quadratic(5), "3")):
        label = _prime(F, text)
        units = residue_unit_group(F, label, 1).ring.units()
        for m in (1, 2, 3):
            values = np.array([hyper_kloosterman(F, m, a, label) for a in units])
            assert abs(values.sum() - (-1) ** m) < 1e-8, f"{F.name} {text}: Σ_a Kl_{m}(a) 不等于 (−1)^{m}"
            bound = m * label.norm ** ((m - 1) / 2)
            assert np.all(np.abs(values) <= bound * (1 + 1e-9)), "Kloosterman 和超出 Deligne 界"


@pytest.mark.trivial
def test_rational_kloosterman_is_real():
    """测试 Q 上的 Kl_2 为实数"""
    Q = make_rational()
    label = _prime(Q, "11")
    for a in range(1, 11):
        assert abs(hyper_kloosterman(Q, 2, a, label).imag) < 1e-9, f"Kl_2({a}) 应为实数"


@pytest.mark.trivial
def test_kloosterman_budget():
    """测试超出预算时抛出 BudgetError"""
    Q = make_rational()
    with pytest.raises(BudgetError):
        hyper_kloosterman(Q, 12, 1, _prime(Q, "7"))


def test_gauss_kloosterman_identity():
    """测试 Gauss 和幂与超 Kloosterman 和的恒等式"""
    cases = [(make_rational(), "7", 1), (make_rational(), "5", 2),
             (make_quadratic(5), "11.1", 1), (make_quadratic(5), "7", 1),
             (make_quadratic(-1), "5.1", 2), (make_rational(), "3", 2), (make_rational(), "7", 2),
             (make_quadratic(5), "11.1", 2)]
    for F, text, n in cases:
        result = gauss_kloosterman_identity(F, _prime(F, text), n)
        logger.info(f"{F.name} {text} n = {n}: lhs = {result['lhs']:.6f}, rhs = {result['rhs']:.6f}")
        assert result["relative"] < 1e-9, f"{F.name} {text} n = {n} 的恒等式不成立"
        assert abs(result["kloosterman"]) <= result["deligne_bound"] * (1 + 1e-12), \
            f"{F.name} {text} 的 Kloosterman 和超出 Deligne 界"


@pytest.mark.trivial
def test_finite_gamma_unramified():
    """测试 r = 0 时 γ 为 L 因子之比"""
    Q = make_rational()
    label = _prime(Q, "7")
    trivial = [chi for chi in characters_mod(Q, label, 1) if chi.conductor == 0][0]
    value = finite_gamma(2.0, trivial, RankinSelbergData.trivial())
    expected = (1 - 7 ** -2) / (1 - 7)
    assert abs(value - expected) < 1e-12, f"γ(2) = {value}, 期望 {expected}"


@pytest.mark.trivial
def test_finite_gamma_on_critical_line():
    """测试本原特征在 Re s = 1/2 上 |γ| = 1"""
    q5 = make_quadratic(5)
    label = _prime(q5, "11.1")
    for chi in characters_mod(q5, label, 2):
        if chi.conductor:
            value = finite_gamma(0.5 + 3j, chi, RankinSelbergData.trivial())
            assert abs(abs(value) - 1) < 1e-9, "临界线上 |γ| 应为 1"


@pytest.mark.trivial
def test_a0_coefficient_trivial_data():
    """测试平凡 π 的 A_0 系数"""
    Q = make_rational()
    label = _prime(Q, "7")
    rs = RankinSelbergData.trivial()
    for v in range(0, 5):
        assert abs(a0_coefficient(label, rs, v) - (1 - 1 / 7)) < 1e-12, f"A_0(ϖ^{v}) 不对"
    assert abs(a0_coefficient(label, rs, -1) + 1 / 7) < 1e-12, "A_0(ϖ^{-1}) 应为 −1/N"
    assert a0_coefficient(label, rs, -2) == 0, "v < −n² 时 A_0 应为 0"


@pytest.mark.trivial
def test_gstar_finite_support():
    """测试 A_ν 只在 v = −e·n² 处非零"""
    q5 = make_quadratic(5)
    label = _prime(q5, "11.1")
    rs = RankinSelbergData.trivial()
    for v in range(-3, 3):
        res = gstar_finite(q5, v, (1, 0), label, 2, rs)
        assert len(res["A"]) == 3, "应有 A_0, A_1, A_2"
        assert abs(res["A"][1]) < 1e-9, f"v = {v} 时 A_1 应为 0"
        if v != -2:
            assert res["A"][2] == 0, f"v = {v} 时 A_2 应为 0"
        else:
            assert abs(res["A"][2]) > 1e-6, "v = −2 时 A_2 不应为 0"
        assert abs(res["abs_x"] - 11.0 ** (-v)) < 1e-12, "|x|_p 不对"
    with pytest.raises(ValidationError):
        gstar_finite(q5, 0, (11, 0), label, 2, rs)


@pytest.mark.trivial
def test_uniformizer_generates_prime():
    """测试分裂素数的局部素元范数为 ±p"""
    q5 = make_quadratic(5)
    for label in parse_modulus(q5, "11").factors:
        a, b = uniformizer(q5, label[0])
        assert abs(q5.norm(a, b)) == 11, f"{label[0]} 的素元范数应为 ±11"
    assert math.isclose(abs(q5.norm(*uniformizer(q5, _prime(q5, "7")))), 49), "惰性素元取 7"


def main():
    """运行所有测试"""
    logging.basicConfig(level=logging.INFO)
    print("\n=== 运行指数和测试 ===")
    test_gauss_sum_modulus()
    test_kloosterman_sum_over_arguments()
    test_gauss_kloosterman_identity()
    test_finite_gamma_unramified()
    test_a0_coefficient_trivial_data()


if __name__ == "__main__":
    main()
