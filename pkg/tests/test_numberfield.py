import logging
import math
import os
import sys

import numpy as np
import pytest
from hypothesis import assume, given, seed, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

if True:
    from config import default_seed
    from errors import UnsupportedFieldError, ValidationError
    from numberfield import (ResidueRing, euler_phi, euler_phi_bruteforce, factor_element,
                             ideal_counts, make_custom, make_quadratic, make_rational,
                             parse_modulus, prime_labels, valuation, zeta_residue_series)

logger = logging.getLogger('Test.NumberField')


@pytest.mark.trivial
def test_quadratic_invariants():
    """测试二次域的判别式、调节子与单位"""
    q5 = make_quadratic(5)
    assert q5.disc == 5, "Q(√5) 的判别式应为 5"
    assert abs(q5.regulator - 0.4812118) < 1e-6, "Q(√5) 的调节子应为 log((1+√5)/2)"
    assert q5.class_number == 1 and q5.w == 2, "Q(√5) 应为 h = 1, w = 2"
    assert q5.r1 == 2 and q5.r2 == 0 and q5.r == 2, "Q(√5) 有两个实位"

    q2 = make_quadratic(2)
    assert q2.disc == 8, "Q(√2) 的判别式应为 8"
    assert abs(q2.regulator - 0.8813736) < 1e-6, "Q(√2) 的调节子应为 log(1+√2)"

    qi = make_quadratic(-1)
    assert qi.disc == -4 and qi.w == 4, "Q(i) 有四个单位根"
    assert qi.place_degrees == (2,), "Q(i) 只有一个复位"

    qw = make_quadratic(-3)
    assert qw.w == 6, "Q(√−3) 有六个单位根"
    logger.info(f"Q(√5): R = {q5.regulator:.8f}")


@pytest.mark.trivial
def test_non_squarefree_rejected():
    """测试非无平方因子的 D 被拒绝"""
    with pytest.raises(ValidationError):
        make_quadratic(12)
    with pytest.raises(ValidationError):
        make_quadratic(1)


@pytest.mark.trivial
def test_unit_norms():
    """测试基本单位的范数为 ±1"""
    for D in (2, 3, 5, 13):
        F = make_quadratic(D)
        unit = F.fundamental_units[0]
        assert abs(abs(F.norm(*unit.coeffs)) - 1) < 1e-12, f"D = {D} 的基本单位范数应为 ±1"
        assert abs(sum(unit.log_vector)) < 1e-9, f"D = {D} 的单位对数向量之和应为 0"


@pytest.mark.trivial
def test_zeta_residues():
    """测试解析类数公式给出的留数"""
    assert abs(make_quadratic(-1).zeta_residue - math.pi / 4) < 1e-12, "Q(i) 的留数应为 π/4"
    assert abs(make_quadratic(5).zeta_residue - 0.430409) < 1e-6, "Q(√5) 的留数应约为 0.430409"
    assert make_rational().zeta_residue == 1.0, "Q 的留数应为 1"


@pytest.mark.trivial
def test_invariants_are_python_numbers():
    """测试类数与留数是 Python 的 int 与 float"""
    for D in (-1, -7, 5):
        F = make_quadratic(D)
        assert type(F.class_number) is int, f"D = {D} 的类数类型为 {type(F.class_number)}"
        assert type(F.zeta_residue) is float, f"D = {D} 的留数类型为 {type(F.zeta_residue)}"
    assert make_quadratic(-7).class_number == 1, "Q(√−7) 的类数应为 1"
    assert abs(make_quadratic(-7).zeta_residue - math.pi / math.sqrt(7)) < 1e-12, "Q(√−7) 的留数应为 π/√7"


def test_zeta_residue_series():
    """测试理想计数与类数公式的一致性"""
    for D in (-1, 5):
        F = make_quadratic(D)
        estimate = zeta_residue_series(F, 10 ** 6)
        logger.info(f"{F.name}: 级数 {estimate:.6f}, 公式 {F.zeta_residue:.6f}")
        assert abs(estimate - F.zeta_residue) < 1e-2, f"{F.name} 的级数估计偏离留数"


@pytest.mark.trivial
def test_ideal_counts_small_norms():
    """测试小范数理想的个数"""
    qi = make_quadratic(-1)
    counts = ideal_counts(qi, 30)
    # 2 分歧，5、13 分裂，3 惰性
    assert counts[1] == 1 and counts[2] == 1, "范数 1、2 各有一个理想"
    assert counts[3] == 0 and counts[9] == 1, "惰性素数 3 只贡献范数 9"
    assert counts[5] == 2 and counts[25] == 3, "分裂素数 5 的理想个数不对"

    q = make_rational()
    assert np.all(ideal_counts(q, 50)[1:] == 1), "Q 中每个正整数恰好对应一个理想"


@pytest.mark.trivial
def test_parse_modulus():
    """测试模数解析"""
    q5 = make_quadratic(5)
    c = parse_modulus(q5, "7")
    assert c.norm == 49 and c.phi == 48, "7 在 Q(√5) 中惰性"
    c = parse_modulus(q5, "11")
    assert len(c.factors) == 2 and c.phi == 100, "11 在 Q(√5) 中分裂"
    c = parse_modulus(q5, "11.1^2")
    assert c.norm == 121 and c.phi == 110, "11.1^2 的范数与 φ 不对"
    assert str(parse_modulus(q5, "1")) == "1", "单位理想应打印为 1"

    with pytest.raises(ValidationError):
        parse_modulus(q5, "5")
    with pytest.raises(ValidationError):
        parse_modulus(q5, "x^2")


@pytest.mark.trivial
def test_euler_phi_matches_bruteforce():
    """测试 φ(c) 的公式值与暴力计数"""
    q5 = make_quadratic(5)
    for text in ("7", "11", "11.2^2", "3*7", "11.1*11.2", "2^2*11.1"):
        c = parse_modulus(q5, text)
        assert euler_phi(q5, c) == euler_phi_bruteforce(q5, c), f"φ({text}) 公式与暴力计数不符"


@seed(default_seed())
@settings(max_examples=60, deadline=None)
@given(st.tuples(st.integers(-40, 40), st.integers(-40, 40)),
       st.tuples(st.integers(-40, 40), st.integers(-40, 40)))
def test_norm_and_factorization_are_multiplicative(x, y):
    """测试范数与素理想分解的乘性"""
    assume(x != (0, 0) and y != (0, 0))
    q5 = make_quadratic(5)
    xy = q5.mul(x, y)
    assert q5.norm(*xy) == q5.norm(*x) * q5.norm(*y), "范数应是乘性的"
    merged = dict(factor_element(q5, *x))
    for label, v in factor_element(q5, *y).items():
        merged[label] = merged.get(label, 0) + v
    assert factor_element(q5, *xy) == merged, "(xy) 的分解应是 (x) 与 (y) 分解之和"


@pytest.mark.trivial
def test_prime_labels_and_valuation():
    """测试素理想标签与赋值"""
    q5 = make_quadratic(5)
    labels = prime_labels(q5, 11)
    assert [str(lab) for lab in labels] == ["11.1", "11.2"], "11 的两个素因子标签不对"
    assert prime_labels(q5, 7)[0].tag == "inert", "7 应为惰性素数"
    assert prime_labels(q5, 5)[0].tag == "ramified", "5 应为分歧素数"

    # N(3 + ω) = 9 + 3 − 1 = 11
    factors = factor_element(q5, 3, 1)
    assert sum(factors.values()) == 1 and list(factors)[0].p == 11, "(3 + ω) 应为 11 之上的素理想"
    assert valuation(q5, prime_labels(q5, 7)[0], 49, 0) == 2, "v_7(49) 应为 2"


@pytest.mark.trivial
def test_residue_ring_arithmetic():
    """测试剩余环上的乘法与逆元"""
    q5 = make_quadratic(5)
    for label in prime_labels(q5, 7) + prime_labels(q5, 11):
        ring = ResidueRing(q5, label, 2)
        units = ring.units()
        inv = ring.inverse(units)
        assert np.all(ring.mul(units, inv) == ring.from_element(1)), f"{label} 的逆元不对"
        assert len(units) == label.norm * (label.norm - 1), f"{label}^2 的单位个数不对"


@pytest.mark.trivial
def test_custom_field_restrictions():
    """测试自定义数域不支持元素算术"""
    logs = [[0.8, -0.3, -0.5], [-0.2, 0.9, -0.7]]
    F = make_custom({"kind": "custom", "name": "cubic", "degree": 3, "r1": 3, "r2": 0,
                     "disc": 49, "units": [{"embeddings": [math.exp(v) for v in row]}
                                           for row in logs]})
    assert F.r == 3, "自定义数域的阿基米德位个数不对"
    with pytest.raises(UnsupportedFieldError):
        ideal_counts(F, 10)


def main():
    """运行所有测试"""
    logging.basicConfig(level=logging.INFO)
    print("\n=== 运行数域测试 ===")
    test_quadratic_invariants()
    test_zeta_residues()
    test_invariants_are_python_numbers()
    test_ideal_counts_small_norms()
    test_parse_modulus()
    test_euler_phi_matches_bruteforce()
    test_prime_labels_and_valuation()
    test_residue_ring_arithmetic()


if __name__ == "__main__":
    main()
