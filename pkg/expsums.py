"""p 进指数和

有限特征、加法特征 ψ_p、Gauss 和、超 Kloosterman 和、有限 gamma 因子以及 g*_p 的 A_ν 分解。
"""
import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from archgamma import RankinSelbergData, complete_homogeneous
from errors import BoundViolation, BudgetError, PoleError, ValidationError
from numberfield import (BRUTE_FORCE_BUDGET, NumberField, PrimeLabel, ResidueRing,
                         UnitGroup, residue_unit_group)

logger = logging.getLogger('HeckeLab.ExpSums')

KLOOSTERMAN_BUDGET = 10 ** 7
SERIES_CAP = 200
POLE_TOL = 1e-12


@dataclass(frozen=True)
class FiniteCharacter:
    """(O/p^e)^× 的特征 δ(g_i) = exp(2πi k_i / n_i)

    conductor 是使 δ 在 U^{(r)} 上平凡的最小 r。
    """
    F: NumberField
    label: PrimeLabel
    e: int
    k: Tuple[int, ...]
    conductor: int

    @property
    def group(self) -> UnitGroup:
        return residue_unit_group(self.F, self.label, self.e)

    @property
    def is_trivial(self) -> bool:
        return self.conductor == 0

    def phase(self, codes) -> np.ndarray:
        """δ(u) = exp(2πi·phase)，phase ∈ [0, 1)"""
        group = self.group
        exps = group.dlog(codes)
        frac = np.zeros(exps.shape[:-1])
        for j, (kj, nj) in enumerate(zip(self.k, group.orders)):
            frac = frac + exps[..., j] * kj / nj
        return frac % 1.0

    def __call__(self, codes) -> np.ndarray:
        return np.exp(2j * math.pi * self.phase(codes))

    def on_element(self, a, b=0) -> np.ndarray:
        codes = self.group.ring.from_element(a, b)
        return self(codes)

    def conj(self) -> "FiniteCharacter":
        orders = self.group.orders
        return FiniteCharacter(self.F, self.label, self.e,
                               tuple((-kj) % nj for kj, nj in zip(self.k, orders)),
                               self.conductor)

    def to_dict(self):
        return {"prime": str(self.label), "e": self.e, "k": list(self.k),
                "conductor": self.conductor}


@lru_cache(maxsize=256)
def _kernel_exponents(F: NumberField, label: PrimeLabel, e: int, r: int) -> np.ndarray:
    """U^{(r)} / U^{(e)} 中元素的离散对数"""
    group = residue_unit_group(F, label, e)
    codes, exps = group.all_elements()
    if r == 0:
        return exps
    reduced = group.ring.reduce(codes, r)
    return exps[reduced == 1]


def character_conductor(F: NumberField, label: PrimeLabel, e: int, k) -> int:
    group = residue_unit_group(F, label, e)
    orders = np.array(group.orders)
    k = np.asarray(k)
    for r in range(e + 1):
        exps = _kernel_exponents(F, label, e, r)
        frac = (exps * k[None, :] / orders[None, :]).sum(axis=1) % 1.0
        if np.all(np.minimum(frac, 1 - frac) < 1e-12):
            return r
    raise ValidationError("特征在 U^{(e)} 上不平凡")


def make_character(F: NumberField, label: PrimeLabel, e: int, k) -> FiniteCharacter:
    group = residue_unit_group(F, label, e)
    k = tuple(int(kj) % nj for kj, nj in zip(k, group.orders))
    return FiniteCharacter(F, label, e, k, character_conductor(F, label, e, k))


def characters_mod(F: NumberField, label: PrimeLabel, e: int) -> List[FiniteCharacter]:
    """(O/p^e)^× 的全部特征，按指数向量的字典序"""
    group = residue_unit_group(F, label, e)
    return [make_character(F, label, e, k)
            for k in itertools.product(*(range(n) for n in group.orders))]


# ---------------------------------------------------------------------------
# 加法特征


def uniformizer(F: NumberField, label: PrimeLabel, search: int = 60) -> Tuple[int, int]:
    """局部素元 ϖ_p：惰性与有理素数取 p，分裂因子取小范数生成元"""
    if not label.is_split:
        return (label.p, 0)
    for size in range(1, search + 1):
        for a in range(-size, size + 1):
            for b in (size, -size) if abs(a) < size else range(-size, size + 1):
                if abs(F.norm(a, b)) == label.p and (a + b * label.root) % label.p == 0:
                    return (a, b)
    logger.warning(f"未找到 {label} 的生成元，ϖ 退回为 p")
    return (label.p, 0)


class AdditiveCharacter:
    """ψ_p(ϖ^{-k} x) = exp(2πi·(Tr(u_ϖ^k·x) mod p^k)/p^k)，其中 u_ϖ = p/ϖ"""

    def __init__(self, F: NumberField, label: PrimeLabel):
        self.F = F
        self.label = label
        self.pi = uniformizer(F, label)

    def unit_factor(self, ring: ResidueRing):
        """p/ϖ 在 O/p^e 中的像"""
        a, b = self.pi
        if (a, b) == (self.label.p, 0):
            return np.int64(1)
        sign = 1 if self.F.norm(a, b) > 0 else -1
        # p/ϖ = ±ϖ̄，ϖ̄ = (a + tb) − bω
        return ring.from_element(sign * (a + self.F.t * b), -sign * b)

    def __call__(self, ring: ResidueRing, codes, k: int) -> np.ndarray:
        if k == 0:
            return np.ones(np.shape(codes), dtype=complex)
        shifted = ring.mul(codes, ring.pow(self.unit_factor(ring), k))
        pk = self.label.p ** k
        tr = ring.trace(shifted) % pk
        return np.exp(2j * math.pi * tr / pk)


def gauss_sum(F: NumberField, delta: FiniteCharacter, r: Optional[int] = None,
              budget: int = BRUTE_FORCE_BUDGET) -> complex:
    """G(δ) = Σ_{u ∈ U/U^{(r)}} δ(u)·conj ψ_p(ϖ^{-r}u)

    Args:
        delta: 有限特征
        r: 层级，默认为 δ 的导子（平凡特征取 1）
    """
    if r is None:
        r = max(delta.conductor, 1)
    if delta.conductor > r:
        raise ValidationError(f"导子 {delta.conductor} 大于层级 {r}")
    level = max(r, delta.e)
    if delta.label.norm ** level > budget:
        raise BudgetError(f"Gauss 和规模 N(p)^{level} 超出预算", needed=delta.label.norm ** level,
                          budget=budget)
    ring = ResidueRing(F, delta.label, level)
    units = ring.units()
    chi = delta(ring.reduce(units, delta.e) if level > delta.e else units)
    psi = AdditiveCharacter(F, delta.label)(ring, units, r)
    terms = chi * np.conj(psi)
    return complex(math.fsum(terms.real), math.fsum(terms.imag)) / delta.label.norm ** (level - r)


def _residue_field_table(F: NumberField, label: PrimeLabel):
    group = residue_unit_group(F, label, 1)
    if len(group.orders) != 1:
        raise ValidationError("剩余域乘法群应为循环群")
    g = np.int64(group.generators[0])
    q1 = group.orders[0]
    powers = [np.int64(1)]
    for _ in range(q1 - 1):
        powers.append(group.ring.mul(powers[-1], g))
    return group, np.array(powers, dtype=np.int64)


def hyper_kloosterman(F: NumberField, m: int, a, label: PrimeLabel,
                      budget: int = KLOOSTERMAN_BUDGET, check_bound: bool = True) -> complex:
    """Kl_m(a) = Σ_{x_1⋯x_m = a} ψ_p(ϖ^{-1}(x_1 + … + x_m))

    Args:
        m: 变量个数 ≥ 1
        a: 剩余域中的非零元（编码）
        label: 素理想

    Raises:
        BudgetError: N(p)^{m−1} 超出预算
        BoundViolation: Deligne 界不成立
    """
    if m < 1:
        raise ValidationError("m 必须 ≥ 1")
    q = label.norm
    if q ** (m - 1) > budget:
        raise BudgetError(f"N(p)^{m - 1} = {q ** (m - 1)} 超出预算 {budget}",
                          needed=q ** (m - 1), budget=budget)
    group, powers = _residue_field_table(F, label)
    psi = AdditiveCharacter(F, label)(group.ring, powers, 1)
    n = len(powers)
    target = int(group.dlog(np.int64(a))[0])
    if m == 1:
        value = complex(psi[target])
    else:
        conv = psi.copy()
        idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
        for _ in range(m - 2):
            conv = (conv[idx] * psi[None, :]).sum(axis=1)
        terms = psi * conv[(target - np.arange(n)) % n]
        value = complex(math.fsum(terms.real), math.fsum(terms.imag))
    bound = m * q ** ((m - 1) / 2)
    if check_bound and abs(value) > bound * (1 + 1e-9):
        raise BoundViolation(f"|Kl_{m}| = {abs(value):.6f} 超过 Deligne 界 {bound:.6f}",
                             value=abs(value), bound=bound)
    return value


def gauss_kloosterman_identity(F: NumberField, label: PrimeLabel, n: int, x=1) -> Dict:
    """Σ_{deg δ = 1} G(δ)^{n²}·δ̄(x) = φ(p)·Kl_{n²}((−1)^{n²}x) − (−1)^{n²}

    两边独立计算。
    """
    m = n * n
    ring = residue_unit_group(F, label, 1).ring
    x_code = ring.from_element(x)
    terms = np.array([gauss_sum(F, delta, 1) ** m * np.conj(delta(x_code))
                      for delta in characters_mod(F, label, 1) if delta.conductor == 1],
                     dtype=complex)
    lhs = complex(math.fsum(terms.real), math.fsum(terms.imag))
    sign = -1 if m % 2 else 1
    kl = hyper_kloosterman(F, m, ring.mul(x_code, ring.from_element(sign)), label)
    rhs = (label.norm - 1) * kl - sign
    diff = abs(lhs - rhs)
    return {"lhs": lhs, "rhs": rhs, "diff": diff,
            "relative": diff / max(abs(rhs), 1.0), "kloosterman": kl,
            "deligne_bound": m * label.norm ** ((m - 1) / 2)}


# ---------------------------------------------------------------------------
# 有限 gamma 因子与 g*_p


def finite_gamma(s: complex, chi: FiniteCharacter, rs: RankinSelbergData, t: float = 0.0) -> complex:
    """γ(s, π_p ⊗ χ_p ⊗ |·|^{it} × π̃_p)

    r = 0 时为 L 多项式之比，r ≥ 1 时为 N(p^r)^{−n²(s+it)}·G(χ_p)^{n²}。
    """
    N = chi.label.norm
    n2 = rs.n ** 2
    if chi.conductor == 0:
        a = rs.pair_parameters(chi.label)
        twist = N ** (-1j * t)
        num = np.prod(1 - a * twist * N ** (-s))
        den = np.prod(1 - np.conj(a) * np.conj(twist) * N ** (s - 1))
        if abs(den) < POLE_TOL:
            raise PoleError(f"γ 在 s = {s} 处有极点", point=s)
        return complex(num / den)
    G = gauss_sum(chi.F, chi, chi.conductor)
    return complex(N ** (-chi.conductor * n2 * (s + 1j * t)) * G ** n2)


def a0_coefficient(label: PrimeLabel, rs: RankinSelbergData, v: int) -> complex:
    """A_0(x)：∏(1 − a_k N^{-1} X^{-1}) / ∏(1 − a_k X) 中 X^v 的系数，v = v_p(x)"""
    n2 = rs.n ** 2
    if v < -n2:
        return 0j
    if v + n2 > SERIES_CAP:
        raise BudgetError(f"幂级数阶数 {v + n2} 超出上限 {SERIES_CAP}",
                          needed=v + n2, budget=SERIES_CAP)
    a = rs.pair_parameters(label)
    N = label.norm
    numerator = np.array([1.0 + 0j])
    for ak in a:
        numerator = np.concatenate([numerator, [0j]]) - np.concatenate([[0j], numerator * ak / N])
    h = complete_homogeneous(np.conj(a), v + n2 + 1)
    total = 0j
    for j, pj in enumerate(numerator):
        idx = v + j
        if idx >= 0:
            total += pj * h[idx]
    return complex(total)


def gstar_finite(F: NumberField, v: int, unit: Union[Tuple[int, int], int], label: PrimeLabel,
                 e: int, rs: RankinSelbergData) -> Dict:
    """g*_p(x) = φ(p^e)^{-1}·Σ_{0≤ν≤e} A_ν(x)，x = ϖ^v·unit

    unit 为 (a, b) 或 O/p^e 中的编码。

    Returns:
        {"value", "A": [A_0, …, A_e], "abs_x"}
    """
    n2 = rs.n ** 2
    N = label.norm
    group = residue_unit_group(F, label, e)
    code = group.ring.from_element(*unit) if isinstance(unit, tuple) else np.int64(unit)
    if not group.contains(code):
        raise ValidationError("x 的单位部分必须可逆")
    A = [a0_coefficient(label, rs, v)]
    chars = characters_mod(F, label, e)
    # 积分只在 |x|_p = N(p)^{e·n²} 处不为零；ν < e 时 e 阶 Gauss 和为零
    for nu in range(1, e + 1):
        if v != -e * n2:
            A.append(0j)
            continue
        terms = np.array([gauss_sum(F, d, e) ** n2 * np.conj(d(code))
                          for d in chars if d.conductor == nu], dtype=complex)
        A.append(complex(math.fsum(terms.real), math.fsum(terms.imag)) * N ** (-e * n2))
    phi = N ** (e - 1) * (N - 1)
    value = sum(A) / phi
    return {"value": value, "A": A, "abs_x": float(N) ** (-v)}
