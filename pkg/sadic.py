"""S 单位求和

Bruggeman-Miatello 型单位和、G*_S(x) = Σ_{u ∈ O_S^×} g*_S(ux)，以及 G*_S 的包络检验。
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from archgamma import RankinSelbergData, TestFunctionSuite, gstar_arch
from errors import BudgetError, ValidationError
from expsums import gstar_finite, uniformizer
from numberfield import NumberField, PrimeLabel, ResidueRing, abs_v

logger = logging.getLogger('HeckeLab.SAdic')

EPSILON = 0.05
BM_TOL = 1e-12
BM_MAX_RADIUS = 2000
S_UNIT_BUDGET = 200000


def _abs_places(F: NumberField, x) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.shape[-1] != F.r:
        raise ValidationError(f"x 需要 {F.r} 个阿基米德分量")
    if np.any(x == 0):
        raise ValidationError("x 的每个分量都必须非零")
    return np.array([abs_v(z, d) for z, d in zip(x, F.place_degrees)], dtype=float)


def bm_unit_sum(F: NumberField, A: float, x: Sequence[complex], tol: float = BM_TOL) -> Dict:
    """Σ_{u ∈ O_K^×} ∏_v min(1, |(ux)_v|_v^{−A})

    按基本单位指数的 sup 范数逐层展开，整层贡献低于 tol 时停止。

    Returns:
        {"sum", "envelope", "C", "shells", "terms"}
    """
    if A < 1:
        raise ValidationError("A 必须 ≥ 1")
    absx = _abs_places(F, x)
    r = F.r
    log_x = np.log(absx)
    norm_x = float(np.prod(absx))
    if r == 1:
        total = F.w * min(1.0, norm_x ** (-A))
        shells, terms = 0, F.w
    else:
        # |ε^k x|_v = exp(d_v·Σ k_i log|ε_i|_v + log|x|_v)
        L = np.array([u.log_vector for u in F.fundamental_units])
        total, terms, shells = 0.0, 0, 0
        for radius in range(BM_MAX_RADIUS):
            ks = np.array([k for k in itertools.product(range(-radius, radius + 1), repeat=r - 1)
                           if max(abs(i) for i in k) == radius] or [(0,) * (r - 1)], dtype=float)
            logs = ks @ L + log_x[None, :]
            shell = F.w * float(np.sum(np.exp(-A * np.sum(np.maximum(logs, 0.0), axis=1))))
            total += shell
            terms += F.w * len(ks)
            shells = radius
            if radius > 0 and shell < tol * total:
                break
        else:
            raise BudgetError("单位和在最大半径内没有收敛", needed=BM_MAX_RADIUS + 1,
                              budget=BM_MAX_RADIUS)
    log_abs = abs(math.log(norm_x))
    envelope = min(1 + log_abs ** (r - 1), norm_x ** (-A))
    return {"sum": total, "envelope": envelope, "C": total / envelope, "shells": shells,
            "terms": terms}


@dataclass(frozen=True)
class SIdele:
    """K_S 中的元素：阿基米德分量与每个有限位的 (赋值, 单位部分编码)

    单位部分编码在 O/p^e 中，e 为测试函数在 p 处的层级。
    """
    arch: Tuple[complex, ...]
    finite: Tuple[Tuple[PrimeLabel, int, int], ...] = ()

    def abs_S(self, F: NumberField) -> float:
        value = float(np.prod(_abs_places(F, self.arch)))
        for label, v, _ in self.finite:
            value *= float(label.norm) ** (-v)
        return value


@dataclass(frozen=True)
class SUnitIndex:
    """O_S^× = μ_K × ⟨ε_i⟩ × ⟨ϖ_p⟩ 的截断枚举（h = 1）

    每个 S 单位由指数向量 (j, k_1…k_{r−1}, ℓ_p…) 唯一确定。
    """
    F: NumberField
    primes: Tuple[PrimeLabel, ...]
    generators: Tuple[Tuple[int, int], ...]
    k_max: int
    l_ranges: Tuple[Tuple[int, int], ...]

    @classmethod
    def build(cls, F: NumberField, primes: Sequence[PrimeLabel], k_max: int,
              l_ranges: Sequence[Tuple[int, int]]) -> "SUnitIndex":
        if F.class_number != 1:
            raise ValidationError("S 单位枚举要求类数为 1")
        if len(l_ranges) != len(primes):
            raise ValidationError("每个有限位需要一个赋值范围")
        gens = tuple(uniformizer(F, p) for p in primes)
        return cls(F, tuple(primes), gens, int(k_max), tuple(tuple(r) for r in l_ranges))

    def exponents(self) -> np.ndarray:
        F = self.F
        axes = [range(F.w)]
        axes += [range(-self.k_max, self.k_max + 1)] * (F.r - 1)
        axes += [range(lo, hi + 1) for lo, hi in self.l_ranges]
        size = math.prod(len(a) for a in axes)
        if size > S_UNIT_BUDGET:
            raise BudgetError(f"S 单位个数 {size} 超出预算 {S_UNIT_BUDGET}",
                              needed=size, budget=S_UNIT_BUDGET)
        return np.array(list(itertools.product(*axes)), dtype=np.int64).reshape(size, len(axes))

    def _log_generators(self) -> np.ndarray:
        """每个生成元在各阿基米德位的复对数，行序与指数向量一致"""
        F = self.F
        rows = [np.log(np.array(F.torsion.embeddings, dtype=complex))]
        rows += [np.log(np.array(u.embeddings, dtype=complex)) for u in F.fundamental_units]
        rows += [np.log(F.embeddings(a, b).astype(complex)) for a, b in self.generators]
        return np.array(rows)

    def embeddings(self, exps: np.ndarray) -> np.ndarray:
        return np.exp(exps.astype(float) @ self._log_generators())

    def unit_codes(self, exps: np.ndarray, label: PrimeLabel, e: int) -> np.ndarray:
        """S 单位在 p 处的单位部分 u·ϖ_p^{−ℓ_p} 在 O/p^e 中的编码"""
        F = self.F
        ring = ResidueRing(F, label, e)
        gens = [F.torsion.coeffs] + [u.coeffs for u in F.fundamental_units] + list(self.generators)
        skip = len(gens) - len(self.primes) + self.primes.index(label)
        codes = np.ones(len(exps), dtype=np.int64)
        for col, g in enumerate(gens):
            if col == skip:
                continue
            if g is None:
                raise ValidationError(f"{F.name} 的单位没有整基坐标")
            column = exps[:, col]
            lo, hi = int(column.min()), int(column.max())
            base = ring.from_element(*g)
            inv = ring.inverse(base)
            table = np.array([ring.pow(inv if k < 0 else base, abs(k)) for k in range(lo, hi + 1)],
                             dtype=np.int64)
            codes = ring.mul(codes, table[column - lo])
        return codes

    def valuations(self, exps: np.ndarray, label: PrimeLabel) -> np.ndarray:
        return exps[:, exps.shape[1] - len(self.primes) + self.primes.index(label)]


def s_places(suite: TestFunctionSuite) -> Tuple[PrimeLabel, ...]:
    """S 的有限部分：c 的素因子与 π 的分歧素数"""
    labels = [label for label, _ in suite.modulus.factors]
    labels += [p for p in suite.ramified_pi if p not in labels]
    return tuple(labels)


def default_index(F: NumberField, x: SIdele, suite: TestFunctionSuite, rs: RankinSelbergData,
                  k_max: Optional[int] = None, l_span: int = 6) -> SUnitIndex:
    """A_ν 的支撑给出 ℓ_p 的下界，上界由阿基米德衰减决定"""
    primes = s_places(suite)
    n2 = rs.n ** 2
    ranges = []
    for label in primes:
        v = dict((p, val) for p, val, _ in x.finite).get(label, 0)
        lo = -n2 * suite.finite_level(label) - v
        ranges.append((lo, lo + l_span))
    if k_max is None:
        k_max = 0 if F.r == 1 else max(4, int(math.log(4 * suite.T) / F.regulator) + 4)
    return SUnitIndex.build(F, primes, k_max, ranges)


def GS_star_value(F: NumberField, x: SIdele, suite: TestFunctionSuite, rs: RankinSelbergData,
                  index: Optional[SUnitIndex] = None, tol: float = 1e-8) -> Dict:
    """G*_S(x) = Σ_{u ∈ O_S^×} ∏_{v ∈ S} g*_v(ux)

    Returns:
        {"value", "count", "tail", "k_max", "l_ranges"}
    """
    index = index or default_index(F, x, suite, rs)
    exps = index.exponents()
    u_emb = index.embeddings(exps)
    values = np.ones(len(exps), dtype=complex)
    tail = 0.0
    for v in range(F.r):
        points = u_emb[:, v] * x.arch[v]
        res = gstar_arch(v, points, suite, rs, tol=tol)
        values = values * res["values"]
        tail += res["tail_bound"]
    finite = dict((label, (val, code)) for label, val, code in x.finite)
    for label in index.primes:
        e = suite.finite_level(label)
        v_x, code_x = finite.get(label, (0, 1))
        ring = ResidueRing(F, label, e)
        codes = ring.mul(index.unit_codes(exps, label, e), np.int64(code_x))
        vals = index.valuations(exps, label) + v_x
        cache: Dict[Tuple[int, int], complex] = {}
        local = np.empty(len(exps), dtype=complex)
        for i, key in enumerate(zip(vals.tolist(), codes.tolist())):
            if key not in cache:
                cache[key] = gstar_finite(F, key[0], int(key[1]), label, e, rs)["value"]
            local[i] = cache[key]
        values = values * local
    total = complex(math.fsum(values.real), math.fsum(values.imag))
    # 最外层指数上的贡献作为截断余项的估计
    if len(exps):
        outer = np.zeros(len(exps), dtype=bool)
        if F.r > 1:
            outer |= np.any(np.abs(exps[:, 1:F.r]) == index.k_max, axis=1)
        for j, (lo, hi) in enumerate(index.l_ranges):
            outer |= exps[:, exps.shape[1] - len(index.primes) + j] == hi
        tail += float(np.sum(np.abs(values[outer])))
    logger.debug(f"G*_S: {len(exps)} 个 S 单位, 余项 {tail:.2e}")
    return {"value": total, "count": len(exps), "tail": tail, "k_max": index.k_max,
            "l_ranges": index.l_ranges}


def scale_by_unit(F: NumberField, x: SIdele, unit_index: int, suite: TestFunctionSuite) -> SIdele:
    """x ↦ εx（ε 为第 unit_index 个基本单位）"""
    unit = F.fundamental_units[unit_index]
    arch = tuple(complex(a) * complex(z) for a, z in zip(x.arch, unit.embeddings))
    finite = []
    for label, v, code in x.finite:
        ring = ResidueRing(F, label, suite.finite_level(label))
        finite.append((label, v, int(ring.mul(np.int64(code), ring.from_element(*unit.coeffs)))))
    return SIdele(arch, tuple(finite))


def family_scale(F: NumberField, suite: TestFunctionSuite) -> float:
    """V = φ(c)·T^{r−1}"""
    return suite.modulus.phi * suite.T ** (F.r - 1)


def idele_of_size(F: NumberField, size: float, suite: TestFunctionSuite) -> SIdele:
    """|x|_S = size：x_{v0} = size^{1/d}，其余阿基米德分量为 1，有限部分为 1"""
    d0 = F.place_degrees[suite.v0]
    arch = tuple(complex(size ** (1.0 / d0)) if v == suite.v0 else 1 + 0j for v in range(F.r))
    finite = tuple((label, 0, 1) for label in s_places(suite))
    return SIdele(arch, finite)


def verify_GS_corollary(F: NumberField, suite: TestFunctionSuite, rs: RankinSelbergData,
                        sizes: Sequence[float], epsilon: float = EPSILON, A: float = 2.0,
                        k_max: Optional[int] = None) -> List[Dict]:
    """逐点计算 |G*_S(x)|·|x|_S / V^{(n²−1)/2+ε} 与超出 V^{n²+ε} 后的衰减

    Returns:
        每个 |x|_S 一行: size, value, ratio, decay, induction_C
    """
    V = family_scale(F, suite)
    n2 = rs.n ** 2
    knee = V ** (n2 + epsilon)
    rows = []
    for size in sizes:
        x = idele_of_size(F, size, suite)
        res = GS_star_value(F, x, suite, rs, default_index(F, x, suite, rs, k_max))
        value = abs(res["value"])
        ratio = value * size / V ** ((n2 - 1) / 2 + epsilon)
        t = size / knee
        envelope = min(1 + abs(math.log(t)) ** max(len(s_places(suite)) + F.r - 1, 0), t ** (-A))
        rows.append({"size": size, "value": res["value"], "abs": value, "ratio": ratio,
                     "beyond_knee": size > knee, "induction_C": value * size / envelope,
                     "tail": res["tail"], "count": res["count"]})
    peak = max((row["abs"] for row in rows), default=0.0)
    for row in rows:
        row["decay"] = row["abs"] / peak if peak else 0.0
    logger.info(f"G*_S 包络: V = {V:.1f}, 最大比值 {max((r['ratio'] for r in rows), default=0):.3e}")
    return rows
