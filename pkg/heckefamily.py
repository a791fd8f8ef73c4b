"""Hecke 特征族 X(c, D, T) 的构造、计数、导子以及在主理想上的取值"""
import hashlib
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from charlattice import (ENUM_BUDGET, Hyperplane, TWO_PI, enumerate_points, principal_arg,
                         shifted_lattice, slice_volume)
from errors import DomainError, UnsupportedFieldError, ValidationError
from expsums import FiniteCharacter, characters_mod
from numberfield import IdealData, NumberField, Unit, valuation

logger = logging.getLogger('HeckeLab.Family')


@dataclass(frozen=True)
class ArchCharacter:
    """χ_v(x) = δ_v(x)·e^{iτ_v log|x|_v}"""
    delta: Tuple[int, ...]
    tau: Tuple[float, ...]

    def local_conductors(self, degrees: Sequence[int]) -> Tuple[float, ...]:
        return tuple(1 + abs(complex(d, t)) ** deg
                     for d, t, deg in zip(self.delta, self.tau, degrees))

    def conj(self) -> "ArchCharacter":
        return ArchCharacter(tuple(-d for d in self.delta), tuple(-t for t in self.tau))


@dataclass(frozen=True)
class HeckeCharacter:
    finite: Tuple[FiniteCharacter, ...]
    arch: ArchCharacter
    class_index: int = 0
    modulus: IdealData = field(default_factory=IdealData)

    @property
    def conductor_ideal(self) -> IdealData:
        return IdealData(tuple((d.label, d.conductor) for d in self.finite if d.conductor))

    @property
    def is_trivial(self) -> bool:
        return (all(d.is_trivial for d in self.finite) and not any(self.arch.delta)
                and all(abs(t) < 1e-12 for t in self.arch.tau) and self.class_index == 0)

    @property
    def id(self) -> str:
        """内容哈希，τ 取 1e-9 精度"""
        key = repr((
            tuple((str(d.label), d.e, d.k) for d in self.finite),
            self.arch.delta,
            tuple(round(t, 9) + 0.0 for t in self.arch.tau),
            self.class_index,
        ))
        return hashlib.sha1(key.encode("utf-8")).hexdigest()[:16]

    def conj(self) -> "HeckeCharacter":
        return HeckeCharacter(tuple(d.conj() for d in self.finite), self.arch.conj(),
                              self.class_index, self.modulus)

    def to_dict(self):
        return {"id": self.id, "delta": list(self.arch.delta), "tau": list(self.arch.tau),
                "finite": [d.to_dict() for d in self.finite], "class_index": self.class_index,
                "conductor_ideal": str(self.conductor_ideal)}


@dataclass(frozen=True)
class FamilySpec:
    c: IdealData
    T: float
    h: Hyperplane
    v0: int = 0

    def __post_init__(self):
        if self.T < 0:
            raise ValidationError("T 必须 ≥ 0")

    def delta_box(self, F: NumberField) -> List[Tuple[int, ...]]:
        """阿基米德 δ 的盒子：δ_{v0} = 0，实位 {0, 1}，复位 |δ_v| ≤ ⌊√T⌋"""
        bound = math.isqrt(int(self.T)) if self.T >= 1 else 0
        ranges = []
        for v, deg in enumerate(F.place_degrees):
            if v == self.v0:
                ranges.append((0,))
            elif deg == 1:
                ranges.append((0, 1))
            else:
                ranges.append(tuple(range(-bound, bound + 1)))
        return list(itertools.product(*ranges))

    def to_dict(self):
        return {"c": str(self.c), "T": self.T, "h": str(self.h), "v0": self.v0}


def finite_characters(F: NumberField, c: IdealData) -> List[Tuple[FiniteCharacter, ...]]:
    if c.factors and F.kind == "custom":
        raise UnsupportedFieldError("自定义数域只支持 c = (1)")
    per_prime = [characters_mod(F, label, e) for label, e in c.factors]
    return list(itertools.product(*per_prime))


def unit_angle(F: NumberField, u: Unit, delta: Sequence[int],
               finite: Sequence[FiniteCharacter]) -> float:
    """arg(∏_v δ_v(u)·∏_p δ_p(u))"""
    theta = 0.0
    for d, z in zip(delta, u.embeddings):
        if d:
            theta += d * float(principal_arg(z))
    for chi in finite:
        code = chi.group.ring.from_element(*u.coeffs)
        theta += TWO_PI * float(chi.phase(code))
    return theta


def _fiber_lattice(F: NumberField, spec: FamilySpec, finite, delta):
    constraints = [(u, unit_angle(F, u, delta, finite)) for u in F.units()]
    return shifted_lattice(F, spec.h, constraints)


def _fibers(F: NumberField, spec: FamilySpec):
    return [(finite, delta) for finite in finite_characters(F, spec.c)
            for delta in spec.delta_box(F)]


def parallel_map(fn, items, workers: int):
    if workers <= 1 or len(items) < 2:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def build_family(F: NumberField, spec: FamilySpec, workers: int = 1,
                 budget: int = ENUM_BUDGET) -> List[HeckeCharacter]:
    """枚举族 X(c, D, T)

    顺序：δ 纤维（有限特征、阿基米德 δ 的字典序）、纤维内格点的字典序、类指标。
    """
    fibers = _fibers(F, spec)

    def expand(fiber):
        finite, delta = fiber
        points = enumerate_points(_fiber_lattice(F, spec, finite, delta), spec.T, budget)
        return [(finite, delta, tuple(float(t) for t in tau)) for tau in points]

    members = []
    for block in parallel_map(expand, fibers, workers):
        for finite, delta, tau in block:
            for k in range(F.class_number):
                members.append(HeckeCharacter(finite, ArchCharacter(delta, tau), k, spec.c))
    logger.info(f"{F.name}: c = {spec.c}, T = {spec.T}: {len(fibers)} 个纤维, {len(members)} 个特征")
    return members


def count_family(F: NumberField, spec: FamilySpec, workers: int = 1,
                 budget: int = ENUM_BUDGET) -> int:
    def count(fiber):
        finite, delta = fiber
        return len(enumerate_points(_fiber_lattice(F, spec, finite, delta), spec.T, budget))
    return sum(parallel_map(count, _fibers(F, spec), workers)) * F.class_number


def family_volume(F: NumberField, spec: FamilySpec) -> Dict:
    """V(c, D, T) = h·φ(c)·|D|·vol(B(0,T) ∩ h) / (w·covol L_h)

    V_raw 为不含 h / (w·covol) 的体积 φ(c)·|D|·vol。
    """
    trivial = shifted_lattice(F, spec.h, [(u, 0.0) for u in F.units()])
    covol = trivial.covolume
    vol = slice_volume(F, spec.h, spec.T)
    box = len(spec.delta_box(F))
    phi = spec.c.phi
    V = F.class_number * phi * box * vol / (F.w * covol)
    return {"V": V, "V_raw": phi * box * vol, "vol": vol, "covol": covol, "phi": phi,
            "D_size": box, "w": F.w, "h": F.class_number}


def verify_counting(F: NumberField, spec: FamilySpec, T_list: Sequence[float],
                    workers: int = 1, budget: int = ENUM_BUDGET) -> List[Dict]:
    rows = []
    for T in T_list:
        s = FamilySpec(spec.c, T, spec.h, spec.v0)
        count = count_family(F, s, workers, budget)
        V = family_volume(F, s)["V"]
        rows.append({"T": T, "count": count, "V": V, "ratio": count / V if V else float("nan")})
    ratios = [row["ratio"] for row in rows]
    logger.info(f"计数比 |X|/V: {', '.join(f'{r:.4f}' for r in ratios)}")
    return rows


def analytic_conductor(F: NumberField, chi: HeckeCharacter) -> float:
    """C(χ) = N(c(χ))·∏_v (1 + |δ_v + iτ_v|^{[K_v:R]})"""
    return chi.conductor_ideal.norm * math.prod(chi.arch.local_conductors(F.place_degrees))


def rs_conductor_bound(F: NumberField, chi: HeckeCharacter, rs,
                       spec: Optional[FamilySpec] = None) -> Dict:
    """π ⊗ χ × π̃ 的导子与 K·C(χ)^{n²} 的比较

    pair = N(c_π)·N(c(χ))^{n²}·∏_v ∏_j (1 + |δ_v + iτ_v + μ_j|^{deg})，
    K = N(c_π)·∏_v ∏_j 2^{deg−1}(1 + |μ_j|^{deg})。
    """
    n2 = rs.n ** 2
    C = analytic_conductor(F, chi)
    pair = float(rs.conductor) * chi.conductor_ideal.norm ** n2
    K = float(rs.conductor)
    for v, deg in enumerate(F.place_degrees):
        z = complex(chi.arch.delta[v], chi.arch.tau[v])
        for mu in rs.mu_for(v):
            pair *= 1 + abs(z + mu) ** deg
            K *= 2 ** (deg - 1) * (1 + abs(mu) ** deg)
    result = {"C": C, "chi_factor": C ** n2, "constant": K, "pair": pair,
              "bound": K * C ** n2, "holds": pair <= K * C ** n2 * (1 + 1e-12)}
    if spec is not None:
        family_bound = spec.c.norm * (1 + spec.T) ** (F.r - 1) * 2 ** F.r
        result["family_bound"] = family_bound
        result["family_holds"] = C <= family_bound * (1 + 1e-12)
    return result


# ---------------------------------------------------------------------------
# 主理想上的取值


def chi_values(F: NumberField, chi: HeckeCharacter, a, b=0, emb=None,
               primitive: bool = False) -> np.ndarray:
    """χ((α)) = ∏_v χ_v(α)^{-1}·∏_{p|c} δ_p(α)^{-1}（向量化）

    primitive 为真时跳过导子指数为 0 的素数，其余素数上不互素的理想取 0；否则不互素时取 0
    由调用方检查。导子指数 0 < r ≤ e 的分量在 U^{(r)} 上平凡，它在单位上的取值只依赖 α mod p^r，
    零点也是 p | α，因此与模 p^r 的本原特征逐点相同，无需再约化。
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if emb is None:
        emb = F.embeddings(a, b)
    degrees = np.array(F.place_degrees, dtype=float)
    delta = np.array(chi.arch.delta, dtype=float)
    tau = np.array(chi.arch.tau, dtype=float)
    phase = -(np.angle(emb) @ delta + (degrees * np.log(np.abs(emb))) @ tau)
    value = np.exp(1j * phase)
    for d in chi.finite:
        if primitive and d.conductor == 0:
            continue
        ring = d.group.ring
        codes = ring.from_element(a, b)
        unit = d.group.contains(codes)
        safe = np.where(unit, codes, 1)
        value = value * np.where(unit, np.exp(-2j * math.pi * d.phase(safe)), 0)
    return value


def chi_on_ideal(F: NumberField, chi: HeckeCharacter, alpha: Tuple[int, int]) -> complex:
    """主理想 (α) 上的取值，要求 h = 1 且 (α) 与 c 互素"""
    if F.class_number != 1:
        raise UnsupportedFieldError(f"{F.name} 的类数为 {F.class_number}，不支持理想求值")
    F._require_arithmetic()
    a, b = alpha
    if a == 0 and b == 0:
        raise ValidationError("零元不生成理想")
    for label, _ in chi.modulus.factors:
        if valuation(F, label, a, b):
            raise DomainError(f"理想 ({a}, {b}) 与模数 {chi.modulus} 不互素")
    return complex(chi_values(F, chi, a, b)[()])
