"""数域算术

二次域从零构造（嵌入、基本单位、素数分解、剩余环、理想计数、ζ 留数），
更高次的域只能通过配置文件提供不变量。
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from sympy import factorint, isprime, primerange
from sympy.functions.combinatorial.numbers import jacobi_symbol

from errors import BudgetError, UnsupportedFieldError, ValidationError

logger = logging.getLogger('HeckeLab.NumberField')

PELL_BUDGET = 10 ** 7
BRUTE_FORCE_BUDGET = 10 ** 6
PHI_CROSSCHECK_LIMIT = 10 ** 4


@dataclass(frozen=True)
class Unit:
    """单位：基坐标 (a, b) 表示 a + bω，以及各阿基米德位上的嵌入与对数向量"""
    coeffs: Optional[Tuple[int, int]]
    embeddings: Tuple[complex, ...]
    log_vector: Tuple[float, ...]
    order: int = 0  # 挠元的阶，非挠单位为 0


@dataclass(frozen=True)
class PrimeLabel:
    """素理想标签

    tag 取 inert / split-1 / split-2 / ramified / rational，
    分裂素数的 root 是 ω 在该剩余域中的像。
    """
    p: int
    tag: str
    root: Optional[int] = None

    @property
    def norm(self) -> int:
        return self.p * self.p if self.tag == "inert" else self.p

    @property
    def is_split(self) -> bool:
        return self.tag.startswith("split")

    def __str__(self):
        if self.is_split:
            return f"{self.p}.{self.tag[-1]}"
        return str(self.p)


@dataclass(frozen=True)
class IdealData:
    """模数 c = ∏ p^{e_p}"""
    factors: Tuple[Tuple[PrimeLabel, int], ...] = ()

    @property
    def norm(self) -> int:
        return math.prod(label.norm ** e for label, e in self.factors)

    @property
    def phi(self) -> int:
        return math.prod(label.norm ** (e - 1) * (label.norm - 1)
                         for label, e in self.factors)

    def exponent(self, label: PrimeLabel) -> int:
        for other, e in self.factors:
            if other == label:
                return e
        return 0

    def __str__(self):
        if not self.factors:
            return "1"
        return "*".join(str(label) if e == 1 else f"{label}^{e}"
                        for label, e in self.factors)


@dataclass(frozen=True)
class NumberField:
    """数域及其全部不变量

    二次域的整基为 (1, ω)，ω 满足 x² − t·x + n = 0。
    """
    name: str
    kind: str
    degree: int
    r1: int
    r2: int
    disc: int
    class_number: int
    regulator: float
    torsion: Unit
    fundamental_units: Tuple[Unit, ...] = ()
    D: Optional[int] = None
    t: int = 0
    n: int = 0
    zeta_residue: float = field(default=0.0)

    @property
    def r(self) -> int:
        return self.r1 + self.r2

    @property
    def w(self) -> int:
        return self.torsion.order

    @property
    def place_degrees(self) -> Tuple[int, ...]:
        return (1,) * self.r1 + (2,) * self.r2

    @property
    def is_quadratic(self) -> bool:
        return self.kind == "quadratic"

    def units(self) -> Tuple[Unit, ...]:
        """挠生成元加基本单位，用于相容性约束"""
        return (self.torsion,) + self.fundamental_units

    def _require_arithmetic(self):
        if self.kind not in ("quadratic", "rational"):
            raise UnsupportedFieldError(f"{self.name} 不支持元素算术（自定义数域）")

    def embeddings(self, a, b=0) -> np.ndarray:
        """元素 a + bω 在各阿基米德位的嵌入，形状 (..., r)"""
        self._require_arithmetic()
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.kind == "rational":
            return (a + 0.0 * b)[..., None].astype(complex)
        if self.D > 0:
            root = math.sqrt(self.D)
            omegas = ((self.t + root) / 2, (self.t - root) / 2) if self.t else (root, -root)
            return np.stack([a + b * omegas[0], a + b * omegas[1]], axis=-1).astype(complex)
        omega = complex(self.t / 2, math.sqrt(-self.D) / 2) if self.t else complex(0, math.sqrt(-self.D))
        return (a + b * omega)[..., None]

    def norm(self, a, b=0):
        """范数 N(a + bω) = a² + t·ab + n·b²（有理域为 a）"""
        self._require_arithmetic()
        if self.kind == "rational":
            return a
        return a * a + self.t * a * b + self.n * b * b

    def mul(self, x: Tuple[int, int], y: Tuple[int, int]) -> Tuple[int, int]:
        """精确整数乘法"""
        a1, b1 = x
        a2, b2 = y
        if self.kind == "rational":
            return (a1 * a2, 0)
        return (a1 * a2 - self.n * b1 * b2, a1 * b2 + a2 * b1 + self.t * b1 * b2)

    def unit_power(self, unit: Unit, k: int) -> Tuple[int, int]:
        """单位的整数次幂（负幂用共轭除以范数 ±1）"""
        base = unit.coeffs
        if k < 0:
            a, b = base
            nrm = self.norm(a, b)
            # ε⁻¹ = ε̄ / N(ε)，ε̄ = (a + tb) − bω
            base = ((a + self.t * b) * nrm, -b * nrm)
            k = -k
        result = (1, 0)
        for _ in range(k):
            result = self.mul(result, base)
        return result

    def log_vector(self, a, b=0) -> np.ndarray:
        """log|x|_v，复位处取平方绝对值"""
        emb = self.embeddings(a, b)
        return np.log(np.abs(emb)) * np.array(self.place_degrees, dtype=float)

    def to_dict(self):
        return {
            "name": self.name, "kind": self.kind, "degree": self.degree,
            "signature": [self.r1, self.r2], "disc": self.disc, "D": self.D,
            "minimal_polynomial": [1, -self.t, self.n] if self.is_quadratic else None,
            "class_number": self.class_number, "regulator": self.regulator,
            "w": self.w, "zeta_residue": self.zeta_residue,
            "fundamental_units": [
                {"coeffs": u.coeffs, "embeddings": u.embeddings, "log_vector": u.log_vector}
                for u in self.fundamental_units],
        }


def abs_v(x, degree: int):
    """归一化绝对值 |x|_v（复位为 |x|²）"""
    return np.abs(x) ** degree


def _check_squarefree(D: int):
    if D in (0, 1):
        raise ValidationError(f"D = {D} 不构成二次域")
    if any(e > 1 for e in factorint(abs(D)).values()):
        raise ValidationError(f"D = {D} 不是无平方因子整数")


def kronecker(d: int, a: int) -> int:
    """Kronecker 符号 (d/a)，a ≥ 1"""
    k = 0
    while a % 2 == 0:
        a //= 2
        k += 1
    value = 1
    if k:
        if d % 2 == 0:
            return 0
        two = 1 if d % 8 in (1, 7) else -1
        value = two ** k
    if a == 1:
        return value
    return value * int(jacobi_symbol(d % a, a))


def pell_unit(disc: int) -> Tuple[int, int]:
    """求 x² − disc·y² = ±4 的最小正解，返回 (x, y)"""
    for y in range(1, PELL_BUDGET + 1):
        base = disc * y * y
        for shift in (-4, 4):
            square = base + shift
            if square > 0:
                x = math.isqrt(square)
                if x * x == square:
                    return x, y
    raise BudgetError(f"Pell 搜索超过 {PELL_BUDGET} 步，请通过配置提供基本单位",
                      needed=None, budget=PELL_BUDGET)


def _class_number(disc: int, w: int, log_eps: float) -> int:
    if disc < 0:
        total = sum(kronecker(disc, a) * a for a in range(1, -disc))
        return int(round(-w * total / (2 * -disc)))
    total = math.fsum(kronecker(disc, a) * math.log(math.sin(math.pi * a / disc))
                      for a in range(1, disc))
    return int(round(-total / (2 * log_eps)))


def residue_formula(r1: int, r2: int, h: int, R: float, w: int, disc: int) -> float:
    """类数公式：Res_{s=1} ζ_K = 2^{r1}(2π)^{r2} h R / (w √|d|)"""
    return float(2 ** r1 * (2 * math.pi) ** r2 * h * R / (w * math.sqrt(abs(disc))))


@lru_cache(maxsize=64)
def make_quadratic(D: int) -> NumberField:
    """构造二次域 Q(√D)

    Args:
        D: 无平方因子整数，D ∉ {0, 1}

    Returns:
        NumberField
    """
    _check_squarefree(D)
    if D % 4 == 1:
        t, n, disc = 1, (1 - D) // 4, D
    else:
        t, n, disc = 0, -D, 4 * D
    name = f"Q(sqrt({D}))" if D != -1 else "Q(i)"

    if D < 0:
        if D == -1:
            torsion_coeffs, w = (0, 1), 4
        elif D == -3:
            torsion_coeffs, w = (0, 1), 6
        else:
            torsion_coeffs, w = (-1, 0), 2
        field_ = NumberField(name=name, kind="quadratic", degree=2, r1=0, r2=1,
                             disc=disc, class_number=1, regulator=1.0,
                             torsion=Unit(torsion_coeffs, (), (0.0,), w), D=D, t=t, n=n)
        emb = tuple(complex(z) for z in field_.embeddings(*torsion_coeffs))
        torsion = Unit(torsion_coeffs, emb, (0.0,), w)
        h = _class_number(disc, w, 0.0)
        units: Tuple[Unit, ...] = ()
        R = 1.0
    else:
        x, y = pell_unit(disc)
        coeffs = ((x - y) // 2, y) if t else (x // 2, y)
        shell = NumberField(name=name, kind="quadratic", degree=2, r1=2, r2=0,
                            disc=disc, class_number=1, regulator=1.0,
                            torsion=Unit((-1, 0), (-1.0, -1.0), (0.0, 0.0), 2), D=D, t=t, n=n)
        emb = shell.embeddings(*coeffs)
        if emb[0].real < 1:
            raise ValidationError(f"基本单位嵌入异常: {emb}")
        logs = tuple(float(v) for v in shell.log_vector(*coeffs))
        units = (Unit(coeffs, tuple(complex(z) for z in emb), logs),)
        torsion = shell.torsion
        R = abs(logs[0])
        h = _class_number(disc, 2, R)
        logger.debug(f"{name}: 基本单位 {coeffs}, log ε = {R:.10f}")

    r1, r2 = (2, 0) if D > 0 else (0, 1)
    residue = residue_formula(r1, r2, h, R, torsion.order, disc)
    return NumberField(name=name, kind="quadratic", degree=2, r1=r1, r2=r2, disc=disc,
                       class_number=h, regulator=R, torsion=torsion,
                       fundamental_units=units, D=D, t=t, n=n, zeta_residue=residue)


def make_rational() -> NumberField:
    """有理数域 Q（退化配置，用于经典和式的交叉检验）"""
    torsion = Unit((-1, 0), (-1.0 + 0j,), (0.0,), 2)
    return NumberField(name="Q", kind="rational", degree=1, r1=1, r2=0, disc=1,
                       class_number=1, regulator=1.0, torsion=torsion, zeta_residue=1.0)


def make_custom(spec: dict) -> NumberField:
    """由配置提供全部不变量的数域（不支持剩余环算术）"""
    try:
        r1, r2 = int(spec["r1"]), int(spec["r2"])
        degree = int(spec["degree"])
        disc = int(spec["disc"])
        h = int(spec.get("h", 1))
        w = int(spec.get("w", 2))
        raw_units = spec.get("units", [])
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"自定义数域配置缺少字段: {e}")
    if r1 + 2 * r2 != degree:
        raise ValidationError(f"签名 ({r1}, {r2}) 与次数 {degree} 不符")
    degrees = (1,) * r1 + (2,) * r2
    units = []
    for item in raw_units:
        emb = tuple(complex(*z) if isinstance(z, (list, tuple)) else complex(z)
                    for z in item["embeddings"])
        if len(emb) != r1 + r2:
            raise ValidationError("单位嵌入个数与阿基米德位个数不符")
        logs = tuple(d * math.log(abs(z)) for d, z in zip(degrees, emb))
        if abs(sum(logs)) > 1e-8:
            raise ValidationError(f"单位对数向量之和不为 0: {sum(logs)}")
        units.append(Unit(None, emb, logs))
    if len(units) != r1 + r2 - 1:
        raise ValidationError(f"需要 {r1 + r2 - 1} 个基本单位，得到 {len(units)} 个")
    if "R" in spec:
        R = float(spec["R"])
    elif units:
        R = abs(float(np.linalg.det(np.array([u.log_vector[:-1] for u in units]))))
    else:
        R = 1.0
    torsion = Unit(None, tuple(complex(-1.0) for _ in degrees), (0.0,) * (r1 + r2), w)
    residue = residue_formula(r1, r2, h, R, w, disc)
    return NumberField(name=spec.get("name", "custom"), kind="custom", degree=degree,
                       r1=r1, r2=r2, disc=disc, class_number=h, regulator=R,
                       torsion=torsion, fundamental_units=tuple(units), zeta_residue=residue)


def make_field(spec: dict) -> NumberField:
    kind = spec.get("kind")
    if kind == "quadratic":
        try:
            D = int(spec["D"])
        except (KeyError, ValueError, TypeError):
            raise ValidationError(f"二次域配置需要整数 D: {spec}")
        return make_quadratic(D)
    if kind == "rational":
        return make_rational()
    if kind == "custom":
        return make_custom(spec)
    raise ValidationError(f"未知的数域类型: {kind}")


# ---------------------------------------------------------------------------
# 素数分解


def split_prime(F: NumberField, p: int) -> str:
    """素数 p 在 F 中的分解类型: inert / split / ramified（有理域为 rational）"""
    if not isprime(p):
        raise ValidationError(f"{p} 不是素数")
    F._require_arithmetic()
    if F.kind == "rational":
        return "rational"
    if F.disc % p == 0:
        return "ramified"
    return "split" if kronecker(F.disc, p) == 1 else "inert"


def _poly_roots_mod_p(F: NumberField, p: int) -> List[int]:
    x = np.arange(p, dtype=np.int64)
    values = (x * x - F.t * x + F.n) % p
    return [int(v) for v in x[values == 0]]


def prime_labels(F: NumberField, p: int) -> List[PrimeLabel]:
    """p 之上的全部素理想"""
    kind = split_prime(F, p)
    if kind == "split":
        roots = _poly_roots_mod_p(F, p)
        return [PrimeLabel(p, "split-1", roots[0]), PrimeLabel(p, "split-2", roots[1])]
    return [PrimeLabel(p, kind)]


def hensel_root(F: NumberField, label: PrimeLabel, k: int) -> int:
    """把分裂素理想的根 ω ≡ r (mod p) 提升到 mod p^k"""
    m = label.p
    x = label.root
    modulus = label.p ** k
    while m < modulus:
        m = min(m * m, modulus)
        f = x * x - F.t * x + F.n
        df = 2 * x - F.t
        x = (x - f * pow(df, -1, m)) % m
    return x % modulus


def parse_modulus(F: NumberField, text: str) -> IdealData:
    """解析模数描述

    "1" 为单位理想；"7" 表示 7 之上的全部素理想；"11.1^2" 指定分裂因子及指数；
    因子之间用 "*" 连接。
    """
    text = (text or "1").replace(" ", "")
    exponents: Dict[PrimeLabel, int] = {}
    if text in ("1", "(1)"):
        return IdealData()
    for part in text.split("*"):
        part = part.strip("()")
        base, _, exp_text = part.partition("^")
        try:
            e = int(exp_text) if exp_text else 1
            p_text, _, index = base.partition(".")
            p = int(p_text)
        except ValueError:
            raise ValidationError(f"模数格式错误: {part}")
        if e < 1:
            raise ValidationError(f"指数必须为正: {part}")
        labels = prime_labels(F, p)
        if labels[0].tag == "ramified":
            raise ValidationError(f"分歧素数 {p} 不能出现在模数中")
        if index:
            labels = [lab for lab in labels if lab.tag.endswith(f"-{index}")]
            if not labels:
                raise ValidationError(f"{p} 在 {F.name} 中没有第 {index} 个素因子")
        for lab in labels:
            exponents[lab] = exponents.get(lab, 0) + e
    factors = tuple(sorted(exponents.items(), key=lambda item: (item[0].p, item[0].tag)))
    return IdealData(factors)


def _integer_level(c: IdealData) -> int:
    """c ∩ Z 中的 m：m·O ⊆ c"""
    return math.lcm(1, *(label.p ** e for label, e in c.factors))


def euler_phi(F: NumberField, c: IdealData, crosscheck: bool = True) -> int:
    """φ(c) = |(O_K/c)^×|，N(c) ≤ 10⁴ 时用剩余类暴力枚举交叉验证"""
    value = c.phi
    if (crosscheck and c.norm <= PHI_CROSSCHECK_LIMIT
            and _integer_level(c) ** F.degree <= BRUTE_FORCE_BUDGET):
        brute = euler_phi_bruteforce(F, c)
        if brute != value:
            raise ValidationError(f"φ(c) 公式值 {value} 与暴力计数 {brute} 不符")
    return value


def euler_phi_bruteforce(F: NumberField, c: IdealData) -> int:
    """在 O/mO 上逐个检查与 c 互素的剩余类，再除以 [c : mO]"""
    F._require_arithmetic()
    m = _integer_level(c)
    width = m if F.degree == 2 else 1
    if m * width > BRUTE_FORCE_BUDGET:
        raise BudgetError(f"O/mO 有 {m * width} 个元素，超出暴力计数预算",
                          needed=m * width, budget=BRUTE_FORCE_BUDGET)
    rings = [ResidueRing(F, label, e) for label, e in c.factors]
    a = np.arange(m, dtype=np.int64)
    coprime = 0
    for b in range(width):
        ok = np.ones(m, dtype=bool)
        for ring in rings:
            ok &= ring.is_unit(ring.from_element(a, b))
        coprime += int(np.count_nonzero(ok))
    # O/c 的每个剩余类在 O/mO 中出现 m^d / N(c) 次
    return coprime * c.norm // (m * width)


def valuation(F: NumberField, label: PrimeLabel, a: int, b: int = 0) -> int:
    """v_p(a + bω)"""
    if a == 0 and b == 0:
        raise ValidationError("零元没有赋值")
    p = label.p
    if label.tag in ("inert", "rational"):
        v = 0
        while a % p == 0 and b % p == 0:
            a //= p
            b //= p
            v += 1
        return v
    nrm = abs(int(F.norm(a, b)))
    vn = 0
    while nrm % p == 0:
        nrm //= p
        vn += 1
    if label.tag == "ramified":
        return vn
    R = hensel_root(F, label, vn + 1)
    x = (a + b * R) % p ** (vn + 1)
    v = 0
    while v <= vn and x % p ** (v + 1) == 0:
        v += 1
    return v


def factor_element(F: NumberField, a: int, b: int = 0) -> Dict[PrimeLabel, int]:
    """主理想 (a + bω) 的素理想分解"""
    nrm = abs(int(F.norm(a, b)))
    result: Dict[PrimeLabel, int] = {}
    for p in sorted(factorint(nrm)):
        for label in prime_labels(F, p):
            v = valuation(F, label, a, b)
            if v:
                result[label] = v
    return result


def ideal_counts(F: NumberField, X: int) -> np.ndarray:
    """a_m = #{理想 : N(a) = m}，m ≤ X（下标 0 不用）

    由分解类型的局部系数做乘性筛。
    """
    if X < 1:
        raise ValidationError("X 必须 ≥ 1")
    F._require_arithmetic()
    counts = np.ones(X + 1, dtype=np.int64)
    counts[0] = 0
    vp = np.zeros(X + 1, dtype=np.int64)
    for p in primerange(2, X + 1):
        kind = split_prime(F, p)
        top = int(math.log(X) / math.log(p)) + 1
        ks = np.arange(top + 1)
        if kind == "inert":
            local = (ks % 2 == 0).astype(np.int64)
        elif kind == "split":
            local = ks + 1
        else:
            local = np.ones_like(ks)
        idx = np.arange(p, X + 1, p)
        vp[idx] = 0
        q = p
        while q <= X:
            vp[q::q] += 1
            q *= p
        counts[idx] *= local[vp[idx]]
    return counts


def zeta_residue_series(F: NumberField, X: int = 10 ** 6) -> float:
    """Res ζ_K 的级数估计: #{N(a) ≤ X} / X"""
    counts = ideal_counts(F, X)
    return float(counts.sum()) / X


# ---------------------------------------------------------------------------
# 剩余环 O/p^e


class ResidueRing:
    """O/p^e 的向量化算术

    惰性素数: 元素编码为 a + b·m（m = p^e），对应 a + bω；
    分裂素数与有理素数: O/p^e ≅ Z/p^e，编码为整数。
    """

    def __init__(self, F: NumberField, label: PrimeLabel, e: int):
        F._require_arithmetic()
        if label.tag == "ramified":
            raise ValidationError(f"分歧素数 {label.p} 不能作为模数因子")
        self.F = F
        self.label = label
        self.e = e
        self.m = label.p ** e
        self.inert = label.tag == "inert"
        self.root = hensel_root(F, label, e) if label.is_split else None

    @property
    def size(self) -> int:
        return self.m * self.m if self.inert else self.m

    def from_element(self, a, b=0):
        """把 a + bω 约化为编码"""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.inert:
            return (a % self.m) + (b % self.m) * self.m
        if self.root is None:
            return a % self.m
        return (a % self.m + (b % self.m) * self.root) % self.m

    def split_code(self, code):
        code = np.asarray(code, dtype=np.int64)
        return code % self.m, code // self.m

    def mul(self, x, y):
        if not self.inert:
            return (np.asarray(x, dtype=np.int64) * np.asarray(y, dtype=np.int64)) % self.m
        a1, b1 = self.split_code(x)
        a2, b2 = self.split_code(y)
        m = self.m
        bb = (b1 * b2) % m
        a = (a1 * a2 - self.F.n * bb) % m
        b = (a1 * b2 + a2 * b1 + self.F.t * bb) % m
        return a + b * m

    def pow(self, x, k: int):
        x = np.asarray(x, dtype=np.int64)
        result = np.ones_like(x)
        base = x.copy()
        while k > 0:
            if k & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            k >>= 1
        return result

    def is_unit(self, code):
        if not self.inert:
            return np.asarray(code) % self.label.p != 0
        a, b = self.split_code(code)
        nrm = (a * a + self.F.t * a * b + self.F.n * b * b) % self.label.p
        return nrm != 0

    def units(self) -> np.ndarray:
        codes = np.arange(self.size, dtype=np.int64)
        return codes[self.is_unit(codes)]

    def reduce(self, code, level: int):
        """约化到 O/p^level"""
        mk = self.label.p ** level
        if not self.inert:
            return np.asarray(code) % mk
        a, b = self.split_code(code)
        return (a % mk) + (b % mk) * mk

    def trace(self, code):
        """Tr(a + bω) = 2a + tb（分裂与有理情形即整数本身），取模 m"""
        if not self.inert:
            return np.asarray(code, dtype=np.int64) % self.m
        a, b = self.split_code(code)
        return (2 * a + self.F.t * b) % self.m

    def inverse(self, code):
        return self.pow(code, self.unit_order() - 1)

    def unit_order(self) -> int:
        N = self.label.norm
        return N ** (self.e - 1) * (N - 1)


@dataclass
class UnitGroup:
    """(O/p^e)^× 的不变因子分解与离散对数表"""
    ring: ResidueRing
    generators: Tuple[int, ...]
    orders: Tuple[int, ...]
    _codes: np.ndarray = field(repr=False, default=None)
    _exponents: np.ndarray = field(repr=False, default=None)

    @property
    def label(self) -> PrimeLabel:
        return self.ring.label

    @property
    def e(self) -> int:
        return self.ring.e

    @property
    def order(self) -> int:
        return math.prod(self.orders)

    def contains(self, code) -> np.ndarray:
        code = np.asarray(code, dtype=np.int64)
        idx = np.clip(np.searchsorted(self._codes, code), 0, len(self._codes) - 1)
        return self._codes[idx] == code

    def dlog(self, code) -> np.ndarray:
        """离散对数：返回指数向量，形状 (..., k)"""
        code = np.asarray(code, dtype=np.int64)
        if not np.all(self.contains(code)):
            raise ValidationError(f"元素不可逆（模 {self.label}^{self.e}）")
        return self._exponents[np.searchsorted(self._codes, code)]

    def element(self, exponents: Sequence[int]) -> int:
        value = np.int64(1)
        for g, k in zip(self.generators, exponents):
            value = self.ring.mul(value, self.ring.pow(np.int64(g), int(k) % self.order))
        return int(value)

    def all_elements(self) -> Tuple[np.ndarray, np.ndarray]:
        return self._codes, self._exponents


def _sylow_basis(ring: ResidueRing, sylow: np.ndarray, ell: int) -> List[Tuple[int, int]]:
    """ℓ-群的贪心基：每步取商群中阶最大的元素并校正为直和因子"""
    basis: List[Tuple[int, int]] = []
    members = np.array([1], dtype=np.int64)
    member_exps = np.zeros((1, 0), dtype=np.int64)
    candidates = np.sort(sylow)
    while len(members) < len(sylow):
        # 商群中的阶 ℓ^j
        qorder = np.zeros(len(candidates), dtype=np.int64)
        power = candidates.copy()
        inside = np.isin(power, members)
        j = 0
        while not np.all(inside):
            j += 1
            power = ring.pow(power, ell)
            qorder[~inside] = j
            inside = inside | np.isin(power, members)
        best = int(np.argmax(qorder))
        x = int(candidates[best])
        m = ell ** int(qorder[best])
        xm = int(ring.pow(np.int64(x), m))
        sorted_idx = np.argsort(members)
        pos = sorted_idx[np.searchsorted(members[sorted_idx], xm)]
        coeffs = member_exps[pos]
        for (g, n_g), c in zip(basis, coeffs):
            if c % m:
                raise ValidationError("ℓ-群基构造失败：系数不可整除")
            inv = (-(int(c) // m)) % n_g
            x = int(ring.mul(np.int64(x), ring.pow(np.int64(g), inv)))
        basis.append((x, m))
        powers = [np.int64(1)]
        for _ in range(m - 1):
            powers.append(ring.mul(powers[-1], np.int64(x)))
        powers = np.array(powers, dtype=np.int64)
        members = ring.mul(members[:, None], powers[None, :]).ravel()
        member_exps = np.concatenate([
            np.repeat(member_exps, m, axis=0),
            np.tile(np.arange(m), len(member_exps))[:, None]], axis=1)
    return basis


def residue_unit_group(F: NumberField, label: PrimeLabel, e: int,
                       budget: int = BRUTE_FORCE_BUDGET) -> UnitGroup:
    """(O_K/p^e)^× 的生成元与循环阶

    Args:
        F: 数域
        label: 素理想
        e: 指数 ≥ 1
        budget: N(p)^e 的暴力上限

    Returns:
        UnitGroup，阶的乘积等于 φ(p^e)
    """
    if label.tag == "ramified":
        raise ValidationError(f"分歧素数 {label.p} 被排除在模数之外")
    if e < 1:
        raise ValidationError("指数 e 必须 ≥ 1")
    size = label.norm ** e
    if size > budget:
        raise BudgetError(f"N(p)^e = {size} 超出暴力预算 {budget}", needed=size, budget=budget)
    return _unit_group_cached(F, label, e)


@lru_cache(maxsize=128)
def _unit_group_cached(F: NumberField, label: PrimeLabel, e: int) -> UnitGroup:
    ring = ResidueRing(F, label, e)
    units = ring.units()
    N = len(units)
    by_ell = []
    for ell, a in sorted(factorint(N).items()):
        sylow = np.unique(ring.pow(units, N // ell ** a))
        basis = _sylow_basis(ring, sylow, ell)
        by_ell.append(sorted(basis, key=lambda item: -item[1]))
    depth = max((len(b) for b in by_ell), default=0)
    generators, orders = [], []
    for i in range(depth):
        g, n_i = np.int64(1), 1
        for basis in by_ell:
            if i < len(basis):
                g = ring.mul(g, np.int64(basis[i][0]))
                n_i *= basis[i][1]
        generators.append(int(g))
        orders.append(n_i)

    codes = np.array([1], dtype=np.int64)
    exps = np.zeros((1, 0), dtype=np.int64)
    for g, n_i in zip(generators, orders):
        powers = [np.int64(1)]
        for _ in range(n_i - 1):
            powers.append(ring.mul(powers[-1], np.int64(g)))
        powers = np.array(powers, dtype=np.int64)
        codes = ring.mul(codes[:, None], powers[None, :]).ravel()
        exps = np.concatenate([np.repeat(exps, n_i, axis=0),
                               np.tile(np.arange(n_i), len(exps))[:, None]], axis=1)
    order = np.argsort(codes)
    codes, exps = codes[order], exps[order]
    if len(np.unique(codes)) != N:
        raise ValidationError(f"单位群分解失败（模 {label}^{e}）")
    logger.debug(f"(O/{label}^{e})^× 不变因子: {orders}")
    return UnitGroup(ring, tuple(generators), tuple(orders), codes, exps)
