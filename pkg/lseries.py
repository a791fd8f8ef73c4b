"""主理想枚举与 Hecke L 函数的近似函数方程

只支持类数 1 的二次域与有理数域：每个理想取基本区域中唯一的生成元。
"""
import logging
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from archgamma import log_gamma_v
from errors import BudgetError, UnsupportedFieldError, ValidationError
from heckefamily import HeckeCharacter, chi_values
from numberfield import NumberField, factor_element

logger = logging.getLogger('HeckeLab.LSeries')

ENUM_BUDGET = 5 * 10 ** 7
# 光滑截断 G(w) = exp(SMOOTH_A·w²)
SMOOTH_A = 0.25
V_TOL = 1e-14
U_MAX = 14.0
U_STEP = 0.08
LOGY_STEP = 0.05
ROOT_NUMBER_CACHE = 4096


def box_elements(F: NumberField, centers: Sequence[complex], radii: Sequence[float],
                 scale: Optional[Sequence[complex]] = None,
                 budget: int = ENUM_BUDGET) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """枚举 α = a + bω ∈ O，使每个位上 |s_v·α_v − c_v| ≤ R_v

    Returns:
        (a, b, s·嵌入)
    """
    F._require_arithmetic()
    r = F.r
    s = np.ones(r, dtype=complex) if scale is None else np.asarray(scale, dtype=complex)
    c = np.asarray(centers, dtype=complex)
    R = np.asarray(radii, dtype=float)
    if F.kind == "rational":
        mid, rad = (c[0] / s[0]).real, R[0] / abs(s[0])
        a = np.arange(math.ceil(mid - rad), math.floor(mid + rad) + 1, dtype=np.int64)
        b = np.zeros_like(a)
    elif F.r2 == 0:
        omega = np.array([F.embeddings(0, 1)[k].real for k in range(2)])
        lo = ((c - R) / s).real
        hi = ((c + R) / s).real
        lo, hi = np.minimum(lo, hi), np.maximum(lo, hi)
        gap = omega[0] - omega[1]
        b_lo, b_hi = sorted(((lo[0] - hi[1]) / gap, (hi[0] - lo[1]) / gap))
        bs = np.arange(math.floor(b_lo), math.ceil(b_hi) + 1, dtype=np.int64)
        a_lo = np.ceil(np.maximum(lo[0] - bs * omega[0], lo[1] - bs * omega[1]) - 1e-9)
        a_hi = np.floor(np.minimum(hi[0] - bs * omega[0], hi[1] - bs * omega[1]) + 1e-9)
        a, b = _expand_rows(bs, a_lo, a_hi, budget)
    else:
        omega = complex(F.embeddings(0, 1)[0])
        center = c[0] / s[0]
        rho = R[0] / abs(s[0])
        b_lo = (center.imag - rho) / omega.imag
        b_hi = (center.imag + rho) / omega.imag
        bs = np.arange(math.floor(b_lo), math.ceil(b_hi) + 1, dtype=np.int64)
        half = np.sqrt(np.maximum(rho ** 2 - (bs * omega.imag - center.imag) ** 2, 0.0))
        base = center.real - bs * omega.real
        a, b = _expand_rows(bs, np.ceil(base - half - 1e-9), np.floor(base + half + 1e-9), budget)
    emb = F.embeddings(a, b) * s[None, :] if len(a) else np.zeros((0, r), dtype=complex)
    keep = np.all(np.abs(emb - c[None, :]) <= R[None, :] * (1 + 1e-12) + 1e-12, axis=1)
    return a[keep], b[keep], emb[keep]


def _expand_rows(bs, a_lo, a_hi, budget):
    counts = np.maximum(a_hi - a_lo + 1, 0).astype(np.int64)
    total = int(counts.sum())
    if total > budget:
        raise BudgetError(f"格点枚举需要 {total} 个候选，超出预算 {budget}", needed=total, budget=budget)
    b = np.repeat(bs, counts)
    starts = np.repeat(a_lo.astype(np.int64), counts)
    offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
    return starts + offsets, b


@dataclass
class IdealTable:
    """范数 ≤ M 的全部整理想，每个理想一个生成元，按 (范数, a, b) 排序"""
    F: NumberField
    M: int
    norms: np.ndarray
    a: np.ndarray
    b: np.ndarray
    emb: np.ndarray

    def __len__(self):
        return len(self.norms)

    def upto(self, M: float) -> int:
        """范数 ≤ M 的理想个数"""
        return int(np.searchsorted(self.norms, M, side="right"))


def principal_ideals(F: NumberField, M: int) -> IdealTable:
    if F.class_number != 1:
        raise UnsupportedFieldError(f"{F.name} 的类数为 {F.class_number}，理想不全是主理想")
    F._require_arithmetic()
    if M < 1:
        raise ValidationError("M 必须 ≥ 1")
    root = math.sqrt(M) * (1 + 1e-9)
    if F.kind == "rational":
        a = np.arange(1, M + 1, dtype=np.int64)
        b = np.zeros_like(a)
        emb = F.embeddings(a, b)
    elif F.r2 == 0:
        eps = abs(F.fundamental_units[0].embeddings[0])
        a, b, emb = box_elements(F, [0, 0], [eps * root, root])
        R2 = 2 * F.regulator
        with np.errstate(divide="ignore"):
            rho = np.log(np.abs(emb[:, 0])) - np.log(np.abs(emb[:, 1]))
        keep = (emb[:, 0].real > 0) & (rho >= -1e-9) & (rho < R2 - 1e-9)
        a, b, emb = a[keep], b[keep], emb[keep]
    else:
        a, b, emb = box_elements(F, [0], [root])
        theta = np.mod(np.angle(emb[:, 0]) + 1e-12, 2 * math.pi)
        keep = (theta < 2 * math.pi / F.w) & ((a != 0) | (b != 0))
        a, b, emb = a[keep], b[keep], emb[keep]
    norms = np.abs(F.norm(a, b)).astype(np.int64)
    keep = (norms >= 1) & (norms <= M)
    a, b, emb, norms = a[keep], b[keep], emb[keep], norms[keep]
    order = np.lexsort((b, a, norms))
    table = IdealTable(F, M, norms[order], a[order], b[order], emb[order])
    logger.debug(f"{F.name}: 范数 ≤ {M} 的理想 {len(table)} 个")
    return table


def rs_is_trivial(rs) -> bool:
    return rs.n == 1 and not rs.satake and rs.default_satake is None


def element_lambda(F: NumberField, rs, a, b) -> np.ndarray:
    """λ_{π×π̃}((α)) = ∏_p λ(p^{v_p(α)})，逐个元素分解"""
    a = np.atleast_1d(np.asarray(a, dtype=np.int64))
    b = np.atleast_1d(np.asarray(b, dtype=np.int64))
    if rs_is_trivial(rs):
        return np.ones(len(a))
    values = np.ones(len(a))
    cache: Dict = {}
    for i, (x, y) in enumerate(zip(a, b)):
        for label, v in factor_element(F, int(x), int(y)).items():
            if label not in cache:
                cache[label] = rs.lambda_coefficients(label, 64)
            if v >= len(cache[label]):
                cache[label] = rs.lambda_coefficients(label, v + 1)
            values[i] *= cache[label][v]
    return values


def lambda_ideals(table: IdealTable, rs) -> np.ndarray:
    return element_lambda(table.F, rs, table.a, table.b)


def dirichlet_series(F: NumberField, chi: HeckeCharacter, s: complex, M: int,
                     table: Optional[IdealTable] = None) -> complex:
    """截断 Dirichlet 级数 Σ_{N(a) ≤ M} χ(a) N(a)^{−s}"""
    table = table if table is not None and table.M >= M else principal_ideals(F, M)
    k = table.upto(M)
    chi_a = chi_values(F, chi, table.a[:k], table.b[:k], table.emb[:k], primitive=True)
    terms = chi_a * np.exp(-s * np.log(table.norms[:k].astype(float)))
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


# ---------------------------------------------------------------------------
# 近似函数方程


def conductor_norm(F: NumberField, chi: HeckeCharacter) -> int:
    """|d_K|·N(c(χ))"""
    return abs(F.disc) * chi.conductor_ideal.norm


def log_gamma_chi(F: NumberField, chi: HeckeCharacter, s, dual: bool = False) -> np.ndarray:
    """log ∏_v Γ_v(s ± iτ_v + |δ_v|/d_v)"""
    s = np.asarray(s, dtype=complex)
    sign = -1 if dual else 1
    total = np.zeros(s.shape, dtype=complex)
    for d, t, deg in zip(chi.arch.delta, chi.arch.tau, F.place_degrees):
        total = total + log_gamma_v(s + sign * 1j * t + abs(d) / deg, deg)
    return total


def _cutoff_function(F: NumberField, chi: HeckeCharacter, s: complex, dual: bool,
                     c: float, L_start: float):
    """V(y) = (1/2πi)∫_{(c)} γ(s+w)/γ(s)·G(w) y^{−w} dw/w，返回 log y 上的样条与截断点"""
    u = np.arange(-U_MAX, U_MAX + U_STEP / 2, U_STEP)
    w = c + 1j * u
    ratio = np.exp(log_gamma_chi(F, chi, s + w, dual) - log_gamma_chi(F, chi, s, dual))
    weight = ratio * np.exp(SMOOTH_A * w * w) / w * U_STEP / (2 * math.pi)
    L = np.arange(L_start - 1.0, L_start + 60.0, LOGY_STEP)
    V = np.exp(-np.outer(L, w)) @ weight
    big = np.nonzero(np.abs(V) > V_TOL)[0]
    last = min(int(big[-1]) + 4, len(L) - 1) if len(big) else 4
    if last >= len(L) - 1:
        raise BudgetError("近似函数方程的截断函数没有衰减到容差以下")
    L, V = L[:last + 1], V[:last + 1]
    return CubicSpline(L, V.real), CubicSpline(L, V.imag), float(L[-1])


def _afe_pieces(F: NumberField, chi: HeckeCharacter, s: complex, X: float,
                table_provider) -> Dict:
    q = conductor_norm(F, chi)
    log_sq = 0.5 * math.log(q)
    c1 = max(1.5 - s.real, 0.5)
    c2 = max(s.real + 0.5, 0.5)
    # 第一项：Σ χ(a) N^{−s} V_s(N / (X√q))
    re1, im1, Lmax1 = _cutoff_function(F, chi, s, False, c1, -math.log(X) - log_sq)
    re2, im2, Lmax2 = _cutoff_function(F, chi, 1 - s, True, c2, math.log(X) - log_sq)
    M1 = math.exp(Lmax1 + math.log(X) + log_sq)
    M2 = math.exp(Lmax2 - math.log(X) + log_sq)
    table = table_provider(int(max(M1, M2)) + 1)
    k1, k2 = table.upto(M1), table.upto(M2)
    k = max(k1, k2)
    chi_a = chi_values(F, chi, table.a[:k], table.b[:k], table.emb[:k], primitive=True)
    logN = np.log(table.norms[:k].astype(float))
    L1 = logN[:k1] - math.log(X) - log_sq
    V1 = re1(L1) + 1j * im1(L1)
    A = chi_a[:k1] * np.exp(-s * logN[:k1]) * V1
    L2 = logN[:k2] + math.log(X) - log_sq
    V2 = re2(L2) + 1j * im2(L2)
    B = np.conj(chi_a[:k2]) * np.exp((s - 1) * logN[:k2]) * V2
    log_front = ((0.5 - s) * math.log(q) + complex(log_gamma_chi(F, chi, 1 - s, True))
                 - complex(log_gamma_chi(F, chi, s)))
    poles = 0j
    if chi.is_trivial:
        rho = math.sqrt(q) * math.pi ** (-F.r2) * F.zeta_residue
        G = lambda w: np.exp(SMOOTH_A * w * w)
        poles = rho * (G(1 - s) * X ** (1 - s) / (1 - s) + G(-s) * X ** (-s) / s)
        poles = poles / np.exp(s / 2 * math.log(q) + complex(log_gamma_chi(F, chi, s)))
    return {"A": complex(math.fsum(A.real), math.fsum(A.imag)),
            "B": complex(math.fsum(B.real), math.fsum(B.imag)) * complex(np.exp(log_front)),
            "poles": complex(poles), "length": int(max(M1, M2))}


class IdealCache:
    """按需扩展的理想表，可在线程间共享"""

    def __init__(self, F: NumberField, M: int = 1000):
        self.F = F
        self.table = principal_ideals(F, M)
        self._lock = threading.Lock()

    def __call__(self, M: int) -> IdealTable:
        with self._lock:
            if M > self.table.M:
                self.table = principal_ideals(self.F, max(M, 2 * self.table.M))
            return self.table


@lru_cache(maxsize=8)
def shared_ideal_cache(F: NumberField) -> IdealCache:
    """每个数域共用的理想表"""
    return IdealCache(F)


@lru_cache(maxsize=ROOT_NUMBER_CACHE)
def root_number(F: NumberField, chi: HeckeCharacter, X1: float = 1.0,
                X2: float = 1.3) -> complex:
    """由两个光滑尺度拟合根数 W(χ)，按 (数域, 特征, X1, X2) 做 LRU 缓存"""
    provider = shared_ideal_cache(F)
    s0 = complex(0.5, 0.3)
    p1 = _afe_pieces(F, chi, s0, X1, provider)
    p2 = _afe_pieces(F, chi, s0, X2, provider)
    denom = p2["B"] - p1["B"]
    if abs(denom) < 1e-12:
        raise ValidationError("两个光滑尺度给出相同的对偶项，无法拟合根数")
    W = ((p1["A"] - p1["poles"]) - (p2["A"] - p2["poles"])) / denom
    if abs(abs(W) - 1) > 1e-6:
        logger.warning(f"根数模长偏离 1: |W| = {abs(W):.9f}")
    return complex(W)


def hecke_L_afe(F: NumberField, chi: HeckeCharacter, s: complex, X: float = 1.0,
                W: Optional[complex] = None, cache: Optional[IdealCache] = None) -> Dict:
    """L(s, χ) = Σ χ(a)N^{−s}V_s + W·q^{1/2−s}γ̃(1−s)/γ(s)·Σ χ̄(a)N^{s−1}Ṽ_{1−s} − 极点项

    Returns:
        {"value", "root_number", "length"}
    """
    s = complex(s)
    provider = cache or shared_ideal_cache(F)
    if W is None:
        W = root_number(F, chi)
    pieces = _afe_pieces(F, chi, s, X, provider)
    value = pieces["A"] + W * pieces["B"] - pieces["poles"]
    return {"value": value, "root_number": W, "length": pieces["length"]}


def completed_L(F: NumberField, chi: HeckeCharacter, s: complex, value: complex,
                dual: bool = False) -> complex:
    """Λ(s, χ) = q^{s/2}·γ(s)·L(s, χ)"""
    q = conductor_norm(F, chi)
    return complex(value * np.exp(s / 2 * math.log(q) + complex(log_gamma_chi(F, chi, s, dual))))


def functional_equation_check(F: NumberField, chi: HeckeCharacter, s: complex,
                              cache: Optional[IdealCache] = None) -> Dict:
    """比较 Λ(s, χ) 与 W·Λ(1−s, χ̄)"""
    provider = cache or shared_ideal_cache(F)
    W = root_number(F, chi)
    left = hecke_L_afe(F, chi, s, W=W, cache=provider)["value"]
    right = hecke_L_afe(F, chi.conj(), 1 - s, W=root_number(F, chi.conj()),
                        cache=provider)["value"]
    lam_left = completed_L(F, chi, s, left)
    lam_right = W * completed_L(F, chi.conj(), 1 - s, right)
    return {"left": lam_left, "right": lam_right, "root_number": W,
            "residual": abs(lam_left - lam_right) / max(abs(lam_left), 1e-300)}
