"""全局求和公式与非消失平均

验证模式 (n = 1, c = (1), h = 1):
    G(x) = Y^{−1}·(R_β + R_1 + G*(1/x))
其中 G 在原点侧直接求和，G* 由 Poisson 对偶侧的 Fourier 变换求和，
R_β 由 L(β, χ) 的谱展开给出，R_1 为 s = 1 处的留数项。
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence

import mpmath
import numpy as np
from numpy.polynomial.laguerre import laggauss
from scipy.interpolate import CubicSpline
from scipy.special import hankel1e, j0

from archgamma import (RankinSelbergData, TestFunctionSuite, _hat_v0, g0, gstar_arch,
                       mellin_hat_g, test_function_value)
from charlattice import Hyperplane
from errors import BudgetError, PoleError, UnsupportedFieldError, ValidationError
from heckefamily import (ArchCharacter, FamilySpec, HeckeCharacter, analytic_conductor,
                         build_family, family_volume, parallel_map)
from lseries import (IdealCache, box_elements, element_lambda, hecke_L_afe, rs_is_trivial,
                     shared_ideal_cache)
from numberfield import IdealData, NumberField
from quadrature import composite

logger = logging.getLogger('HeckeLab.Voronoi')

EPSILON = 0.05
# 小 k 用 mpmath 精确计算，其余用样条
K_EXACT = 0.25
K_ROTATE = 8.0
K_STEP = 0.04
K_CHUNK = 1024
K_LIMIT = 20000.0
LAGUERRE_N = 64
MP_DPS = 30
SPECTRAL_GROWTH = 4096
STRUCTURAL_RADIUS = 8.0

__all__ = ["rs_coefficients", "global_G", "global_G_star", "residue_term_R", "verify_summation",
           "verify_grid", "nonvanishing_average", "hecke_L_afe", "GlobalEvaluation"]


def rs_coefficients(rs: RankinSelbergData, p, r: int) -> float:
    """∏_{i,j}(1 − α_i ᾱ_j X)^{−1} 中 X^r 的系数"""
    if r < 0:
        raise ValidationError("r 必须 ≥ 0")
    return float(rs.lambda_coefficients(p, r + 1)[r])


def evaluation_point(F: NumberField, Y: float, v0: int = 0) -> tuple:
    """x_{v0} = Y^{1/[K_{v0}:R]}，其余位为 1，|x|_A = Y"""
    if not 0 < Y <= 1:
        raise ValidationError("Y 必须在 (0, 1] 中")
    d0 = F.place_degrees[v0]
    return tuple(Y ** (1.0 / d0) if v == v0 else 1.0 for v in range(F.r))


def _c_K(F: NumberField) -> float:
    """c_K = π^{r2} / Res ζ_K"""
    return math.pi ** F.r2 / F.zeta_residue


def _require_exact_mode(F: NumberField, suite: TestFunctionSuite):
    if F.class_number != 1:
        raise UnsupportedFieldError(f"{F.name} 的类数为 {F.class_number}")
    if F.kind == "custom":
        raise UnsupportedFieldError("自定义数域没有整基算术")
    if suite.modulus.factors:
        raise UnsupportedFieldError("求和公式的精确模式只支持 c = (1)")
    if F.r2 and F.r > 1:
        raise UnsupportedFieldError("精确模式不支持 v0 以外的复位")


# ---------------------------------------------------------------------------
# G(x)


def global_G(F: NumberField, Y: float, suite: TestFunctionSuite, rs: RankinSelbergData) -> Dict:
    """G(x) = Σ_{α ∈ O∖0} λ((α))·∏_v g_v(α x_v)，按测试函数支撑精确截断

    Returns:
        {"value", "count", "identity_term"}
    """
    if F.class_number != 1:
        raise UnsupportedFieldError(f"{F.name} 的类数为 {F.class_number}，无法选取生成元")
    x = evaluation_point(F, Y, suite.v0)
    centers, radii = [], []
    for v, deg in enumerate(F.place_degrees):
        if v == suite.v0:
            centers.append(0.0)
            radii.append(1.0 / x[v])
        else:
            centers.append(1.0)
            radii.append(suite.T ** (-1.0 / deg))
    a, b, emb = box_elements(F, centers, radii)
    keep = (a != 0) | (b != 0)
    a, b, emb = a[keep], b[keep], emb[keep]
    values = np.ones(len(a))
    for v in range(F.r):
        values = values * test_function_value(v, emb[:, v] * x[v], suite)
    lam = element_lambda(F, rs, a, b)
    terms = lam * values
    identity = Y ** (-suite.beta) * g0(Y)
    return {"value": math.fsum(terms), "count": int(np.count_nonzero(terms)),
            "identity_term": identity}


# ---------------------------------------------------------------------------
# 对偶侧的径向 Fourier 变换


def _panel_transform(profile, breaks: Sequence[float], k: np.ndarray, kernel) -> np.ndarray:
    """∫ profile(u)·kernel(k u) du，分段 Gauss-Legendre"""
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if len(k) == 0:
        return np.zeros(0)
    span = breaks[-1] - breaks[0]
    panels = 2 + int(float(np.max(k)) * span / math.pi)
    u, w = composite(breaks, panels)
    weights = w * profile(u)
    out = np.empty(len(k))
    for start in range(0, len(k), 256):
        block = slice(start, start + 256)
        out[block] = kernel(np.outer(k[block], u)) @ weights
    return out


def _real_tail(k: np.ndarray, beta: float) -> np.ndarray:
    """∫_1^∞ u^{−β} cos(ku) du（k > 0）"""
    out = np.empty(len(k))
    small = k < K_ROTATE
    with mpmath.workdps(MP_DPS):
        for i in np.nonzero(small)[0]:
            out[i] = float(mpmath.re(mpmath.expint(beta, -1j * float(k[i]))))
    big = ~small
    if np.any(big):
        # u = 1 + ix/k
        x, w = laggauss(LAGUERRE_N)
        kb = k[big]
        inner = (1 + 1j * np.outer(1 / kb, x)) ** (-beta) @ w
        out[big] = (1j * np.exp(1j * kb) / kb * inner).real
    return out


def _complex_tail(k: np.ndarray, mu: float) -> np.ndarray:
    """∫_1^∞ ρ^μ J₀(kρ) dρ（k > 0）"""
    out = np.empty(len(k))
    a = mu + 1
    small = k < K_ROTATE
    with mpmath.workdps(MP_DPS):
        front = mpmath.mpf(2) ** mu * mpmath.gamma(a / 2) / mpmath.gamma(1 - a / 2)
        for i in np.nonzero(small)[0]:
            kk = mpmath.mpf(float(k[i]))
            value = front * kk ** (-a) - mpmath.hyp1f2(a / 2, 1, a / 2 + 1, -kk ** 2 / 4) / a
            out[i] = float(value)
    big = ~small
    if np.any(big):
        # ρ = 1 + ix/k，H₀⁽¹⁾(k + ix) = hankel1e·e^{ik}·e^{−x}
        x, w = laggauss(LAGUERRE_N)
        kb = k[big]
        z = kb[:, None] + 1j * x[None, :]
        inner = ((1 + 1j * x[None, :] / kb[:, None]) ** mu * hankel1e(0, z)) @ w
        out[big] = (1j / kb * np.exp(1j * kb) * inner).real
    return out


def h_hat(k, beta: float, degree: int) -> np.ndarray:
    """h(z) = |z|_v^{−β}(g₀(|z|_v) − 1) 的 Fourier 变换，k = 2π·d·|ξ|

    实位: 2∫u^{−β}(g₀−1)cos(ku)du；复位（自对偶测度 2dxdy）: 4π∫ρ^{1−2β}(g₀(ρ²)−1)J₀(kρ)dρ。
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    out = np.empty(len(k))
    zero = k == 0
    if degree == 1:
        if abs(beta - 1) < 1e-8:
            raise PoleError("ĥ 在 β = 1 处有极点", point=1.0)
        if np.any(zero):
            out[zero] = complex(_hat_v0(1.0, beta)[0]).real
        kp = k[~zero]
        head = _panel_transform(lambda u: u ** (-beta) * (g0(u) - 1), [0.25, 1.0], kp, np.cos)
        out[~zero] = 2 * head - 2 * _real_tail(kp, beta)
        return out
    mu = 1 - 2 * beta
    if abs((mu + 1) / 2 - round((mu + 1) / 2)) < 1e-8 and (mu + 1) / 2 <= 0:
        raise PoleError(f"ĥ 在 β = {beta} 处有极点", point=beta)
    if np.any(zero):
        out[zero] = math.pi * complex(_hat_v0(1.0, beta)[0]).real
    kp = k[~zero]
    head = _panel_transform(lambda r: r ** mu * (g0(r * r) - 1), [0.5, 1.0], kp, j0)
    out[~zero] = 4 * math.pi * (head - _complex_tail(kp, mu))
    return out


def f0_hat(k) -> np.ndarray:
    """F₀ = 2∫_0^1 g₀(w)cos(kw)dw，实位 g₀(T|x−1|) 的 Fourier 变换为 e^{−2πiη}F₀(2π|η|/T)/T"""
    return 2 * _panel_transform(g0, [0.0, 0.25, 1.0], k, np.cos)


class RadialTransform:
    """径向变换的样条表，超出 k_end 后按 0 处理并记录余项"""

    def __init__(self, exact, tol: float, name: str = ""):
        self.exact = exact
        self.name = name
        samples = np.linspace(0.0, K_ROTATE, 65)
        self.peak = float(np.max(np.abs(exact(samples))))
        knots, values = [], []
        start = K_EXACT
        while True:
            grid = start + K_STEP * np.arange(K_CHUNK)
            vals = exact(grid)
            knots.append(grid)
            values.append(vals)
            self.tail = float(np.max(np.abs(vals)))
            if self.tail < tol * self.peak and start > K_ROTATE:
                break
            start = float(grid[-1]) + K_STEP
            if start > K_LIMIT:
                raise BudgetError(f"{name} 在 k ≤ {K_LIMIT:.0f} 内没有衰减到容差 {tol}",
                                  tail=self.tail / self.peak)
        k = np.concatenate(knots)
        self.k_end = float(k[-1])
        self.spline = CubicSpline(k, np.concatenate(values))
        logger.debug(f"{name}: 样条覆盖 k ≤ {self.k_end:.1f}, 末端幅度 {self.tail:.2e}")

    def __call__(self, k) -> np.ndarray:
        k = np.abs(np.atleast_1d(np.asarray(k, dtype=float)))
        out = np.zeros(len(k))
        small = k < K_EXACT
        if np.any(small):
            out[small] = self.exact(k[small])
        mid = (~small) & (k <= self.k_end)
        out[mid] = self.spline(k[mid])
        return out


def _different_inverse(F: NumberField) -> np.ndarray:
    """δ = ω − ω̄ 的嵌入，d^{−1} = δ^{−1}O"""
    if F.kind == "rational":
        return np.array([1.0 + 0j])
    omega = F.embeddings(0, 1).astype(complex)
    if F.r2:
        return np.array([omega[0] - np.conj(omega[0])])
    return np.array([omega[0] - omega[1], omega[1] - omega[0]])


def _poisson_G_star(F: NumberField, Y: float, suite: TestFunctionSuite, tol: float) -> Dict:
    _require_exact_mode(F, suite)
    v0 = suite.v0
    d0 = F.place_degrees[v0]
    y = Y ** (1.0 / d0)
    hhat = RadialTransform(lambda k: h_hat(k, suite.beta, d0), tol, "ĥ")
    fhat = RadialTransform(f0_hat, tol, "F₀") if F.r > 1 else None
    delta = _different_inverse(F)
    scale, radii = [], []
    for v in range(F.r):
        if v == v0:
            scale.append(1 / (delta[v] * y))
            radii.append(hhat.k_end / (2 * math.pi * d0))
        else:
            scale.append(1 / (delta[v] * suite.T))
            radii.append(fhat.k_end / (2 * math.pi))
    a, b, xi = box_elements(F, np.zeros(F.r), radii, scale)
    keep = (a != 0) | (b != 0)
    xi = xi[keep]
    values = hhat(2 * math.pi * d0 * np.abs(xi[:, v0])).astype(complex)
    origin = float(hhat(np.array([0.0]))[0])
    for v in range(F.r):
        if v == v0:
            continue
        eta = xi[:, v].real * suite.T
        values = values * np.exp(-2j * math.pi * eta) * fhat(2 * math.pi * np.abs(xi[:, v])) / suite.T
        origin *= float(fhat(np.array([0.0]))[0]) / suite.T
    norm = abs(F.disc) ** -0.5
    total = norm * complex(math.fsum(values.real), math.fsum(values.imag))
    tail = norm * (hhat.tail + (fhat.tail if fhat else 0.0)) * max(len(values), 1)
    logger.info(f"G*: {len(values)} 个对偶格点, Σ = {total.real:.10g}")
    return {"value": total.real, "imag": total.imag, "count": len(values), "tail": tail,
            "origin": norm * origin, "mode": "poisson"}


def _structural_G_star(F: NumberField, Y: float, suite: TestFunctionSuite,
                       rs: RankinSelbergData, tol: float) -> Dict:
    """Σ_{α ∈ O∖0} λ((α))·∏_v g*_v(α_v / x_v)（S = S_∞）"""
    if suite.modulus.factors or suite.ramified_pi:
        raise UnsupportedFieldError("结构模式的 G* 只支持 S = S_∞")
    x = evaluation_point(F, Y, suite.v0)
    radii = [STRUCTURAL_RADIUS * (x[v] if v == suite.v0 else suite.T ** (1.0 / d))
             for v, d in enumerate(F.place_degrees)]
    a, b, emb = box_elements(F, np.zeros(F.r), radii)
    keep = (a != 0) | (b != 0)
    a, b, emb = a[keep], b[keep], emb[keep]
    values = element_lambda(F, rs, a, b).astype(complex)
    tail = 0.0
    for v in range(F.r):
        res = gstar_arch(v, emb[:, v] / x[v], suite, rs, tol=tol)
        values = values * res["values"]
        tail += res["tail_bound"]
    outer = np.any(np.abs(emb) > 0.9 * np.array(radii)[None, :], axis=1)
    tail += float(np.sum(np.abs(values[outer])))
    total = complex(math.fsum(values.real), math.fsum(values.imag))
    return {"value": total.real, "imag": total.imag, "count": len(values), "tail": tail,
            "mode": "structural"}


def global_G_star(F: NumberField, Y: float, suite: TestFunctionSuite, rs: RankinSelbergData,
                  tol: float = 1e-10) -> Dict:
    """G*(1/x)：n = 1 平凡数据走 Poisson 对偶和，否则走结构模式"""
    if tol <= 0:
        raise ValidationError("tolerance 必须 > 0")
    if rs_is_trivial(rs):
        return _poisson_G_star(F, Y, suite, tol)
    return _structural_G_star(F, Y, suite, rs, tol)


# ---------------------------------------------------------------------------
# 留数项


def _trivial_character(F: NumberField) -> HeckeCharacter:
    return HeckeCharacter((), ArchCharacter((0,) * F.r, (0.0,) * F.r))


def _ghat_product(F: NumberField, chars: Sequence[HeckeCharacter], suite: TestFunctionSuite,
                  s: float) -> np.ndarray:
    """∏_{v≠v0} ĝ_v(s + iτ_v, δ_v)"""
    out = np.ones(len(chars), dtype=complex)
    for v in range(F.r):
        if v == suite.v0:
            continue
        tau = np.array([chi.arch.tau[v] for chi in chars])
        deltas = {chi.arch.delta[v] for chi in chars}
        for d in deltas:
            mask = np.array([chi.arch.delta[v] == d for chi in chars])
            out[mask] *= mellin_hat_g(v, s + 1j * tau[mask], d, suite)
    return out


def spectral_characters(F: NumberField, suite: TestFunctionSuite, tol: float = 1e-8,
                        workers: int = 1):
    """在 τ_{v0} = 0 上、在单位上平凡的全部特征，按 |ĝ| 截断

    Returns:
        (characters, ĝ 乘积, T_eff)
    """
    if F.r == 1:
        chi = _trivial_character(F)
        return [chi], np.ones(1, dtype=complex), 0.0
    h = Hyperplane.distinguished(F.r, suite.v0)
    T_eff = 8.0 * suite.T
    while True:
        spec = FamilySpec(IdealData(), T_eff, h, suite.v0)
        chars = build_family(F, spec, workers)
        ghat = _ghat_product(F, chars, suite, suite.beta)
        amp = np.abs(ghat)
        peak = float(np.max(amp))
        edge = np.array([max(abs(t) for t in chi.arch.tau) > T_eff / 2 for chi in chars])
        edge_max = float(np.max(amp[edge])) if np.any(edge) else 0.0
        if edge_max < tol * peak:
            break
        T_eff *= 2
        if T_eff > SPECTRAL_GROWTH * suite.T:
            raise BudgetError(f"ĝ 在 |τ| ≤ {T_eff:.0f} 内没有衰减到 {tol}",
                              tail=edge_max / peak)
    keep = amp >= tol * peak * 1e-2
    chars = [chi for chi, k in zip(chars, keep) if k]
    logger.info(f"谱展开: T_eff = {T_eff:.0f}, 保留 {len(chars)} 个特征")
    return chars, ghat[keep], T_eff


def residue_term_R(F: NumberField, Y: float, suite: TestFunctionSuite, rs: RankinSelbergData,
                   tol: float = 1e-8, workers: int = 1, cache: Optional[IdealCache] = None) -> Dict:
    """R = R_1 + R_β

    R_1 = π^{r2}|d|^{−1/2}ĝ_{v0}(1)∏_{v≠v0}ĝ_v(1)（s = 1）；
    R_β = Y^{1−β}·2c_K|d|^{−1/2}·Σ_χ L(β, χ)∏_{v≠v0}ĝ_v(β, χ_v)（s = β）。
    非平凡 ω 在 s = 1 处没有极点。
    """
    norm = abs(F.disc) ** -0.5
    R1 = math.pi ** F.r2 * norm * complex(mellin_hat_g(suite.v0, 1.0, 0, suite)).real
    for v in range(F.r):
        if v != suite.v0:
            R1 *= complex(mellin_hat_g(v, 1.0, 0, suite)).real
    result = {"R_1": R1, "c_K": _c_K(F), "poles": {"s=1": R1}}
    if not rs_is_trivial(rs):
        result.update({"R_beta": None, "partial": True, "items": []})
        logger.warning("n ≥ 2: β 线上的 L 值不可得，留数项只含 s = 1 部分")
        return result
    _require_exact_mode(F, suite)
    chars, ghat, T_eff = spectral_characters(F, suite, tol, workers)
    cache = cache or shared_ideal_cache(F)
    values = parallel_map(lambda chi: hecke_L_afe(F, chi, suite.beta, cache=cache)["value"],
                          chars, workers)
    L = np.array(values, dtype=complex)
    terms = L * ghat
    S = complex(math.fsum(terms.real), math.fsum(terms.imag))
    weight = 2 * _c_K(F) * norm
    R_beta = Y ** (1 - suite.beta) * weight * S
    items = [{"id": chi.id, "tau": chi.arch.tau, "delta": chi.arch.delta, "L": L[i],
              "ghat": ghat[i], "term": terms[i]} for i, chi in enumerate(chars)]
    result.update({"R_beta": R_beta.real, "R_beta_imag": R_beta.imag, "spectral_sum": S,
                   "weight": weight, "T_eff": T_eff, "items": items, "partial": False})
    result["poles"]["s=beta"] = R_beta.real
    return result


# ---------------------------------------------------------------------------
# 验证


@dataclass
class GlobalEvaluation:
    field: str
    T: float
    Y: float
    beta: float
    v0: int
    x: tuple
    G: float
    G_star: float
    R_1: float
    R_beta: Optional[float]
    residual: Optional[float]
    tails: Dict = field(default_factory=dict)
    counts: Dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)


def verify_summation(F: NumberField, T: float, Y: float, beta: float, v0: int = 0,
                     tol: float = 1e-8, workers: int = 1,
                     rs: Optional[RankinSelbergData] = None) -> GlobalEvaluation:
    """|G(x) − Y^{−1}(R_β + R_1 + G*(1/x))| / |G(x)|"""
    rs = rs or RankinSelbergData.trivial()
    if not rs_is_trivial(rs):
        raise ValidationError("求和公式的数值验证只支持 n = 1")
    suite = TestFunctionSuite(F, beta, T, v0)
    _require_exact_mode(F, suite)
    x = evaluation_point(F, Y, v0)
    with ThreadPoolExecutor(max_workers=3 if workers > 1 else 1) as pool:
        g_future = pool.submit(global_G, F, Y, suite, rs)
        gs_future = pool.submit(global_G_star, F, Y, suite, rs, tol * 1e-2)
        r_future = pool.submit(residue_term_R, F, Y, suite, rs, tol, workers)
        G, G_star, R = g_future.result(), gs_future.result(), r_future.result()
    rhs = (R["R_beta"] + R["R_1"] + G_star["value"]) / Y
    residual = abs(G["value"] - rhs) / abs(G["value"])
    logger.info(f"{F.name} T={T} Y={Y} β={beta}: G = {G['value']:.10g}, "
                f"右端 = {rhs:.10g}, 相对残差 {residual:.2e}")
    return GlobalEvaluation(
        field=F.name, T=T, Y=Y, beta=beta, v0=v0, x=x, G=G["value"], G_star=G_star["value"],
        R_1=R["R_1"], R_beta=R["R_beta"], residual=residual,
        tails={"G_star": G_star["tail"], "R_beta_imag": R["R_beta_imag"],
               "G_star_imag": G_star["imag"]},
        counts={"G": G["count"], "G_star": G_star["count"], "characters": len(R["items"]),
                "T_eff": R["T_eff"]})


def verify_grid(F: NumberField, Ts: Sequence[float], Ys: Sequence[float], beta: float,
                v0: int = 0, tol: float = 1e-8, workers: int = 1) -> List[Dict]:
    rows = []
    for T in Ts:
        for Y in Ys:
            ev = verify_summation(F, T, Y, beta, v0, tol, workers)
            rows.append({"T": T, "Y": Y, "beta": beta, "G": ev.G, "residual": ev.residual})
    return rows


def nonvanishing_average(F: NumberField, T: float, beta: float,
                         rs: Optional[RankinSelbergData] = None, v0: int = 0,
                         epsilon: float = EPSILON, tol: float = 1e-8, workers: int = 1,
                         Y: Optional[float] = None) -> Dict:
    """从求和公式反解 Σ_χ L(β, χ)ĝ(β, χ) 并与直接的近似函数方程比较

    Y 缺省取 V^{−(n²+1)/2}。
    """
    rs = rs or RankinSelbergData.trivial()
    n2 = rs.n ** 2
    lower = 1 - 2 / (n2 + 1)
    if not lower < beta < 1:
        raise ValidationError(f"β 必须在 ({lower:.4f}, 1) 中")
    h = Hyperplane.distinguished(F.r, v0)
    family = FamilySpec(IdealData(), T, h, v0)
    V = family_volume(F, family)["V"]
    if Y is None:
        Y = V ** (-(n2 + 1) / 2)
    if not 0 < Y < 1:
        raise ValidationError(f"Y = {Y} 不在 (0, 1) 中，需要更大的 T")
    suite = TestFunctionSuite(F, beta, T, v0)
    report = {"field": F.name, "T": T, "beta": beta, "n": rs.n, "V": V, "Y": Y,
              "epsilon": epsilon,
              "error_terms": {"Y^(beta-1)": Y ** (beta - 1),
                              "V^((n2+1)/2+eps)Y^beta": V ** ((n2 + 1) / 2 + epsilon) * Y ** beta}}
    terms = report["error_terms"]
    terms["balance"] = terms["V^((n2+1)/2+eps)Y^beta"] / terms["Y^(beta-1)"]
    G = global_G(F, Y, suite, rs)
    report["G"] = G["value"]
    report["positivity"] = G["value"] >= G["identity_term"] * (1 - 1e-12)
    if not rs_is_trivial(rs):
        G_star = global_G_star(F, Y, suite, rs, tol)
        R = residue_term_R(F, Y, suite, rs, tol, workers)
        report.update({"mode": "structural", "G_star": G_star["value"], "R_1": R["R_1"],
                       "partial": True})
        logger.info("n ≥ 2: 结构运行，不给出 L 值结论")
        return report

    _require_exact_mode(F, suite)
    G_star = global_G_star(F, Y, suite, rs, tol * 1e-2)
    R = residue_term_R(F, Y, suite, rs, tol, workers)
    extracted = Y * G["value"] - R["R_1"] - G_star["value"]
    S_extracted = extracted * Y ** (beta - 1) / R["weight"]
    S_direct = R["spectral_sum"]
    ghat_peak = max(abs(item["ghat"]) for item in R["items"])
    # 质量与计数只取族 X(1, D, T) 中的特征，|τ| > T 的只进入交叉检验
    in_family = [item for item in R["items"] if max(abs(t) for t in item["tau"]) <= T]
    term_abs = np.array([abs(item["term"]) for item in in_family]) / ghat_peak
    mass = math.fsum(term_abs)
    count = int(np.sum(term_abs > 1e-8))

    convexity = []
    for item in in_family:
        chi = HeckeCharacter((), ArchCharacter(tuple(item["delta"]), tuple(item["tau"])))
        C = analytic_conductor(F, chi)
        convexity.append(abs(item["L"]) / C ** ((1 - beta) / 2))

    report.update({
        "mode": "exact", "G_star": G_star["value"], "R_1": R["R_1"],
        "R_beta_extracted": extracted, "R_beta_direct": R["R_beta"],
        "spectral_extracted": S_extracted, "spectral_direct": S_direct,
        "cross_check": abs(S_extracted - S_direct) / max(abs(S_direct), 1e-300),
        "mass": mass, "signed_mass": abs(S_extracted) / ghat_peak, "family_members": len(in_family),
        "mass_target": V ** (1 - epsilon), "mass_ok": mass >= V ** (1 - epsilon),
        "count": count, "count_target": V ** (1 / (n2 + 1) - epsilon),
        "count_ok": count >= V ** (1 / (n2 + 1) - epsilon),
        "characters": len(R["items"]),
        "convexity_max": max(convexity) if convexity else None,
        "convexity_members": len(convexity),
        "residue_block": abs(R["R_1"]) / Y, "residue_block_C": abs(R["R_1"]) * V,
    })
    logger.info(f"非消失: V = {V:.2f}, 质量 {mass:.3f} (目标 {V ** (1 - epsilon):.3f}), "
                f"非零项 {count}, 交叉检验 {report['cross_check']:.2e}")
    return report
