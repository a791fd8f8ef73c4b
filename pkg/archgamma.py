"""阿基米德 gamma 因子、测试函数、Mellin 变换与振荡变换 g*_v

测度约定：d^×x_v = ζ_v(1)·dx_v/|x|_v，径向函数在实位与复位上都化为 2du/u。
"""
import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import loggamma

from errors import BudgetError, PoleError, ValidationError
from numberfield import IdealData, NumberField, PrimeLabel
from quadrature import composite, periodic_trapezoid

logger = logging.getLogger('HeckeLab.ArchGamma')

POLE_TOL = 1e-8
PLATEAU = 0.25
# 每个 t 方向扫描块的点数
SCAN_CHUNK = 200
SCAN_MAX_CHUNKS = 400
# Mellin 变换每块的 s 个数
MELLIN_BLOCK = 128
# 二维驻相求积每块的行数
STATPHASE_ROWS = 256


def _as_complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def complete_homogeneous(values: Sequence[complex], K: int) -> np.ndarray:
    """1/∏(1 − a·X) 的前 K 个幂级数系数 h_0, …, h_{K−1}"""
    h = np.zeros(K, dtype=complex)
    if K == 0:
        return h
    h[0] = 1.0
    for a in values:
        for k in range(1, K):
            h[k] += a * h[k - 1]
    return h


@dataclass(frozen=True)
class RankinSelbergData:
    """π × π̃ 的局部数据

    mu 按阿基米德位给出 n² 个 μ 参数；satake 以素理想标签（或有理素数）为键，
    未列出的非分歧素数使用 default_satake。
    """
    n: int = 1
    mu: Tuple[Tuple[int, Tuple[complex, ...]], ...] = ()
    satake: Tuple[Tuple[str, Tuple[complex, ...]], ...] = ()
    default_satake: Optional[Tuple[complex, ...]] = None
    eps: Tuple[Tuple[int, complex], ...] = ()
    ramified: Tuple[int, ...] = ()
    conductor: int = 1

    @classmethod
    def trivial(cls, n: int = 1) -> "RankinSelbergData":
        return cls(n=n)

    @classmethod
    def from_dict(cls, data: Dict) -> "RankinSelbergData":
        try:
            n = int(data.get("n", 1))
            mu = tuple(sorted((int(k), tuple(_as_complex(z) for z in v))
                              for k, v in data.get("mu", {}).items()))
            raw = dict(data.get("satake", {}))
            default = raw.pop("default", None)
            satake = tuple(sorted((str(k), tuple(_as_complex(z) for z in v))
                                  for k, v in raw.items()))
            eps = tuple(sorted((int(k), _as_complex(v)) for k, v in data.get("eps", {}).items()))
            rs = cls(n=n, mu=mu, satake=satake,
                     default_satake=tuple(_as_complex(z) for z in default) if default else None,
                     eps=eps, ramified=tuple(int(p) for p in data.get("ramified", [])),
                     conductor=int(data.get("conductor", 1)))
        except (TypeError, ValueError, AttributeError) as e:
            raise ValidationError(f"Rankin-Selberg 数据格式错误: {e}")
        rs.validate()
        return rs

    def to_dict(self):
        return {"n": self.n, "mu": {str(k): list(v) for k, v in self.mu},
                "satake": {k: list(v) for k, v in self.satake},
                "default_satake": list(self.default_satake) if self.default_satake else None,
                "eps": {str(k): v for k, v in self.eps}, "ramified": list(self.ramified),
                "conductor": self.conductor}

    def mu_for(self, place: int) -> np.ndarray:
        for k, v in self.mu:
            if k == place:
                return np.array(v, dtype=complex)
        return np.zeros(self.n * self.n, dtype=complex)

    def eps_for(self, place: int) -> complex:
        for k, v in self.eps:
            if k == place:
                return v
        return 1.0 + 0j

    def m(self, place: int) -> float:
        """m(π, v) = max_j Re μ_j / 2"""
        return float(np.max(self.mu_for(place).real)) / 2

    def satake_for(self, label: Union[PrimeLabel, str]) -> np.ndarray:
        key = str(label)
        p = key.split(".")[0]
        if isinstance(label, PrimeLabel) and label.p in self.ramified:
            raise ValidationError(f"π 在 {label} 处分歧，没有 Satake 参数")
        for k, v in self.satake:
            if k == key or k == p:
                return np.array(v, dtype=complex)
        if self.default_satake is not None:
            return np.array(self.default_satake, dtype=complex)
        return np.ones(self.n, dtype=complex)

    def pair_parameters(self, label) -> np.ndarray:
        """π × π̃ 的 Satake 参数 {α_i ᾱ_j}"""
        alpha = self.satake_for(label)
        return (alpha[:, None] * np.conj(alpha)[None, :]).ravel()

    def lambda_coefficients(self, label, K: int) -> np.ndarray:
        """λ_{π×π̃}(p^r)，r = 0, …, K−1"""
        return complete_homogeneous(self.pair_parameters(label), K).real

    def validate(self):
        for place, mu in self.mu:
            if len(mu) != self.n ** 2:
                raise ValidationError(f"位 {place} 需要 {self.n ** 2} 个 μ 参数")
            values = np.array(mu)
            for z in values:
                if np.min(np.abs(values - np.conj(z))) > 1e-9:
                    raise ValidationError(f"位 {place} 的 μ 参数在共轭下不封闭")
        for place, value in self.eps:
            if abs(abs(value) - 1) > 1e-9:
                raise ValidationError(f"ε 常数的模必须为 1: {value}")
        sets = [v for _, v in self.satake]
        if self.default_satake:
            sets.append(self.default_satake)
        for alpha in sets:
            if len(alpha) != self.n:
                raise ValidationError(f"Satake 参数个数应为 {self.n}")
            a = np.array(alpha)
            lam = complete_homogeneous((a[:, None] * np.conj(a)[None, :]).ravel(), 7).real
            if np.any(lam < -1e-9):
                raise ValidationError(f"λ_{{π×π̃}} 出现负值: {lam}")


# ---------------------------------------------------------------------------
# Gamma 因子


def _pole_distance(z, degree: int) -> np.ndarray:
    """到 Γ_v 极点的距离（实位极点 z ∈ −2N，复位极点 z ∈ −N）"""
    w = np.asarray(z, dtype=complex) / 2 if degree == 1 else np.asarray(z, dtype=complex)
    k = np.maximum(np.round(-w.real), 0)
    dist = np.abs(w + k)
    return np.where(w.real > 0.5, np.inf, dist)


def log_gamma_v(s, degree: int) -> np.ndarray:
    s = np.asarray(s, dtype=complex)
    if degree == 1:
        return -0.5 * s * math.log(math.pi) + loggamma(s / 2)
    return math.log(2) - s * math.log(2 * math.pi) + loggamma(s)


def gamma_v(s, degree: int = 1):
    """Γ_R(s) = π^{−s/2}Γ(s/2)（degree 1），Γ_C(s) = 2(2π)^{−s}Γ(s)（degree 2）"""
    if degree not in (1, 2):
        raise ValidationError(f"未知的位类型: {degree}")
    if np.any(_pole_distance(s, degree) < POLE_TOL):
        raise PoleError(f"Γ_v 在 s = {s} 附近有极点", point=complex(np.ravel(s)[0]))
    value = np.exp(log_gamma_v(s, degree))
    return complex(value) if np.ndim(value) == 0 else value


def arch_gamma_factor(s, delta: int, tau: float, rs: RankinSelbergData,
                      place: int, degree: int):
    """γ(s, π_v ⊗ χ_v × π̃_v)

    = ε_v·i^{|δ|}·∏_j Γ_v(1 − s − iτ − μ_j + |δ|/d) / Γ_v(s + iτ − μ̄_j + |δ|/d)
    """
    s = np.asarray(s, dtype=complex)
    shift = abs(delta) / degree
    total = np.zeros(s.shape, dtype=complex)
    vanish = np.zeros(s.shape, dtype=bool)
    for mu in rs.mu_for(place):
        a = 1 - s - 1j * tau - mu + shift
        b = s + 1j * tau - np.conj(mu) + shift
        if np.any(_pole_distance(a, degree) < POLE_TOL):
            raise PoleError(f"γ 因子分子在 s = {s} 附近有极点")
        # 分母 Γ 的极点使 γ 为零
        at_pole = _pole_distance(b, degree) < POLE_TOL
        vanish |= at_pole
        total += log_gamma_v(a, degree) - np.where(at_pole, 0, log_gamma_v(np.where(at_pole, 1, b),
                                                                            degree))
    value = rs.eps_for(place) * (1j ** abs(delta)) * np.exp(total)
    value = np.where(vanish, 0, value)
    return complex(value) if np.ndim(value) == 0 else value


# ---------------------------------------------------------------------------
# 测试函数


def _bump(u):
    u = np.asarray(u, dtype=float)
    safe = np.where(u > 0, u, 1.0)
    return np.where(u > 0, np.exp(-1.0 / safe), 0.0)


def _bump_prime(u):
    u = np.asarray(u, dtype=float)
    safe = np.where(u > 0, u, 1.0)
    return np.where(u > 0, _bump(u) / safe ** 2, 0.0)


def g0(t):
    """[0, 1/4] 上恒为 1，在 [1/4, 1] 上光滑递减到 0"""
    t = np.abs(np.asarray(t, dtype=float))
    u = np.clip((1 - t) / (1 - PLATEAU), 0.0, 1.0)
    f, fc = _bump(u), _bump(1 - u)
    step = np.where(f + fc > 0, f / np.where(f + fc > 0, f + fc, 1.0), 0.0)
    value = np.where(t <= PLATEAU, 1.0, np.where(t >= 1, 0.0, step))
    return float(value) if value.ndim == 0 else value


def g0_prime(t):
    t = np.asarray(t, dtype=float)
    u = np.clip((1 - t) / (1 - PLATEAU), 0.0, 1.0)
    f, fc = _bump(u), _bump(1 - u)
    den = f + fc
    safe = np.where(den > 0, den, 1.0)
    ds = (_bump_prime(u) * fc + f * _bump_prime(1 - u)) / safe ** 2
    value = np.where((t > PLATEAU) & (t < 1), -ds / (1 - PLATEAU), 0.0)
    return float(value) if value.ndim == 0 else value


@dataclass(frozen=True)
class TestFunctionSuite:
    """各位上的测试函数 g_v

    v0: |x|^{−β}g₀(|x|)；其它阿基米德位: g₀(T|x−1|_v)；p | c: U_p^{(e_p)} 的特征函数；
    π 的分歧素数: U_p^{(1)} 的特征函数。
    """
    __test__ = False

    F: NumberField
    beta: float
    T: float
    v0: int = 0
    modulus: IdealData = field(default_factory=IdealData)
    ramified_pi: Tuple[PrimeLabel, ...] = ()

    def __post_init__(self):
        if self.T < 1:
            raise ValidationError("T 必须 ≥ 1")
        if not 0 <= self.v0 < self.F.r:
            raise ValidationError(f"v0 = {self.v0} 不是阿基米德位")

    def degree(self, place: int) -> int:
        return self.F.place_degrees[place]

    def value(self, place: int, x):
        return test_function_value(place, x, self)

    def mellin(self, place, s, delta=0):
        return mellin_hat_g(place, s, delta, self)

    def finite_level(self, label: PrimeLabel) -> int:
        e = self.modulus.exponent(label)
        if e:
            return e
        if label in self.ramified_pi:
            return 1
        return 0


def test_function_value(place: int, x, suite: TestFunctionSuite):
    """g_v(x)（阿基米德位）"""
    d = suite.degree(place)
    ax = np.abs(np.asarray(x, dtype=complex)) ** d
    if place == suite.v0:
        safe = np.where(ax > 0, ax, 1.0)
        return np.where(ax > 0, safe ** (-suite.beta) * g0(ax), np.inf)
    dist = np.abs(np.asarray(x, dtype=complex) - 1) ** d
    return g0(suite.T * dist)


# 避免被 pytest 收集
test_function_value.__test__ = False


def _blockwise(s, fn) -> np.ndarray:
    """按 |Im s| 排序后分块求值，每块的求积节点只由本块的 |Im s| 决定"""
    s = np.atleast_1d(np.asarray(s, dtype=complex))
    order = np.argsort(np.abs(s.imag), kind="stable")
    out = np.empty(len(s), dtype=complex)
    for start in range(0, len(s), MELLIN_BLOCK):
        idx = order[start:start + MELLIN_BLOCK]
        out[idx] = fn(s[idx])
    return out


def _hat_v0(s, beta: float) -> np.ndarray:
    """ĝ_{v0}(s) = −(2/(s−β))∫_{1/4}^{1} u^{s−β} g₀'(u) du"""
    def block(sb):
        z = sb - beta
        if np.any(np.abs(z) < POLE_TOL):
            raise PoleError(f"ĝ_{{v0}} 在 s = β = {beta} 处有极点", point=beta)
        panels = 4 + int(np.max(np.abs(z.imag)) * 0.5)
        u, w = composite([PLATEAU, 1.0], panels)
        integral = np.exp(np.outer(z, np.log(u))) @ (w * g0_prime(u))
        return -2.0 / z * integral
    return _blockwise(s, block)


def _hat_real(s, T: float) -> np.ndarray:
    """(1/T)∫_{−1}^{1} g₀(|w|)(1 + w/T)^{s−1} dw"""
    def block(sb):
        panels = 2 + int(np.max(np.abs(sb.imag)) / T)
        w, wt = composite([-1.0, -PLATEAU, PLATEAU, 1.0], panels)
        return np.exp(np.outer(sb - 1, np.log1p(w / T))) @ (wt * g0(w)) / T
    return _blockwise(s, block)


def _hat_complex(s, delta: int, T: float) -> np.ndarray:
    """(2/(πT))∫∫ g₀(ρ²)(z/|z|)^δ |z|^{2(s−1)} ρ dρ dθ，z = 1 + ρe^{iθ}/√T"""
    def block(sb):
        tmax = float(np.max(np.abs(sb.imag)))
        rho, wr = composite([0.0, 0.5, 1.0], 2 + int(tmax / math.sqrt(T)))
        n_theta = 64 + 2 * abs(delta) + 4 * int(tmax / math.sqrt(T))
        theta, wt = periodic_trapezoid(n_theta)
        z = 1 + np.outer(rho, np.exp(1j * theta)) / math.sqrt(T)
        log_abs2 = np.log(np.abs(z) ** 2).ravel()
        angular = (np.exp(1j * delta * np.angle(z)) * (wr * g0(rho ** 2) * rho)[:, None]
                   * wt[None, :]).ravel()
        return np.exp(np.outer(sb - 1, log_abs2)) @ angular * 2 / (math.pi * T)
    return _blockwise(s, block)


def mellin_hat_g(place, s, delta, suite: TestFunctionSuite):
    """ĝ_v(s, δ_v) = ∫ g_v(x)δ_v(x)|x|_v^s d^×x

    Args:
        place: 阿基米德位下标，或有限位的 PrimeLabel
        s: 复数或数组
        delta: 阿基米德位为整数 δ_v，有限位为 FiniteCharacter 或导子指数
    """
    scalar = np.ndim(s) == 0
    if isinstance(place, PrimeLabel):
        e = suite.finite_level(place)
        if e == 0:
            raise ValidationError(f"{place} 处为系数函数，其 Mellin 变换是局部 L 因子")
        conductor = getattr(delta, "conductor", delta)
        N = place.norm
        value = (1.0 / (N ** (e - 1) * (N - 1))) if conductor <= e else 0.0
        out = np.full(np.shape(s), value, dtype=complex)
        return complex(out) if scalar else out
    d = suite.degree(place)
    if place == suite.v0:
        out = _hat_v0(s, suite.beta) if delta == 0 else np.zeros(np.shape(np.atleast_1d(s)),
                                                                 dtype=complex)
    elif d == 1:
        if suite.T <= 1:
            raise ValidationError("实位测试函数需要 T > 1")
        out = _hat_real(s, suite.T)
    else:
        out = _hat_complex(s, int(delta), suite.T)
    return complex(out[0]) if scalar else out


# ---------------------------------------------------------------------------
# g*_v


def _delta_range(suite: TestFunctionSuite, place: int) -> Sequence[int]:
    if place == suite.v0:
        return (0,)
    if suite.degree(place) == 1:
        return (0, 1)
    bound = int(math.sqrt(suite.T) * math.log(2 + suite.T) ** 2)
    return range(-bound, bound + 1)


def _scale(suite: TestFunctionSuite, place: int) -> float:
    if place == suite.v0:
        return 1.0
    return suite.T ** (1.0 / suite.degree(place))


def _amplitude_scan(fn, scale: float, tol: float, sign: int):
    """沿 ±t 方向分块扫描 |F(t)|，直到整块低于 tol·峰值"""
    step = scale / 20
    ts, vals = [], []
    peak = 0.0
    for chunk in range(SCAN_MAX_CHUNKS):
        t = sign * step * (np.arange(SCAN_CHUNK) + chunk * SCAN_CHUNK)
        v = fn(t)
        ts.append(t)
        vals.append(v)
        amp = np.abs(v)
        peak = max(peak, float(np.max(amp)))
        if chunk > 0 and np.max(amp) < tol * peak:
            return np.concatenate(ts), np.concatenate(vals), peak, float(np.max(amp))
    raise BudgetError(f"g* 截断在 |t| = {abs(t[-1]):.1f} 内无法达到容差 {tol}",
                      tail=float(np.max(amp)) / max(peak, 1e-300))


def gstar_arch(place: int, x, suite: TestFunctionSuite, rs: RankinSelbergData,
               tol: float = 1e-8, sigma: float = 1.0) -> Dict:
    """g*_v(x) = c_v Σ_δ δ(x)^{−1} ∫_{(σ)} ĝ(1−s, δ)γ(1−s, δ)|x|_v^{−s} ds/2πi

    c_v = 1/2（与上面的测度约定下的 Mellin 反演一致）。

    Returns:
        {"x", "values", "tail_bound", "tail_bounds"（逐点余项）, "t_max", "deltas"}
    """
    x = np.atleast_1d(np.asarray(x, dtype=complex))
    if np.any(x == 0):
        raise ValidationError("|x|_v 必须 > 0")
    d = suite.degree(place)
    log_abs = d * np.log(np.abs(x))
    total = np.zeros(len(x), dtype=complex)
    tail = 0.0
    t_max = 0.0
    used = []
    global_peak = 0.0
    for delta in _delta_range(suite, place):
        def integrand(t, delta=delta):
            z = 1 - sigma - 1j * t
            return (mellin_hat_g(place, z, delta, suite)
                    * arch_gamma_factor(z, delta, 0.0, rs, place, d))

        coarse = np.abs(integrand(np.linspace(-_scale(suite, place), _scale(suite, place), 9)))
        if global_peak and float(np.max(coarse)) < tol * global_peak:
            continue
        t_pos, v_pos, peak_pos, tail_pos = _amplitude_scan(integrand, _scale(suite, place), tol, 1)
        t_neg, v_neg, peak_neg, tail_neg = _amplitude_scan(integrand, _scale(suite, place), tol, -1)
        peak = max(peak_pos, peak_neg)
        global_peak = max(global_peak, peak)
        coarse_t = np.concatenate([t_neg[::-1], t_pos[1:]])
        coarse_v = np.concatenate([v_neg[::-1], v_pos[1:]])
        span = float(max(abs(t_pos[-1]), abs(t_neg[-1])))
        t_max = max(t_max, span)

        # ĝ 在粗网格上插值，γ 在细网格上直接计算
        z_coarse = 1 - sigma - 1j * coarse_t
        hat_coarse = mellin_hat_g(place, z_coarse, delta, suite)
        spline_re = CubicSpline(coarse_t, hat_coarse.real)
        spline_im = CubicSpline(coarse_t, hat_coarse.imag)
        maxfreq = (rs.n ** 2 * d * (math.log(2 + span / (2 * math.pi)) + 1)
                   + float(np.max(np.abs(log_abs))) + 2)
        dt = math.pi / (4 * maxfreq)
        fine_t = np.arange(coarse_t[0], coarse_t[-1] + dt / 2, dt)
        z_fine = 1 - sigma - 1j * fine_t
        F = (spline_re(fine_t) + 1j * spline_im(fine_t)) * arch_gamma_factor(
            z_fine, delta, 0.0, rs, place, d)
        for start in range(0, len(x), 16):
            block = slice(start, start + 16)
            phase = np.exp(-1j * np.outer(log_abs[block], fine_t))
            total[block] += _character_inverse(x[block], delta, d) * (phase @ F) * dt / (2 * math.pi)
        tail += max(tail_pos, tail_neg) * span / math.pi
        used.append(delta)
        logger.debug(f"g*_v δ={delta}: |t| ≤ {span:.1f}, 细网格 {len(fine_t)} 点")
    values = 0.5 * total * np.exp(-sigma * log_abs)
    tail_bounds = 0.5 * tail * np.exp(-sigma * log_abs)
    return {"x": x, "values": values, "tail_bound": float(np.max(tail_bounds)),
            "tail_bounds": tail_bounds, "t_max": t_max, "deltas": used}


def _character_inverse(x, delta: int, degree: int) -> np.ndarray:
    """δ_v(x)^{−1}"""
    if degree == 1:
        return np.where(x.real < 0, (-1.0) ** delta, 1.0)
    return np.exp(-1j * delta * np.angle(x))


def gstar_envelope(place: int, x, suite: TestFunctionSuite, rs: RankinSelbergData,
                   epsilon: float = 0.05, A: float = 3.0) -> np.ndarray:
    """局部估计给出的包络"""
    ax = np.abs(np.asarray(x, dtype=complex)) ** suite.degree(place)
    n2 = rs.n ** 2
    if place == suite.v0:
        return 1.0 / ax * (1 + ax) ** (-A)
    growth = 1 + ax ** (0.5 + 0.5 / n2 + epsilon)
    return growth / (suite.T * ax) * (1 + ax / suite.T ** (n2 + epsilon)) ** (-A)


def v0_pole_check(suite: TestFunctionSuite, radius: float = 0.2, height: float = 6.0) -> Dict:
    """ĝ_{v0} 的极点检查：β 处留数为 2，且 Re s ∈ (0, 2) 内没有其它极点"""
    theta = 2 * math.pi * np.arange(256) / 256
    s = suite.beta + radius * np.exp(1j * theta)
    ds = 1j * radius * np.exp(1j * theta) * (2 * math.pi / 256)
    hat = _hat_v0(s, suite.beta)
    residue = complex(np.sum(hat * ds) / (2j * math.pi))
    moment = complex(np.sum((s - suite.beta) * hat * ds) / (2j * math.pi))

    # 矩形 [0.05, 1.95] × [−H, H] 上的留数总和
    lo, hi = 0.05, 1.95
    y, wy = composite([-height, height], 16)
    xs, wx = composite([lo, hi], 4)
    right = np.sum(_hat_v0(hi + 1j * y, suite.beta) * wy) * 1j
    left = -np.sum(_hat_v0(lo + 1j * y, suite.beta) * wy) * 1j
    top = -np.sum(_hat_v0(xs + 1j * height, suite.beta) * wx)
    bottom = np.sum(_hat_v0(xs - 1j * height, suite.beta) * wx)
    rectangle = complex((right + left + top + bottom) / (2j * math.pi))
    inside = lo < suite.beta < hi
    return {"residue": residue, "moment": moment, "rectangle_residue": rectangle,
            "expected": 2.0 if inside else 0.0}


# ---------------------------------------------------------------------------
# 驻相


def _phase(tau):
    return tau * (np.log(tau) - 1)


def _tensor_phase_integral(lam: float, vanishing: bool) -> complex:
    """张量积 GL 网格上的 ∫∫ e^{iλ(φ(τ₁)−φ(τ₂))} g₀(2|τ − (1, 1)|) dτ，按行分块"""
    tau, w = composite([0.5, 1.0 - PLATEAU / 2, 1.0 + PLATEAU / 2, 1.5], 8 + int(lam / 40), n=16)
    e_plus = w * np.exp(1j * lam * _phase(tau))
    e_minus = w * np.exp(-1j * lam * _phase(tau))
    total = 0j
    for start in range(0, len(tau), STATPHASE_ROWS):
        rows = slice(start, start + STATPHASE_ROWS)
        d1 = (tau[rows] - 1)[:, None]
        u = g0(2 * np.hypot(d1, (tau - 1)[None, :]))
        if vanishing:
            u = u * d1
        total += complex(e_plus[rows] @ (u @ e_minus))
    return total


def stationary_phase_model(lam: float, d: int = 1, vanishing: bool = False) -> Dict:
    """∫ e^{iλφ} u 与主项 A·(2π/λ)^{d/2}·e^{iλφ(τ₀) + iπσ/4} 的比较

    φ(τ) = τ(log τ − 1)，临界点 τ₀ = 1，σ = 1；d = 2 时相位为 φ(τ₁) − φ(τ₂)，
    Hessian 为 diag(1, −1)，σ = 0，振幅 g₀(2|τ − (1, 1)|) 不可分离。
    u = g₀(2|τ − 1|)，vanishing 时再乘 (τ₁ − 1)。残差 |I − 主项| 应为 O(λ^{−1−d/2})。
    """
    if lam < 1:
        raise ValidationError("λ 必须 ≥ 1")
    if d not in (1, 2):
        raise ValidationError("d 只能为 1 或 2")
    if d == 1:
        tau, w = composite([0.5, 1.0 - PLATEAU / 2, 1.0 + PLATEAU / 2, 1.5], 16 + int(lam / 20))
        u = g0(2 * np.abs(tau - 1))
        if vanishing:
            u = u * (tau - 1)
        value = complex(np.sum(w * u * np.exp(1j * lam * _phase(tau))))
        leading_phase = cmath.exp(1j * (lam * float(_phase(1.0)) + math.pi / 4))
    else:
        value = _tensor_phase_integral(lam, vanishing)
        leading_phase = 1.0
    amplitude = 0.0 if vanishing else 1.0
    predicted = (2 * math.pi) ** (d / 2) * amplitude * lam ** (-d / 2)
    residual = abs(value - predicted * leading_phase)
    return {"lambda": lam, "d": d, "value": value, "abs": abs(value), "predicted": predicted,
            "relative_deviation": abs(abs(value) - predicted) / predicted if predicted else None,
            "residual": residual, "residual_scaled": residual * lam ** (1 + d / 2)}


def fit_slope(xs, ys) -> float:
    """log-log 线性回归斜率"""
    return float(np.polyfit(np.log(np.asarray(xs, dtype=float)),
                            np.log(np.asarray(ys, dtype=float)), 1)[0])


def gstar_growth_exponent(place: int, x_lo: float, x_hi: float, suite: TestFunctionSuite,
                          rs: RankinSelbergData, points: int = 241, windows: int = 8,
                          tol: float = 1e-6) -> Dict:
    """|g*_v(x)|·|x|_v·T 的增长指数

    两个驻点相互干涉，|g*| 振荡；每个对数窗口取最大值作为包络再回归。
    """
    if not 0 < x_lo < x_hi:
        raise ValidationError("需要 0 < x_lo < x_hi")
    if windows < 2 or points < 2 * windows:
        raise ValidationError("窗口数至少为 2，且每个窗口至少 2 个点")
    xs = np.geomspace(x_lo, x_hi, points)
    res = gstar_arch(place, xs, suite, rs, tol=tol)
    scaled = np.abs(res["values"]) * xs ** suite.degree(place) * suite.T
    chunks = np.array_split(np.arange(points), windows)
    peaks = [int(chunk[np.argmax(scaled[chunk])]) for chunk in chunks]
    exponent = fit_slope(xs[peaks], scaled[peaks])
    predicted = 0.5 + 0.5 / rs.n ** 2
    logger.info(f"g*_{place} 增长指数 {exponent:.4f}（预期 {predicted:.4f}）")
    return {"exponent": exponent, "predicted": predicted, "x": xs[peaks], "envelope": scaled[peaks]}
