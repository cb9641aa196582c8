"""Threshold rules: per-pixel foreground decisions from window statistics.

Every engine funnels its statistics through :func:`decide`, so the only
difference between engines is how ``n``, ``m``, ``v`` (or the extrema /
median) are obtained. The decision convention is uniform: a pixel is
foreground iff its gray level is ``<=`` the threshold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from numba import njit

from .image import BACKGROUND, FOREGROUND, GrayImage
from .window import WindowSpec

NIBLACK = 0
SAUVOLA = 1
WOLF = 2
FENG = 3
RAIS = 4
KHURSHID = 5
PHANSALKAR = 6
BERNSEN = 7
BERNSEN_CONTRAST = 8
MEDIAN = 9
OTSU = 10

RULES = {
    "niblack": NIBLACK,
    "sauvola": SAUVOLA,
    "wolf": WOLF,
    "feng": FENG,
    "rais": RAIS,
    "khurshid": KHURSHID,
    "phansalkar": PHANSALKAR,
    "bernsen": BERNSEN,
    "bernsen-contrast": BERNSEN_CONTRAST,
    "median": MEDIAN,
    "otsu": OTSU,
}
MEAN_VARIANCE_RULES = frozenset(
    ["niblack", "sauvola", "wolf", "feng", "rais", "khurshid", "phansalkar"]
)
EXTREMA_RULES = frozenset(["bernsen", "bernsen-contrast"])
QUANTILE_RULES = frozenset(["median"])
GLOBAL_RULES = frozenset(["otsu"])

# slots of the packed parameter vector handed to compiled code
P_K, P_R, P_P, P_Q, P_ALPHA1, P_K1, P_K2, P_GAMMA = range(8)
P_EFFECTIVE_N, P_CONTRAST, P_L, P_M, P_S, P_AREA = range(8, 14)
N_PARAMS = 14


class UnknownRuleError(ValueError):
    pass


class MissingStatisticError(ValueError):
    pass


@dataclass(frozen=True)
class RuleParams:
    """Tunable rule parameters.

    ``k`` and ``R`` follow the usual Sauvola convention (0.5, 128). The Feng
    (``alpha1``, ``k1``, ``k2``, ``gamma``) and Phansalkar (``p``, ``q``)
    defaults are library choices taken from the methods' original papers,
    with ``q`` rescaled from normalized intensities to 0..255 gray levels.

    ``adaptive_R`` replaces ``R`` by the largest local standard deviation in
    the image (Wolf's original two-pass formulation). ``khurshid_effective_n``
    uses the clamped pixel count instead of ``h*w`` in Khurshid's factor.
    ``contrast`` is the minimum range for ``bernsen-contrast``.
    """

    k: float = 0.5
    R: float = 128.0
    p: float = 2.0
    q: float = 10.0 / 255.0
    alpha1: float = 0.12
    k1: float = 0.25
    k2: float = 0.04
    gamma: float = 2.0
    khurshid_effective_n: bool = False
    contrast: float = 15.0
    adaptive_R: bool = False

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")


@dataclass(frozen=True)
class GlobalStats:
    L: float
    M: float
    S: float


@dataclass(frozen=True)
class LocalStats:
    n: int
    m: float
    v: float
    min: Optional[int] = None
    max: Optional[int] = None
    median: Optional[int] = None
    window_area: Optional[int] = None

    @property
    def s(self) -> float:
        return math.sqrt(self.v)


def rule_id(rule: str) -> int:
    try:
        return RULES[rule]
    except KeyError:
        raise UnknownRuleError(f"unknown rule {rule!r}; choose from {', '.join(RULES)}") from None


def compute_global_stats(image: GrayImage) -> GlobalStats:
    """Image-wide minimum, mean and standard deviation from exact integer sums."""
    pixels = image.pixels.astype(np.int64)
    count = pixels.size
    total = int(pixels.sum())
    squares = int((pixels * pixels).sum())
    mean = total / count
    var = squares / count - mean * mean
    return GlobalStats(L=float(pixels.min()), M=mean, S=math.sqrt(max(var, 0.0)))


def pack_params(rule: str, params: RuleParams, global_stats: GlobalStats | None,
                spec: WindowSpec) -> np.ndarray:
    """Flatten parameters into the float64 vector the compiled kernels read."""
    if rule == "sauvola" and params.k < 0:
        raise ValueError("sauvola requires k >= 0")
    g = global_stats or GlobalStats(0.0, 0.0, 0.0)
    out = np.zeros(N_PARAMS, dtype=np.float64)
    out[P_K] = params.k
    out[P_R] = params.R
    out[P_P] = params.p
    out[P_Q] = params.q
    out[P_ALPHA1] = params.alpha1
    out[P_K1] = params.k1
    out[P_K2] = params.k2
    out[P_GAMMA] = params.gamma
    out[P_EFFECTIVE_N] = 1.0 if params.khurshid_effective_n else 0.0
    out[P_CONTRAST] = params.contrast
    out[P_L] = g.L
    out[P_M] = g.M
    out[P_S] = g.S
    out[P_AREA] = spec.area
    return out


@njit(cache=True, inline="always")
def sauvola_condition(g, m, v, k, R):
    # I <= m(1 + k(s/R - 1)) without the square root; valid for k >= 0
    lhs = g + m * (k - 1.0)
    # non short-circuit `|` keeps the kernel branch-free on noisy input
    return (lhs <= 0.0) | (lhs * lhs <= k * k * m * m * v / (R * R))


@njit(cache=True)
def threshold_kernel(rule, n, m, v, lo, hi, med, params):
    if rule == BERNSEN or rule == BERNSEN_CONTRAST:
        return (lo + hi) / 2.0
    if rule == MEDIAN:
        return float(med)
    s = math.sqrt(v)
    k = params[P_K]
    R = params[P_R]
    if rule == NIBLACK:
        return m + k * s
    if rule == SAUVOLA:
        return m * (1.0 + k * (s / R - 1.0))
    if rule == WOLF:
        return m - k * (m - params[P_L]) * (1.0 - s / R)
    if rule == FENG:
        gamma = params[P_GAMMA]
        ratio = s / R
        return (params[P_ALPHA1] * m + params[P_K1] * ratio ** (1.0 + gamma) * (m - params[P_L])
                + params[P_K2] * ratio ** gamma * params[P_L])
    if rule == RAIS:
        local = m * s
        glob = params[P_M] * params[P_S]
        top = max(local, glob)
        if top == 0.0:
            return m
        return m + 0.3 * (local - glob) / top * s
    if rule == KHURSHID:
        N = float(n) if params[P_EFFECTIVE_N] != 0.0 else params[P_AREA]
        return m + k * math.sqrt(v + m * m * (N - 1.0) / N)
    if rule == PHANSALKAR:
        return m * (1.0 + params[P_P] * math.exp(-params[P_Q] * m) + k * (s / R - 1.0))
    return math.nan


@njit(cache=True, inline="always")
def decide(rule, g, n, m, v, lo, hi, med, params):
    """Label for gray level ``g`` given window statistics (0 = foreground)."""
    if rule == SAUVOLA:
        return np.uint8(not sauvola_condition(g, m, v, params[P_K], params[P_R]))
    if rule == BERNSEN_CONTRAST and hi - lo < params[P_CONTRAST]:
        return BACKGROUND
    if g <= threshold_kernel(rule, n, m, v, lo, hi, med, params):
        return FOREGROUND
    return BACKGROUND


@lru_cache(maxsize=None)
def decider(rule: int):
    """``decide`` compiled with ``rule`` folded in as a constant.

    Dispatching on the rule at run time inside a per-pixel callee keeps LLVM
    from inlining it, which costs several times the whole sweep.
    """

    @njit(inline="always")
    def decide_rule(g, n, m, v, lo, hi, med, params):
        return decide(rule, g, n, m, v, lo, hi, med, params)

    return decide_rule


def sauvola_decide(I: float, m: float, v: float, params: RuleParams = RuleParams()) -> int:
    """Square-root-free Sauvola decision; returns FOREGROUND or BACKGROUND."""
    if params.k < 0:
        raise ValueError("sauvola requires k >= 0")
    if v < 0:
        raise ValueError("variance must be non-negative")
    hit = sauvola_condition(float(I), float(m), float(v), float(params.k), float(params.R))
    return FOREGROUND if hit else BACKGROUND


def threshold_value(rule: str, stats: LocalStats, global_stats: GlobalStats | None = None,
                    params: RuleParams = RuleParams()) -> float:
    """Threshold ``t`` of a local rule; the pixel is foreground iff ``I <= t``."""
    rid = rule_id(rule)
    if rule in GLOBAL_RULES:
        raise UnknownRuleError("otsu is a global rule; use otsu_threshold")
    if rule in EXTREMA_RULES and (stats.min is None or stats.max is None):
        raise MissingStatisticError(f"{rule} needs window min and max")
    if rule in QUANTILE_RULES and stats.median is None:
        raise MissingStatisticError(f"{rule} needs the window median")
    if rule in ("wolf", "feng", "rais") and global_stats is None:
        raise MissingStatisticError(f"{rule} needs global statistics")
    area = stats.window_area if stats.window_area is not None else stats.n
    packed = pack_params("", params, global_stats, WindowSpec(1, 1))
    packed[P_AREA] = area
    lo = stats.min if stats.min is not None else 0
    hi = stats.max if stats.max is not None else 0
    med = stats.median if stats.median is not None else 0
    return float(threshold_kernel(rid, stats.n, float(stats.m), float(stats.v), lo, hi, med, packed))


def otsu_from_histogram(hist) -> int:
    """Level maximizing between-class variance of the split {<= t} / {> t}.

    Compares ``(N*S0 - S*N0)^2 / (N0*N1)`` exactly with integers, which is
    proportional to the between-class variance; ties go to the smallest t.
    """
    hist = [int(c) for c in hist]
    N = sum(hist)
    S = sum(level * c for level, c in enumerate(hist))
    best_t, best_num, best_den = 0, 0, 1
    n0 = s0 = 0
    for t in range(256):
        n0 += hist[t]
        s0 += t * hist[t]
        n1 = N - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (N * s0 - S * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def otsu_threshold(image: GrayImage) -> int:
    return otsu_from_histogram(np.bincount(image.pixels.ravel(), minlength=256))
