"""Baseline engines: direct per-window evaluation and integral images.

Both compute the mean as ``c / n`` and the variance as ``d / n - m*m``
(clamped at zero) from exact integer sums, exactly like the sliding engine,
so all three produce bit-identical output for the mean/variance rules.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numba import njit

from .audit import AuxAudit
from .image import BinaryImage, GrayImage
from .rules import (
    EXTREMA_RULES,
    GLOBAL_RULES,
    MEAN_VARIANCE_RULES,
    P_R,
    QUANTILE_RULES,
    RuleParams,
    compute_global_stats,
    decider,
    pack_params,
    rule_id,
)
from .window import WindowSpec


class UnsupportedRuleError(ValueError):
    """The engine cannot supply the statistics the rule needs."""


@dataclass(frozen=True, eq=False)
class IntegralImage:
    """``J[i, j]`` = sum of ``f(I)`` over rows ``<= i`` and columns ``<= j``."""

    J: np.ndarray
    f: str

    @property
    def height(self) -> int:
        return self.J.shape[0]

    @property
    def width(self) -> int:
        return self.J.shape[1]


@njit(cache=True)
def _fill_integral(img, square, J):
    H, W = img.shape
    for i in range(H):
        for j in range(W):
            g = np.int64(img[i, j])
            if square:
                g = g * g
            acc = g
            if i > 0:
                acc += J[i - 1, j]
            if j > 0:
                acc += J[i, j - 1]
            if i > 0 and j > 0:
                acc -= J[i - 1, j - 1]
            J[i, j] = acc


@njit(cache=True)
def _rect(J, a0, a1, b0, b1):
    # sum over a0 < row <= a1, b0 < col <= b1; index -1 addresses the zero border
    total = J[a1, b1]
    if a0 >= 0:
        total -= J[a0, b1]
    if b0 >= 0:
        total -= J[a1, b0]
    if a0 >= 0 and b0 >= 0:
        total += J[a0, b0]
    return total


def build_integral(image: GrayImage, f: str = "identity",
                   audit: Optional[AuxAudit] = None) -> IntegralImage:
    """Integral image of ``f(I)`` for ``f`` in {"identity", "square"}, int64 cells."""
    if f not in ("identity", "square"):
        raise ValueError(f"f must be 'identity' or 'square', got {f!r}")
    audit = audit if audit is not None else AuxAudit()
    J = audit.zeros(f"J_{f}", image.shape, np.int64)
    _fill_integral(image.pixels, f == "square", J)
    return IntegralImage(J, f)


def window_sum(integral: IntegralImage, a0: int, a1: int, b0: int, b1: int) -> int:
    """Sum of ``f(I)`` over rows ``(a0, a1]`` and columns ``(b0, b1]``."""
    H, W = integral.height, integral.width
    if not (-1 <= a0 <= a1 < H and -1 <= b0 <= b1 < W):
        raise IndexError(f"rectangle ({a0}, {a1}] x ({b0}, {b1}] outside {H}x{W} image")
    if a0 == a1 or b0 == b1:
        return 0
    return int(_rect(integral.J, a0, a1, b0, b1))


# --------------------------------------------------------------------------
# integral engine


@njit
def _integral_kernel(img, J1, J2, h, w, decide_rule, params, out, track_only):
    H, W = img.shape
    l = (w + 1) // 2
    r = w // 2
    o = (h + 1) // 2
    u = h // 2
    peak = 0.0
    for i in range(H):
        a0 = max(i - o, -1)
        a1 = min(i + u, H - 1)
        for j in range(W):
            b0 = max(j - l, -1)
            b1 = min(j + r, W - 1)
            n = (a1 - a0) * (b1 - b0)
            c = _rect(J1, a0, a1, b0, b1)
            d = _rect(J2, a0, a1, b0, b1)
            m = c / n
            v = d / n - m * m
            if v < 0.0:
                v = 0.0
            if track_only:
                if v > peak:
                    peak = v
            else:
                out[i, j] = decide_rule(img[i, j], n, m, v, 0, 0, 0, params)
    return peak


def binarize_integral(image: GrayImage, spec: WindowSpec, rule: str = "sauvola",
                      params: RuleParams = RuleParams(),
                      audit: Optional[AuxAudit] = None) -> BinaryImage:
    """Binarize using two integral images (sum and sum of squares)."""
    rid = rule_id(rule)
    if rule not in MEAN_VARIANCE_RULES:
        raise UnsupportedRuleError(f"integral engine supports only mean/variance rules, not {rule!r}")
    audit = audit if audit is not None else AuxAudit()
    global_stats = compute_global_stats(image) if rule in ("wolf", "feng", "rais") else None
    packed = pack_params(rule, params, global_stats, spec)
    J1 = build_integral(image, "identity", audit).J
    J2 = build_integral(image, "square", audit).J
    out = np.empty(image.shape, np.uint8)
    if params.adaptive_R:
        peak = _integral_kernel(image.pixels, J1, J2, spec.h, spec.w, decider(rid), packed, out, True)
        if peak > 0:
            packed[P_R] = math.sqrt(peak)
    _integral_kernel(image.pixels, J1, J2, spec.h, spec.w, decider(rid), packed, out, False)
    return BinaryImage(out)


# --------------------------------------------------------------------------
# naive engine


@njit
def _naive_kernel(img, h, w, decide_rule, params, need_extrema, need_median, buf, out, track_only):
    H, W = img.shape
    l = (w + 1) // 2
    r = w // 2
    o = (h + 1) // 2
    u = h // 2
    peak = 0.0
    for i in range(H):
        for j in range(W):
            c = np.int64(0)
            d = np.int64(0)
            n = 0
            lo = 255
            hi = 0
            for a in range(max(i - o + 1, 0), min(i + u, H - 1) + 1):
                for b in range(max(j - l + 1, 0), min(j + r, W - 1) + 1):
                    g = np.int64(img[a, b])
                    c += g
                    d += g * g
                    if need_extrema:
                        lo = min(lo, g)
                        hi = max(hi, g)
                    if need_median:
                        buf[n] = g
                    n += 1
            m = c / n
            v = d / n - m * m
            if v < 0.0:
                v = 0.0
            if track_only:
                if v > peak:
                    peak = v
                continue
            med = 0
            if need_median:
                ordered = np.sort(buf[:n])
                med = ordered[max(1, int(math.ceil(0.5 * n))) - 1]
            out[i, j] = decide_rule(img[i, j], n, m, v, lo, hi, med, params)
    return peak


def binarize_naive(image: GrayImage, spec: WindowSpec, rule: str = "sauvola",
                   params: RuleParams = RuleParams(),
                   audit: Optional[AuxAudit] = None) -> BinaryImage:
    """Binarize by re-scanning the whole clamped window at every pixel."""
    rid = rule_id(rule)
    if rule in GLOBAL_RULES:
        raise UnsupportedRuleError("otsu is a global rule and has no windowed form")
    audit = audit if audit is not None else AuxAudit()
    need_median = rule in QUANTILE_RULES
    global_stats = compute_global_stats(image) if rule in ("wolf", "feng", "rais") else None
    packed = pack_params(rule, params, global_stats, spec)
    size = min(spec.h, image.height) * min(spec.w, image.width) if need_median else 1
    buf = audit.zeros("window_values", size, np.int64) if need_median else np.zeros(1, np.int64)
    out = np.empty(image.shape, np.uint8)
    args = (image.pixels, spec.h, spec.w, decider(rid), packed, rule in EXTREMA_RULES, need_median, buf, out)
    if params.adaptive_R and rule in MEAN_VARIANCE_RULES:
        peak = _naive_kernel(*args, True)
        if peak > 0:
            packed[P_R] = math.sqrt(peak)
    _naive_kernel(*args, False)
    return BinaryImage(out)
