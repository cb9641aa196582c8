"""Sliding-window statistics without integral images.

Per-column running sums ``C`` (gray levels) and ``D`` (squared gray levels)
over the current band of window rows are updated in O(1) per row step; a
running pair ``c``, ``d`` slides along the row adding the column entering on
the right and dropping the one leaving on the left. Out-of-range terms are
skipped with explicit bounds checks instead of padding, so the only
auxiliary storage is one slot of ``C`` and ``D`` per column of the sweep.

Sweeping along the shorter side (column-major when ``W > H``) keeps the
accumulators at ``min(H, W)`` slots. Column-major sweeps run the same
kernels on transposed views.

The sweep kernels call a ``visit(state, i, j, ...)`` function per pixel. A
jitted visit gets compiled into the kernel; the ``sweep_*`` wrappers run the
very same kernel source as plain Python so arbitrary callables can observe
the statistics.
"""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Optional

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
from .window import WindowSpec, clamped_count

ROW_MAJOR = "row"
COLUMN_MAJOR = "column"
DEFAULT_MAX_SIDE = 257


class AccumulatorCapacityError(ValueError):
    """Window side exceeds what the configured accumulator widths can hold."""


def choose_sweep_axis(H: int, W: int, override: Optional[str] = None) -> str:
    """Row-major when ``W <= H`` so the accumulators have ``min(H, W)`` slots."""
    if override is not None:
        if override not in (ROW_MAJOR, COLUMN_MAJOR):
            raise ValueError(f"axis must be {ROW_MAJOR!r} or {COLUMN_MAJOR!r}, got {override!r}")
        return override
    return ROW_MAJOR if W <= H else COLUMN_MAJOR


def _unsigned_for(capacity: int):
    for dtype in (np.uint16, np.uint32, np.uint64):
        if capacity <= np.iinfo(dtype).max:
            return np.dtype(dtype)
    raise AccumulatorCapacityError(f"no unsigned type holds {capacity}")


def accumulator_dtypes(max_side: int = DEFAULT_MAX_SIDE):
    """Narrowest unsigned types for ``C`` and ``D`` given the largest window side.

    With the default 257: ``255 * 257 = 65535`` fits 16 bits and
    ``255**2 * 257`` fits 32 bits.
    """
    return _unsigned_for(255 * max_side), _unsigned_for(255 * 255 * max_side)


def check_window(spec: WindowSpec, max_side: int = DEFAULT_MAX_SIDE) -> None:
    if max(spec.h, spec.w) > max_side:
        raise AccumulatorCapacityError(
            f"window {spec} exceeds the configured maximum side {max_side}"
        )


def _oriented(image: GrayImage, spec: WindowSpec, axis: Optional[str]):
    """Pixels and window as seen by the sweep (transposed for column-major)."""
    axis = choose_sweep_axis(image.height, image.width, axis)
    if axis == ROW_MAJOR:
        return axis, image.pixels, spec
    return axis, image.pixels.T, spec.transposed()


# --------------------------------------------------------------------------
# kernels


@njit
def mean_variance_sweep(img, h, w, C, D, visit, state):
    """Visit every pixel with (n, mean, variance); returns the peak C and D."""
    H, W = img.shape
    l = (w + 1) // 2
    r = w // 2
    o = (h + 1) // 2
    u = h // 2
    peak_c = 0
    peak_d = 0
    for j in range(W):
        C[j] = 0
        D[j] = 0
    for i in range(min(u, H)):
        for j in range(W):
            g = np.int64(img[i, j])
            C[j] = np.int64(C[j]) + g
            D[j] = np.int64(D[j]) + g * g
    for i in range(H):
        enter = i + u
        leave = i - o
        for j in range(W):
            x = np.int64(C[j])
            y = np.int64(D[j])
            if enter < H:
                g = np.int64(img[enter, j])
                x += g
                y += g * g
            if leave >= 0:
                g = np.int64(img[leave, j])
                x -= g
                y -= g * g
            C[j] = x
            D[j] = y
            if x > peak_c:
                peak_c = x
            if y > peak_d:
                peak_d = y
        c = np.int64(0)
        d = np.int64(0)
        for j in range(min(r, W)):
            c += np.int64(C[j])
            d += np.int64(D[j])
        band = min(i + u, H - 1) - max(i - o, -1)
        for j in range(W):
            if j + r < W:
                c += np.int64(C[j + r])
                d += np.int64(D[j + r])
            if j - l >= 0:
                c -= np.int64(C[j - l])
                d -= np.int64(D[j - l])
            n = (min(j + r, W - 1) - max(j - l, -1)) * band
            m = c / n
            v = d / n - m * m
            if v < 0.0:
                v = 0.0
            visit(state, i, j, n, m, v)
    return peak_c, peak_d


@njit
def extrema_sweep(img, h, w, qmin, qmax, headcount, colmin, colmax, rowq, visit, state):
    """Visit every pixel with the window min and max.

    ``qmin``/``qmax`` are per-column ring buffers of row indices (monotone
    deques over the band), ``headcount`` holds (head, count) for each of
    them, ``colmin``/``colmax`` the band extrema per column and ``rowq``
    two ring buffers of column indices for the pass along the row.
    """
    H, W = img.shape
    l = (w + 1) // 2
    r = w // 2
    o = (h + 1) // 2
    u = h // 2
    cap = qmin.shape[1]
    rcap = rowq.shape[1]
    for j in range(W):
        headcount[j, 0] = 0
        headcount[j, 1] = 0
        headcount[j, 2] = 0
        headcount[j, 3] = 0
    lead = min(u, H)
    for step in range(lead + H):
        # the first `lead` steps only push rows 0..lead-1
        i = step - lead
        enter = step if i < 0 else i + u
        leave = i - o
        for j in range(W):
            hmin = headcount[j, 0]
            nmin = headcount[j, 1]
            hmax = headcount[j, 2]
            nmax = headcount[j, 3]
            while nmin > 0 and qmin[j, hmin] <= leave:
                hmin = (hmin + 1) % cap
                nmin -= 1
            while nmax > 0 and qmax[j, hmax] <= leave:
                hmax = (hmax + 1) % cap
                nmax -= 1
            if enter < H:
                g = img[enter, j]
                while nmin > 0 and img[qmin[j, (hmin + nmin - 1) % cap], j] >= g:
                    nmin -= 1
                qmin[j, (hmin + nmin) % cap] = enter
                nmin += 1
                while nmax > 0 and img[qmax[j, (hmax + nmax - 1) % cap], j] <= g:
                    nmax -= 1
                qmax[j, (hmax + nmax) % cap] = enter
                nmax += 1
            headcount[j, 0] = hmin
            headcount[j, 1] = nmin
            headcount[j, 2] = hmax
            headcount[j, 3] = nmax
            if i >= 0:
                colmin[j] = img[qmin[j, hmin], j]
                colmax[j] = img[qmax[j, hmax], j]
        if i < 0:
            continue
        hmin = 0
        nmin = 0
        hmax = 0
        nmax = 0
        rlead = min(r, W)
        for step in range(rlead + W):
            jj = step - rlead
            enter = step if jj < 0 else jj + r
            leave = jj - l
            while nmin > 0 and rowq[0, hmin] <= leave:
                hmin = (hmin + 1) % rcap
                nmin -= 1
            while nmax > 0 and rowq[1, hmax] <= leave:
                hmax = (hmax + 1) % rcap
                nmax -= 1
            if enter < W:
                g = colmin[enter]
                while nmin > 0 and colmin[rowq[0, (hmin + nmin - 1) % rcap]] >= g:
                    nmin -= 1
                rowq[0, (hmin + nmin) % rcap] = enter
                nmin += 1
                g = colmax[enter]
                while nmax > 0 and colmax[rowq[1, (hmax + nmax - 1) % rcap]] <= g:
                    nmax -= 1
                rowq[1, (hmax + nmax) % rcap] = enter
                nmax += 1
            if jj >= 0:
                visit(state, i, jj, colmin[rowq[0, hmin]], colmax[rowq[1, hmax]])


@njit
def quantile_sweep(img, h, w, q, colhist, winhist, visit, state):
    """Visit every pixel with the window's q-quantile gray level.

    The level reported is the smallest g whose cumulative count reaches
    ``ceil(q * n)``.
    """
    H, W = img.shape
    l = (w + 1) // 2
    r = w // 2
    o = (h + 1) // 2
    u = h // 2
    for j in range(W):
        for g in range(256):
            colhist[j, g] = 0
    for i in range(min(u, H)):
        for j in range(W):
            colhist[j, img[i, j]] += 1
    for i in range(H):
        enter = i + u
        leave = i - o
        for j in range(W):
            if enter < H:
                colhist[j, img[enter, j]] += 1
            if leave >= 0:
                colhist[j, img[leave, j]] -= 1
        for g in range(256):
            winhist[g] = 0
        for j in range(min(r, W)):
            for g in range(256):
                winhist[g] += colhist[j, g]
        band = min(i + u, H - 1) - max(i - o, -1)
        for j in range(W):
            if j + r < W:
                for g in range(256):
                    winhist[g] += colhist[j + r, g]
            if j - l >= 0:
                for g in range(256):
                    winhist[g] -= colhist[j - l, g]
            n = (min(j + r, W - 1) - max(j - l, -1)) * band
            rank = max(1, int(math.ceil(q * n)))
            total = 0
            level = 255
            for g in range(256):
                total += winhist[g]
                if total >= rank:
                    level = g
                    break
            visit(state, i, j, level)


# --------------------------------------------------------------------------
# visits


@lru_cache(maxsize=None)
def _decision_visits(rule: int):
    """Per-rule visits writing labels; state is (pixels, labels, params)."""
    decide_rule = decider(rule)

    @njit
    def from_moments(state, i, j, n, m, v):
        img, out, params = state
        out[i, j] = decide_rule(img[i, j], n, m, v, 0, 0, 0, params)

    @njit
    def from_extrema(state, i, j, lo, hi):
        img, out, params = state
        out[i, j] = decide_rule(img[i, j], 0, 0.0, 0.0, lo, hi, 0, params)

    @njit
    def from_quantile(state, i, j, level):
        img, out, params = state
        out[i, j] = decide_rule(img[i, j], 0, 0.0, 0.0, 0, 0, level, params)

    return from_moments, from_extrema, from_quantile


@njit
def _track_max_variance(state, i, j, n, m, v):
    if v > state[0]:
        state[0] = v


@njit
def _collect_mv(state, i, j, n, m, v):
    counts, means, variances = state
    counts[i, j] = n
    means[i, j] = m
    variances[i, j] = v


@njit
def _collect_extrema(state, i, j, lo, hi):
    lows, highs = state
    lows[i, j] = lo
    highs[i, j] = hi


@njit
def _collect_quantile(state, i, j, level):
    state[i, j] = level


# --------------------------------------------------------------------------
# allocation


def _alloc_mean_variance(audit: AuxAudit, width: int, max_side: int):
    c_type, d_type = accumulator_dtypes(max_side)
    return audit.zeros("C", width, c_type), audit.zeros("D", width, d_type)


def _alloc_extrema(audit: AuxAudit, H: int, W: int, spec: WindowSpec):
    cap = min(spec.h, H)
    rcap = min(spec.w, W)
    return (
        audit.zeros("column_min_deques", (W, cap), np.int32),
        audit.zeros("column_max_deques", (W, cap), np.int32),
        audit.zeros("deque_heads", (W, 4), np.int32),
        audit.zeros("column_min", W, np.uint8),
        audit.zeros("column_max", W, np.uint8),
        audit.zeros("row_deques", (2, rcap), np.int32),
    )


def _alloc_quantile(audit: AuxAudit, W: int):
    return (
        audit.zeros("column_histograms", (W, 256), np.int32),
        audit.zeros("window_histogram", 256, np.int32),
    )


def _check_q(q: float) -> float:
    q = float(q)
    if not 0.0 < q <= 1.0:
        raise ValueError(f"quantile rank fraction must lie in (0, 1], got {q}")
    return q


# --------------------------------------------------------------------------
# public sweeps (pure Python visits)


def sweep_mean_variance(image: GrayImage, spec: WindowSpec,
                        visit: Callable[[int, int, int, float, float], None],
                        axis: Optional[str] = None,
                        max_side: int = DEFAULT_MAX_SIDE) -> None:
    """Call ``visit(i, j, n, m, v)`` for every pixel in sweep order.

    Runs the kernel as interpreted Python; meant for inspection and small
    images. Indices passed to ``visit`` are always in image coordinates.
    """
    check_window(spec, max_side)
    axis, img, oriented = _oriented(image, spec, axis)
    C, D = _alloc_mean_variance(AuxAudit(), img.shape[1], max_side)
    if axis == ROW_MAJOR:
        def relay(state, i, j, n, m, v):
            visit(i, j, int(n), float(m), float(v))
    else:
        def relay(state, i, j, n, m, v):
            visit(j, i, int(n), float(m), float(v))
    mean_variance_sweep.py_func(img, oriented.h, oriented.w, C, D, relay, None)


def sweep_extrema(image: GrayImage, spec: WindowSpec,
                  visit: Callable[[int, int, int, int], None],
                  axis: Optional[str] = None) -> None:
    """Call ``visit(i, j, min, max)`` for every pixel in sweep order."""
    axis, img, oriented = _oriented(image, spec, axis)
    buffers = _alloc_extrema(AuxAudit(), img.shape[0], img.shape[1], oriented)
    if axis == ROW_MAJOR:
        def relay(state, i, j, lo, hi):
            visit(i, j, int(lo), int(hi))
    else:
        def relay(state, i, j, lo, hi):
            visit(j, i, int(lo), int(hi))
    extrema_sweep.py_func(img, oriented.h, oriented.w, *buffers, relay, None)


def sweep_quantile(image: GrayImage, spec: WindowSpec, q: float,
                   visit: Callable[[int, int, int], None],
                   axis: Optional[str] = None) -> None:
    """Call ``visit(i, j, level)`` with the window's q-quantile for every pixel."""
    q = _check_q(q)
    axis, img, oriented = _oriented(image, spec, axis)
    colhist, winhist = _alloc_quantile(AuxAudit(), img.shape[1])
    if axis == ROW_MAJOR:
        def relay(state, i, j, level):
            visit(i, j, int(level))
    else:
        def relay(state, i, j, level):
            visit(j, i, int(level))
    quantile_sweep.py_func(img, oriented.h, oriented.w, q, colhist, winhist, relay, None)


# --------------------------------------------------------------------------
# compiled full-image maps (diagnostics; these allocate H x W outputs)


def mean_variance_maps(image: GrayImage, spec: WindowSpec, axis: Optional[str] = None,
                       max_side: int = DEFAULT_MAX_SIDE):
    """Arrays of n, mean and variance at every pixel, from the compiled sweep."""
    check_window(spec, max_side)
    axis, img, oriented = _oriented(image, spec, axis)
    C, D = _alloc_mean_variance(AuxAudit(), img.shape[1], max_side)
    counts = np.zeros(image.shape, np.int64)
    means = np.zeros(image.shape, np.float64)
    variances = np.zeros(image.shape, np.float64)
    state = (counts, means, variances)
    if axis == COLUMN_MAJOR:
        state = (counts.T, means.T, variances.T)
    mean_variance_sweep(img, oriented.h, oriented.w, C, D, _collect_mv, state)
    return counts, means, variances


def extrema_maps(image: GrayImage, spec: WindowSpec, axis: Optional[str] = None):
    axis, img, oriented = _oriented(image, spec, axis)
    buffers = _alloc_extrema(AuxAudit(), img.shape[0], img.shape[1], oriented)
    lows = np.zeros(image.shape, np.uint8)
    highs = np.zeros(image.shape, np.uint8)
    state = (lows, highs) if axis == ROW_MAJOR else (lows.T, highs.T)
    extrema_sweep(img, oriented.h, oriented.w, *buffers, _collect_extrema, state)
    return lows, highs


def quantile_map(image: GrayImage, spec: WindowSpec, q: float = 0.5,
                 axis: Optional[str] = None):
    q = _check_q(q)
    axis, img, oriented = _oriented(image, spec, axis)
    colhist, winhist = _alloc_quantile(AuxAudit(), img.shape[1])
    levels = np.zeros(image.shape, np.uint8)
    state = levels if axis == ROW_MAJOR else levels.T
    quantile_sweep(img, oriented.h, oriented.w, q, colhist, winhist, _collect_quantile, state)
    return levels


# --------------------------------------------------------------------------
# binarization


def binarize_sliding(image: GrayImage, spec: WindowSpec, rule: str = "sauvola",
                     params: RuleParams = RuleParams(), axis: Optional[str] = None,
                     max_side: int = DEFAULT_MAX_SIDE, audit: Optional[AuxAudit] = None,
                     probe: Optional[dict] = None) -> BinaryImage:
    """Binarize with the sliding accumulators.

    ``audit`` receives every auxiliary allocation. ``probe``, if given, is
    filled with the sweep axis and the peak column sums observed.
    """
    rid = rule_id(rule)
    if rule in GLOBAL_RULES:
        raise ValueError("otsu is a global rule and has no sliding form")
    audit = audit if audit is not None else AuxAudit()
    axis, img, oriented = _oriented(image, spec, axis)
    out = np.empty(image.shape, np.uint8)
    dst = out if axis == ROW_MAJOR else out.T
    global_stats = compute_global_stats(image) if rule in ("wolf", "feng", "rais") else None
    packed = pack_params(rule, params, global_stats, spec)
    from_moments, from_extrema, from_quantile = _decision_visits(rid)
    state = (img, dst, packed)

    if rule in MEAN_VARIANCE_RULES:
        check_window(spec, max_side)
        C, D = _alloc_mean_variance(audit, img.shape[1], max_side)
        if params.adaptive_R:
            peak = np.zeros(1)
            mean_variance_sweep(img, oriented.h, oriented.w, C, D, _track_max_variance, peak)
            if peak[0] > 0:
                packed[P_R] = math.sqrt(peak[0])
        peak_c, peak_d = mean_variance_sweep(
            img, oriented.h, oriented.w, C, D, from_moments, state
        )
        if probe is not None:
            probe.update(axis=axis, max_column_sum=int(peak_c), max_column_sq_sum=int(peak_d),
                         column_sum_capacity=int(np.iinfo(C.dtype).max),
                         column_sq_sum_capacity=int(np.iinfo(D.dtype).max))
    elif rule in EXTREMA_RULES:
        buffers = _alloc_extrema(audit, img.shape[0], img.shape[1], oriented)
        extrema_sweep(img, oriented.h, oriented.w, *buffers, from_extrema, state)
    elif rule in QUANTILE_RULES:
        colhist, winhist = _alloc_quantile(audit, img.shape[1])
        quantile_sweep(img, oriented.h, oriented.w, 0.5, colhist, winhist, from_quantile,
                       state)
    if probe is not None:
        probe.setdefault("axis", axis)
    return BinaryImage(out)
