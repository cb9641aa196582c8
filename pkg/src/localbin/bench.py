"""Timing harness comparing the engines on seeded random images."""
from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import astuple, dataclass, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from .audit import AuxAudit
from .engines import binarize, binarize_otsu, check_combination
from .image import GrayImage
from .rules import GLOBAL_RULES, RuleParams
from .window import WindowSpec

CSV_HEADER = ("engine", "rule", "H", "W", "h", "w", "wall_time_s", "peak_aux_slots")


@dataclass(frozen=True)
class BenchRecord:
    engine: str
    rule: str
    H: int
    W: int
    h: int
    w: int
    wall_time_s: float
    peak_aux_slots: int


def random_image(H: int, W: int, seed: int) -> GrayImage:
    rng = np.random.default_rng(seed)
    return GrayImage(rng.integers(0, 256, size=(H, W), dtype=np.uint8))


def time_interleaved(jobs: Sequence, repeats: int) -> list[float]:
    """Median wall time per job, timing the jobs round-robin.

    Each job gets one untimed warm-up (JIT compilation). Interleaving spreads
    slow phases of a shared machine evenly over the jobs being compared.
    """
    for job in jobs:
        job()
    samples = [[] for _ in jobs]
    for _ in range(repeats):
        for k, job in enumerate(jobs):
            start = time.perf_counter()
            job()
            samples[k].append(time.perf_counter() - start)
    return [max(statistics.median(s), 1e-6) for s in samples]


def _job(image: GrayImage, engine: str, rule: str, spec: WindowSpec, params: RuleParams):
    if engine == "otsu":
        return lambda: binarize_otsu(image)
    return lambda: binarize(image, rule, engine, spec, params)


def _aux_slots(image: GrayImage, engine: str, rule: str, spec: WindowSpec,
               params: RuleParams) -> int:
    if engine == "otsu":
        return 256
    audit = AuxAudit()
    binarize(image, rule, engine, spec, params, audit=audit)
    return audit.slots


def run_bench(sizes: Sequence[tuple[int, int]], windows: Sequence[WindowSpec],
              engines: Sequence[str] = ("naive", "integral", "sliding", "otsu"),
              rules: Sequence[str] = ("sauvola",), repeats: int = 3, seed: int = 0,
              params: RuleParams = RuleParams(),
              images: Optional[Iterable[GrayImage]] = None) -> list[BenchRecord]:
    """Time every engine x rule x window on each image; one record per run.

    Images are seeded uniform noise unless ``images`` is supplied. The otsu
    engine has no window and is timed once per image. Records come out in
    a fixed order: image, engine, rule, window.
    """
    if repeats < 3:
        raise ValueError("repeats must be at least 3")
    for engine in engines:
        if engine != "otsu":
            for rule in rules:
                check_combination(engine, rule)
    if images is None:
        images = [random_image(H, W, seed + k) for k, (H, W) in enumerate(sizes)]
    records = []
    for image in images:
        plan = []
        for engine in engines:
            if engine == "otsu":
                plan.append(("otsu", "otsu", WindowSpec(1, 1)))
                continue
            plan.extend((engine, rule, spec) for rule in rules if rule not in GLOBAL_RULES
                        for spec in windows)
        times = time_interleaved([_job(image, e, r, s, params) for e, r, s in plan], repeats)
        for (engine, rule, spec), seconds in zip(plan, times):
            h, w = (0, 0) if engine == "otsu" else (spec.h, spec.w)
            records.append(BenchRecord(engine, rule, image.height, image.width, h, w, seconds,
                                       _aux_slots(image, engine, rule, spec, params)))
    return records


def to_csv(records: Iterable[BenchRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        row = list(astuple(record))
        row[6] = f"{record.wall_time_s:.6f}"
        writer.writerow(row)
    return buffer.getvalue()


def read_csv(text: str) -> list[BenchRecord]:
    types = [f.type for f in fields(BenchRecord)]
    casts = {"str": str, "int": int, "float": float}
    rows = list(csv.reader(io.StringIO(text)))
    if tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"unexpected header {rows[0]}")
    return [BenchRecord(*(casts[t](v) for t, v in zip(types, row))) for row in rows[1:]]


def summarize(records: Sequence[BenchRecord]) -> list[str]:
    """Human-readable ratios: sliding vs integral, sliding vs otsu, per image and window."""
    lines = []
    index = {(r.engine, r.rule, r.H, r.W, r.h, r.w): r.wall_time_s for r in records}
    otsu = {(r.H, r.W): r.wall_time_s for r in records if r.engine == "otsu"}
    for r in records:
        if r.engine != "sliding":
            continue
        parts = [f"{r.rule} {r.H}x{r.W} window {r.h}x{r.w}: sliding {r.wall_time_s:.4f}s"]
        integral = index.get(("integral", r.rule, r.H, r.W, r.h, r.w))
        if integral:
            parts.append(f"{100 * (1 - r.wall_time_s / integral):+.0f}% faster than integral")
        if (r.H, r.W) in otsu:
            parts.append(f"{r.wall_time_s / otsu[(r.H, r.W)]:.1f}x otsu time")
        lines.append(", ".join(parts))
    return lines
