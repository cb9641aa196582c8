"""Single entry point dispatching to the naive, integral and sliding engines."""
from __future__ import annotations

from typing import Optional

import numpy as np

from .audit import AuxAudit
from .image import BinaryImage, GrayImage
from .reference import UnsupportedRuleError, binarize_integral, binarize_naive
from .rules import GLOBAL_RULES, MEAN_VARIANCE_RULES, RuleParams, otsu_threshold, rule_id
from .sliding import binarize_sliding
from .window import WindowSpec

ENGINES = ("naive", "integral", "sliding")
DEFAULT_WINDOW = WindowSpec(32, 32)


def binarize_otsu(image: GrayImage) -> BinaryImage:
    t = otsu_threshold(image)
    return BinaryImage((image.pixels > t).astype(np.uint8))


def check_combination(engine: str, rule: str) -> None:
    rule_id(rule)
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}; choose from {', '.join(ENGINES)}")
    if engine == "integral" and rule not in MEAN_VARIANCE_RULES | GLOBAL_RULES:
        raise UnsupportedRuleError(f"integral engine cannot evaluate {rule!r}")


def binarize(image: GrayImage, rule: str = "sauvola", engine: str = "sliding",
             spec: WindowSpec = DEFAULT_WINDOW, params: RuleParams = RuleParams(),
             axis: Optional[str] = None, audit: Optional[AuxAudit] = None) -> BinaryImage:
    """Binarize ``image``; the global ``otsu`` rule ignores engine and window."""
    check_combination(engine, rule)
    if rule in GLOBAL_RULES:
        return binarize_otsu(image)
    if engine == "naive":
        return binarize_naive(image, spec, rule, params, audit=audit)
    if engine == "integral":
        return binarize_integral(image, spec, rule, params, audit=audit)
    return binarize_sliding(image, spec, rule, params, axis=axis, audit=audit)
