"""Local adaptive binarization with sliding column accumulators."""
from .audit import AuxAudit
from .engines import ENGINES, binarize, binarize_otsu
from .image import (
    BACKGROUND,
    FOREGROUND,
    BinaryImage,
    GrayImage,
    MalformedHeaderError,
    NetpbmError,
    TruncatedDataError,
    UnsupportedMaxvalError,
    read_pgm,
    write_pbm,
    write_pgm,
)
from .reference import (
    IntegralImage,
    UnsupportedRuleError,
    binarize_integral,
    binarize_naive,
    build_integral,
    window_sum,
)
from .rules import (
    RULES,
    GlobalStats,
    LocalStats,
    RuleParams,
    compute_global_stats,
    otsu_threshold,
    sauvola_decide,
    threshold_value,
)
from .sliding import (
    AccumulatorCapacityError,
    binarize_sliding,
    choose_sweep_axis,
    sweep_extrema,
    sweep_mean_variance,
    sweep_quantile,
)
from .window import WindowSpec, effective_count

__version__ = "0.1.0"
