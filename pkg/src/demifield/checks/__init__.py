"""One check per maximal inequality, plus finite-n trend diagnostics."""

from .config import CheckConfig
from .core import (
    DIAGNOSTIC_LABEL,
    HOLD,
    INCONCLUSIVE,
    VIOLATION,
    CheckError,
    InequalityReport,
    Row,
    TrendReport,
    paired_row,
)
from .inequalities import (
    check_cairoli_moment,
    check_cairoli_prob,
    check_chow,
    check_doob_indicator,
    check_hajek_renyi,
    check_harremoes,
    check_moment_corollary,
    check_negative_control,
    check_orlicz_moment,
    check_orlicz_prob,
    check_rank_order,
    check_upcross_bound,
    check_whittle,
)
from .trends import check_chow_convergence_trend, check_limsup_trend, check_whittle_trend

CHECKS = {
    "cairoli_moment": check_cairoli_moment,
    "cairoli_prob": check_cairoli_prob,
    "doob_indicator": check_doob_indicator,
    "rank_order": check_rank_order,
    "moment_corollary": check_moment_corollary,
    "harremoes": check_harremoes,
    "limsup_trend": check_limsup_trend,
    "chow": check_chow,
    "chow_convergence_trend": check_chow_convergence_trend,
    "hajek_renyi": check_hajek_renyi,
    "orlicz_prob": check_orlicz_prob,
    "orlicz_moment": check_orlicz_moment,
    "upcross_bound": check_upcross_bound,
    "whittle": check_whittle,
    "whittle_trend": check_whittle_trend,
    "negative_control": check_negative_control,
}


def run_check(theorem: str, cfg: CheckConfig):
    try:
        fn = CHECKS[theorem]
    except KeyError:
        raise CheckError(f"unknown theorem id {theorem!r}; known: {sorted(CHECKS)}") from None
    return fn(cfg)


__all__ = [
    "CHECKS", "CheckConfig", "CheckError", "DIAGNOSTIC_LABEL", "HOLD", "INCONCLUSIVE", "InequalityReport",
    "Row", "TrendReport", "VIOLATION", "paired_row", "run_check",
] + [fn.__name__ for fn in CHECKS.values()]
