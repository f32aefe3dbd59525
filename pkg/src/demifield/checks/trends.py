"""Finite-n trend diagnostics over growing boxes (never proofs of limits)."""

from __future__ import annotations

import math

import numpy as np

from .. import stats
from ..fields import FixedField
from ..funcs import ConvexSpec, FunctionSpecError, WeightArray, best_finite_ratio_bound
from ..harness.estimate import accumulate, effective_count
from .config import CheckConfig
from .core import MIN_EFFECTIVE, CheckError, TrendReport, nonincreasing
from .inequalities import _gate, _require, _thresholds, corner, corner_line, with_boundary

# a series counts as summable when its second half carries at most this share
SUMMABLE_TAIL_SHARE = 0.1


def _boxes(cfg: CheckConfig) -> list[tuple[int, ...]]:
    boxes = [tuple(int(n) for n in b) for b in cfg.need("boxes")]
    _require(len(boxes) >= 2, "a trend needs at least two boxes")
    k = cfg.generator.k
    _require(all(len(b) == k for b in boxes), f"every box must have dimension {k}")
    for small, big in zip(boxes, boxes[1:]):
        _require(all(x <= y for x, y in zip(small, big)) and small != big, "boxes must be strictly growing")
    return boxes


def _sub(fields: np.ndarray, box) -> np.ndarray:
    return fields[(slice(None),) + tuple(slice(0, n) for n in box)]


def _horizon(cfg: CheckConfig, boxes) -> tuple[int, ...]:
    if "horizon" in cfg.params:
        h = tuple(int(n) for n in cfg.params["horizon"])
    elif isinstance(cfg.generator, FixedField):
        h = cfg.generator.box
    else:
        h = tuple(2 * n for n in boxes[-1])
    _require(all(x <= y for x, y in zip(boxes[-1], h)), f"horizon {h} must contain the last box {boxes[-1]}")
    return h


def _trend(theorem, cfg, boxes, series, flags, verdict, notes=()) -> TrendReport:
    return TrendReport(theorem, tuple(boxes), tuple(series), flags, verdict, int(cfg.replicates), int(cfg.seed),
                       dict(cfg.params), cfg.generator.to_json(), tuple(notes))


def check_limsup_trend(cfg: CheckConfig, boxes=None) -> TrendReport:
    """Ratio ``E max / E S_n ln S_n`` over growing boxes.

    Besides the ratio series the report carries the finite-n bound
    ``inf_{x0>e} x0/(x0-1) (1 + c (ln x0 - ln c) / E S ln S)`` implied by the
    same argument, against which each ratio is compared.
    """
    cfg = cfg.with_params(boxes=boxes)
    boxes = _boxes(cfg)
    _gate(cfg, signs=("positive",), kinds=("demimartingale",), what="the limsup ratio trend")
    c = float(cfg.generator.c)
    f = cfg.fields(boxes[-1])
    series = []
    for box in boxes:
        sub = _sub(f, box)
        mx, end = stats.box_max_batch(sub), corner(sub)
        sls = end * np.log(end)
        acc = accumulate(np.column_stack([mx, sls]))
        e_max, e_sls = acc.mean
        if not e_sls > 0 or np.all(sls == sls[0]):
            raise CheckError(f"E S ln S is {e_sls:g} on box {box}: the ratio needs a growing, positive denominator")
        ratio = e_max / e_sls
        grad = np.array([1.0 / e_sls, -e_max / e_sls ** 2])
        se = math.sqrt(max(float(grad @ acc.covariance() @ grad) / acc.n, 0.0))
        bound = best_finite_ratio_bound(e_sls, c)
        series.append({"box": list(box), "e_max": float(e_max), "e_s_ln_s": float(e_sls), "ratio": float(ratio),
                       "se": se, "finite_n_bound": bound, "within_finite_n_bound": bool(ratio <= bound + cfg.z * se),
                       "effective": min(effective_count(mx), effective_count(sls))})
    ratios = [row["ratio"] for row in series]
    final = series[-1]
    limit_ok = final["ratio"] <= 1.0 + 3.0 * final["se"]
    flags = {
        "nonincreasing": nonincreasing(ratios),
        "final_ratio": final["ratio"],
        "final_se": final["se"],
        "limit_check": "PASS" if limit_ok else "FAIL",
        "within_finite_n_bound": all(row["within_finite_n_bound"] for row in series),
        "reliable": all(row["effective"] >= MIN_EFFECTIVE for row in series),
    }
    notes = ("limit_check compares the final ratio with 1 + 3 SE; at finite n the ratio sits above 1 by "
             "roughly (c + c ln x0)/E S ln S, so it is expected to approach 1 only as E S ln S grows",)
    return _trend("limsup_trend", cfg, boxes, series, flags, flags["limit_check"], notes)


def _series_summable(terms: np.ndarray) -> tuple[bool, float]:
    total = float(terms.sum())
    if total == 0.0:
        return True, 0.0
    half = terms.size // 2
    share = float(terms[half:].sum()) / total
    return share <= SUMMABLE_TAIL_SHARE, share


def _tail_sup(values: np.ndarray, box) -> np.ndarray:
    """Per-replicate max over the tail set ``{n : box <= n <= horizon}``."""
    tail = values[(slice(None),) + tuple(slice(n - 1, None) for n in box)]
    return tail.reshape(tail.shape[0], -1).max(axis=1)


def _tail_series(cfg, boxes, values, threshold, strict: bool) -> list[dict]:
    series = []
    for box in boxes:
        sup = _tail_sup(values, box)
        hits = (sup > threshold) if strict else (sup >= threshold)
        p = float(hits.mean())
        se = math.sqrt(p * (1.0 - p) / hits.size)
        series.append({"box": list(box), "tail_probability": p, "se": se})
    return series


def _decreasing_flags(series) -> dict:
    probs = [row["tail_probability"] for row in series]
    return {"nonincreasing": nonincreasing(probs),
            "decreased": probs[-1] < probs[0] or all(p == 0.0 for p in probs),
            "tail_probabilities": probs}


def check_chow_convergence_trend(cfg: CheckConfig, boxes=None) -> TrendReport:
    """``P(sup over the tail of c_n g(S_n) > delta)`` over growing boxes."""
    cfg = cfg.with_params(boxes=boxes)
    boxes = _boxes(cfg)
    horizon = _horizon(cfg, boxes)
    p = float(cfg.get("p", 2.0))
    _require(p >= 1, f"p must be >= 1, got {p}")
    delta = float(cfg.get("delta", 0.5))
    _require(delta > 0, f"delta must be > 0, got {delta}")
    g = ConvexSpec.from_json(cfg.get("g", {"kind": "power", "p": 1}))
    try:
        c = WeightArray(cfg.get("weights", {"kind": "inverse_product"})).build(horizon)
    except FunctionSpecError as exc:
        raise CheckError(str(exc)) from exc
    _gate(cfg, kinds=("demimartingale",), what="the Chow convergence trend")
    f = cfg.fields(horizon)
    gp = g(f) ** p
    summability = []
    for s in range(1, len(horizon) + 1):
        means = with_boundary(corner_line(gp, s)).mean(axis=0)
        terms = corner_line(c, s, batch=False) ** p * np.diff(means)
        ok, share = _series_summable(terms)
        summability.append({"direction": s, "summable": ok, "tail_share": share, "partial_sum": float(terms.sum())})
    if not any(d["summable"] for d in summability):
        raise CheckError("the weighted series appears divergent in every direction "
                         f"(tail shares {[round(d['tail_share'], 3) for d in summability]})")
    series = _tail_series(cfg, boxes, c * g(f), delta, strict=True)
    flags = _decreasing_flags(series)
    flags["summability"] = summability
    flags["horizon"] = list(horizon)
    verdict = "PASS" if flags["nonincreasing"] and flags["decreased"] else "FAIL"
    return _trend("chow_convergence_trend", cfg, boxes, series, flags, verdict,
                  ("tail sets are truncated at the horizon box",))


def check_whittle_trend(cfg: CheckConfig, boxes=None) -> TrendReport:
    """``P(sup over the tail of phi(S_n)/psi(u_n) >= eps)`` over growing boxes."""
    cfg = cfg.with_params(boxes=boxes)
    boxes = _boxes(cfg)
    horizon = _horizon(cfg, boxes)
    eps = float(cfg.get("eps", 0.05))
    _require(eps > 0, f"eps must be > 0, got {eps}")
    phi = ConvexSpec.from_json(cfg.get("phi", {"kind": "power", "p": 2}))
    thresholds = _thresholds(cfg)
    _require(thresholds.psi.unbounded, f"psi must grow without bound; {thresholds.psi.kind} is bounded")
    try:
        psi_u = thresholds.psi_of_u(horizon)
    except FunctionSpecError as exc:
        raise CheckError(str(exc)) from exc
    _gate(cfg, kinds=("demimartingale",), what="the Whittle convergence trend")
    f = cfg.fields(horizon)
    phi_f = phi(f)
    summability = []
    for s in range(1, len(horizon) + 1):
        means = with_boundary(corner_line(phi_f, s)).mean(axis=0)
        terms = np.diff(means) / corner_line(psi_u, s, batch=False)
        ok, share = _series_summable(terms)
        summability.append({"direction": s, "summable": ok, "tail_share": share, "partial_sum": float(terms.sum())})
    if not any(d["summable"] for d in summability):
        raise CheckError("the directional series appears divergent in every direction")
    series = _tail_series(cfg, boxes, phi_f / psi_u, eps, strict=False)
    flags = _decreasing_flags(series)
    flags["summability"] = summability
    flags["horizon"] = list(horizon)
    verdict = "PASS" if flags["nonincreasing"] and flags["decreased"] else "FAIL"
    return _trend("whittle_trend", cfg, boxes, series, flags, verdict, ("tail sets are truncated at the horizon box",))
