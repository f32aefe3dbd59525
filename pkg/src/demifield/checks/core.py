"""Paired Monte-Carlo estimation of the two sides of an inequality."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from ..harness.estimate import accumulate, effective_count
from ..harness.seeding import GENERATOR_ID, NORMAL_METHOD

HOLD, VIOLATION, INCONCLUSIVE = "HOLD", "VIOLATION", "INCONCLUSIVE"
MIN_EFFECTIVE = 30
# absolute slack for floating round-off when both sides are exactly equal
ROUNDOFF = 1e-12
DIAGNOSTIC_LABEL = "finite-n diagnostic"


class CheckError(ValueError):
    pass


MeanFn = Callable[[Mapping[str, float]], float]


@dataclass(frozen=True)
class Row:
    """One evaluated inequality ``lhs <= rhs``."""

    label: str
    params: dict
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float
    se_diff: float
    z_score: float | None
    verdict: str
    effective: int
    extra: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_json(self) -> dict:
        out = {"label": self.label, "params": self.params, "lhs": self.lhs, "lhs_se": self.lhs_se,
               "rhs": self.rhs, "rhs_se": self.rhs_se, "margin": self.margin, "se_diff": self.se_diff,
               "z_score": self.z_score, "verdict": self.verdict, "effective": self.effective}
        if self.extra:
            out["extra"] = self.extra
        return out


def _gradient(fn: MeanFn, names: list[str], mean: np.ndarray) -> np.ndarray:
    grad = np.zeros(len(names))
    base = dict(zip(names, mean))
    for a, name in enumerate(names):
        h = 1e-6 * max(1.0, abs(mean[a]))
        up, down = dict(base), dict(base)
        up[name] += h
        down[name] -= h
        grad[a] = (fn(up) - fn(down)) / (2.0 * h)
    return grad


def paired_row(
    label: str,
    columns: Mapping[str, np.ndarray],
    lhs: MeanFn,
    rhs: MeanFn,
    z: float,
    params: dict | None = None,
    extra: dict | None = None,
) -> Row:
    """Estimate ``lhs(means) <= rhs(means)`` from per-replicate columns.

    Both sides are smooth functions of the column means; their standard
    errors, and the error of their difference, come from the delta method
    with the joint covariance of the columns, so the shared replicates
    cancel common noise.
    """
    names = sorted(columns)
    mat = np.column_stack([np.asarray(columns[n], dtype=float) for n in names])
    if mat.shape[0] < 2:
        raise CheckError("paired estimation needs at least two replicates")
    if not np.isfinite(mat).all():
        raise CheckError(f"non-finite replicate values in {label!r}")
    acc = accumulate(mat)
    mean = acc.mean
    # columns that never vary are exact constants; pin them so their
    # accumulated round-off does not leak into the estimates
    constant = np.all(mat == mat[0], axis=0)
    mean = np.where(constant, mat[0], mean)
    cov = acc.covariance() / acc.n
    cov[constant, :] = 0.0
    cov[:, constant] = 0.0
    means = dict(zip(names, mean))
    lval, rval = float(lhs(means)), float(rhs(means))
    gl, gr = _gradient(lhs, names, mean), _gradient(rhs, names, mean)
    gd = gr - gl

    def se(g):
        return math.sqrt(max(float(g @ cov @ g), 0.0))

    lse, rse, dse = se(gl), se(gr), se(gd)
    used = [a for a in range(len(names)) if gl[a] != 0.0 or gr[a] != 0.0]
    eff = min((effective_count(mat[:, a]) for a in used), default=mat.shape[0])
    margin = rval - lval
    slack = ROUNDOFF * max(1.0, abs(lval), abs(rval))
    if eff < MIN_EFFECTIVE:
        verdict = INCONCLUSIVE
    elif lval <= rval + z * dse + slack:
        verdict = HOLD
    else:
        verdict = VIOLATION
    z_score = margin / dse if dse > 0 else None
    return Row(label, dict(params or {}), lval, lse, rval, rse, dse, z_score, verdict, int(eff), dict(extra or {}))


def overall_verdict(rows: list[Row]) -> str:
    verdicts = {r.verdict for r in rows}
    if VIOLATION in verdicts:
        return VIOLATION
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return HOLD


def decisive_row(rows: list[Row]) -> Row:
    """The row that settles the verdict: a failing one, else the tightest."""
    verdict = overall_verdict(rows)
    candidates = [r for r in rows if r.verdict == verdict]

    def tightness(r: Row) -> float:
        if r.z_score is not None:
            return r.z_score
        return math.inf if r.margin >= 0 else -math.inf

    return min(candidates, key=tightness)


@dataclass(frozen=True)
class InequalityReport:
    theorem: str
    rows: tuple[Row, ...]
    replicates: int
    seed: int
    z: float
    params: dict
    generator: dict
    constants: dict = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @property
    def verdict(self) -> str:
        return overall_verdict(list(self.rows))

    @property
    def decisive(self) -> Row:
        return decisive_row(list(self.rows))

    @property
    def lhs(self) -> float:
        return self.decisive.lhs

    @property
    def rhs(self) -> float:
        return self.decisive.rhs

    @property
    def margin(self) -> float:
        return self.decisive.margin

    def row(self, label: str) -> Row:
        for r in self.rows:
            if r.label == label:
                return r
        raise KeyError(label)

    def to_json(self) -> dict:
        d = self.decisive
        return {
            "kind": "inequality",
            "theorem": self.theorem,
            "verdict": self.verdict,
            "lhs": {"estimate": d.lhs, "se": d.lhs_se},
            "rhs": {"estimate": d.rhs, "se": d.rhs_se},
            "margin": d.margin,
            "z_score": d.z_score,
            "decisive_row": d.label,
            "replicates": self.replicates,
            "seed": self.seed,
            "z": self.z,
            "rng": {"generator": GENERATOR_ID, "normals": NORMAL_METHOD},
            "generator": self.generator,
            "params": self.params,
            "constants": self.constants,
            "notes": list(self.notes),
            "rows": [r.to_json() for r in self.rows],
        }


@dataclass(frozen=True)
class TrendReport:
    """Finite-n behaviour of a quantity over growing boxes; never a limit proof."""

    theorem: str
    boxes: tuple[tuple[int, ...], ...]
    series: tuple[dict, ...]
    flags: dict
    verdict: str
    replicates: int
    seed: int
    params: dict
    generator: dict
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "kind": "trend",
            "label": DIAGNOSTIC_LABEL,
            "theorem": self.theorem,
            "verdict": self.verdict,
            "boxes": [list(b) for b in self.boxes],
            "series": list(self.series),
            "flags": self.flags,
            "replicates": self.replicates,
            "seed": self.seed,
            "rng": {"generator": GENERATOR_ID, "normals": NORMAL_METHOD},
            "generator": self.generator,
            "params": self.params,
            "notes": [DIAGNOSTIC_LABEL] + list(self.notes),
        }


def nonincreasing(values, tol: float = 0.0) -> bool:
    v = list(values)
    return all(b <= a + tol for a, b in zip(v, v[1:]))
