"""Streaming mean / standard-error accumulation with exact ordered merges."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BLOCK = 8192


class EstimateError(ValueError):
    pass


@dataclass(frozen=True)
class Estimate:
    mean: float
    se: float
    n: int
    effective: int

    def to_json(self) -> dict:
        return {"mean": self.mean, "se": self.se, "n": self.n, "effective": self.effective}


class MomentAccumulator:
    """Running mean vector and co-moment matrix for ``m`` paired columns.

    Batches are folded in with the pairwise (Chan et al.) update, which is
    also the merge rule, so accumulating blocks in a fixed order gives the
    same numbers whatever process produced the blocks.
    """

    def __init__(self, m: int):
        self.m = m
        self.n = 0
        self.mean = np.zeros(m)
        self.comoment = np.zeros((m, m))

    def update(self, batch: np.ndarray) -> "MomentAccumulator":
        batch = np.asarray(batch, dtype=float).reshape(-1, self.m)
        if batch.shape[0] == 0:
            return self
        other = MomentAccumulator(self.m)
        other.n = batch.shape[0]
        other.mean = batch.mean(axis=0)
        centred = batch - other.mean
        other.comoment = centred.T @ centred
        return self.merge(other)

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.comoment = other.n, other.mean.copy(), other.comoment.copy()
            return self
        n = self.n + other.n
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.n / n)
        self.comoment = self.comoment + other.comoment + np.outer(delta, delta) * (self.n * other.n / n)
        self.n = n
        return self

    def covariance(self) -> np.ndarray:
        if self.n < 2:
            raise EstimateError("need at least two values for a standard error")
        return self.comoment / (self.n - 1)


def accumulate(columns: np.ndarray, block: int = BLOCK) -> MomentAccumulator:
    """Fold an (R, m) matrix in replicate-index order, ``block`` rows at a time."""
    columns = np.asarray(columns, dtype=float)
    if columns.ndim == 1:
        columns = columns[:, None]
    acc = MomentAccumulator(columns.shape[1])
    for start in range(0, columns.shape[0], block):
        acc.update(columns[start:start + block])
    return acc


def effective_count(values: np.ndarray, share: float = 0.9) -> int:
    """Smallest number of replicates whose |values| carry ``share`` of the total mass.

    A column with no mass (all zeros) reports its full length.
    """
    a = np.abs(np.asarray(values, dtype=float).ravel())
    total = a.sum()
    if total == 0.0 or not np.isfinite(total):
        return a.size if total == 0.0 else 0
    ordered = np.sort(a)[::-1]
    return int(np.searchsorted(np.cumsum(ordered), share * total) + 1)


def estimate(values) -> Estimate:
    values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float).ravel()
    if values.size < 2:
        raise EstimateError("estimate() needs at least two values")
    acc = accumulate(values[:, None])
    var = acc.covariance()[0, 0]
    se = math.sqrt(max(var, 0.0) / acc.n)
    if np.all(values == values[0]):
        se = 0.0
    return Estimate(float(acc.mean[0]), se, int(acc.n), effective_count(values))
