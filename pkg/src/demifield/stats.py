"""Deterministic statistics of field realisations: extrema, rank orders, upcrossings.

Every function accepts a single ``FieldSample`` (or array) and has a
``*_batch`` counterpart working on an ``(R, *box)`` stack of replicates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import FieldSample
from .funcs import ConvexSpec
from .lattice import LatticeError

MODES = ("corner_line", "all_lines_sum")
DERIVATIVE_STEP = 1e-7


class StatsError(ValueError):
    pass


def _values(field) -> np.ndarray:
    return field.values if isinstance(field, FieldSample) else np.asarray(field, dtype=float)


def _flat_batch(fields: np.ndarray) -> np.ndarray:
    fields = np.asarray(fields, dtype=float)
    return fields.reshape(fields.shape[0], -1)


def box_max(field) -> float:
    return float(_values(field).max())


def box_min(field) -> float:
    return float(_values(field).min())


def box_max_batch(fields: np.ndarray) -> np.ndarray:
    return _flat_batch(fields).max(axis=1)


def box_min_batch(fields: np.ndarray) -> np.ndarray:
    return _flat_batch(fields).min(axis=1)


def weighted_max(field, c, g: ConvexSpec) -> float:
    """``max_i c_i g(S_i)``."""
    return float(weighted_max_batch(_values(field)[None], c, g)[0])


def weighted_max_batch(fields: np.ndarray, c, g: ConvexSpec) -> np.ndarray:
    fields = np.asarray(fields, dtype=float)
    c = np.asarray(c, dtype=float)
    if c.shape != fields.shape[1:]:
        raise StatsError(f"weights shape {c.shape} does not match box {fields.shape[1:]}")
    return _flat_batch(c * g(fields)).max(axis=1)


def rank_order(field, j: int) -> float:
    """j-th largest value with multiplicity; the minimum once j exceeds the cell count."""
    return float(rank_order_batch(_values(field)[None], j)[0])


def rank_order_batch(fields: np.ndarray, j: int) -> np.ndarray:
    if int(j) != j or j < 1:
        raise StatsError(f"rank j must be a positive integer, got {j}")
    flat = _flat_batch(fields)
    cells = flat.shape[1]
    if j > cells:
        return flat.min(axis=1)
    # j-th largest == (cells - j)-th smallest
    return np.partition(flat, cells - j, axis=1)[:, cells - j]


def _check_ab(a: float, b: float):
    if not a < b:
        raise StatsError(f"need a < b, got a={a}, b={b}")


def count_upcrossings(lines: np.ndarray, a: float, b: float) -> np.ndarray:
    """Complete upcrossings of [a, b] along the last axis.

    Two-state scan: wait for a value <= a, then for a value >= b, count, repeat.
    """
    _check_ab(a, b)
    lines = np.asarray(lines, dtype=float)
    seeking_high = np.zeros(lines.shape[:-1], dtype=bool)
    count = np.zeros(lines.shape[:-1], dtype=np.int64)
    for t in range(lines.shape[-1]):
        v = lines[..., t]
        done = seeking_high & (v >= b)
        count += done
        seeking_high = np.where(seeking_high, ~done, v <= a)
    return count


def _direction_axis(k: int, s: int) -> int:
    if not 1 <= s <= k:
        raise LatticeError(f"direction {s} out of range 1..{k}")
    return s - 1


def upcross_direction_batch(fields: np.ndarray, s: int, a: float, b: float, mode: str = "corner_line") -> np.ndarray:
    fields = np.asarray(fields, dtype=float)
    k = fields.ndim - 1
    axis = _direction_axis(k, s) + 1
    if mode not in MODES:
        raise StatsError(f"unknown mode {mode!r}; expected one of {MODES}")
    lines = np.moveaxis(fields, axis, -1)
    if mode == "corner_line":
        lines = lines[(slice(None),) + (-1,) * (k - 1)]
        return count_upcrossings(lines, a, b)
    counts = count_upcrossings(lines, a, b)
    return counts.reshape(counts.shape[0], -1).sum(axis=1)


def upcross_direction(field, s: int, a: float, b: float, mode: str = "corner_line") -> int:
    """Complete upcrossings of [a, b] in direction ``s``.

    ``corner_line`` scans the line through the box's upper corner;
    ``all_lines_sum`` adds the counts of every line parallel to direction ``s``.
    """
    return int(upcross_direction_batch(_values(field)[None], s, a, b, mode)[0])


def combine_directions(per_direction) -> int:
    """Smallest positive directional count, or 0 when none is positive."""
    positive = [int(u) for u in per_direction if u > 0]
    return min(positive) if positive else 0


@dataclass(frozen=True)
class UpcrossReport:
    per_direction: tuple[int, ...]
    total: int
    mode: str

    def to_json(self) -> dict:
        return {"per_direction": list(self.per_direction), "total": self.total, "mode": self.mode}


def upcross_total(field, a: float, b: float, mode: str = "corner_line") -> UpcrossReport:
    values = _values(field)
    per = tuple(upcross_direction(values, s, a, b, mode) for s in range(1, values.ndim + 1))
    return UpcrossReport(per, combine_directions(per), mode)


def upcross_total_batch(fields: np.ndarray, a: float, b: float, mode: str = "corner_line") -> np.ndarray:
    fields = np.asarray(fields, dtype=float)
    per = np.stack([upcross_direction_batch(fields, s, a, b, mode) for s in range(1, fields.ndim)], axis=1)
    masked = np.where(per > 0, per, np.iinfo(np.int64).max)
    total = masked.min(axis=1)
    return np.where(total == np.iinfo(np.int64).max, 0, total)


def max_right_derivative_check(points, t: float) -> int:
    """Rounded right difference quotient of ``x -> max(points..., x)`` at ``t``."""
    base = max(float(np.max(points)), t) if len(points) else t
    stepped = max(float(np.max(points)), t + DERIVATIVE_STEP) if len(points) else t + DERIVATIVE_STEP
    return int(round((stepped - base) / DERIVATIVE_STEP))
