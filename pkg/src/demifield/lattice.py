"""Points and boxes of the k-dimensional positive integer lattice."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class MultiIndex:
    """A lattice point ``(n_1, ..., n_k)``.

    Coordinate 0 is allowed so that boundary indices such as ``S_{n;s;0}``
    can be written down; such indices are never iterated.
    """

    coords: tuple[int, ...]

    def __init__(self, coords: Sequence[int]):
        coords = tuple(int(c) for c in coords)
        if len(coords) < 1:
            raise LatticeError("a multi-index needs at least one coordinate")
        if any(c < 0 for c in coords):
            raise LatticeError(f"negative coordinate in {coords}")
        object.__setattr__(self, "coords", coords)

    @property
    def k(self) -> int:
        return len(self.coords)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, item):
        return self.coords[item]

    def is_boundary(self) -> bool:
        return any(c == 0 for c in self.coords)

    def to_json(self) -> list[int]:
        return list(self.coords)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> "MultiIndex":
        return cls(data)

    def __repr__(self) -> str:
        return f"MultiIndex{self.coords}"


def _as_index(i) -> MultiIndex:
    return i if isinstance(i, MultiIndex) else MultiIndex(i)


def leq(i, j) -> bool:
    """Coordinatewise partial order ``i <= j``."""
    i, j = _as_index(i), _as_index(j)
    if i.k != j.k:
        raise LatticeError(f"dimension mismatch: {i.k} vs {j.k}")
    return all(a <= b for a, b in zip(i.coords, j.coords))


def slice_replace(base, s: int, i: int) -> MultiIndex:
    """Return ``base`` with its ``s``-th coordinate (1-based) set to ``i``."""
    base = _as_index(base)
    if not 1 <= s <= base.k:
        raise LatticeError(f"direction {s} out of range 1..{base.k}")
    if i < 0:
        raise LatticeError(f"position must be >= 0, got {i}")
    coords = list(base.coords)
    coords[s - 1] = int(i)
    return MultiIndex(coords)


@dataclass(frozen=True)
class LatticeBox:
    """The box ``{i : (1,...,1) <= i <= upper}``."""

    upper: MultiIndex

    def __init__(self, upper):
        upper = _as_index(upper)
        if any(c < 1 for c in upper.coords):
            raise LatticeError(f"box corner must have coordinates >= 1, got {upper.coords}")
        object.__setattr__(self, "upper", upper)

    @property
    def k(self) -> int:
        return self.upper.k

    @property
    def shape(self) -> tuple[int, ...]:
        return self.upper.coords

    @property
    def size(self) -> int:
        n = 1
        for c in self.upper.coords:
            n *= c
        return n

    def contains(self, i) -> bool:
        i = _as_index(i)
        return not i.is_boundary() and leq(i, self.upper)

    def to_json(self) -> list[int]:
        return self.upper.to_json()

    @classmethod
    def from_json(cls, data) -> "LatticeBox":
        return cls(data)


def _as_box(box) -> LatticeBox:
    return box if isinstance(box, LatticeBox) else LatticeBox(box)


def box_iter(box) -> Iterator[MultiIndex]:
    """Every index of the box exactly once, lexicographically."""
    box = _as_box(box)
    for coords in itertools.product(*(range(1, n + 1) for n in box.shape)):
        yield MultiIndex(coords)


def direction_line(box, s: int) -> list[MultiIndex]:
    """The corner line ``upper;s;i`` for ``i = 1..n_s``."""
    box = _as_box(box)
    if not 1 <= s <= box.k:
        raise LatticeError(f"direction {s} out of range 1..{box.k}")
    return [slice_replace(box.upper, s, i) for i in range(1, box.shape[s - 1] + 1)]


def array_position(i) -> tuple[int, ...]:
    """Zero-based array position of a (non-boundary) lattice index."""
    i = _as_index(i)
    if i.is_boundary():
        raise LatticeError(f"boundary index {i.coords} has no array position")
    return tuple(c - 1 for c in i.coords)
