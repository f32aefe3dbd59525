"""Random-field generators whose partial sums/products are demi(sub)martingales,
plus Monte-Carlo oracles for association and the demimartingale property."""

from __future__ import annotations

import csv
import io
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .harness import seeding
from .harness.estimate import accumulate
from .lattice import LatticeBox, LatticeError, MultiIndex, array_position, box_iter, leq

MODELS = ("iid_partial_sum", "moving_average", "product_martingale")
DISTS = ("normal", "exponential", "rademacher", "lognormal")
CENTRED_DISTS = ("normal", "exponential", "rademacher")
TRANSFORMS = (None, "positive_part")

# Replicates are generated in fixed-size chunks; the chunk size never depends
# on the worker count.
CHUNK = 4096


class FieldError(ValueError):
    pass


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("DEMIFIELD_WORKERS")
    return max(1, int(env)) if env else 1


@dataclass(frozen=True)
class GeneratorSpec:
    """Parametric field model.

    ``scale`` multiplies the innovations of the centred distributions; for
    ``lognormal`` it is the log-standard-deviation of a mean-one multiplier
    ``exp(scale * Z - scale**2 / 2)``.  ``scale = 0`` gives degenerate fields.

    ``transform="positive_part"`` (iid model only) reports ``S_n^+``; by
    conditional Jensen this is a nonnegative demisubmartingale.
    """

    model: str
    dist: str
    box: tuple[int, ...]
    scale: float = 1.0
    kernel: tuple | None = None
    c: float = 1.0
    transform: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "box", tuple(int(n) for n in self.box))
        if self.transform not in TRANSFORMS:
            raise FieldError(f"unknown transform {self.transform!r}")
        if self.transform is not None and self.model != "iid_partial_sum":
            raise FieldError("the positive_part transform is only supported for iid_partial_sum")
        try:
            LatticeBox(self.box)
        except LatticeError as exc:
            raise FieldError(str(exc)) from exc
        if self.model not in MODELS:
            raise FieldError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.dist not in DISTS:
            raise FieldError(f"unknown distribution {self.dist!r}; expected one of {DISTS}")
        if not np.isfinite(self.scale) or self.scale < 0:
            raise FieldError(f"scale must be finite and >= 0, got {self.scale}")
        if self.model == "product_martingale":
            if self.dist != "lognormal":
                raise FieldError("product_martingale needs positive mean-one multipliers (dist='lognormal')")
            if not (np.isfinite(self.c) and self.c > 0):
                raise FieldError(f"origin value c must be > 0, got {self.c}")
        elif self.dist not in CENTRED_DISTS:
            raise FieldError(f"{self.model} needs a mean-zero distribution, not {self.dist!r}")
        if self.model == "moving_average":
            if self.kernel is None:
                raise FieldError("moving_average needs a kernel")
            kern = np.asarray(self.kernel, dtype=float)
            if kern.ndim != len(self.box):
                raise FieldError(f"kernel has {kern.ndim} dims, box has {len(self.box)}")
            if (kern < 0).any() or not np.isfinite(kern).all():
                raise FieldError("moving_average kernel entries must be finite and >= 0")
            object.__setattr__(self, "kernel", _freeze(kern.tolist()))
        elif self.kernel is not None:
            raise FieldError(f"kernel is only meaningful for moving_average, not {self.model}")

    @property
    def k(self) -> int:
        return len(self.box)

    @property
    def kernel_array(self) -> np.ndarray | None:
        return None if self.kernel is None else np.asarray(self.kernel, dtype=float)

    def sign(self) -> str:
        """'positive', 'zero', 'nonnegative' or 'signed': the sign class of every realisation."""
        if self.model == "product_martingale":
            return "positive"
        if self.scale == 0 or (self.kernel is not None and not np.any(self.kernel_array)):
            return "zero"
        return "nonnegative" if self.transform else "signed"

    def process_kind(self) -> str:
        return "demisubmartingale" if self.transform else "demimartingale"

    def associated_increments(self) -> bool:
        return self.model in ("iid_partial_sum", "moving_average") and self.transform is None

    def with_box(self, box) -> "GeneratorSpec":
        return GeneratorSpec(self.model, self.dist, tuple(box), self.scale, self.kernel, self.c, self.transform)

    def to_json(self) -> dict:
        out = {"model": self.model, "dist": self.dist, "box": list(self.box), "scale": self.scale}
        if self.kernel is not None:
            out["kernel"] = np.asarray(self.kernel).tolist()
        if self.model == "product_martingale":
            out["c"] = self.c
        if self.transform is not None:
            out["transform"] = self.transform
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GeneratorSpec":
        known = {"model", "dist", "box", "scale", "kernel", "c", "transform"}
        extra = set(data) - known
        if extra:
            raise FieldError(f"unknown generator fields {sorted(extra)}")
        return cls(
            model=data["model"],
            dist=data["dist"],
            box=tuple(data["box"]),
            scale=float(data.get("scale", 1.0)),
            kernel=data.get("kernel"),
            c=float(data.get("c", 1.0)),
            transform=data.get("transform"),
        )

    def simulate(self, replicates: int, seed: int, workers: int | None = None) -> np.ndarray:
        return simulate(self, replicates, seed, workers)


def _freeze(x):
    return tuple(_freeze(v) for v in x) if isinstance(x, list) else float(x)


@dataclass(frozen=True)
class FixedField:
    """A deterministic field, repeated identically in every replicate."""

    values: tuple

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim < 1 or arr.size == 0 or not np.isfinite(arr).all():
            raise FieldError("fixed field values must be a finite, non-empty array")
        object.__setattr__(self, "values", _freeze(arr.tolist()) if arr.ndim else (float(arr),))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def box(self) -> tuple[int, ...]:
        return self.array.shape

    @property
    def k(self) -> int:
        return self.array.ndim

    @property
    def c(self) -> float:
        return float(self.array.flat[0])

    def sign(self) -> str:
        arr = self.array
        if (arr > 0).all():
            return "positive"
        if (arr == 0).all():
            return "zero"
        return "nonnegative" if (arr >= 0).all() else "signed"

    def process_kind(self) -> str:
        """A deterministic field is a demimartingale only when constant and a
        demisubmartingale only when nondecreasing in every direction."""
        arr = self.array
        if (arr == arr.flat[0]).all():
            return "demimartingale"
        if all((np.diff(arr, axis=ax) >= 0).all() for ax in range(arr.ndim)):
            return "demisubmartingale"
        return "unknown"

    def associated_increments(self) -> bool:
        return True

    def with_box(self, box) -> "FixedField":
        box = tuple(box)
        arr = self.array
        if any(b > n for b, n in zip(box, arr.shape)):
            raise FieldError(f"box {box} exceeds fixed field shape {arr.shape}")
        return FixedField(arr[tuple(slice(0, b) for b in box)].tolist())

    def to_json(self) -> dict:
        return {"model": "fixed", "values": self.array.tolist()}

    @classmethod
    def from_increments(cls, increments) -> "FixedField":
        return cls(partial_sums(np.asarray(increments, dtype=float)).values.tolist())

    def simulate(self, replicates: int, seed: int, workers: int | None = None) -> np.ndarray:
        return np.broadcast_to(self.array, (int(replicates),) + self.array.shape).copy()


def parse_generator(data: dict):
    if data.get("model") == "fixed":
        if "increments" in data:
            return FixedField.from_increments(data["increments"])
        return FixedField(data["values"])
    return GeneratorSpec.from_json(data)


@dataclass(frozen=True)
class FieldSample:
    """One realisation of ``{S_i : i <= n}``; zero-coordinate indices read as 0."""

    box: LatticeBox
    values: np.ndarray

    def __post_init__(self):
        box = self.box if isinstance(self.box, LatticeBox) else LatticeBox(self.box)
        values = np.asarray(self.values, dtype=float)
        if values.shape != box.shape:
            raise FieldError(f"values shape {values.shape} does not match box {box.shape}")
        if not np.isfinite(values).all():
            raise FieldError("field values must be finite")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, values) -> "FieldSample":
        values = np.asarray(values, dtype=float)
        return cls(LatticeBox(values.shape), values)

    def at(self, index) -> float:
        index = index if isinstance(index, MultiIndex) else MultiIndex(index)
        if index.is_boundary():
            return 0.0
        if not self.box.contains(index):
            raise FieldError(f"index {index.coords} outside box {self.box.shape}")
        return float(self.values[array_position(index)])

    def flat(self) -> np.ndarray:
        """Values in ``box_iter`` order."""
        return self.values.ravel(order="C")

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"i{d + 1}" for d in range(self.box.k)] + ["value"])
        for idx, v in zip(box_iter(self.box), self.flat()):
            writer.writerow(list(idx.coords) + [repr(float(v))])
        return buf.getvalue()


def partial_sums(increments) -> FieldSample:
    """``S_n = sum_{i <= n} X_i`` by one running-sum sweep per dimension."""
    out = np.asarray(increments, dtype=float)
    for axis in range(out.ndim):
        out = np.cumsum(out, axis=axis)
    return FieldSample.from_array(out)


def _batch_partial_sums(x: np.ndarray) -> np.ndarray:
    for axis in range(1, x.ndim):
        x = np.cumsum(x, axis=axis)
    return x


def _batch_partial_products(w: np.ndarray) -> np.ndarray:
    for axis in range(1, w.ndim):
        w = np.cumprod(w, axis=axis)
    return w


def _draw(dist: str, scale: float, seeds: np.ndarray, count: int) -> np.ndarray:
    if dist == "normal":
        return scale * seeding.normals(seeds, count)
    if dist == "lognormal":
        return np.exp(scale * seeding.normals(seeds, count) - 0.5 * scale * scale)
    u = seeding.uniforms(seeds, 0, count)
    if dist == "exponential":
        return scale * (-np.log(u) - 1.0)
    if dist == "rademacher":
        return scale * np.where(u < 0.5, -1.0, 1.0)
    raise FieldError(f"unknown distribution {dist!r}")


def _increments_chunk(spec: GeneratorSpec, seeds: np.ndarray) -> np.ndarray:
    n_rep = seeds.size
    if spec.model == "moving_average":
        kern = spec.kernel_array
        ext = tuple(n + m - 1 for n, m in zip(spec.box, kern.shape))
        eps = _draw(spec.dist, spec.scale, seeds, int(np.prod(ext))).reshape((n_rep,) + ext)
        out = np.zeros((n_rep,) + spec.box)
        # X_i = sum_t K[t] * eps_{i + (m - 1) - t}; innovations below the box are the padding
        for tap in np.ndindex(kern.shape):
            w = kern[tap]
            if w == 0.0:
                continue
            sl = tuple(slice(m - 1 - t, m - 1 - t + n) for t, m, n in zip(tap, kern.shape, spec.box))
            out += w * eps[(slice(None),) + sl]
        return out
    return _draw(spec.dist, spec.scale, seeds, int(np.prod(spec.box))).reshape((n_rep,) + spec.box)


def _field_chunk(spec: GeneratorSpec, seeds: np.ndarray) -> np.ndarray:
    x = _increments_chunk(spec, seeds)
    if spec.model == "product_martingale":
        x[(slice(None),) + (0,) * spec.k] = spec.c
        return _batch_partial_products(x)
    s = _batch_partial_sums(x)
    return np.maximum(s, 0.0) if spec.transform == "positive_part" else s


def _run_chunks(fn: Callable[[np.ndarray], np.ndarray], replicates: int, seed: int, workers: int | None):
    replicates = int(replicates)
    if replicates < 1:
        raise FieldError("replicates must be >= 1")
    starts = list(range(0, replicates, CHUNK))

    def job(start: int) -> np.ndarray:
        return fn(seeding.derive_seeds(seed, start, min(CHUNK, replicates - start)))

    n_workers = worker_count(workers)
    if n_workers == 1 or len(starts) == 1:
        parts = [job(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(job, starts))
    return np.concatenate(parts, axis=0)


def simulate(spec, replicates: int, seed: int, workers: int | None = None) -> np.ndarray:
    """Field values for replicates ``0..R-1``; shape ``(R, *box)``.

    Replicate ``r`` is exactly ``sample_field(spec, derive_seed(seed, r))``.
    """
    if isinstance(spec, FixedField):
        return spec.simulate(replicates, seed)
    return _run_chunks(lambda seeds: _field_chunk(spec, seeds), replicates, seed, workers)


def simulate_increments(spec: GeneratorSpec, replicates: int, seed: int, workers: int | None = None) -> np.ndarray:
    """The innovation field ``X`` (multipliers ``W`` for product models) behind ``simulate``."""

    def fn(seeds):
        x = _increments_chunk(spec, seeds)
        if spec.model == "product_martingale":
            x[(slice(None),) + (0,) * spec.k] = spec.c
        return x

    return _run_chunks(fn, replicates, seed, workers)


def sample_field(spec, seed: int) -> FieldSample:
    """One realisation whose stream is seeded directly by ``seed``."""
    if isinstance(spec, FixedField):
        return FieldSample.from_array(spec.array)
    seeds = np.array([int(seed) & seeding.MASK64], dtype=np.uint64)
    return FieldSample.from_array(_field_chunk(spec, seeds)[0])


# ---------------------------------------------------------------------------
# Test-function family
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """A componentwise nondecreasing map from (R, m) samples to (R,) values."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]

    __test__ = False  # not a pytest class

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.asarray(self.fn(x if x.ndim == 2 else x[None, :]), dtype=float)


def _ramp(x, t):
    return np.maximum(x - t, 0.0)


def _step(x, t):
    return (x >= t).astype(float)


def threshold_grid(scale: float, points: int = 7) -> np.ndarray:
    return np.linspace(-2.0 * scale, 2.0 * scale, points)


@dataclass
class TestFunctionFamily:
    members: list[TestFunction] = field(default_factory=list)

    __test__ = False

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def names(self) -> list[str]:
        return [f.name for f in self.members]

    @classmethod
    def standard(cls, thresholds: Iterable[float]) -> "TestFunctionFamily":
        """Constant, running sum, and ramp/step members at each threshold.

        ``*_last`` members look only at the final coordinate, which for a
        flattened sub-box ``{k <= i}`` is ``S_i`` itself.
        """
        members = [
            TestFunction("const", lambda x: np.ones(x.shape[0])),
            TestFunction("sum", lambda x: x.sum(axis=1)),
        ]
        for t in thresholds:
            t = float(t)
            tag = f"{t:+.4g}"
            members += [
                TestFunction(f"ramp_last{tag}", lambda x, t=t: _ramp(x[:, -1], t)),
                TestFunction(f"step_last{tag}", lambda x, t=t: _step(x[:, -1], t)),
                TestFunction(f"ramp_sum{tag}", lambda x, t=t: _ramp(x, t).sum(axis=1)),
                TestFunction(f"step_all{tag}", lambda x, t=t: _step(x.min(axis=1), t)),
                TestFunction(f"step_any{tag}", lambda x, t=t: _step(x.max(axis=1), t)),
            ]
        return cls(members)

    @classmethod
    def projections(cls, m: int) -> "TestFunctionFamily":
        return cls([TestFunction(f"coord{j}", lambda x, j=j: x[:, j]) for j in range(m)])


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OracleCell:
    label: str
    function: str
    estimate: float
    se: float
    verdict: str

    def to_json(self) -> dict:
        return {"label": self.label, "function": self.function, "estimate": self.estimate,
                "se": self.se, "verdict": self.verdict}


@dataclass
class OracleReport:
    kind: str
    z: float
    replicates: int
    seed: int | None
    cells: list[OracleCell]

    @property
    def passed(self) -> int:
        return sum(c.verdict == "PASS" for c in self.cells)

    @property
    def failed(self) -> int:
        return len(self.cells) - self.passed

    @property
    def all_pass(self) -> bool:
        return self.failed == 0

    def to_json(self) -> dict:
        return {"kind": self.kind, "z": self.z, "replicates": self.replicates, "seed": self.seed,
                "passed": self.passed, "failed": self.failed, "cells": [c.to_json() for c in self.cells]}


def _mean_se(col: np.ndarray) -> tuple[float, float]:
    if np.all(col == col[0]):
        return float(col[0]), 0.0
    acc = accumulate(col[:, None])
    return float(acc.mean[0]), float(np.sqrt(max(acc.covariance()[0, 0], 0.0) / acc.n))


def _verdict(est: float, se: float, z: float) -> str:
    return "PASS" if est >= -z * se else "FAIL"


def default_pairs(box) -> list[tuple[MultiIndex, MultiIndex]]:
    idx = list(box_iter(box))
    return [(i, j) for i in idx for j in idx if i != j and leq(i, j)]


def demimartingale_oracle_fields(
    fields: np.ndarray,
    family: TestFunctionFamily | None = None,
    pairs: Sequence | None = None,
    z: float = 3.0,
    seed: int | None = None,
) -> OracleReport:
    """Estimate ``E[(S_j - S_i) f(S_k, k <= i)]`` per (pair, f) on given replicates."""
    fields = np.asarray(fields, dtype=float)
    if fields.shape[0] < 2:
        raise FieldError("need at least two replicates")
    box = LatticeBox(fields.shape[1:])
    if family is None:
        family = TestFunctionFamily.standard(threshold_grid(float(fields.std())))
    if pairs is None:
        pairs = default_pairs(box)
    cells = []
    for i, j in pairs:
        i = i if isinstance(i, MultiIndex) else MultiIndex(i)
        j = j if isinstance(j, MultiIndex) else MultiIndex(j)
        if not leq(i, j):
            raise FieldError(f"pair {i.coords}, {j.coords} is not comparable as i <= j")
        past = fields[(slice(None),) + tuple(slice(0, c) for c in i.coords)].reshape(fields.shape[0], -1)
        diff = fields[(slice(None),) + array_position(j)] - fields[(slice(None),) + array_position(i)]
        label = f"{list(i.coords)}->{list(j.coords)}"
        for f in family:
            est, se = _mean_se(diff * f(past))
            cells.append(OracleCell(label, f.name, est, se, _verdict(est, se, z)))
    return OracleReport("demimartingale", z, fields.shape[0], seed, cells)


def demimartingale_oracle(
    spec,
    family: TestFunctionFamily | None = None,
    pairs: Sequence | None = None,
    replicates: int = 10_000,
    seed: int = 0,
    z: float = 3.0,
    workers: int | None = None,
) -> OracleReport:
    if replicates < 2:
        raise FieldError("replicates must be >= 2")
    fields = simulate(spec, replicates, seed, workers)
    return demimartingale_oracle_fields(fields, family, pairs, z, seed)


def association_oracle(
    sampler: Callable[[int, int], np.ndarray],
    pairs: Sequence[tuple[TestFunction, TestFunction]] | None = None,
    replicates: int = 10_000,
    seed: int = 0,
    z: float = 3.0,
) -> OracleReport:
    """Estimate ``Cov(f(X), g(X))`` for nondecreasing (f, g) pairs.

    ``sampler(replicates, seed)`` returns an (R, m) matrix of variables.
    """
    if replicates < 2:
        raise FieldError("replicates must be >= 2")
    x = np.asarray(sampler(replicates, seed), dtype=float)
    x = x.reshape(x.shape[0], -1)
    if pairs is None:
        fam = list(TestFunctionFamily.standard(threshold_grid(float(x.std()))))
        fam += list(TestFunctionFamily.projections(x.shape[1]))
        pairs = [(f, g) for a, f in enumerate(fam) for g in fam[a:]]
    cells = []
    for f, g in pairs:
        fx, gx = f(x), g(x)
        if np.all(fx == fx[0]) or np.all(gx == gx[0]):
            est, se = 0.0, 0.0
        else:
            acc = accumulate(np.column_stack([fx, gx]))
            cov = acc.covariance()
            est = float(cov[0, 1])
            # first-order SE of the sample covariance
            _, se = _mean_se((fx - acc.mean[0]) * (gx - acc.mean[1]))
        cells.append(OracleCell(f"{f.name}|{g.name}", "cov", est, se, _verdict(est, se, z)))
    return OracleReport("association", z, x.shape[0], seed, cells)


def increment_sampler(spec: GeneratorSpec, workers: int | None = None) -> Callable[[int, int], np.ndarray]:
    """Sampler of the flattened innovation vector of an additive model."""
    if spec.model == "product_martingale":
        raise FieldError("association sampling needs an additive (iid or moving-average) model")

    def sampler(replicates: int, seed: int) -> np.ndarray:
        x = simulate_increments(spec, replicates, seed, workers)
        return x.reshape(x.shape[0], -1)

    return sampler
