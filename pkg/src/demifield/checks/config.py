"""Check configuration: a generator, Monte-Carlo settings and theorem parameters."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..fields import FixedField, GeneratorSpec, parse_generator, simulate
from .core import CheckError

DEFAULT_REPLICATES = 100_000


@dataclass(frozen=True)
class CheckConfig:
    generator: GeneratorSpec | FixedField
    params: dict = field(default_factory=dict)
    replicates: int = DEFAULT_REPLICATES
    seed: int = 0
    z: float = 3.0
    workers: int | None = None

    def __post_init__(self):
        if int(self.replicates) < 2:
            raise CheckError("replicates must be >= 2")
        if not self.z > 0:
            raise CheckError("z must be > 0")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise CheckError("seed must be a 64-bit unsigned integer")

    def with_params(self, **overrides) -> "CheckConfig":
        merged = dict(self.params)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return replace(self, params=merged)

    def get(self, name: str, default=None):
        return self.params.get(name, default)

    def need(self, name: str):
        if name not in self.params:
            raise CheckError(f"missing parameter {name!r}")
        return self.params[name]

    def fields(self, box=None) -> np.ndarray:
        gen = self.generator if box is None else self.generator.with_box(box)
        return simulate(gen, int(self.replicates), int(self.seed), self.workers)

    def to_json(self) -> dict:
        return {"generator": self.generator.to_json(), "params": self.params,
                "replicates": int(self.replicates), "seed": int(self.seed), "z": self.z}

    @classmethod
    def from_json(cls, data: dict, defaults: dict | None = None) -> "CheckConfig":
        defaults = defaults or {}
        return cls(
            generator=parse_generator(data["generator"]),
            params=dict(data.get("params", {})),
            replicates=int(data.get("replicates", defaults.get("replicates", DEFAULT_REPLICATES))),
            seed=int(data.get("seed", defaults.get("seed", 0))),
            z=float(data.get("z", defaults.get("z", 3.0))),
            workers=defaults.get("workers"),
        )


def as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]
