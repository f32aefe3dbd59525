import json
from pathlib import Path

import pytest

from demifield.fields import FixedField, GeneratorSpec

GOLDEN = Path(__file__).parent / "golden"
DATA = Path(__file__).resolve().parents[1] / "src" / "demifield" / "data"


@pytest.fixture
def golden():
    def load(name):
        return json.loads((GOLDEN / name).read_text())
    return load


def lognormal(box, scale=0.25, c=1.0):
    return GeneratorSpec("product_martingale", "lognormal", tuple(box), scale, c=c)


def iid(box, dist="normal", **kw):
    return GeneratorSpec("iid_partial_sum", dist, tuple(box), **kw)


def constant(box, value):
    import numpy as np
    return FixedField(np.full(tuple(box), float(value)).tolist())
