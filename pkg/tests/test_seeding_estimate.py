import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demifield.harness import MomentAccumulator, accumulate, derive_seed, derive_seeds, effective_count, estimate
from demifield.harness.estimate import EstimateError
from demifield.harness.seeding import normals, uniforms


def test_derive_seed_matches_golden(golden):
    for case in golden("derive_seed.json")["cases"]:
        assert derive_seed(case["master"], case["replicate"]) == case["value"]


def test_derive_seed_known_first_value():
    assert derive_seed(0, 0) == 0xE220A8397B1DCDAF


@given(st.integers(0, 2 ** 64 - 1), st.integers(0, 10 ** 6), st.integers(1, 50))
def test_vectorised_seeds_match_scalar(master, start, count):
    vec = derive_seeds(master, start, count)
    assert [int(v) for v in vec] == [derive_seed(master, start + r) for r in range(count)]


def test_uniforms_open_interval_and_moments():
    u = uniforms(derive_seeds(7, 0, 2000), 0, 50)
    assert (u > 0).all() and (u < 1).all()
    assert abs(u.mean() - 0.5) < 0.005
    assert abs(u.var() - 1 / 12) < 0.002


def test_normals_moments_and_prefix_stability():
    seeds = derive_seeds(11, 0, 20000)
    z = normals(seeds, 9)
    assert z.shape == (20000, 9)
    assert abs(z.mean()) < 0.01 and abs(z.std() - 1) < 0.01
    # a replicate's values do not depend on how many other replicates are drawn
    assert np.array_equal(normals(seeds[5:6], 9)[0], z[5])


def test_estimate_against_statistics_module():
    values = [0.3, 1.2, -0.7, 2.5, 0.0, 1.1]
    est = estimate(values)
    assert est.mean == pytest.approx(statistics.fmean(values), abs=1e-14)
    assert est.se == pytest.approx(statistics.stdev(values) / math.sqrt(len(values)), rel=1e-12)
    assert est.n == 6


def test_estimate_constant_and_too_short():
    assert estimate([2.0, 2.0, 2.0]).se == 0.0
    with pytest.raises(EstimateError):
        estimate([1.0])


def test_effective_count():
    assert effective_count(np.zeros(5)) == 5
    assert effective_count(np.array([100.0] + [0.0] * 99)) == 1
    assert effective_count(np.ones(100)) == 90


@settings(max_examples=50)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=60), st.integers(1, 10))
def test_blocked_accumulation_matches_numpy(values, block):
    x = np.array(values)
    acc = accumulate(x, block=block)
    assert acc.mean[0] == pytest.approx(x.mean(), abs=1e-9)
    assert acc.covariance()[0, 0] == pytest.approx(x.var(ddof=1), rel=1e-7, abs=1e-7)


@settings(max_examples=50)
@given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=4, max_size=40), st.data())
def test_merge_is_exact_pairwise_update(rows, data):
    x = np.array(rows)
    cut = data.draw(st.integers(1, len(rows) - 1))
    left = MomentAccumulator(2).update(x[:cut])
    right = MomentAccumulator(2).update(x[cut:])
    merged = left.merge(right)
    assert np.allclose(merged.mean, x.mean(axis=0), atol=1e-10)
    assert np.allclose(merged.covariance(), np.cov(x.T), atol=1e-8)
