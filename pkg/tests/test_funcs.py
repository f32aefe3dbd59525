import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from demifield.funcs import (
    ConvexSpec,
    FunctionSpecError,
    MonotoneSpec,
    OrliczSpec,
    PsiSpec,
    ThresholdSeq,
    WeightArray,
    best_finite_ratio_bound,
    gamma_fn,
    integral_u_dg,
    log_plus,
    validate_weights,
)


def test_log_plus():
    assert log_plus(0.0) == 0.0 and log_plus(0.5) == 0.0
    assert log_plus(math.e) == pytest.approx(1.0)
    assert np.allclose(log_plus(np.array([0.0, 1.0, math.e ** 2])), [0, 0, 2])
    with pytest.raises(FunctionSpecError):
        log_plus(-1.0)


@given(st.floats(1e-6, 1e6), st.floats(0.01, 1.0))
def test_gamma_fn_nonnegative(x, c):
    assert gamma_fn(x, c) >= -1e-12


def test_gamma_fn_rejects_bad_c():
    with pytest.raises(FunctionSpecError):
        gamma_fn(1.0, 1.5)


@pytest.mark.parametrize("bad", [
    {"kind": "power", "p": 0.5},
    {"kind": "piecewise_linear", "breakpoints": [0.0], "slopes": [1.0, -1.0]},
    {"kind": "piecewise_linear", "breakpoints": [1.0], "slopes": [1.0, 2.0]},
    {"kind": "nope"},
])
def test_convex_spec_rejects(bad):
    with pytest.raises(FunctionSpecError):
        ConvexSpec.from_json(bad)


def test_piecewise_linear_values():
    g = ConvexSpec("piecewise_linear", breakpoints=(-1.0, 0.0, 2.0), slopes=(-2.0, -1.0, 1.0, 3.0))
    assert g(0.0) == 0.0
    assert g(1.0) == pytest.approx(1.0)
    assert g(3.0) == pytest.approx(2.0 + 3.0)
    assert g(-2.0) == pytest.approx(1.0 + 2.0)
    assert not g.nondecreasing
    assert ConvexSpec.from_json(g.to_json()) == g


@settings(max_examples=60)
@given(st.sampled_from([ConvexSpec("power", 2.0), ConvexSpec("positive_part_power", 1.5),
                        ConvexSpec("identity_on_nonneg")]),
       st.floats(-20, 20), st.floats(-20, 20), st.floats(0, 1))
def test_convex_inequality(g, x, y, lam):
    mid = lam * x + (1 - lam) * y
    assert g(mid) <= lam * g(x) + (1 - lam) * g(y) + 1e-9 * (1 + abs(g(x)) + abs(g(y)))


def test_integral_u_dg_closed_forms_agree_with_quadrature():
    for g in [MonotoneSpec("identity"), MonotoneSpec("positive_part_power", p=2.0),
              MonotoneSpec("positive_part_power", p=1.0)]:
        for x in [-3.0, -0.5, 0.0, 0.7, 4.0]:
            assert integral_u_dg(g, x) == pytest.approx(integral_u_dg(g, x, method="quad"), abs=1e-9)


def test_integral_u_dg_examples():
    assert integral_u_dg(MonotoneSpec("identity"), 2.0) == 2.0
    assert integral_u_dg(MonotoneSpec("identity"), -2.0) == 2.0
    assert integral_u_dg(MonotoneSpec("step", eps=0.5), 0.7) == 0.5
    assert integral_u_dg(MonotoneSpec("step", eps=0.5), 0.4) == 0.0
    # int_0^x u/(1+u) du = x - log(1+x)
    assert integral_u_dg(MonotoneSpec("log1p_plus"), 3.0) == pytest.approx(3.0 - math.log(4.0), abs=1e-9)
    with pytest.raises(FunctionSpecError):
        integral_u_dg(MonotoneSpec("step"), 1.0, method="quad")


@given(st.floats(-50, 50))
def test_integral_u_dg_nonnegative(x):
    for g in [MonotoneSpec("identity"), MonotoneSpec("positive_part_power", p=3.0), MonotoneSpec("step", eps=1.0)]:
        assert integral_u_dg(g, x) >= 0


def test_big_phi_against_frozen_oracle(golden):
    for case in golden("big_phi.json")["cases"]:
        phi = OrliczSpec.from_json(case["phi"])
        got = phi.big_phi_a(case["a"], case["x"])
        assert got == pytest.approx(case["big_phi_a"], rel=1e-9, abs=1e-9), case
        assert phi.phi_a_prime(case["a"], case["x"]) == pytest.approx(case["phi_a_prime"], rel=1e-9, abs=1e-9)


def test_big_phi_quadrature_route_matches_closed_form():
    for phi in [OrliczSpec("power", 2.5), OrliczSpec("xlog1p"), OrliczSpec("exp_minus_one", r=0.7)]:
        for x in [0.6, 2.0, 7.0]:
            assert phi.big_phi_a(0.5, x, method="quad") == pytest.approx(phi.big_phi_a(0.5, x), rel=1e-8)


def test_big_phi_zero_below_a_and_bad_a():
    phi = OrliczSpec("power", 2)
    assert phi.big_phi_a(1.0, 0.5) == 0.0
    with pytest.raises(FunctionSpecError):
        OrliczSpec("power", 1).big_phi_a(0.0, 1.0)
    with pytest.raises(FunctionSpecError):
        phi.big_phi_a(-1.0, 1.0)


@settings(max_examples=40)
@given(st.floats(1.0, 5.0), st.floats(0.1, 3.0), st.floats(0.0, 10.0))
def test_big_phi_convex_nonnegative(p, a, dx):
    phi = OrliczSpec("power", p)
    xs = a + dx * np.array([0.0, 0.5, 1.0])
    v = phi.big_phi_a(a, xs)
    assert (v >= -1e-12).all()
    assert v[1] <= 0.5 * (v[0] + v[2]) + 1e-9 * (1 + v[2])


def test_orlicz_constants():
    assert OrliczSpec("power", 2).q_phi().value == pytest.approx(2.0, abs=1e-12)
    assert OrliczSpec("power", 3).q_phi().value == pytest.approx(1.5, abs=1e-12)
    assert OrliczSpec("power", 4).moderate()
    assert not OrliczSpec("exp_minus_one").moderate()
    assert OrliczSpec("exp_minus_one").p_phi_star().infinite
    with pytest.raises(FunctionSpecError):
        OrliczSpec("power", 1).q_phi()
    with pytest.raises(FunctionSpecError):
        OrliczSpec("xlog1p").q_phi()
    assert OrliczSpec("power", 3).derivative_is_orlicz(2)
    assert not OrliczSpec("power", 2.5).derivative_is_orlicz(2)
    assert OrliczSpec("power", 4).root_convex(2.0)
    assert not OrliczSpec("power", 1.5).root_convex(2.0)


def test_orlicz_json_and_rejects():
    for phi in [OrliczSpec("power", 3), OrliczSpec("xlog1p"), OrliczSpec("exp_minus_one", r=2.0)]:
        assert OrliczSpec.from_json(phi.to_json()) == phi
    with pytest.raises(FunctionSpecError):
        OrliczSpec("power", 0.5)


def test_weights():
    c = WeightArray({"kind": "inverse_product"}).build((2, 3))
    assert np.allclose(c, [[1, 1 / 2, 1 / 3], [1 / 2, 1 / 4, 1 / 6]])
    assert (WeightArray({"kind": "const", "value": 2}).build((2,)) == 2).all()
    with pytest.raises(FunctionSpecError):
        validate_weights(np.array([[1.0, 2.0]]))
    with pytest.raises(FunctionSpecError):
        validate_weights(np.array([1.0, 0.0]))
    with pytest.raises(FunctionSpecError):
        WeightArray({"kind": "array", "values": [1.0]}).build((2,))


def test_thresholds():
    seq = ThresholdSeq({"kind": "product"}, PsiSpec("power", q=2))
    assert seq.psi_of_u((2, 2)).tolist() == [[1, 4], [4, 16]]
    assert ThresholdSeq.from_json(seq.to_json()) == seq
    with pytest.raises(FunctionSpecError):
        ThresholdSeq({"kind": "array", "values": [2.0, 1.0]}, PsiSpec()).build((2,))
    assert not PsiSpec("saturating").unbounded and PsiSpec("log1p").unbounded


def test_best_finite_ratio_bound_decreases_to_one():
    values = [best_finite_ratio_bound(e, 1.0) for e in (1.0, 10.0, 100.0, 1e4)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert 1.0 < values[-1] < 1.01
