"""Closed-form example configurations of each check, evaluated exactly."""

import math

import numpy as np
import pytest

from demifield.checks import HOLD, CheckConfig, CheckError, run_check
from demifield.checks.inequalities import A
from demifield.fields import FixedField

from conftest import constant, iid

R = 50


def run(theorem, gen, replicates=R, **params):
    return run_check(theorem, CheckConfig(gen, params, replicates=replicates, seed=1))


def only_row(rep):
    assert len(rep.rows) == 1
    return rep.rows[0]


def test_cairoli_moment_on_unit_field():
    row = only_row(run("cairoli_moment", constant((2, 2), 1.0), p=2))
    assert (row.lhs, row.rhs, row.verdict) == (1.0, 16.0, HOLD)


def test_cairoli_prob_empty_tail():
    row = only_row(run("cairoli_prob", constant((2, 2), 1.0), eps=[2]))
    assert row.lhs == 0.0 and row.verdict == HOLD
    assert row.rhs == pytest.approx(A + A * A)


def test_doob_on_zero_field():
    row = only_row(run("doob_indicator", constant((3, 3), 0.0), eps=[1]))
    assert (row.lhs, row.rhs, row.verdict) == (0.0, 0.0, HOLD)


def test_rank_one_is_the_maximum_and_overflow_is_the_minimum():
    gen = iid((3, 3))
    top = run("rank_order", gen, replicates=2000, j=1, eps=[1])
    doob = run("doob_indicator", gen, replicates=2000, extremum="max", eps=[1])
    assert top.rows[1].lhs == doob.rows[0].lhs and top.rows[1].rhs == doob.rows[0].rhs
    low = run("rank_order", gen, replicates=2000, j=10, eps=[1])
    dmin = run("doob_indicator", gen, replicates=2000, extremum="min", eps=[1])
    assert low.rows[1].lhs == dmin.rows[0].lhs and low.rows[1].rhs == dmin.rows[0].rhs


def test_moment_corollary_unit_field_p1():
    row = only_row(run("moment_corollary", constant((2, 2), 1.0), p=1))
    assert row.lhs == 1.0 and row.rhs == pytest.approx(math.e / (math.e - 1.0)) and row.verdict == HOLD


def test_moment_corollary_reports_both_multipliers():
    rep = run("moment_corollary", constant((2, 2), 2.0), p=2)
    assert rep.constants["multiplier"] == 4.0 and rep.constants["cairoli_multiplier"] == 16.0


def test_harremoes_equality_at_one():
    row = only_row(run("harremoes", constant((2, 2), 1.0), c=1))
    assert row.lhs == pytest.approx(0.0, abs=1e-15) and row.rhs == pytest.approx(0.0, abs=1e-15)
    assert row.verdict == HOLD


def test_harremoes_half_field():
    row = only_row(run("harremoes", constant((2, 2), 0.5), c=0.5))
    assert row.lhs == pytest.approx(math.log(2.0))
    assert row.rhs == pytest.approx(0.75 + 0.5 * math.log(2.0))


def test_limsup_trend_degenerate_denominator():
    with pytest.raises(CheckError):
        run("limsup_trend", constant((8,), 1.0), boxes=[[2], [4], [8]])


def test_chow_zero_field():
    row = only_row(run("chow", constant((2, 3), 0.0), weights={"kind": "const", "value": 1},
                       g={"kind": "power", "p": 1}, eps=[0.5]))
    assert (row.lhs, row.rhs, row.verdict) == (0.0, 0.0, HOLD)


def test_chow_single_direction():
    row = only_row(run("chow", iid((6,)), replicates=2000, g={"kind": "power", "p": 2}, eps=[1]))
    assert row.extra["per_direction"] and len(row.extra["per_direction"]) == 1


def test_chow_trend_zero_field_and_divergent_series():
    rep = run("chow_convergence_trend", constant((8, 8), 0.0), boxes=[[2, 2], [4, 4], [8, 8]])
    assert rep.flags["tail_probabilities"] == [0.0, 0.0, 0.0]
    with pytest.raises(CheckError):
        run("chow_convergence_trend", iid((8, 8)), replicates=500, boxes=[[2, 2], [4, 4], [8, 8]],
            weights={"kind": "const", "value": 1}, g={"kind": "power", "p": 2}, p=1)


def test_hajek_renyi_zero_field():
    rep = run("hajek_renyi", FixedField(np.zeros((3, 3)).tolist()), eps=[1])
    assert all(row.lhs == 0.0 and row.verdict == HOLD for row in rep.rows)


def test_hajek_renyi_iid_reduces_to_kolmogorov_form():
    n, eps = 8, 2.0
    rep = run("hajek_renyi", iid((n,)), replicates=20000, weights={"kind": "const", "value": 1}, eps=[eps])
    for row in rep.rows:
        assert row.rhs == pytest.approx(n / eps ** 2, abs=4 * row.rhs_se + 1e-12)


def test_orlicz_prob_closed_forms():
    row = only_row(run("orlicz_prob", constant((2, 2), 0.0), lam=[0.5], x=1))
    assert (row.lhs, row.rhs) == (0.0, 0.0)
    row = only_row(run("orlicz_prob", constant((2, 2), 1.0), lam=[0.5], x=2))
    assert (row.lhs, row.rhs, row.verdict) == (0.0, 0.0, HOLD)


def test_llog_bound_on_unit_field():
    row = only_row(run("orlicz_moment", constant((2, 2), 1.0), bound="llog", b=math.e))
    assert row.lhs == 1.0 and row.rhs == pytest.approx(math.e) and row.verdict == HOLD


def test_exponential_bound_on_zero_field():
    row = only_row(run("orlicz_moment", constant((2, 2), 0.0), bound="exponential", r=1))
    assert row.lhs == 1.0 and row.rhs == pytest.approx(math.e)


def test_q_phi_bound_for_square():
    rep = run("orlicz_moment", constant((2, 2), 1.0), bound="q_phi", phi={"kind": "power", "p": 2})
    assert rep.constants["q_phi"]["value"] == 2.0 and rep.rows[0].rhs == 4.0


def test_upcross_deterministic_path():
    row = only_row(run("upcross_bound", FixedField([1.0, 2.0, 3.0, 4.0]), a=1, b=3))
    assert (row.lhs, row.rhs, row.verdict) == (1.0, 1.5, HOLD)


def test_upcross_zero_field():
    rep = run("upcross_bound", constant((2, 2), 0.0), a=1, b=2)
    assert all((row.lhs, row.rhs) == (0.0, 0.0) for row in rep.rows)


def test_whittle_zero_field_equality():
    for variant, phi in [("monotone", {"kind": "positive_part_power", "p": 2}), ("general", {"kind": "power", "p": 2})]:
        row = only_row(run("whittle", constant((3, 3), 0.0), variant=variant, phi=phi))
        assert (row.lhs, row.rhs, row.verdict) == (1.0, 1.0, HOLD)


def test_whittle_trend_zero_field_and_bounded_psi():
    thresholds = {"u": {"kind": "product"}, "psi": {"kind": "power", "q": 2}}
    rep = run("whittle_trend", constant((8, 8), 0.0), boxes=[[2, 2], [4, 4], [8, 8]], thresholds=thresholds)
    assert rep.flags["tail_probabilities"] == [0.0, 0.0, 0.0]
    with pytest.raises(CheckError):
        run("whittle_trend", constant((8, 8), 0.0), boxes=[[2, 2], [8, 8]],
            thresholds={"u": {"kind": "product"}, "psi": {"kind": "saturating"}})
