"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line."""

import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from demifield import stats
from demifield.checks import HOLD, VIOLATION
from demifield.fields import FixedField, demimartingale_oracle
from demifield.funcs import OrliczSpec

from conftest import DATA, iid

SEED = 20240611
DEFAULT_SUITE = DATA / "default_suite.json"
NEGATIVE_CONTROL = DATA / "negative_control.json"


def verdict_line(capsys, criterion, ok, detail):
    with capsys.disabled():
        print(f"\n[acceptance] criterion {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def run_cli(args, workers=None):
    env = dict(os.environ)
    env.pop("DEMIFIELD_WORKERS", None)
    if workers is not None:
        env["DEMIFIELD_WORKERS"] = str(workers)
    cmd = [sys.executable, "-c", "from demifield.harness.cli import main; main()"] + args
    return subprocess.run(cmd, env=env, capture_output=True, text=True)


@pytest.fixture(scope="module")
def suite_runs(tmp_path_factory):
    """The documented suite run twice with default workers and once with four."""
    runs = {}
    for name, workers in [("first", None), ("second", None), ("four_workers", 4)]:
        out = tmp_path_factory.mktemp(name)
        proc = run_cli(["suite", "--config", str(DEFAULT_SUITE), "--out", str(out)], workers)
        runs[name] = (proc, out)
    return runs


@pytest.fixture(scope="module")
def suite_report(suite_runs):
    _, out = suite_runs["first"]
    return json.loads((out / "report.json").read_text())


def reports_for(report, theorem):
    return [(c["name"], c["report"]) for c in report["checks"] if c["theorem"] == theorem]


def test_criterion_01_upcross_2x2_exampleings(capsys):
    values = json.loads((DATA / "upcross_2x2_example.json").read_text())
    rep = stats.upcross_total(np.array(values["values"]), values["a"], values["b"], "all_lines_sum")
    ok = rep.per_direction == (0, 1) and rep.total == 1
    verdict_line(capsys, 1, ok, f"per-direction {list(rep.per_direction)}, total {rep.total}")


def test_criterion_02_demimartingale_oracle(capsys):
    failures = {}
    for dist in ("normal", "exponential", "rademacher"):
        rep = demimartingale_oracle(iid((3, 3), dist), replicates=100_000, seed=SEED, z=3.0)
        failures[dist] = (rep.failed, len(rep.cells))
    flip = FixedField([[1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, 1.0]])
    control = demimartingale_oracle(flip, replicates=100, seed=SEED, z=3.0)
    ok = all(f == 0 for f, _ in failures.values()) and control.failed >= 1
    detail = ", ".join(f"{d}: {f}/{n} FAIL" for d, (f, n) in failures.items())
    verdict_line(capsys, 2, ok, f"{detail}; sign-flip control: {control.failed} FAIL")


def test_criterion_03_inequality_suite(capsys, suite_runs, suite_report, tmp_path):
    proc, _ = suite_runs["first"]
    inequality = [(c["name"], c.get("report")) for c in suite_report["checks"]
                  if c.get("report", {}).get("kind", "inequality") == "inequality"]
    not_hold = [name for name, rep in inequality if rep is None or rep["verdict"] != HOLD]
    violations = [name for name, rep in inequality if rep is not None and rep["verdict"] == VIOLATION]
    neg = run_cli(["suite", "--config", str(NEGATIVE_CONTROL), "--out", str(tmp_path)])
    neg_report = json.loads((tmp_path / "report.json").read_text())
    neg_verdict = neg_report["checks"][0]["report"]["verdict"]
    ok = proc.returncode == 0 and not not_hold and not violations and neg.returncode == 1 and neg_verdict == VIOLATION
    verdict_line(capsys, 3, ok, f"{len(inequality) - len(not_hold)}/{len(inequality)} HOLD, "
                                f"{len(violations)} VIOLATION, suite exit {proc.returncode}; "
                                f"negative control {neg_verdict}, exit {neg.returncode}")


def test_criterion_04_constants(capsys, suite_report):
    checks = []
    (_, cm), = [r for r in reports_for(suite_report, "cairoli_moment")]
    checks.append(("(p/(p-1))^(kp) at p=2,k=2", cm["constants"]["multiplier"], 16.0))
    cor = {r["params"]["p"]: r for _, r in reports_for(suite_report, "moment_corollary")}
    checks.append(("(p/(p-1))^p at p=2", cor[2]["constants"]["multiplier"], 4.0))
    checks.append(("(p/(p-1))^p at p=3", cor[3]["constants"]["multiplier"], 1.5 ** 3))
    checks.append(("A", cor[1]["constants"]["A"], math.e / (math.e - 1.0)))
    (_, qrep), = [r for r in reports_for(suite_report, "orlicz_moment") if r[1]["params"]["bound"] == "q_phi"]
    checks.append(("q_phi report, p=2", qrep["constants"]["q_phi"]["value"], 2.0))
    for p in (1.5, 2.0, 3.0, 7.0):
        checks.append((f"q_phi, p={p:g}", OrliczSpec("power", p).q_phi().value, p / (p - 1.0)))
    bad = [(name, got, want) for name, got, want in checks if abs(got - want) > 1e-12]
    verdict_line(capsys, 4, not bad, f"{len(checks) - len(bad)}/{len(checks)} constants within 1e-12"
                                     + (f"; off: {bad}" if bad else ""))


def test_criterion_05a_corollary_below_product_bound(capsys, suite_report):
    pairs = []
    for _, rep in reports_for(suite_report, "cairoli_moment"):
        for row in rep["rows"]:
            pairs.append((row["extra"]["corollary_rhs"], row["rhs"]))
    for _, rep in reports_for(suite_report, "moment_corollary"):
        for row in rep["rows"]:
            if "cairoli_rhs" in row["extra"]:
                pairs.append((row["rhs"], row["extra"]["cairoli_rhs"]))
    ok = bool(pairs) and all(small <= big for small, big in pairs)
    verdict_line(capsys, "5a", ok, f"{sum(s <= b for s, b in pairs)}/{len(pairs)} runs with "
                                   "single-multiplier rhs <= product-multiplier rhs")


def test_criterion_05b_llog_below_corollary_at_b_e(capsys, suite_report):
    pairs = []
    for _, rep in reports_for(suite_report, "moment_corollary"):
        for row in rep["rows"]:
            if "llog_rhs_b_e" in row["extra"]:
                pairs.append((row["extra"]["llog_rhs_b_e"], row["rhs"]))
    for _, rep in reports_for(suite_report, "orlicz_moment"):
        if rep["params"]["bound"] == "llog" and math.isclose(rep["constants"]["b"], math.e):
            pairs.append((rep["rows"][0]["rhs"], rep["constants"]["corollary_rhs_p1"]))
    ok = bool(pairs) and all(llog <= cor for llog, cor in pairs)
    detail = "; ".join(f"llog rhs {a:.6f} vs p=1 corollary rhs {b:.6f}" for a, b in pairs)
    verdict_line(capsys, "5b", ok, detail)


def test_criterion_06_quadrature(capsys):
    phi = OrliczSpec("power", 2)
    worst = 0.0
    for a in (0.0, 0.5, 1.0):
        xs = np.round(np.arange(a + 0.1, 10.0 + 1e-9, 0.1), 10)
        want = (xs - a) ** 2
        for method in ("auto", "quad"):
            worst = max(worst, float(np.max(np.abs(phi.big_phi_a(a, xs, method=method) - want))))
    verdict_line(capsys, 6, worst <= 1e-8, f"max |Phi_a(x) - (x-a)^2| = {worst:.2e}")


def test_criterion_07_rank_order(capsys):
    rng = np.random.default_rng(SEED)
    mismatches = cases = 0
    for _ in range(200):
        k = int(rng.integers(1, 4))
        shape = tuple(int(rng.integers(1, cap + 1)) for cap in (4, 4, 3)[:k])
        # small integer support forces ties, so multiplicity matters
        values = rng.integers(-3, 4, size=shape).astype(float) if rng.random() < 0.5 else rng.normal(size=shape)
        ordered = sorted(values.ravel().tolist(), reverse=True)
        for j in range(1, len(ordered) + 3):
            cases += 1
            want = ordered[j - 1] if j <= len(ordered) else ordered[-1]
            mismatches += stats.rank_order(values, j) != want
    verdict_line(capsys, 7, mismatches == 0, f"{mismatches} mismatches over {cases} (field, j) cases")


def test_criterion_08_right_derivative(capsys):
    rng = np.random.default_rng(SEED)
    wrong = 0
    for case in range(1000):
        points = rng.normal(scale=10.0, size=int(rng.integers(1, 12)))
        gap = rng.uniform(1e-3, 5.0)
        if case % 2:
            t, want = float(points.max() - gap), 0
        else:
            t, want = float(points.max() + gap), 1
        wrong += stats.max_right_derivative_check(points.tolist(), t) != want
    verdict_line(capsys, 8, wrong == 0, f"{wrong} wrong answers over 1000 cases")


def test_criterion_09_determinism(capsys, suite_runs):
    blobs = {name: (out / "report.json").read_bytes() for name, (_, out) in suite_runs.items()}
    csvs = {name: (out / "rows.csv").read_bytes() for name, (_, out) in suite_runs.items()}
    same_twice = blobs["first"] == blobs["second"] and csvs["first"] == csvs["second"]
    same_workers = blobs["first"] == blobs["four_workers"] and csvs["first"] == csvs["four_workers"]
    verdict_line(capsys, 9, same_twice and same_workers,
                 f"repeat run identical: {same_twice}; DEMIFIELD_WORKERS=4 identical: {same_workers}")


def test_criterion_10_trend_diagnostics(capsys, suite_report):
    problems, summary = [], []
    for theorem in ("limsup_trend", "chow_convergence_trend", "whittle_trend"):
        found = reports_for(suite_report, theorem)
        if not found:
            problems.append(f"{theorem} missing")
        for name, rep in found:
            if rep["label"] != "finite-n diagnostic" or "finite-n diagnostic" not in " ".join(rep["notes"]):
                problems.append(f"{name} not labelled as a diagnostic")
            flags = rep["flags"]
            if theorem == "limsup_trend":
                # documented pattern: nonincreasing ratios, each under its finite-n bound
                if not (flags["nonincreasing"] and flags["within_finite_n_bound"]):
                    problems.append(f"{name} ratios {[round(r['ratio'], 3) for r in rep['series']]}")
                summary.append(f"{name}: ratios {[round(r['ratio'], 3) for r in rep['series']]}, "
                               f"limit_check {flags['limit_check']}")
            else:
                if rep["verdict"] != "PASS":
                    problems.append(f"{name} tail probabilities {flags['tail_probabilities']}")
                summary.append(f"{name}: {[round(p, 4) for p in flags['tail_probabilities']]}")
    verdict_line(capsys, 10, not problems, "; ".join(problems or summary))
