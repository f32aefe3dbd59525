"""Maximal inequalities checked by paired Monte-Carlo estimation.

Each ``check_*`` function takes a ``CheckConfig`` (plus optional keyword
overrides of its parameters) and returns an ``InequalityReport`` whose rows
compare a smaller side ``lhs`` with a larger side ``rhs``.
"""

from __future__ import annotations

import math

import numpy as np

from .. import stats
from ..funcs import (
    ConvexSpec,
    FunctionSpecError,
    MonotoneSpec,
    OrliczSpec,
    ThresholdSeq,
    WeightArray,
    gamma_fn,
    integral_u_dg,
    log_plus,
)
from .config import CheckConfig, as_list
from .core import CheckError, InequalityReport, Row, paired_row

A = math.e / (math.e - 1.0)
NONNEGATIVE = ("positive", "nonnegative", "zero")
SUB_OR_MARTINGALE = ("demimartingale", "demisubmartingale")


# -- gates and helpers ---------------------------------------------------------

def _require(cond: bool, message: str):
    if not cond:
        raise CheckError(message)


def _gate(cfg: CheckConfig, signs=None, kinds=SUB_OR_MARTINGALE, what: str = "this check"):
    gen = cfg.generator
    if signs is not None:
        _require(gen.sign() in signs, f"{what} needs a {'/'.join(signs)} field; generator is {gen.sign()}")
    kind = gen.process_kind()
    _require(kind in kinds, f"{what} needs a {' or '.join(kinds)}; generator gives {kind}")


def _positive_float(cfg: CheckConfig, name: str, value=None) -> float:
    v = float(cfg.need(name) if value is None else value)
    _require(v > 0, f"{name} must be > 0, got {v}")
    return v


def _eps_list(cfg: CheckConfig, default=(1.0,)) -> list[float]:
    eps = [float(e) for e in as_list(cfg.get("eps", list(default)))]
    _require(all(e > 0 for e in eps), f"every eps must be > 0, got {eps}")
    return eps


def _report(theorem: str, cfg: CheckConfig, rows: list[Row], constants=None, notes=()) -> InequalityReport:
    return InequalityReport(theorem, tuple(rows), int(cfg.replicates), int(cfg.seed), cfg.z,
                            dict(cfg.params), cfg.generator.to_json(), dict(constants or {}), tuple(notes))


def _flat(fields: np.ndarray) -> np.ndarray:
    return fields.reshape(fields.shape[0], -1)


def corner(fields: np.ndarray) -> np.ndarray:
    """``S_n`` at the upper corner of each replicate."""
    return _flat(fields)[:, -1]


def corner_line(arr: np.ndarray, s: int, batch: bool = True) -> np.ndarray:
    """Values along the corner line in direction ``s``; shape (R, n_s) or (n_s,)."""
    offset = 1 if batch else 0
    k = arr.ndim - offset
    _require(1 <= s <= k, f"direction {s} out of range 1..{k}")
    moved = np.moveaxis(arr, s - 1 + offset, -1)
    return moved[(slice(None),) * offset + (-1,) * (k - 1)]


def with_boundary(line: np.ndarray) -> np.ndarray:
    """Prepend the boundary value ``S_{n;s;0} = 0``."""
    pad = np.zeros(line.shape[:-1] + (1,))
    return np.concatenate([pad, line], axis=-1)


def _line_differences(values: np.ndarray, s: int) -> np.ndarray:
    """``v(S_{n;s;i}) - v(S_{n;s;i-1})`` for i = 1..n_s, boundary term included."""
    return np.diff(with_boundary(corner_line(values, s)), axis=-1)


# -- Cairoli-type bounds -------------------------------------------------------

def cairoli_multiplier(p: float, k: int) -> float:
    return (p / (p - 1.0)) ** (k * p)


def corollary_multiplier(p: float) -> float:
    return (p / (p - 1.0)) ** p


def check_cairoli_moment(cfg: CheckConfig, p: float | None = None) -> InequalityReport:
    cfg = cfg.with_params(p=p)
    p = float(cfg.get("p", 2.0))
    _require(p > 1, f"p must be > 1, got {p}")
    _gate(cfg, signs=("positive",), kinds=("demimartingale",), what="the Cairoli-type moment bound")
    f = cfg.fields()
    k = cfg.generator.k
    mult, cor = cairoli_multiplier(p, k), corollary_multiplier(p)
    cols = {"max_p": stats.box_max_batch(f) ** p, "end_p": corner(f) ** p}
    row = paired_row(f"p={p:g}", cols, lambda m: m["max_p"], lambda m: mult * m["end_p"], cfg.z, {"p": p},
                     extra={"corollary_rhs": cor * float(np.mean(cols["end_p"]))})
    return _report("cairoli_moment", cfg, [row], {"multiplier": mult, "corollary_multiplier": cor, "k": k})


def cairoli_prob_constant(k: int) -> float:
    return sum(math.factorial(i - 1) * A ** i for i in range(1, k + 1))


def check_cairoli_prob(cfg: CheckConfig, eps=None) -> InequalityReport:
    cfg = cfg.with_params(eps=eps)
    eps = _eps_list(cfg)
    _gate(cfg, signs=("positive",), kinds=("demimartingale",), what="the Cairoli-type tail bound")
    f = cfg.fields()
    k = cfg.generator.k
    base, slope = cairoli_prob_constant(k), math.factorial(k) * A ** k
    mx, end = stats.box_max_batch(f), corner(f)
    slog = end * log_plus(end) ** k
    rows = []
    for e in eps:
        ind = (mx >= e).astype(float)
        rows.append(paired_row(f"eps={e:g}", {"ind": ind, "slog": slog}, lambda m, e=e: e * m["ind"],
                               lambda m: base + slope * m["slog"], cfg.z, {"eps": e},
                               extra={"tail_frequency": float(ind.mean())}))
    return _report("cairoli_prob", cfg, rows, {"A": A, "additive": base, "slope": slope, "k": k})


# -- Doob-type and rank-order bounds ------------------------------------------

def _indicator_row(label: str, e: float, ind: np.ndarray, end: np.ndarray, z: float, params: dict) -> Row:
    return paired_row(label, {"ind": ind, "s_ind": end * ind}, lambda m: e * m["ind"], lambda m: m["s_ind"], z,
                      params, extra={"tail_frequency": float(ind.mean())})


def check_doob_indicator(cfg: CheckConfig, extremum: str | None = None, eps=None) -> InequalityReport:
    cfg = cfg.with_params(extremum=extremum, eps=eps)
    extremum = cfg.get("extremum", "max")
    _require(extremum in ("max", "min"), f"extremum must be 'max' or 'min', got {extremum!r}")
    eps = _eps_list(cfg)
    _gate(cfg, what="the Doob-type indicator bound")
    f = cfg.fields()
    ext = stats.box_max_batch(f) if extremum == "max" else stats.box_min_batch(f)
    end = corner(f)
    rows = [_indicator_row(f"{extremum} eps={e:g}", e, (ext >= e).astype(float), end, cfg.z,
                           {"eps": e, "extremum": extremum}) for e in eps]
    return _report("doob_indicator", cfg, rows)


def check_rank_order(cfg: CheckConfig, j: int | None = None, g=None, eps=None) -> InequalityReport:
    cfg = cfg.with_params(j=j, g=g.to_json() if isinstance(g, MonotoneSpec) else g, eps=eps)
    j = int(cfg.get("j", 1))
    _require(j >= 1, f"rank j must be >= 1, got {j}")
    g = MonotoneSpec.from_json(cfg.get("g", {"kind": "identity"}))
    eps = _eps_list(cfg)
    _gate(cfg, what="the rank-order bound")
    if cfg.generator.process_kind() == "demisubmartingale":
        _require(g.nonnegative, "a demisubmartingale needs a nonnegative g (g(u) >= 0)")
    f = cfg.fields()
    r = stats.rank_order_batch(f, j)
    end = corner(f)
    rows = [paired_row("integral", {"int": integral_u_dg(g, r), "s_g": end * g(r)}, lambda m: m["int"],
                       lambda m: m["s_g"], cfg.z, {"j": j, "g": g.to_json()})]
    for e in eps:
        ind = (r >= e).astype(float)
        row = _indicator_row(f"indicator eps={e:g}", e, ind, end, cfg.z, {"j": j, "eps": e})
        # the indicator form is the integral form with g = 1(u >= eps)
        step = MonotoneSpec("step", eps=e)
        via_step = paired_row("step", {"int": integral_u_dg(step, r), "s_g": end * step(r)}, lambda m: m["int"],
                              lambda m: m["s_g"], cfg.z)
        row.extra["step_form_gap"] = max(abs(via_step.lhs - row.lhs), abs(via_step.rhs - row.rhs))
        rows.append(row)
    return _report("rank_order", cfg, rows, {"cells": int(np.prod(cfg.generator.box))})


# -- moment corollaries ---------------------------------------------------------

def llog_rhs(b: float, es_log: float, e_excess: float) -> float:
    """``b + b/(b-1) (E S log+ S - E (S-1)+)``."""
    return b + b / (b - 1.0) * (es_log - e_excess)


def check_moment_corollary(cfg: CheckConfig, p: float | None = None) -> InequalityReport:
    cfg = cfg.with_params(p=p)
    p = float(cfg.get("p", 2.0))
    _require(p >= 1, f"p must be >= 1, got {p}")
    _gate(cfg, signs=NONNEGATIVE, what="the moment corollary")
    f = cfg.fields()
    k = cfg.generator.k
    mx, end = stats.box_max_batch(f), corner(f)
    if p > 1:
        mult = corollary_multiplier(p)
        cols = {"max_p": mx ** p, "end_p": end ** p}
        row = paired_row(f"p={p:g}", cols, lambda m: m["max_p"], lambda m: mult * m["end_p"], cfg.z, {"p": p},
                         extra={"cairoli_rhs": cairoli_multiplier(p, k) * float(np.mean(cols["end_p"]))})
        constants = {"multiplier": mult, "cairoli_multiplier": cairoli_multiplier(p, k), "k": k}
    else:
        slog, excess = end * log_plus(end), np.maximum(end - 1.0, 0.0)
        cols = {"max": mx, "slog": slog, "excess": excess}
        row = paired_row("p=1", cols, lambda m: m["max"], lambda m: A + A * m["slog"], cfg.z, {"p": 1.0},
                         extra={"llog_rhs_b_e": llog_rhs(math.e, float(slog.mean()), float(excess.mean()))})
        constants = {"A": A, "k": k}
    return _report("moment_corollary", cfg, [row], constants)


def check_harremoes(cfg: CheckConfig, c: float | None = None) -> InequalityReport:
    cfg = cfg.with_params(c=c)
    gen = cfg.generator
    c = float(cfg.get("c", gen.c))
    _require(0 < c <= 1, f"c must lie in (0, 1], got {c}")
    _gate(cfg, signs=("positive",), kinds=("demimartingale",), what="the Harremoes-type bound")
    _require(math.isclose(gen.c, c, rel_tol=0, abs_tol=1e-15),
             f"generator origin value {gen.c} differs from c = {c}")
    f = cfg.fields()
    mx, end = stats.box_max_batch(f), corner(f)
    const = 1.0 - c * c - math.log(c)
    row = paired_row(f"c={c:g}", {"max": mx, "sls": end * np.log(end)}, lambda m: gamma_fn(m["max"], c),
                     lambda m: const + m["sls"], cfg.z, {"c": c}, extra={"e_max": float(mx.mean())})
    return _report("harremoes", cfg, [row], {"additive": const})


# -- Chow / Hajek-Renyi -----------------------------------------------------------

def _directional_rows(label, cfg, lhs_cols, lhs_fn, dir_cols, scale, params, extra=None) -> Row:
    """lhs vs ``scale * min_s mean(dir_cols[s])``; records every direction."""
    names = sorted(dir_cols)
    cols = dict(lhs_cols)
    cols.update(dir_cols)
    row = paired_row(label, cols, lhs_fn, lambda m: scale * min(m[n] for n in names), cfg.z, params, extra)
    per = {n: scale * float(np.mean(dir_cols[n])) for n in names}
    row.extra["per_direction"] = [per[n] for n in names]
    row.extra["minimising_direction"] = 1 + int(np.argmin([per[n] for n in names]))
    return row


def check_chow(cfg: CheckConfig, eps=None) -> InequalityReport:
    cfg = cfg.with_params(eps=eps)
    eps = _eps_list(cfg)
    g = ConvexSpec.from_json(cfg.get("g", {"kind": "power", "p": 1}))
    try:
        c = WeightArray(cfg.get("weights", {"kind": "const", "value": 1.0})).build(cfg.generator.box)
    except FunctionSpecError as exc:
        raise CheckError(str(exc)) from exc
    _gate(cfg, kinds=("demimartingale",), what="the Chow-type bound")
    f = cfg.fields()
    k = cfg.generator.k
    wmax = stats.weighted_max_batch(f, c, g)
    gf = g(f)
    rows = []
    for e in eps:
        ind = (wmax >= e).astype(float)
        dirs = {f"d{s}": (corner_line(c, s, batch=False) * _line_differences(gf, s)).sum(axis=1) * ind
                for s in range(1, k + 1)}
        rows.append(_directional_rows(f"eps={e:g}", cfg, {"ind": ind}, lambda m, e=e: e * m["ind"], dirs, 1.0,
                                      {"eps": e}, {"tail_frequency": float(ind.mean())}))
    return _report("chow", cfg, rows)


def check_hajek_renyi(cfg: CheckConfig, eps=None) -> InequalityReport:
    cfg = cfg.with_params(eps=eps)
    eps = _eps_list(cfg)
    gen = cfg.generator
    _require(gen.associated_increments(), "the Hajek-Renyi bound needs associated mean-zero increments")
    if gen.to_json().get("model") == "fixed":
        _require(gen.sign() == "zero", "a deterministic field has mean-zero increments only when it is 0")
    try:
        c = WeightArray(cfg.get("weights", {"kind": "const", "value": 1.0})).build(gen.box)
    except FunctionSpecError as exc:
        raise CheckError(str(exc)) from exc
    f = cfg.fields()
    k = gen.k
    cmax = stats.weighted_max_batch(f, c, ConvexSpec("power", p=1.0))
    cols, weights = {}, {}
    for s in range(1, k + 1):
        line = with_boundary(corner_line(f, s))
        prev, x = line[:, :-1], np.diff(line, axis=-1)
        weights[s] = corner_line(c, s, batch=False)
        for i in range(x.shape[1]):
            cols[f"x{s}_{i}"] = x[:, i]
            cols[f"p{s}_{i}"] = prev[:, i]
            cols[f"xp{s}_{i}"] = x[:, i] * prev[:, i]
            cols[f"xx{s}_{i}"] = x[:, i] ** 2

    def direction_sum(m, s, power):
        total = 0.0
        for i, w in enumerate(weights[s]):
            cov = m[f"xp{s}_{i}"] - m[f"x{s}_{i}"] * m[f"p{s}_{i}"]
            total += w ** power * (2.0 * cov + m[f"xx{s}_{i}"])
        return total

    rows = []
    for e in eps:
        ind = (cmax >= e).astype(float)
        both = dict(cols, ind=ind)
        for variant, power in (("c", 1), ("c2", 2)):
            def rhs(m, power=power, e=e):
                return min(direction_sum(m, s, power) for s in range(1, k + 1)) / (e * e)

            row = paired_row(f"{variant} eps={e:g}", both, lambda m: m["ind"], rhs, cfg.z,
                             {"eps": e, "variant": variant})
            means = {n: float(np.mean(v)) for n, v in both.items()}
            per = [direction_sum(means, s, power) / (e * e) for s in range(1, k + 1)]
            row.extra.update(per_direction=per, minimising_direction=1 + int(np.argmin(per)))
            rows.append(row)
    return _report("hajek_renyi", cfg, rows, notes=("weights enter as c in the statement and as c^2 in its "
                                                     "derivation; both variants are reported",))


# -- Orlicz-function bounds ----------------------------------------------------------

def check_orlicz_prob(cfg: CheckConfig, lam=None, x: float | None = None) -> InequalityReport:
    cfg = cfg.with_params(lam=lam, x=x)
    x = _positive_float(cfg, "x", cfg.get("x", 1.0))
    lams = [float(v) for v in as_list(cfg.get("lam", 0.5))]
    _require(all(0 < v < 1 for v in lams), f"every lambda must lie in (0, 1), got {lams}")
    _gate(cfg, signs=NONNEGATIVE, what="the Orlicz tail bound")
    f = cfg.fields()
    ind = (stats.box_max_batch(f) >= x).astype(float)
    end = corner(f)
    rows = []
    for lam in lams:
        factor = lam / ((1.0 - lam) * x)
        cols = {"ind": ind, "excess": np.maximum(end / lam - x, 0.0)}
        rows.append(paired_row(f"lam={lam:g}", cols, lambda m: m["ind"], lambda m, k=factor: k * m["excess"],
                               cfg.z, {"lam": lam, "x": x}))
    return _report("orlicz_prob", cfg, rows)


ORLICZ_BOUNDS = ("tail_integral", "phi_a", "llog", "q_phi", "moderate", "root_convex", "exponential", "derivative")


def _lam(cfg) -> float:
    lam = float(cfg.get("lam", 0.5))
    _require(0 < lam < 1, f"lambda must lie in (0, 1), got {lam}")
    return lam


def check_orlicz_moment(cfg: CheckConfig, bound_id: str | None = None, **params) -> InequalityReport:
    cfg = cfg.with_params(bound=bound_id, **params)
    bound = cfg.get("bound")
    _require(bound in ORLICZ_BOUNDS, f"unknown bound {bound!r}; expected one of {ORLICZ_BOUNDS}")
    _gate(cfg, signs=NONNEGATIVE, what="the Orlicz moment bounds")
    try:
        return _orlicz_moment(cfg, bound)
    except FunctionSpecError as exc:
        raise CheckError(str(exc)) from exc


def _orlicz_moment(cfg: CheckConfig, bound: str) -> InequalityReport:
    phi = OrliczSpec.from_json(cfg.get("phi", {"kind": "power", "p": 2}))
    constants: dict = {}
    notes: tuple = ()
    f = cfg.fields()
    mx, end = stats.box_max_batch(f), corner(f)
    lhs_col = phi(mx)
    label = bound
    if bound == "tail_integral":
        lam = _lam(cfg)
        a, b = float(cfg.get("a", 0.0)), float(cfg.get("b", 1.0))
        _require(0 <= a <= b, f"need 0 <= a <= b, got a={a}, b={b}")
        _require(b > 0 or phi.integrable_at_zero, "b = 0 needs phi'(x)/x integrable at 0")
        x = end / lam
        inner_b = phi.phi_a_prime(a, b) if b > a else 0.0
        big_b = phi.big_phi_a(a, b) if b > 0 else 0.0
        integrand = np.where(end > lam * b, phi.big_phi_a(a, x) - big_b - inner_b * (x - b), 0.0)
        k = lam / (1.0 - lam)
        fb = float(phi(b))
        rhs_cols, rhs = {"tail": integrand}, (lambda m: fb + k * m["tail"])
        constants = {"phi_b": fb, "big_phi_a_b": big_b, "big_phi_a_prime_b": inner_b}
        notes = ("Phi'(b) is read as the derivative of Phi_a at b",)
    elif bound == "phi_a":
        lam = _lam(cfg)
        a = float(cfg.get("a", 0.0))
        k, fa = lam / (1.0 - lam), float(phi(a))
        rhs_cols, rhs = {"big": phi.big_phi_a(a, end / lam)}, (lambda m: fa + k * m["big"])
        constants = {"phi_a": fa}
    elif bound == "llog":
        b = float(cfg.get("b", math.e))
        _require(b > 1, f"b must be > 1, got {b}")
        lhs_col = mx
        slog, excess = end * log_plus(end), np.maximum(end - 1.0, 0.0)
        rhs_cols = {"slog": slog, "excess": excess}

        def rhs(m):
            return llog_rhs(b, m["slog"], m["excess"])

        constants = {"b": b, "corollary_rhs_p1": A + A * float(slog.mean())}
    elif bound in ("q_phi", "moderate"):
        q = phi.q_phi()
        constants = {"q_phi": q.to_json(), "p_phi": phi.p_phi_inf().to_json()}
        if bound == "q_phi":
            rhs_cols, rhs = {"scaled": phi(q.value * end)}, (lambda m: m["scaled"])
        else:
            pstar = phi.p_phi_star()
            _require(not pstar.infinite, f"{phi} is not moderate (p*_phi is infinite)")
            mult = q.value ** pstar.value
            rhs_cols, rhs = {"phi_end": phi(end)}, (lambda m: mult * m["phi_end"])
            constants.update(p_phi_star=pstar.to_json(), multiplier=mult,
                             intermediate=float(np.mean(phi(q.value * end))))
    elif bound == "root_convex":
        gamma = float(cfg.get("gamma", 2.0))
        _require(phi.root_convex(gamma), f"phi^(1/{gamma}) is not nondecreasing and convex")
        mult = (gamma / (gamma - 1.0)) ** gamma
        rhs_cols, rhs = {"phi_end": phi(end)}, (lambda m: mult * m["phi_end"])
        constants = {"multiplier": mult}
    elif bound == "exponential":
        r = _positive_float(cfg, "r", cfg.get("r", 1.0))
        lhs_col = np.exp(r * mx)
        rhs_cols, rhs = {"exp_end": np.exp(r * end)}, (lambda m: math.e * m["exp_end"])
        constants = {"multiplier": math.e}
    else:
        m_ = int(cfg.get("m", 1))
        _require(m_ >= 1, f"m must be >= 1, got {m_}")
        _require(phi.derivative_is_orlicz(m_), f"the {m_}-th derivative of {phi} is not an Orlicz function")
        mult = ((m_ + 1.0) / m_) ** (m_ + 1)
        rhs_cols, rhs = {"phi_end": phi(end)}, (lambda m: mult * m["phi_end"])
        constants = {"multiplier": mult}
    cols = dict(rhs_cols, lhs=lhs_col)
    row = paired_row(label, cols, lambda m: m["lhs"], rhs, cfg.z, {"bound": bound})
    return _report("orlicz_moment", cfg, [row], constants, notes)


# -- upcrossings ------------------------------------------------------------------

def check_upcross_bound(cfg: CheckConfig, s=None, a: float | None = None, b: float | None = None) -> InequalityReport:
    cfg = cfg.with_params(s=s, a=a, b=b)
    a, b = float(cfg.get("a", 0.0)), float(cfg.get("b", 1.0))
    _require(a < b, f"need a < b, got a={a}, b={b}")
    k = cfg.generator.k
    dirs = [int(v) for v in as_list(cfg.get("s", list(range(1, k + 1))))]
    _require(all(1 <= v <= k for v in dirs), f"directions must lie in 1..{k}, got {dirs}")
    _gate(cfg, what="the upcrossing bound")
    f = cfg.fields()
    end_part = np.maximum(corner(f) - a, 0.0)
    rows = []
    for s_ in dirs:
        cols = {"u": stats.upcross_direction_batch(f, s_, a, b, "corner_line").astype(float),
                "end": end_part, "first": np.maximum(corner_line(f, s_)[:, 0] - a, 0.0)}
        rows.append(paired_row(f"s={s_}", cols, lambda m: m["u"], lambda m: (m["end"] - m["first"]) / (b - a),
                               cfg.z, {"s": s_, "a": a, "b": b}))
    return _report("upcross_bound", cfg, rows)


# -- Whittle-type bounds ------------------------------------------------------------

WHITTLE_VARIANTS = ("monotone", "general", "sup_form")


def _thresholds(cfg) -> ThresholdSeq:
    return ThresholdSeq.from_json(cfg.get("thresholds", {"u": {"kind": "product"}, "psi": {"kind": "power", "q": 1}}))


def whittle_directional(phi_f: np.ndarray, psi_u: np.ndarray, s: int) -> np.ndarray:
    """Per-replicate ``sum_i (phi(S_{n;s;i}) - phi(S_{n;s;i-1})) / psi(u_{n;s;i})``."""
    return (_line_differences(phi_f, s) / corner_line(psi_u, s, batch=False)).sum(axis=1)


def check_whittle(cfg: CheckConfig, variant: str | None = None) -> InequalityReport:
    cfg = cfg.with_params(variant=variant)
    variant = cfg.get("variant", "monotone")
    _require(variant in WHITTLE_VARIANTS, f"unknown variant {variant!r}; expected one of {WHITTLE_VARIANTS}")
    phi = ConvexSpec.from_json(cfg.get("phi", {"kind": "power", "p": 2}))
    if variant == "monotone":
        _require(phi.nondecreasing, f"the monotone variant needs a nondecreasing phi; {phi.kind} is not")
    try:
        psi_u = _thresholds(cfg).psi_of_u(cfg.generator.box)
    except FunctionSpecError as exc:
        raise CheckError(str(exc)) from exc
    _gate(cfg, kinds=("demimartingale",), what="the Whittle-type bound")
    f = cfg.fields()
    k = cfg.generator.k
    phi_f = phi(f)
    ratio = _flat(phi_f / psi_u)
    dirs = {f"d{s}": whittle_directional(phi_f, psi_u, s) for s in range(1, k + 1)}
    names = sorted(dirs)
    rows = []
    if variant == "sup_form":
        sup = ratio.max(axis=1)
        for e in _eps_list(cfg):
            ind = (sup >= e).astype(float)
            rows.append(_directional_rows(f"sup eps={e:g}", cfg, {"ind": ind}, lambda m, e=e: e * m["ind"], dirs,
                                          1.0, {"eps": e}, {"tail_frequency": float(ind.mean())}))
    else:
        inside = (ratio <= 1.0).all(axis=1).astype(float)
        cols = dict(dirs, inside=inside)
        row = paired_row(variant, cols, lambda m: 1.0 - min(m[n] for n in names), lambda m: m["inside"], cfg.z,
                         {"variant": variant})
        per = [float(np.mean(dirs[n])) for n in names]
        row.extra.update(per_direction=per, minimising_direction=1 + int(np.argmin(per)))
        rows.append(row)
    return _report("whittle", cfg, rows, notes=("containment form: lhs is the lower bound 1 - min_s sum_s, "
                                                "rhs the containment probability",) if variant != "sup_form" else ())


# -- negative control ------------------------------------------------------------------

def check_negative_control(cfg: CheckConfig) -> InequalityReport:
    """A deliberately false inequality ``E|S_n| <= 0``; must come out VIOLATION."""
    f = cfg.fields()
    row = paired_row("abs_end", {"abs": np.abs(corner(f))}, lambda m: m["abs"], lambda m: 0.0, cfg.z)
    return _report("negative_control", cfg, [row], notes=("deliberately false inequality",))
