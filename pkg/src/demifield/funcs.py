"""Closed families of convex / Orlicz / threshold functions and their constants."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .lattice import LatticeBox

QUAD_TOL = 1e-9
PROBE = np.linspace(-10.0, 10.0, 1000)
PROBE_POS = np.linspace(0.0, 10.0, 1000)
CONSTANT_GRID = np.geomspace(1e-6, 1e6, 2001)
INFINITE_CAP = 1e3


class FunctionSpecError(ValueError):
    pass


def log_plus(x):
    """``max(log x, 0)`` with ``log_plus(0) = 0``."""
    arr = np.asarray(x, dtype=float)
    if (arr < 0).any():
        raise FunctionSpecError("log_plus is defined for x >= 0 only")
    with np.errstate(divide="ignore"):
        out = np.where(arr > 1.0, np.log(np.where(arr > 0, arr, 1.0)), 0.0)
    return float(out) if np.ndim(x) == 0 else out


def gamma_fn(x, c: float):
    """``x - ln x - c``; nonnegative for x > 0 whenever 0 < c <= 1."""
    if not 0.0 < c <= 1.0:
        raise FunctionSpecError(f"c must lie in (0, 1], got {c}")
    arr = np.asarray(x, dtype=float)
    if (arr <= 0).any():
        raise FunctionSpecError("gamma_fn needs x > 0")
    out = arr - np.log(arr) - c
    return float(out) if np.ndim(x) == 0 else out


def _second_differences_ok(values: np.ndarray) -> bool:
    scale = max(1.0, float(np.max(np.abs(values))))
    return bool((np.diff(values, 2) >= -1e-12 * scale).all())


# ---------------------------------------------------------------------------
# Convex g on the real line
# ---------------------------------------------------------------------------

CONVEX_KINDS = ("power", "positive_part_power", "identity_on_nonneg", "piecewise_linear")


@dataclass(frozen=True)
class ConvexSpec:
    """Nonnegative convex ``g`` on R with ``g(0) = 0``.

    ``piecewise_linear`` takes sorted ``breakpoints`` b_1 < ... < b_m and
    ``slopes`` s_0 <= ... <= s_m (slope s_j applies right of b_j), anchored
    so that g(0) = 0.
    """

    kind: str
    p: float = 1.0
    breakpoints: tuple[float, ...] = ()
    slopes: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in CONVEX_KINDS:
            raise FunctionSpecError(f"unknown convex kind {self.kind!r}")
        if self.kind in ("power", "positive_part_power") and not self.p >= 1:
            raise FunctionSpecError(f"power kinds need p >= 1, got {self.p}")
        if self.kind == "piecewise_linear":
            b = tuple(float(v) for v in self.breakpoints)
            s = tuple(float(v) for v in self.slopes)
            object.__setattr__(self, "breakpoints", b)
            object.__setattr__(self, "slopes", s)
            if len(s) != len(b) + 1:
                raise FunctionSpecError("piecewise_linear needs len(slopes) == len(breakpoints) + 1")
            if any(x >= y for x, y in zip(b, b[1:])):
                raise FunctionSpecError("breakpoints must be strictly increasing")
            if any(x > y for x, y in zip(s, s[1:])):
                raise FunctionSpecError("slopes must be nondecreasing (convexity)")
            # nonnegativity with g(0)=0: slope just left of 0 <= 0 <= slope just right of 0
            right = s[int(np.searchsorted(b, 0.0, side="right"))]
            left = s[int(np.searchsorted(b, 0.0, side="left"))]
            if left > 0 or right < 0:
                raise FunctionSpecError("piecewise_linear g must be nonnegative with g(0) = 0")
        if not _second_differences_ok(self(PROBE)) or self(0.0) != 0.0 or (self(PROBE) < 0).any():
            raise FunctionSpecError(f"{self} is not a nonnegative convex function with g(0) = 0")

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if self.kind == "power":
            out = np.abs(arr) ** self.p
        elif self.kind == "positive_part_power":
            out = np.maximum(arr, 0.0) ** self.p
        elif self.kind == "identity_on_nonneg":
            out = np.maximum(arr, 0.0)
        else:
            b = np.asarray(self.breakpoints)
            s = np.asarray(self.slopes)
            kinks = np.diff(s)

            def raw(v):
                return s[0] * v + (kinks * np.maximum(np.subtract.outer(v, b), 0.0)).sum(axis=-1)

            out = raw(arr) - raw(np.zeros(()))
        return float(out) if np.ndim(x) == 0 else out

    @property
    def nondecreasing(self) -> bool:
        if self.kind == "power":
            return False
        if self.kind == "piecewise_linear":
            return self.slopes[0] >= 0
        return True

    def to_json(self) -> dict:
        if self.kind in ("power", "positive_part_power"):
            return {"kind": self.kind, "p": self.p}
        if self.kind == "piecewise_linear":
            return {"kind": self.kind, "breakpoints": list(self.breakpoints), "slopes": list(self.slopes)}
        return {"kind": self.kind}

    @classmethod
    def from_json(cls, data: dict) -> "ConvexSpec":
        data = dict(data)
        kind = data.pop("kind")
        if kind in ("power", "positive_part_power"):
            return cls(kind, p=float(data.get("p", 1.0)))
        if kind == "piecewise_linear":
            return cls(kind, breakpoints=tuple(data["breakpoints"]), slopes=tuple(data["slopes"]))
        return cls(kind)


# ---------------------------------------------------------------------------
# Nondecreasing g with g(0) = 0, for rank-order integrals
# ---------------------------------------------------------------------------

MONOTONE_KINDS = ("identity", "positive_part_power", "step", "log1p_plus")


@dataclass(frozen=True)
class MonotoneSpec:
    kind: str
    p: float = 1.0
    eps: float = 1.0

    def __post_init__(self):
        if self.kind not in MONOTONE_KINDS:
            raise FunctionSpecError(f"unknown nondecreasing kind {self.kind!r}")
        if self.kind == "positive_part_power" and not self.p >= 1:
            raise FunctionSpecError("positive_part_power needs p >= 1")
        if self.kind == "step" and not self.eps > 0:
            raise FunctionSpecError("step threshold eps must be > 0")

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if self.kind == "identity":
            out = arr.copy()
        elif self.kind == "positive_part_power":
            out = np.maximum(arr, 0.0) ** self.p
        elif self.kind == "step":
            out = (arr >= self.eps).astype(float)
        else:
            out = np.log1p(np.maximum(arr, 0.0))
        return float(out) if np.ndim(x) == 0 else out

    @property
    def nonnegative(self) -> bool:
        return self.kind != "identity"

    def density(self, u: float) -> float:
        if self.kind == "identity":
            return 1.0
        if self.kind == "positive_part_power":
            return self.p * u ** (self.p - 1) if u > 0 else 0.0
        if self.kind == "log1p_plus":
            return 1.0 / (1.0 + u) if u > 0 else 0.0
        raise FunctionSpecError("step functions have no density")

    def to_json(self) -> dict:
        if self.kind == "positive_part_power":
            return {"kind": self.kind, "p": self.p}
        if self.kind == "step":
            return {"kind": self.kind, "eps": self.eps}
        return {"kind": self.kind}

    @classmethod
    def from_json(cls, data: dict) -> "MonotoneSpec":
        return cls(data["kind"], p=float(data.get("p", 1.0)), eps=float(data.get("eps", 1.0)))


def _integral_u_dg_quad(g: MonotoneSpec, x: float) -> float:
    if x == 0:
        return 0.0
    lo, hi, sign = (0.0, x, 1.0) if x > 0 else (x, 0.0, -1.0)
    val, _ = integrate.quad(lambda u: u * g.density(u), lo, hi, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return sign * val


def integral_u_dg(g: MonotoneSpec, x, method: str = "auto"):
    """Oriented Stieltjes integral ``int_0^x u dg(u)``.

    For x < 0 this is ``-int_x^0 u dg(u)``, which is nonnegative.
    """
    if method not in ("auto", "quad"):
        raise FunctionSpecError(f"unknown method {method!r}")
    arr = np.asarray(x, dtype=float)
    if method == "quad" or g.kind == "log1p_plus":
        if g.kind == "step":
            raise FunctionSpecError("quadrature route needs a density; step functions are atoms")
        out = np.vectorize(lambda v: _integral_u_dg_quad(g, float(v)), otypes=[float])(arr)
    elif g.kind == "identity":
        out = 0.5 * arr * arr
    elif g.kind == "positive_part_power":
        pos = np.maximum(arr, 0.0)
        out = g.p / (g.p + 1.0) * pos ** (g.p + 1.0)
    elif g.kind == "step":
        out = np.where(arr >= g.eps, g.eps, 0.0)
    else:
        raise FunctionSpecError(f"unsupported kind {g.kind!r}")
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# Orlicz functions
# ---------------------------------------------------------------------------

ORLICZ_KINDS = ("power", "xlog1p", "exp_minus_one")


@dataclass(frozen=True)
class Constant:
    """A characteristic constant with provenance flags."""

    value: float
    grid_estimated: bool = False
    at_grid_boundary: bool = False

    @property
    def infinite(self) -> bool:
        return math.isinf(self.value)

    def to_json(self) -> dict:
        return {"value": None if self.infinite else self.value, "infinite": self.infinite,
                "grid_estimated": self.grid_estimated, "at_grid_boundary": self.at_grid_boundary}


@dataclass(frozen=True)
class OrliczSpec:
    """``power``: x**p (p >= 1); ``xlog1p``: x*log(1+x); ``exp_minus_one``: exp(r x) - 1."""

    kind: str
    p: float = 2.0
    r: float = 1.0

    def __post_init__(self):
        if self.kind not in ORLICZ_KINDS:
            raise FunctionSpecError(f"unknown Orlicz kind {self.kind!r}")
        if self.kind == "power" and not self.p >= 1:
            raise FunctionSpecError("power Orlicz functions need p >= 1")
        if self.kind == "exp_minus_one" and not self.r > 0:
            raise FunctionSpecError("exp_minus_one needs r > 0")
        v = self(PROBE_POS)
        if v[0] != 0.0 or (np.diff(v) < 0).any() or not _second_differences_ok(v) or not self(1e6) > 1e3:
            raise FunctionSpecError(f"{self} failed the Orlicz probe (phi(0)=0, monotone, convex, unbounded)")

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        if self.kind == "power":
            out = np.maximum(arr, 0.0) ** self.p
        elif self.kind == "xlog1p":
            out = arr * np.log1p(arr)
        else:
            with np.errstate(over="ignore"):
                out = np.expm1(self.r * arr)
        return float(out) if np.ndim(x) == 0 else out

    def derivative(self, x):
        arr = np.asarray(x, dtype=float)
        if self.kind == "power":
            out = self.p * np.maximum(arr, 0.0) ** (self.p - 1.0)
        elif self.kind == "xlog1p":
            out = np.log1p(arr) + arr / (1.0 + arr)
        else:
            with np.errstate(over="ignore"):
                out = self.r * np.exp(self.r * arr)
        return float(out) if np.ndim(x) == 0 else out

    @property
    def integrable_at_zero(self) -> bool:
        """Whether ``phi'(r)/r`` is integrable near 0."""
        if self.kind == "power":
            return self.p > 1
        return self.kind == "xlog1p"

    def _check_a(self, a: float):
        if a < 0:
            raise FunctionSpecError("a must be >= 0")
        if a == 0 and not self.integrable_at_zero:
            raise FunctionSpecError(f"phi'(r)/r is not integrable at 0 for {self}; use a > 0")

    def phi_a_prime(self, a: float, b):
        """Inner integral ``int_a^b phi'(r)/r dr`` (zero for b <= a)."""
        self._check_a(a)
        arr = np.asarray(b, dtype=float)
        out = np.vectorize(lambda v: self._inner(a, v) if v > a else 0.0, otypes=[float])(arr)
        return float(out) if np.ndim(b) == 0 else out

    def _inner(self, a: float, s: float) -> float:
        if self.kind == "power":
            p = self.p
            if p == 1:
                return math.log(s / a)
            return p / (p - 1.0) * (s ** (p - 1.0) - a ** (p - 1.0))
        if self.kind == "exp_minus_one":
            return self.r * (special.expi(self.r * s) - special.expi(self.r * a))
        return float(self._xlog1p_antiderivative(s) - self._xlog1p_antiderivative(a))

    @staticmethod
    def _xlog1p_antiderivative(t):
        # d/dt [-Li2(-t) + log(1+t)] = log(1+t)/t + 1/(1+t);  Li2(-t) = spence(1+t)
        t = np.asarray(t, dtype=float)
        return -special.spence(1.0 + t) + np.log1p(t)

    def big_phi_a(self, a: float, x, method: str = "auto"):
        """``Phi_a(x) = int_a^x int_a^s phi'(r)/r dr ds`` for x > a, and 0 for x <= a.

        Every kind has a closed form (``xlog1p`` through the dilogarithm);
        ``method='quad'`` instead integrates ``int_a^x (x - r) phi'(r)/r dr``
        adaptively to 1e-9.
        """
        self._check_a(a)
        if method not in ("auto", "quad"):
            raise FunctionSpecError(f"unknown method {method!r}")
        arr = np.asarray(x, dtype=float)
        if method == "quad":
            out = np.vectorize(lambda v: self._big_phi_quad(a, float(v)), otypes=[float])(arr)
        else:
            xs = np.maximum(arr, a)
            if self.kind == "xlog1p":
                # Phi_a(x) = x (G(x) - G(a)) - (phi(x) - phi(a)) with G' = phi'(r)/r
                g_a = self._xlog1p_antiderivative(a)
                out = xs * (self._xlog1p_antiderivative(xs) - g_a) - (self(xs) - self(a))
            elif self.kind == "power":
                p = self.p
                if p == 1:
                    with np.errstate(divide="ignore", invalid="ignore"):
                        out = np.where(xs > a, xs * np.log(xs / a) - (xs - a), 0.0)
                else:
                    out = (xs ** p - a ** p) / (p - 1.0) - p * a ** (p - 1.0) * (xs - a) / (p - 1.0)
            else:
                r = self.r
                ei_a = special.expi(r * a)
                with np.errstate(over="ignore"):
                    out = r * xs * (special.expi(r * xs) - ei_a) - (np.exp(r * xs) - math.exp(r * a))
            out = np.where(arr > a, out, 0.0)
        return float(out) if np.ndim(x) == 0 else out

    def _big_phi_quad(self, a: float, x: float) -> float:
        if x <= a:
            return 0.0

        def integrand(t):
            return (x - t) * self.derivative(t) / t

        val, _ = integrate.quad(integrand, a, x, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
        return val

    # -- characteristic constants -------------------------------------------

    def _elasticity(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "exp_minus_one":
            rx = self.r * x
            return rx / -np.expm1(-rx)
        return x * self.derivative(x) / self(x)

    def p_phi_inf(self) -> Constant:
        if self.kind == "power":
            return Constant(self.p)
        e = self._elasticity(CONSTANT_GRID)
        i = int(np.argmin(e))
        return Constant(float(e[i]), True, i in (0, e.size - 1))

    def p_phi_star(self) -> Constant:
        if self.kind == "power":
            return Constant(self.p)
        e = self._elasticity(CONSTANT_GRID)
        i = int(np.argmax(e))
        boundary = i in (0, e.size - 1)
        if boundary and e[i] > INFINITE_CAP:
            return Constant(math.inf, True, True)
        return Constant(float(e[i]), True, boundary)

    def q_phi(self) -> Constant:
        p = self.p_phi_inf()
        if p.at_grid_boundary:
            raise FunctionSpecError(
                f"p_phi for {self} is only bounded by the probe grid edge; cannot certify p_phi > 1")
        if not p.value > 1:
            raise FunctionSpecError(f"q_phi needs p_phi > 1, got {p.value}")
        return Constant(p.value / (p.value - 1.0), p.grid_estimated, False)

    def moderate(self) -> bool:
        return not self.p_phi_star().infinite

    def derivative_is_orlicz(self, m: int) -> bool:
        """Whether phi is m times differentiable with phi^(m) again an Orlicz function."""
        if m < 1:
            raise FunctionSpecError("m must be >= 1")
        if self.kind == "power":
            return self.p - m >= 1
        return False

    def root_convex(self, gamma: float) -> bool:
        """Whether ``phi**(1/gamma)`` is nondecreasing and convex on the probe grid."""
        if not gamma > 1:
            raise FunctionSpecError("gamma must be > 1")
        if self.kind == "power":
            return self.p / gamma >= 1
        v = self(PROBE_POS) ** (1.0 / gamma)
        return bool((np.diff(v) >= 0).all() and _second_differences_ok(v))

    def to_json(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "p": self.p}
        if self.kind == "exp_minus_one":
            return {"kind": "exp_minus_one", "r": self.r}
        return {"kind": "xlog1p"}

    @classmethod
    def from_json(cls, data: dict) -> "OrliczSpec":
        return cls(data["kind"], p=float(data.get("p", 2.0)), r=float(data.get("r", 1.0)))


# ---------------------------------------------------------------------------
# Weight arrays and thresholds
# ---------------------------------------------------------------------------

def _nonincreasing_along_axes(arr: np.ndarray) -> bool:
    return all((np.diff(arr, axis=ax) <= 0).all() for ax in range(arr.ndim))


def _nondecreasing_along_axes(arr: np.ndarray) -> bool:
    return all((np.diff(arr, axis=ax) >= 0).all() for ax in range(arr.ndim))


def _index_grids(box) -> list[np.ndarray]:
    shape = LatticeBox(box).shape
    return np.meshgrid(*[np.arange(1, n + 1, dtype=float) for n in shape], indexing="ij")


@dataclass(frozen=True)
class WeightArray:
    """Positive weights ``c_i`` over a box, nonincreasing in the partial order.

    Spec forms: ``{"kind": "const", "value": v}``, ``{"kind": "inverse_product"}``
    (c_i = 1 / prod i), ``{"kind": "array", "values": [...]}``.
    """

    spec: dict

    def build(self, box) -> np.ndarray:
        kind = self.spec.get("kind")
        shape = LatticeBox(box).shape
        if kind == "const":
            c = np.full(shape, float(self.spec.get("value", 1.0)))
        elif kind == "inverse_product":
            c = 1.0 / np.prod(_index_grids(box), axis=0)
        elif kind == "array":
            c = np.asarray(self.spec["values"], dtype=float)
            if c.shape != shape:
                raise FunctionSpecError(f"weight array shape {c.shape} does not match box {shape}")
        else:
            raise FunctionSpecError(f"unknown weight kind {kind!r}")
        validate_weights(c)
        return c

    def to_json(self) -> dict:
        return dict(self.spec)


def validate_weights(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=float)
    if not (np.isfinite(c).all() and (c > 0).all()):
        raise FunctionSpecError("weights must be finite and positive")
    # adjacent comparisons along each axis imply c_i >= c_j for all i <= j
    if not _nonincreasing_along_axes(c):
        raise FunctionSpecError("weights must be nonincreasing: c_i >= c_j whenever i <= j")
    return c


PSI_KINDS = ("power", "log1p", "saturating", "constant")


@dataclass(frozen=True)
class PsiSpec:
    """Positive nondecreasing ``psi`` on u > 0."""

    kind: str = "power"
    q: float = 1.0
    value: float = 1.0

    def __post_init__(self):
        if self.kind not in PSI_KINDS:
            raise FunctionSpecError(f"unknown psi kind {self.kind!r}")
        if self.kind == "power" and not self.q > 0:
            raise FunctionSpecError("psi power needs q > 0")
        if self.kind == "constant" and not self.value > 0:
            raise FunctionSpecError("constant psi must be positive")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "power":
            out = u ** self.q
        elif self.kind == "log1p":
            out = np.log1p(u)
        elif self.kind == "saturating":
            out = u / (1.0 + u)
        else:
            out = np.full_like(u, self.value)
        return out

    @property
    def unbounded(self) -> bool:
        return self.kind in ("power", "log1p")

    def to_json(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "q": self.q}
        if self.kind == "constant":
            return {"kind": "constant", "value": self.value}
        return {"kind": self.kind}

    @classmethod
    def from_json(cls, data: dict) -> "PsiSpec":
        return cls(data.get("kind", "power"), q=float(data.get("q", 1.0)), value=float(data.get("value", 1.0)))


@dataclass(frozen=True)
class ThresholdSeq:
    """Thresholds ``u`` over a box (``product``, ``sum`` or explicit ``array``) and ``psi``."""

    u: dict
    psi: PsiSpec

    def build(self, box) -> np.ndarray:
        kind = self.u.get("kind", "product")
        grids = _index_grids(box)
        if kind == "product":
            u = np.prod(grids, axis=0)
        elif kind == "sum":
            u = np.sum(grids, axis=0)
        elif kind == "array":
            u = np.asarray(self.u["values"], dtype=float)
            if u.shape != LatticeBox(box).shape:
                raise FunctionSpecError("threshold array shape does not match box")
        else:
            raise FunctionSpecError(f"unknown threshold kind {kind!r}")
        if not ((u > 0).all() and _nondecreasing_along_axes(u)):
            raise FunctionSpecError("thresholds must satisfy 0 < u_i <= u_j for i <= j")
        psi = self.psi(np.sort(u.ravel()))
        if not ((psi > 0).all() and (np.diff(psi) >= 0).all()):
            raise FunctionSpecError("psi must be positive and nondecreasing on the thresholds")
        return u

    def psi_of_u(self, box) -> np.ndarray:
        return self.psi(self.build(box))

    def to_json(self) -> dict:
        return {"u": dict(self.u), "psi": self.psi.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "ThresholdSeq":
        return cls(dict(data.get("u", {"kind": "product"})), PsiSpec.from_json(data.get("psi", {})))


def best_finite_ratio_bound(es_ln_s: float, c: float) -> float:
    """``inf_{x0 > e} x0/(x0-1) * (1 + c (ln x0 - ln c) / E[S ln S])``."""
    if not es_ln_s > 0:
        raise FunctionSpecError("E[S ln S] must be positive")

    def h(log_x0):
        x0 = math.exp(log_x0)
        return x0 / (x0 - 1.0) * (1.0 + c * (log_x0 - math.log(c)) / es_ln_s)

    res = optimize.minimize_scalar(h, bounds=(1.0 + 1e-12, 60.0), method="bounded", options={"xatol": 1e-10})
    return float(min(res.fun, h(1.0 + 1e-12), h(60.0)))
