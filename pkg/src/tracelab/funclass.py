"""Scalar function classes and the scalar-level inequalities.

Implements bare completely monotone functions (tag CM0), bare Bernstein
functions (BF0) and their k-fold primitives (BF1, BF2, ..., "BF{k}"),
evaluated pointwise or through their half-line integral representations.
Also hosts the quadrature and gamma machinery backing the power-function
representations, a finite-difference complete-monotonicity checker, and the
scalar gap pair g(a+b)-g(a)-g(b) vs g(2*sqrt(ab))-2*g(sqrt(ab)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .matcore import DomainError

__all__ = [
    "PowerFunction",
    "ExpKernel",
    "Quadratic",
    "DiscreteMeasureCM0",
    "DiscreteMeasureBFk",
    "ScalarFunction",
    "classify_power",
    "bf_order",
    "is_subadditive_class",
    "is_superadditive_class",
    "gap_pair_direction",
    "gap_chain_margins",
    "eval_scalar",
    "scalar_gap_pair",
    "check_geometric_concavity",
    "gamma_fn",
    "power_via_quadrature",
    "integrate_unit_interval",
    "integrate_halfline",
    "integrate_interval",
    "check_cm_by_differences",
    "derivative_estimate",
    "CMReport",
    "function_to_json",
    "function_from_json",
]

# Quadrature knobs (tanh-sinh, half-line split at t=1).
QUAD_REL_TARGET = 1e-8
QUAD_NODE_CAP = 2000

# Finite-difference CM checking.
CM_MAX_ORDER = 5
CM_STEP_FACTOR = 1e-2


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def classify_power(q: float) -> str:
    """Class tag of x -> x^q.

    Negative exponents are bare completely monotone; 0 < q < 1 bare
    Bernstein; k < q < k+1 the k-th primitive class; q in {0, 1, 2} are the
    quadratic equality cases.  Integer exponents >= 3 belong to no class
    here and get "none".
    """
    if q < 0:
        return "CM0"
    if q in (0.0, 1.0, 2.0):
        return "quadratic"
    if 0.0 < q < 1.0:
        return "BF0"
    if q == int(q):
        return "none"
    return f"BF{int(math.floor(q))}"


def bf_order(tag: str) -> int | None:
    """k for tags of the form 'BF{k}', else None."""
    if tag.startswith("BF") and tag[2:].isdigit():
        return int(tag[2:])
    return None


def is_subadditive_class(tag: str) -> bool:
    return tag == "CM0" or tag == "BF0"


def is_superadditive_class(tag: str) -> bool:
    k = bf_order(tag)
    return k is not None and k >= 1


def gap_pair_direction(tag: str) -> str | None:
    """Direction of gap_add vs gap_geo: 'le' (CM0, BF1), 'ge' (BF0, BF2),
    'eq' (quadratic), None when the theorem is silent (BFk with k > 2)."""
    if tag in ("CM0", "BF1"):
        return "le"
    if tag in ("BF0", "BF2"):
        return "ge"
    if tag == "quadratic":
        return "eq"
    return None


def gap_chain_margins(tag: str, gap_add: float, gap_geo: float) -> tuple[float, ...]:
    """Margins that must all be nonnegative for the class's two-sided chain.

    CM0: add <= geo <= 0;  BF0: geo <= add <= 0;
    BF1: 0 <= add <= geo;  BF2: add >= geo >= 0;
    quadratic: add == geo.
    """
    if tag == "CM0":
        return (gap_geo - gap_add, -gap_geo)
    if tag == "BF0":
        return (gap_add - gap_geo, -gap_add)
    if tag == "BF1":
        return (gap_geo - gap_add, gap_add)
    if tag == "BF2":
        return (gap_add - gap_geo, gap_geo)
    if tag == "quadratic":
        return (-abs(gap_add - gap_geo),)
    raise ValueError(f"no summary chain for class {tag!r}")


# ---------------------------------------------------------------------------
# Function variants
# ---------------------------------------------------------------------------


def _bfk_kernel(u, k: int):
    """(-1)^(k+1) * (exp(-u) - sum_{j<=k} (-u)^j / j!) for u >= 0.

    Equals sum_{m>=0} (-1)^m u^(k+1+m)/(k+1+m)!; the small-u branch sums that
    series directly to avoid catastrophic cancellation.
    """
    u = np.asarray(u, dtype=np.float64)
    out = np.empty_like(u)
    small = u < 1.0
    if np.any(small):
        us = u[small]
        term = us ** (k + 1) / math.factorial(k + 1)
        acc = term.copy()
        for m in range(40):
            term = term * (-us) / (k + 2 + m)
            acc += term
        out[small] = acc
    if np.any(~small):
        ub = u[~small]
        poly = np.ones_like(ub)
        term = np.ones_like(ub)
        for j in range(1, k + 1):
            term = term * (-ub) / j
            poly = poly + term
        out[~small] = (-1.0) ** (k + 1) * (np.exp(-ub) - poly)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class PowerFunction:
    """x -> x^q."""

    q: float

    @property
    def class_tag(self) -> str:
        return classify_power(self.q)

    @property
    def domain(self) -> str:
        if self.q < 0:
            return "positive"
        if self.q == int(self.q):
            return "real"
        return "nonneg"

    def __call__(self, x):
        xs = np.asarray(x, dtype=np.float64)
        if self.q < 0 and np.any(xs <= 0.0):
            raise DomainError(f"x^{self.q} requires x > 0")
        if self.domain == "nonneg" and np.any(xs < 0.0):
            raise DomainError(f"x^{self.q} requires x >= 0")
        out = np.power(xs, self.q)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"variant": "power", "q": self.q}


@dataclass(frozen=True)
class ExpKernel:
    """x -> exp(-x*t) (sign=+1) or 1 - exp(-x*t) (sign=-1), t >= 0."""

    t: float
    sign: int = 1

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("kernel rate t must be >= 0")
        if self.sign not in (1, -1):
            raise ValueError("sign selects the kernel and must be +1 or -1")

    @property
    def class_tag(self) -> str:
        if self.t == 0:
            return "quadratic"  # constant 1 or constant 0
        return "CM0" if self.sign == 1 else "BF0"

    domain = "real"

    def __call__(self, x):
        xs = np.asarray(x, dtype=np.float64)
        out = np.exp(-xs * self.t) if self.sign == 1 else -np.expm1(-xs * self.t)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"variant": "exp_kernel", "t": self.t, "sign": self.sign}


@dataclass(frozen=True)
class Quadratic:
    """x -> c0 + c1*x + c2*x^2 (the equality class)."""

    c0: float
    c1: float
    c2: float

    class_tag = "quadratic"
    domain = "real"

    def __call__(self, x):
        xs = np.asarray(x, dtype=np.float64)
        out = self.c0 + xs * (self.c1 + xs * self.c2)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"variant": "quadratic", "c0": self.c0, "c1": self.c1, "c2": self.c2}


def _validated_measure(nodes, weights) -> tuple[tuple[float, ...], tuple[float, ...]]:
    nodes = tuple(float(t) for t in nodes)
    weights = tuple(float(w) for w in weights)
    if len(nodes) != len(weights) or not nodes:
        raise ValueError("nodes and weights must be non-empty and equally long")
    if any(t <= 0 for t in nodes) or any(w <= 0 for w in weights):
        raise ValueError("nodes and weights must be strictly positive")
    return nodes, weights


@dataclass(frozen=True)
class DiscreteMeasureCM0:
    """sum_i w_i exp(-x t_i): a bare completely monotone function."""

    nodes: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        n, w = _validated_measure(self.nodes, self.weights)
        object.__setattr__(self, "nodes", n)
        object.__setattr__(self, "weights", w)

    class_tag = "CM0"
    domain = "real"

    def __call__(self, x):
        xs = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(xs)
        for t, w in zip(self.nodes, self.weights):
            out = out + w * np.exp(-xs * t)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {"variant": "cm0_discrete", "nodes": list(self.nodes), "weights": list(self.weights)}


@dataclass(frozen=True)
class DiscreteMeasureBFk:
    """k-fold primitive of a bare Bernstein function over a discrete measure.

    Evaluates sum_i w_i * (-1)^(k+1) (exp(-x t_i) - sum_{j<=k} (-x t_i)^j/j!) / t_i^k.
    k = 0 gives the bare Bernstein kernel 1 - exp(-x t).
    """

    k: int
    nodes: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        if self.k < 0 or self.k != int(self.k):
            raise ValueError("k must be a nonnegative integer")
        n, w = _validated_measure(self.nodes, self.weights)
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "nodes", n)
        object.__setattr__(self, "weights", w)

    @property
    def class_tag(self) -> str:
        return f"BF{self.k}"

    domain = "real"

    def __call__(self, x):
        xs = np.asarray(x, dtype=np.float64)
        out = np.zeros_like(xs)
        for t, w in zip(self.nodes, self.weights):
            out = out + (w / t**self.k) * _bfk_kernel(xs * t, self.k)
        return out if out.ndim else float(out)

    def to_json(self) -> dict:
        return {
            "variant": "bfk_discrete",
            "k": self.k,
            "nodes": list(self.nodes),
            "weights": list(self.weights),
        }


ScalarFunction = Union[PowerFunction, ExpKernel, Quadratic, DiscreteMeasureCM0, DiscreteMeasureBFk]


def eval_scalar(f: ScalarFunction, x: float) -> float:
    """Pointwise evaluation on [0, inf) (x > 0 for negative powers)."""
    if x < 0:
        raise DomainError(f"function classes live on [0, inf); got x={x}")
    return float(f(x))


def function_to_json(f: ScalarFunction) -> dict:
    return f.to_json()


def function_from_json(obj: dict) -> ScalarFunction:
    variant = obj.get("variant")
    if variant == "power":
        return PowerFunction(float(obj["q"]))
    if variant == "exp_kernel":
        return ExpKernel(float(obj["t"]), int(obj.get("sign", 1)))
    if variant == "quadratic":
        return Quadratic(float(obj["c0"]), float(obj["c1"]), float(obj["c2"]))
    if variant == "cm0_discrete":
        return DiscreteMeasureCM0(tuple(obj["nodes"]), tuple(obj["weights"]))
    if variant == "bfk_discrete":
        return DiscreteMeasureBFk(int(obj["k"]), tuple(obj["nodes"]), tuple(obj["weights"]))
    raise ValueError(f"unknown function variant {variant!r}")


# ---------------------------------------------------------------------------
# Scalar inequalities
# ---------------------------------------------------------------------------


def scalar_gap_pair(g: ScalarFunction, a: float, b: float) -> tuple[float, float]:
    """(g(a+b)-g(a)-g(b), g(2 sqrt(ab)) - 2 g(sqrt(ab))).

    How the two compare is a property of g's class: additive gap <= geometric
    gap for CM0 and BF1, reversed for BF0 and BF2, equal for quadratics.
    """
    if a < 0 or b < 0:
        raise DomainError("a and b must be nonnegative")
    root = math.sqrt(a * b)
    gap_add = float(g(a + b)) - float(g(a)) - float(g(b))
    gap_geo = float(g(2.0 * root)) - 2.0 * float(g(root))
    return gap_add, gap_geo


def check_geometric_concavity(x: float, y: float) -> float:
    """f(sqrt(xy)) - sqrt(f(x) f(y)) for f(x) = 1 - exp(-x); nonnegative."""
    if x <= 0 or y <= 0:
        raise DomainError("geometric concavity check needs x, y > 0")
    f = lambda u: -math.expm1(-u)
    return f(math.sqrt(x * y)) - math.sqrt(f(x) * f(y))


# ---------------------------------------------------------------------------
# Gamma function (Lanczos)
# ---------------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma_fn(x: float) -> float:
    """Gamma(x) for x > 0 by the Lanczos approximation (g=7, 9 terms)."""
    if x <= 0:
        raise DomainError(f"gamma_fn requires x > 0, got {x}")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma_fn(1.0 - x))
    y = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i, c in enumerate(_LANCZOS_COEFFS[1:], start=1):
        acc += c / (y + i)
    t = y + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (y + 0.5) * math.exp(-t) * acc


# ---------------------------------------------------------------------------
# Tanh-sinh quadrature
# ---------------------------------------------------------------------------

_TS_TMAX = 6.5  # |t| beyond this: weights underflow well past double precision


def _ts_level_sum(f: Callable[[float], float], h: float) -> tuple[float, int]:
    """One trapezoidal level of the tanh-sinh rule on (0, 1)."""
    total = 0.0
    evals = 0
    j = 0
    while True:
        t = j * h
        if t > _TS_TMAX:
            break
        u = 0.5 * math.pi * math.sinh(t)
        w = 0.25 * math.pi * math.cosh(t) / math.cosh(u) ** 2
        contrib = 0.0
        # node pair at +-t; y and 1-y computed without cancellation
        for sgn in ((1,) if j == 0 else (1, -1)):
            eu = math.exp(-2.0 * sgn * u) if abs(2.0 * u) < 700 else (
                0.0 if sgn > 0 else math.inf
            )
            y = 1.0 / (1.0 + eu)
            if y <= 0.0 or y >= 1.0:
                continue
            contrib += w * f(y)
            evals += 1
        total += contrib
        if j > 0 and abs(contrib) <= 1e-16 * abs(total):
            break
        j += 1
    return total * h, evals


def integrate_unit_interval(
    f: Callable[[float], float],
    rel_target: float = QUAD_REL_TARGET,
    max_nodes: int = QUAD_NODE_CAP,
) -> float:
    """Integrate f over (0, 1) by adaptive tanh-sinh refinement.

    Handles integrable endpoint singularities.  Refinement stops at the
    relative target or when the node budget is exhausted, whichever first.
    """
    h = 1.0
    value, used = _ts_level_sum(f, h)
    while used < max_nodes:
        h *= 0.5
        new_value, evals = _ts_level_sum(f, h)
        used += evals
        if abs(new_value - value) <= rel_target * max(abs(new_value), 1e-300):
            return new_value
        value = new_value
    return value


def integrate_interval(f, a: float, b: float, **kw) -> float:
    """Integrate f over (a, b) by mapping onto the unit interval."""
    if b == a:
        return 0.0
    span = b - a
    return span * integrate_unit_interval(lambda y: f(a + span * y), **kw)


def integrate_halfline(f, **kw) -> float:
    """Integrate f over (0, inf), split at 1 with s -> 1/s on the tail."""
    head = integrate_unit_interval(f, **kw)
    tail = integrate_unit_interval(lambda s: f(1.0 / s) / (s * s), **kw)
    return head + tail


def power_via_quadrature(q: float, x: float) -> float:
    """x^q through its half-line integral representation.

    q < 0 uses the Laplace-transform form with weight t^(-q-1)/Gamma(-q);
    0 < q < 1 uses the Bernstein form with kernel 1 - exp(-t x).
    """
    if x <= 0:
        raise DomainError(f"representation requires x > 0, got {x}")
    if q < 0:
        head = integrate_unit_interval(lambda t: math.exp(-x * t) * t ** (-q - 1.0))
        tail = integrate_unit_interval(
            lambda s: math.exp(-x / s + (q - 1.0) * math.log(s))
        )
        return (head + tail) / gamma_fn(-q)
    if 0.0 < q < 1.0:
        # head integrand written as x * t^(-q) * (1-exp(-u))/u to avoid
        # overflow of t^(-q-1) at deep tanh-sinh nodes
        def head_f(t: float) -> float:
            u = x * t
            factor = -math.expm1(-u) / u if u > 0 else 1.0
            return x * t ** (-q) * factor

        head = integrate_unit_interval(head_f)
        tail = integrate_unit_interval(
            lambda s: -math.expm1(-x / s) * math.exp((q - 1.0) * math.log(s))
        )
        return q / gamma_fn(1.0 - q) * (head + tail)
    raise DomainError(f"representation holds for q < 0 or 0 < q < 1, got q={q}")


# ---------------------------------------------------------------------------
# Complete monotonicity by finite differences
# ---------------------------------------------------------------------------


def derivative_estimate(f: Callable[[float], float], x: float, order: int, h: float | None = None) -> float:
    """n-th derivative by central differences with one Richardson step."""
    if h is None:
        h = CM_STEP_FACTOR * x

    def central(step: float) -> float:
        acc = 0.0
        for i in range(order + 1):
            offset = (order / 2.0 - i) * step
            acc += (-1.0) ** i * math.comb(order, i) * f(x + offset)
        return acc / step**order

    d1 = central(h)
    d2 = central(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


@dataclass(frozen=True)
class CMOrderReport:
    order: int
    max_violation: float
    scale: float
    worst_x: float
    estimates: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class CMReport:
    orders: tuple[CMOrderReport, ...]
    worst_violation: float
    worst_order: int
    worst_x: float


def check_cm_by_differences(f: Callable[[float], float], grid: Sequence[float], order_max: int) -> CMReport:
    """Estimate derivatives 1..order_max on the grid and report the worst
    violation of the alternating-sign pattern (-1)^n f^(n)(x) >= 0.

    Report-only: never raises on violations.
    """
    if not 1 <= order_max <= CM_MAX_ORDER:
        raise ValueError(f"order_max must be in 1..{CM_MAX_ORDER}")
    xs = [float(x) for x in grid]
    if not xs or any(x <= 0 for x in xs):
        raise DomainError("grid must be non-empty and strictly positive")

    reports = []
    worst = (0.0, 0, xs[0])
    for n in range(1, order_max + 1):
        est = np.array([derivative_estimate(f, x, n) for x in xs])
        signed = ((-1.0) ** n) * est
        violations = np.clip(-signed, 0.0, None)
        idx = int(np.argmax(violations))
        rep = CMOrderReport(
            order=n,
            max_violation=float(violations[idx]),
            scale=float(np.max(np.abs(est))),
            worst_x=xs[idx],
            estimates=est,
        )
        reports.append(rep)
        if rep.max_violation > worst[0]:
            worst = (rep.max_violation, n, rep.worst_x)
    return CMReport(tuple(reports), worst[0], worst[1], worst[2])
