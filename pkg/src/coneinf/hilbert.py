"""L2(P) geometry on the real line by panel Gauss-Legendre quadrature.

Functions are vectorised callables wrapped in :class:`ScalarFunction`;
their jump points must be declared in ``breaks`` so the quadrature can
split panels there.  Undeclared discontinuities are not detected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import normal
from .errors import EvaluationError, SymmetryViolation

DEFAULT_ABS_TOL = 1e-10
TAIL_MASS = 1e-10


@dataclass(frozen=True)
class ScalarFunction:
    """A real function of one real variable.

    ``eval`` must accept and return numpy arrays.  ``breaks`` lists the
    points where the function may jump; ``sup_bound`` is an optional
    bound on ``|eval|``.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    label: str = "f"
    sup_bound: Optional[float] = None
    breaks: tuple = ()
    support_hint: Optional[tuple] = None

    def __call__(self, x):
        return np.asarray(self.eval(np.asarray(x, dtype=float)), dtype=float)

    def scaled(self, factor: float, label: Optional[str] = None) -> "ScalarFunction":
        f = self.eval
        bound = None if self.sup_bound is None else abs(factor) * self.sup_bound
        return ScalarFunction(lambda x: factor * f(x), label or f"{factor:g}*{self.label}",
                              bound, self.breaks, self.support_hint)


def combine(coeffs: Sequence[float], funcs: Sequence[ScalarFunction],
            label: str = "combination") -> ScalarFunction:
    """The linear combination ``sum(c_i f_i)``."""
    coeffs = [float(c) for c in coeffs]
    funcs = list(funcs)
    if len(coeffs) != len(funcs):
        raise ValueError("coefficient and function counts differ")
    used = [(c, f) for c, f in zip(coeffs, funcs) if c != 0.0]

    def ev(x):
        out = np.zeros_like(x, dtype=float)
        for c, f in used:
            out = out + c * f.eval(x)
        return out

    bounds = [f.sup_bound for _, f in used]
    sup = None if any(b is None for b in bounds) else sum(abs(c) * b for (c, _), b in zip(used, bounds))
    breaks = tuple(sorted({b for _, f in used for b in f.breaks}))
    return ScalarFunction(ev, label, sup, breaks)


def constant(value: float, label: Optional[str] = None) -> ScalarFunction:
    return ScalarFunction(lambda x: np.full_like(x, value, dtype=float),
                          label or f"const({value:g})", abs(value))


def sign_function() -> ScalarFunction:
    return ScalarFunction(np.sign, "sign", 1.0, (0.0,))


def identity_function() -> ScalarFunction:
    return ScalarFunction(lambda x: x, "identity")


def piecewise_constant(breaks: Sequence[float], values: Sequence[float],
                       label: str = "step") -> ScalarFunction:
    """Step function taking ``values[j]`` on the j-th interval cut by ``breaks``.

    Intervals are right-closed: ``(b[j-1], b[j]]``.
    """
    b = np.asarray(breaks, dtype=float)
    v = np.asarray(values, dtype=float)
    if v.size != b.size + 1:
        raise ValueError("need exactly one more value than breakpoints")
    if b.size and np.any(np.diff(b) <= 0):
        raise ValueError("breakpoints must be strictly increasing")

    def ev(x):
        return v[np.searchsorted(b, x, side="left")]

    return ScalarFunction(ev, label, float(np.max(np.abs(v))), tuple(b.tolist()))


def piecewise_linear(xs: Sequence[float], ys: Sequence[float],
                     label: str = "table") -> ScalarFunction:
    """Linear interpolation through ``(xs, ys)``, constant beyond the ends."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size < 2 or xs.size != ys.size or np.any(np.diff(xs) <= 0):
        raise ValueError("table needs >= 2 strictly increasing abscissae")
    return ScalarFunction(lambda x: np.interp(x, xs, ys), label,
                          float(np.max(np.abs(ys))), tuple(xs.tolist()))


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    abs_tol: float = DEFAULT_ABS_TOL

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def gauss_legendre_panels(cuts: Sequence[float], order: int = 20,
                          max_width: float = 0.5) -> tuple:
    """Nodes and weights for composite Gauss-Legendre over sorted ``cuts``.

    Each interval between consecutive cuts is split into equal panels no
    wider than ``max_width``.
    """
    x0, w0 = np.polynomial.legendre.leggauss(order)
    nodes, weights = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi <= lo:
            continue
        m = max(1, int(np.ceil((hi - lo) / max_width)))
        edges = np.linspace(lo, hi, m + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            nodes.append(0.5 * (a + b) + half * x0)
            weights.append(half * w0)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class BaseMeasure:
    """A probability on the line with a Lebesgue density.

    ``sampler(rng, size)`` draws i.i.d. variates from a numpy Generator.
    ``kinks`` are points where the density is not smooth; ``grading`` adds
    extra panel cuts (used for densities on bounded intervals).
    """

    name: str
    density: Callable
    cdf: Callable
    quantile: Callable
    sampler: Callable
    kinks: tuple = ()
    grading: tuple = ()
    symmetric: bool = False
    order: int = 20
    max_width: float = 0.5
    abs_tol: float = DEFAULT_ABS_TOL
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def support(self) -> tuple:
        return float(self.quantile(TAIL_MASS)), float(self.quantile(1.0 - TAIL_MASS))

    def quadrature(self, breaks: Sequence[float] = (), refine: int = 1) -> QuadratureRule:
        key = (tuple(sorted(set(float(b) for b in breaks))), refine)
        rule = self._cache.get(key)
        if rule is None:
            lo, hi = self.support
            inner = {b for b in (*key[0], *self.kinks, *self.grading) if lo < b < hi}
            cuts = sorted({lo, hi} | inner)
            x, w = gauss_legendre_panels(cuts, self.order * refine, self.max_width)
            rule = QuadratureRule(x, w * self.density(x), self.abs_tol)
            self._cache[key] = rule
        return rule

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.sampler(rng, size)


def standard_normal() -> BaseMeasure:
    return BaseMeasure("normal", normal.pdf, normal.cdf, normal.quantile,
                       lambda rng, size: rng.standard_normal(size), symmetric=True)


def _laplace_cdf(x):
    x = np.asarray(x, dtype=float)
    return np.where(x < 0, 0.5 * np.exp(np.minimum(x, 0.0)), 1.0 - 0.5 * np.exp(-np.maximum(x, 0.0)))


def _laplace_quantile(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(p < 0.5, np.log(2.0 * p), -np.log(2.0 * (1.0 - p)))


def laplace() -> BaseMeasure:
    """Laplace(0, 1)."""
    return BaseMeasure("laplace", lambda x: 0.5 * np.exp(-np.abs(np.asarray(x, dtype=float))),
                       _laplace_cdf, _laplace_quantile,
                       lambda rng, size: rng.laplace(0.0, 1.0, size),
                       kinks=(0.0,), symmetric=True, max_width=1.0)


def uniform(lo: float = 0.0, hi: float = 1.0) -> BaseMeasure:
    """Uniform on (lo, hi); with the defaults this is Lebesgue measure on (0, 1).

    Panels are graded geometrically towards both ends so that scores with
    integrable end singularities are integrated accurately.
    """
    width = hi - lo
    steps = width * np.logspace(-9, -1, 9)
    grading = tuple(np.concatenate([lo + steps, hi - steps]).tolist())

    def density(x):
        x = np.asarray(x, dtype=float)
        return np.where((x > lo) & (x < hi), 1.0 / width, 0.0)

    return BaseMeasure(
        f"uniform({lo:g},{hi:g})", density,
        lambda x: np.clip((np.asarray(x, dtype=float) - lo) / width, 0.0, 1.0),
        lambda p: lo + width * np.asarray(p, dtype=float),
        lambda rng, size: rng.uniform(lo, hi, size),
        grading=grading, symmetric=(lo == -hi), max_width=width / 8,
    )


def named_measure(name: str) -> BaseMeasure:
    table = {"normal": standard_normal, "laplace": laplace}
    if name == "uniform":
        return uniform(-1.0, 1.0)
    if name not in table:
        raise ValueError(f"unknown base measure {name!r}; choose normal, laplace or uniform")
    return table[name]()


def _evaluate(f: ScalarFunction, nodes: np.ndarray) -> np.ndarray:
    vals = f(nodes)
    bad = ~np.isfinite(vals)
    if np.any(bad):
        raise EvaluationError(f"{f.label} is not finite at x={nodes[np.argmax(bad)]!r}")
    return vals


def inner_product(f: ScalarFunction, g: ScalarFunction, P: BaseMeasure, refine: int = 1) -> float:
    """``<f|g>`` in L2(P)."""
    if (g.label, id(g)) < (f.label, id(f)):
        f, g = g, f
    rule = P.quadrature(f.breaks + g.breaks, refine)
    return rule.integrate(_evaluate(f, rule.nodes) * _evaluate(g, rule.nodes))


def norm_sq(f: ScalarFunction, P: BaseMeasure, refine: int = 1) -> float:
    rule = P.quadrature(f.breaks, refine)
    v = _evaluate(f, rule.nodes)
    return rule.integrate(v * v)


def mean(f: ScalarFunction, P: BaseMeasure) -> float:
    rule = P.quadrature(f.breaks)
    return rule.integrate(_evaluate(f, rule.nodes))


def check_tangent(g: ScalarFunction, P: BaseMeasure, tol: float = 1e-8) -> bool:
    """Whether ``g`` has mean zero under ``P`` up to ``tol``."""
    return abs(mean(g, P)) <= tol


def require_symmetric(P: BaseMeasure, tol: float = 1e-9) -> None:
    lo, hi = P.support
    grid = np.linspace(0.0, min(abs(lo), hi), 201)
    gap = np.max(np.abs(P.density(grid) - P.density(-grid)))
    if gap > tol:
        raise SymmetryViolation(f"{P.name} is not symmetric about 0 (density gap {gap:.3g})")
