"""One-step efficient estimators, confidence limits and their local behaviour.

An estimator here is ``S_n = anchor + mean(influence(x_i))``, the
asymptotically linear representative with zero remainder.  Optionally it
is floored at ``anchor - a / sqrt(n)``, which leaves the positive part of
``sqrt(n) (S_n - anchor)`` untouched.

Under the local path ``P_{n,t,g}`` the value of the functional is taken to
first order, ``anchor + t <kappa|g> / sqrt(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import normal
from .hilbert import BaseMeasure, ScalarFunction, inner_product, mean, norm_sq
from .model import LocalModel
from .montecarlo import binomial_se, replicate
from .paths import PathKind, PerturbedMeasure, at_sample_size, functional_shift


@dataclass(frozen=True)
class EstimatorSpec:
    influence: ScalarFunction
    anchor: float
    norm: float
    kind: str = "custom"
    floor: float | None = None

    @classmethod
    def from_model(cls, model: LocalModel, kind: str = "cone", anchor: float = 0.0):
        f, nrm = model.influence(kind)
        return cls(f, anchor, nrm, f"{kind}_efficient")

    @classmethod
    def build(cls, influence: ScalarFunction, P: BaseMeasure, anchor: float = 0.0):
        """A custom estimator; the norm is computed under ``P``."""
        return cls(influence, anchor, math.sqrt(norm_sq(influence, P)), "custom")

    def check(self, P: BaseMeasure, tol: float = 1e-8) -> bool:
        return abs(mean(self.influence, P)) <= tol

    def with_floor(self, a: float) -> "EstimatorSpec":
        """``S_n`` replaced by ``max(S_n, anchor - a / sqrt(n))``."""
        return replace(self, floor=float(a), kind="custom")

    def with_anchor(self, anchor: float) -> "EstimatorSpec":
        return replace(self, anchor=float(anchor))


def _root_n_error(spec: EstimatorSpec, x: np.ndarray) -> float:
    """``sqrt(n) (S_n - anchor)``."""
    n = x.size
    z = float(np.sum(spec.influence(x)) / math.sqrt(n))
    if spec.floor is not None:
        z = max(z, -spec.floor)
    return z


def one_step_estimate(spec: EstimatorSpec, data) -> float:
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise ValueError("data must be nonempty")
    return spec.anchor + _root_n_error(spec, x) / math.sqrt(x.size)


def confidence_limits(spec: EstimatorSpec, data, c: float) -> tuple:
    x = np.asarray(data, dtype=float)
    s = one_step_estimate(spec, x)
    h = c / math.sqrt(x.size)
    return s - h, s + h


def _split(m):
    if isinstance(m, PerturbedMeasure):
        return m.base, m.spec.tangent, m.spec.scale
    return m, None, 0.0


def simulate_errors(spec: EstimatorSpec, m: BaseMeasure | PerturbedMeasure, n: int,
                    replications: int, seed: int, kappa: ScalarFunction | None = None,
                    stream: tuple = (), workers: int | None = None) -> np.ndarray:
    """Replicates of ``sqrt(n) (S_n - T(Q_n))`` with data drawn from ``m``.

    ``T(Q_n)`` is the first-order functional value along the path; under the
    base measure it is the anchor.  ``kappa`` is required for paths.
    """
    base, g, s = _split(m)
    shift = 0.0
    if g is not None:
        if kappa is None:
            raise ValueError("kappa is needed to centre at the perturbed functional")
        shift = functional_shift(kappa, g, s * math.sqrt(n), n, base)
    return replicate(lambda rng: _root_n_error(spec, m.sample(rng, n)),
                     replications, seed, stream, workers) - shift


def limit_shift(spec: EstimatorSpec, kappa: ScalarFunction | None, g: ScalarFunction | None,
                t: float, P: BaseMeasure) -> float:
    """Mean ``t <eta - kappa|g>`` of the limit law along ``(t, g)``."""
    if g is None or t == 0:
        return 0.0
    return t * (inner_product(spec.influence, g, P) - inner_product(kappa, g, P))


@dataclass(frozen=True)
class CoverageReport:
    t: float
    empirical: float
    theory: float
    mc_se: float
    n: int
    replications: int
    seed: int

    def within(self, slack: float, k: float = 2.0) -> bool:
        return abs(self.empirical - self.theory) <= max(k * self.mc_se, slack)


def mc_coverage(spec: EstimatorSpec, m: BaseMeasure | PerturbedMeasure, t: float, n: int,
                replications: int, seed: int, kappa: ScalarFunction | None = None,
                workers: int | None = None) -> CoverageReport:
    """Frequency of ``sqrt(n) (S_n - T(Q_n)) < t``.

    At ``t = c`` under the base measure this is the coverage of the lower
    limit ``S_n - c / sqrt(n)``.
    """
    base, g, s = _split(m)
    z = simulate_errors(spec, m, n, replications, seed, kappa, workers=workers)
    emp = float(np.mean(z < t))
    shift = limit_shift(spec, kappa, g, s * math.sqrt(n), base)
    theory = float(normal.cdf((t - shift) / spec.norm))
    return CoverageReport(t, emp, theory, binomial_se(emp, replications), n, replications, seed)


def interval_coverage(spec: EstimatorSpec, P: BaseMeasure, lower: Sequence[float],
                      upper: Sequence[float], n: int, replications: int, seed: int,
                      workers: int | None = None) -> list:
    """``P{-t' < sqrt(n)(S_n - anchor) < t''}`` over a ``(t', t'')`` grid under ``P``."""
    z = simulate_errors(spec, P, n, replications, seed, workers=workers)
    rows = []
    for t1 in lower:
        for t2 in upper:
            emp = float(np.mean((z > -t1) & (z < t2)))
            theory = float(normal.cdf(t2 / spec.norm) - normal.cdf(-t1 / spec.norm))
            rows.append({"t_lower": float(t1), "t_upper": float(t2), "empirical": emp,
                         "theory": theory, "mc_se": binomial_se(emp, replications)})
    return rows


@dataclass(frozen=True)
class MedianBiasReport:
    t_grid: tuple
    prob_le: tuple
    theory: tuple
    mc_se: tuple
    breakdown_mode: bool
    n: int
    replications: int
    seed: int

    @property
    def theory_decreasing(self) -> bool:
        """Whether the limit column strictly decreases along increasing ``t``."""
        order = np.argsort(self.t_grid)
        th = np.asarray(self.theory)[order]
        return bool(np.all(np.diff(th) < 0))


def median_bias_probe(spec: EstimatorSpec, kappa: ScalarFunction, g: ScalarFunction,
                      t_grid: Sequence[float], n: int, replications: int, seed: int,
                      P: BaseMeasure, kind: PathKind | str = PathKind.QUADRATIC,
                      workers: int | None = None) -> MedianBiasReport:
    """``P{S_n <= T(P_{n,t,g})}`` under ``P_{n,t,g}`` along ``t_grid``.

    In breakdown mode (``0 < <kappa|g> < <eta|g>``) the limit is strictly
    decreasing in ``t``.
    """
    kg = inner_product(kappa, g, P)
    eg = inner_product(spec.influence, g, P)
    breakdown = 0.0 < kg < eg
    probs, theory, ses = [], [], []
    for j, t in enumerate(t_grid):
        m = at_sample_size(g, float(t), n, kind, P)
        z = simulate_errors(spec, m, n, replications, seed, kappa, (j,), workers)
        p = float(np.mean(z <= 0.0))
        probs.append(p)
        ses.append(binomial_se(p, replications))
        theory.append(float(normal.cdf(-float(t) * (eg - kg) / spec.norm)))
    return MedianBiasReport(tuple(float(t) for t in t_grid), tuple(probs), tuple(theory),
                            tuple(ses), breakdown, n, replications, seed)


@dataclass(frozen=True)
class PositivePartReport:
    differences: np.ndarray

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.differences)))

    @property
    def p99(self) -> float:
        return float(np.quantile(np.abs(self.differences), 0.99))


def positive_part_compare(spec_a: EstimatorSpec, spec_b: EstimatorSpec, n: int,
                          replications: int, seed: int, P: BaseMeasure,
                          workers: int | None = None) -> PositivePartReport:
    """Per-replication ``|(sqrt(n)(S_A - T))_+ - (sqrt(n)(S_B - T))_+|`` on shared data."""
    if spec_a.anchor != spec_b.anchor:
        raise ValueError("the two estimators must share an anchor")

    def one(rng):
        x = P.sample(rng, n)
        return abs(max(_root_n_error(spec_a, x), 0.0) - max(_root_n_error(spec_b, x), 0.0))

    return PositivePartReport(replicate(one, replications, seed, (), workers))


@dataclass(frozen=True)
class HajekReport:
    probe_points: tuple
    base_cdf: tuple
    rows: tuple  # dicts: t, tangent, cdf, theory, deviation, mc_se
    replications: int

    @property
    def max_deviation(self) -> float:
        return max((max(r["deviation"]) for r in self.rows), default=0.0)


def hajek_probe(spec: EstimatorSpec, kappa: ScalarFunction, grid: Sequence[tuple], n: int,
                replications: int, seed: int, P: BaseMeasure, probe_points: Sequence[float],
                kind: PathKind | str = PathKind.QUADRATIC,
                workers: int | None = None) -> HajekReport:
    """Empirical cdf of ``sqrt(n)(S_n - T(P_{n,t,g}))`` per ``(t, g)`` against the base case.

    A Hajek-regular estimator shows the same cdf for every ``(t, g)``.
    """
    probes = np.asarray(probe_points, dtype=float)
    grid = list(grid)
    if not grid:
        return HajekReport(tuple(probes.tolist()), (), (), replications)
    z0 = simulate_errors(spec, P, n, replications, seed, stream=(0,), workers=workers)
    base_cdf = np.array([np.mean(z0 <= x) for x in probes])
    rows = []
    for j, (t, g) in enumerate(grid, start=1):
        m = at_sample_size(g, float(t), n, kind, P)
        z = simulate_errors(spec, m, n, replications, seed, kappa, (j,), workers)
        cdf = np.array([np.mean(z <= x) for x in probes])
        shift = limit_shift(spec, kappa, g, float(t), P)
        rows.append({
            "t": float(t),
            "tangent": g.label,
            "cdf": cdf.tolist(),
            "theory": normal.cdf((probes - shift) / spec.norm).tolist(),
            "deviation": np.abs(cdf - base_cdf).tolist(),
            "mc_se": [binomial_se(float(p), replications) for p in cdf],
        })
    return HajekReport(tuple(probes.tolist()), tuple(base_cdf.tolist()), tuple(rows), replications)

