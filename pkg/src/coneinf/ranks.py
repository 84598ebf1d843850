"""Signed linear rank statistics and the invariant tangents of the symmetry model.

For a symmetric continuous ``P`` a function ``q`` on (0, 1) is carried to
the tangent ``x -> sign(x) q(2 P(|x|) - 1)``; inner products are preserved,
so projections can be done in L2(0, 1) and carried back.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from . import normal
from .hilbert import (BaseMeasure, ScalarFunction, gauss_legendre_panels, norm_sq,
                      require_symmetric, uniform)
from .montecarlo import replicate
from .onesided import PowerReport, TestSpec, run_test

_LEBESGUE = uniform(0.0, 1.0)


def lebesgue_unit() -> BaseMeasure:
    """Lebesgue measure on (0, 1) as a :class:`BaseMeasure`."""
    return _LEBESGUE


@dataclass(frozen=True)
class ScoreFunction:
    eval: Callable[[np.ndarray], np.ndarray]
    norm_sq_0: float
    label: str = "score"
    unbounded: bool = False
    breaks: tuple = ()
    sup_bound: float | None = None
    complement: Callable[[np.ndarray], np.ndarray] | None = None

    def __call__(self, s):
        return np.asarray(self.eval(np.asarray(s, dtype=float)), dtype=float)

    def at_complement(self, v):
        """``rho(1 - v)``, evaluated without forming ``1 - v`` when possible."""
        v = np.asarray(v, dtype=float)
        if self.complement is not None:
            return np.asarray(self.complement(v), dtype=float)
        return self(1.0 - v)

    def as_function(self) -> ScalarFunction:
        """The score as an element of L2(0, 1)."""
        return ScalarFunction(self.eval, self.label, self.sup_bound, self.breaks)


def score_function(fn: Callable, label: str = "score", unbounded: bool = False,
                   breaks: tuple = (), sup_bound: float | None = None,
                   complement: Callable | None = None) -> ScoreFunction:
    """Wrap ``fn`` on (0, 1) and compute its squared norm.

    ``complement(v)``, if given, must equal ``fn(1 - v)``; it lets scores
    that blow up at 1 be evaluated accurately far in the tails.  A score
    whose square integral diverges but stays finite on the quadrature
    nodes is not detected.
    """
    f = ScalarFunction(fn, label, sup_bound, tuple(breaks))
    nsq = norm_sq(f, _LEBESGUE)
    if not math.isfinite(nsq):
        raise ValueError(f"score {label} is not square integrable")
    return ScoreFunction(fn, nsq, label, unbounded, tuple(breaks), sup_bound, complement)


def normal_scores() -> ScoreFunction:
    """``s -> Phi^{-1}((1 + s) / 2)``."""
    return score_function(lambda s: normal.quantile(0.5 * (1.0 + s)), "normal-scores",
                          unbounded=True, complement=lambda v: -normal.quantile(0.5 * v))


def sign_scores() -> ScoreFunction:
    return score_function(lambda s: np.ones_like(s), "sign-scores", sup_bound=1.0)


def wilcoxon_scores() -> ScoreFunction:
    return score_function(lambda s: s, "wilcoxon-scores", sup_bound=1.0)


def step_score(cut: float, height: float = 1.0, label: str = "step-score") -> ScoreFunction:
    """``height * 1{s <= cut}``."""
    return score_function(lambda s: height * (s <= cut), label, breaks=(cut,),
                          sup_bound=abs(height))


class Scheme(str, Enum):
    MIDPOINT = "midpoint"
    CELL_AVERAGE = "cell_average"


@dataclass(frozen=True)
class ScoreArray:
    n: int
    values: np.ndarray
    scheme: Scheme


def _cell_averages(rho: ScoreFunction, n: int, order: int = 10) -> np.ndarray:
    x0, w0 = np.polynomial.legendre.leggauss(order)
    edges = np.arange(n + 1) / n
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 / n
    nodes = mid[:, None] + half * x0[None, :]
    vals = (rho(nodes.ravel()).reshape(n, order) * w0).sum(axis=1) * half * n
    special = set()
    if rho.unbounded:
        special |= {0, n - 1}
    for b in rho.breaks:
        if 0.0 < b < 1.0:
            i = min(int(b * n), n - 1)
            special |= {i, max(i - 1, 0)}
    for i in special:
        lo, hi = edges[i], edges[i + 1]
        cuts = {lo, hi} | {b for b in rho.breaks if lo < b < hi}
        if rho.unbounded and i in (0, n - 1):
            steps = np.logspace(-12, math.log10(0.1 * (hi - lo)), 12)
            cuts |= set((lo + steps).tolist()) if i == 0 else set()
            cuts |= set((hi - steps).tolist()) if i == n - 1 else set()
        x, w = gauss_legendre_panels(sorted(cuts), order=order, max_width=hi - lo)
        vals[i] = n * float(w @ rho(x))
    return vals


def score_array(rho: ScoreFunction, n: int, scheme: Scheme | str = Scheme.CELL_AVERAGE) -> ScoreArray:
    if n < 1:
        raise ValueError("n must be >= 1")
    scheme = Scheme(scheme)
    if scheme is Scheme.MIDPOINT and rho.unbounded:
        warnings.warn(f"{rho.label} is declared unbounded; using cell averages", stacklevel=2)
        scheme = Scheme.CELL_AVERAGE
    if scheme is Scheme.MIDPOINT:
        vals = rho(np.arange(1, n + 1) / (n + 1))
    else:
        vals = _cell_averages(rho, n)
    return ScoreArray(n, np.asarray(vals, dtype=float), scheme)


def step_l2_distance(rho: ScoreFunction, scores: ScoreArray) -> float:
    """L2(0, 1) distance between ``rho`` and the step function ``s -> scores[ceil(n s)]``."""
    n = scores.n
    cuts = np.unique(np.concatenate([np.arange(n + 1) / n, [b for b in rho.breaks if 0 < b < 1]]))
    steps = np.logspace(-10, -1, 10) / n
    if rho.unbounded:
        cuts = np.unique(np.concatenate([cuts, steps, 1.0 - steps]))
    lo, hi = 1e-12, 1.0 - 1e-12
    cuts = np.clip(cuts, lo, hi)
    x, w = gauss_legendre_panels(np.unique(cuts), order=10, max_width=1.0)
    idx = np.minimum((x * n).astype(int), n - 1)
    d = rho(x) - scores.values[idx]
    return math.sqrt(float(w @ (d * d)))


@dataclass(frozen=True)
class RankStatistic:
    value: float
    abs_ranks: np.ndarray
    signs: np.ndarray
    ties: bool = False


def absolute_ranks(data) -> tuple:
    """Ranks (1-based) of ``|x_i|``; ties broken by index.  Returns ``(ranks, tied)``."""
    a = np.abs(np.asarray(data, dtype=float))
    order = np.argsort(a, kind="stable")
    ranks = np.empty(a.size, dtype=int)
    ranks[order] = np.arange(1, a.size + 1)
    tied = bool(np.any(np.diff(a[order]) == 0))
    return ranks, tied


def signed_rank_stat(data, scores: ScoreArray) -> RankStatistic:
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise ValueError("data must be nonempty")
    if x.size != scores.n:
        raise ValueError(f"score array has n={scores.n}, data has {x.size} points")
    ranks, tied = absolute_ranks(x)
    signs = np.sign(x)
    return RankStatistic(float(np.mean(signs * scores.values[ranks - 1])), ranks, signs, tied)


def _abs_prob(P: BaseMeasure, x):
    """``2 P(|x|) - 1`` computed as ``P(|x|) - P(-|x|)``."""
    a = np.abs(x)
    return P.cdf(a) - P.cdf(-a)


def _carry(q: ScoreFunction, P: BaseMeasure, label: str) -> ScalarFunction:
    require_symmetric(P)

    def ev(x):
        x = np.asarray(x, dtype=float)
        s = _abs_prob(P, x)
        far = s > 0.5
        out = q(np.where(far, 0.5, s))
        if np.any(far):
            # 1 - s = 2 P(-|x|) by symmetry, free of cancellation
            out = np.where(far, q.at_complement(2.0 * P.cdf(-np.abs(x))), out)
        return np.sign(x) * out

    pts = [float(P.quantile(0.5 * (1.0 + b))) for b in q.breaks if 0.0 < b < 1.0]
    breaks = tuple(sorted({0.0, *pts, *(-p for p in pts)}))
    return ScalarFunction(ev, label, q.sup_bound, breaks)


def rank_influence_curve(rho: ScoreFunction, P: BaseMeasure) -> ScalarFunction:
    """``x -> sign(x) rho(2 P(|x|) - 1)``."""
    return _carry(rho, P, f"kappa[{rho.label}|{P.name}]")


def invariant_tangent(q: ScoreFunction, P: BaseMeasure) -> ScalarFunction:
    """The tangent ``x -> sign(x) q(2 P(|x|) - 1)`` at symmetric ``P``."""
    return _carry(q, P, f"g[{q.label}|{P.name}]")


def rank_test_threshold(rho_hat: ScoreFunction, alpha: float) -> float:
    return math.sqrt(rho_hat.norm_sq_0) * normal.upper_point(alpha)


def optimal_rank_test(rho_hat: ScoreFunction, alpha: float, data,
                      scores: ScoreArray | None = None) -> bool:
    """True means reject: ``sqrt(n) R_n > ||rho_hat|| u_alpha``."""
    x = np.asarray(data, dtype=float)
    if scores is None:
        scores = score_array(rho_hat, x.size, Scheme.CELL_AVERAGE)
    r = signed_rank_stat(x, scores).value
    return math.sqrt(x.size) * r > rank_test_threshold(rho_hat, alpha)


def _fast_rank_value(x: np.ndarray, values: np.ndarray) -> float:
    order = np.argsort(np.abs(x), kind="stable")
    return float(np.sign(x[order]) @ values) / x.size


def rank_test_size(rho_hat: ScoreFunction, alpha: float, P: BaseMeasure, n: int,
                   replications: int, seed: int, workers: int | None = None) -> PowerReport:
    """MC rejection rate of the rank test under ``P^n``."""
    values = score_array(rho_hat, n).values
    thr = rank_test_threshold(rho_hat, alpha)
    root_n = math.sqrt(n)

    def one(rng):
        return root_n * _fast_rank_value(P.sample(rng, n), values) > thr

    hits = replicate(one, replications, seed, (), workers)
    return PowerReport.from_hits(hits, alpha, n, seed)


def rank_disagreement(rho_hat: ScoreFunction, alpha: float, P: BaseMeasure, n: int,
                      replications: int, seed: int, workers: int | None = None) -> float:
    """Frequency with which the rank test and the influence-curve test disagree."""
    values = score_array(rho_hat, n).values
    thr = rank_test_threshold(rho_hat, alpha)
    spec = TestSpec.build(rank_influence_curve(rho_hat, P), math.sqrt(rho_hat.norm_sq_0), alpha)
    root_n = math.sqrt(n)

    def one(rng):
        x = P.sample(rng, n)
        return (root_n * _fast_rank_value(x, values) > thr) != run_test(spec, x)

    return float(np.mean(replicate(one, replications, seed, (), workers)))


def rank_linearity_check(rho: ScoreFunction, P: BaseMeasure, n: int, replications: int,
                         seed: int, workers: int | None = None) -> float:
    """MC mean of ``(sqrt(n) R_n - sum(kappa_P(x_i)) / sqrt(n))^2``."""
    values = score_array(rho, n).values
    kappa = rank_influence_curve(rho, P)
    root_n = math.sqrt(n)

    def one(rng):
        x = P.sample(rng, n)
        return (root_n * _fast_rank_value(x, values) - np.sum(kappa(x)) / root_n) ** 2

    return float(np.mean(replicate(one, replications, seed, (), workers)))


def rank_statistic_samples(rho: ScoreFunction, P: BaseMeasure, n: int, replications: int,
                           seed: int, workers: int | None = None) -> np.ndarray:
    """Replicates of ``sqrt(n) R_n`` under ``P^n``."""
    values = score_array(rho, n).values
    root_n = math.sqrt(n)
    return replicate(lambda rng: root_n * _fast_rank_value(P.sample(rng, n), values),
                     replications, seed, (), workers)
