"""Optimal one-sided tests over cones and spans, their power, and level breakdown.

The test rejects when ``sum(influence(x_i)) / sqrt(n) > norm * u_alpha``.
With a discrete-valued influence the boundary has positive probability;
the strict inequality is kept regardless.

Also here: the exact Neyman-Pearson test on a finite sample space and the
total-variation bound comparing any near-optimal test with it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import normal
from .errors import ConditionNotMet, DegenerateModel, InvalidProbability, PremiseViolated
from .hilbert import BaseMeasure, ScalarFunction, inner_product, norm_sq
from .model import LocalModel
from .montecarlo import binomial_se, replicate
from .paths import PathKind, PerturbedMeasure, at_sample_size


@dataclass(frozen=True)
class TestSpec:
    influence: ScalarFunction
    norm: float
    level: float
    u_alpha: float

    __test__ = False  # not a pytest class

    @classmethod
    def build(cls, influence: ScalarFunction, norm: float, alpha: float) -> "TestSpec":
        if not norm > 0:
            raise DegenerateModel("test influence curve has zero norm")
        return cls(influence, float(norm), float(alpha), normal.upper_point(alpha))

    @classmethod
    def from_model(cls, model: LocalModel, kind: str = "cone", alpha: float = 0.05) -> "TestSpec":
        f, nrm = model.influence(kind)
        return cls.build(f, nrm, alpha)

    def check(self, P: BaseMeasure, tol: float = 1e-6) -> bool:
        return (abs(float(normal.cdf(-self.u_alpha)) - self.level) <= 1e-9
                and abs(self.norm ** 2 - norm_sq(self.influence, P)) <= tol)


@dataclass(frozen=True)
class PowerReport:
    mc_estimate: float
    mc_se: float
    theory: float
    n: int
    replications: int
    seed: int
    t: float = 0.0

    @classmethod
    def from_hits(cls, hits: np.ndarray, theory: float, n: int, seed: int, t: float = 0.0):
        p = float(np.mean(hits))
        return cls(p, binomial_se(p, hits.size), float(theory), n, int(hits.size), seed, float(t))

    def within(self, slack: float, k: float = 2.0) -> bool:
        return abs(self.mc_estimate - self.theory) <= max(k * self.mc_se, slack)


def test_statistic(spec: TestSpec, data) -> float:
    x = np.asarray(data, dtype=float)
    return float(np.sum(spec.influence(x)) / math.sqrt(x.size))


test_statistic.__test__ = False


def run_test(spec: TestSpec, data) -> bool:
    """True means reject."""
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise ValueError("data must be nonempty")
    return test_statistic(spec, x) > spec.norm * spec.u_alpha


def theoretical_power(spec: TestSpec, g: ScalarFunction | None, t: float, P: BaseMeasure) -> float:
    """Limiting rejection probability along the local path ``(t, g)``."""
    drift = 0.0 if g is None or t == 0 else t * inner_product(spec.influence, g, P) / spec.norm
    return float(normal.cdf(-spec.u_alpha + drift))


def _path_of(m) -> tuple:
    """``(base, tangent, t-per-sqrt(n) scale)`` for a base measure or a path."""
    if isinstance(m, PerturbedMeasure):
        return m.base, m.spec.tangent, m.spec.scale
    return m, None, 0.0


def mc_power(spec: TestSpec, m: BaseMeasure | PerturbedMeasure, n: int, replications: int,
             seed: int, stream: tuple = (), workers: int | None = None) -> PowerReport:
    base, g, s = _path_of(m)
    t = s * math.sqrt(n)
    threshold = spec.norm * spec.u_alpha
    root_n = math.sqrt(n)

    def one(rng):
        x = m.sample(rng, n)
        return np.sum(spec.influence(x)) / root_n > threshold

    hits = replicate(one, replications, seed, stream, workers)
    return PowerReport.from_hits(hits, theoretical_power(spec, g, t, base), n, seed, t)


def sample_size_ratio(cone_norm_sq: float, span_norm_sq: float) -> float:
    """Relative sample size the span-optimal test needs to match the cone test."""
    if not (cone_norm_sq > 0 and span_norm_sq > 0):
        raise DegenerateModel("both squared norms must be positive")
    return span_norm_sq / cone_norm_sq


def breakdown_curve(spec: TestSpec, kappa: ScalarFunction, g0: ScalarFunction,
                    t_grid: Sequence[float], n: int, replications: int, seed: int,
                    P: BaseMeasure, kind: PathKind | str = PathKind.QUADRATIC,
                    workers: int | None = None) -> list:
    """Rejection rates of the cone test along a tangent with ``<kappa|g0> <= 0``."""
    kg = inner_product(kappa, g0, P)
    ig = inner_product(spec.influence, g0, P)
    if not (kg <= 0.0 < ig):
        raise ConditionNotMet(
            f"need <kappa|g0> <= 0 < <influence|g0>, got {kg:.6g} and {ig:.6g}")
    nsq = norm_sq(g0, P)
    out = []
    for j, t in enumerate(t_grid):
        m = at_sample_size(g0, float(t), n, kind, P, nsq)
        out.append(mc_power(spec, m, n, replications, seed, (j,), workers))
    return out


@dataclass(frozen=True)
class NPTest:
    tau: np.ndarray
    critical: float
    randomization: float

    @property
    def np_critical(self) -> float:
        """Alias of ``critical``, distinct from separation and Gram constants."""
        return self.critical


def _check_prob(p, name):
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0 or np.any(p < 0) or not np.all(np.isfinite(p)):
        raise InvalidProbability(f"{name} must be a nonnegative finite vector")
    if abs(p.sum() - 1.0) > 1e-9:
        raise InvalidProbability(f"{name} must sum to 1 (sums to {p.sum():.12g})")
    return p


def np_test_discrete(p, q, alpha: float) -> NPTest:
    """Exact level-alpha Neyman-Pearson test of ``p`` against ``q``.

    Rejects where ``q > c p``, randomises with probability ``randomization``
    where ``q == c p``.
    """
    p = _check_prob(p, "p")
    q = _check_prob(q, "q")
    if p.size != q.size:
        raise InvalidProbability("p and q must share one support")
    if not 0.0 <= alpha <= 1.0:
        raise InvalidProbability(f"alpha must lie in [0, 1], got {alpha}")
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.where(p > 0, q / np.where(p > 0, p, 1.0), np.where(q > 0, np.inf, 0.0))
    for c in np.unique(lr)[::-1]:
        above = float(p[lr > c].sum())
        tie = float(p[lr == c].sum())
        if above + tie >= alpha - 1e-15:
            gamma = 1.0 if tie == 0.0 else min(max((alpha - above) / tie, 0.0), 1.0)
            tau = np.where(lr > c, 1.0, np.where(lr == c, gamma, 0.0))
            return NPTest(tau, float(c), gamma)
    raise AssertionError("unreachable: the smallest ratio carries all mass")


@dataclass(frozen=True)
class TVBound:
    lhs: float
    rhs: float
    holds: bool


def tv_uniqueness_bound(p, q, tau, tau_star, c: float, delta: float,
                        epsilon: float) -> TVBound:
    """Total variation of ``q - c p`` where ``tau`` and ``tau_star`` differ by > epsilon.

    Requires ``tau`` to be within ``delta`` of ``tau_star`` in size (from
    above) and power (from below).
    """
    p, q = np.asarray(p, float), np.asarray(q, float)
    tau, tau_star = np.asarray(tau, float), np.asarray(tau_star, float)
    slack = 1e-12
    if tau @ p > tau_star @ p + delta + slack:
        raise PremiseViolated("size of tau exceeds that of tau_star by more than delta")
    if tau @ q < tau_star @ q - delta - slack:
        raise PremiseViolated("power of tau falls short of tau_star by more than delta")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    far = np.abs(tau - tau_star) > epsilon
    with np.errstate(invalid="ignore"):
        lhs = float(np.sum(np.abs(q - c * p)[far])) if math.isfinite(c) else (
            0.0 if not far.any() else math.inf)
    rhs = (1.0 + c) * delta / epsilon
    return TVBound(lhs, rhs, bool(lhs <= rhs + 1e-12))


def size_power_gap(p, q, tau, tau_star) -> float:
    """Smallest ``delta >= 0`` for which ``tau`` meets the premises."""
    p, q = np.asarray(p, float), np.asarray(q, float)
    tau, tau_star = np.asarray(tau, float), np.asarray(tau_star, float)
    return float(max(tau @ p - tau_star @ p, tau_star @ q - tau @ q, 0.0))


@dataclass(frozen=True)
class LemmaInstance:
    p: np.ndarray
    q: np.ndarray
    tau: np.ndarray
    tau_star: np.ndarray
    c: float
    delta: float
    epsilon: float


def random_lemma_instance(rng: np.random.Generator, max_atoms: int = 10) -> LemmaInstance:
    """A random finite problem with ``tau`` a perturbation of the exact NP test."""
    m = int(rng.integers(2, max_atoms + 1))
    p = rng.dirichlet(np.ones(m))
    q = rng.dirichlet(np.ones(m))
    star = np_test_discrete(p, q, float(rng.uniform(0.02, 0.6)))
    tau = np.clip(star.tau + rng.uniform(-0.6, 0.6, m) * (rng.random(m) < 0.5), 0.0, 1.0)
    delta = size_power_gap(p, q, tau, star.tau)
    return LemmaInstance(p, q, tau, star.tau, star.critical, delta, float(rng.uniform(0.01, 0.9)))


def lemma_tv_check(instances: int, seed: int, max_atoms: int = 10) -> dict:
    """Evaluate the total-variation bound on seeded random instances."""
    violations, worst = 0, 0.0
    for i in range(instances):
        inst = random_lemma_instance(np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,))),
                                     max_atoms)
        b = tv_uniqueness_bound(inst.p, inst.q, inst.tau, inst.tau_star, inst.c, inst.delta,
                                inst.epsilon)
        violations += not b.holds
        if b.rhs > 0:
            worst = max(worst, b.lhs / b.rhs)
    return {"instances": instances, "violations": violations, "max_lhs_over_rhs": worst}
