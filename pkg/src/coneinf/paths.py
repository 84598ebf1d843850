"""Perturbed measures along a tangent, their density ratios and samplers.

Two constructions are provided for a tangent ``g`` and scale ``s``:

* quadratic: ``dP_s/dP = (s g / 2 + sqrt(1 - s^2 ||g||^2 / 4))^2``
* linear:    ``dP_s/dP = 1 + s g`` (needs ``s * sup|g| <= 1``)

Both integrate to one because tangents have mean zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import CannotSample, InvalidPath
from .hilbert import BaseMeasure, ScalarFunction, inner_product, norm_sq

BATCH_FACTOR = 1.15


class PathKind(str, Enum):
    QUADRATIC = "quadratic"
    LINEAR = "linear"


@dataclass(frozen=True)
class PathSpec:
    tangent: ScalarFunction
    kind: PathKind
    scale: float
    norm_sq_g: float

    def __post_init__(self):
        object.__setattr__(self, "kind", PathKind(self.kind))
        if self.scale < 0:
            raise InvalidPath(f"scale must be nonnegative, got {self.scale}")
        if self.kind is PathKind.QUADRATIC:
            if self.scale ** 2 * self.norm_sq_g > 4.0:
                raise InvalidPath("quadratic path needs s^2 ||g||^2 <= 4")
        else:
            if self.tangent.sup_bound is None:
                raise InvalidPath("linear path needs a bounded tangent (sup_bound)")
            if self.scale * self.tangent.sup_bound > 1.0:
                raise InvalidPath("linear path needs s * sup|g| <= 1")

    @property
    def root(self) -> float:
        return math.sqrt(max(0.0, 1.0 - 0.25 * self.scale ** 2 * self.norm_sq_g))


@dataclass(frozen=True)
class PerturbedMeasure:
    base: BaseMeasure
    spec: PathSpec

    @property
    def ratio_sup(self) -> float:
        s, sup = self.spec.scale, self.spec.tangent.sup_bound
        if s == 0.0:
            return 1.0
        if sup is None:
            return math.inf
        if self.spec.kind is PathKind.QUADRATIC:
            return (0.5 * s * sup + self.spec.root) ** 2
        return 1.0 + s * sup

    def ratio(self, x) -> np.ndarray:
        """Vectorised density ratio ``dP_s/dP``."""
        x = np.asarray(x, dtype=float)
        s = self.spec.scale
        if s == 0.0:
            return np.ones_like(x)
        g = self.spec.tangent(x)
        if self.spec.kind is PathKind.QUADRATIC:
            return (0.5 * s * g + self.spec.root) ** 2
        return 1.0 + s * g

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        """Rejection sampling from the base with envelope ``ratio_sup``."""
        M = self.ratio_sup
        if not math.isfinite(M):
            raise CannotSample(f"tangent {self.spec.tangent.label} has no sup_bound")
        if M == 1.0:
            return self.base.sample(rng, size)
        out = np.empty(size)
        filled = 0
        while filled < size:
            want = size - filled
            m = int(want * M * BATCH_FACTOR) + 16
            x = self.base.sample(rng, m)
            u = rng.random(m)
            acc = x[u * M < self.ratio(x)]
            take = min(acc.size, want)
            out[filled:filled + take] = acc[:take]
            filled += take
        return out


def make_path(base: BaseMeasure, g: ScalarFunction, scale: float,
              kind: PathKind | str = PathKind.QUADRATIC,
              norm_sq_g: float | None = None) -> PerturbedMeasure:
    if norm_sq_g is None:
        norm_sq_g = norm_sq(g, base)
    return PerturbedMeasure(base, PathSpec(g, PathKind(kind), float(scale), norm_sq_g))


def density_ratio(m: PerturbedMeasure, x: float) -> float:
    return float(m.ratio(np.asarray([x]))[0])


def minimal_sample_size(t: float, kind: PathKind | str, norm_sq_g: float,
                        sup_bound: float | None) -> int:
    kind = PathKind(kind)
    if kind is PathKind.QUADRATIC:
        need = t * t * norm_sq_g / 4.0
    else:
        if sup_bound is None:
            raise InvalidPath("linear path needs a bounded tangent (sup_bound)")
        need = (t * sup_bound) ** 2
    return max(1, math.ceil(need - 1e-12))


def at_sample_size(g: ScalarFunction, t: float, n: int, kind: PathKind | str,
                   base: BaseMeasure, norm_sq_g: float | None = None) -> PerturbedMeasure:
    """The local alternative at scale ``t / sqrt(n)``."""
    if not t > 0:
        raise InvalidPath(f"t must be positive, got {t}")
    if n < 1:
        raise InvalidPath(f"n must be a positive integer, got {n}")
    kind = PathKind(kind)
    if norm_sq_g is None:
        norm_sq_g = norm_sq(g, base)
    n_min = minimal_sample_size(t, kind, norm_sq_g, g.sup_bound)
    if n < n_min:
        raise InvalidPath(f"t={t} is too large for n={n}; need n >= {n_min}", minimal_n=n_min)
    return PerturbedMeasure(base, PathSpec(g, kind, t / math.sqrt(n), norm_sq_g))


def functional_shift(kappa: ScalarFunction, g: ScalarFunction, t: float, n: int,
                     P: BaseMeasure) -> float:
    """First-order ``sqrt(n) (T(P_{n,t,g}) - T(P))``, i.e. ``t <kappa|g>``."""
    return t * inner_product(kappa, g, P)


def loglik_stat(m: PerturbedMeasure, data) -> float:
    r = m.ratio(np.asarray(data, dtype=float))
    if np.any(r <= 0):
        return -math.inf
    return float(np.sum(np.log(r)))
