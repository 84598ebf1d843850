"""The two worked models: standard normal P, kappa(x) = x, odd step tangents.

Model 1 uses ``g1 = sign`` and ``g2 = mu * sign * 1{|x| <= a}``; model 2
replaces ``g2`` by ``g3``, equal to ``delta`` on ``(0, a]`` and ``-eta``
beyond ``a`` (extended oddly).  All tangents have unit norm.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import normal
from .hilbert import ScalarFunction, identity_function, norm_sq, sign_function, standard_normal
from .model import LocalModel

PHI0 = float(normal.pdf(0.0))

# printed reference values for a = 1
REFERENCE_TABLE = {
    "mu": 1.210,
    "b1": 0.798,
    "b2": 0.380,
    "gram_cross": 0.826,
    "span_coeff_1": 1.525,
    "span_coeff_2": -0.880,
    "span_norm_sq": 0.882,
    "cone_norm_sq": 0.637,
    "span_to_cone": 1.386,
    "cone_to_span": 0.721,
}
REFERENCE_TOL = 1e-3


class ExampleModel(LocalModel):
    """A :class:`LocalModel` with the named constants of a worked example."""


def _truncated_sign(a: float, height: float) -> ScalarFunction:
    def ev(x):
        return height * np.sign(x) * (np.abs(x) <= a)

    return ScalarFunction(ev, f"g2(a={a:g})", abs(height), (-a, 0.0, a))


def _two_level(a: float, inner: float, outer: float) -> ScalarFunction:
    def ev(x):
        return np.sign(x) * np.where(np.abs(x) <= a, inner, -outer)

    return ScalarFunction(ev, f"g3(a={a:g})", max(inner, outer), (-a, 0.0, a))


def mu_a(a: float) -> float:
    return float((2.0 * normal.cdf(a) - 1.0) ** -0.5)


def sigma_eta_delta(a: float) -> tuple:
    """Constants making ``g3`` unit-norm with the required sign pattern."""
    Pa = float(normal.cdf(a))
    tail = float(normal.sf(a))
    sigma = a * tail / (PHI0 - float(normal.pdf(a)))
    eta = (2.0 * (sigma ** 2 * (Pa - 0.5) + tail)) ** -0.5
    return sigma, eta, sigma * eta


def build_example_1(a: float = 1.0) -> ExampleModel:
    if not a > 0:
        raise ValueError("a must be positive")
    mu = mu_a(a)
    gens = (sign_function(), _truncated_sign(a, mu))
    return ExampleModel(standard_normal(), identity_function(), gens, {"a": a, "mu": mu})


def build_example_2(a: float = 1.0) -> ExampleModel:
    if not a > 0:
        raise ValueError("a must be positive")
    sigma, eta, delta = sigma_eta_delta(a)
    gens = (sign_function(), _two_level(a, delta, eta))
    return ExampleModel(standard_normal(), identity_function(), gens,
                        {"a": a, "sigma": sigma, "eta": eta, "delta": delta})


def build_example(which: int, a: float = 1.0) -> ExampleModel:
    if which == 1:
        return build_example_1(a)
    if which == 2:
        return build_example_2(a)
    raise ValueError(f"unknown example {which}; choose 1 or 2")


def g3_cross_closed_form(a: float) -> tuple:
    """``(<kappa|g3>, <g1|g3>)`` from the closed-form expressions."""
    _, eta, delta = sigma_eta_delta(a)
    pa, Pa = float(normal.pdf(a)), float(normal.cdf(a))
    b3 = 2.0 * (delta * (PHI0 - pa) - eta * pa)
    c13 = 2.0 * (delta * (Pa - 0.5) - eta * float(normal.sf(a)))
    return b3, c13


def norm_ratio(a: float) -> float:
    """``||kappa_cone||^2 / ||kappa_span||^2`` for model 1."""
    m = build_example_1(a)
    return m.cone_projection().norm_sq / m.span_projection().norm_sq


@dataclass(frozen=True)
class TableRow:
    name: str
    reference: float
    computed: float

    @property
    def deviation(self) -> float:
        return abs(self.computed - self.reference)

    @property
    def ok(self) -> bool:
        return self.deviation <= REFERENCE_TOL


def reproduce_table(a: float = 1.0) -> list:
    m = build_example_1(a)
    sys = m.gram
    span = m.span_projection()
    cone = m.cone_projection()
    computed = {
        "mu": m.params["mu"],
        "b1": sys.cross[0],
        "b2": sys.cross[1],
        "gram_cross": sys.gram[0, 1],
        "span_coeff_1": span.coeffs[0],
        "span_coeff_2": span.coeffs[1],
        "span_norm_sq": span.norm_sq,
        "cone_norm_sq": cone.norm_sq,
        "span_to_cone": span.norm_sq / cone.norm_sq,
        "cone_to_span": cone.norm_sq / span.norm_sq,
    }
    return [TableRow(k, REFERENCE_TABLE[k], float(computed[k])) for k in REFERENCE_TABLE]


def minimize_norm_ratio(a_grid: Sequence[float]) -> tuple:
    a_grid = list(a_grid)
    if not a_grid:
        raise ValueError("a_grid is empty")
    ratios = [norm_ratio(a) for a in a_grid]
    i = int(np.argmin(ratios))
    return float(a_grid[i]), float(ratios[i])


def r_function(a: float) -> float:
    return (PHI0 - float(normal.pdf(a))) / (2.0 * float(normal.cdf(a)) - 1.0)


def sign_pattern_check(a: float) -> dict:
    """Numerical check that the span projection of model 1 leaves the cone."""
    from scipy.integrate import quad

    span = build_example_1(a).span_projection()
    lhs = quad(lambda x: x * float(normal.pdf(x)), 0.0, a)[0]
    rhs = a * (float(normal.cdf(a)) - 0.5)
    r = r_function(a)
    return {
        "a": a,
        "span_coeffs": span.coeffs.tolist(),
        "coeff_signs_ok": bool(span.coeffs[0] > 0 > span.coeffs[1]),
        "r": r,
        "r_below_phi0": bool(r < PHI0),
        "integral": lhs,
        "integral_bound": rhs,
        "integral_ok": bool(lhs < rhs),
        "ok": bool(span.coeffs[0] > 0 > span.coeffs[1] and r < PHI0 and lhs < rhs),
    }


def unit_norm_ok(model: ExampleModel, tol: float = 1e-6) -> bool:
    return all(abs(norm_sq(g, model.P) - 1.0) <= tol for g in model.generators)
