import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats
from scipy.integrate import quad

from coneinf.catalog import build_example_2, mu_a
from coneinf.errors import EvaluationError, SymmetryViolation
from coneinf.hilbert import (BaseMeasure, ScalarFunction, check_tangent, combine, constant,
                             gauss_legendre_panels, identity_function, inner_product, laplace,
                             mean, named_measure, norm_sq, piecewise_constant, piecewise_linear,
                             require_symmetric, sign_function, standard_normal, uniform)

PHI0 = 1.0 / math.sqrt(2.0 * math.pi)


def truncated_sign(a, height):
    return ScalarFunction(lambda x: height * np.sign(x) * (np.abs(x) <= a), "trunc", abs(height),
                          (-a, 0.0, a))


class TestInnerProduct:
    def test_sign_sign(self, P):
        assert inner_product(sign_function(), sign_function(), P) == pytest.approx(1.0, abs=1e-9)

    def test_identity_sign(self, P):
        # 2 phi(0) in closed form; the truncated tails carry about 1.3e-9
        v = inner_product(identity_function(), sign_function(), P)
        assert v == pytest.approx(2 * PHI0, abs=5e-9)
        assert round(v, 3) == 0.798

    def test_identity_truncated_sign(self, P):
        mu = mu_a(1.0)
        v = inner_product(identity_function(), truncated_sign(1.0, mu), P)
        expected = 2 * mu * (PHI0 - stats.norm.pdf(1.0))
        assert v == pytest.approx(expected, abs=1e-9)
        assert round(v, 3) == 0.380

    def test_non_finite_value_names_node(self, P):
        f = ScalarFunction(lambda x: np.where(x > 2.0, np.inf, 1.0), "blowup")
        with pytest.raises(EvaluationError, match="blowup.*x="):
            inner_product(f, sign_function(), P)

    def test_deterministic(self, P):
        f, g = identity_function(), truncated_sign(0.7, 1.3)
        assert inner_product(f, g, P) == inner_product(f, g, P)

    def test_laplace_second_moment(self):
        assert norm_sq(identity_function(), laplace()) == pytest.approx(2.0, abs=3e-7)

    def test_uniform_measure(self):
        U = uniform(-1.0, 1.0)
        assert norm_sq(identity_function(), U) == pytest.approx(1 / 3, abs=1e-9)
        assert mean(constant(1.0), U) == pytest.approx(1.0, abs=1e-9)


class TestNormSq:
    @pytest.mark.parametrize("f", [sign_function(), identity_function()])
    def test_unit_norm(self, f, P):
        assert norm_sq(f, P) == pytest.approx(1.0, abs=1e-7)

    def test_g3_unit_norm(self):
        g3 = build_example_2(1.0).generators[1]
        assert norm_sq(g3, standard_normal()) == pytest.approx(1.0, abs=1e-6)

    def test_equals_inner_product(self, P):
        f = truncated_sign(1.5, 0.8)
        assert norm_sq(f, P) == pytest.approx(inner_product(f, f, P), abs=1e-15)

    def test_nonnegative(self, P):
        assert norm_sq(constant(0.0), P) == 0.0


class TestCheckTangent:
    def test_sign(self, P):
        assert check_tangent(sign_function(), P, 1e-8)

    def test_constant(self, P):
        assert not check_tangent(constant(1.0), P, 1e-8)

    def test_g3(self, ex2, P):
        assert check_tangent(ex2.generators[1], P, 1e-8)


class TestQuadrature:
    @pytest.mark.parametrize("measure", [standard_normal(), laplace(), uniform(0, 1),
                                         uniform(-1, 1)])
    def test_rule_invariants(self, measure):
        lo, hi = measure.support
        rule = measure.quadrature((0.3,))
        assert np.all(np.diff(rule.nodes) > 0)
        assert np.all(rule.weights >= 0)
        mass = measure.cdf(hi) - measure.cdf(lo)
        assert rule.weights.sum() == pytest.approx(mass, abs=rule.abs_tol)

    @pytest.mark.parametrize("measure", [standard_normal(), laplace(), uniform(0, 1)])
    def test_cdf_quantile_round_trip(self, measure):
        u = np.linspace(0.001, 0.999, 201)
        np.testing.assert_allclose(measure.cdf(measure.quantile(u)), u, atol=1e-9)

    def test_breaks_make_step_integrals_exact(self, P):
        f = piecewise_constant([-0.4, 1.1], [2.0, -1.0, 3.0])
        exact = (2.0 * stats.norm.cdf(-0.4) - (stats.norm.cdf(1.1) - stats.norm.cdf(-0.4))
                 + 3.0 * stats.norm.sf(1.1))
        assert mean(f, P) == pytest.approx(exact, abs=1e-9)

    def test_panels_cover_interval(self):
        x, w = gauss_legendre_panels([0.0, 0.3, 2.0], order=5, max_width=0.5)
        assert w.sum() == pytest.approx(2.0, abs=1e-14)
        assert np.all((x > 0) & (x < 2))

    @pytest.mark.parametrize("f", [sign_function(), identity_function(), truncated_sign(1.0, 1.21)])
    def test_refinement_stability(self, f, P):
        g = truncated_sign(0.5, 2.0)
        coarse = inner_product(f, g, P)
        fine = inner_product(f, g, P, refine=2)
        assert abs(coarse - fine) < 10 * P.abs_tol

    def test_matches_adaptive_quadrature(self):
        L = laplace()
        f = piecewise_linear([-2, 0, 1], [1.0, -1.0, 2.0])
        ref = sum(quad(lambda x: f(np.array([x]))[0] ** 2 * 0.5 * math.exp(-abs(x)), a, b)[0]
                  for a, b in [(-60, -2), (-2, 0), (0, 1), (1, 60)])
        assert norm_sq(f, L) == pytest.approx(ref, abs=1e-9)


class TestFunctions:
    def test_piecewise_constant_right_closed(self):
        f = piecewise_constant([0.0, 1.0], [-1.0, 0.5, 2.0])
        np.testing.assert_array_equal(f([-1.0, 0.0, 0.5, 1.0, 1.5]), [-1, -1, 0.5, 0.5, 2])
        assert f.sup_bound == 2.0 and f.breaks == (0.0, 1.0)

    @pytest.mark.parametrize("breaks,values", [([0.0], [1.0]), ([1.0, 0.0], [1, 2, 3])])
    def test_piecewise_constant_rejects(self, breaks, values):
        with pytest.raises(ValueError):
            piecewise_constant(breaks, values)

    def test_piecewise_linear_interpolates(self):
        f = piecewise_linear([0.0, 2.0], [0.0, 4.0])
        np.testing.assert_allclose(f([-1.0, 1.0, 3.0]), [0.0, 2.0, 4.0])

    def test_combine(self):
        h = combine([2.0, -1.0], [sign_function(), truncated_sign(1.0, 3.0)])
        np.testing.assert_allclose(h([-2.0, -0.5, 0.5, 2.0]), [-2.0, 1.0, -1.0, 2.0])
        assert h.sup_bound == 5.0
        assert h.breaks == (-1.0, 0.0, 1.0)

    def test_combine_unbounded(self):
        assert combine([1.0], [identity_function()]).sup_bound is None

    def test_combine_length_mismatch(self):
        with pytest.raises(ValueError):
            combine([1.0, 2.0], [sign_function()])

    def test_scaled(self):
        f = sign_function().scaled(-2.0)
        assert f.sup_bound == 2.0
        np.testing.assert_array_equal(f([1.0, -1.0]), [-2.0, 2.0])

    @pytest.mark.parametrize("f", [sign_function(), truncated_sign(1.0, 1.21),
                                   piecewise_constant([0.0], [-3.0, 1.0]),
                                   piecewise_linear([0, 1], [-2.0, 1.0])])
    def test_sup_bound_holds_on_nodes(self, f, P):
        rule = P.quadrature(f.breaks)
        assert np.max(np.abs(f(rule.nodes))) <= f.sup_bound


class TestMeasures:
    def test_named(self):
        assert named_measure("normal").name == "normal"
        assert named_measure("laplace").name == "laplace"
        assert named_measure("uniform").support == pytest.approx((-1.0, 1.0), abs=1e-9)
        with pytest.raises(ValueError):
            named_measure("cauchy")

    @pytest.mark.parametrize("measure", [standard_normal(), laplace(), uniform(-1, 1)])
    def test_density_integrates_to_one(self, measure):
        rule = measure.quadrature()
        assert rule.weights.sum() == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("measure", [standard_normal(), laplace()])
    def test_sampler_matches_cdf(self, measure):
        x = measure.sample(np.random.default_rng(3), 20000)
        assert stats.kstest(x, measure.cdf).pvalue > 0.01

    def test_symmetry_check(self):
        require_symmetric(standard_normal())
        require_symmetric(laplace())
        with pytest.raises(SymmetryViolation):
            require_symmetric(uniform(0.0, 1.0))

    def test_asymmetric_density_detected(self):
        skew = BaseMeasure("exp", lambda x: np.where(np.asarray(x) > 0, np.exp(-np.asarray(x)), 0.0),
                           lambda x: 1 - np.exp(-np.maximum(x, 0)),
                           lambda p: -np.log1p(-np.asarray(p)), None)
        with pytest.raises(SymmetryViolation):
            require_symmetric(skew)


step_values = st.lists(st.floats(-3, 3, allow_nan=False), min_size=2, max_size=6)


def random_step(draw_breaks, values):
    breaks = sorted(set(round(b, 3) for b in draw_breaks))[: len(values) - 1]
    values = values[: len(breaks) + 1]
    return piecewise_constant(breaks, values)


class TestProperties:
    @given(st.lists(st.floats(-3, 3), min_size=1, max_size=5), step_values,
           st.lists(st.floats(-3, 3), min_size=1, max_size=5), step_values)
    @settings(max_examples=60, deadline=None)
    def test_cauchy_schwarz_and_symmetry(self, b1, v1, b2, v2):
        f, g = random_step(b1, v1), random_step(b2, v2)
        P = standard_normal()
        fg = inner_product(f, g, P)
        assert fg == inner_product(g, f, P)
        assert fg * fg <= norm_sq(f, P) * norm_sq(g, P) + 1e-12
