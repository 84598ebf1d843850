"""Efficient one-sided inference over convex tangent cones.

Projections of influence curves onto cones and spans in L2(P), the
resulting optimal one-sided tests and estimators, and seeded Monte Carlo
checks of their local asymptotic behaviour.
"""

from .catalog import build_example, minimize_norm_ratio, reproduce_table
from .cone import (ConeProjection, GramSystem, SpanProjection, build_gram, gram_from_atoms,
                   min_norm_hull, project_cone, project_span, verify_kkt)
from .confidence import (EstimatorSpec, confidence_limits, hajek_probe, mc_coverage,
                         median_bias_probe, one_step_estimate, positive_part_compare)
from .errors import ConeInfError
from .hilbert import (BaseMeasure, ScalarFunction, combine, inner_product, laplace,
                      named_measure, norm_sq, piecewise_constant, piecewise_linear,
                      standard_normal, uniform)
from .model import LocalModel
from .onesided import (TestSpec, breakdown_curve, mc_power, np_test_discrete, run_test,
                       theoretical_power, tv_uniqueness_bound)
from .paths import PathKind, at_sample_size, make_path

__version__ = "0.1.0"

__all__ = [
    "BaseMeasure", "ConeInfError", "ConeProjection", "EstimatorSpec", "GramSystem",
    "LocalModel", "PathKind", "ScalarFunction", "SpanProjection", "TestSpec",
    "at_sample_size", "breakdown_curve", "build_example", "build_gram", "combine",
    "confidence_limits", "gram_from_atoms", "hajek_probe", "inner_product", "laplace",
    "make_path", "mc_coverage", "mc_power", "median_bias_probe", "min_norm_hull",
    "minimize_norm_ratio", "named_measure", "norm_sq", "np_test_discrete", "one_step_estimate",
    "piecewise_constant", "piecewise_linear", "positive_part_compare", "project_cone",
    "project_span", "reproduce_table", "run_test", "standard_normal", "theoretical_power",
    "tv_uniqueness_bound", "uniform", "verify_kkt",
]
