"""A local model: base measure, influence curve and tangent generators."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .cone import ConeProjection, GramSystem, SpanProjection, build_gram, project_cone, project_span
from .errors import DegenerateModel
from .hilbert import BaseMeasure, ScalarFunction, combine


@dataclass
class LocalModel:
    P: BaseMeasure
    kappa: ScalarFunction
    generators: tuple
    params: dict = field(default_factory=dict)
    cone: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def gram(self) -> GramSystem:
        if "gram" not in self._cache:
            self._cache["gram"] = build_gram(self.kappa, self.generators, self.P)
        return self._cache["gram"]

    def cone_projection(self) -> ConeProjection:
        if "cone" not in self._cache:
            self._cache["cone"] = project_cone(self.gram)
        return self._cache["cone"]

    def span_projection(self) -> SpanProjection:
        if "span" not in self._cache:
            self._cache["span"] = project_span(self.gram)
        return self._cache["span"]

    def influence(self, kind: str = "cone") -> tuple:
        """``(function, norm)`` of the cone or span projection of kappa."""
        if kind == "cone":
            proj = self.cone_projection()
        elif kind == "span":
            proj = self.span_projection()
        else:
            raise ValueError(f"kind must be 'cone' or 'span', got {kind!r}")
        if proj.norm_sq <= 0.0:
            raise DegenerateModel(f"the {kind} projection of kappa is zero")
        f = combine(proj.coeffs, self.generators, label=f"kappa_{kind}")
        return f, math.sqrt(proj.norm_sq)
