"""Declarative model files.

One ``key = value`` pair per line, ``#`` starts a comment::

    base = normal              # normal | laplace | uniform (on [-1, 1])
    kappa = identity           # identity | sign | table x0:y0 x1:y1 ...
    tangent = 0 | -1 1         # breakpoints | values (one more value than breaks)
    tangent = -1 0 1 | 0 -1 1 0
    normalize = true           # rescale tangents to unit norm
    cone = true                # false: use the linear span

``tangent`` may be repeated; each line adds one generator, a step function
that takes ``values[j]`` on the j-th interval cut by the breakpoints.
"""

from __future__ import annotations

import math
from pathlib import Path

from .hilbert import (ScalarFunction, identity_function, named_measure, norm_sq,
                      piecewise_constant, piecewise_linear, sign_function)
from .model import LocalModel

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    pass


def _bool(value: str, key: str) -> bool:
    v = value.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ConfigError(f"{key}: expected true/false, got {value!r}")


def _floats(text: str, what: str) -> list:
    try:
        return [float(t) for t in text.split()]
    except ValueError as exc:
        raise ConfigError(f"{what}: {exc}") from None


def parse_kappa(value: str) -> ScalarFunction:
    v = value.strip()
    if v == "identity":
        return identity_function()
    if v == "sign":
        return sign_function()
    if v.startswith("table"):
        pairs = v[len("table"):].split()
        try:
            xs, ys = zip(*((float(a), float(b)) for a, b in (p.split(":") for p in pairs)))
        except ValueError:
            raise ConfigError(f"kappa table must be x:y pairs, got {v!r}") from None
        return piecewise_linear(xs, ys, "kappa-table")
    raise ConfigError(f"unknown kappa {v!r}; use identity, sign or 'table x:y ...'")


def parse_tangent(value: str, index: int) -> ScalarFunction:
    if "|" not in value:
        raise ConfigError(f"tangent {index}: expected 'breaks | values'")
    left, right = value.split("|", 1)
    breaks = _floats(left, f"tangent {index} breaks")
    values = _floats(right, f"tangent {index} values")
    try:
        return piecewise_constant(breaks, values, f"tangent{index}")
    except ValueError as exc:
        raise ConfigError(f"tangent {index}: {exc}") from None


def parse_model_text(text: str) -> LocalModel:
    base, kappa, cone, normalize = "normal", "identity", True, False
    tangents = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "base":
            base = value
        elif key == "kappa":
            kappa = value
        elif key == "tangent":
            tangents.append(value)
        elif key == "cone":
            cone = _bool(value, key)
        elif key == "normalize":
            normalize = _bool(value, key)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
    if not tangents:
        raise ConfigError("at least one tangent is required")
    try:
        P = named_measure(base)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    gens = [parse_tangent(v, i) for i, v in enumerate(tangents, start=1)]
    if normalize:
        scaled = []
        for g in gens:
            nsq = norm_sq(g, P)
            if nsq <= 0:
                raise ConfigError(f"{g.label} has zero norm")
            scaled.append(g.scaled(1.0 / math.sqrt(nsq), g.label))
        gens = scaled
    return LocalModel(P, parse_kappa(kappa), tuple(gens), {"base": base}, cone)


def load_model(path: str | Path) -> LocalModel:
    return parse_model_text(Path(path).read_text())
