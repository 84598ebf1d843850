"""Command-line front end.

Every report is a JSON object ``{command, config, results, paper_refs}``
(``--format json``), a CSV of the result rows with a fixed header
(``--format csv``), or an aligned text table (``--format table``).
Floats carry 12 significant digits.  Exit codes: 0 success, 1 reference
mismatch in ``example``, 2 usage error, 3 numerical/model error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import normal
from .catalog import REFERENCE_TABLE, REFERENCE_TOL, build_example, reproduce_table
from .cone import verify_kkt
from .confidence import (EstimatorSpec, hajek_probe, interval_coverage, mc_coverage,
                         median_bias_probe)
from .config import ConfigError, load_model
from .errors import ConeInfError, ConditionNotMet
from .hilbert import inner_product, named_measure
from .model import LocalModel
from .montecarlo import WORKERS_ENV
from .onesided import (TestSpec, breakdown_curve, lemma_tv_check, mc_power,
                       sample_size_ratio)
from .paths import PathKind, at_sample_size
from .ranks import (normal_scores, rank_disagreement, rank_test_size, sign_scores,
                    wilcoxon_scores)

COMMANDS = ("project", "power", "breakdown", "coverage", "medianbias", "hajek", "ranks",
            "example", "lemma-tv")
SCORES = {"normal": normal_scores, "wilcoxon": wilcoxon_scores, "sign": sign_scores}


@dataclass(frozen=True)
class RunConfig:
    command: str
    model: str
    a: float = 1.0
    n: int = 2000
    replications: int = 2000
    seed: int = 0
    alpha: float = 0.05
    c: float = 1.0
    t: float | None = None
    t_grid: tuple = ()
    tangent: int | None = None
    test: str = "both"
    path: str = "quadratic"
    grid: tuple = ()
    probes: tuple = ()
    score: str = "normal"
    n_list: tuple = ()
    bases: tuple = ()
    instances: int = 500
    atoms: int = 10
    format: str = "json"
    output: str | None = None
    workers: int | None = None

    def echo(self) -> dict:
        """The configuration as reported; output location and workers do not affect results."""
        d = asdict(self)
        d.pop("output")
        d.pop("workers")
        return d


# ---------------------------------------------------------------- parsing

def _float_list(text: str) -> tuple:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"expected start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if not step > 0 or stop < start:
            raise argparse.ArgumentTypeError(f"bad grid {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    try:
        return tuple(float(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None


def _int_list(text: str) -> tuple:
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _pair_list(text: str) -> tuple:
    """``t:index,t:index,...`` with 1-based tangent indices."""
    out = []
    for item in text.split(","):
        try:
            t, i = item.split(":")
            out.append((float(t), int(i)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected t:index pairs, got {item!r}") from None
    return tuple(out)


def _str_list(text: str) -> tuple:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coneinf", description="One-sided inference over convex tangent cones.",
        epilog=f"Default Monte Carlo worker count comes from ${WORKERS_ENV}.")
    parser.add_argument("command", choices=COMMANDS)
    model = parser.add_mutually_exclusive_group()
    model.add_argument("--example", type=int, choices=(1, 2), help="worked model (default 1)")
    model.add_argument("--config", help="model file (key = value lines)")
    parser.add_argument("--a", type=float, default=1.0, help="truncation point of the worked models")
    parser.add_argument("--n", type=int, default=2000)
    parser.add_argument("--reps", type=int, default=2000, dest="replications")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--alpha", type=float, default=0.05)
    parser.add_argument("--c", type=float, default=1.0,
                        help="power: drift t<kappa|g>; coverage: lower-limit half width")
    parser.add_argument("--t", type=float, help="path parameter (overrides --c in power)")
    parser.add_argument("--t-grid", type=_float_list, help="start:stop:step or comma list")
    parser.add_argument("--tangent", type=int, help="1-based generator index of the path")
    parser.add_argument("--test", choices=("cone", "span", "both"), default="both")
    parser.add_argument("--path", choices=[k.value for k in PathKind], default="quadratic")
    parser.add_argument("--grid", help="hajek: t:index pairs; coverage: comma list of half widths")
    parser.add_argument("--probes", type=_float_list, help="hajek cdf probe points")
    parser.add_argument("--score", choices=tuple(SCORES), default="normal")
    parser.add_argument("--n-list", type=_int_list, help="ranks: sample sizes")
    parser.add_argument("--bases", type=_str_list, help="ranks: base measures")
    parser.add_argument("--instances", type=int, default=500)
    parser.add_argument("--atoms", type=int, default=10)
    parser.add_argument("--format", choices=("json", "csv", "table"), default="json")
    parser.add_argument("--output", help="write the report here instead of stdout")
    parser.add_argument("--workers", type=int)
    return parser


_DEFAULT_GRIDS = {
    "breakdown": "0.5:10:0.5",
    "medianbias": "1,2,4,6,8",
}


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Parse and validate; usage errors exit with status 2."""
    parser = build_parser()
    ns = parser.parse_args(list(argv))
    if ns.n < 1:
        parser.error("--n must be >= 1")
    if ns.replications < 1:
        parser.error("--reps must be >= 1")
    if not 0.0 < ns.alpha < 1.0:
        parser.error("--alpha must lie in (0, 1)")
    if not ns.a > 0:
        parser.error("--a must be positive")
    if ns.workers is not None and ns.workers < 1:
        parser.error("--workers must be >= 1")
    if ns.instances < 1 or ns.atoms < 2:
        parser.error("--instances must be >= 1 and --atoms >= 2")
    if ns.tangent is not None and ns.tangent < 1:
        parser.error("--tangent is 1-based")
    t_grid = ns.t_grid
    if t_grid is None:
        t_grid = _float_list(_DEFAULT_GRIDS.get(ns.command, "1"))
    if ns.command in _DEFAULT_GRIDS and not t_grid:
        parser.error("--t-grid is empty")
    grid: tuple = ()
    try:
        if ns.command == "hajek":
            grid = _pair_list(ns.grid or "1:1,2:1,2:2,5:2")
        elif ns.command == "coverage":
            grid = _float_list(ns.grid or "0.5,1,2")
    except argparse.ArgumentTypeError as exc:
        parser.error(str(exc))
    bases = ns.bases or ("normal", "laplace")
    for b in bases:
        if b not in ("normal", "laplace", "uniform"):
            parser.error(f"unknown base measure {b!r}")
    model = f"config:{ns.config}" if ns.config else f"example-{ns.example or 1}"
    return RunConfig(
        command=ns.command, model=model, a=ns.a, n=ns.n, replications=ns.replications,
        seed=ns.seed, alpha=ns.alpha, c=ns.c, t=ns.t, t_grid=tuple(t_grid),
        tangent=ns.tangent, test=ns.test, path=ns.path, grid=grid,
        probes=ns.probes or (-1.0, 0.0, 1.0), score=ns.score,
        n_list=ns.n_list or (500, 1000, 2000), bases=tuple(bases), instances=ns.instances,
        atoms=ns.atoms, format=ns.format, output=ns.output, workers=ns.workers)


# ---------------------------------------------------------------- commands

def _load(cfg: RunConfig) -> LocalModel:
    if cfg.model.startswith("config:"):
        return load_model(cfg.model[len("config:"):])
    return build_example(int(cfg.model.rsplit("-", 1)[1]), cfg.a)


def _generator(model: LocalModel, index: int | None, default: int):
    i = default if index is None else index
    if not 1 <= i <= len(model.generators):
        raise ConditionNotMet(f"tangent index {i} out of range 1..{len(model.generators)}")
    return model.generators[i - 1]


def _kinds(cfg: RunConfig) -> tuple:
    return ("cone", "span") if cfg.test == "both" else (cfg.test,)


def _cmd_project(cfg, model):
    sys_ = model.gram
    span = model.span_projection()
    cone = model.cone_projection()
    kkt = verify_kkt(sys_, cone)
    rows = [{"quantity": f"cross_{i + 1}", "value": v} for i, v in enumerate(sys_.cross)]
    rows += [{"quantity": f"gram_{i + 1}{j + 1}", "value": sys_.gram[i, j]}
             for i in range(sys_.k) for j in range(sys_.k)]
    rows += [{"quantity": f"span_coeff_{i + 1}", "value": v} for i, v in enumerate(span.coeffs)]
    rows += [{"quantity": f"cone_coeff_{i + 1}", "value": v} for i, v in enumerate(cone.coeffs)]
    rows += [{"quantity": f"cone_multiplier_{i + 1}", "value": v}
             for i, v in enumerate(cone.multipliers)]
    rows += [
        {"quantity": "kappa_norm_sq", "value": sys_.kappa_norm_sq},
        {"quantity": "span_norm_sq", "value": span.norm_sq},
        {"quantity": "cone_norm_sq", "value": cone.norm_sq},
        {"quantity": "sample_size_ratio", "value": sample_size_ratio(cone.norm_sq, span.norm_sq)},
        {"quantity": "kkt_max_residual", "value": max(kkt.residuals.values())},
    ]
    refs = {"sample_size_ratio": "||kappa_span||^2 / ||kappa_cone||^2"}
    return rows, ("quantity", "value"), refs


def _cmd_power(cfg, model):
    P = model.P
    g = _generator(model, cfg.tangent, 1)
    kg = inner_product(model.kappa, g, P)
    if cfg.t is not None:
        t = cfg.t
    elif kg > 0:
        t = cfg.c / kg
    else:
        raise ConditionNotMet(f"<kappa|g> = {kg:.6g} <= 0; pass --t explicitly")
    m = at_sample_size(g, t, cfg.n, cfg.path, P)
    rows = []
    for kind in _kinds(cfg):
        spec = TestSpec.from_model(model, kind, cfg.alpha)
        for alt, meas, stream in (("null", P, (0,)), ("path", m, (1,))):
            r = mc_power(spec, meas, cfg.n, cfg.replications, cfg.seed, stream, cfg.workers)
            rows.append({"test": kind, "alternative": alt, "t": r.t, "mc": r.mc_estimate,
                         "mc_se": r.mc_se, "theory": r.theory})
    refs = {"theory": "Phi(-u_alpha + t <eta|g> / ||eta||)", "u_alpha": normal.upper_point(cfg.alpha)}
    return rows, ("test", "alternative", "t", "mc", "mc_se", "theory"), refs


def _cmd_breakdown(cfg, model):
    g0 = _generator(model, cfg.tangent, len(model.generators))
    spec = TestSpec.from_model(model, "cone", cfg.alpha)
    reports = breakdown_curve(spec, model.kappa, g0, cfg.t_grid, cfg.n, cfg.replications,
                              cfg.seed, model.P, cfg.path, cfg.workers)
    rows = [{"t": r.t, "mc": r.mc_estimate, "mc_se": r.mc_se, "theory": r.theory}
            for r in reports]
    slope = inner_product(spec.influence, g0, model.P) / spec.norm
    refs = {"theory": "Phi(-u_alpha + slope * t)", "slope": slope}
    return rows, ("t", "mc", "mc_se", "theory"), refs


def _cmd_coverage(cfg, model):
    P = model.P
    rows = []
    cone = EstimatorSpec.from_model(model, "cone")
    r = mc_coverage(cone, P, cfg.c, cfg.n, cfg.replications, cfg.seed, workers=cfg.workers)
    rows.append({"estimator": "cone", "t_lower": None, "t_upper": cfg.c,
                 "empirical": r.empirical, "mc_se": r.mc_se, "theory": r.theory})
    span = EstimatorSpec.from_model(model, "span")
    for row in interval_coverage(span, P, cfg.grid, cfg.grid, cfg.n, cfg.replications,
                                 cfg.seed + 1, cfg.workers):
        rows.append({"estimator": "span", "t_lower": row["t_lower"], "t_upper": row["t_upper"],
                     "empirical": row["empirical"], "mc_se": row["mc_se"],
                     "theory": row["theory"]})
    refs = {"lower": "Phi(c / ||kappa_cone||)",
            "two_sided": "Phi(t2 / ||kappa_span||) - Phi(-t1 / ||kappa_span||)"}
    return rows, ("estimator", "t_lower", "t_upper", "empirical", "mc_se", "theory"), refs


def _cmd_medianbias(cfg, model):
    g = _generator(model, cfg.tangent, len(model.generators))
    rows = []
    for kind in _kinds(cfg):
        spec = EstimatorSpec.from_model(model, kind)
        rep = median_bias_probe(spec, model.kappa, g, cfg.t_grid, cfg.n, cfg.replications,
                                cfg.seed, model.P, cfg.path, cfg.workers)
        for t, p, se, th in zip(rep.t_grid, rep.prob_le, rep.mc_se, rep.theory):
            rows.append({"estimator": kind, "t": t, "prob_le": p, "mc_se": se, "theory": th,
                         "breakdown_mode": rep.breakdown_mode})
    refs = {"theory": "Phi(-t <eta - kappa|g> / ||eta||)"}
    return rows, ("estimator", "t", "prob_le", "mc_se", "theory", "breakdown_mode"), refs


def _cmd_hajek(cfg, model):
    grid = [(t, _generator(model, i, 1)) for t, i in cfg.grid]
    index = [i for _, i in cfg.grid]
    rows = []
    for kind in _kinds(cfg):
        spec = EstimatorSpec.from_model(model, kind)
        rep = hajek_probe(spec, model.kappa, grid, cfg.n, cfg.replications, cfg.seed,
                          model.P, cfg.probes, cfg.path, cfg.workers)
        for i, row in zip(index, rep.rows):
            for j, x in enumerate(rep.probe_points):
                rows.append({"estimator": kind, "t": row["t"], "tangent": i, "probe": x,
                             "cdf": row["cdf"][j], "base_cdf": rep.base_cdf[j],
                             "deviation": row["deviation"][j], "mc_se": row["mc_se"][j],
                             "theory": row["theory"][j]})
    refs = {"theory": "Phi((x - t <eta - kappa|g>) / ||eta||)"}
    return rows, ("estimator", "t", "tangent", "probe", "cdf", "base_cdf", "deviation",
                  "mc_se", "theory"), refs


def _cmd_ranks(cfg, model):
    rho = SCORES[cfg.score]()
    rows = []
    for b in cfg.bases:
        P = named_measure(b)
        for n in cfg.n_list:
            size = rank_test_size(rho, cfg.alpha, P, n, cfg.replications, cfg.seed, cfg.workers)
            dis = rank_disagreement(rho, cfg.alpha, P, n, cfg.replications, cfg.seed, cfg.workers)
            rows.append({"base": b, "n": n, "size": size.mc_estimate, "size_se": size.mc_se,
                         "alpha": cfg.alpha, "disagreement": dis})
    refs = {"size": "alpha for every continuous symmetric base"}
    return rows, ("base", "n", "size", "size_se", "alpha", "disagreement"), refs


def _cmd_example(cfg, model):
    rows = [{"name": r.name, "paper": r.reference, "computed": r.computed,
             "deviation": r.deviation, "ok": r.ok} for r in reproduce_table(cfg.a)]
    refs = {"reference_values": dict(REFERENCE_TABLE), "tolerance": REFERENCE_TOL}
    return rows, ("name", "paper", "computed", "deviation", "ok"), refs


def _cmd_lemma_tv(cfg, model):
    res = lemma_tv_check(cfg.instances, cfg.seed, cfg.atoms)
    refs = {"bound": "sum_{|tau - tau*| > eps} |q - c p| <= (1 + c) delta / eps"}
    return [res], ("instances", "violations", "max_lhs_over_rhs"), refs


_DISPATCH = {
    "project": _cmd_project, "power": _cmd_power, "breakdown": _cmd_breakdown,
    "coverage": _cmd_coverage, "medianbias": _cmd_medianbias, "hajek": _cmd_hajek,
    "ranks": _cmd_ranks, "example": _cmd_example, "lemma-tv": _cmd_lemma_tv,
}
_NEEDS_MODEL = {"project", "power", "breakdown", "coverage", "medianbias", "hajek"}


# ---------------------------------------------------------------- serialization

def _clean(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
        return float(f"{v:.12g}")
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_clean(x) for x in v]
    return v


def _cell(v) -> str:
    v = _clean(v)
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def render(cfg: RunConfig, rows: list, columns: tuple, refs: dict) -> str:
    if cfg.format == "json":
        doc = {"command": cfg.command, "config": _clean(cfg.echo()),
               "results": _clean(rows), "paper_refs": _clean(refs)}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c)) for c in columns])
        return buf.getvalue()
    cells = [list(columns)] + [[_cell(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(row[j]) for row in cells) for j in range(len(columns))]
    lines = ["  ".join(s.rjust(w) for s, w in zip(row, widths)) for row in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def run(cfg: RunConfig) -> tuple:
    """Execute a validated configuration; returns ``(exit_status, report_text)``.

    Model and numerical failures propagate as :class:`ConeInfError`.
    """
    model = _load(cfg) if cfg.command in _NEEDS_MODEL else None
    rows, columns, refs = _DISPATCH[cfg.command](cfg, model)
    status = 0
    if cfg.command == "example" and not all(r["ok"] for r in rows):
        status = 1
    return status, render(cfg, rows, columns, refs)


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        status, text = run(cfg)
    except ConfigError as exc:
        print(f"coneinf: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"coneinf: {exc}", file=sys.stderr)
        return 2
    except ConeInfError as exc:
        print(f"coneinf: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
