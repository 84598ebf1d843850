"""Projection of an influence curve onto a finitely generated span or cone.

Everything reduces to the Gram matrix ``G[i, j] = <g_i|g_j>``, the cross
vector ``b[i] = <kappa|g_i>`` and ``||kappa||^2``.  The cone projection is
nonnegative least squares in Gram form, solved by a Lawson-Hanson active
set method; the multipliers ``beta = G gamma - b`` are the Lagrange
multipliers of the sign constraints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InvalidTangent, NumericalFailure, RankDeficiency
from .hilbert import BaseMeasure, ScalarFunction, check_tangent, inner_product, norm_sq

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class GramSystem:
    gram: np.ndarray
    cross: np.ndarray
    kappa_norm_sq: float
    generators: tuple = ()

    def __post_init__(self):
        G = np.asarray(self.gram, dtype=float)
        b = np.asarray(self.cross, dtype=float)
        if G.ndim != 2 or G.shape[0] != G.shape[1] or b.shape != (G.shape[0],):
            raise ValueError("gram must be k x k and cross of length k")
        if not np.all(np.isfinite(G)) or not np.all(np.isfinite(b)):
            raise ValueError("gram and cross must be finite")
        if np.max(np.abs(G - G.T), initial=0.0) > 1e-12:
            raise ValueError("gram is not symmetric")
        scale = max(1.0, float(np.max(np.abs(np.diag(G)), initial=0.0)))
        if G.size and np.linalg.eigvalsh(G)[0] < -1e-10 * scale:
            raise ValueError("gram is not positive semidefinite")
        object.__setattr__(self, "gram", G)
        object.__setattr__(self, "cross", b)
        object.__setattr__(self, "kappa_norm_sq", float(self.kappa_norm_sq))

    @property
    def k(self) -> int:
        return self.cross.size

    def objective(self, gamma) -> float:
        """``||kappa - sum gamma_i g_i||^2``."""
        gamma = np.asarray(gamma, dtype=float)
        return self.kappa_norm_sq - 2.0 * gamma @ self.cross + gamma @ self.gram @ gamma


def build_gram(kappa: ScalarFunction, generators: Sequence[ScalarFunction],
               P: BaseMeasure, tol: float = 1e-8) -> GramSystem:
    generators = tuple(generators)
    for g in generators:
        if not check_tangent(g, P, tol):
            raise InvalidTangent(f"{g.label} does not have mean zero under {P.name}")
    k = len(generators)
    G = np.empty((k, k))
    for i in range(k):
        for j in range(i, k):
            G[i, j] = G[j, i] = inner_product(generators[i], generators[j], P)
    b = np.array([inner_product(kappa, g, P) for g in generators])
    return GramSystem(G, b, norm_sq(kappa, P), generators)


def gram_from_atoms(weights, kappa_values, generator_values) -> GramSystem:
    """Gram system for a discrete measure with the given atom weights.

    ``generator_values`` has one row per generator, one column per atom.
    """
    w = np.asarray(weights, dtype=float)
    kv = np.asarray(kappa_values, dtype=float)
    V = np.atleast_2d(np.asarray(generator_values, dtype=float))
    G = (V * w) @ V.T
    G = 0.5 * (G + G.T)
    return GramSystem(G, (V * w) @ kv, float(w @ (kv * kv)))


@dataclass(frozen=True)
class SpanProjection:
    coeffs: np.ndarray
    norm_sq: float
    residual_norm_sq: float


@dataclass(frozen=True)
class ConeProjection:
    coeffs: np.ndarray
    multipliers: np.ndarray
    norm_sq: float
    active_set: frozenset = field(default_factory=frozenset)
    iterations: int = 0

    @classmethod
    def from_coeffs(cls, sys: GramSystem, coeffs) -> "ConeProjection":
        """Wrap arbitrary coefficients, e.g. to test them with :func:`verify_kkt`."""
        g = np.asarray(coeffs, dtype=float)
        return cls(g, sys.gram @ g - sys.cross, float(g @ sys.gram @ g),
                   frozenset(np.flatnonzero(g > 0).tolist()))


def project_span(sys: GramSystem) -> SpanProjection:
    if sys.k == 0:
        return SpanProjection(np.zeros(0), 0.0, sys.kappa_norm_sq)
    eig = np.linalg.eigvalsh(sys.gram)
    if eig[0] <= 0 or eig[-1] / eig[0] > MAX_CONDITION:
        raise RankDeficiency(
            f"gram is singular or ill-conditioned: smallest eigenvalue {eig[0]:.3g}, "
            f"largest {eig[-1]:.3g}")
    coeffs = np.linalg.solve(sys.gram, sys.cross)
    nsq = float(coeffs @ sys.cross)
    return SpanProjection(coeffs, nsq, max(sys.kappa_norm_sq - nsq, 0.0))


def _solve_passive(G, b, passive):
    idx = np.asarray(passive)
    z, *_ = np.linalg.lstsq(G[np.ix_(idx, idx)], b[idx], rcond=None)
    return z


def project_cone(sys: GramSystem) -> ConeProjection:
    """Nearest point of the cone ``{sum gamma_i g_i : gamma >= 0}`` to kappa."""
    G, b, k = sys.gram, sys.cross, sys.k
    gamma = np.zeros(k)
    if k == 0:
        return ConeProjection(gamma, gamma.copy(), 0.0)
    scale = max(1.0, float(np.max(np.abs(b))), float(np.max(np.diag(G))))
    tol = 1e-13 * scale * k
    max_iter = max(k * 2 ** k, 3 * k)
    passive: list[int] = []
    w = b - G @ gamma
    iterations = 0
    while True:
        free = np.ones(k, dtype=bool)
        free[passive] = False
        cand = np.where(free & (w > tol), w, -np.inf)
        if not np.isfinite(cand).any():
            break
        iterations += 1
        if iterations > max_iter:
            raise NumericalFailure(f"cone projection did not converge in {max_iter} iterations",
                                   best=gamma.copy())
        j = int(np.argmax(cand))  # first index among ties
        passive.append(j)
        passive.sort()
        while True:
            z = _solve_passive(G, b, passive)
            if np.all(z > 0):
                gamma[:] = 0.0
                gamma[passive] = z
                break
            pg = gamma[passive]
            neg = z <= 0
            step = np.min(pg[neg] / (pg[neg] - z[neg]))
            gamma[passive] = pg + step * (z - pg)
            keep = [i for i in passive if gamma[i] > tol * 1e-3]
            if len(keep) == len(passive):
                keep = [i for i, zi in zip(passive, z) if zi > 0]
            for i in set(passive) - set(keep):
                gamma[i] = 0.0
            passive = keep
            if not passive:
                break
        w = b - G @ gamma
        if j not in passive:
            # entering index immediately dropped: degenerate direction, stop scanning it
            w[j] = min(w[j], 0.0)
    if passive:
        gamma[:] = 0.0
        gamma[passive] = _solve_passive(G, b, passive)
        gamma = np.maximum(gamma, 0.0)
    beta = G @ gamma - b
    beta[passive] = 0.0
    beta = np.maximum(beta, 0.0)
    return ConeProjection(gamma, beta, float(gamma @ G @ gamma),
                          frozenset(passive), iterations)


@dataclass(frozen=True)
class KKTReport:
    nonnegativity: float
    multiplier_sign: float
    slackness: float
    dual_feasibility: float
    norm_identity: float
    tol: float

    @property
    def residuals(self) -> dict:
        return {
            "nonnegativity": self.nonnegativity,
            "multiplier_sign": self.multiplier_sign,
            "slackness": self.slackness,
            "dual_feasibility": self.dual_feasibility,
            "norm_identity": self.norm_identity,
        }

    @property
    def passed(self) -> bool:
        return max(self.residuals.values()) <= self.tol


def verify_kkt(sys: GramSystem, proj: ConeProjection, tol: float = 1e-9) -> KKTReport:
    """Violations of the cone-projection optimality conditions.

    ``dual_feasibility`` is ``max_i <kappa - kappa_tilde|g_i>`` (must be <= 0)
    and ``norm_identity`` is ``|<kappa|kappa_tilde> - ||kappa_tilde||^2|``,
    both recomputed from the Gram system rather than taken from ``proj``.
    """
    g = np.asarray(proj.coeffs, dtype=float)
    beta = np.asarray(proj.multipliers, dtype=float)
    if sys.k == 0:
        return KKTReport(0.0, 0.0, 0.0, 0.0, 0.0, tol)
    Gg = sys.gram @ g
    return KKTReport(
        nonnegativity=float(max(0.0, -np.min(g))),
        multiplier_sign=float(max(0.0, -np.min(beta))),
        slackness=float(np.max(np.abs(beta * g))),
        dual_feasibility=float(max(0.0, np.max(sys.cross - Gg))),
        norm_identity=float(abs(g @ sys.cross - g @ Gg)),
        tol=tol,
    )


def min_norm_hull(points_gram, tol: float = 1e-12, max_iter: int | None = None) -> np.ndarray:
    """Simplex weights of the minimum-norm point in the convex hull (Wolfe).

    Only the Gram matrix of the points is needed.
    """
    G = np.asarray(points_gram, dtype=float)
    k = G.shape[0]
    if G.shape != (k, k) or k == 0:
        raise ValueError("points_gram must be a nonempty square matrix")
    scale = max(float(np.max(np.diag(G))), 1e-300)
    eps = tol * scale
    max_iter = max_iter or 50 * k + 50
    S = [int(np.argmin(np.diag(G)))]
    lam = np.array([1.0])
    for _ in range(max_iter):
        Gx = G[:, S] @ lam
        xx = float(lam @ Gx[S])
        j = int(np.argmin(Gx))
        if Gx[j] >= xx - eps or j in S:
            w = np.zeros(k)
            w[S] = lam
            return w
        S.append(j)
        lam = np.append(lam, 0.0)
        for _ in range(max_iter):
            m = len(S)
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = G[np.ix_(S, S)]
            A[:m, m] = A[m, :m] = 1.0
            rhs = np.zeros(m + 1)
            rhs[m] = 1.0
            v = np.linalg.lstsq(A, rhs, rcond=None)[0][:m]
            if np.all(v > 1e-14):
                lam = v
                break
            neg = v <= 1e-14
            theta = np.min(lam[neg] / (lam[neg] - v[neg]))
            lam = lam + theta * (v - lam)
            keep = lam > 1e-14
            keep[np.argmax(lam)] = True
            S = [s for s, kp in zip(S, keep) if kp]
            lam = lam[keep]
            lam = lam / lam.sum()
    w = np.zeros(k)
    w[S] = lam
    raise NumericalFailure("minimum-norm-point iteration did not converge", best=w)
