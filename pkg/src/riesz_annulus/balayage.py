"""Collocation solvers for steady states and balayage onto interval unions.

Unknowns are Gegenbauer coefficients of the smooth factor on each interval;
equations enforce the potential at the Gauss-Jacobi nodes (square system).
On the symmetric set ``K_{lambda,1} = [-1,-lambda] U [lambda,1]`` only the
right interval carries unknowns and the mirrored piece enters through the
kernel evaluated at ``-x``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from . import _kernels
from .exceptions import DomainError, SolverError
from .measures import (
    DEFAULT_NODES,
    PANEL_ORDER,
    EdgeDensity,
    Interval,
    SignedMeasure,
    _check_s,
    _jacobi_reference,
    as_measure,
    chebyshev_points,
    edge_exponent,
    external_field,
    reference_basis,
    riesz_eigenvalues,
)


@dataclass(frozen=True)
class SolveConfig:
    """Discretisation and tolerance settings shared by every solve.

    ``colloc_count`` always equals ``n_nodes``.  With ``adaptive_nodes`` the
    node count grows for small ``lambda`` so that the smooth factor, whose
    nearest singularity sits at ``-lambda``, stays resolved.
    """

    n_nodes: int = DEFAULT_NODES
    colloc_count: int | None = None
    linear_tol: float = 1e-10
    quad_tol: float = 1e-12
    panel_order: int = PANEL_ORDER
    max_condition: float = 1e12
    adaptive_nodes: bool = True
    max_nodes: int = 256
    lambda_floor: float = 1e-3

    def __post_init__(self) -> None:
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 4:
            raise DomainError(f"n_nodes must be an integer >= 4, got {self.n_nodes}")
        if self.colloc_count is None:
            object.__setattr__(self, "colloc_count", int(self.n_nodes))
        if self.colloc_count != self.n_nodes:
            raise DomainError("collocation count must equal the node count")
        if not (self.linear_tol > 0 and self.quad_tol > 0):
            raise DomainError("tolerances must be positive")

    def with_nodes(self, n: int) -> "SolveConfig":
        return replace(self, n_nodes=int(n), colloc_count=int(n))

    def nodes_for(self, lam: float) -> int:
        if not self.adaptive_nodes or lam <= 0.0:
            return int(self.n_nodes)
        t0 = (1.0 + 3.0 * lam) / (1.0 - lam)
        rho = t0 + math.sqrt(t0 * t0 - 1.0)
        need = int(math.ceil(34.0 / math.log(rho)))
        return int(min(self.max_nodes, max(self.n_nodes, need)))


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not 0.0 <= lam < 1.0:
        raise DomainError(f"lambda must lie in [0, 1), got {lam}")
    return lam


def _solve_square(A: np.ndarray, rhs: np.ndarray, cfg: SolveConfig) -> tuple[np.ndarray, float]:
    cond = float(np.linalg.cond(A))
    if not np.isfinite(cond) or cond > cfg.max_condition:
        raise SolverError(f"collocation matrix is ill-conditioned (cond ~ {cond:.3e})", condition=cond)
    return np.linalg.solve(A, rhs), cond


def _self_block(s: float, n: int, t: np.ndarray) -> np.ndarray:
    return (_kernels.gegenbauer_table(0.5 * s, n, t) * riesz_eigenvalues(s, n)[:, None]).T


def solve_symmetric(lam: float, s: float, rhs: Callable, cfg: SolveConfig | None = None) -> SignedMeasure:
    """Even measure on ``K_{lambda,1}`` (or ``[-1, 1]`` for ``lambda = 0``) whose
    potential equals the even function ``rhs`` on its support."""
    cfg = cfg or SolveConfig()
    s = _check_s(s)
    lam = _check_lambda(lam)
    n = cfg.nodes_for(lam)
    e = edge_exponent(s)
    t, _ = _jacobi_reference(n, e, e)
    if lam == 0.0:
        iv = Interval(-1.0, 1.0)
        pos = t >= 0.0
        even = np.arange(0, n, 2)
        A = _self_block(s, n, t[pos])[:, even]
        c_even, cond = _solve_square(A, np.asarray(rhs(t[pos]), dtype=np.float64), cfg)
        coeffs = np.zeros(n)
        coeffs[even] = c_even
    else:
        iv = Interval(lam, 1.0)
        x = iv.from_reference(t)
        A = _self_block(s, n, t) + reference_basis(iv.to_reference(-x), s, n, order=cfg.panel_order)
        coeffs, cond = _solve_square(A, np.asarray(rhs(x), dtype=np.float64), cfg)
    piece = EdgeDensity.from_coefficients(iv, s, coeffs)
    # node values from the series can differ from exact mirror images only by round-off
    if lam == 0.0:
        u = 0.5 * (piece.smooth_factor + piece.smooth_factor[::-1])
        piece = EdgeDensity(iv, s, u)
    return SignedMeasure.even(piece, {"lambda": lam, "condition": cond, "n_nodes": n})


def solve_mu_lambda(lam: float, s: float, cfg: SolveConfig | None = None) -> SignedMeasure:
    """The signed measure on ``K_{lambda,1}`` with ``V[mu] = 0`` on its support."""
    cfg = cfg or SolveConfig()
    lam = _check_lambda(lam)
    if lam < cfg.lambda_floor:
        lam = 0.0
    k = 3.0 / (1.0 - _check_s(s))
    return solve_symmetric(lam, s, lambda x: k * np.asarray(x) ** 2, cfg)


def solve_on_intervals(intervals: Sequence[Interval], s: float, rhs: Callable,
                       cfg: SolveConfig | None = None) -> SignedMeasure:
    """Measure on a union of disjoint intervals whose potential equals ``rhs`` there.

    No symmetry is assumed; every interval carries ``cfg.n_nodes`` unknowns.
    """
    cfg = cfg or SolveConfig()
    s = _check_s(s)
    ivs = sorted(intervals, key=lambda iv: iv.a)
    for left, right in zip(ivs[:-1], ivs[1:]):
        if right.a <= left.b:
            raise DomainError("intervals must be disjoint")
    n = int(cfg.n_nodes)
    e = edge_exponent(s)
    t, _ = _jacobi_reference(n, e, e)
    m = len(ivs)
    A = np.zeros((m * n, m * n))
    b = np.zeros(m * n)
    for p, ivp in enumerate(ivs):
        x = ivp.from_reference(t)
        b[p * n:(p + 1) * n] = rhs(x)
        for q, ivq in enumerate(ivs):
            blk = _self_block(s, n, t) if p == q else reference_basis(ivq.to_reference(x), s, n, order=cfg.panel_order)
            A[p * n:(p + 1) * n, q * n:(q + 1) * n] = blk
    coeffs, cond = _solve_square(A, b, cfg)
    pieces = tuple(EdgeDensity.from_coefficients(iv, s, coeffs[q * n:(q + 1) * n]) for q, iv in enumerate(ivs))
    return SignedMeasure(pieces, s, False, {"condition": cond, "n_nodes": n})


def equilibrium_measure(intervals: Sequence[Interval], s: float,
                        cfg: SolveConfig | None = None) -> tuple[SignedMeasure, float]:
    """Equilibrium probability measure of a union of intervals and its potential level."""
    nu = solve_on_intervals(intervals, s, lambda x: np.ones_like(x), cfg)
    mass = sum(pc.mass() for pc in nu.pieces)
    return nu.scaled(1.0 / mass), 1.0 / mass


def balayage_point(y: float, intervals: Sequence[Interval], s: float,
                   cfg: SolveConfig | None = None) -> SignedMeasure:
    """Balayage of the unit point mass at ``y`` by direct collocation."""
    for iv in intervals:
        if iv.a <= y <= iv.b:
            raise DomainError(f"point {y} lies in the target set")
    return solve_on_intervals(intervals, s, lambda x: np.abs(x - y) ** (-s), cfg)


def _is_nonnegative(mu: SignedMeasure) -> bool:
    return all(np.all(pc.smooth_factor >= 0.0) for pc in mu.pieces)


def balayage_onto(mu, lam: float, cfg: SolveConfig | None = None) -> SignedMeasure:
    """``Bal(mu, K_{lambda,1})``: the measure on ``K_{lambda,1}`` with the potential of ``mu`` there."""
    cfg = cfg or SolveConfig()
    mu = as_measure(mu)
    lam = _check_lambda(lam)
    if lam == 0.0:
        raise DomainError("balayage target needs lambda in (0, 1)")
    if mu.symmetric:
        nu = solve_symmetric(lam, mu.s, mu.kernel_integral, cfg)
    else:
        nu = solve_on_intervals([Interval(-1.0, -lam), Interval(lam, 1.0)], mu.s, mu.kernel_integral, cfg)
    if _is_nonnegative(mu):
        low, where = min_smooth_factor(nu)
        scale = max(float(np.max(np.abs(pc.smooth_factor))) for pc in nu.pieces)
        if low < -1e-8 * scale:
            from .exceptions import ConsistencyError

            raise ConsistencyError(f"balayage of a positive measure went negative ({low:.3e} at {where:.6f})")
    return nu


def min_smooth_factor(mu, grid: int = 512) -> tuple[float, float]:
    """Minimum of the smooth factor and where it is attained.

    For a symmetric measure only the right piece is scanned.
    """
    mu = as_measure(mu)
    pieces = [mu.right] if mu.symmetric else list(mu.pieces)
    best = (math.inf, math.nan)
    for pc in pieces:
        iv = pc.interval
        lo = max(iv.a, 0.0) if mu.symmetric else iv.a
        xs = np.linspace(lo, iv.b, grid)
        vals = pc.smooth_series(xs)
        k = int(np.argmin(vals))
        cand = (float(vals[k]), float(xs[k]))
        if 0 < k < grid - 1:
            res = minimize_scalar(lambda z: float(pc.smooth_series(np.array([z]))[0]),
                                  bounds=(xs[k - 1], xs[k + 1]), method="bounded", options={"xatol": 1e-13})
            if res.fun < cand[0]:
                cand = (float(res.fun), float(res.x))
        if cand[0] < best[0]:
            best = cand
    return best


def edge_smooth_value(mu) -> float:
    """Smooth factor of a symmetric measure at its inner edge."""
    mu = as_measure(mu)
    return float(mu.right.smooth_series(np.array([mu.inner_edge]))[0])


def residual(mu, rhs: Callable | None = None, count: int | None = None) -> float:
    """Max ``|W*mu - rhs|`` at Chebyshev check points on the support (between nodes).

    ``rhs`` defaults to ``-U``, i.e. the residual of ``V[mu] = 0``.
    """
    mu = as_measure(mu)
    rhs = rhs or (lambda x: -external_field(mu.s, x))
    pieces = [mu.right] if mu.symmetric else list(mu.pieces)
    worst = 0.0
    for pc in pieces:
        xs = chebyshev_points(pc.interval, count or 4 * pc.n)
        if mu.symmetric and pc.interval.a < 0.0:
            xs = xs[xs >= 0.0]
        worst = max(worst, float(np.max(np.abs(mu.kernel_integral(xs) - rhs(xs)))))
    return worst
