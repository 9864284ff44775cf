"""Iterated balayage, the gap functional ``F``, and assembly of the minimizer.

The two-interval minimizer of the energy with kernel ``-|x|^b/b`` and
confinement ``x^4/4`` is obtained from the Riesz steady state ``mu_lambda``
at the root ``lambda_*`` of ``F(lambda) = int_{-lambda}^{lambda} V[mu_lambda]``,
rescaled so that it has unit mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .balayage import SolveConfig, edge_smooth_value, min_smooth_factor, residual, solve_mu_lambda
from .exceptions import ConsistencyError, DomainError, SolverError
from .measures import SignedMeasure, _check_s, field_V, field_V_second_derivative, original_potential, total_mass
from .special import RieszParams


@dataclass
class IbaTrace:
    """Iterates ``lambda_0 = 0 < lambda_1 < ...`` with per-step diagnostics.

    ``lambda_inf`` is the threshold where ``mu_lambda`` first becomes
    nonnegative.  When the iteration stalls before ``tol`` it is refined by
    bracketing the sign of the smooth factor at the inner edge;
    ``lambda_last`` keeps the final iterate for comparison.
    """

    s: float
    lambdas: list = field(default_factory=list)
    min_smooth: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    lambda_inf: float = math.nan
    lambda_last: float = math.nan
    converged: bool = False
    edge_value: float = math.nan

    @property
    def iterations(self) -> int:
        return max(0, len(self.lambdas) - 1)


@dataclass
class MinimizerResult:
    b: float
    s: float
    lambda_star: float
    R1: float
    R2: float
    C0: float
    rho: SignedMeasure
    mu: SignedMeasure
    trace: IbaTrace
    diagnostics: dict = field(default_factory=dict)


def next_lambda(mu: SignedMeasure, lambda_prev: float, xtol: float = 1e-12) -> float | None:
    """Zero of the smooth factor of ``mu`` in ``(lambda_prev, 1)``.

    Returns ``None`` when the smooth factor is already nonnegative at the
    inner edge, which ends the iteration.
    """
    u = mu.right.smooth_series
    lo, hi = max(float(lambda_prev), 0.0), 1.0
    u_lo, u_hi = float(u(np.array([lo]))[0]), float(u(np.array([hi]))[0])
    if u_lo >= 0.0:
        return None
    if u_hi <= 0.0:
        raise SolverError(f"smooth factor has no sign change on ({lo}, 1)")
    return float(brentq(lambda x: float(u(np.array([x]))[0]), lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps))


def _edge_sign_root(s: float, lo: float, cfg: SolveConfig) -> tuple[float, float]:
    """Threshold where ``u_lambda(lambda)`` changes sign, searched above ``lo``."""
    g = lambda lam: edge_smooth_value(solve_mu_lambda(lam, s, cfg))
    g_lo = g(lo)
    if g_lo >= 0.0:
        return lo, g_lo
    hi = lo
    for _ in range(60):
        hi = 0.5 * (hi + 1.0)
        if g(hi) > 0.0:
            break
        lo = hi
    else:
        raise SolverError("no positive edge value found below 1")
    root = brentq(g, lo, hi, xtol=1e-13, rtol=4 * np.finfo(float).eps)
    return float(root), g(root)


def run_iba(s: float, cfg: SolveConfig | None = None, max_iter: int = 200, tol: float = 1e-10) -> IbaTrace:
    cfg = cfg or SolveConfig()
    s = _check_s(s)
    trace = IbaTrace(s)
    lam = 0.0
    while True:
        mu = solve_mu_lambda(lam, s, cfg)
        trace.lambdas.append(lam)
        trace.min_smooth.append(min_smooth_factor(mu)[0])
        trace.residuals.append(residual(mu))
        if trace.iterations >= max_iter:
            break
        nxt = next_lambda(mu, lam)
        if nxt is None:
            trace.converged = True
            break
        if not nxt > lam:
            raise ConsistencyError(f"iteration is not increasing: {nxt} after {lam}")
        step = nxt - lam
        lam = nxt
        if step < tol:
            trace.lambdas.append(lam)
            mu = solve_mu_lambda(lam, s, cfg)
            trace.min_smooth.append(min_smooth_factor(mu)[0])
            trace.residuals.append(residual(mu))
            trace.converged = True
            break
    lams = np.asarray(trace.lambdas)
    if np.any(np.diff(lams) <= 0.0):
        raise ConsistencyError("iterates are not strictly increasing")
    trace.lambda_last = float(lams[-1])
    root, g_root = _edge_sign_root(s, trace.lambda_last, cfg)
    if root < trace.lambda_last - 1e-9:
        raise ConsistencyError(f"refined threshold {root} lies below the last iterate {trace.lambda_last}")
    trace.lambda_inf = max(root, trace.lambda_last)
    mu_inf = solve_mu_lambda(trace.lambda_inf, s, cfg)
    scale = float(np.max(np.abs(mu_inf.right.smooth_factor)))
    trace.edge_value = edge_smooth_value(mu_inf) / scale
    low, _ = min_smooth_factor(mu_inf)
    if abs(trace.edge_value) > 1e-4 or low < -1e-4 * scale:
        raise ConsistencyError(f"threshold measure is not edge-vanishing and nonnegative (edge {trace.edge_value:.3e})")
    return trace


def _gap_rule(lam: float, levels: int = 44, order: int = 16) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre rule on ``[0, lambda]`` graded geometrically toward ``lambda``,
    where ``V`` has an algebraic cusp."""
    t, w = np.polynomial.legendre.leggauss(order)
    edges = [0.0, 0.5 * lam] + [lam - lam * 0.5**k for k in range(2, levels + 1)]
    xs, ws = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        h = 0.5 * (hi - lo)
        xs.append(lo + h * (t + 1.0))
        ws.append(h * w)
    return np.concatenate(xs), np.concatenate(ws)


def F_of_lambda(lam: float, s: float, cfg: SolveConfig | None = None, mu: SignedMeasure | None = None) -> float:
    """``F(lambda) = int_{-lambda}^{lambda} V[mu_lambda](x) dx``, computed as twice the right half."""
    lam = float(lam)
    if not 0.0 < lam < 1.0:
        raise DomainError(f"lambda must lie in (0, 1), got {lam}")
    mu = mu if mu is not None else solve_mu_lambda(lam, s, cfg)
    x, w = _gap_rule(lam)
    return 2.0 * float(w @ field_V(mu, x))


def find_lambda_star(s: float, cfg: SolveConfig | None = None, trace: IbaTrace | None = None,
                     upper: float = 0.999, xtol: float = 1e-12) -> float:
    """Root of ``F`` in ``(lambda_inf, 1)``.

    ``xtol`` applies to ``log(1 - lambda)``.  If ``F(upper)`` is still
    positive the upper end moves toward 1 by decades.
    """
    cfg = cfg or SolveConfig()
    trace = trace or run_iba(s, cfg)
    lo = trace.lambda_inf
    f_lo = F_of_lambda(lo, s, cfg)
    f_hi = F_of_lambda(upper, s, cfg)
    # F tends to its negative limit like (1 - lambda)^s, so small s needs an upper end closer to 1
    while f_hi >= 0.0 and 1.0 - upper > 1e-15:
        upper = 1.0 - 0.1 * (1.0 - upper)
        f_hi = F_of_lambda(upper, s, cfg)
    if not (f_lo > 0.0 > f_hi):
        raise SolverError(f"F does not change sign on [{lo}, {upper}]: F = {f_lo:.3e}, {f_hi:.3e}")
    # search in log(1 - lambda) so the bracket keeps relative resolution as lambda_* approaches 1
    g = lambda u: F_of_lambda(-math.expm1(u), s, cfg)
    u = brentq(g, math.log1p(-lo), math.log1p(-upper), xtol=xtol, rtol=4 * np.finfo(float).eps)
    root = float(-math.expm1(u))
    f_root = F_of_lambda(root, s, cfg)
    if abs(f_root) > 1e-8:
        raise SolverError(f"|F(lambda_*)| = {abs(f_root):.3e} exceeds 1e-8")
    mu = solve_mu_lambda(root, s, cfg)
    if min_smooth_factor(mu)[0] < 0.0:
        raise ConsistencyError("mu at lambda_* is not positive")
    return root


def gap_sign_change(mu: SignedMeasure, grid: int = 4000) -> tuple[float, int]:
    """Sign change of ``V[mu]`` on the gap ``(0, lambda)`` and the number of sign changes seen.

    Points within ``1e-9 * lambda`` of the edge, where ``V`` vanishes, are skipped.
    """
    lam = mu.inner_edge
    xs = np.linspace(0.0, lam * (1.0 - 1e-9), grid)
    v = field_V(mu, xs)
    sg = np.sign(v)
    flips = np.nonzero(sg[:-1] * sg[1:] < 0.0)[0]
    if len(flips) == 0:
        return math.nan, 0
    k = flips[0]
    z = brentq(lambda x: field_V(mu, np.array([x]))[0], xs[k], xs[k + 1], xtol=1e-14)
    return float(z), len(flips)


def gap_inflection(mu: SignedMeasure, grid: int = 4000) -> tuple[float, int]:
    """Sign change of ``V[mu]''`` on ``(0, lambda)`` and the number of sign changes seen."""
    lam = mu.inner_edge
    xs = np.linspace(0.0, lam * (1.0 - 1e-6), grid)
    v2 = field_V_second_derivative(mu, xs)
    flips = np.nonzero(np.sign(v2[:-1]) * np.sign(v2[1:]) < 0.0)[0]
    if len(flips) == 0:
        return math.nan, 0
    k = flips[0]
    y = brentq(lambda x: field_V_second_derivative(mu, np.array([x]))[0], xs[k], xs[k + 1], xtol=1e-14)
    return float(y), len(flips)


def assemble_minimizer(b: float, cfg: SolveConfig | None = None, trace: IbaTrace | None = None) -> MinimizerResult:
    """Two-interval minimizer for ``1 < b < 2``."""
    cfg = cfg or SolveConfig()
    params = RieszParams.from_b(b)
    s = params.s
    trace = trace or run_iba(s, cfg)
    lam = find_lambda_star(s, cfg, trace)
    mu = solve_mu_lambda(lam, s, cfg)
    mass = total_mass(mu)
    R2 = mass ** (-1.0 / (2.0 + s))
    R1 = lam * R2
    # rho(x) = R2^{1+s} mu(x/R2): the edge weight contributes R2^{1-s}
    rho = SignedMeasure.even(mu.right.rescaled(R2, R2**2), {"lambda": lam, "R2": R2})
    inner = R1 + (R2 - R1) * np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    levels = np.concatenate([[original_potential(rho, R2)], original_potential(rho, inner)])
    C0 = float(np.mean(levels))
    diag = {
        "mass_rho": total_mass(rho),
        "mass_mu": mass,
        "C0_spread": float(np.max(levels) - np.min(levels)),
        "F_at_lambda_star": F_of_lambda(lam, s, cfg, mu),
        "F_at_lambda_inf": F_of_lambda(trace.lambda_inf, s, cfg),
        "condition": mu.info.get("condition"),
        "n_nodes": mu.info.get("n_nodes"),
    }
    res = MinimizerResult(float(b), s, lam, R1, R2, C0, rho, mu, trace, diag)
    if abs(diag["mass_rho"] - 1.0) > 1e-8:
        raise ConsistencyError(f"rescaled density has mass {diag['mass_rho']!r}")
    return res


def verify_euler_lagrange(res: MinimizerResult, grid: int = 2000, support_grid: int = 400) -> dict:
    """Report on the Euler-Lagrange conditions of the assembled minimizer.

    ``support_residual`` is ``max |cal W * rho + cal U - C0|`` on the support
    and ``offsupport_min`` is the minimum of the same field minus ``C0`` over
    the off-support part of a uniform grid on ``[-2 R2, 2 R2]``.
    """
    rho, R1, R2, C0 = res.rho, res.R1, res.R2, res.C0
    k = np.arange(support_grid)
    xs_in = R1 + (R2 - R1) * 0.5 * (1.0 - np.cos(np.pi * (k + 0.5) / support_grid))
    xs_in = np.concatenate([-xs_in[::-1], xs_in])
    f_in = original_potential(rho, xs_in)
    xs = np.linspace(-2.0 * R2, 2.0 * R2, grid)
    off = ~rho.on_support(xs)
    f_off = original_potential(rho, xs[off]) - C0
    z, flips = gap_sign_change(res.mu)
    y, bends = gap_inflection(res.mu)
    low, where = min_smooth_factor(rho)
    right = rho.right
    xd = np.linspace(R1, R2, 2001)
    deriv = np.gradient(right.smooth_series(xd), xd)
    sym = float(np.max(np.abs(original_potential(rho, xs) - original_potential(rho, -xs))))
    report = {
        "support_residual": float(np.max(np.abs(f_in - C0))),
        "offsupport_min": float(np.min(f_off)),
        "offsupport_argmin": float(xs[off][int(np.argmin(f_off))]),
        "gap_midpoint_excess": float(original_potential(rho, 0.0) - C0),
        "gap_sign_change": z,
        "gap_sign_change_scaled": z * R2 if np.isfinite(z) else math.nan,
        "gap_sign_changes": flips,
        "gap_sign_ok": bool(flips == 1 and field_V(res.mu, 0.5 * z) > 0.0),
        "gap_inflection": y,
        "gap_inflection_changes": bends,
        "gap_curvature_ok": bool(bends == 1 and field_V_second_derivative(res.mu, 0.5 * y) < 0.0),
        "min_smooth_factor": low,
        "min_smooth_location": where,
        "max_abs_smooth_derivative": float(np.max(np.abs(deriv))),
        "symmetry_defect": sym,
    }
    report["passed"] = bool(
        report["support_residual"] <= 1e-5
        and report["offsupport_min"] >= -1e-7
        and report["gap_sign_ok"]
        and report["gap_curvature_ok"]
        and low > 0.0
    )
    return report
