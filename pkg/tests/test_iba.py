import math

import numpy as np
import pytest

from riesz_annulus.balayage import SolveConfig, min_smooth_factor, solve_mu_lambda
from riesz_annulus.exceptions import DomainError, SolverError
from riesz_annulus.iba import (
    F_of_lambda,
    IbaTrace,
    assemble_minimizer,
    find_lambda_star,
    gap_inflection,
    gap_sign_change,
    next_lambda,
    verify_euler_lagrange,
)
from riesz_annulus.measures import field_V, total_mass
from riesz_annulus.special import equilibrium_interval, mu0_exact, mu0_sign_change


@pytest.mark.parametrize("s, expected", [(0.7, math.sqrt(0.15)), (0.3, math.sqrt(0.35))])
def test_first_step_from_closed_form(s, expected):
    assert next_lambda(mu0_exact(s), 0.0) == pytest.approx(expected, abs=1e-12)
    assert mu0_sign_change(s) == pytest.approx(expected, rel=1e-15)


def test_next_lambda_terminates_on_positive():
    assert next_lambda(solve_mu_lambda(0.9, 0.7), 0.9) is None


def test_trace_structure(trace07, trace03):
    for tr in (trace07, trace03):
        lams = np.asarray(tr.lambdas)
        assert lams[0] == 0.0 and np.all(np.diff(lams) > 0) and np.all(lams < 1)
        assert tr.lambda_inf >= lams[-1]
        assert tr.converged
        assert len(tr.min_smooth) == len(tr.lambdas) == len(tr.residuals)
        assert abs(tr.edge_value) <= 1e-4
        assert tr.lambda_inf >= math.sqrt((1 - tr.s) / (1 + tr.s))
        # the plain iteration and the edge-sign bracketing agree
        assert tr.lambda_inf - tr.lambda_last <= 1e-8


def test_iterate_differences_increase(trace07):
    s = 0.7
    w = equilibrium_interval(-1.0, 1.0, s)
    for a, b in zip(trace07.lambdas[:5], trace07.lambdas[1:6]):
        xs = np.linspace(b, 1.0, 300)[1:-1]
        d = (solve_mu_lambda(b, s).density(xs) - solve_mu_lambda(a, s).density(xs)) / w.density(xs)
        assert np.all(np.diff(d) >= -1e-12 * np.max(np.abs(d)))


def test_F_positive_at_threshold(trace07, trace03):
    assert F_of_lambda(trace07.lambda_inf, 0.7) > 0
    assert F_of_lambda(trace03.lambda_inf, 0.3) > 0


def test_F_limit_s07():
    limit = -2.0 / (1.0 - 0.7)
    assert abs(F_of_lambda(0.999, 0.7) - limit) <= 0.05 * abs(limit)


def test_F_approaches_limit_slowly_s03():
    # the distance to the limit shrinks like (1 - lambda)^s
    limit = -2.0 / (1.0 - 0.3)
    gaps = [F_of_lambda(1 - eps, 0.3) - limit for eps in (1e-3, 1e-5, 1e-7)]
    assert gaps[0] > gaps[1] > gaps[2] > 0
    ratio = gaps[1] / gaps[0]
    assert ratio == pytest.approx(1e-2**0.3, rel=0.1)


@pytest.mark.parametrize("lam", [0.2, 0.4, 0.6, 0.8, 0.95])
def test_F_continuous(lam):
    assert abs(F_of_lambda(lam + 1e-4, 0.7) - F_of_lambda(lam, 0.7)) <= 1e-2


def test_F_domain():
    with pytest.raises(DomainError):
        F_of_lambda(0.0, 0.5)
    with pytest.raises(DomainError):
        F_of_lambda(1.0, 0.5)


def test_F_matches_adaptive_quadrature():
    from scipy.integrate import quad

    lam, s = 0.6, 0.7
    mu = solve_mu_lambda(lam, s)
    ref = 2 * quad(lambda x: field_V(mu, x), 0, lam, limit=400, epsabs=1e-12)[0]
    assert F_of_lambda(lam, s, mu=mu) == pytest.approx(ref, abs=1e-9)


def test_lambda_star(lambda_star07, trace07):
    assert lambda_star07 > trace07.lambda_inf
    assert abs(F_of_lambda(lambda_star07, 0.7)) <= 1e-8
    assert min_smooth_factor(solve_mu_lambda(lambda_star07, 0.7))[0] > 0


def test_lambda_star_bracket_failure(trace07):
    bad = IbaTrace(0.7, lambdas=[0.0], lambda_inf=0.75)
    with pytest.raises(SolverError):
        find_lambda_star(0.7, trace=bad)


def test_gap_sign_pattern(lambda_star07):
    mu = solve_mu_lambda(lambda_star07, 0.7)
    z, flips = gap_sign_change(mu)
    y, bends = gap_inflection(mu)
    assert flips == 1 and bends == 1
    xs = np.linspace(0, lambda_star07, 200)[1:-1]
    v = field_V(mu, xs)
    assert np.all(v[xs < z - 1e-9] > 0) and np.all(v[xs > z + 1e-9] < 0)


def test_gap_curvature_at_threshold(trace07):
    mu = solve_mu_lambda(trace07.lambda_inf, 0.7)
    y, bends = gap_inflection(mu)
    assert bends == 1 and 0 < y < trace07.lambda_inf


@pytest.mark.parametrize("b", [1.0, 2.0, 0.5, 2.5])
def test_assemble_rejects_endpoints(b):
    with pytest.raises(DomainError):
        assemble_minimizer(b)


def test_minimizer_invariants(minimizer13):
    res = minimizer13
    assert res.R1 == pytest.approx(res.lambda_star * res.R2, rel=1e-15)
    assert total_mass(res.rho) == pytest.approx(1.0, abs=1e-8)
    assert min_smooth_factor(res.rho)[0] > -1e-10
    assert res.diagnostics["C0_spread"] <= 1e-8


def test_rescaling_consistency(minimizer13):
    res = minimizer13
    xs = np.random.default_rng(5).uniform(-1.5, 1.5, 10)
    lhs = field_V(res.rho, xs)
    rhs = res.R2**2 * field_V(res.mu, xs / res.R2)
    assert np.allclose(lhs, rhs, rtol=1e-10, atol=1e-10)


def test_euler_lagrange_report(minimizer13):
    rep = verify_euler_lagrange(minimizer13)
    assert rep["passed"]
    assert rep["gap_midpoint_excess"] > 0
    assert rep["symmetry_defect"] <= 1e-12
    assert rep["min_smooth_factor"] > 0
    assert np.isfinite(rep["max_abs_smooth_derivative"])


def test_refinement_stability():
    coarse = assemble_minimizer(1.3, SolveConfig(n_nodes=32))
    fine = assemble_minimizer(1.3, SolveConfig(n_nodes=64))
    assert abs(coarse.R1 - fine.R1) <= 1e-4 and abs(coarse.R2 - fine.R2) <= 1e-4


@pytest.mark.slow
def test_trend_toward_b_one():
    res = assemble_minimizer(1.05)
    assert verify_euler_lagrange(res)["passed"]
    assert res.R1 < 0.3
    mid = 0.5 * (res.R1 + res.R2)
    xs = mid + 0.2 * (res.R2 - res.R1) * np.linspace(-1, 1, 5)
    assert np.allclose(res.rho.density(xs), 1.5 * xs**2, rtol=0.1)


@pytest.mark.slow
def test_trend_toward_b_two():
    widths, outers = [], []
    for b in (1.6, 1.8, 1.9):
        res = assemble_minimizer(b)
        widths.append(res.R2 - res.R1)
        outers.append(res.R2)
    assert widths[0] > widths[1] > widths[2] and widths[2] < 1e-5
    assert outers[0] < outers[1] < outers[2] < 1.0


@pytest.mark.slow
def test_trend_at_b_1_95():
    # 1 - lambda_* is about 4e-14 here, close to the spacing of doubles near 1
    res = assemble_minimizer(1.95)
    assert res.R2 - res.R1 < 1e-10
    assert res.R2 > 0.97
