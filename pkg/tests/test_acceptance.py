"""Acceptance criteria 1-7, one verdict line per criterion in the terminal summary."""
import math
import time

import numpy as np
import pytest

from riesz_annulus.balayage import (
    SolveConfig,
    balayage_onto,
    balayage_point,
    min_smooth_factor,
    solve_mu_lambda,
)
from riesz_annulus.iba import (
    F_of_lambda,
    find_lambda_star,
    gap_sign_change,
    run_iba,
    verify_euler_lagrange,
)
from riesz_annulus.measures import Interval, chebyshev_points, potential, total_mass
from riesz_annulus.oracle import ParticleSystem, descend, empirical_support, initial_positions, random_positions
from riesz_annulus.special import (
    balayage_point_interval,
    equilibrium_interval,
    kelvin_point_balayage,
    mu0_exact,
)


def _sup_smooth(a, b, count=400):
    xs = np.linspace(a.right.interval.a, a.right.interval.b, count)
    return float(np.max(np.abs(a.right.smooth_series(xs) - b.right.smooth_series(xs))))


def test_criterion_1_closed_form_oracle(acceptance):
    t0 = time.perf_counter()
    mu = solve_mu_lambda(0.0, 0.7, SolveConfig(n_nodes=64))
    elapsed = time.perf_counter() - t0
    diff = _sup_smooth(mu, mu0_exact(0.7))
    ok = diff <= 1e-7 and elapsed < 5.0
    acceptance(1, ok, f"sup diff {diff:.2e}, {elapsed:.2f}s")
    assert ok


def test_criterion_2_balayage_relation(acceptance):
    nu = balayage_onto(solve_mu_lambda(0.2, 0.7), 0.5)
    diff = _sup_smooth(nu, solve_mu_lambda(0.5, 0.7))
    ok = diff <= 1e-6
    acceptance(2, ok, f"sup diff {diff:.2e}")
    assert ok


@pytest.mark.parametrize("s, target", [(0.7, 0.4440), (0.3, 0.7880)])
def test_criterion_3_iba_regression(acceptance, s, target):
    t0 = time.perf_counter()
    trace = run_iba(s)
    elapsed = time.perf_counter() - t0
    increasing = bool(np.all(np.diff(trace.lambdas) > 0.0))
    ok = abs(trace.lambda_inf - target) <= 1e-3 and increasing and elapsed < 120.0
    acceptance(3, ok, f"s={s} lambda_inf={trace.lambda_inf:.6f} in {trace.iterations} steps, {elapsed:.2f}s")
    assert ok


@pytest.mark.parametrize("s, target", [(0.7, 0.6941), (0.3, 0.9876)])
def test_criterion_4_root_regression(acceptance, s, target, trace07, trace03):
    trace = trace07 if s == 0.7 else trace03
    lam_star = find_lambda_star(s, trace=trace)
    f_inf = F_of_lambda(trace.lambda_inf, s)
    f_end = F_of_lambda(0.999, s)
    limit = -2.0 / (1.0 - s)
    rel = abs(f_end - limit) / abs(limit)
    root_ok = abs(lam_star - target) <= 1e-3 and f_inf > 0.0
    limit_ok = rel <= 0.05
    acceptance(4, root_ok and limit_ok,
               f"s={s} lambda*={lam_star:.6f}, F(lambda_inf)={f_inf:.4f}, F(0.999)={f_end:.4f} vs {limit:.4f} ({100 * rel:.1f}% off)")
    assert root_ok
    assert limit_ok, f"F(0.999) = {f_end} is {100 * rel:.1f}% from the limit {limit}"


def test_criterion_5_headline_minimizer(acceptance, minimizer13):
    res = minimizer13
    report = verify_euler_lagrange(res, grid=2000)
    mass = total_mass(res.rho)
    checks = {
        "R1": abs(res.R1 - 0.6532) <= 2e-3,
        "R2": abs(res.R2 - 0.9411) <= 2e-3,
        "mass": abs(mass - 1.0) <= 1e-8,
        "support": report["support_residual"] <= 1e-5,
        "offsupport": report["offsupport_min"] >= -1e-7,
    }
    ok = all(checks.values())
    acceptance(5, ok, f"R1={res.R1:.5f} R2={res.R2:.5f} mass-1={mass - 1:.1e} "
                      f"EL={report['support_residual']:.1e} off-min={report['offsupport_min']:.1e}")
    assert ok, checks


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def test_criterion_6_equilibrium_constancy(acceptance):
    def run():
        w = equilibrium_interval(-0.3, 1.1, 0.45)
        vals = potential(w, chebyshev_points(w.interval, 20))
        return float(np.ptp(vals))

    spread, elapsed = _timed(run)
    ok = spread <= 1e-7 and elapsed < 30
    acceptance(6, ok, f"equilibrium spread {spread:.1e}")
    assert ok


def test_criterion_6_point_balayage(acceptance):
    def run():
        s, y = 0.6, 1.7
        nu = balayage_point_interval(y, -1.0, 1.0, s)
        xs = chebyshev_points(nu.interval, 20)
        err = float(np.max(np.abs(potential(nu, xs) - np.abs(xs - y) ** (-s))))
        return nu.mass(), err

    (mass, err), elapsed = _timed(run)
    ok = mass <= 1.0 and err <= 1e-9 and elapsed < 30
    acceptance(6, ok, f"point balayage mass {mass:.6f}, potential err {err:.1e}")
    assert ok


def test_criterion_6_kelvin_single_interval(acceptance):
    def run():
        s, X = 0.45, -0.8
        k = kelvin_point_balayage(X, [Interval(0.2, 1.3)], s)
        ref = balayage_point_interval(X, 0.2, 1.3, s)
        xs = np.linspace(0.2, 1.3, 200)
        return float(np.max(np.abs(k.pieces[0].smooth_series(xs) - ref.smooth(xs))))

    diff, elapsed = _timed(run)
    ok = diff <= 1e-8 and elapsed < 30
    acceptance(6, ok, f"Kelvin vs closed form {diff:.1e}")
    assert ok


def test_criterion_6_decreasing_ratio(acceptance):
    def run():
        # a positive measure inside the gap, swept onto K_{lambda,1}
        s, lam = 0.7, 0.5
        bump = equilibrium_interval(-0.05, 0.05, s)
        nu = balayage_onto(bump, lam)
        xs = np.linspace(lam, 1.0, 400)
        ratio = nu.right.smooth_series(xs)
        return float(np.max(np.diff(ratio))), float(ratio.min())

    (rise, low), elapsed = _timed(run)
    ok = rise < 0.0 and low > 0.0 and elapsed < 30
    acceptance(6, ok, f"ratio max increment {rise:.2e}")
    assert ok


def test_criterion_6_comparison_principle(acceptance):
    def run():
        s, lam, y = 0.7, 0.4, -1.5
        inner = balayage_point(y, [Interval(lam, 1.0)], s)
        outer = balayage_point(y, [Interval(-1.0, -lam), Interval(lam, 1.0)], s)
        nodes = inner.pieces[0].nodes
        return float(np.max(outer.pieces[-1].smooth_series(nodes) - inner.pieces[0].smooth_factor))

    excess, elapsed = _timed(run)
    ok = excess <= 0.0 and elapsed < 30
    acceptance(6, ok, f"comparison excess {excess:.2e}")
    assert ok


def test_criterion_6_two_resolutions(acceptance):
    def run():
        a = solve_mu_lambda(0.3, 0.7, SolveConfig(n_nodes=40, adaptive_nodes=False))
        b = solve_mu_lambda(0.3, 0.7, SolveConfig(n_nodes=80, adaptive_nodes=False))
        return _sup_smooth(a, b)

    diff, elapsed = _timed(run)
    ok = diff <= 1e-6 and elapsed < 30
    acceptance(6, ok, f"n vs 2n {diff:.1e}")
    assert ok


def test_criterion_6_gap_sign_pattern(acceptance, lambda_star07):
    def run():
        mu = solve_mu_lambda(lambda_star07, 0.7)
        return gap_sign_change(mu)

    (z, flips), elapsed = _timed(run)
    ok = flips == 1 and 0.0 < z < lambda_star07 and elapsed < 30
    acceptance(6, ok, f"one sign change at z={z:.4f}")
    assert ok


def test_criterion_7_two_point_collapse(acceptance):
    ps = descend(ParticleSystem(random_positions(50, seed=7, half_width=2.0), 2.0))
    err = float(np.max(np.abs(np.abs(ps.positions) - 1.0)))
    ok = err <= 1e-3
    acceptance(7, ok, f"b=2 cluster error {err:.1e}")
    assert ok


def test_criterion_7_support_match(acceptance, minimizer13):
    ps = descend(ParticleSystem(initial_positions(400), 1.3))
    inner, outer = empirical_support(ps.positions)
    R1, R2 = minimizer13.R1, minimizer13.R2
    gap_empty = not np.any(np.abs(ps.positions) < 0.95 * R1)
    ok = abs(inner - R1) <= 0.02 * R1 and abs(outer - R2) <= 0.02 * R2 and gap_empty
    acceptance(7, ok, f"N=400 support [{inner:.4f}, {outer:.4f}] vs [{R1:.4f}, {R2:.4f}]")
    assert ok
