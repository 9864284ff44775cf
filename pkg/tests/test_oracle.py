import numpy as np
import pytest

from riesz_annulus.exceptions import DomainError
from riesz_annulus.oracle import (
    ParticleSystem,
    continuum_energy,
    descend,
    discrete_energy,
    empirical_support,
    energy_gradient,
    initial_positions,
    quantile_sample,
    random_positions,
)


def test_two_particles_at_unit_distance():
    # N=2, b=2 at +-1: pair term -4/2 twice over 2N^2, confinement 1/4
    assert discrete_energy(np.array([-1.0, 1.0]), 2.0) == pytest.approx(-0.25, abs=1e-15)


def test_energy_not_translation_invariant():
    x = np.array([-0.7, 0.1, 0.9])
    assert discrete_energy(x + 0.3, 1.5) != pytest.approx(discrete_energy(x, 1.5))


def test_validation():
    with pytest.raises(DomainError):
        ParticleSystem(np.array([0.0]), 1.5)
    with pytest.raises(DomainError):
        ParticleSystem(np.array([0.0, np.nan]), 1.5)
    with pytest.raises(DomainError):
        ParticleSystem(np.array([0.0, 1.0]), 2.5)


def test_gradient_matches_differences():
    x = random_positions(9, seed=2, mirrored=False)
    b, h = 1.4, 1e-6
    g = energy_gradient(x, b)
    for i in (0, 4, 8):
        e = np.zeros_like(x)
        e[i] = h
        fd = (discrete_energy(x + e, b) - discrete_energy(x - e, b)) / (2 * h)
        assert g[i] / x.size == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_quantile_sample_energy(minimizer13):
    x = quantile_sample(minimizer13.rho, 400)
    assert discrete_energy(x, 1.3) == pytest.approx(continuum_energy(minimizer13), rel=1e-2)


def test_descent_monotone():
    ps = ParticleSystem(initial_positions(60, seed=1, jitter=0.3), 1.3)
    energies = [discrete_energy(ps)]
    for _ in range(40):
        ps = descend(ps, iters=1)
        energies.append(discrete_energy(ps))
    assert np.all(np.diff(energies) <= 1e-14)
    assert energies[-1] < energies[0]


def test_mirrored_start_stays_mirrored():
    ps = descend(ParticleSystem(initial_positions(40, seed=3, jitter=0.4, mirrored=True), 1.3), iters=200)
    x = np.sort(ps.positions)
    assert np.max(np.abs(x + x[::-1])) <= 1e-12


def test_seed_determinism():
    a = descend(ParticleSystem(initial_positions(80, seed=11, jitter=0.5), 1.3), iters=300)
    b = descend(ParticleSystem(initial_positions(80, seed=11, jitter=0.5), 1.3), iters=300)
    assert np.array_equal(a.positions, b.positions)
    c = initial_positions(80, seed=12, jitter=0.5)
    assert not np.array_equal(c, initial_positions(80, seed=11, jitter=0.5))


def test_cloud_respects_gap_and_outer_radius(minimizer13):
    ps = descend(ParticleSystem(initial_positions(400), 1.3))
    a = np.abs(ps.positions)
    assert not np.any(a < 0.95 * minimizer13.R1)
    assert not np.any(a > 1.05 * minimizer13.R2)
    inner, outer = empirical_support(ps.positions)
    assert inner < outer
