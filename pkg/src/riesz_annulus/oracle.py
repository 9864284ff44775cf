"""Particle oracle: gradient descent on the discretised interaction energy.

With ``rho = (1/N) sum delta_{x_i}`` the energy is

    E_N = 1/(2 N^2) sum_{i != j} W(x_i - x_j) + 1/N sum U(x_i),

``W(r) = -|r|^b / b`` and ``U(x) = x^4 / 4``.  This path uses no potential
theory at all, which makes it an independent check on the solver.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .exceptions import DomainError


@dataclass(frozen=True)
class ParticleSystem:
    positions: np.ndarray
    b: float
    step: float = 0.1
    iterations: int = 0
    seed: int | None = None

    def __post_init__(self) -> None:
        x = np.asarray(self.positions, dtype=np.float64)
        if x.ndim != 1 or x.size < 2:
            raise DomainError("need at least two particles")
        if not np.all(np.isfinite(x)):
            raise DomainError("particle positions must be finite")
        if not 1.0 <= self.b <= 2.0:
            raise DomainError(f"b must lie in [1, 2], got {self.b}")
        object.__setattr__(self, "positions", x)

    @property
    def N(self) -> int:
        return int(self.positions.size)


def initial_positions(N: int, seed: int | None = None, jitter: float = 0.0, mirrored: bool = False,
                      half_width: float = 1.2) -> np.ndarray:
    """Equispaced points on ``[-half_width, half_width]``, optionally jittered.

    Jitter is a fraction of the spacing drawn from a seeded generator; with
    ``mirrored`` the left half is the exact reflection of the right half.
    """
    if N < 2:
        raise DomainError("need at least two particles")
    x = np.linspace(-half_width, half_width, N)
    if jitter > 0.0:
        h = 2.0 * half_width / (N - 1)
        x = x + jitter * h * np.random.default_rng(seed).uniform(-0.5, 0.5, N)
    if mirrored:
        x = _mirror(x[N // 2:], N)
    return np.sort(x)


def random_positions(N: int, seed: int, half_width: float = 2.0, mirrored: bool = True) -> np.ndarray:
    """Uniform random positions on ``[-half_width, half_width]``."""
    rng = np.random.default_rng(seed)
    if not mirrored:
        return np.sort(rng.uniform(-half_width, half_width, N))
    return np.sort(_mirror(rng.uniform(0.0, half_width, (N + 1) // 2), N))


def _mirror(right: np.ndarray, N: int) -> np.ndarray:
    right = np.abs(np.asarray(right, dtype=np.float64))
    if N % 2 == 0:
        return np.concatenate([-right, right])
    return np.concatenate([-right[1:], [0.0], right[1:]])


def discrete_energy(ps: ParticleSystem | np.ndarray, b: float | None = None) -> float:
    x, b = (ps.positions, ps.b) if isinstance(ps, ParticleSystem) else (np.asarray(ps, dtype=np.float64), float(b))
    N = x.size
    return _kernels.pair_energy(x, b) / (2.0 * N * N) + float(np.mean(0.25 * x**4))


def energy_gradient(x: np.ndarray, b: float) -> np.ndarray:
    """``N * dE_N/dx_i``: the force on particle ``i`` in mean-field units."""
    return _kernels.pair_gradient(x, b) / x.size + x**3


def _energy_and_gradient(x: np.ndarray, b: float) -> tuple[float, np.ndarray]:
    N = x.size
    pair, grad = _kernels.pair_energy_gradient(x, b)
    return pair / (2.0 * N * N) + float(np.mean(0.25 * x**4)), grad / N + x**3


def descend(ps: ParticleSystem, iters: int = 5000, gtol: float = 1e-6, slack: float = 1e-14) -> ParticleSystem:
    """Adaptive-step gradient descent, stopped when ``max |N dE/dx_i| < gtol``.

    A trial step that raises the energy by more than ``slack`` is rejected
    and the step halved; accepted steps grow the step by 10%.
    """
    x = ps.positions.copy()
    b = ps.b
    step = ps.step
    energy, grad = _energy_and_gradient(x, b)
    done = 0
    while done < iters and float(np.max(np.abs(grad))) >= gtol:
        trial = x - step * grad
        e_trial, g_trial = _energy_and_gradient(trial, b)
        if e_trial > energy + slack:
            step *= 0.5
            if step < 1e-16:
                break
            continue
        x, energy, grad = trial, e_trial, g_trial
        step *= 1.1
        done += 1
    return replace(ps, positions=x, step=step, iterations=ps.iterations + done)


def empirical_support(positions: np.ndarray) -> tuple[float, float]:
    """``(min |x_i|, max |x_i|)``: inner and outer radius of a symmetric cloud."""
    a = np.abs(np.asarray(positions, dtype=np.float64))
    return float(a.min()), float(a.max())


def continuum_energy(res) -> float:
    """Energy of an assembled minimizer.

    On the support ``cal W * rho + cal U = C0``, so the energy reduces to
    ``C0/2 + (1/2) int x^4/4 drho``.
    """
    moment = sum(pc.integrate(lambda x: 0.25 * x**4) for pc in res.rho.pieces)
    return 0.5 * res.C0 + 0.5 * moment


def quantile_sample(rho, N: int, grid: int = 20001) -> np.ndarray:
    """Deterministic sample ``x_i = F^{-1}((i + 1/2)/N)`` of a positive measure."""
    pts, cdf = [], []
    acc = 0.0
    for pc in rho.pieces:
        iv = pc.interval
        # integrate the density in the edge-stretched variable x = c + h*sin(theta)
        th = np.linspace(-0.5 * np.pi, 0.5 * np.pi, grid)
        x = iv.center + iv.half * np.sin(th)
        dens = pc.smooth(x) * (iv.half * np.cos(th)) ** (1.0 + 2.0 * pc.edge_exponent)
        seg = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(th))])
        pts.append(x)
        cdf.append(acc + seg)
        acc += seg[-1]
    xs = np.concatenate(pts)
    cs = np.concatenate(cdf) / acc
    return np.interp((np.arange(N) + 0.5) / N, cs, xs)
