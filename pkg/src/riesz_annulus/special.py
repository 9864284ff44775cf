"""Closed-form measures and constants for the Riesz kernel ``|x|^{-s}``."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import DomainError
from .measures import DEFAULT_NODES, EdgeDensity, Interval, SignedMeasure, _check_s


@dataclass(frozen=True)
class RieszParams:
    """Exponents of the reduced problem: ``b = 2 - s`` and ``U(x) = -u_coeff * x^2``."""

    s: float

    def __post_init__(self) -> None:
        _check_s(self.s)

    @classmethod
    def from_b(cls, b: float) -> "RieszParams":
        if not 1.0 < b < 2.0:
            raise DomainError(f"b must lie in (1, 2), got {b}")
        return cls(2.0 - b)

    @property
    def b(self) -> float:
        return 2.0 - self.s

    @property
    def u_coeff(self) -> float:
        return 3.0 / (1.0 - self.s)


def gamma_fn(x: float) -> float:
    """Gamma function for positive arguments."""
    if not x > 0.0:
        raise DomainError(f"gamma_fn needs a positive argument, got {x}")
    return math.gamma(x)


def log_beta(a: float, b: float) -> float:
    if not (a > 0.0 and b > 0.0):
        raise DomainError(f"beta needs positive arguments, got ({a}, {b})")
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def beta_fn(a: float, b: float) -> float:
    return math.exp(log_beta(a, b))


def equilibrium_constant(s: float) -> float:
    """``Gamma(1 + s) / Gamma((1 + s)/2)^2``, the density constant on a unit-length interval."""
    return math.exp(math.lgamma(1.0 + s) - 2.0 * math.lgamma(0.5 * (1.0 + s)))


def equilibrium_interval(a: float, b: float, s: float, n: int = DEFAULT_NODES) -> EdgeDensity:
    """Equilibrium probability measure of ``[a, b]``; its smooth factor is constant."""
    _check_s(s)
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    level = (b - a) ** (-s) * equilibrium_constant(s)
    return EdgeDensity(Interval(a, b), s, np.full(int(n), level))


def equilibrium_potential_constant(a: float, b: float, s: float) -> float:
    """The constant value of ``W * omega_{a,b}`` on ``[a, b]``."""
    _check_s(s)
    return (b - a) ** (-s) * equilibrium_constant(s) * math.pi / math.cos(0.5 * math.pi * s)


def balayage_point_interval(y: float, a: float, b: float, s: float, n: int = DEFAULT_NODES) -> EdgeDensity:
    """Balayage of the unit point mass at ``y`` onto ``[a, b]``.

    The smooth factor has a pole at ``y``; the node count is raised as
    ``y`` approaches the interval so that the interpolant stays accurate.
    """
    _check_s(s)
    if not a < b:
        raise DomainError(f"need a < b, got [{a}, {b}]")
    if a <= y <= b:
        raise DomainError(f"point {y} lies in [{a}, {b}]")
    t0 = abs(Interval(a, b).to_reference(y))
    n = max(int(n), min(512, int(math.ceil(34.0 / math.log(t0 + math.sqrt(t0 * t0 - 1.0))))))
    lead = math.cos(0.5 * math.pi * s) / math.pi * ((b - y) * (a - y)) ** (0.5 * (1.0 - s))
    return EdgeDensity.from_function(Interval(a, b), s, lambda x: lead / np.abs(x - y), n)


def mu0_constants(s: float) -> tuple[float, float]:
    _check_s(s)
    c01 = 3.0 / (s * (1.0 - s) * math.gamma(0.5 * (1.0 - s)) * math.gamma(0.5 * (1.0 + s)))
    return c01, 2.0 * c01 / (1.0 + s)


def mu0_sign_change(s: float) -> float:
    """Zero of ``mu_0`` on (0, 1).

    The smooth factor ``C01 * (1 - 2/(1+s) * (1 - x^2))`` vanishes where
    ``x^2 = (1 - s)/2``.
    """
    _check_s(s)
    return math.sqrt(0.5 * (1.0 - s))


def mu0_exact(s: float, n: int = DEFAULT_NODES) -> SignedMeasure:
    """Signed steady state on ``[-1, 1]`` with ``V[mu_0] = 0`` there.

    Relative to the edge weight the smooth factor is the quadratic
    ``C01 * (1 - 2/(1+s) * (1 - x^2))``.
    """
    c01, c02 = mu0_constants(s)
    piece = EdgeDensity.from_function(Interval(-1.0, 1.0), s, lambda x: c01 - c02 * (1.0 - x**2), n)
    return SignedMeasure.even(piece, {"lambda": 0.0})


def kelvin_image(x, X: float):
    """Inversion ``x* = 1/(x - X) + X``."""
    return 1.0 / (np.asarray(x, dtype=np.float64) - X) + X


def kelvin_point_balayage(X: float, K: Sequence[Interval], s: float, cfg=None) -> SignedMeasure:
    """Balayage of the point mass at ``X`` onto ``K`` through the Kelvin transform.

    The equilibrium measure of the image set ``K*`` is computed numerically and
    pulled back: on an interval ``[a, b]`` of ``K`` the smooth factor is
    ``u*(x*) * ((a - X)(b - X))^{(1-s)/2} / (C0 |x - X|)``.
    """
    from .balayage import SolveConfig, equilibrium_measure

    _check_s(s)
    cfg = cfg or SolveConfig()
    K = sorted(K, key=lambda iv: iv.a)
    for iv in K:
        if iv.a <= X <= iv.b:
            raise DomainError(f"point {X} lies in the target set")
    images = [Interval(float(kelvin_image(iv.b, X)), float(kelvin_image(iv.a, X))) for iv in K]
    rho_eq, c0 = equilibrium_measure(images, s, cfg)
    by_interval = {(round(pc.interval.a, 14), round(pc.interval.b, 14)): pc for pc in rho_eq.pieces}
    pieces = []
    for iv, img in zip(K, images):
        star = by_interval[(round(img.a, 14), round(img.b, 14))]
        scale = ((iv.a - X) * (iv.b - X)) ** (0.5 * (1.0 - s)) / c0

        def smooth(x, star=star, scale=scale):
            return star.smooth_series(kelvin_image(x, X)) * scale / np.abs(x - X)

        pieces.append(EdgeDensity.from_function(iv, s, smooth, cfg.n_nodes))
    symmetric = X == 0.0 and all(abs(p.interval.a + q.interval.b) < 1e-14 for p, q in zip(pieces, reversed(pieces)))
    if symmetric:
        # enforce exact mirroring of node values
        right = pieces[-1]
        return SignedMeasure.even(right, {"kelvin_center": X})
    return SignedMeasure(tuple(pieces), s, False, {"kelvin_center": X})
