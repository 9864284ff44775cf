"""Edge-weighted measures on finite unions of intervals.

A piece of a measure on ``[a, b]`` is stored as a smooth factor ``u`` sampled
at Gauss-Jacobi nodes, with density ``u(x) * ((b - x)(x - a))**e`` and the
universal edge exponent ``e = -(1 - s)/2``.  Riesz potentials are evaluated
in reference coordinates ``x = c + h*t``; for the kernel ``|x|^{-s}`` the
scale factor drops out entirely.

Two evaluation routes exist for points on the support:

* ``spectral`` -- the kernel ``|t - tau|^{-s}`` is diagonal on Gegenbauer
  polynomials ``C_j^{(s/2)}`` under the edge weight, with eigenvalues
  ``pi * Gamma(j + s) / (cos(pi s / 2) * Gamma(s) * j!)``.
* ``quadrature`` -- a composite Gauss-Jacobi rule that absorbs every
  algebraic singularity (both edges and the evaluation point) into the
  weights of terminal panels and grades geometrically toward any nearby
  singularity.

Off the support only the quadrature route applies.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from . import _kernels
from .exceptions import DomainError

DEFAULT_NODES = 64
PANEL_ORDER = 24
# beyond |t| = FAR_FIELD a single shared Jacobi rule resolves the kernel
FAR_FIELD = 1.5


def _check_s(s: float) -> float:
    s = float(s)
    if not 0.0 < s < 1.0:
        raise DomainError(f"Riesz exponent must lie in (0, 1), got {s}")
    return s


def edge_exponent(s: float) -> float:
    return -(1.0 - s) / 2.0


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[a, b]`` with ``a < b``."""

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.a < self.b:
            raise DomainError(f"invalid interval [{self.a}, {self.b}]")

    @property
    def center(self) -> float:
        return 0.5 * (self.a + self.b)

    @property
    def half(self) -> float:
        return 0.5 * (self.b - self.a)

    @property
    def length(self) -> float:
        return self.b - self.a

    def to_reference(self, x):
        return (np.asarray(x, dtype=np.float64) - self.center) / self.half

    def from_reference(self, t):
        return self.center + self.half * np.asarray(t, dtype=np.float64)

    def contains(self, x):
        x = np.asarray(x)
        return (x >= self.a) & (x <= self.b)

    def mirrored(self) -> "Interval":
        return Interval(-self.b, -self.a)

    def scaled(self, factor: float) -> "Interval":
        return Interval(self.a * factor, self.b * factor)


# ---------------------------------------------------------------------------
# Quadrature


@lru_cache(maxsize=512)
def _jacobi_reference(n: int, alpha: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Ascending nodes and weights on [-1, 1] for ``(1 - t)^alpha (1 + t)^beta``."""
    if alpha == 0.0 and beta == 0.0:
        x, w = roots_legendre(n)
    else:
        x, w = roots_jacobi(n, alpha, beta)
    order = np.argsort(x)
    x = np.ascontiguousarray(x[order])
    w = np.ascontiguousarray(w[order])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_jacobi(n: int, alpha: float, beta: float, interval: Interval) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Jacobi rule on ``interval`` for the weight ``(b - x)^alpha (x - a)^beta``.

    The rule integrates ``p(x) * weight(x)`` exactly for polynomials ``p`` of
    degree at most ``2n - 1``.
    """
    if int(n) != n or n < 2:
        raise DomainError(f"need at least two nodes, got {n}")
    if not (alpha > -1.0 and beta > -1.0):
        raise DomainError(f"Jacobi exponents must exceed -1, got ({alpha}, {beta})")
    t, w = _jacobi_reference(int(n), float(alpha), float(beta))
    h = interval.half
    return interval.from_reference(t), w * h ** (1.0 + alpha + beta)


def riesz_eigenvalues(s: float, n: int) -> np.ndarray:
    """Eigenvalues of ``|t - tau|^{-s}`` on ``C_j^{(s/2)}`` with the edge weight."""
    j = np.arange(n, dtype=np.float64)
    logs = np.array([math.lgamma(k + s) - math.lgamma(s) - math.lgamma(k + 1.0) for k in j])
    return math.pi / math.cos(0.5 * math.pi * s) * np.exp(logs)


def _terminal_panel(end: float, length: float, direction: float, alpha: float, m: int):
    """Rule for ``int |tau - end|^alpha g(tau)`` over a panel touching ``end``."""
    if direction > 0:
        sig, w = _jacobi_reference(m, 0.0, float(alpha))
        tau = end + 0.5 * length * (1.0 + sig)
    else:
        sig, w = _jacobi_reference(m, float(alpha), 0.0)
        tau = end - 0.5 * length * (1.0 - sig)
    return tau, w * (0.5 * length) ** (alpha + 1.0)


def _legendre_panel(lo: float, hi: float, m: int):
    sig, w = _jacobi_reference(m, 0.0, 0.0)
    half = 0.5 * (hi - lo)
    return 0.5 * (hi + lo) + half * sig, w * half


def _panel_order(length: float, order: int, n_poly: int) -> int:
    return order + int(math.ceil(0.25 * n_poly * min(length, 2.0)))


def singular_rule(t: float, p: float, e: float, order: int = PANEL_ORDER, n_poly: int = DEFAULT_NODES):
    """Nodes and weights for ``int_{-1}^{1} |t - tau|^p (1 - tau^2)^e g(tau) dtau``.

    ``g`` is assumed smooth on [-1, 1].  Valid for any real ``t``; when ``t``
    lies in (-1, 1) it becomes a breakpoint with exponent ``p``.
    """
    t = float(t)
    if t == 1.0:
        factors = [(-1.0, e), (1.0, e + p)]
    elif t == -1.0:
        factors = [(-1.0, e + p), (1.0, e)]
    else:
        factors = [(-1.0, e), (1.0, e), (t, p)]
    breaks = sorted(q for q, _ in factors if -1.0 <= q <= 1.0)
    points = np.array([q for q, _ in factors])
    expo = np.array([a for _, a in factors])
    exp_at = dict(factors)

    all_tau: list[np.ndarray] = []
    all_w: list[np.ndarray] = []
    for left, right in zip(breaks[:-1], breaks[1:]):
        mid = 0.5 * (left + right)
        for end, far in ((left, mid), (right, mid)):
            span = abs(far - end)
            direction = 1.0 if far > end else -1.0
            others = points[points != end]
            d_near = float(np.min(np.abs(others - end)))
            alpha = exp_at[end]
            cuts = [0.0]
            if d_near < span:
                r = d_near
                while r < span:
                    cuts.append(r)
                    r *= 2.0
            cuts.append(span)
            for k in range(len(cuts) - 1):
                lo_d, hi_d = cuts[k], cuts[k + 1]
                m = _panel_order(hi_d - lo_d, order, n_poly)
                if k == 0:
                    tau, w = _terminal_panel(end, hi_d, direction, alpha, m)
                    keep = points != end
                    factor = np.prod(np.abs(tau[:, None] - points[keep][None, :]) ** expo[keep][None, :], axis=1)
                else:
                    a_, b_ = sorted((end + direction * lo_d, end + direction * hi_d))
                    tau, w = _legendre_panel(a_, b_, m)
                    factor = np.prod(np.abs(tau[:, None] - points[None, :]) ** expo[None, :], axis=1)
                all_tau.append(tau)
                all_w.append(w * factor)
    return np.concatenate(all_tau), np.concatenate(all_w)


def reference_basis(t, s: float, n: int, p: float | None = None, method: str = "spectral",
                    order: int = PANEL_ORDER) -> np.ndarray:
    """Matrix ``B[i, j] = int_{-1}^{1} |t_i - tau|^p (1 - tau^2)^e C_j^{(s/2)}(tau) dtau``.

    ``p`` defaults to the Riesz exponent ``-s``.  With ``method='spectral'``
    points with ``|t| <= 1`` use the exact eigen-relation (only for ``p = -s``).
    """
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    e = edge_exponent(s)
    alpha = 0.5 * s
    p = -s if p is None else float(p)
    out = np.empty((t.size, n))
    inside = np.abs(t) <= 1.0
    if method == "spectral" and p == -s:
        spec = inside
        if spec.any():
            out[spec] = (_kernels.gegenbauer_table(alpha, n, t[spec]) * riesz_eigenvalues(s, n)[:, None]).T
    elif method in ("spectral", "quadrature"):
        spec = np.zeros_like(inside)
    else:
        raise ValueError(f"unknown method {method!r}")
    far = np.abs(t) >= FAR_FIELD
    if far.any():
        tau, w = _jacobi_reference(n + order, e, e)
        table = _kernels.gegenbauer_table(alpha, n, tau)
        kern = np.abs(t[far][:, None] - tau[None, :]) ** p * w[None, :]
        out[far] = kern @ table.T
    for i in np.flatnonzero(~(spec | far)):
        tau, w = singular_rule(t[i], p, e, order=order, n_poly=n)
        out[i] = _kernels.gegenbauer_table(alpha, n, tau) @ w
    return out


# ---------------------------------------------------------------------------
# Measures


def _barycentric_weights(t: np.ndarray, w: np.ndarray) -> np.ndarray:
    # closed form for Gauss-Jacobi nodes, ascending order
    signs = np.where(np.arange(t.size) % 2 == 0, 1.0, -1.0)
    return signs * np.sqrt((1.0 - t**2) * w)


@dataclass(frozen=True, eq=False)
class EdgeDensity:
    """Measure piece ``u(x) * ((b - x)(x - a))^e`` on one interval.

    ``smooth_factor`` holds ``u`` at the Gauss-Jacobi nodes of the edge
    weight; ``u`` is recovered elsewhere by barycentric interpolation.
    """

    interval: Interval
    s: float
    smooth_factor: np.ndarray

    def __post_init__(self) -> None:
        _check_s(self.s)
        u = np.array(self.smooth_factor, dtype=np.float64).ravel()
        if u.size < 2 or not np.all(np.isfinite(u)):
            raise DomainError("smooth factor needs at least two finite node values")
        u.setflags(write=False)
        object.__setattr__(self, "smooth_factor", u)

    @classmethod
    def from_function(cls, interval: Interval, s: float, fn: Callable, n: int = DEFAULT_NODES) -> "EdgeDensity":
        t, _ = _jacobi_reference(int(n), edge_exponent(s), edge_exponent(s))
        return cls(interval, s, np.asarray(fn(interval.from_reference(t)), dtype=np.float64) * np.ones(int(n)))

    @classmethod
    def from_coefficients(cls, interval: Interval, s: float, coeffs: np.ndarray) -> "EdgeDensity":
        coeffs = np.asarray(coeffs, dtype=np.float64)
        t, _ = _jacobi_reference(coeffs.size, edge_exponent(s), edge_exponent(s))
        piece = cls(interval, s, _kernels.gegenbauer_series(0.5 * s, coeffs, t))
        piece.__dict__["coefficients"] = coeffs
        return piece

    @property
    def n(self) -> int:
        return self.smooth_factor.size

    @property
    def edge_exponent(self) -> float:
        return edge_exponent(self.s)

    @property
    def reference_rule(self) -> tuple[np.ndarray, np.ndarray]:
        return _jacobi_reference(self.n, self.edge_exponent, self.edge_exponent)

    @property
    def nodes(self) -> np.ndarray:
        return self.interval.from_reference(self.reference_rule[0])

    @property
    def weights(self) -> np.ndarray:
        # physical weights: h^{1+2e} = h^s times the reference weights
        return self.reference_rule[1] * self.interval.half**self.s

    @cached_property
    def coefficients(self) -> np.ndarray:
        """Gegenbauer ``C_j^{(s/2)}`` coefficients of ``u`` in reference coordinates."""
        t, w = self.reference_rule
        table = _kernels.gegenbauer_table(0.5 * self.s, self.n, t)
        norms = (table**2) @ w
        return (table @ (w * self.smooth_factor)) / norms

    def smooth(self, x) -> np.ndarray:
        """Barycentric interpolant of ``u`` at ``x``."""
        x = np.asarray(x, dtype=np.float64)
        t = self.interval.to_reference(x).ravel()
        nodes, w = self.reference_rule
        bw = _barycentric_weights(nodes, w)
        diff = t[:, None] - nodes[None, :]
        exact = diff == 0.0
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = bw[None, :] / diff
            val = (ratio @ self.smooth_factor) / ratio.sum(axis=1)
        hit = exact.any(axis=1)
        if hit.any():
            val[hit] = self.smooth_factor[np.argmax(exact[hit], axis=1)]
        return val.reshape(x.shape)

    def smooth_series(self, x) -> np.ndarray:
        """``u`` at ``x`` from the Gegenbauer coefficients (same polynomial)."""
        return _kernels.gegenbauer_series(0.5 * self.s, self.coefficients, self.interval.to_reference(x))

    def edge_weight(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        prod = (self.interval.b - x) * (x - self.interval.a)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(prod > 0.0, np.abs(prod) ** self.edge_exponent, 0.0)

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        inside = (x > self.interval.a) & (x < self.interval.b)
        return np.where(inside, self.smooth(np.clip(x, self.interval.a, self.interval.b)) * self.edge_weight(x), 0.0)

    def mass(self) -> float:
        return float(self.weights @ self.smooth_factor)

    def integrate(self, fn: Callable) -> float:
        """``int fn(x) dmu(x)`` by the node rule (exact for polynomial ``fn * u``)."""
        return float(self.weights @ (np.asarray(fn(self.nodes)) * self.smooth_factor))

    def kernel_integral(self, x, p: float | None = None, method: str = "spectral") -> np.ndarray:
        """``int |x - y|^p dmu(y)`` for the piece; ``p`` defaults to ``-s``."""
        x = np.asarray(x, dtype=np.float64)
        p = -self.s if p is None else float(p)
        t = self.interval.to_reference(x).ravel()
        basis = reference_basis(t, self.s, self.n, p=p, method=method)
        scale = self.interval.half ** (p + self.s)
        return (scale * (basis @ self.coefficients)).reshape(x.shape)

    def mirrored(self) -> "EdgeDensity":
        return EdgeDensity(self.interval.mirrored(), self.s, self.smooth_factor[::-1])

    def rescaled(self, length_factor: float, value_factor: float) -> "EdgeDensity":
        """Piece on the interval scaled by ``length_factor``, smooth factor times ``value_factor``."""
        return EdgeDensity(self.interval.scaled(length_factor), self.s, self.smooth_factor * value_factor)

    def resampled(self, n: int) -> "EdgeDensity":
        return EdgeDensity.from_function(self.interval, self.s, self.smooth_series, n)


@dataclass(frozen=True, eq=False)
class SignedMeasure:
    """Finite sum of edge-weighted pieces with disjoint interiors.

    With ``symmetric=True`` the pieces are either one interval symmetric
    about the origin or mirrored pairs, and potentials are evaluated as
    ``P(x) + P(-x)`` over the right-hand pieces so evenness is exact.
    """

    pieces: tuple
    s: float
    symmetric: bool = False
    info: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_s(self.s)
        pieces = tuple(sorted(self.pieces, key=lambda pc: pc.interval.a))
        if not pieces:
            raise DomainError("a measure needs at least one piece")
        for pc in pieces:
            if abs(pc.s - self.s) > 1e-15:
                raise DomainError("pieces disagree on the Riesz exponent")
        for left, right in zip(pieces[:-1], pieces[1:]):
            if right.interval.a < left.interval.b:
                raise DomainError("pieces must have disjoint interiors")
        object.__setattr__(self, "pieces", pieces)
        if self.symmetric:
            for pc, twin in zip(pieces, reversed(pieces)):
                if abs(pc.interval.a + twin.interval.b) > 1e-12 * max(1.0, abs(pc.interval.a)):
                    raise DomainError("symmetric measure needs mirrored supports")
                if pc.n != twin.n or not np.allclose(pc.smooth_factor, twin.smooth_factor[::-1], rtol=1e-12, atol=1e-300):
                    raise DomainError("symmetric measure needs mirrored smooth factors")

    @classmethod
    def even(cls, right: EdgeDensity, info: dict | None = None) -> "SignedMeasure":
        """Symmetric measure from a right-hand piece (or a centred one)."""
        if abs(right.interval.a + right.interval.b) <= 1e-15 * right.interval.length:
            return cls((right,), right.s, True, dict(info or {}))
        return cls((right.mirrored(), right), right.s, True, dict(info or {}))

    @property
    def intervals(self) -> list[Interval]:
        return [pc.interval for pc in self.pieces]

    @property
    def right(self) -> EdgeDensity:
        """The piece carrying the unknowns of a symmetric measure."""
        return self.pieces[-1]

    @property
    def inner_edge(self) -> float:
        """``lambda`` for ``K_{lambda,1}``-type supports (0 for a centred interval)."""
        return max(0.0, self.right.interval.a)

    def on_support(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape, dtype=bool)
        for iv in self.intervals:
            out |= iv.contains(x)
        return out

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        return sum(pc.density(x) for pc in self.pieces)

    def kernel_integral(self, x, p: float | None = None, method: str = "spectral") -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if self.symmetric and len(self.pieces) == 2:
            r = self.right
            return r.kernel_integral(x, p, method) + r.kernel_integral(-x, p, method)
        return sum(pc.kernel_integral(x, p, method) for pc in self.pieces)

    def scaled(self, factor: float) -> "SignedMeasure":
        return SignedMeasure(tuple(EdgeDensity(pc.interval, pc.s, pc.smooth_factor * factor) for pc in self.pieces),
                             self.s, self.symmetric, dict(self.info))


MeasureLike = "SignedMeasure | EdgeDensity"


def as_measure(mu) -> SignedMeasure:
    if isinstance(mu, SignedMeasure):
        return mu
    if isinstance(mu, EdgeDensity):
        iv = mu.interval
        sym = abs(iv.a + iv.b) <= 1e-15 * iv.length and np.allclose(mu.smooth_factor, mu.smooth_factor[::-1], rtol=1e-12, atol=0)
        return SignedMeasure((mu,), mu.s, bool(sym))
    raise TypeError(f"expected a measure, got {type(mu).__name__}")


def total_mass(mu) -> float:
    """Signed total mass by the node weights."""
    return float(sum(pc.mass() for pc in as_measure(mu).pieces))


def potential(mu, x, method: str = "spectral"):
    """Riesz potential ``(W * mu)(x)`` with ``W(x) = |x|^{-s}``."""
    out = as_measure(mu).kernel_integral(x, method=method)
    return float(out) if np.ndim(out) == 0 else out


def external_field(s: float, x):
    """``U(x) = -(3/(1-s)) x^2``."""
    return -3.0 / (1.0 - s) * np.asarray(x, dtype=np.float64) ** 2


def field_V(mu, x, method: str = "spectral"):
    """``V[mu](x) = (W * mu)(x) + U(x)``."""
    mu = as_measure(mu)
    out = mu.kernel_integral(x, method=method) + external_field(mu.s, x)
    return float(out) if np.ndim(out) == 0 else out


def field_V_second_derivative(mu, x):
    """``V[mu]''(x)`` for ``x`` off the support (the kernel is then smooth)."""
    mu = as_measure(mu)
    s = mu.s
    out = s * (s + 1.0) * mu.kernel_integral(x, p=-s - 2.0) - 6.0 / (1.0 - s)
    return float(out) if np.ndim(out) == 0 else out


def original_potential(rho, x, b: float | None = None):
    """``(cal W * rho)(x) + cal U(x)`` with ``cal W = -|x|^b / b`` and ``cal U = x^4 / 4``."""
    rho = as_measure(rho)
    bb = 2.0 - rho.s
    if b is not None and abs(b - bb) > 1e-12:
        raise DomainError(f"b = {b} is inconsistent with s = {rho.s}")
    x = np.asarray(x, dtype=np.float64)
    out = -rho.kernel_integral(x, p=bb) / bb + 0.25 * x**4
    return float(out) if np.ndim(out) == 0 else out


def chebyshev_points(interval: Interval, count: int) -> np.ndarray:
    """First-kind Chebyshev points mapped into the open interval."""
    k = np.arange(count)
    return interval.from_reference(-np.cos(np.pi * (k + 0.5) / count))
