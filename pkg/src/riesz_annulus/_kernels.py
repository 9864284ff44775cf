"""Hot inner loops, compiled with numba when available.

Every kernel has a pure-numpy twin with identical semantics.  The numba
versions are used unless ``RIESZ_ANNULUS_NO_JIT=1`` is set in the
environment (or numba cannot be imported).  ``BACKEND`` names the active
implementation; ``benchmarks/bench_backends.py`` times both.
"""
from __future__ import annotations

import os
import warnings

import numpy as np

_DISABLED = os.environ.get("RIESZ_ANNULUS_NO_JIT", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    import numba

    # numba probes for TBB and warns when the system copy is too old; OpenMP is used instead
    warnings.filterwarnings("ignore", message="The TBB threading layer", category=numba.NumbaWarning)
except ImportError:  # pragma: no cover - exercised via env flag in a subprocess
    numba = None


# ---------------------------------------------------------------------------
# numpy implementations


def gegenbauer_table_numpy(alpha: float, n: int, t: np.ndarray) -> np.ndarray:
    """Rows ``C_j^{(alpha)}(t)`` for ``j = 0..n-1`` by the three-term recurrence."""
    t = np.asarray(t, dtype=np.float64)
    out = np.empty((n, t.size))
    out[0] = 1.0
    if n > 1:
        out[1] = 2.0 * alpha * t
    for j in range(1, n - 1):
        out[j + 1] = (2.0 * (j + alpha) * t * out[j] - (j + 2.0 * alpha - 1.0) * out[j - 1]) / (j + 1.0)
    return out


def gegenbauer_series_numpy(alpha: float, coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    n = coeffs.size
    prev = np.ones_like(t)
    total = coeffs[0] * prev
    if n == 1:
        return total
    cur = 2.0 * alpha * t
    total = total + coeffs[1] * cur
    for j in range(1, n - 1):
        nxt = (2.0 * (j + alpha) * t * cur - (j + 2.0 * alpha - 1.0) * prev) / (j + 1.0)
        total = total + coeffs[j + 1] * nxt
        prev, cur = cur, nxt
    return total


def pair_gradient_numpy(x: np.ndarray, b: float) -> np.ndarray:
    """``sum_j W'(x_i - x_j)`` with ``W(r) = -|r|^b / b``."""
    r = x[:, None] - x[None, :]
    return np.sum(-np.sign(r) * np.abs(r) ** (b - 1.0), axis=1)


def pair_energy_numpy(x: np.ndarray, b: float) -> float:
    """``sum_{i != j} W(x_i - x_j)``; the diagonal contributes W(0) = 0."""
    r = np.abs(x[:, None] - x[None, :])
    return float(np.sum(np.sum(-(r**b) / b, axis=1)))


def pair_energy_gradient_numpy(x: np.ndarray, b: float) -> tuple[float, np.ndarray]:
    """Both pair sums from one power evaluation: ``|r|^b = |r| * |r|^(b-1)``."""
    r = x[:, None] - x[None, :]
    a = np.abs(r)
    p = a ** (b - 1.0)
    return float(np.sum(np.sum(-(a * p) / b, axis=1))), np.sum(-np.sign(r) * p, axis=1)


# ---------------------------------------------------------------------------
# numba implementations

if numba is not None:

    @numba.njit(cache=True, nogil=True)
    def _gegenbauer_table_jit(alpha, n, t):
        m = t.size
        out = np.empty((n, m))
        for i in range(m):
            out[0, i] = 1.0
        if n > 1:
            for i in range(m):
                out[1, i] = 2.0 * alpha * t[i]
        for j in range(1, n - 1):
            c1 = 2.0 * (j + alpha) / (j + 1.0)
            c2 = (j + 2.0 * alpha - 1.0) / (j + 1.0)
            for i in range(m):
                out[j + 1, i] = c1 * t[i] * out[j, i] - c2 * out[j - 1, i]
        return out

    @numba.njit(cache=True, nogil=True)
    def _gegenbauer_series_jit(alpha, coeffs, t):
        n = coeffs.size
        m = t.size
        total = np.empty(m)
        prev = np.ones(m)
        cur = np.empty(m)
        for i in range(m):
            total[i] = coeffs[0]
        if n == 1:
            return total
        for i in range(m):
            cur[i] = 2.0 * alpha * t[i]
            total[i] += coeffs[1] * cur[i]
        for j in range(1, n - 1):
            c1 = 2.0 * (j + alpha) / (j + 1.0)
            c2 = (j + 2.0 * alpha - 1.0) / (j + 1.0)
            cj = coeffs[j + 1]
            for i in range(m):
                nxt = c1 * t[i] * cur[i] - c2 * prev[i]
                total[i] += cj * nxt
                prev[i] = cur[i]
                cur[i] = nxt
        return total

    @numba.njit(cache=True, nogil=True, parallel=True)
    def _pair_gradient_jit(x, b):
        n = x.size
        out = np.zeros(n)
        for i in numba.prange(n):
            acc = 0.0
            xi = x[i]
            for j in range(n):
                r = xi - x[j]
                if r > 0.0:
                    acc -= r ** (b - 1.0)
                elif r < 0.0:
                    acc += (-r) ** (b - 1.0)
            out[i] = acc
        return out

    @numba.njit(cache=True, nogil=True, parallel=True)
    def _pair_energy_rows_jit(x, b):
        n = x.size
        rows = np.zeros(n)
        for i in numba.prange(n):
            acc = 0.0
            for j in range(n):
                acc -= abs(x[i] - x[j]) ** b / b
            rows[i] = acc
        return rows

    @numba.njit(cache=True, nogil=True, parallel=True)
    def _pair_energy_gradient_jit(x, b):
        # one power per unordered pair, stored in the strict upper triangle;
        # the row sums below then run in a fixed order whatever the thread count
        n = x.size
        pw = np.zeros((n, n))
        for i in numba.prange(n):
            xi = x[i]
            for j in range(i + 1, n):
                r = xi - x[j]
                pw[i, j] = abs(r) ** (b - 1.0)
        rows = np.zeros(n)
        grad = np.zeros(n)
        for i in numba.prange(n):
            e = 0.0
            g = 0.0
            xi = x[i]
            for j in range(n):
                if j == i:
                    continue
                p = pw[i, j] if j > i else pw[j, i]
                r = xi - x[j]
                e -= abs(r) * p / b
                if r > 0.0:
                    g -= p
                elif r < 0.0:
                    g += p
            rows[i] = e
            grad[i] = g
        return rows, grad

    def gegenbauer_table(alpha: float, n: int, t: np.ndarray) -> np.ndarray:
        return _gegenbauer_table_jit(float(alpha), int(n), np.ascontiguousarray(t, dtype=np.float64).ravel())

    def gegenbauer_series(alpha: float, coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        flat = _gegenbauer_series_jit(float(alpha), np.ascontiguousarray(coeffs, dtype=np.float64), np.ascontiguousarray(t).ravel())
        return flat.reshape(t.shape)

    def pair_gradient(x: np.ndarray, b: float) -> np.ndarray:
        return _pair_gradient_jit(np.ascontiguousarray(x, dtype=np.float64), float(b))

    def pair_energy(x: np.ndarray, b: float) -> float:
        # row sums are order-fixed; the final reduction is numpy's pairwise sum
        return float(np.sum(_pair_energy_rows_jit(np.ascontiguousarray(x, dtype=np.float64), float(b))))

    def pair_energy_gradient(x: np.ndarray, b: float) -> tuple[float, np.ndarray]:
        rows, grad = _pair_energy_gradient_jit(np.ascontiguousarray(x, dtype=np.float64), float(b))
        return float(np.sum(rows)), grad

    BACKEND = "numba"

else:
    gegenbauer_table = gegenbauer_table_numpy
    gegenbauer_series = gegenbauer_series_numpy
    pair_gradient = pair_gradient_numpy
    pair_energy = pair_energy_numpy
    pair_energy_gradient = pair_energy_gradient_numpy
    BACKEND = "numpy"


def set_threads(count: int | None) -> None:
    """Cap numba's thread pool; a no-op for the numpy backend."""
    if numba is None or not count:
        return
    numba.set_num_threads(max(1, min(int(count), numba.config.NUMBA_NUM_THREADS)))
