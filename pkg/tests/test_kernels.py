import json
import os
import subprocess
import sys

import numpy as np
import pytest

from riesz_annulus import _kernels as K

rng = np.random.default_rng(0)


@pytest.mark.parametrize("alpha", [0.15, 0.35, 0.5])
def test_gegenbauer_parity(alpha):
    t = rng.uniform(-1, 1, 50)
    coeffs = rng.normal(size=20)
    assert np.allclose(K.gegenbauer_table(alpha, 20, t), K.gegenbauer_table_numpy(alpha, 20, t), rtol=1e-13, atol=1e-13)
    assert np.allclose(K.gegenbauer_series(alpha, coeffs, t), K.gegenbauer_series_numpy(alpha, coeffs, t),
                       rtol=1e-12, atol=1e-12)


def test_gegenbauer_known_values():
    # C_1^a(t) = 2 a t, C_2^a(t) = 2 a (a + 1) t^2 - a
    t = np.array([-0.4, 0.0, 0.7])
    a = 0.35
    table = K.gegenbauer_table(a, 3, t)
    assert np.allclose(table[0], 1.0)
    assert np.allclose(table[1], 2 * a * t)
    assert np.allclose(table[2], 2 * a * (a + 1) * t**2 - a)


@pytest.mark.parametrize("b", [1.0, 1.3, 2.0])
def test_pair_kernel_parity(b):
    x = rng.uniform(-1.5, 1.5, 37)
    assert K.pair_energy(x, b) == pytest.approx(K.pair_energy_numpy(x, b), rel=1e-13)
    assert np.allclose(K.pair_gradient(x, b), K.pair_gradient_numpy(x, b), rtol=1e-12, atol=1e-13)
    e, g = K.pair_energy_gradient(x, b)
    e0, g0 = K.pair_energy_gradient_numpy(x, b)
    assert e == pytest.approx(e0, rel=1e-13)
    assert np.allclose(g, g0, rtol=1e-12, atol=1e-13)


def test_pair_kernel_coincident_points():
    x = np.array([0.2, 0.2, -0.5])
    assert np.all(np.isfinite(K.pair_gradient(x, 1.5)))


def test_numpy_backend_in_subprocess():
    code = (
        "import json, numpy as np\n"
        "from riesz_annulus import _kernels\n"
        "from riesz_annulus.balayage import solve_mu_lambda\n"
        "mu = solve_mu_lambda(0.4, 0.7)\n"
        "print(json.dumps({'backend': _kernels.BACKEND, 'u': mu.right.smooth_factor.tolist()}))\n"
    )
    env = dict(os.environ, RIESZ_ANNULUS_NO_JIT="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    data = json.loads(out.stdout.strip().splitlines()[-1])
    assert data["backend"] == "numpy"
    from riesz_annulus.balayage import solve_mu_lambda

    here = solve_mu_lambda(0.4, 0.7).right.smooth_factor
    assert np.allclose(data["u"], here, rtol=1e-10, atol=1e-12)
