import subprocess
import sys

import numpy as np
import pytest

from ionjc import _kernels
from ionjc import _kernels_py as kpy

cy = pytest.importorskip("ionjc._kernels_cy")


def test_backend_is_compiled_here():
    assert _kernels.BACKEND == "cython"


def test_bessel_orders_agree_with_scipy():
    x = np.concatenate(
        [
            np.array([0.0, 1e-12, 1e-9, 1e-7, 1e-4]),
            np.geomspace(1e-3, 900.0, 500),
        ]
    )
    a = kpy.bessel_orders(64, x)
    b = cy.bessel_orders(64, x)
    assert a.shape == b.shape == (65, len(x))
    assert np.max(np.abs(a - b)) < 1e-12


def test_contract_table_agrees(rng):
    lam = rng.normal(size=(37, 96))
    zg = rng.normal(size=96)
    jslice = rng.normal(size=(53, 96))
    a = kpy.contract_table(lam, zg, jslice)
    b = cy.contract_table(lam, zg, jslice)
    assert a.shape == b.shape == (37, 53)
    assert np.max(np.abs(a - b)) < 1e-12 * max(1.0, np.max(np.abs(a)))


def test_grid_values_identical_across_backends(rng):
    # the full quasiprobability pipeline must not depend on the backend
    code = (
        "import numpy as np\n"
        "from ionjc.quasiprob import GridSpec, p_omega_grid\n"
        "from ionjc import kernel_backend\n"
        "rng = np.random.default_rng(7)\n"
        "a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))\n"
        "rho = a @ a.conj().T\n"
        "rho /= np.trace(rho).real\n"
        "g = p_omega_grid(rho, GridSpec.square(2.5, 17), 1.2, use_cache=False)\n"
        "print(kernel_backend)\n"
        "np.save('grid_{}.npy'.format(kernel_backend), g.values)\n"
    )
    import os
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        for env_flag in ("0", "1"):
            env = dict(os.environ, IONJC_PURE_PYTHON=env_flag)
            out = subprocess.run(
                [sys.executable, "-c", code], cwd=tmp, env=env,
                capture_output=True, text=True, check=True,
            )
            expected = "python" if env_flag == "1" else "cython"
            assert out.stdout.strip() == expected
        a = np.load(f"{tmp}/grid_cython.npy")
        b = np.load(f"{tmp}/grid_python.npy")
        assert np.max(np.abs(a - b)) < 1e-11 * np.max(np.abs(a))
