"""Pure-NumPy implementations of the hot quasiprobability kernels.

Same contracts as the compiled twin in ``_kernels_cy.pyx``; selected as the
fallback by ``ionjc._kernels`` when the extension is unavailable or
disabled.
"""

from __future__ import annotations

import numpy as np
import scipy.special as _sps


def bessel_orders(d_max: int, x: np.ndarray) -> np.ndarray:
    """J_d(x) for all orders d = 0..d_max; x is a 1-D array with x >= 0.

    Returns an array of shape (d_max + 1, len(x)).
    """
    x = np.asarray(x, dtype=np.float64)
    d = np.arange(d_max + 1)
    return _sps.jv(d[:, None], x[None, :])


def contract_table(lam: np.ndarray, zg: np.ndarray, jslice: np.ndarray) -> np.ndarray:
    """Quadrature contraction out[p, r] = sum_q lam[p, q] * zg[q] * jslice[r, q]."""
    return (lam * zg) @ jslice.T
