"""Kernel backend selection.

The compiled extension is preferred when it imported cleanly; setting the
environment variable ``IONJC_PURE_PYTHON=1`` (before import) forces the
NumPy fallback. ``BACKEND`` records which implementation is live.
"""

from __future__ import annotations

import os

if os.environ.get("IONJC_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _kernels_cy as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "python"

bessel_orders = _impl.bessel_orders
contract_table = _impl.contract_table
