"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the NumPy fallback.
Set ``PIPEFLOW_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("PIPEFLOW_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py


def _prep(vertices, cells):
    return (
        np.ascontiguousarray(vertices, dtype=np.float64),
        np.ascontiguousarray(cells, dtype=np.int64),
    )


def element_geometry(vertices, triangles, impl=None):
    """Signed areas ``(T,)`` and barycentric gradients ``(T, 3, 2)``."""
    return (impl or _impl).element_geometry(*_prep(vertices, triangles))


def stiffness_coo(vertices, triangles, impl=None):
    return (impl or _impl).stiffness_coo(*_prep(vertices, triangles))


def mass_coo(vertices, triangles, impl=None):
    return (impl or _impl).mass_coo(*_prep(vertices, triangles))


def edge_mass_coo(vertices, edges, impl=None):
    return (impl or _impl).edge_mass_coo(*_prep(vertices, edges))


def envelope_rk4(zeta, y0, C, m, impl=None):
    zeta = np.ascontiguousarray(zeta, dtype=np.float64)
    return (impl or _impl).envelope_rk4(zeta, float(y0), float(C), float(m))
