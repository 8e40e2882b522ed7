"""Pure-Python/NumPy fallback for the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def element_geometry(vertices, triangles):
    p = vertices[triangles]  # (T, 3, 2)
    x0, y0 = p[:, 0, 0], p[:, 0, 1]
    x1, y1 = p[:, 1, 0], p[:, 1, 1]
    x2, y2 = p[:, 2, 0], p[:, 2, 1]
    twice = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
    safe = np.where(twice == 0.0, 1.0, twice)
    grads = np.empty((len(triangles), 3, 2))
    grads[:, 0, 0] = (y1 - y2) / safe
    grads[:, 0, 1] = (x2 - x1) / safe
    grads[:, 1, 0] = (y2 - y0) / safe
    grads[:, 1, 1] = (x0 - x2) / safe
    grads[:, 2, 0] = (y0 - y1) / safe
    grads[:, 2, 1] = (x1 - x0) / safe
    return 0.5 * twice, grads


def _pairs(cells, k):
    rows = np.repeat(cells, k, axis=1).ravel()
    cols = np.tile(cells, (1, k)).ravel()
    return rows.astype(np.int64), cols.astype(np.int64)


def stiffness_coo(vertices, triangles):
    areas, grads = element_geometry(vertices, triangles)
    local = areas[:, None, None] * np.einsum("tid,tjd->tij", grads, grads)
    rows, cols = _pairs(triangles, 3)
    return rows, cols, local.ravel()


def mass_coo(vertices, triangles):
    areas, _ = element_geometry(vertices, triangles)
    ref = (np.ones((3, 3)) + np.eye(3)) / 12.0
    rows, cols = _pairs(triangles, 3)
    return rows, cols, (areas[:, None, None] * ref).ravel()


def edge_mass_coo(vertices, edges):
    d = vertices[edges[:, 1]] - vertices[edges[:, 0]]
    length = np.hypot(d[:, 0], d[:, 1])
    ref = np.array([[2.0, 1.0], [1.0, 2.0]]) / 6.0
    rows, cols = _pairs(edges, 2)
    return rows, cols, (length[:, None, None] * ref).ravel()


def envelope_rk4(zeta, y0, C, m):
    inv_m = 1.0 / m

    def rate(y):
        return (y / C) ** inv_m if y > 0.0 else 0.0

    out = np.empty(len(zeta))
    y = float(y0)
    out[0] = y
    for i in range(1, len(zeta)):
        h = float(zeta[i] - zeta[i - 1])
        k1 = rate(y)
        k2 = rate(y + 0.5 * h * k1)
        k3 = rate(y + 0.5 * h * k2)
        k4 = rate(y + h * k3)
        y = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        out[i] = y
    return out
