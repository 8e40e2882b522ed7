# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled P1 assembly and envelope-integration kernels.

Signatures and results match :mod:`pipeflow._kernels_py` exactly; the selector
in :mod:`pipeflow.kernels` picks whichever is importable.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport pow

cnp.import_array()


def element_geometry(const double[:, ::1] vertices, const cnp.int64_t[:, ::1] triangles):
    cdef Py_ssize_t t, i, nt = triangles.shape[0]
    cdef cnp.int64_t a, b, c
    cdef double x0, y0, x1, y1, x2, y2, twice
    areas = np.empty(nt)
    grads = np.empty((nt, 3, 2))
    cdef double[::1] A = areas
    cdef double[:, :, ::1] G = grads
    for t in range(nt):
        a = triangles[t, 0]; b = triangles[t, 1]; c = triangles[t, 2]
        x0 = vertices[a, 0]; y0 = vertices[a, 1]
        x1 = vertices[b, 0]; y1 = vertices[b, 1]
        x2 = vertices[c, 0]; y2 = vertices[c, 1]
        twice = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        A[t] = 0.5 * twice
        if twice == 0.0:
            twice = 1.0
        G[t, 0, 0] = (y1 - y2) / twice; G[t, 0, 1] = (x2 - x1) / twice
        G[t, 1, 0] = (y2 - y0) / twice; G[t, 1, 1] = (x0 - x2) / twice
        G[t, 2, 0] = (y0 - y1) / twice; G[t, 2, 1] = (x1 - x0) / twice
    return areas, grads


def stiffness_coo(const double[:, ::1] vertices, const cnp.int64_t[:, ::1] triangles):
    cdef Py_ssize_t t, i, j, k, nt = triangles.shape[0]
    areas, grads = element_geometry(vertices, triangles)
    cdef double[::1] A = areas
    cdef double[:, :, ::1] G = grads
    rows = np.empty(9 * nt, dtype=np.int64)
    cols = np.empty(9 * nt, dtype=np.int64)
    vals = np.empty(9 * nt)
    cdef cnp.int64_t[::1] R = rows
    cdef cnp.int64_t[::1] C = cols
    cdef double[::1] V = vals
    k = 0
    for t in range(nt):
        for i in range(3):
            for j in range(3):
                R[k] = triangles[t, i]
                C[k] = triangles[t, j]
                V[k] = A[t] * (G[t, i, 0] * G[t, j, 0] + G[t, i, 1] * G[t, j, 1])
                k += 1
    return rows, cols, vals


def mass_coo(const double[:, ::1] vertices, const cnp.int64_t[:, ::1] triangles):
    cdef Py_ssize_t t, i, j, k, nt = triangles.shape[0]
    areas, _ = element_geometry(vertices, triangles)
    cdef double[::1] A = areas
    rows = np.empty(9 * nt, dtype=np.int64)
    cols = np.empty(9 * nt, dtype=np.int64)
    vals = np.empty(9 * nt)
    cdef cnp.int64_t[::1] R = rows
    cdef cnp.int64_t[::1] C = cols
    cdef double[::1] V = vals
    k = 0
    for t in range(nt):
        for i in range(3):
            for j in range(3):
                R[k] = triangles[t, i]
                C[k] = triangles[t, j]
                V[k] = A[t] / 6.0 if i == j else A[t] / 12.0
                k += 1
    return rows, cols, vals


def edge_mass_coo(const double[:, ::1] vertices, const cnp.int64_t[:, ::1] edges):
    cdef Py_ssize_t e, ne = edges.shape[0]
    cdef cnp.int64_t a, b
    cdef double dx, dy, L
    rows = np.empty(4 * ne, dtype=np.int64)
    cols = np.empty(4 * ne, dtype=np.int64)
    vals = np.empty(4 * ne)
    cdef cnp.int64_t[::1] R = rows
    cdef cnp.int64_t[::1] C = cols
    cdef double[::1] V = vals
    for e in range(ne):
        a = edges[e, 0]; b = edges[e, 1]
        dx = vertices[b, 0] - vertices[a, 0]
        dy = vertices[b, 1] - vertices[a, 1]
        L = (dx * dx + dy * dy) ** 0.5
        R[4 * e] = a; C[4 * e] = a; V[4 * e] = L / 3.0
        R[4 * e + 1] = a; C[4 * e + 1] = b; V[4 * e + 1] = L / 6.0
        R[4 * e + 2] = b; C[4 * e + 2] = a; V[4 * e + 2] = L / 6.0
        R[4 * e + 3] = b; C[4 * e + 3] = b; V[4 * e + 3] = L / 3.0
    return rows, cols, vals


cdef inline double _rate(double y, double C, double inv_m):
    if y <= 0.0:
        return 0.0
    return pow(y / C, inv_m)


def envelope_rk4(const double[::1] zeta, double y0, double C, double m):
    cdef Py_ssize_t i, n = zeta.shape[0]
    cdef double h, y, k1, k2, k3, k4, inv_m = 1.0 / m
    out = np.empty(n)
    cdef double[::1] Y = out
    y = y0
    Y[0] = y
    for i in range(1, n):
        h = zeta[i] - zeta[i - 1]
        k1 = _rate(y, C, inv_m)
        k2 = _rate(y + 0.5 * h * k1, C, inv_m)
        k3 = _rate(y + 0.5 * h * k2, C, inv_m)
        k4 = _rate(y + h * k3, C, inv_m)
        y = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        Y[i] = y
    return out
