"""P1 finite elements: assembly, bordered solves, norms and the first Neumann eigenvalue."""
from __future__ import annotations

import logging
import weakref
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import kernels
from .errors import DegenerateTriangle, IncompatibleSystem, SolverStagnation
from .mesh import TriMesh

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
MIN_TRIANGLE_AREA = 1e-14

_cache: "weakref.WeakKeyDictionary[TriMesh, dict]" = weakref.WeakKeyDictionary()


def _cached(mesh: TriMesh, name: str, build):
    store = _cache.setdefault(mesh, {})
    if name not in store:
        store[name] = build(mesh)
    return store[name]


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Nodal values of a P1 function on ``mesh``."""

    mesh: TriMesh
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.mesh.n_vertices,):
            raise ValueError(
                f"field has {values.size} values for {self.mesh.n_vertices} vertices"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def _check(self, other: "ScalarField") -> None:
        if other.mesh is not self.mesh:
            raise ValueError("fields live on different meshes")

    def __add__(self, other: "ScalarField") -> "ScalarField":
        self._check(other)
        return ScalarField(self.mesh, self.values + other.values)

    def __sub__(self, other: "ScalarField") -> "ScalarField":
        self._check(other)
        return ScalarField(self.mesh, self.values - other.values)

    def __mul__(self, scale: float) -> "ScalarField":
        return ScalarField(self.mesh, float(scale) * self.values)

    __rmul__ = __mul__

    def __neg__(self) -> "ScalarField":
        return ScalarField(self.mesh, -self.values)

    def integral(self) -> float:
        return float(assemble_load(self.mesh) @ self.values)

    def boundary_integral(self) -> float:
        return float(assemble_boundary_mass(self.mesh).sum(axis=0).A1 @ self.values)


@dataclass(frozen=True)
class SaddleSolution:
    """Solution ``x`` and multiplier ``c`` of the bordered system."""

    x: np.ndarray
    multiplier: float
    residual_rel: float


def _coo_to_csr(rows, cols, vals, n) -> sp.csr_matrix:
    mat = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
    mat.sum_duplicates()
    return mat


def _check_areas(mesh: TriMesh) -> None:
    bad = np.flatnonzero(mesh.signed_areas < MIN_TRIANGLE_AREA)
    if bad.size:
        raise DegenerateTriangle(
            f"{bad.size} triangle(s) with area < {MIN_TRIANGLE_AREA:g}, first index {bad[0]}"
        )


def _stiffness(mesh: TriMesh) -> sp.csr_matrix:
    _check_areas(mesh)
    return _coo_to_csr(*kernels.stiffness_coo(mesh.vertices, mesh.triangles), mesh.n_vertices)


def _mass(mesh: TriMesh) -> sp.csr_matrix:
    _check_areas(mesh)
    return _coo_to_csr(*kernels.mass_coo(mesh.vertices, mesh.triangles), mesh.n_vertices)


def _boundary_mass(mesh: TriMesh) -> sp.csr_matrix:
    return _coo_to_csr(
        *kernels.edge_mass_coo(mesh.vertices, mesh.boundary_edges), mesh.n_vertices
    )


def assemble_stiffness(mesh: TriMesh) -> sp.csr_matrix:
    """P1 stiffness ``K_ij = int grad psi_i . grad psi_j``; constants span its kernel."""
    return _cached(mesh, "K", _stiffness)


def assemble_mass(mesh: TriMesh) -> sp.csr_matrix:
    """Consistent P1 mass matrix."""
    return _cached(mesh, "M", _mass)


def assemble_boundary_mass(mesh: TriMesh) -> sp.csr_matrix:
    """Consistent P1 mass on the boundary edges; rows of interior vertices are empty."""
    return _cached(mesh, "B", _boundary_mass)


def assemble_load(mesh: TriMesh) -> np.ndarray:
    """``m_i = int psi_i``, i.e. one third of the area of every adjacent triangle."""

    def build(mesh):
        m = np.asarray(assemble_mass(mesh).sum(axis=1)).ravel()
        m.setflags(write=False)
        return m

    return _cached(mesh, "m", build)


def element_gradients(field: ScalarField) -> np.ndarray:
    """Piecewise-constant gradient ``(T, 2)`` of a P1 field."""
    mesh = field.mesh
    _, grads = _cached(
        mesh, "geom", lambda m: kernels.element_geometry(m.vertices, m.triangles)
    )
    return np.einsum("tid,ti->td", grads, field.values[mesh.triangles])


def h1_seminorm(field: ScalarField) -> float:
    g = element_gradients(field)
    return float(np.sqrt(np.sum(field.mesh.signed_areas * np.sum(g * g, axis=1))))


def l2_norm(field: ScalarField) -> float:
    v = field.values
    return float(np.sqrt(max(v @ (assemble_mass(field.mesh) @ v), 0.0)))


def h1_norm(field: ScalarField) -> float:
    return float(np.hypot(l2_norm(field), h1_seminorm(field)))


def boundary_l2(field: ScalarField) -> float:
    v = field.values
    return float(np.sqrt(max(v @ (assemble_boundary_mass(field.mesh) @ v), 0.0)))


def _bordered(A, g) -> sp.csc_matrix:
    g = sp.csr_matrix(np.asarray(g, dtype=float).reshape(-1, 1))
    return sp.bmat([[A, -g], [-g.T, None]], format="csc")


def _residual(S, z, b) -> float:
    scale = np.linalg.norm(b)
    if scale == 0.0:
        scale = 1.0
    return float(np.linalg.norm(S @ z - b) / scale)


class BorderedSolver:
    """Factorization of ``[[A, -g], [-g^T, 0]]`` reusable across right-hand sides."""

    def __init__(self, A, constraint, tol: float = DEFAULT_TOL, method: str = "direct"):
        A = sp.csr_matrix(A, dtype=float)
        constraint = np.asarray(constraint, dtype=float).ravel()
        if A.shape[0] != A.shape[1] or A.shape[0] != constraint.size:
            raise ValueError("matrix and constraint sizes do not match")
        if not np.any(constraint):
            raise IncompatibleSystem("constraint vector is zero")
        if method not in ("direct", "minres"):
            raise ValueError(f"unknown method {method!r}")
        self.n = A.shape[0]
        self.tol = tol
        self.method = method
        self.system = _bordered(A, constraint)
        self._lu = None

    @property
    def lu(self):
        if self._lu is None:
            try:
                self._lu = spla.splu(self.system)
            except RuntimeError as exc:  # "Factor is exactly singular"
                raise IncompatibleSystem(f"bordered matrix is singular: {exc}") from None
        return self._lu

    def _direct(self, b):
        z = self.lu.solve(b)
        res = _residual(self.system, z, b)
        # a few steps of iterative refinement for badly scaled systems (large alpha)
        for _ in range(3):
            if res <= self.tol or not np.all(np.isfinite(z)):
                break
            z = z + self.lu.solve(b - self.system @ z)
            res = _residual(self.system, z, b)
        if not np.all(np.isfinite(z)):
            raise IncompatibleSystem("bordered matrix is numerically singular")
        return z, res

    def solve(self, rhs, target: float) -> SaddleSolution:
        b = np.append(np.asarray(rhs, dtype=float).ravel(), -float(target))
        if b.size != self.n + 1:
            raise ValueError("rhs size does not match the matrix")
        z = None
        if self.method == "minres":
            z, info = spla.minres(self.system, b, rtol=self.tol * 1e-2, maxiter=20 * (self.n + 1))
            res = _residual(self.system, z, b)
            if info != 0 or res > self.tol:
                log.info("MINRES stopped at residual %.3g; falling back to LU", res)
                z = None
        if z is None:
            z, res = self._direct(b)
        if res > self.tol:
            raise SolverStagnation(f"relative residual {res:.3g} above tolerance {self.tol:.3g}")
        return SaddleSolution(z[:-1].copy(), float(z[-1]), res)


def solve_constrained(
    A, constraint, rhs, target: float, tol: float = DEFAULT_TOL, method: str = "direct"
) -> SaddleSolution:
    """Solve ``A x - c g = rhs``, ``g . x = target`` for ``(x, c)``.

    With ``A`` a stiffness (plus Robin) matrix and ``g`` the load vector this is
    ``-Lap x = c + rhs`` under the integral constraint, ``c`` being the unknown
    forcing constant.
    """
    return BorderedSolver(A, constraint, tol=tol, method=method).solve(rhs, target)


def neumann_eigenvalue_1(
    mesh: TriMesh, tol: float = 1e-8, maxiter: int = 500, seed: int = 0
) -> float:
    """Smallest nonzero eigenvalue of the Neumann Laplacian by inverse iteration.

    Each step solves ``K x = M y`` on mean-zero functions through the bordered
    system, which removes the constant eigenvector. Stops when successive
    Rayleigh quotients agree to ``tol`` (relative).
    """
    K, M, m = assemble_stiffness(mesh), assemble_mass(mesh), assemble_load(mesh)
    solver = BorderedSolver(K, m)
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(mesh.n_vertices)
    y -= (m @ y) / m.sum()
    prev = np.inf
    for _ in range(maxiter):
        x = solver.solve(M @ y, 0.0).x
        q = float((x @ (K @ x)) / (x @ (M @ x)))
        y = x / np.sqrt(x @ (M @ x))
        if abs(q - prev) <= tol * abs(q):
            return q
        prev = q
    raise SolverStagnation(f"inverse iteration did not converge in {maxiter} steps")
