"""Poiseuille profiles with the Navier-slip (Robin) wall condition.

Everything is normalised to unit flux: ``phi_alpha`` solves

    -Lap phi = c_alpha in the section,  d_n phi + alpha phi = 0 on the wall,
    int phi = 1,

and the physical profile for flux ``Phi`` is ``Phi * phi_alpha`` with axial
pressure gradient ``-Phi * c_alpha``.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DivergentSeries, EstimateViolation
from .fem import (
    DEFAULT_TOL,
    BorderedSolver,
    ScalarField,
    _cached,
    assemble_boundary_mass,
    assemble_load,
    assemble_stiffness,
    element_gradients,
    h1_norm,
    h1_seminorm,
)
from .geometry import SectionKind
from .mesh import TriMesh

log = logging.getLogger(__name__)

FLUX_TOL = 1e-8
GAP_SLACK = 0.2


@dataclass(frozen=True)
class RobinSolution:
    alpha: float
    field: ScalarField
    forcing_constant: float
    flux: float
    grad_l2: float
    residual_rel: float = 0.0
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class PoiseuilleProfile:
    robin: RobinSolution
    flux_phi: float
    velocity: ScalarField
    pressure_slope: float


@dataclass(frozen=True)
class SeriesTerm:
    n: int
    field: ScalarField
    const: float
    h1_norm: float


@dataclass(frozen=True)
class ExpansionReport:
    terms: list[SeriesTerm]
    ratios: list[float]
    ratio_estimate: float
    radius_estimate: float

    @property
    def order(self) -> int:
        return len(self.terms) - 1


@dataclass(frozen=True)
class SeriesSum:
    field: ScalarField
    alpha: float
    tail_bound: float
    converges: bool


@dataclass(frozen=True)
class SweepRow:
    alpha: float
    grad_l2: float
    bound_ratio: float


@dataclass(frozen=True)
class SweepReport:
    rows: list[SweepRow]
    fitted_C: float
    small_alpha_slope: float
    monotone: bool

    @property
    def alphas(self) -> np.ndarray:
        return np.array([r.alpha for r in self.rows])


@dataclass(frozen=True)
class CriticalFluxReport:
    alphas: np.ndarray
    thresholds: np.ndarray
    derivatives: np.ndarray
    infimum: float = math.pi / 16.0
    infimum_alpha: str = "alpha->inf"

    @property
    def decreasing(self) -> bool:
        return bool(np.all(np.diff(self.thresholds) < 0.0))


# -- finite-element solves ------------------------------------------------------


def _flags(phi: np.ndarray, constant: float, alpha: float) -> tuple[str, ...]:
    out = []
    scale = np.abs(phi).max() if phi.size else 1.0
    if phi.min() < -1e-10 * max(scale, 1.0):
        out.append(f"negative profile value {phi.min():.3g} at alpha={alpha:g}")
    if constant < -1e-10:
        out.append(f"negative forcing constant {constant:.3g} at alpha={alpha:g}")
    for msg in out:
        log.warning(msg)
    return tuple(out)


def solve_robin(mesh: TriMesh, alpha: float, tol: float = DEFAULT_TOL, method: str = "direct") -> RobinSolution:
    """Unit-flux profile with friction ratio ``alpha`` (``K + alpha B`` bordered by the load vector)."""
    alpha = float(alpha)
    if not alpha >= 0.0 or math.isinf(alpha):
        raise ValueError(f"alpha must be finite and >= 0, got {alpha}")
    K = assemble_stiffness(mesh)
    A = K + alpha * assemble_boundary_mass(mesh) if alpha else K
    m = assemble_load(mesh)
    sol = BorderedSolver(A, m, tol=tol, method=method).solve(np.zeros(mesh.n_vertices), 1.0)
    phi = ScalarField(mesh, sol.x)
    return RobinSolution(
        alpha=alpha,
        field=phi,
        forcing_constant=sol.multiplier,
        flux=float(m @ sol.x),
        grad_l2=h1_seminorm(phi),
        residual_rel=sol.residual_rel,
        warnings=_flags(sol.x, sol.multiplier, alpha),
    )


def _dirichlet(mesh: TriMesh, tol: float) -> RobinSolution:
    inner = mesh.interior_vertices
    K = assemble_stiffness(mesh)[inner][:, inner]
    m = assemble_load(mesh)
    sol = BorderedSolver(K, m[inner], tol=tol).solve(np.zeros(inner.size), 1.0)
    values = np.zeros(mesh.n_vertices)
    values[inner] = sol.x
    phi = ScalarField(mesh, values)
    return RobinSolution(
        alpha=math.inf,
        field=phi,
        forcing_constant=sol.multiplier,
        flux=float(m @ values),
        grad_l2=h1_seminorm(phi),
        residual_rel=sol.residual_rel,
        warnings=_flags(values, sol.multiplier, math.inf),
    )


def solve_dirichlet(mesh: TriMesh, tol: float = DEFAULT_TOL) -> RobinSolution:
    """No-slip limit: zero wall trace imposed by eliminating boundary rows."""
    if tol == DEFAULT_TOL:
        return _cached(mesh, "dirichlet", lambda m: _dirichlet(m, tol))
    return _dirichlet(mesh, tol)


def scale_to_flux(robin: RobinSolution, flux_phi: float) -> PoiseuilleProfile:
    flux_phi = float(flux_phi)
    if flux_phi < 0.0:
        raise ValueError("flux must be non-negative")
    return PoiseuilleProfile(
        robin=robin,
        flux_phi=flux_phi,
        velocity=robin.field * flux_phi,
        pressure_slope=flux_phi * robin.forcing_constant,
    )


def solve_robin_strip(n_cells: int, alpha: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Unit-flux profile on the interval ]0,1[ with the Robin condition at both ends.

    Returns nodes, nodal values and the forcing constant.
    """
    if n_cells < 2:
        raise ValueError("need at least two cells")
    x = np.linspace(0.0, 1.0, n_cells + 1)
    h = 1.0 / n_cells
    main = np.full(n_cells + 1, 2.0 / h)
    main[[0, -1]] = 1.0 / h + alpha
    off = np.full(n_cells, -1.0 / h)
    A = sp.diags([off, main, off], [-1, 0, 1], format="csr")
    m = np.full(n_cells + 1, h)
    m[[0, -1]] = 0.5 * h
    sol = BorderedSolver(A, m).solve(np.zeros(n_cells + 1), 1.0)
    return x, sol.x, sol.multiplier


# -- series in alpha --------------------------------------------------------------


def series_terms(mesh: TriMesh, N: int, tol: float = DEFAULT_TOL) -> ExpansionReport:
    """Coefficients ``phi_n`` of ``phi_alpha = sum alpha^n phi_n``.

    ``phi_0`` is the constant ``1/|section|``; each later term is the mean-zero
    Neumann solution with wall flux ``-phi_{n-1}``, and its forcing constant is
    the multiplier of the bordered solve.
    """
    N = int(N)
    if N < 1:
        raise ValueError("series order must be >= 1")
    K = assemble_stiffness(mesh)
    B = assemble_boundary_mass(mesh)
    m = assemble_load(mesh)
    solver = BorderedSolver(K, m, tol=tol)

    phi0 = ScalarField(mesh, np.full(mesh.n_vertices, 1.0 / m.sum()))
    terms = [SeriesTerm(0, phi0, 0.0, h1_norm(phi0))]
    for n in range(1, N + 1):
        prev = terms[-1].field.values
        sol = solver.solve(-(B @ prev), 0.0)
        phi = ScalarField(mesh, sol.x)
        terms.append(SeriesTerm(n, phi, sol.multiplier, h1_norm(phi)))

    ratios = [terms[n].h1_norm / terms[n - 1].h1_norm for n in range(1, N + 1)]
    ratio = max(ratios)
    return ExpansionReport(terms, ratios, ratio, 1.0 / ratio if ratio > 0 else math.inf)


def series_sum(report: ExpansionReport, alpha: float, strict: bool = False) -> SeriesSum:
    """Partial sum up to the computed order, with an H1 tail estimate.

    The tail estimate assumes the remaining terms keep shrinking by at most
    ``ratio_estimate`` per order: ``alpha^N ||phi_N|| q / (1 - q)``, ``q = alpha * ratio``.
    """
    alpha = float(alpha)
    q = alpha * report.ratio_estimate
    converges = q < 1.0
    if not converges:
        msg = f"alpha={alpha:g} outside estimated radius {report.radius_estimate:.4g}"
        if strict:
            raise DivergentSeries(msg)
        log.warning(msg)
    values = np.zeros_like(report.terms[0].field.values)
    power = 1.0
    for term in report.terms:
        values = values + power * term.field.values
        power *= alpha
    last = report.terms[-1]
    if alpha == 0.0:
        tail = 0.0
    elif converges:
        tail = alpha ** last.n * last.h1_norm * q / (1.0 - q)
    else:
        tail = math.inf
    return SeriesSum(ScalarField(last.field.mesh, values), alpha, tail, converges)


# -- alpha sweep and the no-slip limit ---------------------------------------------


def default_alpha_grid(n: int = 25, lo: float = 1e-2, hi: float = 1e3, include_zero: bool = True) -> np.ndarray:
    grid = np.logspace(math.log10(lo), math.log10(hi), n)
    return np.concatenate([[0.0], grid]) if include_zero else grid


def _threads(threads: int | None) -> int:
    if threads is None:
        try:
            threads = int(os.environ.get("PIPEFLOW_THREADS", "1"))
        except ValueError:
            threads = 1
    return max(1, threads)


def sweep_alpha(
    mesh: TriMesh,
    alpha_grid: Sequence[float],
    tol: float = DEFAULT_TOL,
    threads: int | None = None,
) -> SweepReport:
    """Gradient norm over a range of friction ratios and the uniform constant it implies.

    ``bound_ratio = grad_l2 (1 + alpha) / alpha`` is undefined at ``alpha = 0``
    (reported as NaN); ``fitted_C`` is its maximum over the positive grid.
    """
    alphas = sorted({float(a) for a in alpha_grid})
    positive = [a for a in alphas if a > 0.0]
    if len(positive) < 8:
        raise ValueError("alpha sweep needs at least 8 positive values")
    if positive[0] > 1e-2 or positive[-1] < 1e3:
        log.warning("alpha grid [%g, %g] does not span [1e-2, 1e3]", positive[0], positive[-1])

    def run(a):
        return solve_robin(mesh, a, tol=tol).grad_l2

    workers = _threads(threads)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            grads = list(pool.map(run, alphas))
    else:
        grads = [run(a) for a in alphas]

    rows = [
        SweepRow(a, g, g * (1.0 + a) / a if a > 0.0 else math.nan)
        for a, g in zip(alphas, grads)
    ]
    fitted = max(r.bound_ratio for r in rows if r.alpha > 0.0)
    (a1, g1), (a2, g2) = [(r.alpha, r.grad_l2 / r.alpha) for r in rows if r.alpha > 0.0][:2]
    slope = g1 - a1 * (g2 - g1) / (a2 - a1)
    monotone = bool(np.all(np.diff(grads) >= -1e-12))
    return SweepReport(rows, float(fitted), float(slope), monotone)


def normal_derivative_sq_integral(field: ScalarField) -> float:
    """``int (d_n u)^2`` over the wall, using the gradient of the element behind each edge."""
    mesh = field.mesh
    grads = element_gradients(field)[mesh.boundary_triangles]
    dn = np.sum(grads * mesh.boundary_normals, axis=1)
    return float(np.sum(dn * dn * mesh.boundary_weights))


def dirichlet_gap(
    mesh: TriMesh, alpha: float, tol: float = DEFAULT_TOL, slack: float = GAP_SLACK
) -> tuple[float, float]:
    """Squared gradient distance to the no-slip profile and its a-priori bound.

    ``bound = (1 / 2 alpha) int (d_n phi_inf)^2``. Raises
    :class:`EstimateViolation` if ``gap > bound * (1 + slack)``.
    """
    alpha = float(alpha)
    if not alpha > 0.0:
        raise ValueError("alpha must be positive")
    phi_inf = solve_dirichlet(mesh, tol=tol)
    phi_a = solve_robin(mesh, alpha, tol=tol)
    gap = h1_seminorm(phi_a.field - phi_inf.field) ** 2
    bound = normal_derivative_sq_integral(phi_inf.field) / (2.0 * alpha)
    if gap > bound * (1.0 + slack):
        raise EstimateViolation(f"gap {gap:.6g} exceeds bound {bound:.6g} at alpha={alpha:g}")
    return gap, bound


# -- closed forms ------------------------------------------------------------------


def oracle_disk(alpha: float, r):
    """Unit-flux profile on the unit disk and its gradient magnitude at radius ``r``."""
    r = np.asarray(r, dtype=float)
    if math.isinf(alpha):
        value = (2.0 / math.pi) * (1.0 - r * r)
        grad = (4.0 / math.pi) * r
    else:
        value = 2.0 * (alpha + 2.0) / ((alpha + 4.0) * math.pi) * (1.0 - alpha / (alpha + 2.0) * r * r)
        grad = 4.0 * alpha / ((alpha + 4.0) * math.pi) * r
    if value.ndim == 0:
        return float(value), float(grad)
    return value, grad


def oracle_strip(alpha: float, x):
    """Unit-flux profile on ]0,1[."""
    x = np.asarray(x, dtype=float)
    value = 6.0 * alpha / (6.0 + alpha) * (x - x * x) + 6.0 / (6.0 + alpha)
    return float(value) if value.ndim == 0 else value


def disk_grad_l2(alpha: float) -> float:
    if math.isinf(alpha):
        return 4.0 / math.sqrt(2.0 * math.pi)
    return 4.0 * alpha / ((alpha + 4.0) * math.sqrt(2.0 * math.pi))


def disk_forcing_constant(alpha: float) -> float:
    if math.isinf(alpha):
        return 8.0 / math.pi
    return 8.0 * alpha / ((alpha + 4.0) * math.pi)


def critical_flux_disk(alpha_grid: Sequence[float]) -> CriticalFluxReport:
    """Flux below which the generalized Hagen-Poiseuille flow is unique, per friction ratio.

    ``threshold(alpha) = (alpha + 4) pi / (8 (2 alpha + 1))`` decreases to ``pi/16``.
    """
    alphas = np.asarray(list(alpha_grid), dtype=float)
    if np.any(alphas < 0.0) or np.any(np.isnan(alphas)):
        raise ValueError("alpha grid must lie in [0, inf]")
    with np.errstate(invalid="ignore", divide="ignore"):
        thresholds = np.where(
            np.isinf(alphas), math.pi / 16.0, (alphas + 4.0) * math.pi / (8.0 * (2.0 * alphas + 1.0))
        )
        derivatives = np.where(np.isinf(alphas), 0.0, -7.0 / (2.0 * alphas + 1.0) ** 2)
    return CriticalFluxReport(alphas, thresholds, derivatives)
