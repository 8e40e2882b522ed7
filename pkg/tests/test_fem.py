import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from pipeflow.errors import DegenerateTriangle, IncompatibleSystem
from pipeflow.fem import (
    ScalarField,
    assemble_boundary_mass,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
    boundary_l2,
    h1_norm,
    h1_seminorm,
    l2_norm,
    neumann_eigenvalue_1,
    solve_constrained,
)
from pipeflow.geometry import disk, make_section
from pipeflow.mesh import TriMesh, mesh_at_level, refine


# area lost by a 64-gon inscribed in the unit circle, to leading order
POLYGON_DEFICIT = 1.01 * math.pi * (2 * math.pi / 64) ** 2 / 6


def reference_triangle():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    tris = np.array([[0, 1, 2]])
    edges = np.array([[0, 1], [1, 2], [2, 0]])
    return TriMesh(make_section("Disk"), verts, tris, edges)


def bessel_j1_prime_root():
    """First positive zero of J1' by bisection on [1, 3]."""
    from scipy.special import jvp

    lo, hi = 1.0, 3.0
    assert jvp(1, lo) * jvp(1, hi) < 0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if jvp(1, lo) * jvp(1, mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_reference_stiffness():
    # gradients of the barycentrics: (-1,-1), (1,0), (0,1); area 1/2
    K = assemble_stiffness(reference_triangle()).toarray()
    expected = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
    np.testing.assert_allclose(K, expected, atol=1e-15)


def test_reference_load():
    np.testing.assert_allclose(assemble_load(reference_triangle()), np.full(3, 1 / 6), rtol=1e-15)


def test_degenerate_triangle():
    verts = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    mesh = TriMesh(make_section("Disk"), verts, np.array([[0, 1, 2]]), np.array([[0, 1], [1, 2], [2, 0]]))
    with pytest.raises(DegenerateTriangle):
        assemble_stiffness(mesh)


def test_stiffness_kernel_and_psd(disk_mesh):
    K = assemble_stiffness(disk_mesh)
    assert np.abs(K @ np.ones(disk_mesh.n_vertices)).max() < 1e-12
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = rng.standard_normal(disk_mesh.n_vertices)
        assert x @ (K @ x) >= -1e-12


@pytest.mark.parametrize("build", [assemble_stiffness, assemble_mass, assemble_boundary_mass])
def test_symmetry(lobe_mesh, build):
    A = build(lobe_mesh)
    assert abs(A - A.T).max() < 1e-15
    rng = np.random.default_rng(2)
    i, j = rng.integers(0, lobe_mesh.n_vertices, (2, 200))
    np.testing.assert_array_equal(A[i, j], A[j, i])


def test_boundary_mass_total_is_loop_length(disk_mesh):
    B = assemble_boundary_mass(disk_mesh)
    assert B.sum() == pytest.approx(disk_mesh.boundary_length, abs=1e-12)
    assert abs(disk_mesh.boundary_length - 2 * math.pi) < 1e-2
    inner = disk_mesh.interior_vertices
    assert B[inner].nnz == 0


def test_boundary_weights_halve_on_refine(unit_disk):
    coarse = mesh_at_level(unit_disk, 4, 16)
    fine = refine(coarse)
    ratio = fine.boundary_weights.reshape(-1, 2).sum(axis=1) / coarse.boundary_weights
    assert np.all(ratio >= 1.0) and ratio.max() < 1.01
    assert assemble_boundary_mass(fine).sum() == pytest.approx(fine.boundary_length, abs=1e-12)


def test_load_sums_to_area(disk_mesh, unit_disk):
    m = assemble_load(disk_mesh)
    assert np.all(m > 0)
    assert m.sum() == pytest.approx(disk_mesh.area, abs=1e-12)
    assert abs(m.sum() - math.pi) < POLYGON_DEFICIT
    big = mesh_at_level(disk(2.0), 4, 16, 2)
    assert assemble_load(big).sum() == pytest.approx(4 * m.sum(), rel=1e-12)


def test_bordered_toy():
    sol = solve_constrained(sp.csr_matrix([[2.0]]), [1.0], [0.0], 1.0)
    assert sol.x[0] == pytest.approx(1.0, abs=1e-14)
    assert sol.multiplier == pytest.approx(2.0, abs=1e-14)


def test_pure_neumann_constant(disk_mesh):
    K, m = assemble_stiffness(disk_mesh), assemble_load(disk_mesh)
    sol = solve_constrained(K, m, np.zeros(disk_mesh.n_vertices), 1.0)
    np.testing.assert_allclose(sol.x, 1 / m.sum(), atol=1e-10)
    assert abs(sol.multiplier) < 1e-10
    assert sol.residual_rel <= 1e-10


def test_minres_path_matches_direct(lobe_mesh):
    A = assemble_stiffness(lobe_mesh) + 3.0 * assemble_boundary_mass(lobe_mesh)
    m = assemble_load(lobe_mesh)
    rhs = np.zeros(lobe_mesh.n_vertices)
    d = solve_constrained(A, m, rhs, 1.0)
    k = solve_constrained(A, m, rhs, 1.0, method="minres")
    assert k.residual_rel <= 1e-10
    np.testing.assert_allclose(k.x, d.x, atol=1e-8)


def test_incompatible_system():
    A = sp.csr_matrix(np.array([[1.0, -1.0], [-1.0, 1.0]]))
    with pytest.raises(IncompatibleSystem):
        solve_constrained(A, [1.0, -1.0], [0.0, 0.0], 1.0)
    with pytest.raises(IncompatibleSystem):
        solve_constrained(A, [0.0, 0.0], [0.0, 0.0], 1.0)


def test_galerkin_residual_identity(lobe_mesh):
    A = assemble_stiffness(lobe_mesh) + 2.0 * assemble_boundary_mass(lobe_mesh)
    m = assemble_load(lobe_mesh)
    sol = solve_constrained(A, m, np.zeros(lobe_mesh.n_vertices), 1.0)
    # x^T (A x - c m) = 0 and m^T x = 1 imply x^T A x = c
    assert sol.x @ (A @ sol.x) == pytest.approx(sol.multiplier, rel=1e-9)


def test_norms_of_simple_fields(disk_mesh):
    x, y = disk_mesh.vertices.T
    one = ScalarField(disk_mesh, np.ones_like(x))
    assert h1_seminorm(one) == pytest.approx(0.0, abs=1e-12)
    assert l2_norm(one) == pytest.approx(math.sqrt(disk_mesh.area), rel=1e-12)
    assert abs(l2_norm(one) - math.sqrt(math.pi)) < 2e-3
    fx = ScalarField(disk_mesh, x)
    # grad x = e1 exactly, so the seminorm squared is the mesh area
    assert h1_seminorm(fx) ** 2 == pytest.approx(disk_mesh.area, rel=1e-12)
    assert abs(h1_seminorm(fx) ** 2 - math.pi) < POLYGON_DEFICIT
    assert boundary_l2(one) ** 2 == pytest.approx(disk_mesh.boundary_length, rel=1e-12)
    assert h1_norm(fx) == pytest.approx(math.hypot(l2_norm(fx), h1_seminorm(fx)))


@settings(max_examples=25, deadline=None)
@given(scale=st.floats(-5, 5).filter(lambda s: abs(s) > 1e-3), seed=st.integers(0, 1000))
def test_norms_are_homogeneous(lobe_mesh, scale, seed):
    f = ScalarField(lobe_mesh, np.random.default_rng(seed).standard_normal(lobe_mesh.n_vertices))
    for norm in (l2_norm, h1_seminorm, boundary_l2):
        assert norm(scale * f) == pytest.approx(abs(scale) * norm(f), rel=1e-12)


def test_field_validation(disk_mesh, lobe_mesh):
    with pytest.raises(ValueError):
        ScalarField(disk_mesh, np.zeros(3))
    with pytest.raises(ValueError):
        ScalarField(disk_mesh, np.full(disk_mesh.n_vertices, np.nan))
    a = ScalarField(disk_mesh, np.zeros(disk_mesh.n_vertices))
    b = ScalarField(lobe_mesh, np.zeros(lobe_mesh.n_vertices))
    with pytest.raises(ValueError):
        a - b


def test_bessel_oracle():
    assert bessel_j1_prime_root() == pytest.approx(1.84118378134066, abs=1e-12)


def test_disk_neumann_eigenvalue(disk_mesh):
    exact = bessel_j1_prime_root() ** 2
    lam = neumann_eigenvalue_1(disk_mesh)
    assert lam == pytest.approx(exact, rel=1e-2)
    assert 1 / lam < 4 / math.pi**2


def test_eigenvalue_scaling():
    lam1 = neumann_eigenvalue_1(mesh_at_level(disk(1.0), 4, 16, 1))
    lam2 = neumann_eigenvalue_1(mesh_at_level(disk(2.0), 4, 16, 1))
    assert lam2 == pytest.approx(lam1 / 4, rel=1e-10)
