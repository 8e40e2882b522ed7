"""Navier-slip Poiseuille flow on smooth pipe cross-sections.

Finite-element profiles, their expansion in the friction ratio, the no-slip
limit, the disk critical flux and the growth dichotomy used to close
uniqueness arguments.
"""
from .errors import (
    BadResolution,
    DegenerateTriangle,
    DivergentSeries,
    EstimateViolation,
    IncompatibleSystem,
    MalformedSamples,
    NonPositiveRadius,
    NotStarShaped,
    PipeflowError,
    SolverStagnation,
    StepTooCoarse,
)
from .fem import (
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
from .geometry import CrossSection, SectionKind, area_perimeter, curvature, disk, make_section
from .growth import GrowthSpec, classify, envelope
from .kernels import BACKEND
from .mesh import TriMesh, mesh_at_level, polar_mesh, refine, write_vtk
from .poiseuille import (
    critical_flux_disk,
    dirichlet_gap,
    oracle_disk,
    oracle_strip,
    scale_to_flux,
    series_sum,
    series_terms,
    solve_dirichlet,
    solve_robin,
    sweep_alpha,
)

__version__ = "0.1.0"
