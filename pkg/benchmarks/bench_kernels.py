"""Compiled versus NumPy kernels on refined disk meshes.

Usage: python benchmarks/bench_kernels.py [--levels 2 3 4] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from pipeflow import _kernels_py, kernels
from pipeflow.geometry import disk
from pipeflow.mesh import mesh_at_level

try:
    from pipeflow import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--levels", type=int, nargs="+", default=[2, 3, 4])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)

    impls = {"python": _kernels_py}
    if _kernels_c is not None:
        impls["cython"] = _kernels_c
    else:
        print("compiled extension not built; timing the NumPy fallback only")

    print(f"{'kernel':<16}{'size':>10}" + "".join(f"{name:>12}" for name in impls) + f"{'speedup':>10}")
    for level in args.levels:
        mesh = mesh_at_level(disk(), 4, 16, level)
        cases = {
            "element_geom": lambda impl: kernels.element_geometry(mesh.vertices, mesh.triangles, impl=impl),
            "stiffness": lambda impl: kernels.stiffness_coo(mesh.vertices, mesh.triangles, impl=impl),
            "mass": lambda impl: kernels.mass_coo(mesh.vertices, mesh.triangles, impl=impl),
            "edge_mass": lambda impl: kernels.edge_mass_coo(mesh.vertices, mesh.boundary_edges, impl=impl),
        }
        for name, case in cases.items():
            times = {k: best(lambda impl=impl: case(impl), args.repeat) for k, impl in impls.items()}
            row = "".join(f"{1e3 * t:>10.3f}ms" for t in times.values())
            speed = times["python"] / times["cython"] if "cython" in times else float("nan")
            print(f"{name:<16}{mesh.n_triangles:>10}{row}{speed:>9.1f}x")

    zeta = np.expm1(np.linspace(0.0, np.log1p(1e6), 20001))
    times = {k: best(lambda impl=impl: kernels.envelope_rk4(zeta, 1.0, 1.0, 1.5, impl=impl), args.repeat)
             for k, impl in impls.items()}
    row = "".join(f"{1e3 * t:>10.3f}ms" for t in times.values())
    speed = times["python"] / times["cython"] if "cython" in times else float("nan")
    print(f"{'envelope_rk4':<16}{zeta.size - 1:>10}{row}{speed:>9.1f}x")


if __name__ == "__main__":
    main()
