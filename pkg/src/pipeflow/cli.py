"""Command-line driver: ``pipeflow {solve,sweep,series,limit,critical-flux,growth}``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import growth, poiseuille
from .errors import (
    BadResolution,
    DivergentSeries,
    EstimateViolation,
    GeometryError,
    MalformedSamples,
    SolverError,
    StepTooCoarse,
)
from .fem import h1_seminorm, l2_norm
from .geometry import CrossSection, disk, section_from_dict
from .mesh import TriMesh, mesh_at_level, write_vtk

log = logging.getLogger("pipeflow")

EXIT_CONFIG = 2
EXIT_NUMERIC = 3

_CONFIG_KEYS = {"section", "mesh", "alpha", "order", "out", "tol", "strict"}
_MESH_KEYS = {"n_rings", "n_sectors", "level"}

DEFAULT_ALPHA = {
    "solve": [1.0],
    "sweep": list(poiseuille.default_alpha_grid()),
    "series": [0.5],
    "limit": [10.0, 100.0, 1000.0],
    "critical-flux": [0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 100.0, 1000.0, math.inf],
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    section: CrossSection = field(default_factory=disk)
    n_rings: int = 4
    n_sectors: int = 16
    level: int = 2
    alphas: list[float] | None = None
    order: int = 8
    out: Path = Path(".")
    tol: float = 1e-10
    strict: bool = False

    def mesh(self) -> TriMesh:
        return mesh_at_level(self.section, self.n_rings, self.n_sectors, self.level)


def fmt(value: float) -> str:
    return f"{value:.17g}"


def parse_alpha(text) -> list[float]:
    """``"4"``, ``"0.1,1,4"``, ``"min:max:count:log"`` or ``"min:max:count:lin"``."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return [float(text)]
    if isinstance(text, list):
        try:
            return [float(a) for a in text]
        except (TypeError, ValueError):
            raise ConfigError("key 'alpha': list entries must be numbers") from None
    if not isinstance(text, str):
        raise ConfigError(f"key 'alpha': unsupported value {text!r}")
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 4 or parts[3] not in ("log", "lin"):
            raise ConfigError("key 'alpha': range must be min:max:count:log|lin")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"key 'alpha': malformed range {text!r}") from None
        if count < 1:
            raise ConfigError("key 'alpha': range count must be >= 1")
        if parts[3] == "log":
            if lo <= 0.0 or hi <= 0.0:
                raise ConfigError("key 'alpha': log range needs positive bounds")
            return list(np.logspace(math.log10(lo), math.log10(hi), count))
        return list(np.linspace(lo, hi, count))
    try:
        return [float(a) for a in text.split(",") if a.strip()]
    except ValueError:
        raise ConfigError(f"key 'alpha': malformed list {text!r}") from None


def _int(doc: dict, key: str, label: str) -> int:
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
        raise ConfigError(f"key '{label}' must be an integer, got {value!r}")
    return int(value)


def load_config(args: argparse.Namespace) -> RunConfig:
    doc: dict[str, Any] = {}
    if getattr(args, "config", None):
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    unknown = set(doc) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")

    cfg = RunConfig()
    if "section" in doc:
        try:
            cfg.section = section_from_dict(doc["section"])
        except GeometryError as exc:
            raise ConfigError(f"key 'section': {exc}") from None
    if "mesh" in doc:
        mesh = doc["mesh"]
        if not isinstance(mesh, dict):
            raise ConfigError("key 'mesh' must be an object")
        bad = set(mesh) - _MESH_KEYS
        if bad:
            raise ConfigError(f"unknown key(s) in 'mesh': {', '.join(sorted(bad))}")
        for key in _MESH_KEYS & set(mesh):
            setattr(cfg, key, _int(mesh, key, f"mesh.{key}"))
    if "alpha" in doc:
        cfg.alphas = parse_alpha(doc["alpha"])
    if "order" in doc:
        cfg.order = _int(doc, "order", "order")
    if "out" in doc:
        if not isinstance(doc["out"], str):
            raise ConfigError("key 'out' must be a path string")
        cfg.out = Path(doc["out"])
    if "tol" in doc:
        if isinstance(doc["tol"], bool) or not isinstance(doc["tol"], (int, float)):
            raise ConfigError(f"key 'tol' must be a number, got {doc['tol']!r}")
        cfg.tol = float(doc["tol"])
    if "strict" in doc:
        if not isinstance(doc["strict"], bool):
            raise ConfigError("key 'strict' must be true or false")
        cfg.strict = doc["strict"]

    if getattr(args, "alpha", None) is not None:
        cfg.alphas = parse_alpha(args.alpha)
    if getattr(args, "order", None) is not None:
        cfg.order = args.order
    if getattr(args, "out", None) is not None:
        cfg.out = Path(args.out)
    if getattr(args, "tol", None) is not None:
        cfg.tol = args.tol

    if cfg.n_rings < 2 or cfg.n_sectors < 8 or cfg.level < 0:
        raise ConfigError("key 'mesh': need n_rings >= 2, n_sectors >= 8, level >= 0")
    if not 1e-14 <= cfg.tol <= 1e-6:
        raise ConfigError(f"key 'tol' must lie in [1e-14, 1e-6], got {cfg.tol:g}")
    if cfg.order < 1:
        raise ConfigError("key 'order' must be >= 1")
    if cfg.alphas is not None:
        if any(math.isnan(a) or a < 0.0 for a in cfg.alphas):
            raise ConfigError("key 'alpha': values must be >= 0")
    return cfg


def _alphas(cfg: RunConfig, command: str) -> list[float]:
    alphas = DEFAULT_ALPHA[command] if cfg.alphas is None else cfg.alphas
    if not alphas:
        raise ConfigError("key 'alpha': empty list")
    return alphas


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, float) else v for v in row])


def _emit(**pairs) -> None:
    for key, value in pairs.items():
        print(f"{key}={fmt(value) if isinstance(value, float) else value}")


def cmd_solve(cfg: RunConfig) -> int:
    alphas = _alphas(cfg, "solve")
    if len(alphas) != 1:
        raise ConfigError("key 'alpha': solve takes a single value")
    alpha = alphas[0]
    mesh = cfg.mesh()
    if math.isinf(alpha):
        sol = poiseuille.solve_dirichlet(mesh, tol=cfg.tol)
    else:
        sol = poiseuille.solve_robin(mesh, alpha, tol=cfg.tol)
    phi = sol.field.values
    _write_csv(
        cfg.out / "solution.csv",
        ["x", "y", "phi"],
        ((float(x), float(y), float(v)) for (x, y), v in zip(mesh.vertices, phi)),
    )
    write_vtk(cfg.out / "solution.vtk", mesh, {"phi": phi}, title=f"pipeflow alpha={fmt(alpha)}")
    _emit(
        alpha=float(alpha),
        forcing_constant=sol.forcing_constant,
        grad_l2=sol.grad_l2,
        flux=sol.flux,
        residual_rel=sol.residual_rel,
        n_vertices=mesh.n_vertices,
        h_max=mesh.h_max,
    )
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    report = poiseuille.sweep_alpha(cfg.mesh(), _alphas(cfg, "sweep"), tol=cfg.tol)
    _write_csv(
        cfg.out / "sweep.csv",
        ["alpha", "grad_l2", "bound_ratio"],
        ((r.alpha, r.grad_l2, r.bound_ratio) for r in report.rows),
    )
    _emit(
        fitted_C=report.fitted_C,
        small_alpha_slope=report.small_alpha_slope,
        monotone=str(report.monotone).lower(),
    )
    return 0


def cmd_series(cfg: RunConfig) -> int:
    mesh = cfg.mesh()
    report = poiseuille.series_terms(mesh, cfg.order, tol=cfg.tol)
    ratios = [math.nan] + report.ratios
    _write_csv(
        cfg.out / "series.csv",
        ["n", "const_n", "h1_norm", "ratio"],
        ((t.n, t.const, t.h1_norm, q) for t, q in zip(report.terms, ratios)),
    )
    rows = []
    for alpha in _alphas(cfg, "series"):
        summed = poiseuille.series_sum(report, alpha, strict=cfg.strict)
        diff = summed.field - poiseuille.solve_robin(mesh, alpha, tol=cfg.tol).field
        rows.append((float(alpha), l2_norm(diff), h1_seminorm(diff), summed.tail_bound, str(summed.converges).lower()))
    _write_csv(cfg.out / "series_vs_direct.csv", ["alpha", "l2_diff", "grad_diff", "tail_bound", "converges"], rows)
    _emit(ratio_estimate=report.ratio_estimate, radius_estimate=report.radius_estimate)
    return 0


def cmd_limit(cfg: RunConfig) -> int:
    mesh = cfg.mesh()
    alphas = _alphas(cfg, "limit")
    if any(a <= 0.0 or math.isinf(a) for a in alphas):
        raise ConfigError("key 'alpha': limit needs finite positive values")
    rows = [(float(a), *poiseuille.dirichlet_gap(mesh, a, tol=cfg.tol)) for a in alphas]
    _write_csv(cfg.out / "dirichlet_gap.csv", ["alpha", "gap", "bound"], rows)
    _emit(forcing_constant_inf=poiseuille.solve_dirichlet(mesh, tol=cfg.tol).forcing_constant)
    return 0


def cmd_critical_flux(cfg: RunConfig) -> int:
    report = poiseuille.critical_flux_disk(sorted(_alphas(cfg, "critical-flux")))
    print("alpha,threshold")
    for a, t in zip(report.alphas, report.thresholds):
        print(f"{fmt(float(a))},{fmt(float(t))}")
    _emit(phi0=report.infimum, decreasing=str(report.decreasing).lower())
    return 0


def cmd_growth(args: argparse.Namespace) -> int:
    try:
        spec = growth.GrowthSpec(args.C, args.m, args.tau1)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    zeta, Y = growth.read_samples(args.samples)
    verdict = growth.classify(zeta, Y, spec)
    _emit(
        classification=verdict.classification.value,
        exponent=verdict.exponent,
        tail_slope=verdict.tail_slope,
        consistent=str(verdict.consistent).lower(),
        witness="none" if verdict.witness is None else fmt(verdict.witness),
    )
    return 0


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "series": cmd_series,
    "limit": cmd_limit,
    "critical-flux": cmd_critical_flux,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pipeflow",
        description="Navier-slip Poiseuille profiles on pipe cross-sections.",
        epilog="PIPEFLOW_THREADS caps the number of concurrent solves in 'sweep'.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    helps = {
        "solve": "solve one profile; writes solution.csv and solution.vtk",
        "sweep": "gradient-norm sweep over alpha; writes sweep.csv",
        "series": "series coefficients in alpha; writes series.csv and series_vs_direct.csv",
        "limit": "distance to the no-slip profile; writes dirichlet_gap.csv",
        "critical-flux": "print the disk critical-flux table and its infimum",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", help="JSON run configuration (see README)")
        p.add_argument("--alpha", help="alpha list 'a,b,c' or range 'min:max:count:log|lin'")
        if name != "critical-flux":
            p.add_argument("--out", help="output directory (default: current directory)")
            p.add_argument("--tol", type=float, help="relative residual tolerance, in [1e-14, 1e-6]")
        if name == "series":
            p.add_argument("--order", type=int, help="number of series terms N")

    g = sub.add_parser("growth", help="classify sampled Y(zeta) against Y <= C (Y')^m")
    g.add_argument("samples", help="CSV file with header 'zeta,Y'")
    g.add_argument("--C", type=float, required=True)
    g.add_argument("--m", type=float, required=True)
    g.add_argument("--tau1", type=float, default=0.0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        if args.command == "growth":
            return cmd_growth(args)
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except (ConfigError, GeometryError, BadResolution, MalformedSamples, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverError, EstimateViolation, DivergentSeries, StepTooCoarse, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
