"""Growth dichotomy for nondecreasing functions obeying ``Y <= Psi(Y')``.

Only the power-law majorant ``Psi(tau) <= C tau^m`` (``tau > tau1``) is
handled. A nonzero solution then grows at least like ``zeta^(m/(m-1))``: its
slowest admissible growth is the solution of ``Y' = (Y/C)^(1/m)``, for which
``Y^(1 - 1/m)`` is affine in ``zeta``.

Sampled data only gives forward differences, so verdicts certify a discrete
analogue of the differential inequality, not the inequality itself.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import MalformedSamples, StepTooCoarse

SLOPE_MARGIN = 0.1
STEP_RTOL = 1e-3


class Classification(enum.Enum):
    FORCED_SUPERLINEAR_GROWTH = "ForcedSuperlinearGrowth"
    MUST_BE_IDENTICALLY_ZERO = "MustBeIdenticallyZero"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class GrowthSpec:
    C: float
    m: float
    tau1: float = 0.0

    def __post_init__(self):
        if not (self.C > 0.0 and math.isfinite(self.C)):
            raise ValueError(f"C must be positive, got {self.C}")
        if not (self.m > 1.0 and math.isfinite(self.m)):
            raise ValueError(f"m must exceed 1, got {self.m}")
        if not self.tau1 >= 0.0:
            raise ValueError(f"tau1 must be non-negative, got {self.tau1}")

    @property
    def exponent(self) -> float:
        return self.m / (self.m - 1.0)

    def psi(self, tau):
        return self.C * np.asarray(tau, dtype=float) ** self.m


@dataclass(frozen=True)
class Envelope:
    zeta: np.ndarray
    Y: np.ndarray

    def slope(self, decades: float = 1.0) -> float:
        return loglog_slope(self.zeta, self.Y, decades)


@dataclass(frozen=True)
class GrowthVerdict:
    classification: Classification
    exponent: float
    witness: float | None
    tail_slope: float
    consistent: bool
    note: str = "discrete analogue: forward differences stand in for Y'"


def envelope_exact(spec: GrowthSpec, Y0: float, zeta) -> np.ndarray:
    """Closed-form solution of ``Y' = (Y/C)^(1/m)``, ``Y(0) = Y0``."""
    zeta = np.asarray(zeta, dtype=float)
    q = (spec.m - 1.0) / spec.m
    return (Y0**q + q * spec.C ** (-1.0 / spec.m) * zeta) ** (1.0 / q)


def _grid(zeta_max: float, steps: int) -> np.ndarray:
    # uniform in log(1 + zeta): keeps relative step error flat over many decades
    return np.expm1(np.linspace(0.0, math.log1p(zeta_max), steps + 1))


def envelope(spec: GrowthSpec, Y0: float, zeta_max: float = 1e6, steps: int = 2000, check: bool = True) -> Envelope:
    """Minimal-growth curve from ``Y(0) = Y0`` by classical RK4 on a graded grid.

    With ``check`` the run is repeated at twice the steps and
    :class:`StepTooCoarse` is raised if the endpoint moves by more than 0.1%.
    """
    if not Y0 >= 0.0:
        raise ValueError("Y0 must be non-negative")
    if not zeta_max > 0.0 or steps < 1:
        raise ValueError("need zeta_max > 0 and steps >= 1")
    zeta = _grid(zeta_max, steps)
    Y = kernels.envelope_rk4(zeta, Y0, spec.C, spec.m)
    if check and Y[-1] > 0.0:
        fine = kernels.envelope_rk4(_grid(zeta_max, 2 * steps), Y0, spec.C, spec.m)
        if abs(fine[-1] - Y[-1]) > STEP_RTOL * abs(fine[-1]):
            raise StepTooCoarse(
                f"endpoint changed by {abs(fine[-1] / Y[-1] - 1):.2e} on step doubling"
            )
    return Envelope(zeta, Y)


def loglog_slope(zeta, Y, decades: float = 1.0) -> float:
    """Secant slope of ``log Y`` against ``log zeta`` over the last ``decades``."""
    zeta = np.asarray(zeta, dtype=float)
    Y = np.asarray(Y, dtype=float)
    hi = zeta[-1]
    lo = hi / 10.0**decades
    if lo < zeta[0] or Y[-1] <= 0.0:
        raise ValueError("curve does not cover the requested range with positive values")
    pos = zeta > 0
    y_lo = math.exp(np.interp(math.log(lo), np.log(zeta[pos]), np.log(np.maximum(Y[pos], 1e-300))))
    return math.log(Y[-1] / y_lo) / math.log(hi / lo)


def _validate(zeta, Y) -> tuple[np.ndarray, np.ndarray]:
    zeta = np.asarray(zeta, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if zeta.ndim != 1 or zeta.shape != Y.shape:
        raise MalformedSamples("zeta and Y must be 1-D arrays of equal length")
    if zeta.size < 3:
        raise MalformedSamples("need at least three samples")
    if not (np.all(np.isfinite(zeta)) and np.all(np.isfinite(Y))):
        raise MalformedSamples("samples must be finite")
    if np.any(np.diff(zeta) <= 0.0):
        raise MalformedSamples("zeta must be strictly increasing")
    if np.any(Y < 0.0):
        raise MalformedSamples("Y must be non-negative")
    if np.any(np.diff(Y) < 0.0):
        raise MalformedSamples("Y must be nondecreasing")
    return zeta, Y


def tail_slope(zeta, Y) -> float:
    """Least-squares log-log slope over the last half of the positive samples."""
    mask = (zeta > 0.0) & (Y > 0.0)
    z, y = zeta[mask], Y[mask]
    if z.size < 2:
        return -math.inf
    k = max(2, z.size // 2)
    return float(np.polyfit(np.log(z[-k:]), np.log(y[-k:]), 1)[0])


def classify(zeta, Y, spec: GrowthSpec) -> GrowthVerdict:
    """Sort a sampled ``Y`` into the growth dichotomy.

    The discrete inequality ``Y_i <= C (dY/dzeta)_i^m`` is checked at every
    sample with a forward difference above ``tau1``. Consistent data with a tail
    slope below ``m/(m-1) - 0.1`` can only be the zero solution; consistent
    nonzero data is certified superlinear; anything else is inconclusive.
    """
    zeta, Y = _validate(zeta, Y)
    d = np.diff(Y) / np.diff(zeta)
    checked = d > spec.tau1 if spec.tau1 > 0.0 else np.ones(d.size, dtype=bool)
    consistent = bool(np.all(Y[:-1][checked] <= spec.psi(d[checked]) * (1.0 + 1e-12)))
    slope = tail_slope(zeta, Y)
    p = spec.exponent

    if not consistent:
        return GrowthVerdict(Classification.INCONCLUSIVE, p, None, slope, False)
    if not np.any(Y > 0.0) or slope < p - SLOPE_MARGIN:
        return GrowthVerdict(Classification.MUST_BE_IDENTICALLY_ZERO, p, None, slope, True)

    first = int(np.argmax(Y > 0.0))
    z0 = zeta[first]
    curve = envelope_exact(spec, Y[first], zeta[first:] - z0)
    above = np.flatnonzero(curve > Y[first:] * (1.0 + 1e-9))
    witness = float(zeta[first + above[0]]) if above.size else None
    return GrowthVerdict(Classification.FORCED_SUPERLINEAR_GROWTH, p, witness, slope, True)


def read_samples(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column CSV with header ``zeta,Y``."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise MalformedSamples(f"cannot read {path}: {exc}") from None
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows or [c.strip() for c in rows[0]] != ["zeta", "Y"]:
        raise MalformedSamples("expected header 'zeta,Y'")
    zeta, Y = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise MalformedSamples(f"line {lineno}: expected two columns")
        try:
            zeta.append(float(row[0]))
            Y.append(float(row[1]))
        except ValueError:
            raise MalformedSamples(f"line {lineno}: non-numeric value") from None
    return np.array(zeta), np.array(Y)
