"""Critical couplings, virtual levels, discrete eigenvalues and regimes.

Outside the band the discrete eigenvalues of the fibre operator at k are the
zeros of z -> Delta_mu(k; z), which is strictly decreasing there.  Below the
band Delta tends to +infinity as z -> -infinity, above it to -infinity as
z -> +infinity, so the sign of Delta next to the band edge decides whether a
(necessarily unique) eigenvalue exists on that side.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .determinant import SpectralPoint, canonical_point, determinant_estimate, lattice_integral
from .errors import AccuracyFailure, InvalidArgument, NumericsBroken
from .lattice import PI_POINT, W1_MAX, ZERO, SpectralParams, as_point, band_edges, torus_grid

#: quadrature tolerance used for spectral decisions
QUAD_TOL = 1e-9
#: relative offset of the first probe from the band edge
EDGE_OFFSET = 1e-8
#: bracket expansion stops here; a root beyond it means the numerics failed
Z_LIMIT = 1e6
ROOT_XTOL = 1e-10

_THRESHOLD_GAP = 12.0


class End(str, Enum):
    LOWER = "lower"
    UPPER = "upper"


class Side(str, Enum):
    BELOW = "below_band"
    ABOVE = "above_band"


@lru_cache(maxsize=8)
def threshold_integral(tol: float = 1e-10) -> float:
    """J0 = I(0; 0), the integral of 1/w1(0, t) over the torus."""
    return lattice_integral(SpectralPoint(ZERO, 0.0), tol).value


@dataclass(frozen=True)
class CriticalCouplings:
    """Couplings at which a virtual level sits at the lower / upper threshold."""

    gamma: float
    mu_left: Optional[float]
    mu_right: Optional[float]
    mu_zero: float


def critical_couplings(gamma: float, tol: float = 1e-10) -> CriticalCouplings:
    """mu_left = sqrt(gamma / J0) for gamma > 0, mu_right = sqrt((12 - gamma) / J0) for gamma < 12."""
    if not tol > 0:
        raise InvalidArgument("tolerance must be positive")
    j0 = threshold_integral(tol)
    left = math.sqrt(gamma / j0) if gamma > 0 else None
    right = math.sqrt((_THRESHOLD_GAP - gamma) / j0) if gamma < _THRESHOLD_GAP else None
    return CriticalCouplings(gamma, left, right, math.sqrt(6.0 / j0))


def mu_zero(tol: float = 1e-10) -> float:
    return critical_couplings(6.0, tol).mu_zero


def threshold_point(end: End) -> SpectralPoint:
    return SpectralPoint(ZERO, 0.0) if End(end) is End.LOWER else SpectralPoint(PI_POINT, W1_MAX)


def virtual_level_check(
    end: End, params: SpectralParams, tol: float = 1e-6, *, quad_tol: float = QUAD_TOL
) -> bool:
    """True when the determinant vanishes (to ``tol``) at the threshold of ``end``.

    The hypotheses exclude gamma = 0 at the lower end and gamma = 12 at the upper.
    """
    end = End(end)
    excluded = 0.0 if end is End.LOWER else _THRESHOLD_GAP
    if params.gamma == excluded:
        raise InvalidArgument(f"virtual levels at the {end.value} end need gamma != {excluded:g}")
    return abs(determinant_estimate(threshold_point(end), params, quad_tol).value) <= tol


@dataclass(frozen=True)
class EigenReport:
    """Outcome of the search on one side of the band.

    Without an eigenvalue, ``bracket`` collapses onto the edge probe and
    ``edge_value`` carries the sign certificate.
    """

    side: Side
    eigenvalue: Optional[float]
    residual: Optional[float]
    bracket: tuple
    edge_value: float

    @property
    def found(self) -> bool:
        return self.eigenvalue is not None


def find_eigenvalue(
    k,
    params: SpectralParams,
    side: Side,
    tol: float = 1e-7,
    *,
    quad_tol: float = QUAD_TOL,
) -> EigenReport:
    """Locate the discrete eigenvalue of the fibre at k below or above the band.

    The determinant is probed just outside the edge; if it already has the
    sign it takes far from the band there is no eigenvalue on that side.
    Otherwise the bracket is widened by powers of two and the root refined
    with Brent's method until the bracket is below 1e-10.
    """
    if not tol > 0:
        raise InvalidArgument("tolerance must be positive")
    k = as_point(k)
    side = Side(side)
    m, M = band_edges(k)
    sgn = 1.0 if side is Side.BELOW else -1.0
    edge = m if side is Side.BELOW else M

    def delta(z):
        return determinant_estimate(SpectralPoint(k, z), params, quad_tol).value

    eta = EDGE_OFFSET * max(1.0, abs(edge))
    z_near = edge - sgn * eta
    d_near = delta(z_near)
    if sgn * d_near > 0:
        return EigenReport(side, None, None, (z_near, z_near), d_near)

    step = 1.0
    z_far = edge - sgn * step
    while sgn * delta(z_far) <= 0:
        z_near = z_far
        step *= 2.0
        z_far = edge - sgn * step
        if abs(z_far) > Z_LIMIT:
            raise NumericsBroken(
                f"no sign change of the determinant within |z| <= {Z_LIMIT:g} on the {side.value} side"
            )
    lo, hi = sorted((z_far, z_near))
    root = brentq(delta, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps)
    residual = abs(delta(root))
    if residual > tol:
        raise AccuracyFailure(f"residual {residual:.3g} at z={root} exceeds {tol:g}", root)
    return EigenReport(side, float(root), residual, (lo, hi), d_near)


class LowerRegime(str, Enum):
    NO_EIGEN = "NoEigenBelow"
    VIRTUAL = "VirtualLevelBelow"
    UNIQUE = "UniqueEigenBelow"

    @property
    def label(self) -> str:
        return _LABELS[self.name]


class UpperRegime(str, Enum):
    NO_EIGEN = "NoEigenAbove"
    VIRTUAL = "VirtualLevelAbove"
    UNIQUE = "UniqueEigenAbove"

    @property
    def label(self) -> str:
        return _LABELS[self.name]


_LABELS = {"NO_EIGEN": "none", "VIRTUAL": "virtual", "UNIQUE": "unique"}


@dataclass(frozen=True)
class RegimeClass:
    lower: LowerRegime
    upper: UpperRegime


def _threshold_regime(mu, critical, tol, enum):
    if mu == 0:
        return enum.NO_EIGEN
    if abs(mu - critical) <= tol * critical:
        return enum.VIRTUAL
    return enum.NO_EIGEN if mu < critical else enum.UNIQUE


def classify_regime(params: SpectralParams, tol: float = 1e-6) -> RegimeClass:
    """Predicted spectrum outside [0, 18] at k = 0 (below) and k = pi (above).

    Lower: gamma <= 0 gives a unique negative eigenvalue for every mu > 0;
    otherwise the answer follows mu against mu_left, with a relative band
    ``tol`` counted as the virtual level.  Upper: the mirror image, with
    gamma >= 12 giving a unique eigenvalue above 18 and mu_right as the
    threshold.  At mu = 0 the only eigenvalue is w0 itself.
    """
    crit = critical_couplings(params.gamma)
    mu, gamma = params.mu, params.gamma
    if mu == 0:
        lower = LowerRegime.UNIQUE if gamma < 0 else LowerRegime.NO_EIGEN
    elif crit.mu_left is None:
        lower = LowerRegime.UNIQUE
    else:
        lower = _threshold_regime(mu, crit.mu_left, tol, LowerRegime)
    if mu == 0:
        upper = UpperRegime.UNIQUE if gamma > _THRESHOLD_GAP else UpperRegime.NO_EIGEN
    elif crit.mu_right is None:
        upper = UpperRegime.UNIQUE
    else:
        upper = _threshold_regime(mu, crit.mu_right, tol, UpperRegime)
    return RegimeClass(lower, upper)


@dataclass(frozen=True)
class Violation:
    index: int
    k: tuple
    z: float
    delta: float


@dataclass(frozen=True)
class SweepReport:
    mu: float
    gamma: float
    points: int
    samples: int
    min_margin: float
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def sweep_no_eigenvalues(
    grid_size: int,
    z_samples: Sequence[float],
    tol: float = QUAD_TOL,
    *,
    mu: Optional[float] = None,
    gamma: float = 6.0,
    workers: Optional[int] = None,
) -> SweepReport:
    """Check the sign of Delta_mu(k; z) over a k-grid and spectral samples.

    A violation is Delta <= 0 for z < 0 or Delta >= 0 for z > 18, either of
    which brackets an eigenvalue outside [0, 18].  ``mu`` defaults to mu0.
    Distinct points up to symmetry are evaluated in a thread pool; the report
    lists violations in grid order.
    """
    zs = [float(z) for z in z_samples]
    if any(0.0 <= z <= W1_MAX for z in zs):
        raise InvalidArgument("samples must lie outside [0, 18]")
    mu = mu_zero() if mu is None else float(mu)
    params = SpectralParams(gamma, mu)
    grid = torus_grid(grid_size)
    keys = [canonical_point(k) for k in grid]
    unique = sorted(set(keys))

    def evaluate(key):
        return [determinant_estimate(SpectralPoint(key, z), params, tol).value for z in zs]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        table = dict(zip(unique, pool.map(evaluate, unique)))

    violations = []
    margin = math.inf
    for index, (k, key) in enumerate(zip(grid, keys)):
        for z, d in zip(zs, table[key]):
            signed = d if z < 0 else -d
            margin = min(margin, signed)
            if signed <= 0:
                violations.append(Violation(index, tuple(float(c) for c in k), z, d))
    return SweepReport(mu, gamma, len(grid), len(zs), margin, violations)
