"""Lattice kinematics: dispersion, channel energy and essential-spectrum edges.

Points of the torus T^3 = (-pi, pi]^3 are represented by :class:`TorusPoint`.
All functions accept plain sequences as well and wrap them first.

The half-angle term eps((k + p)/2) is two-valued on the torus.  ``w1`` uses
the midpoint of the shorter arc from k to p, ``k + wrap(p - k)/2``.  On
k = 0 this is the literal value eps(p/2), and it satisfies the exact shift
relation ``w1(k + pi, p + pi) = 18 - w1(k, p)``.  ``w1_branch`` exposes both
determinations computed from the canonical representatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import NamedTuple, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import InvalidArgument

PI = math.pi
TWO_PI = 2.0 * math.pi

#: largest value of w1 over the torus; also the upper threshold
W1_MAX = 18.0

_SCAN_POINTS = 4096
_EXTREMUM_XTOL = 1e-12


class TorusPoint(NamedTuple):
    """A quasi-momentum in (-pi, pi]^3."""

    k1: float
    k2: float
    k3: float

    @property
    def is_zero(self) -> bool:
        return self.k1 == 0.0 and self.k2 == 0.0 and self.k3 == 0.0

    @property
    def is_pi(self) -> bool:
        return self.k1 == PI and self.k2 == PI and self.k3 == PI

    def shifted(self) -> "TorusPoint":
        """Return ``wrap(self + pi_bar)``."""
        return wrap(np.asarray(self) + PI)


class BranchFlags(NamedTuple):
    """Per-coordinate half-angle branch; ``True`` flips the cosine sign."""

    s1: bool = False
    s2: bool = False
    s3: bool = False

    @classmethod
    def all(cls) -> list["BranchFlags"]:
        return [cls(*bits) for bits in product((False, True), repeat=3)]


class BandEdges(NamedTuple):
    """Bottom ``m`` and top ``M`` of the essential spectrum at fixed k."""

    m: float
    M: float


@dataclass(frozen=True)
class SpectralParams:
    """Level shift ``gamma`` of w0 and coupling constant ``mu``.

    ``mu == 0`` is accepted and decouples the two channels.
    """

    gamma: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.gamma) and math.isfinite(self.mu)):
            raise InvalidArgument("gamma and mu must be finite")
        if self.mu < 0:
            raise InvalidArgument(f"coupling constant must be positive, got {self.mu}")


ZERO = TorusPoint(0.0, 0.0, 0.0)
PI_POINT = TorusPoint(PI, PI, PI)


def wrap_angle(x):
    """Map angles into (-pi, pi], elementwise."""
    y = np.mod(np.asarray(x, dtype=float) + PI, TWO_PI) - PI
    return np.where(y <= -PI, PI, y)


def wrap(v: Sequence[float]) -> TorusPoint:
    """Reduce a triple of reals to its representative in (-pi, pi]^3."""
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise InvalidArgument(f"expected three coordinates, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgument(f"non-finite coordinate in {tuple(arr)}")
    return TorusPoint(*(float(c) for c in wrap_angle(arr)))


def as_point(k) -> TorusPoint:
    if isinstance(k, TorusPoint):
        return k
    return wrap(k)


def _e(x):
    # 1 - cos x without cancellation near 0
    s = np.sin(0.5 * np.asarray(x, dtype=float))
    return 2.0 * s * s


def _e_flipped(x):
    # 1 + cos x without cancellation near pi
    c = np.cos(0.5 * np.asarray(x, dtype=float))
    return 2.0 * c * c


def epsilon(k):
    """Dispersion sum_i (1 - cos k_i); vectorised over the last axis."""
    return np.sum(_e(k), axis=-1)


def w0(k, gamma: float):
    """Zero-particle energy eps(k) + gamma."""
    return epsilon(k) + gamma


def midpoint_angles(k, p):
    """Per-coordinate shortest-arc midpoint of k and p."""
    k = np.asarray(k, dtype=float)
    p = np.asarray(p, dtype=float)
    return k + 0.5 * wrap_angle(p - k)


def w1(k, p):
    """Channel energy eps(k) + eps(mid(k, p)) + eps(p).

    ``k`` is a single point; ``p`` may carry extra leading axes.
    """
    k = wrap_angle(k)
    p = wrap_angle(p)
    return epsilon(k) + epsilon(midpoint_angles(k, p)) + epsilon(p)


def w1_branch(k, p, sigma: Sequence[bool]):
    """Channel energy with an explicit half-angle branch per coordinate.

    The half angle is (k_i + p_i)/2 from the canonical representatives and
    ``sigma[i]`` flips the sign of its cosine.
    """
    k = wrap_angle(k)
    p = wrap_angle(p)
    half = 0.5 * (k + p)
    flips = np.asarray(sigma, dtype=bool)
    term = np.where(flips, _e_flipped(half), _e(half))
    return epsilon(k) + np.sum(term, axis=-1) + epsilon(p)


def midpoint_branch(k, p) -> BranchFlags:
    """Branch flags for which ``w1_branch`` reproduces ``w1``."""
    k = wrap_angle(k)
    p = wrap_angle(p)
    d = p - k
    flips = (d <= -PI) | (d > PI)
    return BranchFlags(*(bool(f) for f in flips))


def channel_profile(k_i: float, d):
    """One coordinate of w1(k, k + d) for d in [-pi, pi] (the window centred on k)."""
    d = np.asarray(d, dtype=float)
    return _e(k_i) + _e(k_i + 0.5 * d) + _e(k_i + d)


def _double_cover(k_i: float, p):
    # both branches at once: p runs over a 4*pi period of the half angle
    return _e(0.5 * (k_i + p)) + _e(p)


def _refine(func, x0: float, step: float, sign: float) -> tuple[float, float]:
    res = minimize_scalar(
        lambda x: sign * func(x),
        bounds=(x0 - step, x0 + step),
        method="bounded",
        options={"xatol": _EXTREMUM_XTOL},
    )
    x = float(res.x)
    value = float(func(x))
    start = float(func(x0))
    if sign * start < sign * value:
        return x0, start
    return x, value


@lru_cache(maxsize=4096)
def _coordinate_edges(k_i: float) -> tuple[float, float]:
    grid = np.linspace(-PI, 3.0 * PI, _SCAN_POINTS, endpoint=False)
    step = grid[1] - grid[0]
    values = _double_cover(k_i, grid)
    f = lambda x: float(_double_cover(k_i, x))
    _, lo = _refine(f, float(grid[np.argmin(values)]), step, 1.0)
    _, hi = _refine(f, float(grid[np.argmax(values)]), step, -1.0)
    return lo, hi


def band_edges(k) -> BandEdges:
    """Essential-spectrum edges m(k) = min_p w1(k, p), M(k) = max_p w1(k, p).

    The extrema run over both half-angle branches, which the separable form
    reduces to one-dimensional searches per coordinate.
    """
    k = as_point(k)
    base = float(epsilon(np.asarray(k)))
    lows, highs = zip(*(_coordinate_edges(float(c)) for c in k))
    return BandEdges(base + sum(lows), base + sum(highs))


def torus_grid(n: int) -> np.ndarray:
    """Uniform k-grid with n nodes per axis spanning [-pi, pi].

    The endpoints coincide on the torus, so odd n gives (n-1)^3 distinct
    points that include both 0 and pi in each coordinate.  ``n == 1`` is the
    single point 0.
    """
    if n < 1:
        raise InvalidArgument(f"grid size must be >= 1, got {n}")
    if n == 1:
        return np.zeros((1, 3))
    axis = np.unique(wrap_angle(np.linspace(-PI, PI, n)))
    mesh = np.meshgrid(axis, axis, axis, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)
