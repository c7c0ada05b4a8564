"""Integration over the torus T^3 = (-pi, pi]^3.

Integrands are vectorised callables ``f(t1, t2, t3)`` that broadcast their
three coordinate arrays.  Two tensor rules are available:

* ``"midpoint"``: the periodic midpoint rule with grid doubling and Romberg
  extrapolation.  Nodes never sit on a coordinate equal to 0 or pi, so
  integrands that are smooth on the two half-periods also converge fast.
* ``"gauss"``: composite Gauss-Legendre on panels (by default split at 0 and
  +-pi) with order doubling.

Integrable point singularities are handled by :func:`integrate_with_singularity`,
which splits the integrand with a smooth radial cutoff around the singular
point and integrates the inner part in spherical coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import AccuracyFailure, InvalidArgument
from .lattice import PI, TWO_PI, as_point, wrap_angle

Integrand = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]

_SLAB_POINTS = 1 << 21


@dataclass(frozen=True)
class QuadratureResult:
    """Integral value, a non-negative error estimate and the integrand call count."""

    value: float
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if not self.error_estimate >= 0.0:
            raise InvalidArgument(f"error estimate must be >= 0, got {self.error_estimate}")

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(
            self.value + other.value,
            self.error_estimate + other.error_estimate,
            self.evaluations + other.evaluations,
        )

    def scaled(self, factor: float) -> "QuadratureResult":
        return QuadratureResult(
            factor * self.value, abs(factor) * self.error_estimate, self.evaluations
        )


@dataclass(frozen=True)
class SingularityHint:
    """Local model ``a * |t - center|**2`` of a denominator vanishing at ``center``."""

    center: tuple
    quadratic_coefficient: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not self.quadratic_coefficient > 0:
            raise InvalidArgument("quadratic coefficient must be positive")


def gauss_rule(breaks: Sequence[float], order: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on the panels ``breaks``."""
    x, w = leggauss(order)
    breaks = np.asarray(breaks, dtype=float)
    lo, hi = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo) + half * x).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def graded_breaks(lo: float, hi: float, focus: float, finest: float, ratio: float = 0.4):
    """Panel ends on [lo, hi] refined geometrically towards ``focus``.

    Panels adjacent to the focus shrink by ``ratio`` per level until their
    size drops below ``finest``.
    """
    points = {lo, hi}
    if lo < focus < hi:
        points.add(focus)
    for side, room in ((-1.0, focus - lo), (1.0, hi - focus)):
        size = room * ratio
        while room > 0 and size > finest:
            points.add(focus + side * size)
            size *= ratio
        if room > 0 and 0 < finest < room:
            points.add(focus + side * finest)
    return np.array(sorted(p for p in points if lo <= p <= hi))


def _tensor_sum(f: Integrand, axes) -> tuple[float, float, int]:
    """Weighted sum of f and |f| over the tensor product of three 1D rules."""
    (x1, w1), (x2, w2), (x3, w3) = axes
    t2 = x2[:, None]
    t3 = x3[None, :]
    w23 = w2[:, None] * w3[None, :]
    chunk = max(1, _SLAB_POINTS // (len(x2) * len(x3)))
    total = 0.0
    total_abs = 0.0
    for start in range(0, len(x1), chunk):
        t1 = x1[start:start + chunk, None, None]
        vals = np.broadcast_to(f(t1, t2, t3), (len(t1), len(x2), len(x3)))
        wts = w1[start:start + chunk, None, None] * w23
        total += float(np.sum(vals * wts))
        total_abs += float(np.sum(np.abs(vals) * wts))
    return total, total_abs, len(x1) * len(x2) * len(x3)


def _midpoint_axis(n: int):
    h = TWO_PI / n
    return -PI + (np.arange(n) + 0.5) * h, np.full(n, h)


def _per_axis(breaks):
    if breaks is None:
        breaks = (-PI, 0.0, PI)
    arr = [np.asarray(b, dtype=float) for b in breaks] if np.ndim(breaks[0]) else None
    if arr is None:
        arr = [np.asarray(breaks, dtype=float)] * 3
    return arr


def integrate_torus(
    f: Integrand,
    tol: float = 1e-7,
    *,
    rule: str = "midpoint",
    n_start: int = 16,
    n_max: int | None = None,
    breaks=None,
) -> QuadratureResult:
    """Integrate a bounded ``f`` over T^3 to relative tolerance ``tol``.

    With ``rule="midpoint"``, ``n_start``/``n_max`` are grid sizes per axis
    (even; default maximum 512).  With ``rule="gauss"`` they are Gauss orders
    per panel (default maximum 64) and ``breaks`` gives the panel ends, one
    sequence for all axes or one per axis.

    The error estimate is the difference between the last two refinement
    levels.  ``AccuracyFailure`` carries the last estimate when the maximum
    refinement is reached first.
    """
    if not tol > 0:
        raise InvalidArgument("tolerance must be positive")
    if rule == "midpoint":
        n_max = 512 if n_max is None else n_max
        if n_start % 2:
            raise InvalidArgument("midpoint grids must have an even size")
        return _romberg_midpoint(f, tol, n_start, n_max)
    if rule == "gauss":
        n_max = 64 if n_max is None else n_max
        return _gauss_doubling(f, tol, n_start, n_max, _per_axis(breaks))
    raise InvalidArgument(f"unknown rule {rule!r}")


def _romberg_midpoint(f, tol, n_start, n_max):
    rows: list[list[float]] = []
    evaluations = 0
    n = n_start
    best = None
    while n <= n_max:
        axis = _midpoint_axis(n)
        value, scale, count = _tensor_sum(f, (axis, axis, axis))
        evaluations += count
        row = [value]
        for m, prev in enumerate(rows[-1] if rows else [], start=1):
            row.append(row[m - 1] + (row[m - 1] - prev) / (4.0**m - 1.0))
        if rows:
            err = abs(row[-1] - rows[-1][-1])
            best = QuadratureResult(row[-1], err, evaluations)
            if err <= tol * scale:
                return best
        rows.append(row)
        n *= 2
    raise AccuracyFailure(
        f"midpoint rule did not reach relative tolerance {tol:g} by N={n_max}", best
    )


def _gauss_doubling(f, tol, n_start, n_max, breaks):
    evaluations = 0
    prev = None
    best = None
    n = n_start
    while n <= n_max:
        axes = [gauss_rule(b, n) for b in breaks]
        value, scale, count = _tensor_sum(f, axes)
        evaluations += count
        if prev is not None:
            err = abs(value - prev)
            best = QuadratureResult(value, err, evaluations)
            if err <= tol * scale:
                return best
        prev = value
        n *= 2
    raise AccuracyFailure(
        f"Gauss rule did not reach relative tolerance {tol:g} by order {n_max}", best
    )


def smooth_cutoff(r, radius: float):
    """C-infinity radial cutoff: 1 for r <= radius/2, 0 for r >= radius."""
    inner = 0.5 * radius
    x = np.clip((radius - np.asarray(r, dtype=float)) / (radius - inner), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        up = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        down = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1.0 - x, 1.0)), 0.0)
    return up / (up + down)


def _spherical_sum(g, center, radial_breaks, order):
    """Sum of g(points, r) * r**2 over a spherical product rule.

    Radial panels use Gauss-Legendre of ``order``, the polar angle uses
    Gauss-Legendre in cos(psi) and the azimuth a 2*order point trapezoid rule.
    """
    r, wr = gauss_rule(radial_breaks, order)
    ct, wt = leggauss(order)
    st = np.sqrt(1.0 - ct * ct)
    n_phi = 2 * order
    phi = np.arange(n_phi) * (TWO_PI / n_phi)
    R = r[:, None, None]
    x = center[0] + R * st[None, :, None] * np.cos(phi)[None, None, :]
    y = center[1] + R * st[None, :, None] * np.sin(phi)[None, None, :]
    z = center[2] + R * ct[None, :, None] + 0.0 * phi[None, None, :]
    vals = g((wrap_angle(x), wrap_angle(y), wrap_angle(z)), R)
    total = float(np.einsum("ijk,i,j->", vals * R * R, wr, wt)) * (TWO_PI / n_phi)
    total_abs = float(np.einsum("ijk,i,j->", np.abs(vals) * R * R, wr, wt)) * (TWO_PI / n_phi)
    return total, total_abs, vals.size


def _spherical_refine(g, center, radial_breaks, tol, n_start, n_max):
    evaluations = 0
    prev = None
    best = None
    n = n_start
    while n <= n_max:
        value, scale, count = _spherical_sum(g, center, radial_breaks, n)
        evaluations += count
        if prev is not None:
            err = abs(value - prev)
            best = QuadratureResult(value, err, evaluations)
            if err <= tol * max(scale, np.finfo(float).tiny):
                return best
        prev = value
        n *= 2
    raise AccuracyFailure(
        f"spherical rule did not reach relative tolerance {tol:g} by order {n_max}", best
    )


def integrate_ball(
    f: Integrand,
    center,
    radius: float,
    tol: float = 1e-9,
    *,
    r_min: float = 0.0,
    radial_breaks: Sequence[float] | None = None,
    n_start: int = 8,
    n_max: int = 128,
) -> QuadratureResult:
    """Integrate f over the shell r_min <= |t - center| < radius in spherical coordinates.

    The r**2 Jacobian cancels an inverse-square blow-up at the centre, so such
    integrands converge like smooth ones.
    """
    if not 0 < radius <= PI or not 0 <= r_min < radius:
        raise InvalidArgument(f"need 0 <= r_min < radius <= pi, got {r_min}, {radius}")
    center = np.asarray(as_point(center))
    breaks = radial_breaks if radial_breaks is not None else (r_min, radius)
    return _spherical_refine(lambda t, r: f(*t), center, breaks, tol, n_start, n_max)


def torus_distance(t, center):
    return np.sqrt(sum(wrap_angle(ti - ci) ** 2 for ti, ci in zip(t, center)))


def _complement_breaks(center, radius):
    per_axis = []
    for c in center:
        marks = [-PI, 0.0, PI]
        for off in (-radius, -0.5 * radius, 0.5 * radius, radius):
            marks.append(float(wrap_angle(c + off)))
        per_axis.append(np.unique(np.clip(marks, -PI, PI)))
    return per_axis


def integrate_with_singularity(
    f: Integrand,
    hint: SingularityHint,
    patch_radius: float = 0.5,
    tol: float = 1e-7,
) -> QuadratureResult:
    """Integrate f over T^3 when f blows up at most like |t - center|**-2.

    The domain is split by a smooth cutoff supported in the ball of radius
    ``patch_radius``.  The inner part is integrated in spherical coordinates
    after subtracting the model 1/(a |t - center|**2), whose integral against
    the cutoff is radial and done exactly; the outer part is smooth and goes
    to the Gauss tensor rule.  The error estimate is the sum of both parts.
    """
    if not 0 < patch_radius <= PI:
        raise InvalidArgument(f"patch radius must lie in (0, pi], got {patch_radius}")
    center = np.asarray(hint.center)
    a = hint.quadratic_coefficient
    rho = patch_radius

    def inner(t, r):
        with np.errstate(divide="ignore", invalid="ignore"):
            return (f(*t) - 1.0 / (a * r * r)) * smooth_cutoff(r, rho)

    ball = _spherical_refine(inner, center, (0.0, 0.5 * rho, rho), tol, 8, 128)
    rr, wr = gauss_rule((0.5 * rho, rho), 64)
    model = 4.0 * math.pi / a * (0.5 * rho + float(np.dot(wr, smooth_cutoff(rr, rho))))

    rest = integrate_outside_patch(f, center, rho, tol)
    return QuadratureResult(ball.value + model, ball.error_estimate, ball.evaluations) + rest


def integrate_outside_patch(f: Integrand, center, radius: float, tol: float = 1e-7):
    """Integrate f * (1 - smooth_cutoff(|t - center|, radius)) over T^3.

    The weight vanishes on the ball of radius radius/2, so f may be singular
    at ``center``.
    """
    if not 0 < radius <= PI:
        raise InvalidArgument(f"patch radius must lie in (0, pi], got {radius}")
    center = np.asarray(as_point(center))

    def outer(t1, t2, t3):
        cut = 1.0 - smooth_cutoff(torus_distance((t1, t2, t3), center), radius)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = f(t1, t2, t3) * cut
        return np.where(cut > 0, vals, 0.0)

    return integrate_torus(
        outer, tol, rule="gauss", n_start=8, n_max=64, breaks=_complement_breaks(center, radius)
    )
